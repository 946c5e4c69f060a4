"""
CSV and JSON artifacts.

Field CSVs are long-format tables ``t,s,<value columns>[,observed]`` in
time-major order; draws CSVs are ``chain,draw,<parameters>``.  Floats are
written with 17 significant digits and NaN as an empty cell so that values
round-trip exactly and reruns are byte-identical.
"""

import json
import logging
import os
import shutil
import tempfile
from collections.abc import Generator, Mapping, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import BaseModel

from core.exceptions import DataFileError, NotFoundError
from models.grid import Field, SpaceTimeGrid
from models.simulation import SimulationTruth

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
TRUTH_CSV = "truth.csv"
TRUTH_JSON = "truth.json"
OBS_CSV = "obs.csv"
DRAWS_CSV = "draws.csv"
DIAGNOSTICS_JSON = "diagnostics.json"
SUMMARY_JSON = "summary.json"


# =====================================================
# Staged output
# =====================================================

@contextmanager
def staged_output(out_dir: Path | str) -> Generator[Path, None, None]:
    """
    Yield a staging directory whose files move into ``out_dir`` on success.

    On any exception the staging directory is removed and ``out_dir`` is left
    untouched.
    """
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}.staging-", dir=out_dir.parent))
    try:
        yield staging
        out_dir.mkdir(parents=True, exist_ok=True)
        names = sorted(p.name for p in staging.iterdir())
        for name in names:
            os.replace(staging / name, out_dir / name)
        logger.info("Committed %d artifact(s) to %s", len(names), out_dir, extra={"artifacts": names})
    finally:
        shutil.rmtree(staging, ignore_errors=True)


# =====================================================
# JSON
# =====================================================

def write_json(path: Path | str, payload: BaseModel | Mapping[str, Any]) -> Path:
    path = Path(path)
    data = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else dict(payload)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


def read_json(path: Path | str) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise NotFoundError("JSON artifact", path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFileError(path, f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise DataFileError(path, "expected a JSON object")
    return data


# =====================================================
# CSV
# =====================================================

def _write_csv(path: Path, frame: pd.DataFrame) -> Path:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    return path


def _read_csv(path: Path | str, required: Sequence[str], resource: str) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise NotFoundError(resource, path)
    try:
        frame = pd.read_csv(path)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataFileError(path, f"unreadable CSV: {exc}") from exc
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataFileError(path, f"missing columns {missing}; found {list(frame.columns)}")
    return frame


def write_fields_csv(
    path: Path | str,
    grid: SpaceTimeGrid,
    columns: Mapping[str, np.ndarray],
    mask: np.ndarray | None = None,
) -> Path:
    """One row per grid node; every column is a (T, n) array."""
    points = grid.points()
    data: dict[str, Any] = {"t": points[:, 1], "s": points[:, 0]}
    for name, values in columns.items():
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"column {name!r} has shape {values.shape}, grid is {grid.shape}")
        data[name] = values.ravel()
    if mask is not None:
        data["observed"] = np.asarray(mask, dtype=bool).ravel().astype(int)
    return _write_csv(Path(path), pd.DataFrame(data))


def read_fields_csv(
    path: Path | str, names: Sequence[str], with_mask: bool = False
) -> tuple[SpaceTimeGrid, dict[str, np.ndarray], np.ndarray | None]:
    """Inverse of :func:`write_fields_csv`; the grid is rebuilt from the unique t and s values."""
    required = ["t", "s", *names] + (["observed"] if with_mask else [])
    frame = _read_csv(path, required, "field CSV")
    if frame[["t", "s"]].isna().any().any():
        raise DataFileError(path, "t and s must be present on every row")
    if frame.duplicated(["t", "s"]).any():
        raise DataFileError(path, "duplicate (t, s) rows")

    t_nodes = np.unique(frame["t"].to_numpy(dtype=float))
    s_nodes = np.unique(frame["s"].to_numpy(dtype=float))
    if len(frame) != t_nodes.size * s_nodes.size:
        raise DataFileError(path, f"{len(frame)} rows do not form a {t_nodes.size}x{s_nodes.size} grid")
    try:
        grid = SpaceTimeGrid(s_nodes, t_nodes)
    except Exception as exc:
        raise DataFileError(path, f"invalid grid: {exc}") from exc

    frame = frame.sort_values(["t", "s"], kind="stable")
    values = {name: frame[name].to_numpy(dtype=float).reshape(grid.shape) for name in names}
    mask = None
    if with_mask:
        observed = frame["observed"]
        if observed.isna().any() or not observed.isin([0, 1]).all():
            raise DataFileError(path, "observed column must contain only 0 and 1")
        mask = observed.to_numpy(dtype=int).astype(bool).reshape(grid.shape)
    return grid, values, mask


def write_field_csv(path: Path | str, field: Field, value_name: str = "value") -> Path:
    return write_fields_csv(path, field.grid, {value_name: field.values}, field.mask)


def read_field_csv(path: Path | str, value_name: str = "value") -> Field:
    grid, values, mask = read_fields_csv(path, [value_name], with_mask=True)
    data = values[value_name]
    if np.any(~np.isfinite(data[mask])):
        raise DataFileError(path, f"observed rows must have a finite {value_name}")
    return Field(grid, data, mask)


def write_draws_csv(
    path: Path | str,
    rows: Sequence[Mapping[str, float]],
    chain_ids: Sequence[int],
    columns: Sequence[str],
) -> Path:
    """Draw rows with ``chain`` and per-chain ``draw`` counters prepended."""
    if len(rows) != len(chain_ids):
        raise ValueError("one chain id per draw row is required")
    frame = pd.DataFrame(list(rows), columns=list(columns))
    chains = np.asarray(chain_ids, dtype=int)
    draw = np.zeros(chains.size, dtype=int)
    for c in np.unique(chains):
        where = chains == c
        draw[where] = np.arange(int(where.sum()))
    frame.insert(0, "draw", draw)
    frame.insert(0, "chain", chains)
    return _write_csv(Path(path), frame)


def read_draws_csv(path: Path | str, required: Sequence[str] = ()) -> pd.DataFrame:
    frame = _read_csv(path, ["chain", "draw", *required], "draws CSV")
    if frame.empty:
        raise DataFileError(path, "no draws")
    values = frame.drop(columns=["chain", "draw"])
    if values.isna().any().any():
        raise DataFileError(path, "draws contain empty cells")
    return frame


def write_table_csv(path: Path | str, columns: Mapping[str, np.ndarray]) -> Path:
    return _write_csv(Path(path), pd.DataFrame({k: np.asarray(v) for k, v in columns.items()}))


# =====================================================
# Simulation artifacts
# =====================================================

def write_truth(directory: Path | str, truth: SimulationTruth) -> list[Path]:
    """truth.csv (every component and covariate), obs.csv and truth.json."""
    directory = Path(directory)
    grid = truth.grid
    columns = {
        "u_true": truth.u_true.values,
        "u_tilde": truth.u_tilde.values,
        "mu": truth.mu.values,
        "nu": truth.nu.values,
    }
    columns.update({f"x{j + 1}": x.values for j, x in enumerate(truth.covariates)})
    metadata = {
        "seed": truth.seed,
        "grid": {
            "n": grid.n,
            "T": grid.T,
            "s_min": float(grid.s_nodes[0]),
            "s_max": float(grid.s_nodes[-1]),
            "t_max": float(grid.t_nodes[-1]),
        },
        "n_observed": int(truth.observations.mask.sum()),
        "parameters": truth.parameters(),
    }
    return [
        write_fields_csv(directory / TRUTH_CSV, grid, columns),
        write_field_csv(directory / OBS_CSV, truth.observations, value_name="z"),
        write_json(directory / TRUTH_JSON, metadata),
    ]


def read_observations(path: Path | str) -> Field:
    return read_field_csv(path, value_name="z")


def read_covariates(path: Path | str, n_covariates: int = 2) -> tuple[SpaceTimeGrid, np.ndarray]:
    """Covariate columns x1..xp of truth.csv stacked as (T, n, p)."""
    names = [f"x{j + 1}" for j in range(n_covariates)]
    grid, values, _ = read_fields_csv(path, names)
    X = np.stack([values[name] for name in names], axis=-1)
    if not np.all(np.isfinite(X)):
        raise DataFileError(path, "covariates must be finite everywhere")
    return grid, X


def read_truth_field(path: Path | str, name: str) -> tuple[SpaceTimeGrid, np.ndarray]:
    grid, values, _ = read_fields_csv(path, [name])
    return grid, values[name]


def read_truth_parameters(path: Path | str) -> dict[str, float]:
    data = read_json(path)
    parameters = data.get("parameters")
    if not isinstance(parameters, dict):
        raise DataFileError(path, "missing 'parameters' object")
    try:
        return {str(k): float(v) for k, v in parameters.items()}
    except (TypeError, ValueError) as exc:
        raise DataFileError(path, f"non-numeric parameter value: {exc}") from exc
