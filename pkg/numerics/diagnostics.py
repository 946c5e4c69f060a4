"""
Posterior summaries: moments, central intervals, effective sample size
(Geyer initial monotone sequence over FFT autocovariances) and split R-hat.
"""

import logging
import math
from collections.abc import Mapping, Sequence
from typing import TYPE_CHECKING

import numpy as np

from core.exceptions import InvalidArgumentError
from schema.reports import DiagnosticsReport, ParameterSummary, SummaryReport

if TYPE_CHECKING:
    from numerics.nuts import PosteriorSamples

logger = logging.getLogger(__name__)

INTERVAL = (0.025, 0.975)


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of one chain at every lag."""
    n = x.size
    centered = x - x.mean()
    size = 2 ** math.ceil(math.log2(2 * n))
    spectrum = np.fft.rfft(centered, n=size)
    acov = np.fft.irfft(spectrum * np.conjugate(spectrum), n=size)[:n]
    return acov / n


def effective_sample_size(chains: np.ndarray) -> float:
    """
    ESS of draws shaped (n_chains, n_per_chain).

    Returns NaN when the draws are constant or too short to estimate.
    """
    chains = np.atleast_2d(np.asarray(chains, dtype=float))
    m, n = chains.shape
    if n < 4 or not np.all(np.isfinite(chains)):
        return math.nan

    acov = np.stack([_autocovariance(c) for c in chains])
    chain_mean = chains.mean(axis=1)
    chain_var = acov[:, 0] * n / (n - 1.0)
    mean_var = float(chain_var.mean())
    var_plus = mean_var * (n - 1.0) / n
    if m > 1:
        var_plus += float(np.var(chain_mean, ddof=1))
    if not var_plus > 0:
        return math.nan

    acov_mean = acov.mean(axis=0)
    rho = np.zeros(n)
    rho[0] = 1.0
    rho_even = 1.0
    rho_odd = 1.0 - (mean_var - acov_mean[1]) / var_plus
    rho[1] = rho_odd

    # initial positive sequence
    t = 1
    while t < n - 5 and rho_even + rho_odd > 0:
        rho_even = 1.0 - (mean_var - acov_mean[t + 1]) / var_plus
        rho_odd = 1.0 - (mean_var - acov_mean[t + 2]) / var_plus
        if rho_even + rho_odd >= 0:
            rho[t + 1] = rho_even
            rho[t + 2] = rho_odd
        t += 2
    max_t = t
    if rho_even > 0:
        rho[max_t + 1] = rho_even

    # initial monotone sequence
    t = 1
    while t <= max_t - 4:
        if rho[t + 1] + rho[t + 2] > rho[t - 1] + rho[t]:
            rho[t + 1] = rho[t + 2] = 0.5 * (rho[t - 1] + rho[t])
        t += 2

    total = m * n
    tau = -1.0 + 2.0 * float(np.sum(rho[:max_t])) + rho[max_t + 1]
    tau = max(tau, 1.0 / math.log10(total))
    return total / tau


def split_rhat(chains: np.ndarray) -> float:
    """Potential scale reduction over half-chains; NaN when undefined."""
    chains = np.atleast_2d(np.asarray(chains, dtype=float))
    m, n = chains.shape
    half = n // 2
    if m < 2 or half < 2:
        return math.nan
    halves = np.concatenate([chains[:, :half], chains[:, n - half:]])
    within = float(np.mean(np.var(halves, axis=1, ddof=1)))
    between = half * float(np.var(halves.mean(axis=1), ddof=1))
    if not within > 0:
        return math.nan
    var_hat = (half - 1.0) / half * within + between / half
    return math.sqrt(var_hat / within)


def _clean(x: float) -> float | None:
    return None if x is None or not math.isfinite(x) else float(x)


def summarize_parameter(
    name: str,
    chains: np.ndarray,
    truth: float | None = None,
    with_rhat: bool = False,
) -> ParameterSummary:
    """Summary of one parameter's draws shaped (n_chains, n_per_chain)."""
    chains = np.atleast_2d(np.asarray(chains, dtype=float))
    flat = chains.ravel()
    lower, upper = np.quantile(flat, INTERVAL)
    ess = effective_sample_size(chains)
    covered = None if truth is None else bool(lower <= truth <= upper)
    return ParameterSummary(
        name=name,
        mean=float(flat.mean()),
        std=float(flat.std(ddof=1)) if flat.size > 1 else 0.0,
        lower=float(lower),
        upper=float(upper),
        ess=_clean(ess),
        ess_reliable=math.isfinite(ess),
        rhat=_clean(split_rhat(chains)) if with_rhat else None,
        truth=truth,
        covered=covered,
    )


def diagnostics(
    samples: "PosteriorSamples",
    names: Sequence[str] | None = None,
    values: np.ndarray | None = None,
) -> DiagnosticsReport:
    """
    Per-parameter report for ``samples``.

    ``values`` optionally replaces the unconstrained draws by derived
    quantities (one row per draw, same chain-major order) named by ``names``.
    """
    if samples.n_draws == 0:
        raise InvalidArgumentError("no posterior draws to summarize")
    table = samples.draws if values is None else np.asarray(values, dtype=float)
    if table.shape[0] != samples.n_draws:
        raise InvalidArgumentError("derived values must have one row per draw")
    names = list(names) if names is not None else [f"x{i}" for i in range(table.shape[1])]
    if len(names) != table.shape[1]:
        raise InvalidArgumentError(f"{len(names)} names for {table.shape[1]} columns")

    with_rhat = samples.n_chains >= 2
    per_chain = table.reshape(samples.n_chains, -1, table.shape[1])
    parameters = [
        summarize_parameter(name, per_chain[:, :, j], with_rhat=with_rhat)
        for j, name in enumerate(names)
    ]
    unreliable = [p.name for p in parameters if not p.ess_reliable]
    if unreliable:
        logger.warning("ESS could not be estimated for %s", ", ".join(unreliable[:10]))

    return DiagnosticsReport(
        n_chains=samples.n_chains,
        n_draws=samples.n_draws,
        acceptance_rate=samples.acceptance_rate,
        divergences=samples.divergences,
        tree_depth_saturations=samples.tree_depth_saturations,
        step_sizes=list(samples.step_sizes),
        parameters=parameters,
        metadata={"warmup_divergences": samples.warmup_divergences},
    )


def summarize_draws(
    draws: Mapping[str, np.ndarray],
    truth: Mapping[str, float] | None = None,
    chain_ids: np.ndarray | None = None,
) -> SummaryReport:
    """Posterior mean, std, 95% interval and coverage of each named column."""
    if not draws:
        raise InvalidArgumentError("no parameters to summarize")
    lengths = {len(np.asarray(v)) for v in draws.values()}
    if len(lengths) != 1 or 0 in lengths:
        raise InvalidArgumentError("draw columns must be nonempty and of equal length")
    (n_draws,) = lengths

    chains = np.zeros(n_draws, dtype=int) if chain_ids is None else np.asarray(chain_ids)
    labels = np.unique(chains)
    counts = {int(np.sum(chains == c)) for c in labels}
    balanced = len(counts) == 1

    parameters = []
    for name, column in draws.items():
        column = np.asarray(column, dtype=float)
        shaped = np.stack([column[chains == c] for c in labels]) if balanced else column[None, :]
        value = None if truth is None or name not in truth else float(truth[name])
        parameters.append(summarize_parameter(name, shaped, truth=value, with_rhat=shaped.shape[0] >= 2))

    covered = [p.covered for p in parameters if p.covered is not None]
    return SummaryReport(
        n_draws=n_draws,
        parameters=parameters,
        truth_provided=truth is not None,
        all_covered=all(covered) if covered else None,
    )
