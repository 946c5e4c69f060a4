"""
No-U-Turn Hamiltonian Monte Carlo with multinomial trajectory sampling.

Warmup adapts the step size by dual averaging toward ``target_accept`` and a
diagonal inverse metric from regularized variances of expanding windows:

    | init buffer (15%) | slow windows 25, 50, 100, ... (75%) | term buffer (10%) |

After every slow window the step size search restarts with the new metric.
"""

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from core.exceptions import InvalidArgumentError, NonFiniteError, NumericalError, SamplerError
from core.rng import Stream, generator
from schema.sampler import NutsConfig

if TYPE_CHECKING:
    from schema.reports import DiagnosticsReport

logger = logging.getLogger(__name__)

LogpAndGrad = Callable[[np.ndarray], tuple[float, np.ndarray]]

# dual averaging constants
GAMMA = 0.05
T0 = 10.0
KAPPA = 0.75

MIN_STEP_SIZE = 1e-10
MAX_STEP_SIZE = 1e7


# =====================================================
# Hamiltonian dynamics
# =====================================================

@dataclass(frozen=True)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray
    logp: float
    grad: np.ndarray


def _evaluate(logp_and_grad: LogpAndGrad, q: np.ndarray) -> tuple[float, np.ndarray]:
    """Log density and gradient; numerical failures count as -inf."""
    try:
        logp, grad = logp_and_grad(q)
    except NumericalError as exc:
        logger.debug("Log density failed at proposal: %s", exc.message)
        return -math.inf, np.zeros_like(q)
    grad = np.asarray(grad, dtype=float)
    if not math.isfinite(logp) or not np.all(np.isfinite(grad)):
        return -math.inf, np.zeros_like(q)
    return float(logp), grad


def kinetic_energy(p: np.ndarray, inv_metric: np.ndarray) -> float:
    return 0.5 * float(p @ (inv_metric * p))


def hamiltonian(z: PhasePoint, inv_metric: np.ndarray) -> float:
    h = -z.logp + kinetic_energy(z.p, inv_metric)
    return h if not math.isnan(h) else math.inf


def leapfrog(
    z: PhasePoint, step_size: float, inv_metric: np.ndarray, logp_and_grad: LogpAndGrad
) -> PhasePoint:
    """One velocity-Verlet step; a negative ``step_size`` integrates backward."""
    p_half = z.p + 0.5 * step_size * z.grad
    q = z.q + step_size * inv_metric * p_half
    logp, grad = _evaluate(logp_and_grad, q)
    p = p_half + 0.5 * step_size * grad
    return PhasePoint(q, p, logp, grad)


def find_reasonable_epsilon(
    z: PhasePoint,
    inv_metric: np.ndarray,
    logp_and_grad: LogpAndGrad,
    rng: np.random.Generator,
    step_size: float = 1.0,
) -> float:
    """Double or halve the step size until one-step acceptance crosses 1/2."""
    p = rng.standard_normal(z.q.size) / np.sqrt(inv_metric)
    start = PhasePoint(z.q, p, z.logp, z.grad)
    h0 = hamiltonian(start, inv_metric)

    def log_accept(eps: float) -> float:
        return h0 - hamiltonian(leapfrog(start, eps, inv_metric, logp_and_grad), inv_metric)

    delta = log_accept(step_size)
    direction = 1 if delta > math.log(0.5) else -1
    while direction * delta > -direction * math.log(2.0):
        step_size *= 2.0**direction
        if step_size < MIN_STEP_SIZE:
            raise SamplerError(
                "step size collapsed while searching for a reasonable value",
                details={"step_size": step_size},
            )
        if step_size > MAX_STEP_SIZE:
            break
        delta = log_accept(step_size)
    return min(step_size, MAX_STEP_SIZE)


# =====================================================
# Trajectory
# =====================================================

@dataclass
class _Counters:
    n_leapfrog: int = 0
    sum_metro_prob: float = 0.0
    divergent: bool = False


@dataclass(frozen=True)
class _Subtree:
    end: PhasePoint
    proposal: PhasePoint
    p_beg: np.ndarray
    p_end: np.ndarray
    p_sharp_beg: np.ndarray
    p_sharp_end: np.ndarray
    rho: np.ndarray
    log_sum_weight: float


def _no_u_turn(p_sharp_minus: np.ndarray, p_sharp_plus: np.ndarray, rho: np.ndarray) -> bool:
    return float(p_sharp_plus @ rho) > 0 and float(p_sharp_minus @ rho) > 0


@dataclass(frozen=True)
class TransitionStats:
    accept_stat: float
    n_leapfrog: int
    tree_depth: int
    divergent: bool
    energy: float


class NUTSKernel:
    """One chain's transition operator for a fixed step size and metric."""

    def __init__(self, logp_and_grad: LogpAndGrad, cfg: NutsConfig, rng: np.random.Generator):
        self.logp_and_grad = logp_and_grad
        self.cfg = cfg
        self.rng = rng
        self.step_size = 1.0
        self.inv_metric: np.ndarray = np.ones(0)

    def _build_tree(
        self, start: PhasePoint, depth: int, direction: int, h0: float, counters: _Counters
    ) -> _Subtree | None:
        """Subtree of 2**depth leapfrog steps; None when it diverges or turns."""
        if depth == 0:
            z = leapfrog(start, direction * self.step_size, self.inv_metric, self.logp_and_grad)
            counters.n_leapfrog += 1
            h = hamiltonian(z, self.inv_metric)
            delta = h0 - h
            counters.sum_metro_prob += 1.0 if delta > 0 else math.exp(delta)
            if h - h0 > self.cfg.divergence_threshold:
                counters.divergent = True
                return None
            p_sharp = self.inv_metric * z.p
            return _Subtree(z, z, z.p, z.p, p_sharp, p_sharp, z.p.copy(), delta)

        init = self._build_tree(start, depth - 1, direction, h0, counters)
        if init is None:
            return None
        final = self._build_tree(init.end, depth - 1, direction, h0, counters)
        if final is None:
            return None

        log_sum_weight = float(np.logaddexp(init.log_sum_weight, final.log_sum_weight))
        proposal = init.proposal
        if self.rng.uniform() < math.exp(final.log_sum_weight - log_sum_weight):
            proposal = final.proposal

        rho = init.rho + final.rho
        persist = (
            _no_u_turn(init.p_sharp_beg, final.p_sharp_end, rho)
            and _no_u_turn(init.p_sharp_beg, final.p_sharp_beg, init.rho + final.p_beg)
            and _no_u_turn(init.p_sharp_end, final.p_sharp_end, final.rho + init.p_end)
        )
        if not persist:
            return None
        return _Subtree(
            end=final.end,
            proposal=proposal,
            p_beg=init.p_beg,
            p_end=final.p_end,
            p_sharp_beg=init.p_sharp_beg,
            p_sharp_end=final.p_sharp_end,
            rho=rho,
            log_sum_weight=log_sum_weight,
        )

    def transition(self, q: np.ndarray, logp: float, grad: np.ndarray) -> tuple[PhasePoint, TransitionStats]:
        rng = self.rng
        p0 = rng.standard_normal(q.size) / np.sqrt(self.inv_metric)
        z0 = PhasePoint(q, p0, logp, grad)
        h0 = hamiltonian(z0, self.inv_metric)
        counters = _Counters()

        fwd_end = bck_end = sample = z0
        p_sharp0 = self.inv_metric * p0
        p_fwd_fwd = p_fwd_bck = p_bck_fwd = p_bck_bck = p0
        ps_fwd_fwd = ps_fwd_bck = ps_bck_fwd = ps_bck_bck = p_sharp0
        rho = p0.copy()
        rho_fwd = rho_bck = np.zeros_like(p0)
        log_sum_weight = 0.0

        depth = 0
        while depth < self.cfg.max_tree_depth:
            if rng.uniform() > 0.5:
                rho_bck, p_bck_fwd, ps_bck_fwd = rho, p_fwd_fwd, ps_fwd_fwd
                tree = self._build_tree(fwd_end, depth, 1, h0, counters)
                if tree is None:
                    break
                fwd_end = tree.end
                rho_fwd = tree.rho
                p_fwd_bck, p_fwd_fwd = tree.p_beg, tree.p_end
                ps_fwd_bck, ps_fwd_fwd = tree.p_sharp_beg, tree.p_sharp_end
            else:
                rho_fwd, p_fwd_bck, ps_fwd_bck = rho, p_bck_bck, ps_bck_bck
                tree = self._build_tree(bck_end, depth, -1, h0, counters)
                if tree is None:
                    break
                bck_end = tree.end
                rho_bck = tree.rho
                p_bck_fwd, p_bck_bck = tree.p_beg, tree.p_end
                ps_bck_fwd, ps_bck_bck = tree.p_sharp_beg, tree.p_sharp_end
            depth += 1

            # biased progressive sampling favours the new subtree
            if tree.log_sum_weight > log_sum_weight or rng.uniform() < math.exp(
                tree.log_sum_weight - log_sum_weight
            ):
                sample = tree.proposal
            log_sum_weight = float(np.logaddexp(log_sum_weight, tree.log_sum_weight))

            rho = rho_bck + rho_fwd
            persist = (
                _no_u_turn(ps_bck_bck, ps_fwd_fwd, rho)
                and _no_u_turn(ps_bck_bck, ps_fwd_bck, rho_bck + p_fwd_bck)
                and _no_u_turn(ps_bck_fwd, ps_fwd_fwd, rho_fwd + p_bck_fwd)
            )
            if not persist:
                break

        n = max(counters.n_leapfrog, 1)
        stats = TransitionStats(
            accept_stat=counters.sum_metro_prob / n,
            n_leapfrog=counters.n_leapfrog,
            tree_depth=depth,
            divergent=counters.divergent,
            energy=hamiltonian(sample, self.inv_metric),
        )
        return sample, stats


# =====================================================
# Adaptation
# =====================================================

class DualAveraging:
    """Step-size adaptation toward a target mean acceptance statistic."""

    def __init__(self, target_accept: float, step_size: float):
        self.target = target_accept
        self.restart(step_size)

    def restart(self, step_size: float) -> None:
        self.mu = math.log(10.0 * step_size)
        self.counter = 0
        self.s_bar = 0.0
        self.x_bar = 0.0

    def update(self, accept_stat: float) -> float:
        self.counter += 1
        accept_stat = min(1.0, accept_stat)
        eta = 1.0 / (self.counter + T0)
        self.s_bar = (1.0 - eta) * self.s_bar + eta * (self.target - accept_stat)
        x = self.mu - self.s_bar * math.sqrt(self.counter) / GAMMA
        x_eta = self.counter ** (-KAPPA)
        self.x_bar = (1.0 - x_eta) * self.x_bar + x_eta * x
        return math.exp(x)

    @property
    def final_step_size(self) -> float:
        return math.exp(self.x_bar)


class WelfordVariance:
    def __init__(self, dim: int):
        self.n = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def add(self, x: np.ndarray) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    def regularized(self) -> np.ndarray:
        """Sample variance shrunk toward 1e-3."""
        n = self.n
        var = self.m2 / (n - 1) if n > 1 else np.ones_like(self.m2)
        return (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))


class WindowSchedule:
    """Expanding metric-adaptation windows between the fast buffers."""

    def __init__(self, cfg: NutsConfig):
        n = cfg.n_warmup
        self.n_warmup = n
        self.enabled = n >= 20
        self.init_buffer = int(cfg.init_buffer * n)
        self.term_buffer = int(cfg.term_buffer * n)
        self.window = max(1, min(cfg.base_window, n - self.init_buffer - self.term_buffer))
        self.next_end = self.init_buffer + self.window - 1
        self.counter = 0

    @property
    def last_slow(self) -> int:
        return self.n_warmup - self.term_buffer - 1

    def in_window(self) -> bool:
        return (
            self.enabled
            and self.init_buffer <= self.counter < self.n_warmup - self.term_buffer
        )

    def _window_ends(self) -> bool:
        return self.enabled and self.counter == self.next_end and self.counter != self.n_warmup

    def _advance(self) -> None:
        if self.next_end == self.last_slow:
            return
        self.window *= 2
        self.next_end = self.counter + self.window
        if self.next_end != self.last_slow and self.next_end + 2 * self.window >= self.n_warmup - self.term_buffer:
            self.next_end = self.last_slow

    def step(self) -> bool:
        """Advance one iteration; True when a slow window just closed."""
        ends = self._window_ends()
        if ends:
            self._advance()
        self.counter += 1
        return ends


# =====================================================
# Results
# =====================================================

@dataclass(frozen=True, eq=False)
class PosteriorSamples:
    """Post-warmup draws in unconstrained space, chain-major."""

    draws: np.ndarray
    chain_ids: np.ndarray
    n_chains: int
    logp: np.ndarray
    accept_stats: np.ndarray
    divergent: np.ndarray
    tree_depths: np.ndarray
    n_leapfrog: np.ndarray
    step_sizes: list[float]
    inv_metrics: list[np.ndarray] = field(repr=False)
    warmup_divergences: int = 0
    max_tree_depth: int = 10

    @property
    def n_draws(self) -> int:
        return int(self.draws.shape[0])

    @property
    def dim(self) -> int:
        return int(self.draws.shape[1])

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accept_stats)) if self.accept_stats.size else 0.0

    @property
    def divergences(self) -> int:
        return int(np.sum(self.divergent))

    @property
    def tree_depth_saturations(self) -> int:
        return int(np.sum(self.tree_depths >= self.max_tree_depth))

    def by_chain(self) -> np.ndarray:
        """Draws reshaped to (n_chains, n_per_chain, dim)."""
        return self.draws.reshape(self.n_chains, -1, self.dim)

    @cached_property
    def report(self) -> "DiagnosticsReport":
        from numerics.diagnostics import diagnostics

        return diagnostics(self)


@dataclass
class _ChainResult:
    draws: np.ndarray
    logp: np.ndarray
    accept: np.ndarray
    divergent: np.ndarray
    depth: np.ndarray
    n_leapfrog: np.ndarray
    step_size: float
    inv_metric: np.ndarray
    warmup_divergences: int


# =====================================================
# Sampler
# =====================================================

def _run_chain(logp_and_grad: LogpAndGrad, init: np.ndarray, cfg: NutsConfig, chain: int) -> _ChainResult:
    rng = generator(cfg.seed, Stream.CHAINS, chain)
    d = init.size
    q = init.copy()
    logp, grad = _evaluate(logp_and_grad, q)
    if not math.isfinite(logp):
        raise NonFiniteError(f"log density is not finite at the initial point of chain {chain}")

    kernel = NUTSKernel(logp_and_grad, cfg, rng)
    kernel.inv_metric = np.ones(d)
    needs_step = cfg.n_warmup > 0 or cfg.n_samples > 0
    if cfg.initial_step_size is not None:
        kernel.step_size = cfg.initial_step_size
    elif needs_step:
        kernel.step_size = find_reasonable_epsilon(
            PhasePoint(q, np.zeros(d), logp, grad), kernel.inv_metric, logp_and_grad, rng
        )

    adapter = DualAveraging(cfg.target_accept, kernel.step_size)
    windows = WindowSchedule(cfg)
    estimator = WelfordVariance(d)
    warmup_divergences = 0

    for it in range(cfg.n_warmup):
        z, stats = kernel.transition(q, logp, grad)
        q, logp, grad = z.q, z.logp, z.grad
        warmup_divergences += stats.divergent
        kernel.step_size = adapter.update(stats.accept_stat)

        if windows.in_window():
            estimator.add(q)
        if windows.step():
            kernel.inv_metric = estimator.regularized()
            estimator = WelfordVariance(d)
            kernel.step_size = find_reasonable_epsilon(
                PhasePoint(q, np.zeros(d), logp, grad), kernel.inv_metric, logp_and_grad, rng,
                step_size=kernel.step_size,
            )
            adapter.restart(kernel.step_size)
            logger.info(
                "Chain %d: metric window closed at iteration %d (step size %.3g)",
                chain, it + 1, kernel.step_size,
            )

    if cfg.n_warmup > 0:
        kernel.step_size = adapter.final_step_size
        if warmup_divergences == cfg.n_warmup or not kernel.step_size > MIN_STEP_SIZE:
            raise SamplerError(
                f"warmup of chain {chain} failed: step size collapsed",
                details={
                    "chain": chain,
                    "warmup_divergences": warmup_divergences,
                    "step_size": kernel.step_size,
                },
            )
        logger.info(
            "Chain %d: warmup done (step size %.4g, %d divergences)",
            chain, kernel.step_size, warmup_divergences,
        )

    n = cfg.n_samples
    draws = np.empty((n, d))
    logps = np.empty(n)
    accept = np.empty(n)
    divergent = np.zeros(n, dtype=bool)
    depth = np.zeros(n, dtype=int)
    n_leapfrog = np.zeros(n, dtype=int)
    for i in range(n):
        z, stats = kernel.transition(q, logp, grad)
        q, logp, grad = z.q, z.logp, z.grad
        draws[i], logps[i], accept[i] = q, logp, stats.accept_stat
        divergent[i], depth[i], n_leapfrog[i] = stats.divergent, stats.tree_depth, stats.n_leapfrog

    if divergent.any():
        logger.warning("Chain %d: %d divergent transitions after warmup", chain, int(divergent.sum()))
    return _ChainResult(
        draws, logps, accept, divergent, depth, n_leapfrog,
        kernel.step_size, kernel.inv_metric.copy(), warmup_divergences,
    )


def nuts_sample(
    logp_and_grad: LogpAndGrad,
    init: np.ndarray,
    cfg: NutsConfig,
    max_workers: int = 1,
) -> PosteriorSamples:
    """
    Run ``cfg.n_chains`` chains from ``init`` (one row per chain, or one shared row).

    Each chain draws from its own seed substream, so results do not depend on
    ``max_workers``.
    """
    init = np.atleast_2d(np.asarray(init, dtype=float))
    if init.shape[0] == 1:
        init = np.repeat(init, cfg.n_chains, axis=0)
    if init.shape[0] != cfg.n_chains:
        raise InvalidArgumentError(
            f"got {init.shape[0]} initial points for {cfg.n_chains} chains"
        )

    def run(chain: int) -> _ChainResult:
        return _run_chain(logp_and_grad, init[chain], cfg, chain)

    if max_workers > 1 and cfg.n_chains > 1:
        with ThreadPoolExecutor(max_workers=min(max_workers, cfg.n_chains)) as pool:
            results = list(pool.map(run, range(cfg.n_chains)))
    else:
        results = [run(c) for c in range(cfg.n_chains)]

    return PosteriorSamples(
        draws=np.concatenate([r.draws for r in results]),
        chain_ids=np.repeat(np.arange(cfg.n_chains), cfg.n_samples),
        n_chains=cfg.n_chains,
        logp=np.concatenate([r.logp for r in results]),
        accept_stats=np.concatenate([r.accept for r in results]),
        divergent=np.concatenate([r.divergent for r in results]),
        tree_depths=np.concatenate([r.depth for r in results]),
        n_leapfrog=np.concatenate([r.n_leapfrog for r in results]),
        step_sizes=[r.step_size for r in results],
        inv_metrics=[r.inv_metric for r in results],
        warmup_divergences=sum(r.warmup_divergences for r in results),
        max_tree_depth=cfg.max_tree_depth,
    )
