# wegner_mc.py
"""
Monte Carlo estimates of the multi-level Wegner events

    P(C_eps(H_w(g) - E) >= m)        and        P(|det H_hat_w| <= delta),

with Wilson intervals, log-log scaling fits and the comparison against the
bounds |ln(N eps/g) (N eps/g)^alpha|^m and (2 K alpha)^N ln^N(1/delta) delta^alpha.

Trials are keyed by (master seed, trial index). Sweeps draw one Hamiltonian
per trial and evaluate every threshold on it, so events are nested trial by
trial. Work is split into contiguous trial chunks and folded back in trial order.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

import settings
from errors import InsufficientPositivePoints, PreconditionViolation, SpectralError, TrialFailure
from hermitian_core import determinant, hermitian_eigenvalues, is_invertible
from random_models import (
    ModelSpec,
    SampleSeed,
    check_reduced_hopping,
    sample_hamiltonian,
    sample_reduced_hamiltonian,
)
from regularity import scalar_event_probability, wilson_interval

log = logging.getLogger(__name__)

CHUNKS_PER_WORKER = 4
MINAMI_GAP = 0.3


# ---------- Records ----------

@dataclass(frozen=True)
class McReport:
    eps: float
    m: int
    trials: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float
    bound_value: float
    seed: int

    @property
    def implied_constant(self) -> Optional[float]:
        """p_hat / bound_value, the constant this run needs in front of the bound."""
        if not math.isfinite(self.bound_value) or self.bound_value <= 0:
            return None
        return self.p_hat / self.bound_value

    @property
    def rule_of_three(self) -> Optional[float]:
        return 3.0 / self.trials if self.successes == 0 else None

    def to_document(self) -> Dict[str, Any]:
        doc = asdict(self)
        doc["bound_value"] = self.bound_value if math.isfinite(self.bound_value) else None
        doc["implied_constant"] = self.implied_constant
        doc["rule_of_three"] = self.rule_of_three
        return doc


@dataclass(frozen=True)
class ScalingFit:
    eps_grid: Tuple[float, ...]
    p_hats: Tuple[float, ...]
    exponent: float
    intercept: float
    r_squared: float

    def to_document(self) -> Dict[str, Any]:
        return {
            "eps_grid": list(self.eps_grid),
            "p_hats": list(self.p_hats),
            "exponent": self.exponent,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


@dataclass(frozen=True)
class MinamiResult:
    slope_m1: float
    slope_m2: float
    error: Optional[str] = None

    @property
    def separated(self) -> Optional[bool]:
        if self.error is not None:
            return None
        return self.slope_m2 >= self.slope_m1 + MINAMI_GAP

    def to_document(self) -> Dict[str, Any]:
        return {
            "slope_m1": None if math.isnan(self.slope_m1) else self.slope_m1,
            "slope_m2": None if math.isnan(self.slope_m2) else self.slope_m2,
            "separated": self.separated,
            "error": self.error,
        }


@dataclass(frozen=True, eq=False)
class CountSweep:
    """indicators[t, i, j] == (C_{eps_i}(H_t - E) >= m_j)."""
    eps_grid: Tuple[float, ...]
    m_values: Tuple[int, ...]
    indicators: np.ndarray
    reports: Tuple[McReport, ...]

    def report(self, eps: float, m: int) -> McReport:
        i = self.eps_grid.index(eps)
        j = self.m_values.index(m)
        return self.reports[i * len(self.m_values) + j]


@dataclass(frozen=True, eq=False)
class DetSweep:
    """indicators[t, i] == (|det H_hat_t| <= delta_i)."""
    delta_grid: Tuple[float, ...]
    indicators: np.ndarray
    reports: Tuple[McReport, ...]


@dataclass(frozen=True)
class InvertibilityReport:
    trials: int
    invertible: int

    @property
    def rate(self) -> float:
        return self.invertible / self.trials


@dataclass(frozen=True)
class CoverageReport:
    repetitions: int
    covered: int
    exact: float

    @property
    def coverage(self) -> float:
        return self.covered / self.repetitions


# ---------- Bounds ----------

def count_bound(spec: ModelSpec, eps: float, m: int, alpha: float) -> float:
    """|ln(N eps/g) (N eps/g)^alpha|^m; infinite for the deterministic model."""
    if spec.coupling == 0:
        return math.inf
    x = spec.sites * eps / spec.coupling
    return abs(math.log(x) * x ** alpha) ** m


def det_bound(sites: int, delta: float, regularity_K: float, alpha: float) -> float:
    """(2 K alpha)^N ln^N(1/delta) delta^alpha, for delta < 1."""
    if delta >= 1:
        return math.inf
    return (2.0 * regularity_K * alpha) ** sites * math.log(1.0 / delta) ** sites * delta ** alpha


def _report(eps: float, m: int, hits: np.ndarray, bound: float, seed: SampleSeed) -> McReport:
    trials = int(hits.shape[0])
    successes = int(np.count_nonzero(hits))
    low, high = wilson_interval(successes, trials)
    return McReport(
        eps=float(eps),
        m=int(m),
        trials=trials,
        successes=successes,
        p_hat=successes / trials,
        ci_low=low,
        ci_high=high,
        bound_value=bound,
        seed=seed.master,
    )


# ---------- Trial workers ----------

def _count_chunk(spec: ModelSpec, eps_grid: Tuple[float, ...], m_values: Tuple[int, ...], master: int, trials: range) -> np.ndarray:
    eps = np.asarray(eps_grid)[:, np.newaxis]
    ms = np.asarray(m_values)[np.newaxis, :]
    out = np.zeros((len(trials), len(eps_grid), len(m_values)), dtype=bool)
    for row, trial in enumerate(trials):
        try:
            h = sample_hamiltonian(spec, SampleSeed(master, trial))
            w = hermitian_eigenvalues(h)
        except (SpectralError, ValueError, np.linalg.LinAlgError) as exc:
            raise TrialFailure(trial, exc) from exc
        counts = np.count_nonzero(np.abs(w[np.newaxis, :] - spec.energy) < eps, axis=1)
        out[row] = counts[:, np.newaxis] >= ms
    return out


def _det_chunk(spec: ModelSpec, a: int, delta_grid: Tuple[float, ...], master: int, trials: range) -> np.ndarray:
    deltas = np.asarray(delta_grid)
    out = np.zeros((len(trials), len(delta_grid)), dtype=bool)
    for row, trial in enumerate(trials):
        try:
            h_hat = sample_reduced_hamiltonian(spec, a, SampleSeed(master, trial), check_hopping=False)
            det = abs(determinant(h_hat))
        except (SpectralError, ValueError, np.linalg.LinAlgError) as exc:
            raise TrialFailure(trial, exc) from exc
        out[row] = det <= deltas
    return out


def _invertible_chunk(spec: ModelSpec, master: int, trials: range) -> np.ndarray:
    out = np.zeros(len(trials), dtype=bool)
    for row, trial in enumerate(trials):
        try:
            h = sample_hamiltonian(spec, SampleSeed(master, trial))
        except (SpectralError, ValueError) as exc:
            raise TrialFailure(trial, exc) from exc
        out[row] = is_invertible(h.shifted(-spec.energy))
    return out


def _chunks(first: int, trials: int, jobs: int) -> List[range]:
    size = max(1, math.ceil(trials / (jobs * CHUNKS_PER_WORKER)))
    return [range(start, min(start + size, first + trials)) for start in range(first, first + trials, size)]


def run_trials(worker, args: Tuple, seed: SampleSeed, trials: int, jobs: Optional[int] = None) -> np.ndarray:
    """
    worker(*args, master, trial_range) over trials seed.trial .. seed.trial+trials-1,
    results concatenated in trial order.
    """
    if trials < 1:
        raise PreconditionViolation(f"trials must be positive, got {trials}")
    jobs = settings.DEFAULT_JOBS if jobs is None else jobs
    if jobs < 1:
        raise PreconditionViolation(f"jobs must be positive, got {jobs}")
    chunks = _chunks(seed.trial, trials, jobs)
    if jobs == 1 or len(chunks) == 1:
        parts = [worker(*args, seed.master, chunk) for chunk in chunks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(worker, *args, seed.master, chunk) for chunk in chunks]
            parts = [f.result() for f in futures]
    log.debug("ran %d trials in %d chunks on %d workers", trials, len(chunks), jobs)
    return np.concatenate(parts, axis=0)


# ---------- Count events ----------

def sweep_count_events(
    spec: ModelSpec,
    eps_grid: Sequence[float],
    m_values: Sequence[int],
    trials: int,
    seed: SampleSeed,
    jobs: Optional[int] = None,
    alpha: Optional[float] = None,
) -> CountSweep:
    """
    One eigensolve per trial serves every (eps, m) cell.
    """
    eps_grid = tuple(float(e) for e in eps_grid)
    m_values = tuple(int(m) for m in m_values)
    if not eps_grid or any(e <= 0 for e in eps_grid):
        raise PreconditionViolation("eps grid must be nonempty with positive entries")
    if not m_values or any(m < 1 for m in m_values):
        raise PreconditionViolation("m values must be nonempty positive integers")
    alpha = spec.site_dist.regularity_alpha if alpha is None else alpha

    log.info("count sweep: %s N=%d, %d trials, eps=%s, m=%s", spec.family.value, spec.sites, trials, eps_grid, m_values)
    indicators = run_trials(_count_chunk, (spec, eps_grid, m_values), seed, trials, jobs)
    reports = tuple(
        _report(eps, m, indicators[:, i, j], count_bound(spec, eps, m, alpha), seed)
        for i, eps in enumerate(eps_grid)
        for j, m in enumerate(m_values)
    )
    return CountSweep(eps_grid=eps_grid, m_values=m_values, indicators=indicators, reports=reports)


def estimate_count_probability(
    spec: ModelSpec,
    eps: float,
    m: int,
    trials: int,
    seed: SampleSeed,
    alpha: Optional[float] = None,
    jobs: Optional[int] = None,
) -> McReport:
    return sweep_count_events(spec, [eps], [m], trials, seed, jobs=jobs, alpha=alpha).reports[0]


# ---------- Determinant events ----------

def sweep_det_events(
    spec: ModelSpec,
    a: int,
    delta_grid: Sequence[float],
    trials: int,
    seed: SampleSeed,
    jobs: Optional[int] = None,
    regularity_K: float = 1.0,
    alpha: Optional[float] = None,
) -> DetSweep:
    delta_grid = tuple(float(d) for d in delta_grid)
    if not delta_grid or any(d <= 0 for d in delta_grid):
        raise PreconditionViolation("delta grid must be nonempty with positive entries")
    check_reduced_hopping(spec, a)
    alpha = spec.site_dist.regularity_alpha if alpha is None else alpha

    log.info("det sweep: %s N=%d, a=%d, %d trials, delta=%s", spec.family.value, spec.sites, a, trials, delta_grid)
    indicators = run_trials(_det_chunk, (spec, a, delta_grid), seed, trials, jobs)
    reports = tuple(
        _report(delta, 1, indicators[:, i], det_bound(spec.sites, delta, regularity_K, alpha), seed)
        for i, delta in enumerate(delta_grid)
    )
    return DetSweep(delta_grid=delta_grid, indicators=indicators, reports=reports)


def estimate_det_event(
    spec: ModelSpec,
    a: int,
    delta: float,
    trials: int,
    seed: SampleSeed,
    regularity_K: float = 1.0,
    alpha: Optional[float] = None,
    jobs: Optional[int] = None,
) -> McReport:
    return sweep_det_events(spec, a, [delta], trials, seed, jobs=jobs, regularity_K=regularity_K, alpha=alpha).reports[0]


def single_site_det_probability(spec: ModelSpec, a: int, delta: float) -> float:
    """
    Exact P(|h + 1/(v - a)| <= delta) for a single-site scalar model with
    hopping [h].
    """
    if spec.sites != 1 or spec.block_size != 1 or not spec.site_dist.is_scalar:
        raise PreconditionViolation("the closed form needs a single site with a scalar distribution")
    h = float(spec.hopping.entries[0, 0].real)
    return scalar_event_probability(spec.site_dist, a, -h, delta)


def wilson_coverage(
    spec: ModelSpec,
    a: int,
    delta: float,
    trials: int,
    repetitions: int,
    seed: SampleSeed,
    jobs: Optional[int] = None,
) -> CoverageReport:
    """
    Fraction of independent repetitions whose Wilson interval contains the
    exact single-site probability. Repetition r uses trials
    seed.trial + r*trials .. seed.trial + (r+1)*trials - 1.
    """
    exact = single_site_det_probability(spec, a, delta)
    hits = sweep_det_events(spec, a, [delta], trials * repetitions, seed, jobs=jobs).indicators[:, 0]
    covered = 0
    for r in range(repetitions):
        block = hits[r * trials:(r + 1) * trials]
        low, high = wilson_interval(int(np.count_nonzero(block)), trials)
        covered += int(low <= exact <= high)
    return CoverageReport(repetitions=repetitions, covered=covered, exact=exact)


def invertibility_rate(spec: ModelSpec, trials: int, seed: SampleSeed, jobs: Optional[int] = None) -> InvertibilityReport:
    flags = run_trials(_invertible_chunk, (spec,), seed, trials, jobs)
    return InvertibilityReport(trials=trials, invertible=int(np.count_nonzero(flags)))


# ---------- Scaling ----------

def fit_scaling(eps_grid: Sequence[float], reports: Sequence[McReport]) -> ScalingFit:
    """
    Least-squares slope of log p_hat against log eps over the cells with p_hat > 0.
    """
    if len(eps_grid) != len(reports):
        raise PreconditionViolation(f"{len(eps_grid)} grid points but {len(reports)} reports")
    points = [(float(e), r.p_hat) for e, r in zip(eps_grid, reports) if r.p_hat > 0]
    if len(points) < 3:
        raise InsufficientPositivePoints(f"need at least 3 grid points with p_hat > 0, got {len(points)}")
    eps, p = zip(*points)
    fit = stats.linregress(np.log(eps), np.log(p))
    return ScalingFit(
        eps_grid=tuple(eps),
        p_hats=tuple(p),
        exponent=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue ** 2),
    )


def minami_gap_check(
    spec: ModelSpec,
    eps_grid: Sequence[float],
    trials: int,
    seed: SampleSeed,
    jobs: Optional[int] = None,
    sweep: Optional[CountSweep] = None,
) -> MinamiResult:
    """
    Slopes of the m = 1 and m = 2 events on shared samples. A sweep that
    already covers m = 1 and m = 2 is reused as is. Degenerate sweeps
    return an error record instead of raising.
    """
    if spec.coupling == 0:
        return MinamiResult(math.nan, math.nan, error="deterministic model (g = 0): probabilities are 0 or 1")
    if sweep is None:
        sweep = sweep_count_events(spec, eps_grid, [1, 2], trials, seed, jobs=jobs)
    elif not {1, 2} <= set(sweep.m_values):
        raise PreconditionViolation(f"sweep has m values {sweep.m_values}; the gap check needs 1 and 2")
    grid = list(sweep.eps_grid)
    try:
        fit1 = fit_scaling(grid, [sweep.report(e, 1) for e in grid])
        fit2 = fit_scaling(grid, [sweep.report(e, 2) for e in grid])
    except InsufficientPositivePoints as exc:
        log.warning("Minami check not computable: %s", exc)
        return MinamiResult(math.nan, math.nan, error=str(exc))
    result = MinamiResult(fit1.exponent, fit2.exponent)
    log.info("Minami check: slope_m1=%.4f slope_m2=%.4f", result.slope_m1, result.slope_m2)
    return result
