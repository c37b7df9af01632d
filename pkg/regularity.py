# regularity.py
"""
Single-site regularity checks: closed-form and quadrature measures of the
sets where the shifted single-site determinant is small, and Monte Carlo
estimates of the same events with Wilson score intervals.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from errors import PreconditionViolation, SingularFactor, SingularSiteBlock
from hermitian_core import HermitianMatrix, determinant, invert
from random_models import SampleSeed, SiteDistribution, bdg_block, site_block

log = logging.getLogger(__name__)

CONFIDENCE = 0.95
QUAD_ABS_TOL = 1e-11
AREA_SLACK = 1e-9


# ---------- Records ----------

@dataclass(frozen=True)
class ScalarMargin:
    interval_length: float
    bound: float
    support_measure: float
    support_measure_bound: float

    @property
    def holds(self) -> bool:
        return self.interval_length <= self.bound and self.support_measure <= self.support_measure_bound + AREA_SLACK


@dataclass(frozen=True)
class BdgMargin:
    det_set_area: float
    det_bound: float
    norm_set_area: float
    norm_bound: float

    @property
    def holds(self) -> bool:
        return self.det_set_area <= self.det_bound + AREA_SLACK and self.norm_set_area <= self.norm_bound + AREA_SLACK


@dataclass(frozen=True)
class EventEstimate:
    eps: float
    trials: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float
    bound_K_eps_alpha: Optional[float] = None
    expected: Optional[float] = None

    @property
    def standard_error(self) -> float:
        p = self.expected if self.expected is not None else self.p_hat
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.trials)


@dataclass(frozen=True)
class BdgEventEstimate:
    det_event: EventEstimate
    norm_event: EventEstimate


# ---------- Wilson intervals ----------

def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE) -> Tuple[float, float]:
    if trials < 1 or not 0 <= successes <= trials:
        raise PreconditionViolation(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def event_estimate(eps: float, successes: int, trials: int, bound: Optional[float] = None, expected: Optional[float] = None) -> EventEstimate:
    low, high = wilson_interval(successes, trials)
    return EventEstimate(
        eps=float(eps),
        trials=int(trials),
        successes=int(successes),
        p_hat=successes / trials,
        ci_low=low,
        ci_high=high,
        bound_K_eps_alpha=bound,
        expected=expected,
    )


# ---------- Scalar models ----------

def reciprocal_preimage(a: float, target: float, radius: float, b: float) -> Optional[Tuple[float, float]]:
    """
    Interval of v in [-b, b] with 1/(v - a) in [target - radius, target + radius],
    or None when empty. Requires |a| > b so that 1/(v - a) is monotone on the support.
    """
    if abs(a) <= b:
        raise PreconditionViolation(f"need |a| > b, got a={a}, b={b}")
    lo_t, hi_t = sorted((1.0 / (-b - a), 1.0 / (b - a)))
    t1, t2 = max(lo_t, target - radius), min(hi_t, target + radius)
    if t1 > t2:
        return None
    # v = a + 1/t is monotone on a single-sign t-interval
    v1, v2 = sorted((a + 1.0 / t1, a + 1.0 / t2))
    return max(v1, -b), min(v2, b)


def scalar_regularity_margin(a: int, j: float, eps: float, support_bound: float = 1.0) -> ScalarMargin:
    """
    For k = 1: the v with |1/(v - a) + 1/(j + a)| <= eps.

    interval_length is the closed form 2 eps / ((j+a)^{-2} - eps^2) on the
    regime 0 < j + a < 1 (else 0), bounded by 4 eps. support_measure is the
    exact measure of the solution set inside [-b, b], bounded by 2 eps (|a| + b)^2.
    """
    b = support_bound
    if abs(a) - b < 2:
        raise PreconditionViolation(f"need |a| - b >= 2, got a={a}, b={b}")
    if not 0 <= eps <= 1.0 / (2.0 * abs(a)):
        raise PreconditionViolation(f"eps must lie in [0, 1/(2|a|)] = [0, {1.0 / (2.0 * abs(a)):.6g}], got {eps}")
    shift = j + a
    if shift == 0:
        raise SingularFactor("J + aI", 0.0)

    length = 0.0
    if eps > 0 and 0 < shift < 1:
        length = 2.0 * eps / (shift ** -2 - eps ** 2)
    window = reciprocal_preimage(a, -1.0 / shift, eps, b) if eps > 0 else None
    measure = window[1] - window[0] if window else 0.0
    return ScalarMargin(
        interval_length=length,
        bound=4.0 * eps,
        support_measure=measure,
        support_measure_bound=2.0 * eps * (abs(a) + b) ** 2,
    )


def scalar_event_probability(dist: SiteDistribution, a: float, target: float, radius: float) -> float:
    """P(|1/(v - a) - target| <= radius) under a scalar site law."""
    window = reciprocal_preimage(a, target, radius, dist.support_bound)
    if window is None:
        return 0.0
    return dist.cdf(window[1]) - dist.cdf(window[0])


# ---------- BdG blocks ----------

def bdg_block_parameters(J: HermitianMatrix) -> Tuple[float, float, float]:
    """
    (a, b, c) with det(sigma(u, v) + J) = c^2 - (u - a)^2 - (v - b)^2 for a
    real symmetric 2 x 2 J; the eigenvalues of sigma + J are c +- r with
    r = |(u, v) - (a, b)|.
    """
    if J.dim != 2:
        raise PreconditionViolation(f"BdG environments are 2x2, got {J.dim}x{J.dim}")
    if np.max(np.abs(J.entries.imag)) > 1e-12:
        raise PreconditionViolation("BdG environments must be real symmetric")
    j = J.entries.real
    return (j[1, 1] - j[0, 0]) / 2.0, -j[0, 1], (j[0, 0] + j[1, 1]) / 2.0


def _circle_fraction_angle(r: float, d: float) -> float:
    """Angle of the circle of radius r around a point at distance d lying in the unit disc."""
    if r == 0.0:
        return 2.0 * np.pi if d <= 1.0 else 0.0
    if d == 0.0:
        return 2.0 * np.pi if r <= 1.0 else 0.0
    x = (d * d + r * r - 1.0) / (2.0 * d * r)
    return 2.0 * math.acos(min(1.0, max(-1.0, x)))


def annulus_disc_area(center: Tuple[float, float], r_inner: float, r_outer: float) -> float:
    """Area of {p in unit disc : r_inner <= |p - center| <= r_outer} by radial quadrature."""
    if r_outer <= r_inner:
        return 0.0
    d = math.hypot(*center)
    breaks = [p for p in (abs(1.0 - d), 1.0 + d) if r_inner < p < r_outer]
    value, _ = integrate.quad(
        lambda r: r * _circle_fraction_angle(r, d),
        r_inner,
        r_outer,
        points=breaks or None,
        epsabs=QUAD_ABS_TOL,
        limit=200,
    )
    return float(value)


def bdg_regularity_margin(a: float, b: float, c: float, eps: float) -> BdgMargin:
    """
    Areas inside the unit disc of the determinant set |c^2 - r^2| <= eps and the
    norm set ||c| - r| <= eps, r the distance to (a, b).
    """
    if not 0 <= eps <= 1:
        raise PreconditionViolation(f"eps must lie in [0, 1], got {eps}")
    det_area = annulus_disc_area((a, b), math.sqrt(max(c * c - eps, 0.0)), math.sqrt(c * c + eps))
    norm_area = annulus_disc_area((a, b), max(abs(c) - eps, 0.0), abs(c) + eps)
    margin = BdgMargin(
        det_set_area=det_area,
        det_bound=2.0 * np.pi * eps,
        norm_set_area=norm_area,
        norm_bound=4.0 * np.pi * eps,
    )
    if not margin.holds:
        log.warning("BdG regularity areas exceed their bounds: %s", margin)
    return margin


def bdg_event_probabilities(J: HermitianMatrix, eps: float, trials: int, seed: SampleSeed) -> BdgEventEstimate:
    """
    Monte Carlo estimates of P(|det(sigma + J)| <= eps) and P(C_eps(sigma + J) != 0)
    for (u, v) uniform on the unit disc, against the areas divided by pi.
    """
    a, b, c = bdg_block_parameters(J)
    margin = bdg_regularity_margin(a, b, c, eps)
    dist = SiteDistribution.uniform_disc()
    blocks = np.array([bdg_block(*dist.sample_disc(seed.for_trial(seed.trial + t).site_rng(0))) for t in range(trials)])
    shifted = blocks + J.entries[np.newaxis, :, :]
    dets = np.abs(np.linalg.det(shifted))
    eigs = np.linalg.eigvalsh(shifted)
    det_hits = int(np.count_nonzero(dets <= eps))
    norm_hits = int(np.count_nonzero(np.any(np.abs(eigs) < eps, axis=1)))
    return BdgEventEstimate(
        det_event=event_estimate(eps, det_hits, trials, expected=margin.det_set_area / np.pi),
        norm_event=event_estimate(eps, norm_hits, trials, expected=margin.norm_set_area / np.pi),
    )


# ---------- Empirical determinant regularity ----------

def empirical_assumption_A(
    dist: SiteDistribution,
    k: int,
    a: int,
    J: HermitianMatrix,
    eps_grid: Sequence[float],
    trials: int,
    seed: SampleSeed,
    regularity_K: float = 1.0,
    alpha: Optional[float] = None,
) -> List[EventEstimate]:
    """
    P(|det((A_w - a)^{-1} + (J + a)^{-1})| <= eps) per grid point, from one
    shared set of site draws, compared against regularity_K * eps^alpha.
    """
    if J.dim != k:
        raise PreconditionViolation(f"J must be {k}x{k}, got {J.dim}x{J.dim}")
    if trials < 1:
        raise PreconditionViolation(f"trials must be positive, got {trials}")
    if any(e < 0 for e in eps_grid):
        raise PreconditionViolation("eps grid values must be nonnegative")
    alpha = dist.regularity_alpha if alpha is None else alpha
    env = invert(J.shifted(a), label="J + aI", error=SingularFactor)

    dets = np.empty(trials)
    eye = np.eye(k)
    for t in range(trials):
        rng = seed.for_trial(seed.trial + t).site_rng(0)
        block = site_block(dist, k, rng)
        local = invert(block - a * eye, label=f"A - aI (trial {seed.trial + t})", error=SingularSiteBlock)
        dets[t] = abs(determinant(local + env))

    # k = 1 scalar laws have an exact event probability to compare against
    target = None
    if k == 1 and dist.is_scalar and abs(a) > dist.support_bound:
        target = -float(env[0, 0].real)

    estimates = []
    for eps in eps_grid:
        successes = int(np.count_nonzero(dets <= eps)) if eps > 0 else int(np.count_nonzero(dets == 0))
        expected = None
        if target is not None:
            expected = scalar_event_probability(dist, a, target, eps) if eps > 0 else 0.0
        estimates.append(event_estimate(eps, successes, trials, bound=regularity_K * eps ** alpha, expected=expected))
        log.debug("assumption A eps=%g p_hat=%.6g", eps, successes / trials)
    return estimates
