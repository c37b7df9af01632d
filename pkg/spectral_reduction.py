# spectral_reduction.py
"""
Norm reduction of B = B1 + B2 by an integer shift, the counting-stability
lemmas it feeds, and the determinant dichotomy used for block models.

    a     = choose_shift(B2, L)
    B_hat = (B1 - a)^{-1} + (B2 + a)^{-1}  =  (B1 - a)^{-1} B (B2 + a)^{-1}

For eps < 1/2:  C_{eps/(225 L^4)}(B_hat) <= C_eps(B) <= C_{7 L^2 eps}(B_hat).
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

import numpy as np

from errors import (
    NoAdmissibleShift,
    NormTooLarge,
    PerturbationTooLarge,
    PreconditionViolation,
    ReductionInvariantError,
    SingularFactor,
)
from hermitian_core import (
    HermitianMatrix,
    IndexSet,
    count_in_interval,
    determinant,
    hermitian_eigenvalues,
    invert,
    principal_submatrix,
    schur_complement,
    spectral_norm,
    submatrix,
)

log = logging.getLogger(__name__)

EPS0 = 0.5
NORM_SLACK = 1e-10
MIN_SHIFT_DISTANCE = 2.0
# relative slack for the non-strict inequalities of the dichotomy
DICHOTOMY_SLACK = 1e-9


# ---------- Domain types ----------

@dataclass(frozen=True, eq=False)
class ShiftReduction:
    a: int
    L: int
    nu: float
    b_hat: HermitianMatrix
    left_inverse: np.ndarray
    right_inverse: np.ndarray
    right_norm: float

    @property
    def lower_scale(self) -> float:
        return 225.0 * self.L ** 4

    @property
    def upper_scale(self) -> float:
        return 7.0 * self.L ** 2

    def factorization_residual(self, B: HermitianMatrix) -> float:
        """|| B_hat - (B1 - a)^{-1} B (B2 + a)^{-1} ||."""
        product = self.left_inverse @ B.entries @ self.right_inverse
        return float(np.linalg.norm(self.b_hat.entries - product, 2))

    def to_document(self) -> Dict[str, Any]:
        return {
            "a": self.a,
            "L": self.L,
            "nu": self.nu,
            "lower_scale": self.lower_scale,
            "upper_scale": self.upper_scale,
            "b_hat": self.b_hat.to_document(),
        }


@dataclass(frozen=True)
class SandwichCounts:
    low: int
    mid: int
    high: int
    L: int
    eps: float

    @property
    def single_site(self) -> bool:
        return self.L == 1

    @property
    def holds(self) -> bool:
        return self.low <= self.mid <= self.high


@dataclass(frozen=True)
class SchurCounts:
    schur_count: int
    full_count: int
    beta_scaled_count: int
    beta: float

    @property
    def holds(self) -> bool:
        return self.schur_count <= self.full_count <= self.beta_scaled_count


class DichotomyBranch(str, Enum):
    DET_BOUND = "DetBound"
    NORM_BOUND = "NormBound"
    NOT_APPLICABLE = "NotApplicable"
    NEITHER = "Neither"


@dataclass(frozen=True)
class DichotomyResult:
    branch: DichotomyBranch
    lhs: float
    rhs: float
    threshold: float
    det_rhs: float
    norm_rhs: float

    @property
    def holds(self) -> bool:
        return self.branch != DichotomyBranch.NEITHER


# ---------- Shift reduction ----------

def shift_scan(L: int):
    """3, -3, 4, -4, ..., L+3, -L-3."""
    for magnitude in range(3, L + 4):
        yield magnitude
        yield -magnitude


def choose_shift(B2: HermitianMatrix, L: int) -> int:
    """
    First integer a in the scan order with dist(spectrum(B2), -a) >= 2.
    """
    if B2.dim != L:
        raise PreconditionViolation(f"B2 is {B2.dim}x{B2.dim} but L={L}")
    w = hermitian_eigenvalues(B2)
    for a in shift_scan(L):
        if float(np.min(np.abs(w + a))) >= MIN_SHIFT_DISTANCE:
            return a
    raise NoAdmissibleShift(f"no integer shift in [-{L + 3}, -3] U [3, {L + 3}] clears the spectrum of B2")


def reduce(B1: HermitianMatrix, B2: HermitianMatrix) -> ShiftReduction:
    """
    Shift B = B1 + B2 into the well-conditioned B_hat. Requires ||B1|| <= 1.
    """
    if B1.dim != B2.dim:
        raise PreconditionViolation(f"B1 is {B1.dim}x{B1.dim} but B2 is {B2.dim}x{B2.dim}")
    L = B1.dim
    norm_b1 = spectral_norm(B1)
    if norm_b1 > 1.0 + NORM_SLACK:
        raise NormTooLarge(f"||B1|| = {norm_b1:.6g} exceeds 1")

    a = choose_shift(B2, L)
    left = invert(B1.shifted(-a), label="B1 - aI", error=SingularFactor)
    right = invert(B2.shifted(a), label="B2 + aI", error=SingularFactor)
    b_hat = HermitianMatrix(left + right)
    nu = spectral_norm(HermitianMatrix(left))
    right_norm = spectral_norm(HermitianMatrix(right))

    if max(nu, right_norm) > 0.5 + NORM_SLACK:
        raise ReductionInvariantError(f"shift a={a} leaves resolvent norms {nu:.6g}, {right_norm:.6g} above 1/2")
    if nu < 1.0 / (L + 4) - NORM_SLACK:
        raise ReductionInvariantError(f"shift a={a} gives nu={nu:.6g} below 1/(L+4)")
    log.debug("reduce L=%d a=%d nu=%.6g", L, a, nu)
    return ShiftReduction(a=a, L=L, nu=nu, b_hat=b_hat, left_inverse=left, right_inverse=right, right_norm=right_norm)


def count_sandwich_check(B1: HermitianMatrix, B2: HermitianMatrix, eps: float) -> SandwichCounts:
    if not 0 < eps < EPS0:
        raise PreconditionViolation(f"eps must lie in (0, {EPS0}), got {eps}")
    red = reduce(B1, B2)
    low = count_in_interval(red.b_hat, 0.0, eps / red.lower_scale)
    mid = count_in_interval(B1 + B2, 0.0, eps)
    high = count_in_interval(red.b_hat, 0.0, red.upper_scale * eps)
    result = SandwichCounts(low=low, mid=mid, high=high, L=red.L, eps=eps)
    if not result.holds:
        log.warning("count sandwich violated: %d <= %d <= %d fails (L=%d, eps=%g)", low, mid, high, red.L, eps)
    return result


# ---------- Counting stability ----------

def weyl_count_stability(D: HermitianMatrix, Dtilde: HermitianMatrix, eps: float) -> bool:
    """C_eps(D) <= C_{2 eps}(Dtilde) whenever ||D - Dtilde|| <= eps."""
    if D.dim != Dtilde.dim:
        raise PreconditionViolation(f"D is {D.dim}x{D.dim} but Dtilde is {Dtilde.dim}x{Dtilde.dim}")
    distance = spectral_norm(D - Dtilde)
    if distance > eps * (1.0 + NORM_SLACK):
        raise PerturbationTooLarge(f"||D - Dtilde|| = {distance:.6g} exceeds eps = {eps:.6g}")
    return count_in_interval(D, 0.0, eps) <= count_in_interval(Dtilde, 0.0, 2.0 * eps)


def sandwich_count_conjugation(A: HermitianMatrix, B: HermitianMatrix, eps: float) -> bool:
    """C_eps(A) <= C_eps(B A B) for any Hermitian contraction B."""
    if A.dim != B.dim:
        raise PreconditionViolation(f"A is {A.dim}x{A.dim} but B is {B.dim}x{B.dim}")
    norm_b = spectral_norm(B)
    if norm_b > 1.0 + NORM_SLACK:
        raise NormTooLarge(f"||B|| = {norm_b:.6g} exceeds 1")
    conjugated = HermitianMatrix(B.entries @ A.entries @ B.entries)
    return count_in_interval(A, 0.0, eps) <= count_in_interval(conjugated, 0.0, eps)


def schur_count_bounds(D: HermitianMatrix, alpha: IndexSet, eps: float) -> SchurCounts:
    """
    D = [[A, V], [V^*, B]] with A = D[alpha] and B = D[alpha^c]. Under
    ||V|| <= 1/2, C_{2 eps}(B) = 0 and eps <= 1/2:

        C_eps(D/B) <= C_eps(D) <= C_{beta eps}(D/B),   beta = 2 (||B^{-1}|| + 1)^2.
    """
    if alpha.universe != D.dim:
        raise PreconditionViolation(f"alpha lives in 1..{alpha.universe} but D has dimension {D.dim}")
    rest = alpha.complement()
    if len(alpha) == 0 or len(rest) == 0:
        raise PreconditionViolation("both diagonal blocks of D must be nonempty")
    if not 0 < eps <= EPS0:
        raise PreconditionViolation(f"hypothesis eps <= 1/2 failed: eps = {eps}")
    coupling = spectral_norm(submatrix(D, alpha, rest))
    if coupling > 0.5 + NORM_SLACK:
        raise PreconditionViolation(f"hypothesis ||V|| <= 1/2 failed: ||V|| = {coupling:.6g}")
    lower = principal_submatrix(D, rest)
    if count_in_interval(lower, 0.0, 2.0 * eps) != 0:
        raise PreconditionViolation(f"hypothesis C_2eps(B) = 0 failed at eps = {eps}")

    reduced = schur_complement(D, rest)
    beta = 2.0 * (spectral_norm(HermitianMatrix(invert(lower, label="B"))) + 1.0) ** 2
    result = SchurCounts(
        schur_count=count_in_interval(reduced, 0.0, eps),
        full_count=count_in_interval(D, 0.0, eps),
        beta_scaled_count=count_in_interval(reduced, 0.0, beta * eps),
        beta=beta,
    )
    if not result.holds:
        log.warning("Schur count chain violated: %s", result)
    return result


# ---------- Determinant dichotomy ----------

def dichotomy_threshold(a: float, k: int) -> float:
    mag = abs(a)
    return (1.0 / (16.0 * mag)) * ((mag - 1.0) / (2.0 * (mag + 1.0) ** 2)) ** (k - 1)


def determinant_dichotomy(A: HermitianMatrix, J: HermitianMatrix, a: float) -> DichotomyResult:
    """
    For ||A|| <= 1, |a| >= 2 and M = (A - a)^{-1} + (J + a)^{-1} with
    |det M| below the threshold, at least one of

        (2(|a|+1)^2)^{-k} |det(A + J)|                       <= |det M|
        (16|a|)^{-1} (2(|a|+1)^2 ||(A + J)^{-1}||)^{1-k}      <= |det M|

    holds. Both are evaluated; DetBound wins when both hold.
    """
    if A.dim != J.dim:
        raise PreconditionViolation(f"A is {A.dim}x{A.dim} but J is {J.dim}x{J.dim}")
    if abs(a) < 2:
        raise PreconditionViolation(f"|a| must be at least 2, got a = {a}")
    norm_a = spectral_norm(A)
    if norm_a > 1.0 + NORM_SLACK:
        raise NormTooLarge(f"||A|| = {norm_a:.6g} exceeds 1")

    x = invert(A.shifted(-a), label="A - aI", error=SingularFactor)
    y = invert(J.shifted(a), label="J + aI", error=SingularFactor)
    total = A + J
    total_inv = invert(total, label="A + J", error=SingularFactor)

    k = A.dim
    mag = abs(a)
    lhs = abs(determinant(HermitianMatrix(x + y)))
    threshold = dichotomy_threshold(a, k)
    scale = 2.0 * (mag + 1.0) ** 2
    det_rhs = scale ** (-k) * abs(determinant(total))
    norm_rhs = (1.0 / (16.0 * mag)) * (scale * spectral_norm(HermitianMatrix(total_inv))) ** (1 - k)

    if lhs > threshold:
        return DichotomyResult(DichotomyBranch.NOT_APPLICABLE, lhs, threshold, threshold, det_rhs, norm_rhs)
    tolerance = DICHOTOMY_SLACK * max(lhs, threshold)
    if det_rhs <= lhs + tolerance:
        return DichotomyResult(DichotomyBranch.DET_BOUND, lhs, det_rhs, threshold, det_rhs, norm_rhs)
    if norm_rhs <= lhs + tolerance:
        return DichotomyResult(DichotomyBranch.NORM_BOUND, lhs, norm_rhs, threshold, det_rhs, norm_rhs)
    log.warning("determinant dichotomy: neither bound holds (lhs=%.6g, det_rhs=%.6g, norm_rhs=%.6g)", lhs, det_rhs, norm_rhs)
    return DichotomyResult(DichotomyBranch.NEITHER, lhs, min(det_rhs, norm_rhs), threshold, det_rhs, norm_rhs)
