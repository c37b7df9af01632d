# counting_witness.py
"""
Detecting many small eigenvalues of A from its Green function G = A^{-1}.

A witness is a pair of index sets (alpha, beta) with |alpha| = |beta| = m and

    G[alpha, beta] G[beta, alpha] > (K / eps)^2 I.

With K = 1 a witness certifies C_eps(A) >= m; conversely C_eps(A) >= m
guarantees a witness at K = C_m / N, C_m = 1 / (m! 2^(m-1)).
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, List, Optional

import numpy as np

from errors import (
    InsufficientSpectralMass,
    NotPositiveDefinite,
    PreconditionViolation,
    SearchBudgetExceeded,
    SingularMatrix,
    SingularPrincipalSubmatrix,
)
from hermitian_core import (
    HermitianMatrix,
    IndexSet,
    count_at_least,
    count_in_interval,
    hermitian_eigenvalues,
    invert,
    is_invertible,
    min_eigenvalue,
    principal_submatrix,
    schur_complement,
    spectral_norm,
    submatrix,
)

log = logging.getLogger(__name__)

MAX_COUNTING_LEVEL = 20
SEARCH_BUDGET = 10 ** 7
# margins this close to zero (relative to (K/eps)^2) are indeterminate
INDETERMINATE_MARGIN = 1e-12
AUX_BOUND_SLACK = 1e-10


# ---------- Domain types ----------

@dataclass(frozen=True)
class CountingConstant:
    m: int
    N: int
    C_m: float
    K: float


@dataclass(frozen=True)
class WitnessCertificate:
    alpha: IndexSet
    beta: IndexSet
    m: int
    eps: float
    K: float
    margin: float

    @property
    def certified(self) -> bool:
        return self.margin > _indeterminate_band(self.K, self.eps)

    def to_document(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha.to_list(),
            "beta": self.beta.to_list(),
            "m": self.m,
            "eps": self.eps,
            "K": self.K,
            "margin": self.margin,
        }


@dataclass(frozen=True)
class GreenFunctionRelations:
    max_abs_entry: float
    implies_small_eig: bool
    implied_by_small_eig: bool


@dataclass(frozen=True)
class CompressionBound:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + AUX_BOUND_SLACK


@dataclass(frozen=True)
class PivotBound:
    schur_floor: float
    bound: float
    min_eigenvalue: float

    @property
    def holds(self) -> bool:
        return self.min_eigenvalue >= self.bound - AUX_BOUND_SLACK


# ---------- Constants ----------

def counting_constant(m: int, N: int) -> CountingConstant:
    """
    C_m = 1 / (m! 2^(m-1)) and K = C_m / N, evaluated exactly before rounding.
    """
    if m < 1 or N < 1:
        raise PreconditionViolation(f"m and N must be positive, got m={m}, N={N}")
    if m > MAX_COUNTING_LEVEL:
        raise PreconditionViolation(f"counting level m={m} exceeds {MAX_COUNTING_LEVEL}")
    c_m = Fraction(1, math.factorial(m) * 2 ** (m - 1))
    return CountingConstant(m=m, N=N, C_m=float(c_m), K=float(c_m / N))


def aux_subset_bound(a: float, k: int, N: int) -> float:
    """a / (k! 2^(k-1) N), the floor guaranteed for the heavy principal subset."""
    return float(Fraction(a) / (math.factorial(k) * 2 ** (k - 1) * N))


# ---------- Witness pairs ----------

def _indeterminate_band(K: float, eps: float) -> float:
    return INDETERMINATE_MARGIN * max(1.0, (K / eps) ** 2)


def _green_function(A: HermitianMatrix) -> np.ndarray:
    return invert(A, label="A", error=SingularMatrix)


def _margin(green: np.ndarray, rows: np.ndarray, cols: np.ndarray, level: float) -> float:
    block = green[np.ix_(rows, cols)]
    gram = block @ block.conj().T
    return min_eigenvalue(0.5 * (gram + gram.conj().T)) - level


def witness_margin(A: HermitianMatrix, eps: float, alpha: IndexSet, beta: IndexSet, K: float = 1.0) -> WitnessCertificate:
    """
    Evaluate lambda_min(G[alpha, beta] G[beta, alpha]) - (K/eps)^2 for a given pair.
    """
    if len(alpha) != len(beta) or len(alpha) == 0:
        raise PreconditionViolation(f"witness sets must be nonempty with equal size, got |alpha|={len(alpha)}, |beta|={len(beta)}")
    if alpha.universe != A.dim or beta.universe != A.dim:
        raise PreconditionViolation(f"index sets must live in 1..{A.dim}")
    _check_eps(eps)
    green = _green_function(A)
    margin = _margin(green, alpha.zero_based(), beta.zero_based(), (K / eps) ** 2)
    return WitnessCertificate(alpha=alpha, beta=beta, m=len(alpha), eps=eps, K=K, margin=margin)


def find_witness_pair(A: HermitianMatrix, eps: float, m: int, K: float) -> Optional[WitnessCertificate]:
    """
    Lexicographically first (alpha, beta) whose margin is strictly positive,
    alpha in the outer loop. Returns None when no pair certifies at level K.
    """
    n = A.dim
    _check_eps(eps)
    if not 1 <= m <= n:
        raise PreconditionViolation(f"need 1 <= m <= N, got m={m}, N={n}")
    if K <= 0:
        raise PreconditionViolation(f"K must be positive, got {K}")
    choices = math.comb(n, m) ** 2
    if choices > SEARCH_BUDGET:
        raise SearchBudgetExceeded(f"{choices} candidate pairs for N={n}, m={m} exceed the budget of {SEARCH_BUDGET}")

    green = _green_function(A)
    level = (K / eps) ** 2
    band = _indeterminate_band(K, eps)
    subsets = [np.asarray(c, dtype=np.intp) for c in combinations(range(n), m)]
    indeterminate = 0
    for rows in subsets:
        for cols in subsets:
            margin = _margin(green, rows, cols, level)
            if margin > band:
                cert = WitnessCertificate(
                    alpha=IndexSet.from_zero_based(n, rows),
                    beta=IndexSet.from_zero_based(n, cols),
                    m=m,
                    eps=eps,
                    K=K,
                    margin=margin,
                )
                log.debug("witness found alpha=%s beta=%s margin=%.6g", cert.alpha.to_list(), cert.beta.to_list(), margin)
                return cert
            if abs(margin) <= band:
                indeterminate += 1
    if indeterminate:
        log.warning("witness search N=%d m=%d: %d pairs had indeterminate margins", n, m, indeterminate)
    return None


def certify_lower_count(A: HermitianMatrix, eps: float, alpha: IndexSet, beta: IndexSet) -> bool:
    """
    True iff (alpha, beta) is a witness at K = 1, which forces C_eps(A) >= |alpha|.
    Indeterminate margins count as False.
    """
    cert = witness_margin(A, eps, alpha, beta, K=1.0)
    if abs(cert.margin) <= _indeterminate_band(1.0, eps):
        log.warning("certificate margin %.3e is indeterminate", cert.margin)
    return cert.certified


# ---------- Heavy principal subsets ----------

def select_heavy_principal_subset(A: HermitianMatrix, k: int, a: float) -> IndexSet:
    """
    Greedy construction: take the largest diagonal entry (lowest index on
    ties), Schur-complement it out, repeat k times. The result alpha_k has
    lambda_min(A[alpha_k]) >= a / (k! 2^(k-1) N).
    """
    n = A.dim
    if not 1 <= k <= n:
        raise PreconditionViolation(f"need 1 <= k <= N, got k={k}, N={n}")
    if min_eigenvalue(A) <= 0:
        raise NotPositiveDefinite("A must be positive definite")
    mass = count_at_least(A, a)
    if mass < k:
        raise InsufficientSpectralMass(f"only {mass} eigenvalues >= {a}, need {k}")

    current = A.array()
    remaining = list(range(n))
    chosen: List[int] = []
    for _ in range(k):
        diag = current.diagonal().real
        pivot = int(np.argmax(diag))
        chosen.append(remaining[pivot])
        rest = [i for i in range(len(remaining)) if i != pivot]
        coupling = current[np.ix_(rest, [pivot])]
        current = current[np.ix_(rest, rest)] - coupling @ coupling.conj().T / current[pivot, pivot]
        del remaining[pivot]

    alpha = IndexSet.from_zero_based(n, chosen)
    floor = min_eigenvalue(principal_submatrix(A, alpha))
    bound = aux_subset_bound(a, k, n)
    if floor < bound - AUX_BOUND_SLACK:
        log.warning("heavy subset %s has lambda_min %.6g below %.6g", alpha.to_list(), floor, bound)
    return alpha


def heavy_pivot_bound(A: HermitianMatrix) -> PivotBound:
    """
    For positive-definite A whose (1,1) entry is its largest diagonal entry:
    lambda_min(A) >= lambda_min(A / A_11) / (2 l).
    """
    n = A.dim
    if n < 2:
        raise PreconditionViolation("pivot lemma needs dimension at least 2")
    diag = A.entries.diagonal().real
    if diag[0] < diag.max():
        raise PreconditionViolation("the first diagonal entry must be maximal")
    if min_eigenvalue(A) <= 0:
        raise NotPositiveDefinite("A must be positive definite")
    floor = min_eigenvalue(schur_complement(A, IndexSet(n, (1,))))
    return PivotBound(schur_floor=floor, bound=floor / (2 * n), min_eigenvalue=min_eigenvalue(A))


# ---------- Principal-submatrix corollary ----------

def inverse_principal_count(A: HermitianMatrix, gamma: IndexSet, eps: float) -> int:
    """
    C_eps((A^{-1}[gamma])^{-1}); this equals C_eps of the Schur complement A / A[gamma^c].
    """
    green = _green_function(A)
    block = submatrix(green, gamma, gamma)
    reduced = invert(block, label=f"A^-1[{gamma.to_list()}]", error=SingularPrincipalSubmatrix)
    return count_in_interval(0.5 * (reduced + reduced.conj().T), 0.0, eps)


def find_block_witness(A: HermitianMatrix, eps: float, m: int, block: int, K: float) -> Optional[IndexSet]:
    """
    Block-respecting gamma (a union of whole blocks) with
    C_{eps/K}((A^{-1}[gamma])^{-1}) >= m, or None when A has no witness at level K.

    The core is the block closure of a witness pair; supersets of the core are
    tried in increasing size and the first with invertible A^{-1}[gamma] wins.
    """
    n = A.dim
    if block < 1 or n % block:
        raise PreconditionViolation(f"block size {block} does not divide N={n}")
    n_blocks = n // block
    if not 1 <= m <= n_blocks:
        raise PreconditionViolation(f"need 1 <= m <= N/block = {n_blocks}, got m={m}")

    witness = find_witness_pair(A, eps, m, K)
    if witness is None:
        return None

    green = _green_function(A)
    core = witness.alpha.union(witness.beta).block_closure(block)
    core_blocks = sorted({(i - 1) // block for i in core})
    others = [b for b in range(n_blocks) if b not in core_blocks]
    cap = max(len(core_blocks), min(2 * m, n_blocks))

    for extra in range(0, cap - len(core_blocks) + 1):
        for added in combinations(others, extra):
            gamma = IndexSet.from_blocks(n, block, core_blocks + list(added))
            sub = submatrix(green, gamma, gamma)
            if not is_invertible(sub):
                log.debug("A^-1[%s] fails the invertibility threshold", gamma.to_list())
                continue
            count = inverse_principal_count(A, gamma, eps / K)
            if count < m:
                log.warning("gamma %s reduced count %d < m=%d despite a witness", gamma.to_list(), count, m)
                continue
            return gamma
    raise SingularPrincipalSubmatrix(f"every block superset of {core.to_list()} up to {cap} blocks")


# ---------- Green function and compressions ----------

def green_function_relations(A: HermitianMatrix, eps: float) -> GreenFunctionRelations:
    """
    max |G(x, y)| > 1/eps  =>  C_eps(A) > 0  =>  max |G(x, y)| > 1/(N eps).
    """
    _check_eps(eps)
    green = _green_function(A)
    max_entry = float(np.max(np.abs(green)))
    has_small = count_in_interval(A, 0.0, eps) > 0
    return GreenFunctionRelations(
        max_abs_entry=max_entry,
        implies_small_eig=max_entry > 1.0 / eps,
        implied_by_small_eig=(not has_small) or max_entry > 1.0 / (A.dim * eps),
    )


def compressed_norm_bound(A: HermitianMatrix, p1: IndexSet, p2: IndexSet) -> CompressionBound:
    """
    ||P A P|| against 2 max(||P1 A P1||, ||P2 A P2||) for disjoint coordinate
    projections P1, P2 and P = P1 + P2.
    """
    if len(p1) == 0 or len(p2) == 0:
        raise PreconditionViolation("projections must be nonempty")
    if not p1.is_disjoint(p2):
        raise PreconditionViolation(f"index sets {p1.to_list()} and {p2.to_list()} overlap")
    w = hermitian_eigenvalues(A)
    if w[0] <= 0:
        raise NotPositiveDefinite("A must be positive definite")
    lhs = spectral_norm(principal_submatrix(A, p1.union(p2)))
    rhs = 2.0 * max(spectral_norm(principal_submatrix(A, p1)), spectral_norm(principal_submatrix(A, p2)))
    return CompressionBound(lhs=lhs, rhs=rhs)


def _check_eps(eps: float):
    if not eps > 0:
        raise PreconditionViolation(f"eps must be positive, got {eps}")
