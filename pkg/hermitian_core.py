# hermitian_core.py
"""
Dense complex Hermitian matrix algebra: spectra, eigenvalue counts,
submatrices, Schur complements, inertia, determinants and the shifted
resolvent identity.
"""
import logging
import warnings
from dataclasses import dataclass, field
from itertools import chain
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

import householder
from errors import PreconditionViolation, SingularBlock
from settings import resolve_backend

log = logging.getLogger(__name__)

# a matrix is invertible when its smallest LU pivot is at least this fraction
# of its largest entry
INVERTIBILITY_THRESHOLD = 1e-12
RECONSTRUCTION_TOL = 1e-10
IMAG_RESIDUE_TOL = 1e-9


# ---------- Domain types ----------

@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """
    Dense Hermitian matrix. Construction symmetrizes (M + M^*)/2, so
    entries[i, j] == conj(entries[j, i]) holds exactly afterwards.
    """
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=np.complex128, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise PreconditionViolation(f"expected a nonempty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise PreconditionViolation("matrix entries must be finite")
        sym = 0.5 * (m + m.conj().T)
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

    @classmethod
    def from_array(cls, data: Any) -> "HermitianMatrix":
        return cls(np.asarray(data))

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "HermitianMatrix":
        return cls(np.diag(np.asarray(values, dtype=np.complex128)))

    @classmethod
    def identity(cls, n: int) -> "HermitianMatrix":
        return cls(np.eye(n))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def array(self) -> np.ndarray:
        """Writable copy of the entries."""
        return np.array(self.entries, copy=True)

    def shifted(self, shift: float) -> "HermitianMatrix":
        """A + shift*I."""
        return HermitianMatrix(self.entries + shift * np.eye(self.dim))

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        return HermitianMatrix(self.entries + _as_array(other))

    def __sub__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        return HermitianMatrix(self.entries - _as_array(other))

    def scaled(self, factor: float) -> "HermitianMatrix":
        return HermitianMatrix(factor * self.entries)

    def to_document(self) -> Dict[str, Any]:
        """JSON exchange form {"dim", "re", "im"}, row-major."""
        return {
            "dim": self.dim,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "HermitianMatrix":
        dim = int(doc["dim"])
        re = np.asarray(doc["re"], dtype=np.float64)
        im = np.asarray(doc.get("im") or np.zeros((dim, dim)), dtype=np.float64)
        if re.shape != (dim, dim) or im.shape != (dim, dim):
            raise PreconditionViolation(f"matrix document declares dim={dim} but re/im have shapes {re.shape}/{im.shape}")
        return cls(re + 1j * im)


@dataclass(frozen=True)
class IndexSet:
    """
    Ordered, duplicate-free subset of {1..universe} (1-based, as in A[alpha, beta]).
    """
    universe: int
    members: Tuple[int, ...]

    def __post_init__(self):
        members = tuple(int(i) for i in self.members)
        if self.universe < 1:
            raise PreconditionViolation(f"index universe must be positive, got {self.universe}")
        if any(b <= a for a, b in zip(members, members[1:])):
            raise PreconditionViolation(f"index members must be strictly increasing, got {members}")
        if members and (members[0] < 1 or members[-1] > self.universe):
            raise PreconditionViolation(f"index members {members} out of range 1..{self.universe}")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, universe: int, members: Iterable[int]) -> "IndexSet":
        return cls(universe, tuple(sorted(set(int(i) for i in members))))

    @classmethod
    def from_zero_based(cls, universe: int, indices: Iterable[int]) -> "IndexSet":
        return cls.of(universe, (int(i) + 1 for i in indices))

    @classmethod
    def full(cls, universe: int) -> "IndexSet":
        return cls(universe, tuple(range(1, universe + 1)))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, item: int) -> bool:
        return item in self.members

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.intp) - 1

    def complement(self) -> "IndexSet":
        taken = set(self.members)
        return IndexSet(self.universe, tuple(i for i in range(1, self.universe + 1) if i not in taken))

    def union(self, other: "IndexSet") -> "IndexSet":
        self._check_same_universe(other)
        return IndexSet.of(self.universe, chain(self.members, other.members))

    def is_disjoint(self, other: "IndexSet") -> bool:
        self._check_same_universe(other)
        return not set(self.members) & set(other.members)

    def issubset(self, other: "IndexSet") -> bool:
        return set(self.members) <= set(other.members)

    def block_closure(self, block: int) -> "IndexSet":
        """Smallest union of whole blocks {b*block+1 .. (b+1)*block} containing the set."""
        if block < 1 or self.universe % block:
            raise PreconditionViolation(f"block size {block} does not divide universe {self.universe}")
        blocks = sorted({(i - 1) // block for i in self.members})
        return IndexSet.from_blocks(self.universe, block, blocks)

    @classmethod
    def from_blocks(cls, universe: int, block: int, blocks: Iterable[int]) -> "IndexSet":
        """Union of whole blocks given by 0-based block numbers."""
        return cls.of(universe, (b * block + j + 1 for b in blocks for j in range(block)))

    def to_list(self) -> list:
        return list(self.members)

    def _check_same_universe(self, other: "IndexSet"):
        if other.universe != self.universe:
            raise PreconditionViolation(f"index sets live in different universes ({self.universe} vs {other.universe})")


@dataclass(frozen=True)
class Inertia:
    negative: int
    zero: int
    positive: int

    def __add__(self, other: "Inertia") -> "Inertia":
        return Inertia(self.negative + other.negative, self.zero + other.zero, self.positive + other.positive)

    @property
    def dim(self) -> int:
        return self.negative + self.zero + self.positive


@dataclass(frozen=True, eq=False)
class SpectrumSummary:
    eigenvalues: np.ndarray
    count_below_eps: Dict[float, int] = field(default_factory=dict)
    norm: float = 0.0
    eigenvectors: Optional[np.ndarray] = None


# ---------- Internal helpers ----------

def _as_array(m: Any) -> np.ndarray:
    if isinstance(m, HermitianMatrix):
        return m.entries
    return np.asarray(m, dtype=np.complex128)


def _eigvalsh(m: np.ndarray, backend: Optional[str] = None) -> np.ndarray:
    if resolve_backend(backend) == "lapack":
        return np.linalg.eigvalsh(m)
    w, _ = householder.eigh(m, want_vectors=False)
    return w


def hermitian_eigenvalues(m: Any, backend: Optional[str] = None) -> np.ndarray:
    """
    Ascending eigenvalues of a Hermitian array (no symmetrization, no copy
    into HermitianMatrix); the hot path for counting.
    """
    return _eigvalsh(_as_array(m), backend)


def spectral_norm(m: Any, backend: Optional[str] = None) -> float:
    """
    Operator 2-norm. Hermitian input goes through the eigensolver; anything
    else through singular values.
    """
    arr = _as_array(m)
    if arr.size == 0:
        return 0.0
    if isinstance(m, HermitianMatrix):
        w = _eigvalsh(arr, backend)
        return float(max(abs(w[0]), abs(w[-1])))
    return float(np.linalg.norm(arr, 2))


def min_eigenvalue(m: Any, backend: Optional[str] = None) -> float:
    return float(_eigvalsh(_as_array(m), backend)[0])


def lu_pivot_ratio(m: Any) -> float:
    """
    Smallest |pivot| of the partially pivoted LU factorization divided by the
    largest entry magnitude (0 for the zero matrix).
    """
    arr = _as_array(m)
    scale = float(np.max(np.abs(arr))) if arr.size else 0.0
    if scale == 0.0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, _ = scipy.linalg.lu_factor(arr, check_finite=False)
    return float(np.min(np.abs(np.diag(lu)))) / scale


def is_invertible(m: Any) -> bool:
    return lu_pivot_ratio(m) >= INVERTIBILITY_THRESHOLD


def invert(m: Any, label: str = "matrix", error: type = SingularBlock) -> np.ndarray:
    """
    Inverse through the pivoted LU factorization; raises `error(label)` when
    the matrix fails the invertibility threshold.
    """
    arr = _as_array(m)
    ratio = lu_pivot_ratio(arr)
    if ratio < INVERTIBILITY_THRESHOLD:
        raise error(label, ratio)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu_piv = scipy.linalg.lu_factor(arr, check_finite=False)
        inv = scipy.linalg.lu_solve(lu_piv, np.eye(arr.shape[0], dtype=np.complex128), check_finite=False)
    return inv


def invert_hermitian(m: Any, label: str = "matrix", error: type = SingularBlock) -> HermitianMatrix:
    return HermitianMatrix(invert(m, label, error))


# ---------- Operations ----------

def eigenvalues(
    A: HermitianMatrix,
    eps_values: Iterable[float] = (),
    want_vectors: bool = False,
    backend: Optional[str] = None,
) -> SpectrumSummary:
    """
    Full spectrum of A in ascending order, with C_eps(A) for every requested eps.
    """
    arr = A.entries
    if resolve_backend(backend) == "lapack":
        if want_vectors:
            w, z = np.linalg.eigh(arr)
        else:
            w, z = np.linalg.eigvalsh(arr), None
    else:
        w, z = householder.eigh(arr, want_vectors=want_vectors)

    if z is not None:
        fro = float(np.linalg.norm(arr))
        residual = float(np.linalg.norm(arr - (z * w) @ z.conj().T))
        if residual > RECONSTRUCTION_TOL * max(1.0, fro):
            log.warning("eigendecomposition residual %.3e exceeds tolerance for n=%d", residual, A.dim)

    counts = {}
    for eps in eps_values:
        _check_positive(eps, "eps")
        counts[float(eps)] = int(np.count_nonzero(np.abs(w) < eps))
    norm = float(max(abs(w[0]), abs(w[-1])))
    return SpectrumSummary(eigenvalues=w, count_below_eps=counts, norm=norm, eigenvectors=z)


def count_in_interval(A: Any, E: float, eps: float, backend: Optional[str] = None) -> int:
    """
    Number of eigenvalues (with multiplicity) in the open interval (E - eps, E + eps).
    """
    _check_positive(eps, "eps")
    w = _eigvalsh(_as_array(A), backend)
    return int(np.count_nonzero(np.abs(w - E) < eps))


def count_from_spectrum(w: np.ndarray, E: float, eps: float) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(w) - E) < eps))


def count_at_least(A: Any, a: float, backend: Optional[str] = None) -> int:
    """
    Number of eigenvalues in the closed half-line [a, inf).
    """
    _check_positive(a, "a")
    w = _eigvalsh(_as_array(A), backend)
    return int(np.count_nonzero(w >= a))


def submatrix(A: Any, rows: IndexSet, cols: IndexSet) -> np.ndarray:
    """
    A[rows, cols] with rows and columns in increasing index order.
    """
    arr = _as_array(A)
    n = arr.shape[0]
    for name, idx in (("rows", rows), ("cols", cols)):
        if len(idx) == 0:
            raise PreconditionViolation(f"{name} index set is empty")
        if idx.universe != n:
            raise PreconditionViolation(f"{name} index set has universe {idx.universe}, matrix has dimension {n}")
    return arr[np.ix_(rows.zero_based(), cols.zero_based())].copy()


def principal_submatrix(A: Any, alpha: IndexSet) -> HermitianMatrix:
    return HermitianMatrix(submatrix(A, alpha, alpha))


def schur_complement(A: HermitianMatrix, alpha: IndexSet) -> HermitianMatrix:
    """
    A / A[alpha] = A[alpha^c] - A[alpha^c, alpha] A[alpha]^{-1} A[alpha, alpha^c].
    """
    rest = alpha.complement()
    if len(rest) == 0:
        raise PreconditionViolation("Schur complement of the full index set is empty")
    block_inv = invert(submatrix(A, alpha, alpha), label=f"A[{alpha.to_list()}]")
    coupling = submatrix(A, rest, alpha)
    return HermitianMatrix(submatrix(A, rest, rest) - coupling @ block_inv @ coupling.conj().T)


def generalized_schur_complement(A: Any, alpha: IndexSet, beta: IndexSet) -> np.ndarray:
    """
    A / A[alpha, beta] = A[alpha^c, beta^c] - A[alpha^c, beta] A[alpha, beta]^{-1} A[alpha, beta^c].
    """
    if len(alpha) != len(beta):
        raise PreconditionViolation(f"|alpha|={len(alpha)} differs from |beta|={len(beta)}")
    alpha_c, beta_c = alpha.complement(), beta.complement()
    if len(alpha_c) == 0:
        raise PreconditionViolation("Schur complement of the full index set is empty")
    block_inv = invert(submatrix(A, alpha, beta), label=f"A[{alpha.to_list()}, {beta.to_list()}]")
    return submatrix(A, alpha_c, beta_c) - submatrix(A, alpha_c, beta) @ block_inv @ submatrix(A, alpha, beta_c)


def default_zero_tol(A: Any) -> float:
    return 1e-10 * float(np.linalg.norm(_as_array(A)))


def inertia(A: Any, zero_tol: Optional[float] = None, backend: Optional[str] = None) -> Inertia:
    """
    (negative, zero, positive) eigenvalue counts, zero meaning |lambda| <= zero_tol.
    """
    if zero_tol is None:
        zero_tol = default_zero_tol(A)
    if zero_tol < 0:
        raise PreconditionViolation(f"zero_tol must be nonnegative, got {zero_tol}")
    w = _eigvalsh(_as_array(A), backend)
    negative = int(np.count_nonzero(w < -zero_tol))
    positive = int(np.count_nonzero(w > zero_tol))
    return Inertia(negative, len(w) - negative - positive, positive)


@dataclass(frozen=True)
class Determinant:
    """Determinant value with the invertibility flag; singular results carry value 0.0."""
    value: float
    singular: bool
    pivot_ratio: float


def determinant_flagged(A: Any) -> Determinant:
    arr = _as_array(A)
    ratio = lu_pivot_ratio(arr)
    if ratio < INVERTIBILITY_THRESHOLD:
        log.debug("determinant flagged singular (pivot ratio %.3e)", ratio)
        return Determinant(0.0, True, ratio)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(arr, check_finite=False)
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    det = complex(np.prod(np.diag(lu)))
    if swaps % 2:
        det = -det
    if abs(det.imag) > IMAG_RESIDUE_TOL * abs(det):
        log.warning("determinant has imaginary part %.3e of %.3e; input may not be Hermitian", det.imag, abs(det))
    return Determinant(float(det.real), False, ratio)


def determinant(A: Any) -> float:
    """
    Real determinant of a Hermitian matrix from the pivoted LU factorization.
    A matrix below the invertibility threshold is flagged singular and its
    determinant reported as exactly 0.0; determinant_flagged returns the flag.
    """
    return determinant_flagged(A).value


def woodbury_resolvent(A: HermitianMatrix, J: HermitianMatrix, a: float) -> HermitianMatrix:
    """
    (A-a)^{-1} - (A-a)^{-1} ((A-a)^{-1} + (J+a)^{-1})^{-1} (A-a)^{-1},
    which equals (A+J)^{-1}.
    """
    if A.dim != J.dim:
        raise PreconditionViolation(f"A is {A.dim}x{A.dim} but J is {J.dim}x{J.dim}")
    x = invert(A.shifted(-a), label="A - aI")
    y = invert(J.shifted(a), label="J + aI")
    invert(A + J, label="A + J")
    middle = invert(x + y, label="(A - aI)^{-1} + (J + aI)^{-1}")
    return HermitianMatrix(x - x @ middle @ x)


def _check_positive(value: float, name: str):
    if not value > 0:
        raise PreconditionViolation(f"{name} must be positive, got {value}")
