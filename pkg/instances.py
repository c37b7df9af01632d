# instances.py
"""
Seeded random instance generators shared by the property suite and the tests.
Every generator takes a numpy Generator so a single seed replays a whole sweep.
"""
from typing import Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

from hermitian_core import HermitianMatrix, IndexSet


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for (seed, stream...) via SeedSequence hashing."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(s) for s in stream]]))


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> HermitianMatrix:
    """GUE-like Hermitian matrix with entries of size ~scale."""
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return HermitianMatrix(scale * (g + g.conj().T) / 2.0)


def with_spectrum(rng: np.random.Generator, eigenvalues: Sequence[float]) -> HermitianMatrix:
    """Hermitian matrix U diag(eigenvalues) U^* with Haar-random U."""
    w = np.asarray(eigenvalues, dtype=np.float64)
    u = haar_unitary(rng, len(w))
    return HermitianMatrix((u * w) @ u.conj().T)


def planted_small_spectrum(rng: np.random.Generator, n: int, m: int, eps: float, spread: float = 4.0) -> Tuple[HermitianMatrix, np.ndarray]:
    """
    Invertible Hermitian matrix with exactly m eigenvalues in (-eps, eps),
    kept at least 5% of eps away from 0 and from +-eps.
    """
    small = rng.uniform(0.05 * eps, 0.95 * eps, size=m) * rng.choice([-1.0, 1.0], size=m)
    large = rng.uniform(1.05 * eps, max(spread, 2.0 * eps), size=n - m) * rng.choice([-1.0, 1.0], size=n - m)
    w = np.concatenate([small, large])
    return with_spectrum(rng, w), np.sort(w)


def random_invertible(rng: np.random.Generator, n: int, gap: float = 1e-3, spread: float = 3.0) -> HermitianMatrix:
    """Hermitian matrix with every |eigenvalue| in [gap, spread]."""
    w = rng.uniform(gap, spread, size=n) * rng.choice([-1.0, 1.0], size=n)
    return with_spectrum(rng, w)


def random_positive_definite(rng: np.random.Generator, n: int, low: float = 0.05, high: float = 5.0) -> HermitianMatrix:
    return with_spectrum(rng, rng.uniform(low, high, size=n))


def random_contraction(rng: np.random.Generator, n: int) -> HermitianMatrix:
    """Hermitian matrix with spectrum in [-1, 1]."""
    return with_spectrum(rng, rng.uniform(-1.0, 1.0, size=n))


def random_index_set(rng: np.random.Generator, n: int, size: int) -> IndexSet:
    return IndexSet.from_zero_based(n, rng.choice(n, size=size, replace=False))


def random_disjoint_pair(rng: np.random.Generator, n: int) -> Tuple[IndexSet, IndexSet]:
    """Two nonempty disjoint index sets covering a random part of {1..n}."""
    perm = rng.permutation(n)
    size1 = int(rng.integers(1, n))
    size2 = int(rng.integers(1, n - size1 + 1))
    return IndexSet.from_zero_based(n, perm[:size1]), IndexSet.from_zero_based(n, perm[size1:size1 + size2])


def perturbation_within(rng: np.random.Generator, n: int, radius: float) -> HermitianMatrix:
    """Hermitian perturbation with operator norm at most radius."""
    return with_spectrum(rng, rng.uniform(-radius, radius, size=n))


def partitioned_for_schur_bounds(rng: np.random.Generator, k: int, m: int, eps: float) -> Tuple[HermitianMatrix, IndexSet]:
    """
    D = [[A, V], [V^*, B]] with ||V|| <= 1/2 and no eigenvalue of B in
    (-2 eps, 2 eps). Returns D and the index set of the A block.
    """
    a = random_hermitian(rng, k, scale=rng.uniform(0.05, 1.0)).entries
    b_eigs = rng.uniform(2.0 * eps * 1.01, 2.0 * eps + 3.0, size=m) * rng.choice([-1.0, 1.0], size=m)
    b = with_spectrum(rng, b_eigs).entries
    v = rng.normal(size=(k, m)) + 1j * rng.normal(size=(k, m))
    v *= rng.uniform(0.0, 0.5) / max(np.linalg.norm(v, 2), 1e-300)
    d = np.block([[a, v], [v.conj().T, b]])
    return HermitianMatrix(d), IndexSet(k + m, tuple(range(1, k + 1)))


def heavy_pivot_matrix(rng: np.random.Generator, n: int) -> HermitianMatrix:
    """Positive-definite matrix permuted so its first diagonal entry is maximal."""
    a = random_positive_definite(rng, n).array()
    first = int(np.argmax(a.diagonal().real))
    order = [first] + [i for i in range(n) if i != first]
    return HermitianMatrix(a[np.ix_(order, order)])
