# random_models.py
"""
Random Hamiltonians on finite graphs:

    H_w(g) = H_0 + g * blockdiag(A_w(x))            (sample_hamiltonian)
    H_hat  = H_0 + blockdiag((A_w(x) - a)^{-1})      (sample_reduced_hamiltonian)

Families: Anderson (k = 1, uniform scalar potential), RandomBlock (k x k
Hermitian site blocks) and BdG (traceless real symmetric 2 x 2 blocks with
(u, v) uniform on the unit disc).

Every site draws from its own Philox stream keyed by (master, trial) with the
site index in the high counter word, so a (spec, seed) pair reproduces the same
matrix bit-for-bit no matter which worker samples it.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from errors import HoppingNormTooLarge, NormTooLarge, PreconditionViolation, SingularSiteBlock
from hermitian_core import HermitianMatrix, invert, spectral_norm

log = logging.getLogger(__name__)

UINT64_LIMIT = 2 ** 64
SITE_COUNTER_SHIFT = 192
HOPPING_NORM_LIMIT = 0.5
NORM_SLACK = 1e-10


# ---------- Graphs ----------

@dataclass(frozen=True)
class GraphSpec:
    """
    Finite simple graph on vertices 0..vertices-1; edges are stored as sorted
    pairs in sorted order.
    """
    vertices: int
    edges: Tuple[Tuple[int, int], ...] = ()
    max_degree: Optional[int] = None

    def __post_init__(self):
        if self.vertices < 1:
            raise PreconditionViolation(f"a graph needs at least one vertex, got {self.vertices}")
        normalized = set()
        for x, y in self.edges:
            x, y = int(x), int(y)
            if x == y:
                raise PreconditionViolation(f"self-loop at vertex {x}")
            if not (0 <= x < self.vertices and 0 <= y < self.vertices):
                raise PreconditionViolation(f"edge ({x}, {y}) leaves 0..{self.vertices - 1}")
            pair = (min(x, y), max(x, y))
            if pair in normalized:
                raise PreconditionViolation(f"duplicate edge {pair}")
            normalized.add(pair)
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

        degree = self.degrees().max(initial=0)
        if self.max_degree is None:
            object.__setattr__(self, "max_degree", int(degree))
        elif degree > self.max_degree:
            raise PreconditionViolation(f"vertex degree {degree} exceeds the declared maximum {self.max_degree}")

    @classmethod
    def from_edges(cls, vertices: int, edges: Sequence[Sequence[int]], max_degree: Optional[int] = None) -> "GraphSpec":
        return cls(vertices, tuple((int(x), int(y)) for x, y in edges), max_degree)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.vertices, dtype=np.int64)
        for x, y in self.edges:
            deg[x] += 1
            deg[y] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.vertices, self.vertices))
        for x, y in self.edges:
            adj[x, y] = adj[y, x] = 1.0
        return adj

    def to_document(self) -> Dict[str, Any]:
        return {"kind": "edges", "vertices": self.vertices, "edges": [list(e) for e in self.edges], "max_degree": self.max_degree}


def path_graph(n: int) -> GraphSpec:
    """1D box {0..n-1} with nearest-neighbour edges."""
    return GraphSpec(n, tuple((i, i + 1) for i in range(n - 1)))


def grid_graph(nx: int, ny: int) -> GraphSpec:
    """2D box, vertex (i, j) numbered i*ny + j."""
    edges = []
    for i in range(nx):
        for j in range(ny):
            v = i * ny + j
            if i + 1 < nx:
                edges.append((v, v + ny))
            if j + 1 < ny:
                edges.append((v, v + 1))
    return GraphSpec(nx * ny, tuple(edges))


# ---------- Single-site distributions ----------

class SiteKind(str, Enum):
    UNIFORM_INTERVAL = "uniform_interval"
    UNIFORM_DISC = "uniform_disc"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class SiteDistribution:
    """
    Law of the single-site randomness.

    UNIFORM_INTERVAL: uniform on [-b, b].
    UNIFORM_DISC: (u, v) uniform on the unit disc.
    CUSTOM: piecewise-constant density on an even grid over [-b, b],
            sampled by inverting its piecewise-linear CDF.
    """
    kind: SiteKind
    support_bound: float = 1.0
    regularity_alpha: float = 1.0
    density: Optional[np.ndarray] = None
    _cdf: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        kind = SiteKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not self.support_bound > 0:
            raise PreconditionViolation(f"support bound must be positive, got {self.support_bound}")
        if not 0 < self.regularity_alpha <= 1:
            raise PreconditionViolation(f"regularity exponent must lie in (0, 1], got {self.regularity_alpha}")
        if kind == SiteKind.UNIFORM_DISC and self.support_bound != 1.0:
            raise PreconditionViolation("the disc distribution lives on the unit disc (support_bound = 1)")
        if kind == SiteKind.CUSTOM:
            dens = np.asarray(self.density, dtype=np.float64)
            if dens.ndim != 1 or dens.size < 1 or np.any(dens < 0) or not np.any(dens > 0):
                raise PreconditionViolation("custom density must be a nonempty, nonnegative, nonzero grid")
            cdf = np.concatenate([[0.0], np.cumsum(dens)])
            cdf /= cdf[-1]
            dens.setflags(write=False)
            cdf.setflags(write=False)
            object.__setattr__(self, "density", dens)
            object.__setattr__(self, "_cdf", cdf)
        elif self.regularity_alpha != 1.0:
            raise PreconditionViolation("uniform distributions are regular with exponent 1")

    @classmethod
    def uniform_interval(cls, b: float = 1.0) -> "SiteDistribution":
        return cls(SiteKind.UNIFORM_INTERVAL, support_bound=b)

    @classmethod
    def uniform_disc(cls) -> "SiteDistribution":
        return cls(SiteKind.UNIFORM_DISC)

    @classmethod
    def custom(cls, density: Sequence[float], b: float = 1.0, regularity_alpha: float = 1.0) -> "SiteDistribution":
        return cls(SiteKind.CUSTOM, support_bound=b, regularity_alpha=regularity_alpha, density=np.asarray(density, dtype=np.float64))

    @property
    def is_scalar(self) -> bool:
        return self.kind != SiteKind.UNIFORM_DISC

    def _grid(self) -> np.ndarray:
        return np.linspace(-self.support_bound, self.support_bound, len(self.density) + 1)

    def sample_scalar(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        if self.kind == SiteKind.UNIFORM_INTERVAL:
            return rng.uniform(-self.support_bound, self.support_bound, size=size)
        if self.kind == SiteKind.CUSTOM:
            return np.interp(rng.random(size=size), self._cdf, self._grid())
        raise PreconditionViolation("the disc distribution has no scalar samples")

    def sample_disc(self, rng: np.random.Generator) -> Tuple[float, float]:
        if self.kind != SiteKind.UNIFORM_DISC:
            raise PreconditionViolation(f"{self.kind.value} distribution has no disc samples")
        r = np.sqrt(rng.random())
        theta = 2.0 * np.pi * rng.random()
        return float(r * np.cos(theta)), float(r * np.sin(theta))

    def cdf(self, v: float) -> float:
        """P(X <= v) for the scalar kinds."""
        b = self.support_bound
        if self.kind == SiteKind.UNIFORM_INTERVAL:
            return float(np.clip((v + b) / (2.0 * b), 0.0, 1.0))
        if self.kind == SiteKind.CUSTOM:
            return float(np.interp(v, self._grid(), self._cdf))
        raise PreconditionViolation("the disc distribution has no scalar CDF")

    def to_document(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "kind": self.kind.value,
            "support_bound": self.support_bound,
            "regularity_alpha": self.regularity_alpha,
        }
        if self.density is not None:
            doc["density"] = self.density.tolist()
        return doc


# ---------- Model specification ----------

class Family(str, Enum):
    ANDERSON = "anderson"
    RANDOM_BLOCK = "random_block"
    BDG = "bdg"


@dataclass(frozen=True)
class SampleSeed:
    master: int
    trial: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master) < UINT64_LIMIT:
            raise PreconditionViolation(f"master seed must be an unsigned 64-bit integer, got {self.master}")
        if not 0 <= int(self.trial) < UINT64_LIMIT:
            raise PreconditionViolation(f"trial index must be a nonnegative 64-bit integer, got {self.trial}")
        object.__setattr__(self, "master", int(self.master))
        object.__setattr__(self, "trial", int(self.trial))

    def for_trial(self, trial: int) -> "SampleSeed":
        return SampleSeed(self.master, trial)

    def site_rng(self, site: int) -> np.random.Generator:
        key = np.array([self.master, self.trial], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=int(site) << SITE_COUNTER_SHIFT))

    def to_document(self) -> Dict[str, int]:
        return {"master": self.master, "trial": self.trial}


def discrete_laplacian(graph: GraphSpec) -> HermitianMatrix:
    """Nearest-neighbour hopping: unit entries on edges, zero diagonal."""
    return HermitianMatrix(graph.adjacency())


def block_hopping(graph: GraphSpec, block: int, pattern: Optional[np.ndarray] = None) -> HermitianMatrix:
    """
    Translation-invariant block hopping adjacency (x) pattern; pattern
    defaults to the k x k identity.
    """
    if pattern is None:
        pattern = np.eye(block)
    pattern = np.asarray(pattern, dtype=np.complex128)
    if pattern.shape != (block, block):
        raise PreconditionViolation(f"hopping pattern must be {block}x{block}, got {pattern.shape}")
    return HermitianMatrix(np.kron(graph.adjacency(), pattern))


def default_hopping(graph: GraphSpec, family: Family, scale: float = 1.0) -> HermitianMatrix:
    if family == Family.ANDERSON:
        h0 = discrete_laplacian(graph)
    elif family == Family.BDG:
        h0 = block_hopping(graph, 2, np.diag([1.0, -1.0]))
    else:
        raise PreconditionViolation("random block models need an explicit block size for the default hopping")
    return h0.scaled(scale)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    graph: GraphSpec
    family: Family
    site_dist: SiteDistribution
    coupling: float = 1.0
    energy: float = 0.0
    block_size: int = 1
    hopping: Optional[HermitianMatrix] = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        k = self.block_size
        if family == Family.ANDERSON and k != 1:
            raise PreconditionViolation(f"Anderson models have block size 1, got {k}")
        if family == Family.BDG and k != 2:
            raise PreconditionViolation(f"BdG models have block size 2, got {k}")
        if k < 1:
            raise PreconditionViolation(f"block size must be positive, got {k}")
        if family == Family.BDG and self.site_dist.kind != SiteKind.UNIFORM_DISC:
            raise PreconditionViolation("BdG blocks are driven by the uniform disc distribution")
        if family != Family.BDG and not self.site_dist.is_scalar:
            raise PreconditionViolation(f"{family.value} models need a scalar site distribution")
        if not self.coupling >= 0 or not np.isfinite(self.coupling):
            raise PreconditionViolation(f"coupling must be a finite nonnegative number, got {self.coupling}")

        hopping = self.hopping
        if hopping is None:
            hopping = block_hopping(self.graph, k) if family == Family.RANDOM_BLOCK else default_hopping(self.graph, family)
            object.__setattr__(self, "hopping", hopping)
        if hopping.dim != self.dim:
            raise PreconditionViolation(f"hopping has dimension {hopping.dim}, expected k*N = {self.dim}")

    @property
    def sites(self) -> int:
        return self.graph.vertices

    @property
    def dim(self) -> int:
        return self.block_size * self.graph.vertices

    def to_document(self) -> Dict[str, Any]:
        return {
            "family": self.family.value,
            "graph": self.graph.to_document(),
            "block_size": self.block_size,
            "coupling": self.coupling,
            "energy": self.energy,
            "hopping": self.hopping.to_document(),
            "site_dist": self.site_dist.to_document(),
        }


# ---------- Sampling ----------

def bdg_block(u: float, v: float) -> np.ndarray:
    return np.array([[u, v], [v, -u]], dtype=np.complex128)


def site_block(dist: SiteDistribution, k: int, rng: np.random.Generator) -> np.ndarray:
    """
    One k x k site block A_w(x). Scalar laws give a 1 x 1 block for k = 1 and
    a Hermitian block with k^2 i.i.d. real coefficients otherwise; the disc law
    gives the BdG block.
    """
    if not dist.is_scalar:
        if k != 2:
            raise PreconditionViolation("disc samples build 2x2 blocks only")
        return bdg_block(*dist.sample_disc(rng))
    coeffs = dist.sample_scalar(rng, size=k * k)
    block = np.diag(coeffs[:k]).astype(np.complex128)
    upper = np.triu_indices(k, 1)
    n_off = len(upper[0])
    off = coeffs[k:k + n_off] + 1j * coeffs[k + n_off:]
    block[upper] = off
    block[(upper[1], upper[0])] = off.conj()
    return block


def sample_site_blocks(spec: ModelSpec, seed: SampleSeed) -> np.ndarray:
    """(N, k, k) array of site blocks, one Philox stream per site."""
    k = spec.block_size
    blocks = np.empty((spec.sites, k, k), dtype=np.complex128)
    for x in range(spec.sites):
        blocks[x] = site_block(spec.site_dist, k, seed.site_rng(x))
    return blocks


def _block_diagonal(blocks: np.ndarray) -> np.ndarray:
    n, k, _ = blocks.shape
    out = np.zeros((n * k, n * k), dtype=np.complex128)
    for x in range(n):
        out[x * k:(x + 1) * k, x * k:(x + 1) * k] = blocks[x]
    return out


def sample_hamiltonian(spec: ModelSpec, seed: SampleSeed) -> HermitianMatrix:
    """H_0 + g * blockdiag(A_w(x)); returns H_0 itself when g = 0."""
    if spec.coupling == 0:
        return spec.hopping
    blocks = sample_site_blocks(spec, seed)
    return HermitianMatrix(spec.hopping.entries + spec.coupling * _block_diagonal(blocks))


def check_reduced_hopping(spec: ModelSpec, a: int):
    if int(a) != a or abs(a) < 3:
        raise PreconditionViolation(f"the shift must be an integer with |a| >= 3, got {a}")
    norm = spectral_norm(spec.hopping)
    if norm > HOPPING_NORM_LIMIT + NORM_SLACK:
        raise HoppingNormTooLarge(f"||H_0|| = {norm:.6g} exceeds {HOPPING_NORM_LIMIT}")
    log.debug("reduced sampling at a=%d with ||H_0|| = %.6g", a, norm)


def sample_reduced_hamiltonian(spec: ModelSpec, a: int, seed: SampleSeed, check_hopping: bool = True) -> HermitianMatrix:
    """
    H_0 + blockdiag((A_w(x) - a)^{-1}) with unit coupling on the site blocks.
    Batch callers validate the hopping once and pass check_hopping=False.
    """
    if check_hopping:
        check_reduced_hopping(spec, a)
    blocks = sample_site_blocks(spec, seed)
    k = spec.block_size
    shifted = np.empty_like(blocks)
    for x in range(spec.sites):
        shifted[x] = invert(blocks[x] - a * np.eye(k), label=f"A(x) - a at site {x}", error=SingularSiteBlock)
    reduced = HermitianMatrix(spec.hopping.entries + _block_diagonal(shifted))
    norm = spectral_norm(reduced)
    if norm > 1.0 + NORM_SLACK:
        raise NormTooLarge(f"reduced Hamiltonian norm {norm:.6g} exceeds 1 at trial {seed.trial}; the site blocks come within 2 of a={a}")
    return reduced
