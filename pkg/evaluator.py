# evaluator.py
"""
Property suite behind `verify`.

Every property draws seeded instances and returns a margin per instance
(rhs - lhs of the inequality it checks, or None when the instance does not
meet the property's hypotheses). An instance violates the property when
margin + slack < 0. Instance i of property p is generated from
rng_for(seed, crc32(p), i), so a failure is replayed from (seed, p, i) alone.
"""
import logging
import math
import zlib
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional

import numpy as np

import counting_witness as cw
import instances as inst
import regularity
import spectral_reduction as sr
import wegner_mc
from errors import SingularBlock
from hermitian_core import (
    HermitianMatrix,
    count_in_interval,
    hermitian_eigenvalues,
    inertia,
    invert,
    principal_submatrix,
    schur_complement,
    spectral_norm,
    submatrix,
    woodbury_resolvent,
)
from random_models import (
    Family,
    ModelSpec,
    SampleSeed,
    SiteDistribution,
    path_graph,
    sample_hamiltonian,
    sample_reduced_hamiltonian,
    sample_site_blocks,
)

log = logging.getLogger(__name__)

GROUPS = ("core", "witness", "reduction", "models", "mc")
DEFAULT_INSTANCES = 1000
RELATIVE_TOL = 1e-8
COVERAGE_FLOOR = 0.93


# ---------- Registry ----------

@dataclass(frozen=True)
class Property:
    name: str
    group: str
    check: Callable[[np.random.Generator], Optional[float]]
    cost: int = 1

    @property
    def key(self) -> int:
        return zlib.crc32(self.name.encode("utf-8"))


@dataclass
class PropertyResult:
    name: str
    group: str
    checked: int = 0
    violations: int = 0
    worst_margin: float = math.inf
    first_failure: Optional[int] = None
    seed: int = 0
    errors: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and not self.errors

    @property
    def replay(self) -> str:
        instance = self.first_failure if self.first_failure is not None else 0
        return f"seed={self.seed} property={self.name} instance={instance}"

    def to_document(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "group": self.group,
            "passed": self.passed,
            "checked": self.checked,
            "violations": self.violations,
            "worst_margin": self.worst_margin if math.isfinite(self.worst_margin) else None,
            "replay": self.replay,
            "errors": list(self.errors),
        }


PROPERTIES: Dict[str, Property] = {}


def prop(group: str, name: str, cost: int = 1):
    def register(fn: Callable[[np.random.Generator], Optional[float]]):
        PROPERTIES[name] = Property(name=name, group=group, check=fn, cost=cost)
        return fn
    return register


# ---------- core ----------

@prop("core", "woodbury_identity")
def _woodbury(rng: np.random.Generator) -> Optional[float]:
    n = int(rng.integers(1, 7))
    A = inst.random_contraction(rng, n)
    a = float(rng.choice([-1.0, 1.0]) * rng.uniform(2.0, 5.0))
    J = inst.with_spectrum(rng, rng.uniform(-3.0, 3.0, size=n))
    if min(np.min(np.abs(hermitian_eigenvalues(J.shifted(a)))), np.min(np.abs(hermitian_eigenvalues(A + J)))) < 0.1:
        return None
    exact = invert(A + J)
    err = np.linalg.norm(woodbury_resolvent(A, J, a).entries - exact, 2) / np.linalg.norm(exact, 2)
    return RELATIVE_TOL - float(err)


@prop("core", "haynsworth_additivity")
def _haynsworth(rng: np.random.Generator) -> Optional[float]:
    n = int(rng.integers(2, 9))
    A = inst.random_invertible(rng, n, gap=0.05)
    alpha = inst.random_index_set(rng, n, int(rng.integers(1, n)))
    block = principal_submatrix(A, alpha)
    if np.min(np.abs(hermitian_eigenvalues(block))) < 1e-6:
        return None
    split = inertia(block) + inertia(schur_complement(A, alpha))
    return 0.0 if split == inertia(A) else -1.0


@prop("core", "schur_inverse_identity")
def _schur_inverse(rng: np.random.Generator) -> Optional[float]:
    n = int(rng.integers(2, 9))
    A = inst.random_invertible(rng, n, gap=0.05)
    alpha = inst.random_index_set(rng, n, int(rng.integers(1, n)))
    if np.min(np.abs(hermitian_eigenvalues(principal_submatrix(A, alpha)))) < 1e-6:
        return None
    rest = alpha.complement()
    via_inverse = invert(submatrix(invert(A), rest, rest))
    direct = schur_complement(A, alpha).entries
    err = np.linalg.norm(direct - via_inverse, 2) / max(np.linalg.norm(direct, 2), 1e-300)
    return RELATIVE_TOL - float(err)


@prop("core", "eigensolver_agreement")
def _eigensolvers(rng: np.random.Generator) -> Optional[float]:
    n = int(rng.integers(1, 13))
    A = inst.random_hermitian(rng, n, scale=float(rng.uniform(0.1, 10.0)))
    diff = np.max(np.abs(hermitian_eigenvalues(A, backend="householder") - hermitian_eigenvalues(A, backend="lapack")))
    return 1e-9 * max(1.0, spectral_norm(A, backend="lapack")) - float(diff)


# ---------- witness ----------

@prop("witness", "witness_forward")
def _witness_forward(rng: np.random.Generator) -> Optional[float]:
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, min(3, n) + 1))
    eps = 0.1
    A, _ = inst.planted_small_spectrum(rng, n, m, eps)
    K = cw.counting_constant(m, n).K
    cert = cw.find_witness_pair(A, eps, m, K)
    if cert is None:
        return -1.0
    return cert.margin / (K / eps) ** 2


@prop("witness", "witness_converse")
def _witness_converse(rng: np.random.Generator) -> Optional[float]:
    n = 6
    m = int(rng.integers(1, 4))
    eps = 0.1
    A, _ = inst.planted_small_spectrum(rng, n, int(rng.integers(0, 4)), eps, spread=1.0)
    alpha = inst.random_index_set(rng, n, m)
    beta = inst.random_index_set(rng, n, m)
    if not cw.certify_lower_count(A, eps, alpha, beta):
        return None
    return float(count_in_interval(A, 0.0, eps) - m)


@prop("witness", "heavy_subset_bound")
def _heavy_subset(rng: np.random.Generator) -> Optional[float]:
    n = int(rng.integers(2, 11))
    k = int(rng.integers(1, min(3, n) + 1))
    A = inst.random_positive_definite(rng, n)
    a = float(np.sort(hermitian_eigenvalues(A))[::-1][k - 1])
    alpha = cw.select_heavy_principal_subset(A, k, a)
    floor = float(np.min(hermitian_eigenvalues(principal_submatrix(A, alpha))))
    return floor - cw.aux_subset_bound(a, k, n) + cw.AUX_BOUND_SLACK


@prop("witness", "heavy_pivot_lemma")
def _pivot(rng: np.random.Generator) -> Optional[float]:
    bound = cw.heavy_pivot_bound(inst.heavy_pivot_matrix(rng, int(rng.integers(2, 9))))
    return bound.min_eigenvalue - bound.bound + cw.AUX_BOUND_SLACK


@prop("witness", "green_function_relations")
def _green(rng: np.random.Generator) -> Optional[float]:
    n = int(rng.integers(1, 9))
    A = inst.random_invertible(rng, n, gap=1e-3)
    eps = float(10 ** rng.uniform(-2.0, 0.0))
    rel = cw.green_function_relations(A, eps)
    has_small = count_in_interval(A, 0.0, eps) > 0
    ok = (not rel.implies_small_eig or has_small) and rel.implied_by_small_eig
    return 0.0 if ok else -1.0


@prop("witness", "compressed_norm_bound")
def _compression(rng: np.random.Generator) -> Optional[float]:
    n = int(rng.integers(2, 7))
    p1, p2 = inst.random_disjoint_pair(rng, n)
    b = cw.compressed_norm_bound(inst.random_positive_definite(rng, n), p1, p2)
    return b.rhs - b.lhs + cw.AUX_BOUND_SLACK


# ---------- reduction ----------

@prop("reduction", "shift_reduction_norms")
def _shift(rng: np.random.Generator) -> Optional[float]:
    L = int(rng.integers(1, 9))
    B1 = inst.random_contraction(rng, L)
    # spectrum of B2 inside [-3, 3] always leaves an admissible shift
    B2 = inst.random_contraction(rng, L).scaled(float(rng.uniform(0.1, 3.0)))
    red = sr.reduce(B1, B2)
    dist = float(np.min(np.abs(hermitian_eigenvalues(B2) + red.a)))
    return min(
        0.5 - red.nu,
        0.5 - red.right_norm,
        red.nu - 1.0 / (L + 4),
        dist - sr.MIN_SHIFT_DISTANCE,
        float(L + 3 - abs(red.a)),
        float(abs(red.a) - 3),
    ) + sr.NORM_SLACK


@prop("reduction", "count_sandwich")
def _sandwich(rng: np.random.Generator) -> Optional[float]:
    L = int(rng.integers(1, 9))
    eps = float(rng.choice([1e-1, 1e-2, 1e-3]))
    B, _ = inst.planted_small_spectrum(rng, L, int(rng.integers(0, min(2, L) + 1)), eps, spread=2.0)
    B1 = inst.random_contraction(rng, L)
    counts = sr.count_sandwich_check(B1, B - B1, eps)
    return float(min(counts.mid - counts.low, counts.high - counts.mid))


@prop("reduction", "weyl_count_stability")
def _weyl(rng: np.random.Generator) -> Optional[float]:
    n = int(rng.integers(1, 9))
    eps = float(10 ** rng.uniform(-3.0, -0.5))
    D, _ = inst.planted_small_spectrum(rng, n, int(rng.integers(0, n + 1)), eps)
    Dtilde = D + inst.perturbation_within(rng, n, eps)
    return float(count_in_interval(Dtilde, 0.0, 2.0 * eps) - count_in_interval(D, 0.0, eps))


@prop("reduction", "sandwich_conjugation")
def _conjugation(rng: np.random.Generator) -> Optional[float]:
    n = int(rng.integers(1, 9))
    eps = float(10 ** rng.uniform(-2.0, 0.0))
    A, _ = inst.planted_small_spectrum(rng, n, int(rng.integers(0, n + 1)), eps)
    B = inst.random_contraction(rng, n)
    conjugated = HermitianMatrix(B.entries @ A.entries @ B.entries)
    return float(count_in_interval(conjugated, 0.0, eps) - count_in_interval(A, 0.0, eps))


@prop("reduction", "schur_count_chain")
def _schur_chain(rng: np.random.Generator) -> Optional[float]:
    eps = float(rng.choice([0.01, 0.05, 0.1, 0.25]))
    D, alpha = inst.partitioned_for_schur_bounds(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)), eps)
    counts = sr.schur_count_bounds(D, alpha, eps)
    return float(min(counts.full_count - counts.schur_count, counts.beta_scaled_count - counts.full_count))


@prop("reduction", "determinant_dichotomy")
def _dichotomy(rng: np.random.Generator) -> Optional[float]:
    k = int(rng.integers(1, 4))
    A = inst.random_contraction(rng, k)
    a = float(rng.choice([2.0, 3.0, 5.0]) * rng.choice([-1.0, 1.0]))
    J = (A.scaled(-1.0)) + inst.perturbation_within(rng, k, float(10 ** rng.uniform(-4.0, -0.5)))
    try:
        result = sr.determinant_dichotomy(A, J, a)
    except SingularBlock:
        return None
    if result.branch == sr.DichotomyBranch.NOT_APPLICABLE:
        return None
    best = min(result.det_rhs, result.norm_rhs)
    return (result.lhs - best) / result.threshold + sr.DICHOTOMY_SLACK


# ---------- models ----------

def _random_spec(rng: np.random.Generator, hopping_scale: float = 1.0) -> ModelSpec:
    graph = path_graph(int(rng.integers(1, 7)))
    family = Family(str(rng.choice([f.value for f in Family])))
    if family == Family.BDG:
        dist, k = SiteDistribution.uniform_disc(), 2
    else:
        dist = SiteDistribution.uniform_interval(1.0)
        k = 1 if family == Family.ANDERSON else int(rng.integers(1, 4))
    base = ModelSpec(graph, family, dist, block_size=k)
    return ModelSpec(graph, family, dist, coupling=float(rng.uniform(0.0, 2.0)), block_size=k,
                     hopping=base.hopping.scaled(hopping_scale))


@prop("models", "sampling_determinism")
def _determinism(rng: np.random.Generator) -> Optional[float]:
    spec = _random_spec(rng)
    seed = SampleSeed(int(rng.integers(0, 2 ** 63)), int(rng.integers(0, 10 ** 6)))
    same = np.array_equal(sample_hamiltonian(spec, seed).entries, sample_hamiltonian(spec, seed).entries)
    return 0.0 if same else -1.0


@prop("models", "reduced_norm_bound")
def _reduced_norm(rng: np.random.Generator) -> Optional[float]:
    spec = _random_spec(rng, hopping_scale=0.25)
    if spec.family == Family.RANDOM_BLOCK and spec.block_size > 1:
        # ||A(x)|| <= 1 + (k - 1) sqrt(2) for k x k blocks with entries from [-1, 1]
        a = int(rng.choice([-1, 1])) * (2 * spec.block_size + 3)
    else:
        a = int(rng.choice([-4, -3, 3, 4]))
    seed = SampleSeed(int(rng.integers(0, 2 ** 63)), 0)
    return 1.0 - spectral_norm(sample_reduced_hamiltonian(spec, a, seed)) + sr.NORM_SLACK


@prop("models", "bdg_block_form")
def _bdg_form(rng: np.random.Generator) -> Optional[float]:
    graph = path_graph(int(rng.integers(1, 6)))
    spec = ModelSpec(graph, Family.BDG, SiteDistribution.uniform_disc(), block_size=2)
    blocks = sample_site_blocks(spec, SampleSeed(int(rng.integers(0, 2 ** 63)), 0))
    worst = max(
        float(np.max(np.abs(blocks[:, 0, 0] + blocks[:, 1, 1]))),
        float(np.max(np.abs(blocks.imag))),
        float(np.max(np.abs(blocks - blocks.transpose(0, 2, 1)))),
    )
    return 1e-12 - worst


@prop("models", "scalar_regularity_bound")
def _scalar_regularity(rng: np.random.Generator) -> Optional[float]:
    a = int(rng.choice([3, 4, 5, -3, -4]))
    eps = float(rng.uniform(0.0, 1.0 / (2 * abs(a))))
    shift = float(rng.uniform(-5.0, 5.0))
    if abs(shift) < 1e-3:
        return None
    margin = regularity.scalar_regularity_margin(a, shift - a, eps)
    return min(margin.bound - margin.interval_length, margin.support_measure_bound - margin.support_measure) + regularity.AREA_SLACK


@prop("models", "bdg_area_bounds")
def _bdg_areas(rng: np.random.Generator) -> Optional[float]:
    r = 1.5 * np.sqrt(rng.random())
    theta = 2 * np.pi * rng.random()
    margin = regularity.bdg_regularity_margin(r * np.cos(theta), r * np.sin(theta), float(rng.uniform(-2.0, 2.0)), float(rng.uniform(0.0, 1.0)))
    return min(margin.det_bound - margin.det_set_area, margin.norm_bound - margin.norm_set_area) + regularity.AREA_SLACK


# ---------- mc ----------

@prop("mc", "event_nesting", cost=50)
def _nesting(rng: np.random.Generator) -> Optional[float]:
    graph = path_graph(int(rng.integers(2, 7)))
    dist = SiteDistribution.uniform_interval(1.0)
    seed = SampleSeed(int(rng.integers(0, 2 ** 63)), 0)
    spec = ModelSpec(graph, Family.ANDERSON, dist, coupling=1.0)
    counts = wegner_mc.sweep_count_events(spec, [0.3, 0.1, 0.03], [1, 2, 3], 40, seed, jobs=1).indicators
    count_nested = np.all(counts[:, :, 1:] <= counts[:, :, :-1]) and np.all(counts[:, 1:, :] <= counts[:, :-1, :])

    reduced_spec = ModelSpec(graph, Family.ANDERSON, dist, hopping=spec.hopping.scaled(0.25))
    dets = wegner_mc.sweep_det_events(reduced_spec, 3, [1e-3, 1e-2, 1e-1, 1.0], 40, seed, jobs=1).indicators
    det_nested = np.all(dets[:, :-1] <= dets[:, 1:])
    return 0.0 if count_nested and det_nested else -1.0


@prop("mc", "wilson_coverage", cost=10 ** 9)
def _coverage(rng: np.random.Generator) -> Optional[float]:
    spec = ModelSpec(path_graph(1), Family.ANDERSON, SiteDistribution.uniform_interval(1.0), hopping=HermitianMatrix([[0.3]]))
    report = wegner_mc.wilson_coverage(spec, 3, 0.05, trials=1000, repetitions=100,
                                       seed=SampleSeed(int(rng.integers(0, 2 ** 63)), 0), jobs=1)
    return report.coverage - COVERAGE_FLOOR


# ---------- Runner ----------

def select(groups: Iterable[str]) -> List[Property]:
    wanted = list(groups)
    unknown = [g for g in wanted if g not in GROUPS]
    if unknown:
        raise ValueError(f"unknown property groups {unknown}; expected a subset of {list(GROUPS)}")
    return [p for p in PROPERTIES.values() if p.group in wanted]


def run_property(p: Property, seed: int, instances: int, slack: float = 0.0) -> PropertyResult:
    result = PropertyResult(name=p.name, group=p.group, seed=seed)
    for i in range(max(1, instances // p.cost)):
        rng = inst.rng_for(seed, p.key, i)
        try:
            margin = p.check(rng)
        except Exception as exc:
            log.error("property %s instance %d raised: %s", p.name, i, exc)
            result.errors.append(f"instance {i}: {type(exc).__name__}: {exc}")
            if result.first_failure is None:
                result.first_failure = i
            continue
        if margin is None:
            continue
        result.checked += 1
        margin += slack
        result.worst_margin = min(result.worst_margin, margin)
        if margin < 0:
            result.violations += 1
            if result.first_failure is None:
                result.first_failure = i
    log.info("%s: checked=%d violations=%d worst=%.3e", p.name, result.checked, result.violations, result.worst_margin)
    return result


def run_properties(groups: Iterable[str], seed: int, instances: int = DEFAULT_INSTANCES, slack: float = 0.0) -> List[PropertyResult]:
    return [run_property(p, seed, instances, slack) for p in select(groups)]
