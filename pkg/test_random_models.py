# test_random_models.py
import numpy as np
import pytest

from errors import HoppingNormTooLarge, NormTooLarge, PreconditionViolation
from hermitian_core import HermitianMatrix, spectral_norm
from random_models import (
    Family,
    GraphSpec,
    ModelSpec,
    SampleSeed,
    SiteDistribution,
    block_hopping,
    check_reduced_hopping,
    default_hopping,
    discrete_laplacian,
    grid_graph,
    path_graph,
    sample_hamiltonian,
    sample_reduced_hamiltonian,
    sample_site_blocks,
    site_block,
)


def anderson(n: int, b: float = 1.0, coupling: float = 1.0, hopping=None) -> ModelSpec:
    return ModelSpec(path_graph(n), Family.ANDERSON, SiteDistribution.uniform_interval(b), coupling=coupling, hopping=hopping)


def bdg(n: int, hopping_scale: float = 1.0) -> ModelSpec:
    graph = path_graph(n)
    return ModelSpec(graph, Family.BDG, SiteDistribution.uniform_disc(), block_size=2, hopping=default_hopping(graph, Family.BDG, hopping_scale))


# ---------- Graphs ----------

def test_path_and_grid_graphs():
    path = path_graph(3)
    assert path.edges == ((0, 1), (1, 2))
    assert path.max_degree == 2
    grid = grid_graph(2, 3)
    assert grid.vertices == 6
    assert len(grid.edges) == 7
    assert grid.max_degree == 3
    np.testing.assert_array_equal(discrete_laplacian(path).entries.real, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])


@pytest.mark.parametrize(
    "vertices, edges, max_degree",
    [
        (3, [(1, 1)], None),
        (3, [(0, 1), (1, 0)], None),
        (3, [(0, 3)], None),
        (3, [(0, 1), (1, 2)], 1),
    ],
)
def test_graph_validation(vertices, edges, max_degree):
    with pytest.raises(PreconditionViolation):
        GraphSpec.from_edges(vertices, edges, max_degree)


# ---------- Distributions and seeds ----------

def test_custom_distribution_respects_its_density():
    dist = SiteDistribution.custom([1.0, 0.0, 0.0, 1.0], b=1.0, regularity_alpha=0.5)
    samples = dist.sample_scalar(np.random.default_rng(0), size=5000)
    assert np.all(np.abs(samples) >= 0.5 - 1e-12)
    assert np.all(np.abs(samples) <= 1.0)
    assert dist.cdf(0.0) == pytest.approx(0.5)
    assert dist.cdf(-1.0) == 0.0 and dist.cdf(1.0) == 1.0


def test_distribution_validation():
    with pytest.raises(PreconditionViolation):
        SiteDistribution.custom([0.0, 0.0])
    with pytest.raises(PreconditionViolation):
        SiteDistribution(SiteDistribution.uniform_interval().kind, regularity_alpha=0.5)
    with pytest.raises(PreconditionViolation):
        SiteDistribution.uniform_interval(0.0)
    with pytest.raises(PreconditionViolation):
        SiteDistribution.uniform_disc().sample_scalar(np.random.default_rng(0))


def test_disc_samples_stay_in_unit_disc():
    dist = SiteDistribution.uniform_disc()
    rng = np.random.default_rng(1)
    points = np.array([dist.sample_disc(rng) for _ in range(2000)])
    assert np.all(np.hypot(points[:, 0], points[:, 1]) <= 1.0)


def test_sample_seed_validation():
    with pytest.raises(PreconditionViolation):
        SampleSeed(2 ** 64)
    with pytest.raises(PreconditionViolation):
        SampleSeed(0, -1)
    assert SampleSeed(2 ** 64 - 1, 5).for_trial(6) == SampleSeed(2 ** 64 - 1, 6)


# ---------- ModelSpec ----------

def test_model_spec_defaults():
    assert anderson(4).hopping.dim == 4
    spec = ModelSpec(path_graph(3), Family.RANDOM_BLOCK, SiteDistribution.uniform_interval(), block_size=2)
    np.testing.assert_array_equal(spec.hopping.entries, block_hopping(path_graph(3), 2).entries)
    assert spec.dim == 6
    spec = bdg(2)
    np.testing.assert_array_equal(spec.hopping.entries.real.diagonal(), np.zeros(4))
    assert spec.hopping.entries[0, 2] == 1.0 and spec.hopping.entries[1, 3] == -1.0


def test_model_spec_validation():
    with pytest.raises(PreconditionViolation):
        ModelSpec(path_graph(2), Family.ANDERSON, SiteDistribution.uniform_interval(), block_size=2)
    with pytest.raises(PreconditionViolation):
        ModelSpec(path_graph(2), Family.BDG, SiteDistribution.uniform_interval(), block_size=2)
    with pytest.raises(PreconditionViolation):
        anderson(2, coupling=-1.0)
    with pytest.raises(PreconditionViolation):
        anderson(2, hopping=HermitianMatrix.identity(3))


# ---------- Sampling ----------

def test_zero_coupling_returns_hopping():
    spec = anderson(3, coupling=0.0)
    assert sample_hamiltonian(spec, SampleSeed(7)) is spec.hopping


def test_sampling_is_deterministic():
    spec = anderson(3)
    first = sample_hamiltonian(spec, SampleSeed(12345, 3))
    again = sample_hamiltonian(spec, SampleSeed(12345, 3))
    other = sample_hamiltonian(spec, SampleSeed(12345, 4))
    np.testing.assert_array_equal(first.entries, again.entries)
    assert not np.array_equal(first.entries, other.entries)
    assert np.all(np.abs(first.entries.diagonal().real) <= 1.0)


def test_site_streams_do_not_depend_on_system_size():
    seed = SampleSeed(99, 1)
    small = sample_site_blocks(anderson(3), seed)
    large = sample_site_blocks(anderson(6), seed)
    np.testing.assert_array_equal(small, large[:3])


def test_bdg_single_site_eigenvalues():
    spec = bdg(1)
    seed = SampleSeed(2024)
    block = sample_site_blocks(spec, seed)[0]
    u, v = block[0, 0].real, block[0, 1].real
    np.testing.assert_array_equal(block, [[u, v], [v, -u]])
    w = np.linalg.eigvalsh(sample_hamiltonian(spec, seed).entries)
    r = np.hypot(u, v)
    np.testing.assert_allclose(w, [-r, r], atol=1e-14)


def test_random_block_site_blocks_are_hermitian():
    rng = np.random.default_rng(4)
    for k in (1, 2, 3):
        block = site_block(SiteDistribution.uniform_interval(), k, rng)
        assert block.shape == (k, k)
        np.testing.assert_array_equal(block, block.conj().T)
        assert np.all(np.abs(block.real) <= 1.0) and np.all(np.abs(block.imag) <= 1.0)


# ---------- Reduced Hamiltonians ----------

def test_reduced_hamiltonian_near_zero_potential():
    spec = anderson(3, b=1e-9, hopping=HermitianMatrix(np.zeros((3, 3))))
    reduced = sample_reduced_hamiltonian(spec, 3, SampleSeed(5))
    np.testing.assert_allclose(reduced.entries, -np.eye(3) / 3.0, atol=1e-9)


def test_reduced_anderson_entries_in_range():
    spec = anderson(5, hopping=HermitianMatrix(np.zeros((5, 5))))
    for trial in range(20):
        diag = sample_reduced_hamiltonian(spec, 3, SampleSeed(8, trial)).entries.diagonal().real
        assert np.all(diag >= -0.5) and np.all(diag <= -0.25)


def test_reduced_bdg_norm_at_most_one():
    spec = bdg(4, hopping_scale=0.25)
    for trial in range(20):
        assert spectral_norm(sample_reduced_hamiltonian(spec, -3, SampleSeed(11, trial))) <= 1.0


def test_reduced_norm_above_one_raises():
    # every potential lands in [2.32, 2.9], so |(v - 3)^-1| > 1
    top_bin = SiteDistribution.custom([0.0] * 9 + [1.0], b=2.9)
    spec = ModelSpec(path_graph(2), Family.ANDERSON, top_bin, hopping=HermitianMatrix(np.zeros((2, 2))))
    with pytest.raises(NormTooLarge, match="exceeds 1"):
        sample_reduced_hamiltonian(spec, 3, SampleSeed(4))


def test_reduced_hopping_checks():
    with pytest.raises(HoppingNormTooLarge):
        check_reduced_hopping(anderson(3), 3)
    with pytest.raises(PreconditionViolation):
        check_reduced_hopping(anderson(3, hopping=HermitianMatrix(np.zeros((3, 3)))), 2)
