# test_regularity.py
import math

import numpy as np
import pytest

from errors import PreconditionViolation, SingularFactor
from hermitian_core import HermitianMatrix
from random_models import SampleSeed, SiteDistribution, bdg_block
from regularity import (
    annulus_disc_area,
    bdg_block_parameters,
    bdg_event_probabilities,
    bdg_regularity_margin,
    empirical_assumption_A,
    reciprocal_preimage,
    scalar_event_probability,
    scalar_regularity_margin,
    wilson_interval,
)


# ---------- Wilson intervals ----------

def test_wilson_interval_known_values():
    low, high = wilson_interval(5, 10)
    assert low == pytest.approx(0.236593, abs=1e-5)
    assert high == pytest.approx(0.763407, abs=1e-5)
    low, high = wilson_interval(0, 10)
    assert low == pytest.approx(0.0, abs=1e-12)
    assert high == pytest.approx(0.277533, abs=1e-5)


def test_wilson_interval_rejects_bad_counts():
    with pytest.raises(PreconditionViolation):
        wilson_interval(3, 2)
    with pytest.raises(PreconditionViolation):
        wilson_interval(0, 0)


# ---------- Scalar margins ----------

def test_scalar_margin_zero_eps():
    margin = scalar_regularity_margin(3, -2.5, 0.0)
    assert margin.interval_length == 0.0
    assert margin.support_measure == 0.0
    assert margin.holds


def test_scalar_margin_closed_form():
    # j + a = 0.5
    margin = scalar_regularity_margin(3, -2.5, 0.1)
    assert margin.interval_length == pytest.approx(0.2 / (4.0 - 0.01), rel=1e-12)
    assert margin.interval_length == pytest.approx(0.050125, abs=1e-6)
    assert margin.bound == pytest.approx(0.4)
    # 1/(v - 3) never comes near -2 for v in [-1, 1]
    assert margin.support_measure == 0.0
    assert margin.holds


def test_scalar_margin_outside_regime():
    margin = scalar_regularity_margin(3, -1.0, 0.1)
    assert margin.interval_length == 0.0
    assert margin.holds


def test_scalar_margin_reachable_target():
    margin = scalar_regularity_margin(3, 1.0 / 3.0, 0.02)
    assert margin.support_measure == pytest.approx((1 / 0.28) - (1 / 0.32), rel=1e-9)
    assert margin.holds


def test_scalar_margin_errors():
    with pytest.raises(SingularFactor):
        scalar_regularity_margin(3, -3.0, 0.1)
    with pytest.raises(PreconditionViolation):
        scalar_regularity_margin(3, 0.0, 0.1, support_bound=1.5)
    with pytest.raises(PreconditionViolation):
        scalar_regularity_margin(3, 0.0, 0.2)
    with pytest.raises(PreconditionViolation):
        scalar_regularity_margin(3, 0.0, -0.01)


def test_scalar_margins_hold_on_a_grid():
    for a in (3, -3, 4, 7):
        for j in np.linspace(-10.0, 10.0, 41):
            if j + a == 0:
                continue
            for eps in (1e-4, 1e-2, 1.0 / (2 * abs(a))):
                assert scalar_regularity_margin(a, float(j), eps).holds


def test_reciprocal_preimage():
    assert reciprocal_preimage(3.0, -2.0, 0.1, 1.0) is None
    low, high = reciprocal_preimage(3.0, -0.3, 1.0, 1.0)
    assert (low, high) == (-1.0, 1.0)
    with pytest.raises(PreconditionViolation):
        reciprocal_preimage(1.0, 0.0, 0.1, 1.0)


def test_scalar_event_probability_matches_window():
    dist = SiteDistribution.uniform_interval()
    p = scalar_event_probability(dist, 3.0, -0.3, 0.02)
    assert p == pytest.approx(0.5 * (1 / 0.28 - 1 / 0.32), rel=1e-9)
    assert scalar_event_probability(dist, 3.0, -2.0, 0.1) == 0.0


# ---------- BdG blocks ----------

def test_bdg_block_parameters_determinant_identity():
    rng = np.random.default_rng(5)
    for _ in range(50):
        x, y, z = rng.normal(size=3)
        J = HermitianMatrix.from_array([[x, y], [y, z]])
        a, b, c = bdg_block_parameters(J)
        u, v = rng.uniform(-1, 1, size=2)
        det = float(np.linalg.det(bdg_block(u, v) + J.entries).real)
        assert det == pytest.approx(c * c - (u - a) ** 2 - (v - b) ** 2, abs=1e-12)


def test_bdg_block_parameters_rejects_complex_and_wrong_size():
    with pytest.raises(PreconditionViolation):
        bdg_block_parameters(HermitianMatrix(np.array([[0.0, 1j], [-1j, 0.0]])))
    with pytest.raises(PreconditionViolation):
        bdg_block_parameters(HermitianMatrix.identity(3))


def test_bdg_margin_centered_disc():
    eps = 0.2
    margin = bdg_regularity_margin(0.0, 0.0, 0.0, eps)
    assert margin.det_set_area == pytest.approx(math.pi * eps, abs=1e-9)
    assert margin.norm_set_area == pytest.approx(math.pi * eps ** 2, abs=1e-9)
    assert margin.holds


def test_annulus_inside_the_disc():
    area = annulus_disc_area((0.1, 0.0), math.sqrt(0.2), math.sqrt(0.3))
    assert area == pytest.approx(0.1 * math.pi, abs=1e-9)
    assert annulus_disc_area((0.1, 0.0), 0.5, 0.5) == 0.0


def test_annulus_area_matches_rejection_sampling():
    rng = np.random.default_rng(17)
    n = 1_000_000
    pts = rng.uniform(-1.0, 1.0, size=(n, 2))
    center, r_in, r_out = (0.7, 0.2), 0.3, 0.6
    dist = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
    inside = (np.hypot(pts[:, 0], pts[:, 1]) <= 1.0) & (dist >= r_in) & (dist <= r_out)
    estimate = 4.0 * np.count_nonzero(inside) / n
    assert annulus_disc_area(center, r_in, r_out) == pytest.approx(estimate, abs=0.01)


def test_bdg_margins_hold_on_random_parameters():
    rng = np.random.default_rng(19)
    for _ in range(100):
        r, theta = math.sqrt(rng.random()), 2 * math.pi * rng.random()
        c = float(rng.uniform(-1.0, 1.0))
        eps = float(10 ** rng.uniform(-3, 0))
        assert bdg_regularity_margin(r * math.cos(theta), r * math.sin(theta), c, eps).holds


def test_bdg_margin_rejects_eps():
    with pytest.raises(PreconditionViolation):
        bdg_regularity_margin(0.0, 0.0, 0.0, 1.5)


def test_bdg_event_probabilities_agree_with_areas():
    J = HermitianMatrix.from_array([[0.2, 0.1], [0.1, -0.3]])
    trials = 20000
    result = bdg_event_probabilities(J, 0.1, trials, SampleSeed(31))
    assert result.det_event.expected == pytest.approx(0.1025, abs=1e-8)
    assert result.norm_event.expected == pytest.approx(0.0225, abs=1e-8)
    for event in (result.det_event, result.norm_event):
        assert event.trials == trials
        assert abs(event.p_hat - event.expected) <= 4.0 * event.standard_error


# ---------- Empirical determinant regularity ----------

def test_empirical_regularity_scalar():
    dist = SiteDistribution.uniform_interval()
    J = HermitianMatrix.diagonal([1.0 / 3.0])
    estimates = empirical_assumption_A(dist, 1, 3, J, [0.0, 0.02, 1.0], 20000, SampleSeed(41))
    zero, mid, saturated = estimates
    assert zero.p_hat == 0.0 and zero.expected == 0.0
    assert saturated.p_hat == 1.0 and saturated.expected == pytest.approx(1.0)
    assert mid.expected == pytest.approx(0.5 * (1 / 0.28 - 1 / 0.32), rel=1e-9)
    assert abs(mid.p_hat - mid.expected) <= 4.0 * mid.standard_error
    assert mid.bound_K_eps_alpha == pytest.approx(0.02)


def test_empirical_regularity_block_has_no_exact_value():
    dist = SiteDistribution.uniform_interval()
    estimates = empirical_assumption_A(dist, 2, 3, HermitianMatrix.identity(2), [0.05], 200, SampleSeed(43), alpha=0.5)
    assert estimates[0].expected is None
    assert estimates[0].bound_K_eps_alpha == pytest.approx(0.05 ** 0.5)


def test_empirical_regularity_errors():
    dist = SiteDistribution.uniform_interval()
    with pytest.raises(PreconditionViolation):
        empirical_assumption_A(dist, 2, 3, HermitianMatrix.identity(1), [0.1], 10, SampleSeed(1))
    with pytest.raises(SingularFactor):
        empirical_assumption_A(dist, 1, 3, HermitianMatrix.diagonal([-3.0]), [0.1], 10, SampleSeed(1))
    with pytest.raises(PreconditionViolation):
        empirical_assumption_A(dist, 1, 3, HermitianMatrix.diagonal([0.0]), [-0.1], 10, SampleSeed(1))
