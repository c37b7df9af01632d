# test_spectral_reduction.py
import re

import numpy as np
import pytest

import instances as inst
import spectral_reduction
from errors import (
    NoAdmissibleShift,
    NormTooLarge,
    PerturbationTooLarge,
    PreconditionViolation,
    ReductionInvariantError,
    SingularFactor,
)
from hermitian_core import HermitianMatrix, IndexSet, hermitian_eigenvalues
from spectral_reduction import (
    DichotomyBranch,
    choose_shift,
    count_sandwich_check,
    determinant_dichotomy,
    dichotomy_threshold,
    reduce,
    sandwich_count_conjugation,
    schur_count_bounds,
    shift_scan,
    weyl_count_stability,
)


# ---------- Shift selection and reduction ----------

def test_shift_scan_order():
    assert list(shift_scan(2)) == [3, -3, 4, -4, 5, -5]


@pytest.mark.parametrize("diag, expected", [([0.0], 3), ([-3.0, -4.0], -3)])
def test_choose_shift_examples(diag, expected):
    assert choose_shift(HermitianMatrix.diagonal(diag), len(diag)) == expected


def test_choose_shift_invariants_on_random_inputs():
    rng = inst.rng_for(201)
    for _ in range(300):
        L = int(rng.integers(1, 13))
        B2 = inst.random_hermitian(rng, L, scale=float(rng.uniform(0.1, 4.0)))
        try:
            a = choose_shift(B2, L)
        except NoAdmissibleShift:
            continue
        assert 3 <= abs(a) <= L + 3
        assert np.min(np.abs(hermitian_eigenvalues(B2) + a)) >= 2.0


def test_choose_shift_two_sided_spectrum_blocks_every_candidate():
    # -a in {+-3, +-4, +-5} is always within 2 of 4.5 or -4.5
    with pytest.raises(NoAdmissibleShift):
        choose_shift(HermitianMatrix.diagonal([-4.5, 4.5]), 2)


def test_choose_shift_dimension_mismatch():
    with pytest.raises(PreconditionViolation):
        choose_shift(HermitianMatrix.identity(2), 3)


def test_reduce_zero_inputs():
    red = reduce(HermitianMatrix.diagonal([0.0]), HermitianMatrix.diagonal([0.0]))
    assert red.a == 3
    np.testing.assert_allclose(red.b_hat.entries, [[0.0]], atol=1e-15)
    assert red.lower_scale == 225.0
    assert red.upper_scale == 7.0


def test_reduce_scalar_arithmetic():
    red = reduce(HermitianMatrix.diagonal([1.0]), HermitianMatrix.diagonal([5.0]))
    assert red.a == 3
    np.testing.assert_allclose(red.b_hat.entries, [[-0.375]])
    assert red.nu == pytest.approx(0.5)
    doc = red.to_document()
    assert doc["a"] == 3 and doc["L"] == 1
    assert doc["b_hat"]["re"] == [[-0.375]]


@pytest.mark.parametrize(
    "b2, shift, match",
    [
        ([-2.5], 3, "above 1/2"),  # (B2 + 3)^-1 = 2
        ([0.0], 10, "below 1/"),  # nu = 1/10 < 1/5
    ],
)
def test_reduce_raises_when_shift_breaks_norm_invariants(monkeypatch, b2, shift, match):
    monkeypatch.setattr(spectral_reduction, "choose_shift", lambda B2, L: shift)
    with pytest.raises(ReductionInvariantError, match=match):
        reduce(HermitianMatrix.diagonal([0.0]), HermitianMatrix.diagonal(b2))


def test_reduce_norm_invariants_on_random_inputs():
    rng = inst.rng_for(203)
    for _ in range(200):
        L = int(rng.integers(1, 11))
        B1 = inst.random_contraction(rng, L)
        B2 = inst.random_contraction(rng, L).scaled(float(rng.uniform(0.1, 3.0)))
        red = reduce(B1, B2)
        assert max(red.nu, red.right_norm) <= 0.5 + 1e-10
        assert red.nu >= 1.0 / (L + 4) - 1e-10
        assert red.factorization_residual(B1 + B2) <= 1e-10 * max(1.0, np.linalg.norm((B1 + B2).entries))


def test_reduce_rejects_large_b1():
    with pytest.raises(NormTooLarge):
        reduce(HermitianMatrix.diagonal([2.0]), HermitianMatrix.diagonal([0.0]))


# ---------- Count sandwich ----------

def test_sandwich_zero_inputs():
    s = count_sandwich_check(HermitianMatrix.diagonal([0.0]), HermitianMatrix.diagonal([0.0]), 0.25)
    assert (s.low, s.mid, s.high) == (1, 1, 1)
    assert s.single_site and s.holds


def test_sandwich_planted_small_eigenvalue():
    rng = inst.rng_for(205)
    eps = 0.1
    B = inst.with_spectrum(rng, [eps / 2, 1.7, -2.4, 3.1])
    B1 = inst.random_contraction(rng, 4)
    s = count_sandwich_check(B1, B - B1, eps)
    assert s.mid >= 1 and s.high >= 1
    assert s.holds


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3])
def test_sandwich_never_violated(eps):
    rng = inst.rng_for(207, int(1 / eps))
    for _ in range(100):
        L = int(rng.integers(1, 9))
        B1 = inst.random_contraction(rng, L)
        B2 = inst.random_contraction(rng, L).scaled(float(rng.uniform(0.01, 2.0)))
        assert count_sandwich_check(B1, B2, eps).holds


def test_sandwich_rejects_large_eps():
    with pytest.raises(PreconditionViolation):
        count_sandwich_check(HermitianMatrix.diagonal([0.0]), HermitianMatrix.diagonal([0.0]), 0.5)


# ---------- Counting stability ----------

def test_weyl_examples():
    eps = 0.1
    D = HermitianMatrix.diagonal([0.9 * eps])
    assert weyl_count_stability(D, D, eps)
    assert weyl_count_stability(D, HermitianMatrix.diagonal([1.5 * eps]), eps)
    with pytest.raises(PerturbationTooLarge):
        weyl_count_stability(D, HermitianMatrix.diagonal([3.0 * eps]), eps)


def test_weyl_random():
    rng = inst.rng_for(209)
    for _ in range(300):
        n = int(rng.integers(1, 7))
        eps = float(rng.uniform(0.01, 1.0))
        D = inst.random_hermitian(rng, n)
        assert weyl_count_stability(D, D + inst.perturbation_within(rng, n, eps), eps)


def test_conjugation_examples_and_random():
    rng = inst.rng_for(211)
    A = inst.random_hermitian(rng, 4)
    assert sandwich_count_conjugation(A, HermitianMatrix.identity(4), 0.3)
    assert sandwich_count_conjugation(A, HermitianMatrix.diagonal([0.0] * 4), 0.3)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        assert sandwich_count_conjugation(inst.random_hermitian(rng, n), inst.random_contraction(rng, n), float(rng.uniform(0.01, 2.0)))
    with pytest.raises(NormTooLarge):
        sandwich_count_conjugation(A, HermitianMatrix.identity(4).scaled(2.0), 0.3)


# ---------- Schur count chain ----------

def test_schur_counts_scalar_blocks():
    D = HermitianMatrix.from_array([[0.0, 0.4], [0.4, 1.0]])
    counts = schur_count_bounds(D, IndexSet.of(2, [1]), 0.1)
    assert (counts.schur_count, counts.full_count, counts.beta_scaled_count) == (0, 0, 1)
    assert counts.beta == pytest.approx(8.0)
    assert counts.holds


def test_schur_counts_block_diagonal():
    D = HermitianMatrix.diagonal([0.05, 1.0])
    counts = schur_count_bounds(D, IndexSet.of(2, [1]), 0.1)
    assert (counts.schur_count, counts.full_count, counts.beta_scaled_count) == (1, 1, 1)


@pytest.mark.parametrize(
    "D, eps, hypothesis",
    [
        ([[0.0, 0.1], [0.1, 1.0]], 0.6, "eps <= 1/2"),
        ([[0.0, 0.9], [0.9, 1.0]], 0.1, "||V|| <= 1/2"),
        ([[0.0, 0.0], [0.0, 0.1]], 0.1, "C_2eps(B) = 0"),
    ],
)
def test_schur_counts_name_failed_hypothesis(D, eps, hypothesis):
    with pytest.raises(PreconditionViolation, match=re.escape(hypothesis)):
        schur_count_bounds(HermitianMatrix.from_array(D), IndexSet.of(2, [1]), eps)


def test_schur_chain_random():
    rng = inst.rng_for(213)
    for _ in range(300):
        k, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        eps = float(rng.choice([0.1, 0.01, 0.5]))
        D, alpha = inst.partitioned_for_schur_bounds(rng, k, m, eps)
        assert schur_count_bounds(D, alpha, eps).holds


# ---------- Determinant dichotomy ----------

def test_dichotomy_threshold_scalar():
    assert dichotomy_threshold(3.0, 1) == pytest.approx(1.0 / 48.0)
    assert dichotomy_threshold(-2.0, 2) == pytest.approx((1 / 32) * (1 / 18))


def test_dichotomy_scalar_det_branch():
    result = determinant_dichotomy(HermitianMatrix.diagonal([0.5]), HermitianMatrix.diagonal([-0.4]), 3.0)
    assert result.branch == DichotomyBranch.DET_BOUND
    assert result.lhs == pytest.approx(1.0 / 65.0)
    assert result.det_rhs == pytest.approx(0.1 / 32.0)
    assert result.threshold == pytest.approx(1.0 / 48.0)


def test_dichotomy_scalar_not_applicable():
    result = determinant_dichotomy(HermitianMatrix.diagonal([0.5]), HermitianMatrix.diagonal([2.0]), 3.0)
    assert result.branch == DichotomyBranch.NOT_APPLICABLE


def test_dichotomy_degenerate_inputs():
    zero = HermitianMatrix.diagonal([0.0])
    with pytest.raises(SingularFactor, match="A \\+ J"):
        determinant_dichotomy(zero, zero, 2.0)
    with pytest.raises(PreconditionViolation):
        determinant_dichotomy(zero, zero, 1.5)
    with pytest.raises(NormTooLarge):
        determinant_dichotomy(HermitianMatrix.diagonal([1.5]), zero, 3.0)


def test_dichotomy_random_instances():
    rng = inst.rng_for(217)
    applicable = 0
    for i in range(600):
        k = int(rng.integers(1, 4))
        a = float(rng.choice([2.0, 3.0, 5.0]) * rng.choice([-1.0, 1.0]))
        A = inst.random_contraction(rng, k)
        if i % 2:
            J = A.scaled(-1.0) + inst.perturbation_within(rng, k, float(10.0 ** rng.uniform(-6, -1)))
        else:
            J = inst.random_hermitian(rng, k, scale=float(rng.uniform(0.1, 3.0)))
        try:
            result = determinant_dichotomy(A, J, a)
        except SingularFactor:
            continue
        if result.branch != DichotomyBranch.NOT_APPLICABLE:
            applicable += 1
        assert result.holds
    assert applicable > 50
