from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qldp.qcore import (
    DeformationParameter,
    DomainViolation,
    log_q_exp,
    q_exp,
    q_exp_cutoff,
    q_ln,
    q_ln_from_log,
    q_product,
    q_ratio,
)

GRID_Q = (0.3, 0.7, 1.0, 1.3, 1.8)
GRID_X = np.logspace(-3, 3, 61)

qs = st.floats(min_value=0.3, max_value=1.8)
xs = st.floats(min_value=1e-3, max_value=1e3)


# ── q-logarithm ───────────────────────────────────────────────────────────────

def test_q_ln_examples():
    assert q_ln(1.0, math.e) == pytest.approx(1.0, rel=1e-15)
    assert q_ln(0.5, 4.0) == pytest.approx(2.0, rel=1e-14)
    assert q_ln(2.0, 2.0) == pytest.approx(0.5, rel=1e-14)


def test_q_ln_of_one_is_zero():
    for q in GRID_Q:
        assert q_ln(q, 1.0) == 0.0


@pytest.mark.parametrize("x", [0.0, -1.0, math.nan])
def test_q_ln_rejects_non_positive(x):
    with pytest.raises(DomainViolation) as info:
        q_ln(0.5, x)
    assert info.value.function_name == "q_ln"
    assert isinstance(info.value, ValueError)


def test_q_ln_is_vectorised():
    out = q_ln(0.5, np.array([1.0, 4.0, 9.0]))
    assert isinstance(out, np.ndarray)
    np.testing.assert_allclose(out, [0.0, 2.0, 4.0], rtol=1e-14)
    assert isinstance(q_ln(0.5, 4.0), float)


def test_q_ln_continuity_at_one():
    for q in (1.0 - 1e-9, 1.0 + 1e-9):
        np.testing.assert_allclose(q_ln(q, GRID_X), np.log(GRID_X), rtol=0, atol=1e-7)


def test_q_ln_from_log_handles_zero():
    assert q_ln_from_log(0.5, -math.inf) == pytest.approx(-2.0)
    assert q_ln_from_log(1.5, -math.inf) == -math.inf
    assert q_ln_from_log(1.0, -math.inf) == -math.inf
    with pytest.raises(DomainViolation):
        q_ln_from_log(0.5, math.inf)


def test_q_ln_from_log_matches_q_ln():
    for q in GRID_Q:
        np.testing.assert_allclose(q_ln_from_log(q, np.log(GRID_X)), q_ln(q, GRID_X), rtol=1e-14)


# ── q-exponential ─────────────────────────────────────────────────────────────

def test_q_exp_examples():
    assert q_exp(1.0, 0.0) == 1.0
    assert q_exp(2.0, 0.5) == pytest.approx(2.0, rel=1e-14)
    assert q_exp(0.5, 2.0) == pytest.approx(4.0, rel=1e-14)


def test_q_exp_strict_domain():
    with pytest.raises(DomainViolation) as info:
        q_exp(0.5, -3.0)
    assert info.value.offending_value == -3.0
    with pytest.raises(DomainViolation):
        q_exp(2.0, 1.0)


def test_q_exp_cutoff():
    assert q_exp_cutoff(0.5, -3.0) == 0.0
    assert q_exp_cutoff(0.5, 2.0) == pytest.approx(4.0, rel=1e-14)
    assert q_exp_cutoff(1.0, -50.0) == pytest.approx(math.exp(-50.0), rel=1e-14)
    with pytest.raises(DomainViolation):
        q_exp_cutoff(1.5, 3.0)


def test_q_exp_overflow_is_inf():
    assert q_exp(1.0, 1000.0) == math.inf
    assert q_exp(0.5, 1e200) == math.inf
    assert q_exp_cutoff(0.5, 1e200) == math.inf
    assert q_product(1.0, 1e200, 1e200) == math.inf
    assert log_q_exp(0.5, 1e200) == pytest.approx(2.0 * math.log(0.5e200), rel=1e-14)


def test_log_q_exp_cutoff_gives_minus_inf():
    out = log_q_exp(0.5, np.array([-3.0, 2.0]), cutoff=True)
    assert out[0] == -math.inf
    assert out[1] == pytest.approx(math.log(4.0))


@pytest.mark.parametrize("q", GRID_Q)
def test_inverse_pair_grid(q):
    np.testing.assert_allclose(q_exp(q, q_ln(q, GRID_X)), GRID_X, rtol=1e-12)


@given(q=qs, x=xs)
@settings(max_examples=300, deadline=None)
def test_inverse_pair_property(q, x):
    assert q_exp(q, q_ln(q, x)) == pytest.approx(x, rel=1e-11)


@pytest.mark.parametrize("q", GRID_Q)
def test_q_exp_strictly_increasing(q):
    if q < 1:
        grid = np.linspace(-1.0 / (1.0 - q) + 0.01, 10.0, 400)
    elif q > 1:
        grid = np.linspace(-10.0, 1.0 / (q - 1.0) - 0.01, 400)
    else:
        grid = np.linspace(-10.0, 10.0, 400)
    assert np.all(np.diff(q_exp(q, grid)) > 0)


# ── q-product / q-ratio ───────────────────────────────────────────────────────

def test_q_product_examples():
    assert q_product(1.0, 2.0, 3.0) == pytest.approx(6.0, rel=1e-15)
    expected = (math.sqrt(2.0) + math.sqrt(3.0) - 1.0) ** 2
    assert q_product(0.5, 2.0, 3.0) == pytest.approx(expected, rel=1e-12)
    for q in GRID_Q:
        assert q_product(q, 2.5, 1.0) == pytest.approx(2.5, rel=1e-12)


def test_q_ratio_examples():
    assert q_ratio(1.0, 6.0, 3.0) == pytest.approx(2.0, rel=1e-15)
    for q in GRID_Q:
        assert q_ratio(q, 3.7, 3.7) == 1.0
    product = q_product(0.5, 2.0, 3.0)
    assert q_ratio(0.5, product, 3.0) == pytest.approx(2.0, rel=1e-12)


def test_q_product_domain():
    with pytest.raises(DomainViolation):
        q_product(0.5, 1e-6, 1e-6)
    with pytest.raises(DomainViolation):
        q_product(0.5, -1.0, 2.0)
    with pytest.raises(DomainViolation):
        q_ratio(0.5, 1e-6, 10.0)


@given(q=qs, x=st.floats(0.1, 10.0), y=st.floats(0.1, 10.0))
@settings(max_examples=300, deadline=None)
def test_q_product_homomorphism(q, x, y):
    base = float(q_ln(q, x)) + float(q_ln(q, y))
    assume(1.0 + (1.0 - q) * base > 1e-6)
    lhs = q_ln(q, q_product(q, x, y))
    assert abs(lhs - base) <= 1e-12 * (1.0 + abs(q_ln(q, x)) + abs(q_ln(q, y)))


@given(q=qs, x=st.floats(0.1, 10.0), y=st.floats(0.1, 10.0))
@settings(max_examples=300, deadline=None)
def test_q_ratio_inverts_q_product(q, x, y):
    base = float(q_ln(q, x)) + float(q_ln(q, y))
    assume(1.0 + (1.0 - q) * base > 1e-6)
    assert q_product(q, x, y) == q_product(q, y, x)
    assert q_ratio(q, q_product(q, x, y), y) == pytest.approx(x, rel=1e-10)


@pytest.mark.parametrize("q", (0.3, 0.7, 1.3, 1.8))
def test_exponential_law(q):
    grid = np.linspace(-0.4, 0.4, 9)
    for a in grid:
        for b in grid:
            lhs = q_product(q, q_exp(q, a), q_exp(q, b))
            assert lhs == pytest.approx(q_exp(q, a + b), rel=1e-12)


# ── DeformationParameter ──────────────────────────────────────────────────────

def test_deformation_parameter():
    q = DeformationParameter(1.5)
    assert float(q) == 1.5
    assert q.dual == DeformationParameter(0.5)
    assert not q.is_classical
    assert DeformationParameter(1.0).is_classical
    assert q_ln(q, 4.0) == q_ln(1.5, 4.0)
    with pytest.raises(DomainViolation):
        DeformationParameter(math.inf)
    with pytest.raises(DomainViolation):
        DeformationParameter(2.0).require_ldp_window("test")
