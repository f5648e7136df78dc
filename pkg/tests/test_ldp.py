from __future__ import annotations

import math

import pytest

from qldp.ldp import (
    SCAN_COLUMNS,
    TailCutoffError,
    bounds,
    empirical_rate,
    ldp_scan,
    rate_function,
    scan_frame,
    tail_log,
    three_case_rate_bounds,
)
from qldp.qcore import DomainViolation
from qldp.qdist import QBinomialSpec, pmf

from conftest import STANDARD_N

KL_ORACLE = 0.3 * math.log(0.6) + 0.7 * math.log(1.4)


# ── Rates ─────────────────────────────────────────────────────────────────────

def test_rate_function_examples():
    assert rate_function(1.0, 0.3, 0.5) == pytest.approx(KL_ORACLE, rel=1e-13)
    d_15 = (1.0 - (0.3**1.5 + 0.7**1.5) / math.sqrt(0.5)) / -0.5
    assert rate_function(0.5, 0.3, 0.5) == pytest.approx(d_15 / 1.5, rel=1e-12)
    for q in (0.3, 1.0, 1.7):
        assert rate_function(q, 0.4, 0.4) == 0.0
        assert rate_function(q, 0.5 - 1e-6, 0.5) < 1e-10


@pytest.mark.parametrize("q, x, r", [(2.0, 0.3, 0.5), (0.5, 0.0, 0.5), (0.5, 1.0, 0.5), (0.5, 0.3, 1.0)])
def test_rate_function_rejects(q, x, r):
    with pytest.raises(DomainViolation):
        rate_function(q, x, r)


def test_classical_empirical_rate_anchor():
    result = pmf(QBinomialSpec(1.0, 10_000, 0.5))
    rate = empirical_rate(result, 0.3)
    assert abs(rate - KL_ORACLE) / KL_ORACLE <= 0.05
    # far below double-precision underflow, still measured in log space
    assert math.exp(tail_log(result, 0.3)) == 0.0
    assert math.isfinite(tail_log(result, 0.3))


def test_empirical_rate_near_full_tail():
    for q, ceiling in ((1.0, 1e-3), (1.5, 0.05)):
        rate = empirical_rate(pmf(QBinomialSpec(q, 10, 0.5)), 0.95)
        assert 0.0 < rate < ceiling


def test_tail_log_cut_off():
    result = pmf(QBinomialSpec(0.5, 100, 0.5))
    with pytest.raises(TailCutoffError) as info:
        tail_log(result, 0.3)
    assert info.value.n == 100
    assert isinstance(info.value, RuntimeError)


# ── Sandwich ──────────────────────────────────────────────────────────────────

def test_bounds_classical_example():
    result = pmf(QBinomialSpec(1.0, 4, 0.5))
    sandwich = bounds(result, 0.3)
    assert sandwich.m == 1
    assert sandwich.lower == pytest.approx(4 / 16, rel=1e-14)
    assert sandwich.upper == pytest.approx(8 / 16, rel=1e-14)
    assert sandwich.monotone_ok
    log_tail = tail_log(result, 0.3)
    assert math.exp(log_tail) == pytest.approx(5 / 16, rel=1e-14)
    assert sandwich.contains(log_tail)


def test_bounds_single_term_is_tight():
    result = pmf(QBinomialSpec(1.0, 4, 0.5))
    sandwich = bounds(result, 0.2)
    assert sandwich.m == 0
    assert sandwich.lower == sandwich.upper == pytest.approx(1 / 16, rel=1e-14)
    assert sandwich.log_lower == sandwich.log_upper == tail_log(result, 0.2)
    assert sandwich.monotone_ok


def test_bounds_deformed_sandwich():
    result = pmf(QBinomialSpec(0.9, 100, 0.5))
    sandwich = bounds(result, 0.4)
    assert sandwich.monotone_ok
    assert sandwich.lower > 0
    assert sandwich.contains(tail_log(result, 0.4))


def test_bounds_fully_cut_off_tail():
    result = pmf(QBinomialSpec(0.7, 1000, 0.5))
    sandwich = bounds(result, 0.2)
    assert sandwich.monotone_ok
    assert sandwich.lower == sandwich.upper == 0.0
    with pytest.raises(TailCutoffError):
        tail_log(result, 0.2)


def test_bounds_require_x_below_r():
    result = pmf(QBinomialSpec(1.0, 10, 0.3))
    for x in (0.3, 0.5, 0.0):
        with pytest.raises(DomainViolation):
            bounds(result, x)


# ── Per-case rate bounds ──────────────────────────────────────────────────────

@pytest.mark.parametrize("q, n", [(0.9, 100), (1.0, 100), (1.0, 1000), (1.2, 100), (1.2, 1000),
                                  (1.5, 100), (1.5, 1000), (1.8, 100), (1.8, 1000)])
def test_rate_bounds_bracket_empirical_rate(q, n):
    result = pmf(QBinomialSpec(q, n, 0.5))
    x = 0.45
    log_tail = tail_log(result, x)
    rates = three_case_rate_bounds(result, x, log_tail)
    value = -empirical_rate(result, x)
    slack = 1e-12 * (1.0 + abs(value))
    assert rates.lower_rate_bound <= value + slack
    if bounds(result, x).monotone_ok:
        assert value <= rates.upper_rate_bound + slack


@pytest.mark.parametrize("n", [100, 1000])
def test_non_monotone_pmf_is_reported(n):
    # the heavy q = 1.8 tail lifts the end masses, so b_0 > b_1
    result = pmf(QBinomialSpec(1.8, n, 0.5))
    assert result.probabilities[0] > result.probabilities[1]
    assert bounds(result, 0.45).monotone_ok is False


def test_case_labels():
    assert three_case_rate_bounds(pmf(QBinomialSpec(1.0, 50, 0.5)), 0.4).case == "classical"
    assert three_case_rate_bounds(pmf(QBinomialSpec(0.8, 50, 0.5)), 0.4).case == "sub"
    assert three_case_rate_bounds(pmf(QBinomialSpec(1.4, 50, 0.5)), 0.4).case == "super"
    assert three_case_rate_bounds(pmf(QBinomialSpec(1.0, 50, 0.5)), 0.4).proof_inequalities_ok is None


def test_sub_case_discarded_term_shrinks():
    rate = rate_function(0.5, 0.3, 0.5)
    discarded = []
    for n in STANDARD_N:
        bounds_ = three_case_rate_bounds(pmf(QBinomialSpec(0.5, n, 0.5)), 0.3)
        assert bounds_.case == "sub"
        discarded.append(bounds_.discarded_term)
    assert discarded[1] <= 0.1 * rate
    assert discarded[0] > discarded[1] > discarded[2] > 0


@pytest.mark.parametrize("n", STANDARD_N)
def test_super_case_proof_inequalities(n):
    result = pmf(QBinomialSpec(1.5, n, 0.5))
    rates = three_case_rate_bounds(result, 0.3, tail_log(result, 0.3))
    assert rates.case == "super"
    assert rates.proof_inequalities_ok is True


# ── Scan ──────────────────────────────────────────────────────────────────────

def test_scan_classical_trend():
    rows = ldp_scan([1.0], list(STANDARD_N), 0.5, 0.3)
    assert [row.n for row in rows] == list(STANDARD_N)
    gaps = [row.gap for row in rows]
    assert gaps[0] > gaps[1] > gaps[2]
    assert abs(rows[-1].empirical_rate - KL_ORACLE) / KL_ORACLE <= 0.05
    for row in rows:
        assert row.error is None
        assert row.theoretical_rate == pytest.approx(KL_ORACLE, rel=1e-13)
        assert row.sandwich_ok
        assert row.c_q == 0.0


def test_scan_sandwich_across_q():
    qs = [0.2, 0.5, 0.8, 1.0, 1.2, 1.5, 1.8]
    rows = ldp_scan(qs, [10], 0.5, 0.45)
    assert [row.q for row in rows] == qs
    for row in rows:
        if row.error is None and row.monotone_precondition_ok:
            assert row.sandwich_ok
            assert row.lower_bound_value <= row.tail * (1 + 1e-12)
            assert row.tail <= row.upper_bound_value * (1 + 1e-12)


def test_scan_super_rows_check_proof_inequalities():
    rows = ldp_scan([1.2, 1.5, 1.8], list(STANDARD_N), 0.5, 0.3)
    for row in rows:
        assert row.error is None
        assert row.proof_inequalities_ok is True


def test_scan_continuity_in_q():
    rows = ldp_scan([1.0 - 1e-6, 1.0, 1.0 + 1e-6], [1000], 0.5, 0.3)
    reference = rows[1].empirical_rate
    for row in (rows[0], rows[2]):
        assert abs(row.empirical_rate - reference) / reference <= 1e-3


def test_scan_keeps_cut_off_rows():
    rows = ldp_scan([0.5, 1.0], [100], 0.5, 0.3)
    cut, classical = rows
    assert cut.error.startswith("TailCutoffError")
    assert cut.tail == 0.0
    assert cut.log_tail == -math.inf
    assert math.isnan(cut.empirical_rate)
    assert cut.theoretical_rate == pytest.approx(rate_function(0.5, 0.3, 0.5))
    assert classical.error is None


def test_scan_independent_of_workers():
    args = ([0.5, 1.0, 1.5], [100, 1000], 0.5, 0.3)
    serial = scan_frame(ldp_scan(*args, workers=1))
    threaded = scan_frame(ldp_scan(*args, workers=4))
    assert serial.equals(threaded)


def test_scan_frame_columns():
    frame = scan_frame(ldp_scan([1.0], [100], 0.5, 0.3))
    assert list(frame.columns) == SCAN_COLUMNS
    assert SCAN_COLUMNS[:4] == ["q", "n", "r", "x"]
    assert SCAN_COLUMNS[-1] == "error"
    assert len(frame) == 1


@pytest.mark.parametrize("q_list, n_list, r, x", [
    ([1.0], [1000, 100], 0.5, 0.3),
    ([1.0], [100, 100], 0.5, 0.3),
    ([1.0], [100], 0.5, 0.5),
    ([1.0], [100], 0.5, 0.7),
    ([2.0], [100], 0.5, 0.3),
    ([], [100], 0.5, 0.3),
])
def test_scan_validates_inputs(q_list, n_list, r, x):
    with pytest.raises(DomainViolation):
        ldp_scan(q_list, n_list, r, x)
