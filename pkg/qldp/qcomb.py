"""q-factorials, q-Stirling formulas, q-multinomial coefficients and Tsallis entropy.

Exact q-log-factorials are prefix sums of ln_q k, cached per q and shared
across threads. The precise q-Stirling constant delta_q is recovered by
Richardson extrapolation of the residual against the exact sums, and has
a zeta-function closed form used as an independent reference.

Usage:
  python -m qldp.qcomb --q 0.5 --n-max 1000000
"""

from __future__ import annotations

import argparse
import functools
import math
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .common import (
    DEFAULT_N_MAX,
    Q_ONE_WINDOW,
    RICHARDSON_LEVELS,
    STIRLING_TOLERANCE,
    batched,
    tlog,
)
from .qcore import DomainViolation, QLike, as_q, is_classical, q_exp, q_ln
from .vectors import CountLike, CountVector, ProbabilityLike, as_count_vector, as_probability_vector

__all__ = [
    "CountVector",
    "DeltaEstimate",
    "QFactorialTable",
    "StirlingConstants",
    "StirlingConvergenceError",
    "approx_ln_multinomial_via_entropy",
    "estimate_delta_q",
    "factorial_table",
    "q_factorial",
    "q_ln_binomial_coeff_approx",
    "q_ln_factorial",
    "q_ln_multinomial_coeff",
    "q_stirling_precise",
    "q_stirling_rough",
    "richardson_extrapolate",
    "tsallis_entropy",
    "zeta_delta_q",
]

CLASSICAL_DELTA = 1.0 - 0.5 * math.log(2.0 * math.pi)
NOISE_FLOOR_ULPS = 64
MIN_SCHEDULE_TOP = 1000


class StirlingConvergenceError(RuntimeError):
    """The extrapolated residual sequence is not Cauchy within tolerance."""

    def __init__(self, q: float, estimate: float, error: float, tolerance: float) -> None:
        self.q = q
        self.estimate = estimate
        self.error = error
        self.tolerance = tolerance
        super().__init__(
            f"estimate_delta_q(q={q}): error {error:.3e} exceeds tolerance {tolerance:.3e} "
            f"(last estimate {estimate!r})"
        )


def _is_two(q: float) -> bool:
    return abs(q - 2.0) < Q_ONE_WINDOW


def _require_int(function_name: str, name: str, value: int, minimum: int) -> int:
    if isinstance(value, (bool, np.bool_)) or int(value) != value or value < minimum:
        raise DomainViolation(function_name, value, f"integer {name} >= {minimum}")
    return int(value)


def _require_positive_q(function_name: str, q: QLike) -> float:
    q = as_q(q, function_name)
    if q <= 0:
        raise DomainViolation(function_name, q, "q > 0")
    return q


@dataclass(frozen=True)
class StirlingConstants:
    q: float
    delta_q: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", as_q(self.q, "StirlingConstants"))
        object.__setattr__(self, "delta_q", float(self.delta_q))

    @property
    def c_q(self) -> float:
        if _is_two(self.q):
            raise DomainViolation("StirlingConstants.c_q", self.q, "q != 2")
        return 1.0 / (2.0 - self.q) - self.delta_q

    @classmethod
    def classical(cls) -> "StirlingConstants":
        return cls(1.0, CLASSICAL_DELTA)

    @classmethod
    def from_zeta(cls, q: QLike) -> "StirlingConstants":
        q = as_q(q)
        return cls(q, zeta_delta_q(q))


# ── Exact q-log-factorials ────────────────────────────────────────────────────

class QFactorialTable:
    """Prefix sums T[m] = sum_{k=1..m} ln_q k for one q, grown on demand.

    Readers take a snapshot of the current array; growth is serialized and
    swaps in a longer array, so concurrent readers never see partial state.
    """

    BLOCK = 4096

    def __init__(self, q: float) -> None:
        self.q = q
        self._prefix = np.zeros(1)
        self._block_sums: list[float] = []
        self._lock = threading.Lock()

    def prefix(self, n: int) -> np.ndarray:
        table = self._prefix
        if table.size <= n:
            with self._lock:
                table = self._prefix
                if table.size <= n:
                    table = self._grow(table, n)
                    self._prefix = table
        return table

    def _grow(self, table: np.ndarray, n: int) -> np.ndarray:
        start = table.size
        stop = max(n + 1, 2 * start)
        terms = np.atleast_1d(q_ln(self.q, np.arange(start, stop, dtype=float)))
        grown = np.empty(stop)
        grown[:start] = table
        pos = start
        # block offsets are exact sums of block sums; only in-block cumsum rounds
        for block in batched(terms, self.BLOCK):
            offset = math.fsum(self._block_sums)
            grown[pos:pos + len(block)] = offset + np.cumsum(block)
            self._block_sums.append(math.fsum(block))
            pos += len(block)
        grown.setflags(write=False)
        return grown


_TABLES: dict[float, QFactorialTable] = {}
_TABLES_LOCK = threading.Lock()


def factorial_table(q: QLike) -> QFactorialTable:
    q = as_q(q, "factorial_table")
    if is_classical(q):
        q = 1.0
    with _TABLES_LOCK:
        table = _TABLES.get(q)
        if table is None:
            table = _TABLES[q] = QFactorialTable(q)
    return table


def q_ln_factorial(q: QLike, n: int) -> float:
    """ln_q(n!_q) = sum_{k=1..n} ln_q k, exact summation."""
    n = _require_int("q_ln_factorial", "n", n, 1)
    return float(factorial_table(q).prefix(n)[n])


def q_factorial(q: QLike, n: int) -> float:
    """n!_q = 1 (x)_q 2 (x)_q ... (x)_q n, i.e. exp_q of the q-log-factorial.

    Undefined (DomainViolation) once 1 + (1-q) ln_q n!_q <= 0, which happens
    for q > 1 and large enough n.
    """
    q = as_q(q, "q_factorial")
    total = q_ln_factorial(q, n)
    try:
        return float(q_exp(q, total))
    except DomainViolation:
        raise DomainViolation("q_factorial", n, "1 + (1 - q) * ln_q(n!_q) > 0") from None


# ── Stirling formulas ─────────────────────────────────────────────────────────

def q_stirling_rough(q: QLike, n: int) -> float:
    q = _require_positive_q("q_stirling_rough", q)
    n = _require_int("q_stirling_rough", "n", n, 2)
    if _is_two(q):
        return n - math.log(n)
    return (n * float(q_ln(q, n)) - n) / (2.0 - q)


def q_stirling_precise(consts: StirlingConstants, n: int) -> float:
    n = _require_int("q_stirling_precise", "n", n, 2)
    q = consts.q
    if _is_two(q):
        return n - 1.0 / (2.0 * n) - math.log(n) - 0.5 - consts.delta_q
    lead = n / (2.0 - q)
    return (lead + 0.5) * float(q_ln(q, n)) - lead + consts.c_q


def _stirling_residual(q: float, n: int, exact: float) -> float:
    """Exact minus the n-dependent part of the precise formula."""
    if _is_two(q):
        return exact - (n - 1.0 / (2.0 * n) - math.log(n) - 0.5)
    lead = n / (2.0 - q)
    return exact - ((lead + 0.5) * float(q_ln(q, n)) - lead)


def richardson_extrapolate(
        base_values: Sequence[float],
        exponents: Sequence[float],
        r: float = 2.0,
) -> tuple[float, float]:
    """Richardson extrapolation of values sampled at n, r*n, r^2*n, ...

    exponents[j] is the decay order eliminated at step j + 1. Returns the
    extrapolated value and the difference between the last two diagonal
    entries as an error estimate.
    """
    n = len(base_values)
    if n < 2:
        raise ValueError("richardson_extrapolate requires at least two base values.")
    if len(exponents) < n - 1:
        raise ValueError(f"need {n - 1} exponents, got {len(exponents)}")

    vals = [float(v) for v in base_values]
    previous = vals[-1]
    for j in range(1, n):
        factor = r ** exponents[j - 1]
        previous = vals[-1]
        for k in range(n - 1, j - 1, -1):
            vals[k] = (factor * vals[k] - vals[k - 1]) / (factor - 1.0)
    return vals[-1], abs(vals[-1] - previous)


@dataclass(frozen=True)
class DeltaEstimate:
    q: float
    delta_q: float
    error: float
    tolerance: float
    n_schedule: tuple[int, ...]
    residuals: tuple[float, ...]

    def constants(self) -> StirlingConstants:
        return StirlingConstants(self.q, self.delta_q)


def estimate_delta_q(
        q: QLike,
        n_max: int = DEFAULT_N_MAX,
        levels: int = RICHARDSON_LEVELS,
        tol: float = STIRLING_TOLERANCE,
) -> DeltaEstimate:
    """Recover delta_q from exact q-log-factorials up to n_max.

    The residual R(n) = ln_q n!_q - [(n/(2-q) + 1/2) ln_q n - n/(2-q)]
    tends to c_q with corrections n^-q, n^-(q+2), ...; for q = 2 the
    residual against n - 1/(2n) - ln n - 1/2 tends to -delta_2 with
    corrections n^-2, n^-4, .... The top of the schedule is halved (down to
    1000) while the rounding noise of the exact sum there, amplified by the
    extrapolation weights, exceeds tol; the tolerance never goes below that
    noise at the top actually used.
    """
    q = _require_positive_q("estimate_delta_q", q)
    if is_classical(q):
        q = 1.0
    n_max = _require_int("estimate_delta_q", "n_max", n_max, 1000)
    levels = _require_int("estimate_delta_q", "levels", levels, 2)
    return _estimate_delta(q, n_max, levels, float(tol))


@functools.lru_cache(maxsize=None)
def _estimate_delta(q: float, n_max: int, levels: int, tol: float) -> DeltaEstimate:
    if n_max // 2 ** (levels - 1) < 2:
        raise DomainViolation("estimate_delta_q", n_max, f"n_max >= {2 ** levels}")
    if _is_two(q):
        exponents = [2.0 * (j + 1) for j in range(levels - 1)]
    else:
        exponents = [q + 2.0 * j for j in range(levels - 1)]

    table = factorial_table(q).prefix(n_max)
    gain = _richardson_gain(levels, exponents)
    top = n_max
    while top // 2 >= MIN_SCHEDULE_TOP and _noise_floor(table, top, gain) > tol:
        top //= 2
    base = top // 2 ** (levels - 1)
    schedule = tuple(base * 2**j for j in range(levels))
    residuals = tuple(_stirling_residual(q, n, float(table[n])) for n in schedule)

    limit, error = richardson_extrapolate(residuals, exponents)
    tolerance = max(tol, _noise_floor(table, schedule[-1], gain))
    if not math.isfinite(limit) or error > tolerance:
        raise StirlingConvergenceError(q, limit, error, tolerance)

    delta = -limit if _is_two(q) else 1.0 / (2.0 - q) - limit
    return DeltaEstimate(q, delta, error, tolerance, schedule, residuals)


def _richardson_gain(levels: int, exponents: Sequence[float]) -> float:
    """Sum of |weights| the tableau puts on its inputs, i.e. its noise gain."""
    unit = np.eye(levels)
    return math.fsum(abs(richardson_extrapolate(row.tolist(), exponents)[0]) for row in unit)


def _noise_floor(table: np.ndarray, n: int, gain: float) -> float:
    # rounding of the prefix sum at n, carried through the extrapolation
    return gain * NOISE_FLOOR_ULPS * np.finfo(float).eps * abs(float(table[n]))


def zeta_delta_q(q: QLike) -> float:
    """Closed form delta_q = 1/(2-q) - (zeta(q-1) + 1/2)/(1-q), q > 0.

    Limits: 1 - ln sqrt(2 pi) at q = 1, Euler's gamma - 1/2 at q = 2.
    """
    q = _require_positive_q("zeta_delta_q", q)
    if is_classical(q):
        return CLASSICAL_DELTA
    if _is_two(q):
        return float(np.euler_gamma) - 0.5
    c_q = (float(special.zeta(q - 1.0)) + 0.5) / (1.0 - q)
    return 1.0 / (2.0 - q) - c_q


# ── Multinomial coefficients and entropy ──────────────────────────────────────

def q_ln_multinomial_coeff(q: QLike, counts: CountLike) -> float:
    """ln_q of the q-multinomial coefficient: T[n] - sum_i T[n_i]."""
    counts = as_count_vector(counts)
    table = factorial_table(q).prefix(counts.n)
    return math.fsum([float(table[counts.n])] + [-float(table[c]) for c in counts.counts])


def tsallis_entropy(q: QLike, p: ProbabilityLike) -> float:
    """S_q(p) = (1 - sum p_i^q)/(q - 1), Shannon entropy at q = 1.

    Evaluated as sum p_i ln_q(1/p_i) over the live atoms.
    """
    q = _require_positive_q("tsallis_entropy", q)
    weights = as_probability_vector(p).weights
    live = weights[weights > 0]
    return math.fsum((live * np.atleast_1d(q_ln(q, 1.0 / live))).tolist())


def approx_ln_multinomial_via_entropy(q: QLike, counts: CountLike) -> float:
    q = _require_positive_q("approx_ln_multinomial_via_entropy", q)
    counts = as_count_vector(counts)
    n = counts.n
    if _is_two(q):
        return -math.log(n) + math.fsum(math.log(c) for c in counts.counts if c >= 1)
    return n ** (2.0 - q) / (2.0 - q) * tsallis_entropy(2.0 - q, counts.proportions())


def q_ln_binomial_coeff_approx(consts: StirlingConstants, n: int, k: int) -> float:
    """Precise-Stirling approximation of ln_q of the q-binomial coefficient."""
    n = _require_int("q_ln_binomial_coeff_approx", "n", n, 2)
    k = _require_int("q_ln_binomial_coeff_approx", "k", k, 1)
    if k > n - 1:
        raise DomainViolation("q_ln_binomial_coeff_approx", k, f"1 <= k <= n - 1 = {n - 1}")
    q = consts.q
    half_log = 0.5 * (float(q_ln(q, n)) - float(q_ln(q, k)) - float(q_ln(q, n - k)))
    entropy = tsallis_entropy(2.0 - q, (k / n, 1.0 - k / n))
    return -consts.c_q + half_log + n ** (2.0 - q) / (2.0 - q) * entropy


def main() -> None:
    parser = argparse.ArgumentParser(description="Estimate delta_q and compare Stirling formulas")
    parser.add_argument("--q", type=float, required=True)
    parser.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)
    args = parser.parse_args()

    tlog(f"Summing ln_q k up to {args.n_max:,} for q={args.q}")
    estimate = estimate_delta_q(args.q, args.n_max)
    tlog(f"delta_q = {estimate.delta_q!r} ± {estimate.error:.2e} (zeta reference {zeta_delta_q(args.q)!r})")
    consts = estimate.constants()
    for n in (10, 100, 1000, 10000):
        exact = q_ln_factorial(args.q, n)
        print(f"n={n:>6}  exact={exact:.10g}  rough={q_stirling_rough(args.q, n):.10g}  "
              f"precise={q_stirling_precise(consts, n):.10g}")


if __name__ == "__main__":
    main()
