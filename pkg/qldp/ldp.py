"""Large-deviation harness for the q-binomial law.

For 0 < x < r the tail P(mean < x) = sum_{k <= floor(nx)} b_q(k) is compared
against the rate function (1/(2-q)) D_{2-q}(x || r) through the empirical
q-rate -(1/n^(2-q)) ln_q P. The tail is sandwiched between b_q(floor(nx)) and
(floor(nx) + 1) b_q(floor(nx)), and the sandwich is pushed through ln_q per
case (q = 1, q < 1, q > 1). All of it runs on log masses, so tails far below
double-precision underflow are still measured.

Usage:
  python -m qldp.ldp --q 0.5 1 1.5 --n 100 1000 10000 --r 0.5 --x 0.3
"""

from __future__ import annotations

import argparse
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from .common import DEFAULT_N_GRID, DEFAULT_Q_GRID, DEFAULT_R, DEFAULT_X, tlog
from .qcore import DeformationParameter, DomainViolation, QLike, as_q, is_classical, q_ln, q_ln_from_log
from .qdist import NormalizationError, QBinomialPmf, QBinomialSpec, floor_nx, pmf
from .qdiv import q_divergence
from .vectors import ProbabilityVector

# below this |t| the gap t^2/2 between expm1(t) and t is under double resolution
_RESOLVABLE = 1e-12
_LOG_SLACK = 1e-12


class TailCutoffError(RuntimeError):
    """Every mass up to floor(nx) is zero, so the tail has no logarithm."""

    def __init__(self, q: float, n: int, x: float) -> None:
        self.q = q
        self.n = n
        self.x = x
        super().__init__(f"tail P(mean < {x!r}) is exactly 0 at q={q!r}, n={n} (all terms cut off)")


def _require_x(function_name: str, x: float, upper: float = 1.0, label: str = "0 < x < 1") -> float:
    x = float(x)
    if not 0.0 < x < upper:
        raise DomainViolation(function_name, x, label)
    return x


def _m(pmfv: QBinomialPmf, x: float) -> int:
    return min(floor_nx(pmfv.n, x), pmfv.n)


# ── Rates ─────────────────────────────────────────────────────────────────────

def rate_function(q: QLike, x: float, r: float) -> float:
    """(1/(2-q)) D_{2-q}((x, 1-x) || (r, 1-r))."""
    q = DeformationParameter(as_q(q, "rate_function")).require_ldp_window("rate_function").q
    x = _require_x("rate_function", x)
    r = _require_x("rate_function", r, label="0 < r < 1")
    dual = 2.0 - q
    return q_divergence(dual, ProbabilityVector.binary(x), ProbabilityVector.binary(r)) / dual


def tail_log(pmfv: QBinomialPmf, x: float) -> float:
    """ln P(mean < x), summed as logsumexp over the stored log masses."""
    x = _require_x("tail_log", x)
    head = pmfv.log_mass[: _m(pmfv, x) + 1]
    if np.all(np.isneginf(head)):
        raise TailCutoffError(pmfv.q, pmfv.n, x)
    return float(logsumexp(head))


def empirical_rate(pmfv: QBinomialPmf, x: float) -> float:
    """-(1/n^(2-q)) ln_q P(mean < x)."""
    return -float(q_ln_from_log(pmfv.q, tail_log(pmfv, x))) / pmfv.n ** (2.0 - pmfv.q)


# ── Sandwich ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SandwichBounds:
    m: int
    lower: float
    upper: float
    log_lower: float
    log_upper: float
    monotone_ok: bool

    def contains(self, log_tail: float) -> bool:
        return self.log_lower <= log_tail + _LOG_SLACK and log_tail <= self.log_upper + _LOG_SLACK


def bounds(pmfv: QBinomialPmf, x: float) -> SandwichBounds:
    """b_q(m) <= P <= (m + 1) b_q(m) with m = floor(nx).

    The upper bound needs b_q(0..m) non-decreasing; that is checked on the
    log masses and reported as monotone_ok.
    """
    x = _require_x("bounds", x, pmfv.r, "0 < x < r")
    m = _m(pmfv, x)
    head = pmfv.log_mass[: m + 1]
    log_lower = float(head[m])
    log_upper = math.log(m + 1) + log_lower
    return SandwichBounds(
        m=m,
        lower=float(pmfv.probabilities[m]),
        upper=(m + 1) * float(pmfv.probabilities[m]),
        log_lower=log_lower,
        log_upper=log_upper,
        monotone_ok=bool(np.all(head[1:] >= head[:-1])),
    )


@dataclass(frozen=True)
class RateBounds:
    case: str
    upper_rate_bound: float
    lower_rate_bound: float
    discarded_term: float
    proof_inequalities_ok: Optional[bool]


def _expm1_exceeds(t: float) -> bool:
    """expm1(t) > t, the common form of ln_q a < ln a (q > 1) and ln a < a - 1."""
    gap = math.expm1(t)
    return gap >= t if abs(t) < _RESOLVABLE else gap > t


def _case(q: float) -> str:
    if is_classical(q):
        return "classical"
    return "sub" if q < 1.0 else "super"


def three_case_rate_bounds(pmfv: QBinomialPmf, x: float, log_tail: Optional[float] = None) -> RateBounds:
    """The sandwich pushed through (1/n^(2-q)) ln_q, so that
    lower_rate_bound <= -empirical_rate <= upper_rate_bound.

    discarded_term is (1/n^(2-q)) ln_q(m + 1), the piece dropped when the
    upper bound is reduced to ln_q b_q(m). For q > 1 the two inequalities
    ln_q a < ln a and ln a < a - 1 are checked at each a in (0, 1) that was
    evaluated (b_q(m) and the tail).
    """
    q = pmfv.q
    sandwich = bounds(pmfv, x)
    scale = pmfv.n ** (2.0 - q)
    lower_rate = float(q_ln_from_log(q, sandwich.log_lower)) / scale
    upper_rate = float(q_ln_from_log(q, sandwich.log_upper)) / scale
    discarded = float(q_ln(q, sandwich.m + 1)) / scale

    checks: Optional[bool] = None
    if q > 1.0 and not is_classical(q):
        used = [sandwich.log_lower] + ([] if log_tail is None else [log_tail])
        used = [value for value in used if -math.inf < value < 0.0]
        checks = all(_expm1_exceeds((1.0 - q) * value) and _expm1_exceeds(value) for value in used)
    return RateBounds(_case(q), upper_rate, lower_rate, discarded, checks)


# ── Scan ──────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class RateScanRow:
    q: float
    n: int
    r: float
    x: float
    tail: float = math.nan
    log_tail: float = math.nan
    empirical_rate: float = math.nan
    theoretical_rate: float = math.nan
    gap: float = math.nan
    upper_bound_value: float = math.nan
    lower_bound_value: float = math.nan
    monotone_precondition_ok: bool = False
    sandwich_ok: Optional[bool] = None
    upper_rate_bound: float = math.nan
    lower_rate_bound: float = math.nan
    proof_inequalities_ok: Optional[bool] = None
    c_q: float = math.nan
    scaled_c_q: float = math.nan
    error: Optional[str] = None


SCAN_COLUMNS = [f.name for f in fields(RateScanRow)]


def _scan_row(q: float, n: int, r: float, x: float) -> RateScanRow:
    theoretical = rate_function(q, x, r)
    try:
        pmfv = pmf(QBinomialSpec(q, n, r))
    except NormalizationError as exc:
        return RateScanRow(q, n, r, x, theoretical_rate=theoretical, error=f"{type(exc).__name__}: {exc}")

    sandwich = bounds(pmfv, x)
    partial = dict(
        theoretical_rate=theoretical,
        upper_bound_value=sandwich.upper,
        lower_bound_value=sandwich.lower,
        monotone_precondition_ok=sandwich.monotone_ok,
        c_q=pmfv.c_q,
        scaled_c_q=pmfv.c_q / n ** (2.0 - q),
    )
    try:
        log_tail = tail_log(pmfv, x)
    except TailCutoffError as exc:
        return RateScanRow(q, n, r, x, tail=0.0, log_tail=-math.inf, error=f"{type(exc).__name__}: {exc}", **partial)

    empirical = -float(q_ln_from_log(q, log_tail)) / n ** (2.0 - q)
    rates = three_case_rate_bounds(pmfv, x, log_tail)
    return RateScanRow(
        q, n, r, x,
        tail=math.exp(log_tail),
        log_tail=log_tail,
        empirical_rate=empirical,
        gap=abs(empirical - theoretical),
        sandwich_ok=sandwich.contains(log_tail),
        upper_rate_bound=rates.upper_rate_bound,
        lower_rate_bound=rates.lower_rate_bound,
        proof_inequalities_ok=rates.proof_inequalities_ok,
        **partial,
    )


def ldp_scan(
        q_list: Sequence[float],
        n_list: Sequence[int],
        r: float,
        x: float,
        workers: int = 1,
        verbose: bool = False,
) -> list[RateScanRow]:
    """One row per (q, n), q-major, in the order given.

    Rows are computed on a thread pool; solver and cutoff failures are kept
    in the row's error column.
    """
    if not q_list or not n_list:
        raise DomainViolation("ldp_scan", (list(q_list), list(n_list)), "non-empty q and n grids")
    qs = [DeformationParameter(as_q(q, "ldp_scan")).require_ldp_window("ldp_scan").q for q in q_list]
    ns = []
    for n in n_list:
        if isinstance(n, (bool, np.bool_)) or int(n) != n or n < 1:
            raise DomainViolation("ldp_scan", n, "integer n >= 1")
        ns.append(int(n))
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainViolation("ldp_scan", ns, "ascending n grid")
    r = _require_x("ldp_scan", r, label="0 < r < 1")
    x = _require_x("ldp_scan", x, r, "0 < x < r")

    grid = [(q, n) for q in qs for n in ns]

    def run(cell: tuple[float, int]) -> RateScanRow:
        row = _scan_row(cell[0], cell[1], r, x)
        if verbose:
            status = row.error or f"rate={row.empirical_rate:.6g} gap={row.gap:.3g}"
            tlog(f"ldp q={row.q:g} n={row.n}: {status}")
        return row

    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as executor:
        return list(executor.map(run, grid))


def scan_frame(rows: Sequence[RateScanRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(row) for row in rows], columns=SCAN_COLUMNS)


def main() -> None:
    parser = argparse.ArgumentParser(description="Scan empirical q-rates against the rate function")
    parser.add_argument("--q", type=float, nargs="+", default=list(DEFAULT_Q_GRID))
    parser.add_argument("--n", type=int, nargs="+", default=list(DEFAULT_N_GRID))
    parser.add_argument("--r", type=float, default=DEFAULT_R)
    parser.add_argument("--x", type=float, default=DEFAULT_X)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    rows = ldp_scan(args.q, args.n, args.r, args.x, workers=args.workers, verbose=True)
    print(scan_frame(rows).to_string(index=False))


if __name__ == "__main__":
    main()
