"""q-binomial and small q-multinomial distributions.

The q-log of each mass is the exact q-multinomial coefficient plus deformed
success/failure terms plus a scaling constant C_q. C_q is the root of
sum_k exp_q(s_k + C) = 1, found by scipy.optimize.brentq on a closed-form
bracket that always exists, then polished by one Newton step. Masses are
also kept as q-logs and natural logs so tails far below double-precision
underflow stay exact.

Usage:
  python -m qldp.qdist --q 1.5 --n 10 --r 0.5
"""

from __future__ import annotations

import argparse
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize, special

from .common import (
    CLASSICAL_SUM_TOLERANCE,
    ENUMERATION_LIMIT,
    FLOOR_GUARD,
    SOLVER_MAX_ITER,
    SOLVER_TOLERANCE,
    SOLVER_XTOL,
)
from .qcomb import factorial_table, q_ln_multinomial_coeff
from .qcore import (
    DeformationParameter,
    DomainViolation,
    QLike,
    as_q,
    is_classical,
    log_q_exp,
    q_ln,
)
from .vectors import CountLike, ProbabilityLike, as_count_vector, as_probability_vector


class NormalizationError(RuntimeError):
    """The C_q root finder could not satisfy its contract."""

    def __init__(self, message: str, *, spec: object = None, state: Optional[dict] = None) -> None:
        self.spec = spec
        self.state = state or {}
        super().__init__(message)


@dataclass(frozen=True)
class QBinomialSpec:
    q: float
    n: int
    r: float

    def __post_init__(self) -> None:
        q = DeformationParameter(as_q(self.q, "QBinomialSpec")).require_ldp_window("QBinomialSpec").q
        if isinstance(self.n, (bool, np.bool_)) or int(self.n) != self.n or self.n < 1:
            raise DomainViolation("QBinomialSpec", self.n, "integer n >= 1")
        r = float(self.r)
        if not 0.0 < r < 1.0:
            raise DomainViolation("QBinomialSpec", self.r, "0 < r < 1")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "r", r)

    def mirrored(self) -> "QBinomialSpec":
        return QBinomialSpec(self.q, self.n, 1.0 - self.r)


@dataclass(frozen=True)
class SolverReport:
    iterations: int
    newton_steps: int
    residual: float
    bracket: tuple[float, float]
    method: str
    cutoff_count: int
    scaling: float


@dataclass(frozen=True, eq=False)
class QBinomialPmf:
    spec: QBinomialSpec
    probabilities: np.ndarray
    c_q: float
    solver_report: SolverReport
    log_q_mass: np.ndarray = field(repr=False)
    log_mass: np.ndarray = field(repr=False)

    @property
    def q(self) -> float:
        return self.spec.q

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def r(self) -> float:
        return self.spec.r

    @property
    def cut_off(self) -> np.ndarray:
        return np.isneginf(self.log_mass)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probabilities)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.n + 1), self.probabilities))

    def mode(self) -> int:
        return int(np.argmax(self.log_mass))


# ── Unnormalized q-log masses ─────────────────────────────────────────────────

def _deformed_rate_terms(q: float, counts: np.ndarray, rates: np.ndarray) -> np.ndarray:
    """(1/(2-q)) * sum_i n_i^(2-q) ln_{2-q} r_i along the last axis; 0^(2-q) = 0."""
    dual = 2.0 - q
    return (np.power(counts, dual) * np.atleast_1d(q_ln(dual, rates))).sum(axis=-1) / dual


def _binomial_log_q_masses(spec: QBinomialSpec) -> tuple[np.ndarray, float]:
    """All s_k for k = 0..n, plus ln_q n!_q as the rounding scale of the sums."""
    n = spec.n
    table = factorial_table(spec.q).prefix(n)
    ks = np.arange(n + 1)
    coeff = table[n] - table[ks] - table[n - ks]
    counts = np.stack([ks, n - ks], axis=-1).astype(float)
    s = coeff + _deformed_rate_terms(spec.q, counts, np.array([spec.r, 1.0 - spec.r]))
    return s, abs(float(table[n]))


def ln_q_pmf_unnormalized(spec: QBinomialSpec, k: int) -> float:
    """s_k: exact ln_q binomial coefficient plus the deformed rate terms."""
    if isinstance(k, (bool, np.bool_)) or int(k) != k or not 0 <= k <= spec.n:
        raise DomainViolation("ln_q_pmf_unnormalized", k, f"integer 0 <= k <= n = {spec.n}")
    k = int(k)
    coeff = q_ln_multinomial_coeff(spec.q, (k, spec.n - k))
    rates = _deformed_rate_terms(spec.q, np.array([k, spec.n - k], dtype=float), np.array([spec.r, 1.0 - spec.r]))
    return coeff + float(rates)


# ── Normalization ─────────────────────────────────────────────────────────────

def _mass_sum(q: float, s: np.ndarray, c: float) -> tuple[float, float]:
    """sum_k exp_q(s_k + c) - 1 and its derivative sum_k exp_q(s_k + c)^q."""
    log_b = np.atleast_1d(log_q_exp(q, s + c, cutoff=True))
    with np.errstate(over="ignore"):
        return float(np.exp(log_b).sum()) - 1.0, float(np.exp(q * log_b).sum())


def _default_bracket(q: float, s: np.ndarray) -> tuple[float, float]:
    # every term <= 1/(2 len) at lo; the largest term equals 1 at hi
    top = float(s.max())
    return float(q_ln(q, 0.5 / s.size)) - top, -top


def _solve_constant(
        q: float,
        s: np.ndarray,
        *,
        bracket: Optional[tuple[float, float]] = None,
        tol: float = SOLVER_TOLERANCE,
        max_iter: int = SOLVER_MAX_ITER,
        spec: object = None,
        scale: float = 0.0,
) -> tuple[float, SolverReport]:
    if is_classical(q):
        return _classical_constant(s, scale, spec)

    lo, hi = _default_bracket(q, s) if bracket is None else (float(bracket[0]), float(bracket[1]))
    if q > 1.0:
        ceiling = 1.0 / (q - 1.0) - float(s.max())
        if not hi < ceiling:
            raise NormalizationError(f"bracket top {hi!r} outside feasible C < {ceiling!r}", spec=spec)
    f_lo, _ = _mass_sum(q, s, lo)
    f_hi, _ = _mass_sum(q, s, hi)
    if f_lo > 0 or f_hi < 0:
        raise NormalizationError(
            f"no sign change on [{lo!r}, {hi!r}]: f = ({f_lo!r}, {f_hi!r})",
            spec=spec, state={"bracket": (lo, hi)},
        )

    c, info = optimize.brentq(
        lambda value: _mass_sum(q, s, value)[0],
        lo, hi,
        xtol=SOLVER_XTOL,
        maxiter=max_iter,
        full_output=True,
        disp=False,
    )
    if not info.converged:
        raise NormalizationError(
            f"brentq stopped after {info.iterations} iterations ({info.flag})",
            spec=spec, state={"bracket": (lo, hi), "c": c},
        )

    # brentq stops on the C interval; one Newton step brings sum(b) - 1 down to rounding
    f, df = _mass_sum(q, s, c)
    newton_steps = 0
    if f != 0.0 and df > 0:
        polished = c - f / df
        if lo <= polished <= hi:
            f_polished, _ = _mass_sum(q, s, polished)
            if abs(f_polished) < abs(f):
                c, f, newton_steps = polished, f_polished, 1
    if not abs(f) <= 10.0 * tol:
        raise NormalizationError(
            f"C={c!r} leaves residual {f!r} after {info.iterations} iterations",
            spec=spec, state={"bracket": (lo, hi), "iterations": info.iterations},
        )
    return _solved(q, s, c, f, info.iterations, newton_steps, (lo, hi))


def _solved(
        q: float,
        s: np.ndarray,
        c: float,
        residual: float,
        iterations: int,
        newton_steps: int,
        bracket: tuple[float, float],
) -> tuple[float, SolverReport]:
    cutoff_count = int(np.count_nonzero(~(1.0 + (1.0 - q) * (s + c) > 0))) if q < 1.0 else 0
    report = SolverReport(
        iterations=iterations,
        newton_steps=newton_steps,
        residual=abs(residual),
        bracket=bracket,
        method="brentq",
        cutoff_count=cutoff_count,
        scaling=1.0 + (1.0 - q) * c,
    )
    return c, report


def _classical_constant(s: np.ndarray, scale: float, spec: object) -> tuple[float, SolverReport]:
    # C_1 = 0; the identity sum e^{s_k} = 1 is checked to the resolution of ln n!
    total = float(special.logsumexp(s))
    tolerance = max(CLASSICAL_SUM_TOLERANCE, 16.0 * np.finfo(float).eps * scale)
    residual = abs(math.expm1(total))
    if residual > tolerance:
        raise NormalizationError(
            f"classical masses sum to exp({total!r}), not 1", spec=spec, state={"residual": residual},
        )
    return 0.0, SolverReport(0, 0, residual, (0.0, 0.0), "classical", 0, 1.0)


def solve_normalization(
        spec: QBinomialSpec,
        *,
        bracket: Optional[tuple[float, float]] = None,
        tol: float = SOLVER_TOLERANCE,
) -> float:
    """C_q with sum_k exp_q_cutoff(s_k + C_q) = 1."""
    s, scale = _binomial_log_q_masses(spec)
    c, _ = _solve_constant(spec.q, s, bracket=bracket, tol=tol, spec=spec, scale=scale)
    return c


def _materialize(q: float, s: np.ndarray, c: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    log_q_mass = s + c
    log_mass = np.atleast_1d(log_q_exp(q, log_q_mass, cutoff=True))
    return np.exp(log_mass), log_q_mass, log_mass


def pmf(spec: QBinomialSpec, *, bracket: Optional[tuple[float, float]] = None) -> QBinomialPmf:
    s, scale = _binomial_log_q_masses(spec)
    c, report = _solve_constant(spec.q, s, bracket=bracket, spec=spec, scale=scale)
    probabilities, log_q_mass, log_mass = _materialize(spec.q, s, c)
    for values in (probabilities, log_q_mass, log_mass):
        values.setflags(write=False)
    return QBinomialPmf(spec, probabilities, c, report, log_q_mass, log_mass)


def floor_nx(n: int, x: float) -> int:
    """floor(n * x), never below an integer that n * x rounds just short of."""
    return int(math.floor(n * x * (1.0 + FLOOR_GUARD)))


def cdf_below(pmfv: QBinomialPmf, x: float) -> float:
    """P(mean < x) as sum_{k=0..floor(nx)} b_q(k)."""
    if not 0.0 < x < 1.0:
        raise DomainViolation("cdf_below", x, "0 < x < 1")
    m = min(floor_nx(pmfv.n, x), pmfv.n)
    return math.fsum(pmfv.probabilities[: m + 1].tolist())


def sample(pmfv: QBinomialPmf, seed: int, m: int) -> np.ndarray:
    """m inverse-CDF draws from a seeded numpy Generator."""
    if isinstance(m, (bool, np.bool_)) or int(m) != m or m < 1:
        raise DomainViolation("sample", m, "integer m >= 1")
    rng = np.random.default_rng(seed)
    cdf = pmfv.cdf()
    cdf = cdf / cdf[-1]
    draws = np.searchsorted(cdf, rng.random(int(m)), side="right")
    last_live = int(np.flatnonzero(pmfv.probabilities > 0)[-1])
    return np.minimum(draws, last_live)


# ── Multinomial ───────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class QMultinomialPmf:
    q: float
    n: int
    rates: tuple[float, ...]
    compositions: tuple[tuple[int, ...], ...]
    probabilities: np.ndarray
    c_q: float
    solver_report: SolverReport

    def as_map(self) -> dict[tuple[int, ...], float]:
        return dict(zip(self.compositions, self.probabilities.tolist()))


def _validated_rates(function_name: str, rates: ProbabilityLike) -> np.ndarray:
    weights = as_probability_vector(rates).weights
    if np.any(weights <= 0):
        raise DomainViolation(function_name, weights.tolist(), "every rate r_i > 0")
    return weights


def q_multinomial_ln_pmf_unnormalized(q: QLike, counts: CountLike, rates: ProbabilityLike) -> float:
    q = DeformationParameter(as_q(q)).require_ldp_window("q_multinomial_ln_pmf_unnormalized").q
    counts = as_count_vector(counts)
    weights = _validated_rates("q_multinomial_ln_pmf_unnormalized", rates)
    if weights.size != counts.k:
        raise DomainViolation("q_multinomial_ln_pmf_unnormalized", weights.size, f"{counts.k} rates")
    rate_terms = _deformed_rate_terms(q, np.asarray(counts.counts, dtype=float), weights)
    return q_ln_multinomial_coeff(q, counts) + float(rate_terms)


def compositions(n: int, k: int) -> np.ndarray:
    """All k-part compositions of n, in stars-and-bars order."""
    rows = []
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        edges = (-1,) + bars + (n + k - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(k)])
    return np.array(rows, dtype=int).reshape(-1, k)


def q_multinomial_pmf_small(q: QLike, n: int, rates: ProbabilityLike) -> QMultinomialPmf:
    q = DeformationParameter(as_q(q)).require_ldp_window("q_multinomial_pmf_small").q
    if isinstance(n, (bool, np.bool_)) or int(n) != n or n < 1:
        raise DomainViolation("q_multinomial_pmf_small", n, "integer n >= 1")
    n = int(n)
    weights = _validated_rates("q_multinomial_pmf_small", rates)
    k = weights.size
    size = math.comb(n + k - 1, k - 1)
    if size > ENUMERATION_LIMIT:
        raise DomainViolation("q_multinomial_pmf_small", size, f"at most {ENUMERATION_LIMIT:,} compositions")

    grid = compositions(n, k)
    table = factorial_table(q).prefix(n)
    s = table[n] - table[grid].sum(axis=1) + _deformed_rate_terms(q, grid.astype(float), weights)
    c, report = _solve_constant(q, s, scale=abs(float(table[n])))
    probabilities, _, _ = _materialize(q, s, c)
    probabilities.setflags(write=False)
    return QMultinomialPmf(
        q=q,
        n=n,
        rates=tuple(weights.tolist()),
        compositions=tuple(tuple(row) for row in grid.tolist()),
        probabilities=probabilities,
        c_q=c,
        solver_report=report,
    )


def main() -> None:
    parser = argparse.ArgumentParser(description="Materialize a q-binomial pmf")
    parser.add_argument("--q", type=float, required=True)
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--r", type=float, default=0.5)
    args = parser.parse_args()

    result = pmf(QBinomialSpec(args.q, args.n, args.r))
    print(f"C_q = {result.c_q!r}  ({result.solver_report})")
    for k, probability in enumerate(result.probabilities):
        print(f"{k},{probability!r}")


if __name__ == "__main__":
    main()
