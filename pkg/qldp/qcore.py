"""Deformed elementary functions of Tsallis statistics.

q-logarithm, q-exponential (strict and cutoff), q-product and q-ratio, all
domain-checked and numpy-vectorised. Scalars in give floats out; arrays in
give arrays out.

Usage:
  python -m qldp.qcore --q 0.5 --x 4
"""

from __future__ import annotations

import argparse
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .common import Q_ONE_WINDOW

ArrayLike = Union[float, int, np.ndarray, list, tuple]


class DomainViolation(ValueError):
    """A documented domain inequality failed."""

    def __init__(self, function_name: str, offending_value: object, constraint: str) -> None:
        self.function_name = function_name
        self.offending_value = offending_value
        self.constraint = constraint
        super().__init__(f"{function_name}: requires {constraint}, got {offending_value!r}")


@dataclass(frozen=True)
class DeformationParameter:
    q: float

    def __post_init__(self) -> None:
        value = float(self.q)
        if not math.isfinite(value):
            raise DomainViolation("DeformationParameter", self.q, "finite q")
        object.__setattr__(self, "q", value)

    def __float__(self) -> float:
        return self.q

    @property
    def is_classical(self) -> bool:
        return is_classical(self.q)

    @property
    def dual(self) -> "DeformationParameter":
        return DeformationParameter(2.0 - self.q)

    def require_ldp_window(self, function_name: str) -> "DeformationParameter":
        if not 0.0 < self.q < 2.0:
            raise DomainViolation(function_name, self.q, "0 < q < 2")
        return self


QLike = Union[float, int, DeformationParameter]


def as_q(q: QLike, function_name: str = "q") -> float:
    """Return q as a validated finite float."""
    if isinstance(q, DeformationParameter):
        return q.q
    value = float(q)
    if not math.isfinite(value):
        raise DomainViolation(function_name, q, "finite q")
    return value


def is_classical(q: float) -> bool:
    return abs(float(q) - 1.0) < Q_ONE_WINDOW


def _finish(values: np.ndarray) -> float | np.ndarray:
    if values.ndim == 0:
        return float(values)
    return values


def _first(values: np.ndarray, mask: np.ndarray) -> float:
    return float(np.atleast_1d(values)[np.atleast_1d(mask)][0])


# ── q-logarithm ───────────────────────────────────────────────────────────────

def q_ln(q: QLike, x: ArrayLike) -> float | np.ndarray:
    """ln_q x = (x^(1-q) - 1)/(1 - q), ln x at q = 1."""
    q = as_q(q, "q_ln")
    x = np.asarray(x, dtype=float)
    bad = ~(x > 0)
    if np.any(bad):
        raise DomainViolation("q_ln", _first(x, bad), "x > 0")
    return _finish(_q_ln_of_log(q, np.log(x)))


def q_ln_from_log(q: QLike, log_x: ArrayLike) -> float | np.ndarray:
    """ln_q x given ln x; -inf maps to ln_q 0 (-1/(1-q) for q < 1, else -inf)."""
    q = as_q(q, "q_ln_from_log")
    log_x = np.asarray(log_x, dtype=float)
    if np.any(np.isnan(log_x)) or np.any(log_x == np.inf):
        raise DomainViolation("q_ln_from_log", _first(log_x, ~(log_x < np.inf)), "log_x < +inf")
    return _finish(_q_ln_of_log(q, log_x))


def _q_ln_of_log(q: float, log_x: np.ndarray) -> np.ndarray:
    if is_classical(q):
        return log_x.copy()
    s = 1.0 - q
    with np.errstate(over="ignore"):
        return np.expm1(s * log_x) / s


# ── q-exponential ─────────────────────────────────────────────────────────────

def log_q_exp(q: QLike, x: ArrayLike, cutoff: bool = False) -> float | np.ndarray:
    """Natural log of exp_q x = log1p((1-q)x)/(1-q).

    With cutoff=True, points outside the domain give -inf when q < 1.
    """
    q = as_q(q, "log_q_exp")
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise DomainViolation("log_q_exp", _first(x, np.isnan(x)), "x not NaN")
    return _finish(_log_q_exp(q, x, cutoff, "log_q_exp"))


def _log_q_exp(q: float, x: np.ndarray, cutoff: bool, function_name: str) -> np.ndarray:
    if is_classical(q):
        return x.copy()
    s = 1.0 - q
    dead = ~(1.0 + s * x > 0)
    if np.any(dead) and not (cutoff and q < 1.0):
        raise DomainViolation(function_name, _first(x, dead), "1 + (1 - q) * x > 0")
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(dead, -np.inf, np.log1p(s * x) / s)


def q_exp(q: QLike, x: ArrayLike) -> float | np.ndarray:
    """exp_q x = [1 + (1-q)x]^(1/(1-q)), strict on the domain 1 + (1-q)x > 0.

    Values beyond the double range come back as inf, as np.exp does; use
    log_q_exp to stay in log space.
    """
    q = as_q(q, "q_exp")
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return _finish(np.exp(_log_q_exp(q, x, False, "q_exp")))


def q_exp_cutoff(q: QLike, x: ArrayLike) -> float | np.ndarray:
    """exp_q with the cutoff convention: 0 outside the domain when q < 1.

    For q > 1 the function diverges at the boundary, so leaving the domain
    is still an error. Overflow gives inf, as in q_exp.
    """
    q = as_q(q, "q_exp_cutoff")
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return _finish(np.exp(_log_q_exp(q, x, True, "q_exp_cutoff")))


# ── q-product / q-ratio ───────────────────────────────────────────────────────

def q_product(q: QLike, x: ArrayLike, y: ArrayLike) -> float | np.ndarray:
    """x (x)_q y = [x^(1-q) + y^(1-q) - 1]^(1/(1-q)), x * y at q = 1; inf on overflow."""
    q = as_q(q, "q_product")
    lx, ly = _positive_logs("q_product", x, y)
    with np.errstate(over="ignore"):
        if is_classical(q):
            return _finish(np.exp(lx + ly))
        z = _q_ln_of_log(q, lx) + _q_ln_of_log(q, ly)
        return _finish(np.exp(_log_q_exp(q, z, False, "q_product")))


def q_ratio(q: QLike, x: ArrayLike, y: ArrayLike) -> float | np.ndarray:
    """x (/)_q y = [x^(1-q) - y^(1-q) + 1]^(1/(1-q)), x / y at q = 1."""
    q = as_q(q, "q_ratio")
    lx, ly = _positive_logs("q_ratio", x, y)
    if is_classical(q):
        return _finish(np.exp(lx - ly))
    z = _q_ln_of_log(q, lx) - _q_ln_of_log(q, ly)
    with np.errstate(over="ignore"):
        return _finish(np.exp(_log_q_exp(q, z, False, "q_ratio")))


def _positive_logs(function_name: str, x: ArrayLike, y: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    for values in (x, y):
        bad = ~(values > 0)
        if np.any(bad):
            raise DomainViolation(function_name, _first(values, bad), "x > 0 and y > 0")
    return np.log(x), np.log(y)


def main() -> None:
    parser = argparse.ArgumentParser(description="Evaluate the deformed elementary functions")
    parser.add_argument("--q", type=float, required=True)
    parser.add_argument("--x", type=float, required=True)
    parser.add_argument("--y", type=float, default=None)
    args = parser.parse_args()

    print(f"q_ln({args.q}, {args.x}) = {q_ln(args.q, args.x)!r}")
    print(f"q_exp_cutoff({args.q}, {args.x}) = {q_exp_cutoff(args.q, args.x)!r}")
    if args.y is not None:
        print(f"q_product = {q_product(args.q, args.x, args.y)!r}")
        print(f"q_ratio   = {q_ratio(args.q, args.x, args.y)!r}")


if __name__ == "__main__":
    main()
