"""q-divergence, KL divergence and alpha-divergence, plus the correspondence
between the q-binomial/multinomial laws and the dual q-divergence.

Every divergence is summed from termwise non-negative kernels, e.g.
p_i * [(rho_i - 1) - ln_q rho_i] with rho_i = r_i / p_i, which equals the
textbook (1 - sum p^q r^(1-q))/(1 - q) on the simplex and stays accurate
when p is close to r.

Usage:
  python -m qldp.qdiv --q 0.5 --p 0.5 0.5 --r 0.25 0.75
"""

from __future__ import annotations

import argparse
import math

import numpy as np
from scipy import special

from .common import ALPHA_ONE_WINDOW
from .qcore import DeformationParameter, DomainViolation, QLike, as_q, is_classical, q_ln
from .qdist import (
    QBinomialPmf,
    QBinomialSpec,
    QMultinomialPmf,
    ln_q_pmf_unnormalized,
    q_multinomial_ln_pmf_unnormalized,
)
from .vectors import CountLike, ProbabilityLike, ProbabilityVector, as_count_vector, as_probability_vector

__all__ = [
    "ProbabilityVector",
    "alpha_correspondence_term",
    "alpha_divergence",
    "alpha_from_q",
    "check_alpha_q_relation",
    "divergence_correspondence_residual",
    "kl_divergence",
    "multinomial_correspondence_residual",
    "q_correspondence_term",
    "q_divergence",
    "q_from_alpha",
    "scaled_correspondence_residual",
    "unnormalized_correspondence_residual",
]


def _pair(function_name: str, p: ProbabilityLike, r: ProbabilityLike) -> tuple[np.ndarray, np.ndarray]:
    pw = as_probability_vector(p).weights
    rw = as_probability_vector(r).weights
    if pw.size != rw.size:
        raise DomainViolation(function_name, (pw.size, rw.size), "p and r of equal length")
    return pw, rw


def _require_support(function_name: str, p: np.ndarray, r: np.ndarray, label: str = "r_i > 0 wherever p_i > 0") -> None:
    bad = (p > 0) & (r == 0)
    if np.any(bad):
        raise DomainViolation(function_name, int(np.flatnonzero(bad)[0]), label)


def _total(terms: np.ndarray, extra: np.ndarray) -> float:
    return max(math.fsum(terms.tolist() + extra.tolist()), 0.0)


def kl_divergence(p: ProbabilityLike, r: ProbabilityLike) -> float:
    """sum p_i ln(p_i / r_i), with 0 ln(0/.) = 0."""
    pw, rw = _pair("kl_divergence", p, r)
    _require_support("kl_divergence", pw, rw)
    # kl_div(p, r) = p ln(p/r) - p + r >= 0 termwise; the linear parts cancel on the simplex
    return _total(special.kl_div(pw, rw), np.empty(0))


def q_divergence(q: QLike, p: ProbabilityLike, r: ProbabilityLike) -> float:
    """D_q(p||r) = (1 - sum p_i^q r_i^(1-q))/(1-q) = sum p_i ln_{2-q}(p_i/r_i).

    KL divergence at q = 1.
    """
    q = DeformationParameter(as_q(q, "q_divergence")).require_ldp_window("q_divergence").q
    if is_classical(q):
        return kl_divergence(p, r)
    pw, rw = _pair("q_divergence", p, r)
    _require_support("q_divergence", pw, rw)
    live = pw > 0
    rho = rw[live] / pw[live]
    terms = pw[live] * ((rho - 1.0) - np.atleast_1d(q_ln(q, rho)))
    return _total(terms, rw[~live])


def alpha_divergence(alpha: float, p: ProbabilityLike, r: ProbabilityLike) -> float:
    """D^(alpha)(p||r) = 4/(1 - alpha^2) (1 - sum p_i^((1-alpha)/2) r_i^((1+alpha)/2)).

    KL(p||r) at alpha = -1 and KL(r||p) at alpha = 1. For alpha > 1 the
    exponent on p is negative, so the support condition swaps as at alpha = 1.
    """
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise DomainViolation("alpha_divergence", alpha, "finite alpha")
    if abs(alpha + 1.0) < ALPHA_ONE_WINDOW:
        return kl_divergence(p, r)
    if abs(alpha - 1.0) < ALPHA_ONE_WINDOW:
        pw, rw = _pair("alpha_divergence", p, r)
        _require_support("alpha_divergence", rw, pw, "p_i > 0 wherever r_i > 0")
        return kl_divergence(rw, pw)

    pw, rw = _pair("alpha_divergence", p, r)
    a = (1.0 - alpha) / 2.0
    b = (1.0 + alpha) / 2.0
    if alpha < 1.0:
        _require_support("alpha_divergence", pw, rw)
        weights, other, exponent = pw, rw, b
    else:
        _require_support("alpha_divergence", rw, pw, "p_i > 0 wherever r_i > 0")
        weights, other, exponent = rw, pw, a
    # weights_i * [e (t_i - 1) - expm1(e ln t_i)] with t_i = other_i / weights_i
    live = weights > 0
    ratio = other[live] / weights[live]
    terms = weights[live] * (exponent * (ratio - 1.0) - np.expm1(exponent * np.log(ratio)))
    extra = exponent * other[~live]
    return max(math.fsum(terms.tolist() + extra.tolist()) / (a * b), 0.0)


def alpha_from_q(q: QLike) -> float:
    return 1.0 - 2.0 * as_q(q, "alpha_from_q")


def q_from_alpha(alpha: float) -> DeformationParameter:
    return DeformationParameter((1.0 - float(alpha)) / 2.0)


def check_alpha_q_relation(q: QLike, p: ProbabilityLike, r: ProbabilityLike) -> float:
    """Relative discrepancy between D^(1-2q) and D_q / q."""
    q = as_q(q, "check_alpha_q_relation")
    if q == 0.0 or is_classical(q):
        raise DomainViolation("check_alpha_q_relation", q, "q != 0 and q != 1")
    via_alpha = alpha_divergence(alpha_from_q(q), p, r)
    via_q = q_divergence(q, p, r) / q
    scale = max(abs(via_alpha), abs(via_q))
    return 0.0 if scale == 0.0 else abs(via_alpha - via_q) / scale


# ── Correspondence with the q-binomial law ────────────────────────────────────

def q_correspondence_term(q: QLike, n: int, p: ProbabilityLike, r: ProbabilityLike) -> float:
    """n^(2-q)/(2-q) * D_{2-q}(p||r)."""
    q = as_q(q, "q_correspondence_term")
    dual = 2.0 - q
    return n**dual / dual * q_divergence(dual, p, r)


def alpha_correspondence_term(alpha: float, n: int, p: ProbabilityLike, r: ProbabilityLike) -> float:
    """n^((3+alpha)/2) * D^(-2-alpha)(p||r), the same term in alpha form."""
    alpha = float(alpha)
    return n ** ((3.0 + alpha) / 2.0) * alpha_divergence(-2.0 - alpha, p, r)


def _check_interior_k(function_name: str, n: int, k: int) -> int:
    if isinstance(k, (bool, np.bool_)) or int(k) != k or not 1 <= k <= n - 1:
        raise DomainViolation(function_name, k, f"integer 1 <= k <= n - 1 = {n - 1}")
    return int(k)


def _binomial_term(q: float, n: int, k: int, r: float) -> float:
    return q_correspondence_term(q, n, ProbabilityVector.binary(k / n), ProbabilityVector.binary(r))


def divergence_correspondence_residual(pmfv: QBinomialPmf, k: int) -> float:
    """ln_q b_q(k) - [-n^(2-q)/(2-q) D_{2-q}(k/n || r) + C_q].

    ln_q b_q(k) is read from the stored q-log mass, so masses below double
    precision still give exact residuals.
    """
    n = pmfv.n
    k = _check_interior_k("divergence_correspondence_residual", n, k)
    if pmfv.cut_off[k]:
        raise DomainViolation("divergence_correspondence_residual", k, "b_q(k) > 0 (k is in the cutoff region)")
    term = _binomial_term(pmfv.q, n, k, pmfv.r)
    return float(pmfv.log_q_mass[k]) - (-term + pmfv.c_q)


def unnormalized_correspondence_residual(spec: QBinomialSpec, k: int) -> float:
    """s_k + n^(2-q)/(2-q) D_{2-q}(k/n || r).

    The same residual with C_q cancelled, so it stays defined where b_q(k)
    is cut off (q < 1, k far from nr).
    """
    k = _check_interior_k("unnormalized_correspondence_residual", spec.n, k)
    return ln_q_pmf_unnormalized(spec, k) + _binomial_term(spec.q, spec.n, k, spec.r)


def scaled_correspondence_residual(source: QBinomialPmf | QBinomialSpec, k: int) -> float:
    """The residual divided by n^(2-q)/(2-q) * D; NaN where k/n = r.

    A QBinomialSpec takes the C_q-free residual.
    """
    if isinstance(source, QBinomialSpec):
        residual = unnormalized_correspondence_residual(source, k)
    else:
        residual = divergence_correspondence_residual(source, k)
    term = _binomial_term(source.q, source.n, int(k), source.r)
    return math.nan if term == 0.0 else residual / term


def multinomial_correspondence_residual(mpmf: QMultinomialPmf, counts: CountLike) -> float:
    """Multinomial analogue: ln_q b_q(counts) - [-n^(2-q)/(2-q) D_{2-q}(counts/n || rates) + C_q]."""
    counts = as_count_vector(counts)
    if counts.n != mpmf.n or counts.k != len(mpmf.rates):
        raise DomainViolation("multinomial_correspondence_residual", counts.counts, f"{len(mpmf.rates)} counts summing to {mpmf.n}")
    if mpmf.as_map().get(counts.counts, 0.0) == 0.0:
        raise DomainViolation("multinomial_correspondence_residual", counts.counts, "b_q(counts) > 0")
    s = q_multinomial_ln_pmf_unnormalized(mpmf.q, counts, mpmf.rates)
    term = q_correspondence_term(mpmf.q, counts.n, counts.proportions(), mpmf.rates)
    return (s + mpmf.c_q) - (-term + mpmf.c_q)


def main() -> None:
    parser = argparse.ArgumentParser(description="Evaluate the divergence family on a pair of distributions")
    parser.add_argument("--q", type=float, required=True)
    parser.add_argument("--p", type=float, nargs="+", required=True)
    parser.add_argument("--r", type=float, nargs="+", required=True)
    args = parser.parse_args()

    print(f"D_q        = {q_divergence(args.q, args.p, args.r)!r}")
    print(f"KL         = {kl_divergence(args.p, args.r)!r}")
    print(f"D^(1-2q)   = {alpha_divergence(alpha_from_q(args.q), args.p, args.r)!r}")
    if not is_classical(args.q):
        print(f"relation   = {check_alpha_q_relation(args.q, args.p, args.r):.3e}")


if __name__ == "__main__":
    main()
