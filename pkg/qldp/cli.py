#!/usr/bin/env python3
"""
Batch table generator
=====================
One subcommand per library surface, each writing a deterministic table.

Quick start
-----------
    python -m qldp.cli qfun --q 0.5 1 1.5 --x 0.5 2 4 --y 3
    python -m qldp.cli stirling --q 0.5 1 1.5 --n 10 100 1000
    python -m qldp.cli stirling --q 0.5 1.5 --estimate-delta --n-max 100000
    python -m qldp.cli pmf --q 1 --n 4 --r 0.5
    python -m qldp.cli pmf --q 1.5 --n 50 --r 0.3 --samples 10000 --seed 7 --record data/pmf.csv
    python -m qldp.cli divergence --p 0.5 0.5 --r 0.25 0.75 --q 0.5 1.5 --alpha 0 3
    python -m qldp.cli ldp --q 0.5 1 1.5 --n 100 1000 10000 --r 0.5 --x 0.3

Output
------
CSV (default) is one `# config: {...}` line, a header row and one row per
grid cell, floats with 17 significant digits. `--format json` writes the
same table as {"config", "columns", "rows"}. Progress goes to stderr.

Exit status
-----------
    0   success
    1   invalid input (one JSON error record on stderr)
    2   numerical failure (same record, "error": "numerical")
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, NoReturn, Optional

import numpy as np
import pandas as pd

from .common import (
    DEFAULT_N_GRID,
    DEFAULT_N_MAX,
    DEFAULT_Q_GRID,
    DEFAULT_R,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    DEFAULT_X,
    FLOAT_FORMAT,
    tlog,
)
from .ldp import ldp_scan, scan_frame
from .qcomb import (
    StirlingConstants,
    estimate_delta_q,
    q_ln_factorial,
    q_stirling_precise,
    q_stirling_rough,
    zeta_delta_q,
)
from .qcore import DomainViolation, q_exp, q_exp_cutoff, q_ln, q_product, q_ratio
from .qdist import QBinomialSpec, pmf, sample
from .qdiv import alpha_divergence, alpha_from_q, check_alpha_q_relation, kl_divergence, q_divergence, q_from_alpha
from .records import write_pmf_record
from .vectors import as_probability_vector

COMMANDS = ("qfun", "stirling", "pmf", "divergence", "ldp")
# options that steer where or how fast output is produced, not what it contains
_RUNTIME_OPTIONS = ("command", "format", "out", "quiet", "workers", "record")


@dataclass(frozen=True)
class ScanConfig:
    command: str
    options: dict[str, Any]
    output_format: str = "csv"
    out: Optional[Path] = None
    workers: int = DEFAULT_WORKERS
    quiet: bool = False
    record: Optional[Path] = None
    metadata: dict[str, Any] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise DomainViolation("ScanConfig", self.command, f"one of {COMMANDS}")
        if self.output_format not in ("csv", "json"):
            raise DomainViolation("ScanConfig", self.output_format, "csv or json")
        for name, value in self.options.items():
            if isinstance(value, (list, tuple)) and not value:
                raise DomainViolation("ScanConfig", name, "non-empty grid")
        meta = {"command": self.command, "format": self.output_format, **self.options}
        object.__setattr__(self, "metadata", meta)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "ScanConfig":
        values = vars(args)
        options = {k: v for k, v in values.items() if k not in _RUNTIME_OPTIONS}
        return cls(
            command=args.command,
            options=options,
            output_format=args.format,
            out=args.out,
            workers=args.workers,
            quiet=args.quiet,
            record=values.get("record"),
        )


# ── Subcommands ───────────────────────────────────────────────────────────────

def _or_nan(fn: Callable[..., float], *args: Any) -> float:
    try:
        return float(fn(*args))
    except DomainViolation:
        return math.nan


def _qfun_table(config: ScanConfig) -> pd.DataFrame:
    opts = config.options
    rows = []
    for q in opts["q"]:
        for x in opts["x"]:
            row = {
                "q": q,
                "x": x,
                "q_ln": _or_nan(q_ln, q, x),
                "q_exp": _or_nan(q_exp, q, x),
                "q_exp_cutoff": _or_nan(q_exp_cutoff, q, x),
            }
            for y in opts.get("y") or [None]:
                if y is None:
                    rows.append(row)
                    continue
                rows.append({**row, "y": y, "q_product": _or_nan(q_product, q, x, y), "q_ratio": _or_nan(q_ratio, q, x, y)})
    columns = ["q", "x", "q_ln", "q_exp", "q_exp_cutoff"] + (["y", "q_product", "q_ratio"] if opts.get("y") else [])
    return pd.DataFrame(rows, columns=columns)


def _stirling_table(config: ScanConfig) -> pd.DataFrame:
    opts = config.options
    for q in opts["q"]:
        if q <= 0:
            raise DomainViolation("stirling", q, "q > 0")
    if opts["estimate_delta"]:
        rows = []
        for q in opts["q"]:
            estimate = estimate_delta_q(q, opts["n_max"])
            rows.append({
                "q": q,
                "n_max": opts["n_max"],
                "delta_q": estimate.delta_q,
                "error": estimate.error,
                "tolerance": estimate.tolerance,
                "zeta_delta_q": zeta_delta_q(q),
            })
        return pd.DataFrame(rows)

    for n in opts["n"]:
        if n < 2:
            raise DomainViolation("stirling", n, "n >= 2")
    rows = []
    for q in opts["q"]:
        consts = StirlingConstants.from_zeta(q)
        for n in opts["n"]:
            exact = q_ln_factorial(q, n)
            rough = q_stirling_rough(q, n)
            precise = q_stirling_precise(consts, n)
            rows.append({
                "q": q,
                "n": n,
                "exact": exact,
                "rough": rough,
                "precise": precise,
                "rough_residual": exact - rough,
                "precise_residual": exact - precise,
                "delta_q": consts.delta_q,
            })
    return pd.DataFrame(rows)


def _pmf_table(config: ScanConfig) -> pd.DataFrame:
    opts = config.options
    spec = QBinomialSpec(opts["q"], opts["n"], opts["r"])
    if opts["samples"] is not None and opts["samples"] < 1:
        raise DomainViolation("pmf", opts["samples"], "--samples >= 1")
    pmfv = pmf(spec)
    report = pmfv.solver_report
    frame = pd.DataFrame({
        "k": np.arange(spec.n + 1),
        "probability": pmfv.probabilities,
        "log_mass": pmfv.log_mass,
        "log_q_mass": pmfv.log_q_mass,
        "cdf": pmfv.cdf(),
    })
    if opts["samples"] is not None:
        draws = sample(pmfv, opts["seed"], opts["samples"])
        frame["empirical_frequency"] = np.bincount(draws, minlength=spec.n + 1) / opts["samples"]
    frame["c_q"] = pmfv.c_q
    frame["solver_method"] = report.method
    frame["solver_iterations"] = report.iterations
    frame["solver_residual"] = report.residual
    frame["scaling"] = report.scaling
    if config.record is not None:
        path = write_pmf_record(pmfv, config.record)
        if not config.quiet:
            tlog(f"Wrote pmf record to {path}")
    return frame


def _divergence_table(config: ScanConfig) -> pd.DataFrame:
    opts = config.options
    p = as_probability_vector(opts["p"])
    r = as_probability_vector(opts["r_vec"])
    kl = kl_divergence(p, r)
    pairs = [(float(q), alpha_from_q(q)) for q in opts["q"] or []]
    pairs += [(float(q_from_alpha(alpha)), float(alpha)) for alpha in opts["alpha"] or []]
    if not pairs:
        pairs = [(q, alpha_from_q(q)) for q in DEFAULT_Q_GRID]

    rows = []
    for q, alpha in pairs:
        rows.append({
            "q": q,
            "alpha": alpha,
            "q_divergence": _or_nan(q_divergence, q, p, r),
            "alpha_divergence": alpha_divergence(alpha, p, r),
            "kl": kl,
            "relation_residual": _or_nan(check_alpha_q_relation, q, p, r),
        })
    return pd.DataFrame(rows)


def _ldp_table(config: ScanConfig) -> pd.DataFrame:
    opts = config.options
    rows = ldp_scan(opts["q"], opts["n"], opts["r"], opts["x"], workers=config.workers, verbose=not config.quiet)
    return scan_frame(rows)


_TABLES: dict[str, Callable[[ScanConfig], pd.DataFrame]] = {
    "qfun": _qfun_table,
    "stirling": _stirling_table,
    "pmf": _pmf_table,
    "divergence": _divergence_table,
    "ldp": _ldp_table,
}


# ── Rendering ─────────────────────────────────────────────────────────────────

def _json_cell(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value if math.isfinite(value) else "null"
    return json.dumps(str(value))


def render(frame: pd.DataFrame, config: ScanConfig) -> str:
    meta = json.dumps(config.metadata, sort_keys=True)
    if config.output_format == "csv":
        body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
        return f"# config: {meta}\n{body}"
    rows = ["[" + ", ".join(_json_cell(v) for v in row) + "]" for row in frame.itertuples(index=False, name=None)]
    return (
        f'{{"config": {meta},\n'
        f' "columns": {json.dumps(list(frame.columns))},\n'
        f' "rows": [\n  ' + ",\n  ".join(rows) + "\n ]}\n"
    )


def run(config: ScanConfig) -> int:
    """Build the table for config and write it to --out or stdout."""
    if not config.quiet:
        tlog(f"{config.command}: {json.dumps(config.options, sort_keys=True)}")
    frame = _TABLES[config.command](config)
    text = render(frame, config)
    if config.out is not None:
        config.out.parent.mkdir(parents=True, exist_ok=True)
        config.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    if not config.quiet:
        tlog(f"{config.command}: {len(frame)} rows -> {config.out or 'stdout'}")
    return 0


# ── Argument parsing ──────────────────────────────────────────────────────────

class UsageError(ValueError):
    """Command-line arguments the parser rejected."""


class _Parser(argparse.ArgumentParser):
    # subparsers inherit this class, so every parse error lands here
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", type=Path, default=None, help="write the table here instead of stdout")
    common.add_argument("--quiet", action="store_true", help="no progress lines on stderr")
    common.add_argument("--workers", type=int, default=DEFAULT_WORKERS)

    parser = _Parser(
        prog="python -m qldp.cli",
        description="Deterministic tables from the q-deformed calculus library",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    qfun = sub.add_parser("qfun", parents=[common], help="q-log, q-exp, q-product and q-ratio over grids")
    qfun.add_argument("--q", type=float, nargs="+", default=list(DEFAULT_Q_GRID))
    qfun.add_argument("--x", type=float, nargs="+", required=True)
    qfun.add_argument("--y", type=float, nargs="+", default=None, help="adds q_product / q_ratio columns")

    stirling = sub.add_parser("stirling", parents=[common], help="exact vs rough vs precise q-Stirling")
    stirling.add_argument("--q", type=float, nargs="+", default=list(DEFAULT_Q_GRID))
    stirling.add_argument("--n", type=int, nargs="+", default=[10, 100, 1000, 10000])
    stirling.add_argument("--estimate-delta", action="store_true", help="estimate delta_q instead")
    stirling.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)

    pmf_parser = sub.add_parser("pmf", parents=[common], help="materialized q-binomial pmf")
    pmf_parser.add_argument("--q", type=float, required=True)
    pmf_parser.add_argument("--n", type=int, required=True)
    pmf_parser.add_argument("--r", type=float, default=DEFAULT_R)
    pmf_parser.add_argument("--samples", type=int, default=None)
    pmf_parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    pmf_parser.add_argument("--record", type=Path, default=None, help="also write a versioned pmf record")

    divergence = sub.add_parser("divergence", parents=[common], help="q-/alpha-divergence table")
    divergence.add_argument("--p", type=float, nargs="+", required=True)
    divergence.add_argument("--r", dest="r_vec", type=float, nargs="+", required=True)
    divergence.add_argument("--q", type=float, nargs="+", default=None)
    divergence.add_argument("--alpha", type=float, nargs="+", default=None)

    ldp = sub.add_parser("ldp", parents=[common], help="empirical q-rates against the rate function")
    ldp.add_argument("--q", type=float, nargs="+", default=list(DEFAULT_Q_GRID))
    ldp.add_argument("--n", type=int, nargs="+", default=list(DEFAULT_N_GRID))
    ldp.add_argument("--r", type=float, default=DEFAULT_R)
    ldp.add_argument("--x", type=float, default=DEFAULT_X)
    return parser


def _error_record(kind: str, exc: Exception) -> None:
    record = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return run(ScanConfig.from_args(args))
    except ValueError as exc:
        _error_record("validation", exc)
        return 1
    except RuntimeError as exc:
        _error_record("numerical", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
