"""Shared paths, defaults and helpers for the qldp modules."""

from __future__ import annotations

import sys
import time
from pathlib import Path
from typing import Any, Iterable, Sequence

ROOT_DIR = Path(__file__).resolve().parents[1]
OUTPUT_DIR = ROOT_DIR / "data"
GOLDEN_DIR = ROOT_DIR / "tests" / "golden"

# ── Windows and tolerances ────────────────────────────────────────────────────
Q_ONE_WINDOW = 1e-12            # |q - 1| below this takes the classical branch
ALPHA_ONE_WINDOW = 1e-9         # |alpha -/+ 1| below this takes the KL branch
SIMPLEX_TOLERANCE = 1e-12       # |sum(p) - 1| allowed on a ProbabilityVector
SOLVER_TOLERANCE = 1e-12        # |sum(b) - 1| target of the C_q root finder
SOLVER_MAX_ITER = 200
SOLVER_XTOL = 1e-14              # absolute C_q interval at which brentq stops
CLASSICAL_SUM_TOLERANCE = 1e-10
STIRLING_TOLERANCE = 1e-6
RICHARDSON_LEVELS = 4
ENUMERATION_LIMIT = 10**6
FLOOR_GUARD = 1e-12             # relative slack when flooring n * x

# ── Default grids ─────────────────────────────────────────────────────────────
DEFAULT_Q_GRID = (0.5, 1.0, 1.5)
DEFAULT_N_GRID = (100, 1000, 10000)
DEFAULT_R = 0.5
DEFAULT_X = 0.3
DEFAULT_SEED = 20240101
DEFAULT_WORKERS = 4
DEFAULT_N_MAX = 10**6

# ── Output ────────────────────────────────────────────────────────────────────
FLOAT_FORMAT = "%.17g"
PMF_RECORD_VERSION = 1

# ── Timestamped logging ───────────────────────────────────────────────────────
_t0 = time.monotonic()
_tprev: list[float] = [_t0]


def tlog(msg: str, end: str = "\n", flush: bool = False) -> None:
    """Print msg prefixed with [HH:MM:SS +step_elapsed / total] to stderr."""
    now   = time.monotonic()
    step  = now - _tprev[0]
    total = now - _t0
    _tprev[0] = now
    ts = time.strftime("%H:%M:%S", time.localtime())
    print(f"[{ts} +{step:5.1f}s / {total:6.1f}s] {msg}", end=end, flush=flush, file=sys.stderr)


def batched(items: Sequence[Any], batch_size: int) -> Iterable[Sequence[Any]]:
    if batch_size <= 0:
        raise ValueError("batch_size must be > 0")
    for start in range(0, len(items), batch_size):
        yield items[start:start + batch_size]


def format_float(value: float) -> str:
    """Render a float with the fixed 17-significant-digit table format."""
    return FLOAT_FORMAT % value
