"""Versioned text record of a materialized q-binomial pmf.

    # qldp-pmf-record v1
    q,0.5
    n,4
    r,0.5
    c_q,<float>
    k,probability
    0,<float>
    ...

Floats are written with 17 significant digits so they read back bit-exact.

Usage:
  python -m qldp.records path/to/record.csv
"""

from __future__ import annotations

import argparse
import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

from .common import PMF_RECORD_VERSION, format_float
from .qdist import QBinomialPmf

HEADER = f"# qldp-pmf-record v{PMF_RECORD_VERSION}"
_KEYS = ("q", "n", "r", "c_q")


class RecordFormatError(ValueError):
    """A pmf record has a bad header or a malformed line."""

    def __init__(self, line_no: int, line: str, reason: str) -> None:
        self.line_no = line_no
        self.line = line
        super().__init__(f"line {line_no}: {reason}: {line!r}")


@dataclass(frozen=True)
class PmfRecord:
    q: float
    n: int
    r: float
    c_q: float
    probabilities: tuple[float, ...]

    @property
    def total(self) -> float:
        return math.fsum(self.probabilities)


def format_pmf_record(pmfv: QBinomialPmf) -> str:
    buffer = io.StringIO()
    buffer.write(HEADER + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows([
        ("q", format_float(pmfv.q)),
        ("n", pmfv.n),
        ("r", format_float(pmfv.r)),
        ("c_q", format_float(pmfv.c_q)),
        ("k", "probability"),
    ])
    writer.writerows((k, format_float(p)) for k, p in enumerate(pmfv.probabilities.tolist()))
    return buffer.getvalue()


def write_pmf_record(pmfv: QBinomialPmf, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_pmf_record(pmfv), encoding="utf-8")
    return path


def _fields(line_no: int, line: str, row: list[str]) -> tuple[str, str]:
    if len(row) != 2:
        raise RecordFormatError(line_no, line, "expected two comma-separated fields")
    return row[0].strip(), row[1].strip()


def _number(line_no: int, line: str, text: str, kind: type) -> float | int:
    try:
        return kind(text)
    except ValueError:
        raise RecordFormatError(line_no, line, f"not a valid {kind.__name__}") from None


def parse_pmf_record(text: str) -> PmfRecord:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise RecordFormatError(1, lines[0] if lines else "", f"expected header {HEADER!r}")
    rows = list(csv.reader(lines))

    meta: dict[str, float | int] = {}
    for line_no, key in enumerate(_KEYS, start=2):
        if line_no > len(lines):
            raise RecordFormatError(line_no, "", f"missing {key} line")
        line = lines[line_no - 1]
        name, value = _fields(line_no, line, rows[line_no - 1])
        if name != key:
            raise RecordFormatError(line_no, line, f"expected key {key!r}")
        meta[key] = _number(line_no, line, value, int if key == "n" else float)

    column_line = len(_KEYS) + 2
    if len(lines) < column_line or [f.strip() for f in rows[column_line - 1]] != ["k", "probability"]:
        raise RecordFormatError(column_line, lines[column_line - 1] if len(lines) >= column_line else "", "expected 'k,probability'")

    probabilities = []
    for line_no, (line, row) in enumerate(zip(lines[column_line:], rows[column_line:]), start=column_line + 1):
        if not row or not line.strip():
            continue
        k_text, p_text = _fields(line_no, line, row)
        k = _number(line_no, line, k_text, int)
        if k != len(probabilities):
            raise RecordFormatError(line_no, line, f"expected k = {len(probabilities)}")
        probabilities.append(_number(line_no, line, p_text, float))

    if len(probabilities) != meta["n"] + 1:
        raise RecordFormatError(len(lines), lines[-1], f"expected {meta['n'] + 1} probability rows, got {len(probabilities)}")
    return PmfRecord(meta["q"], meta["n"], meta["r"], meta["c_q"], tuple(probabilities))


def read_pmf_record(path: Path) -> PmfRecord:
    return parse_pmf_record(Path(path).read_text(encoding="utf-8"))


def main() -> None:
    parser = argparse.ArgumentParser(description="Validate a pmf record and print its total mass")
    parser.add_argument("record", type=Path)
    args = parser.parse_args()

    record = read_pmf_record(args.record)
    print(f"q={record.q!r} n={record.n} r={record.r!r} c_q={record.c_q!r} total={record.total!r}")


if __name__ == "__main__":
    main()
