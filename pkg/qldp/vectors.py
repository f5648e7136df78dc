"""Simplex points and count vectors shared by qcomb, qdist and qdiv."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from .common import SIMPLEX_TOLERANCE
from .qcore import DomainViolation


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """Finite discrete distribution: entries >= 0 summing to 1 within 1e-12."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if weights.size == 0:
            raise DomainViolation("ProbabilityVector", [], "at least one outcome")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise DomainViolation("ProbabilityVector", weights.tolist(), "finite non-negative weights")
        total = float(weights.sum())
        if abs(total - 1.0) > SIMPLEX_TOLERANCE:
            raise DomainViolation("ProbabilityVector", total, "weights summing to 1")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_counts(cls, counts: Sequence[int] | "CountVector") -> "ProbabilityVector":
        counts = as_count_vector(counts)
        return cls(np.asarray(counts.counts, dtype=float) / counts.n)

    @classmethod
    def binary(cls, p: float) -> "ProbabilityVector":
        """The two-outcome point (p, 1 - p)."""
        return cls(np.array([p, 1.0 - p]))

    def __len__(self) -> int:
        return int(self.weights.size)

    def __iter__(self) -> Iterator[float]:
        return iter(self.weights.tolist())

    def __getitem__(self, index: int) -> float:
        return float(self.weights[index])

    def __repr__(self) -> str:
        return f"ProbabilityVector({self.weights.tolist()!r})"


@dataclass(frozen=True)
class CountVector:
    """Block counts n_1..n_k with n = sum >= 1."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(self.counts)
        if not counts:
            raise DomainViolation("CountVector", counts, "k >= 1 blocks")
        normalized = []
        for count in counts:
            if isinstance(count, (bool, np.bool_)) or int(count) != count or count < 0:
                raise DomainViolation("CountVector", counts, "non-negative integer counts")
            normalized.append(int(count))
        if sum(normalized) < 1:
            raise DomainViolation("CountVector", counts, "n = sum(counts) >= 1")
        object.__setattr__(self, "counts", tuple(normalized))

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def k(self) -> int:
        return len(self.counts)

    def proportions(self) -> ProbabilityVector:
        return ProbabilityVector.from_counts(self)


ProbabilityLike = Union[ProbabilityVector, Sequence[float], np.ndarray]
CountLike = Union[CountVector, Sequence[int], np.ndarray]


def as_probability_vector(p: ProbabilityLike) -> ProbabilityVector:
    if isinstance(p, ProbabilityVector):
        return p
    return ProbabilityVector(np.asarray(p, dtype=float))


def as_count_vector(counts: CountLike) -> CountVector:
    if isinstance(counts, CountVector):
        return counts
    return CountVector(tuple(np.asarray(counts).reshape(-1).tolist()))
