"""Domain types and forward entropy computations.

All entropies are in bits. Entries below ``ZERO_CUTOFF`` count as exact zeros
so that ``0 * log2(0)`` contributes nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import IncrementExceedsCapacity, InvariantViolation, ScheduleNotMonotone

ZERO_CUTOFF = 1e-300
VECTOR_SUM_TOL = 1e-12
TENSOR_SUM_TOL = 1e-9
# Slack for float rounding in schedule arithmetic, e.g. 2*log2(N) - log2(N).
CAPACITY_SLACK = 1e-12


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """N >= 2 nonnegative probabilities summing to one."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.probs, "probs")
        if arr.ndim != 1:
            raise InvariantViolation(f"probability vector must be 1-d, got shape {arr.shape}")
        if arr.size < 2:
            raise InvariantViolation(f"need at least 2 symbols, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise InvariantViolation("probabilities must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise InvariantViolation("probabilities must lie in [0, 1]")
        total = math.fsum(arr.tolist())
        if abs(total - 1.0) > VECTOR_SUM_TOL:
            raise InvariantViolation(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", arr)

    @property
    def n_symbols(self) -> int:
        return int(self.probs.size)

    def __len__(self) -> int:
        return self.n_symbols

    def __getitem__(self, i):
        return self.probs[i]

    def __eq__(self, other):
        if not isinstance(other, ProbabilityVector):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    @classmethod
    def uniform(cls, n: int) -> "ProbabilityVector":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, index: int = 0) -> "ProbabilityVector":
        p = np.zeros(n)
        p[index] = 1.0
        return cls(p)


@dataclass(frozen=True)
class EntropySchedule:
    """Target joint entropies H_1..H_k (bits) over an alphabet of N symbols.

    Construction only checks the shape of the data; realizability is the job
    of :func:`validate_schedule`.
    """

    n_symbols: int
    targets: tuple[float, ...]

    def __post_init__(self):
        if int(self.n_symbols) != self.n_symbols or self.n_symbols < 2:
            raise InvariantViolation(f"n_symbols must be an integer >= 2, got {self.n_symbols!r}")
        targets = tuple(float(h) for h in self.targets)
        if not targets:
            raise InvariantViolation("schedule needs at least one target")
        if not all(math.isfinite(h) for h in targets):
            raise InvariantViolation("schedule targets must be finite")
        object.__setattr__(self, "n_symbols", int(self.n_symbols))
        object.__setattr__(self, "targets", targets)

    @property
    def order(self) -> int:
        return len(self.targets)

    @property
    def capacity(self) -> float:
        return math.log2(self.n_symbols)


@dataclass(frozen=True, eq=False)
class FactoredJointDistribution:
    """Order-k joint distribution stored as its k cascade factors.

    The entry at multi-index (i_1, ..., i_k) is
    ``factors[0][i_1] * factors[1][i_2] * ... * factors[k-1][i_k]``.
    """

    factors: tuple[ProbabilityVector, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise InvariantViolation("a factored distribution needs at least one factor")
        n = factors[0].n_symbols
        for m, f in enumerate(factors):
            if not isinstance(f, ProbabilityVector):
                raise InvariantViolation(f"factor {m} is not a ProbabilityVector")
            if f.n_symbols != n:
                raise InvariantViolation(
                    f"factor {m} has {f.n_symbols} symbols, factor 0 has {n}"
                )
        object.__setattr__(self, "factors", factors)

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def n_symbols(self) -> int:
        return self.factors[0].n_symbols

    @property
    def n_entries(self) -> int:
        return self.n_symbols ** self.order

    def __eq__(self, other):
        if not isinstance(other, FactoredJointDistribution):
            return NotImplemented
        return self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)


@dataclass(frozen=True, eq=False)
class DenseJointTensor:
    """Explicit N^k joint probability array.

    ``entries`` is the flat row-major array (first index slowest); ``array``
    is the same memory viewed with shape (N,) * k.
    """

    order: int
    n_symbols: int
    entries: np.ndarray

    def __post_init__(self):
        k, n = int(self.order), int(self.n_symbols)
        if k < 1 or n < 2:
            raise InvariantViolation(f"need order >= 1 and n_symbols >= 2, got {k}, {n}")
        arr = np.array(self.entries, dtype=np.float64).reshape(-1)
        if arr.size != n**k:
            raise InvariantViolation(f"expected {n**k} entries, got {arr.size}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise InvariantViolation("entries must lie in [0, 1]")
        total = float(np.sum(arr))
        if abs(total - 1.0) > TENSOR_SUM_TOL * k:
            raise InvariantViolation(f"entries sum to {total!r}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "order", k)
        object.__setattr__(self, "n_symbols", n)
        object.__setattr__(self, "entries", arr)

    @property
    def array(self) -> np.ndarray:
        return self.entries.reshape((self.n_symbols,) * self.order)

    def __eq__(self, other):
        if not isinstance(other, DenseJointTensor):
            return NotImplemented
        return (
            self.order == other.order
            and self.n_symbols == other.n_symbols
            and np.array_equal(self.entries, other.entries)
        )

    def __hash__(self):
        return hash((self.order, self.n_symbols, self.entries.tobytes()))


class SolverMethod(str, Enum):
    TWO_LEVEL = "two_level"
    EXPONENTIAL_FAMILY = "exponential_family"
    RANDOM_SEARCH = "random_search"


@dataclass(frozen=True)
class SolverReport:
    achieved_entropy: float
    residual: float
    iterations: int
    method: SolverMethod

    def to_dict(self) -> dict:
        return {
            "achieved_entropy": self.achieved_entropy,
            "residual": self.residual,
            "iterations": self.iterations,
            "method": self.method.value,
        }


def _entropy_of_array(p: np.ndarray) -> float:
    nz = p[p >= ZERO_CUTOFF]
    if nz.size == 0:
        return 0.0
    # Equal nonzero masses: the closed form is exact where the sum is not.
    if np.all(nz == nz[0]):
        return math.log2(nz.size) if nz.size > 1 else 0.0
    return float(-np.sum(nz * np.log2(nz)))


def shannon_entropy(p: ProbabilityVector | Sequence[float] | np.ndarray) -> float:
    """Entropy in bits, ``-sum(p * log2(p))`` with ``0 * log2(0) = 0``."""
    arr = p.probs if isinstance(p, ProbabilityVector) else np.asarray(p, dtype=np.float64)
    return _entropy_of_array(arr)


def joint_entropy_dense(t: DenseJointTensor) -> float:
    return _entropy_of_array(t.entries)


def joint_entropy_factored(f: FactoredJointDistribution) -> float:
    """Joint entropy of a product distribution: the sum of its factor entropies."""
    return math.fsum(shannon_entropy(v) for v in f.factors)


def conditional_increments(s: EntropySchedule) -> list[float]:
    """Per-order conditional entropies ``[H_1, H_2 - H_1, ..., H_k - H_{k-1}]``.

    Raises ScheduleNotMonotone / IncrementExceedsCapacity naming the first
    offending order (1-based).
    """
    cap = s.capacity
    out = []
    prev = 0.0
    for m, h in enumerate(s.targets, start=1):
        inc = h - prev
        if inc < 0.0:
            if m == 1:
                raise ScheduleNotMonotone(f"H_1 = {h} is negative", order=m)
            raise ScheduleNotMonotone(
                f"H_{m} = {h} is below H_{m - 1} = {prev}", order=m
            )
        if inc > cap + CAPACITY_SLACK:
            raise IncrementExceedsCapacity(
                f"increment {inc} exceeds capacity log2({s.n_symbols}) = {cap}", order=m
            )
        out.append(inc)
        prev = h
    return out


def cumulative_targets(increments: Iterable[float]) -> list[float]:
    """Inverse of :func:`conditional_increments` (left-to-right running sum)."""
    out = []
    total = 0.0
    for inc in increments:
        total = total + inc
        out.append(total)
    return out


@dataclass(frozen=True)
class Violation:
    rule: str  # "negative", "capacity", "monotone"
    order: int
    message: str


@dataclass(frozen=True)
class ScheduleValidation:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Violation | None:
        return self.violations[0] if self.violations else None

    def __bool__(self) -> bool:
        return self.valid


def validate_schedule(s: EntropySchedule) -> ScheduleValidation:
    """Check realizability without raising; every violated rule is listed."""
    cap = s.capacity
    violations = []
    prev = 0.0
    for m, h in enumerate(s.targets, start=1):
        inc = h - prev
        if m == 1 and h < 0.0:
            violations.append(Violation("negative", m, f"H_1 = {h} is negative"))
        elif inc < 0.0:
            violations.append(
                Violation("monotone", m, f"H_{m} = {h} is below H_{m - 1} = {prev}")
            )
        if inc > cap + CAPACITY_SLACK:
            what = f"H_1 = {h}" if m == 1 else f"increment H_{m} - H_{m - 1} = {inc}"
            violations.append(
                Violation("capacity", m, f"{what} exceeds log2({s.n_symbols}) = {cap:.6f}")
            )
        prev = h
    return ScheduleValidation(tuple(violations))
