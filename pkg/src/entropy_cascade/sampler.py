"""Draw symbol tuples from a factored distribution and measure them.

A product distribution samples each position independently from its own
factor, so an order-k draw costs k inverse-CDF lookups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy_core import FactoredJointDistribution, ProbabilityVector
from .errors import InvariantViolation


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """``tuples`` has shape (count, order); row r is one drawn multi-index."""

    tuples: np.ndarray
    order: int
    n_symbols: int
    seed: int

    def __post_init__(self):
        arr = np.array(self.tuples, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != self.order:
            raise InvariantViolation(f"tuples must have shape (count, {self.order}), got {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() >= self.n_symbols):
            raise InvariantViolation(f"tuple components must lie in [0, {self.n_symbols})")
        arr.setflags(write=False)
        object.__setattr__(self, "tuples", arr)

    @property
    def count(self) -> int:
        return int(self.tuples.shape[0])

    def __eq__(self, other):
        if not isinstance(other, SampleBatch):
            return NotImplemented
        return (
            (self.order, self.n_symbols, self.seed) == (other.order, other.n_symbols, other.seed)
            and np.array_equal(self.tuples, other.tuples)
        )

    __hash__ = None


def cumulative(v: ProbabilityVector) -> np.ndarray:
    """Cumulative masses with every entry from the last nonzero symbol on pinned to 1.

    Pinning absorbs rounding in the running sum without ever giving trailing
    zero-mass symbols a share of the unit interval.
    """
    cdf = np.cumsum(v.probs)
    last = int(np.flatnonzero(v.probs)[-1])
    cdf[last:] = 1.0
    return cdf


def inverse_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Smallest index i with ``cdf[i] >= u`` for u in (0, 1]; ties go to the lower index."""
    return np.searchsorted(cdf, u, side="left")


def sample_tuples(f: FactoredJointDistribution, count: int, seed: int = 0) -> SampleBatch:
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    # 1 - U maps [0, 1) onto (0, 1] so a leading zero-mass symbol is never hit.
    u = 1.0 - rng.random((count, f.order))
    out = np.empty((count, f.order), dtype=np.int64)
    for m, v in enumerate(f.factors):
        out[:, m] = inverse_cdf(cumulative(v), u[:, m])
    return SampleBatch(out, f.order, f.n_symbols, seed)


def tuple_counts(b: SampleBatch) -> np.ndarray:
    """Occurrence count of every distinct observed tuple (order unspecified)."""
    if b.n_symbols ** b.order < 2**62:
        codes = np.ravel_multi_index(b.tuples.T, (b.n_symbols,) * b.order)
        _, counts = np.unique(codes, return_counts=True)
    else:
        _, counts = np.unique(b.tuples, axis=0, return_counts=True)
    return counts


def empirical_entropy(b: SampleBatch) -> float:
    """Plug-in joint entropy (bits) of the observed tuple frequencies, no bias correction."""
    if b.count == 0:
        raise ValueError("empty batch")
    counts = tuple_counts(b).astype(np.float64)
    n = float(b.count)
    # H = log2 n - sum(c log2 c) / n, exact for counts that are all equal
    if np.all(counts == counts[0]):
        return math.log2(counts.size) if counts.size > 1 else 0.0
    return float(math.log2(n) - np.sum(counts * np.log2(counts)) / n)


def position_frequencies(b: SampleBatch) -> np.ndarray:
    """Empirical per-position symbol frequencies, shape (order, n_symbols)."""
    return np.stack(
        [np.bincount(b.tuples[:, m], minlength=b.n_symbols) / b.count for m in range(b.order)]
    )
