"""Multiplicative cascade: grow a joint distribution one order at a time.

Each new order multiplies every existing joint probability by every entry of
a conditional vector, so an order-k distribution is the outer product of its
k factors and its entropy is the sum of the factor entropies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entropy_core import (
    DenseJointTensor,
    EntropySchedule,
    FactoredJointDistribution,
    ProbabilityVector,
    SolverReport,
    conditional_increments,
    validate_schedule,
)
from .errors import (
    AlphabetMismatch,
    AxisOutOfBounds,
    EntropyCascadeError,
    IncrementExceedsCapacity,
    IndexOutOfBounds,
    MaterializationTooLarge,
    ScheduleNotMonotone,
)
from .solver import SolverConfig, solve_vector

DEFAULT_MATERIALIZATION_CAP = 10**8


def extend(f: FactoredJointDistribution, v: ProbabilityVector) -> FactoredJointDistribution:
    if v.n_symbols != f.n_symbols:
        raise AlphabetMismatch(
            f"conditional vector has {v.n_symbols} symbols, distribution has {f.n_symbols}"
        )
    return FactoredJointDistribution(f.factors + (v,))


@dataclass(frozen=True)
class OrderStep:
    """What one cascade order contributed during a build."""

    order: int
    increment: float
    target: float
    report: SolverReport


@dataclass(frozen=True)
class CascadeBuild:
    distribution: FactoredJointDistribution
    steps: tuple[OrderStep, ...]


def build_with_reports(s: EntropySchedule, cfg: SolverConfig | None = None) -> CascadeBuild:
    """Like :func:`build_from_schedule` but also returns the per-order solver reports."""
    cfg = cfg or SolverConfig()
    check = validate_schedule(s)
    if not check.valid:
        bad = check.first
        cls = IncrementExceedsCapacity if bad.rule == "capacity" else ScheduleNotMonotone
        raise cls(bad.message, order=bad.order)
    increments = conditional_increments(s)
    factors = []
    steps = []
    for m, inc in enumerate(increments, start=1):
        # Distinct seeds per order so shuffled/random factors differ across orders.
        order_cfg = SolverConfig(
            method=cfg.method, tolerance=cfg.tolerance, max_iterations=cfg.max_iterations,
            seed=cfg.seed + m - 1, shuffle=cfg.shuffle,
        )
        try:
            out = solve_vector(s.n_symbols, inc, order_cfg)
        except EntropyCascadeError as err:
            err.order = m
            raise
        factors.append(out.vector)
        steps.append(OrderStep(m, inc, s.targets[m - 1], out.report))
    return CascadeBuild(FactoredJointDistribution(tuple(factors)), tuple(steps))


def build_from_schedule(s: EntropySchedule, cfg: SolverConfig | None = None) -> FactoredJointDistribution:
    """Solve one conditional vector per schedule increment and cascade them."""
    return build_with_reports(s, cfg).distribution


def materialize(
    f: FactoredJointDistribution, cap: int = DEFAULT_MATERIALIZATION_CAP
) -> DenseJointTensor:
    """Expand to the explicit N^k tensor, multiplying factors left to right."""
    required = f.n_entries
    if required > cap:
        raise MaterializationTooLarge(required, cap)
    out = f.factors[0].probs
    for v in f.factors[1:]:
        out = np.multiply.outer(out, v.probs)
    return DenseJointTensor(f.order, f.n_symbols, out.reshape(-1))


def entry_at(f: FactoredJointDistribution, index: Sequence[int]) -> float:
    """One joint probability without materializing; bit-identical to :func:`materialize`."""
    index = tuple(index)
    if len(index) != f.order:
        raise IndexOutOfBounds(f"index has length {len(index)}, distribution has order {f.order}")
    n = f.n_symbols
    for pos, i in enumerate(index):
        if not 0 <= i < n:
            raise IndexOutOfBounds(f"index component {pos} = {i} outside [0, {n})")
    p = f.factors[0].probs[index[0]]
    for v, i in zip(f.factors[1:], index[1:]):
        p = p * v.probs[i]
    return float(p)


def marginal(t: DenseJointTensor, axis: int) -> ProbabilityVector:
    """Sum out every axis except ``axis``."""
    if not 0 <= axis < t.order:
        raise AxisOutOfBounds(f"axis {axis} outside [0, {t.order})")
    others = tuple(a for a in range(t.order) if a != axis)
    if not others:
        return ProbabilityVector(t.entries.copy())
    # Strided reductions are not pairwise; extended precision keeps the
    # marginal normalized to 1e-12 for tensors of 1e6+ entries.
    p = t.array.astype(np.longdouble).sum(axis=others).astype(np.float64)
    # A point-mass marginal can round to 1 + ulp.
    return ProbabilityVector(np.minimum(p, 1.0))

