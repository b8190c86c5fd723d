"""Inverse entropy: find a probability vector of length n with entropy h.

The solution set for an interior target is an (n-2)-dimensional manifold, so
each method picks a different point on it. Any of them serves equally well as
a cascade factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy_core import (
    CAPACITY_SLACK,
    ZERO_CUTOFF,
    ProbabilityVector,
    SolverMethod,
    SolverReport,
    shannon_entropy,
)
from .errors import InvariantViolation, NoConvergence, TargetOutOfRange

DEFAULT_TOLERANCE = 1e-10
DEFAULT_BISECTION_ITERATIONS = 200
DEFAULT_SEARCH_ITERATIONS = 100_000
# Consecutive rejections before the random-search step is halved.
REJECTION_WINDOW = 1000


@dataclass(frozen=True)
class SolverConfig:
    method: SolverMethod = SolverMethod.TWO_LEVEL
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int | None = None
    seed: int = 0
    shuffle: bool = False

    def __post_init__(self):
        object.__setattr__(self, "method", SolverMethod(self.method))
        if not self.tolerance > 0:
            raise InvariantViolation(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvariantViolation(f"max_iterations must be >= 1, got {self.max_iterations!r}")

    @property
    def iteration_budget(self) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        if self.method is SolverMethod.RANDOM_SEARCH:
            return DEFAULT_SEARCH_ITERATIONS
        return DEFAULT_BISECTION_ITERATIONS


@dataclass(frozen=True)
class SolveOutcome:
    vector: ProbabilityVector
    report: SolverReport


def _check_target(n: int, h: float) -> float:
    if int(n) != n or n < 2:
        raise TargetOutOfRange(f"alphabet size must be an integer >= 2, got {n!r}")
    cap = math.log2(n)
    if not math.isfinite(h) or h < -CAPACITY_SLACK or h > cap + CAPACITY_SLACK:
        raise TargetOutOfRange(f"target {h!r} bits is outside [0, log2({n}) = {cap:.6f}]")
    return min(max(h, 0.0), cap)


def _endpoint(n: int, h: float, method: SolverMethod) -> SolveOutcome | None:
    """Closed-form answers for h = 0 and h = log2 n; no iteration."""
    if h == 0.0:
        v = ProbabilityVector.point_mass(n)
    elif h == math.log2(n):
        v = ProbabilityVector.uniform(n)
    else:
        return None
    achieved = shannon_entropy(v)
    return SolveOutcome(v, SolverReport(achieved, achieved - h, 0, method))


def _finish(p, h: float, cfg: SolverConfig, method: SolverMethod, iterations: int) -> SolveOutcome:
    v = ProbabilityVector(p)
    achieved = shannon_entropy(v)
    residual = achieved - h
    if abs(residual) > cfg.tolerance:
        raise NoConvergence(
            f"{method.value}: residual {residual:.3e} bits after {iterations} iterations",
            best=v, residual=residual, iterations=iterations,
        )
    return SolveOutcome(v, SolverReport(achieved, residual, iterations, method))


def _xlog2x(x: float) -> float:
    return x * math.log2(x) if x >= ZERO_CUTOFF else 0.0


def two_level_entropy(n: int, spread: float) -> float:
    """Entropy of ``[1 - spread, spread/(n-1), ..., spread/(n-1)]``.

    Strictly increasing in ``spread`` on [0, (n-1)/n], from 0 to log2 n.
    The dominant mass is ``q = 1 - spread``.
    """
    return -_xlog2x(1.0 - spread) - spread * math.log2(spread / (n - 1)) if spread > 0 else 0.0


def two_level_vector(n: int, spread: float) -> np.ndarray:
    p = np.full(n, spread / (n - 1))
    p[0] = 1.0 - spread
    return p


def solve_two_level(n: int, h: float, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Bisection over the two-level family; the solution is unique up to permutation."""
    cfg = cfg or SolverConfig(method=SolverMethod.TWO_LEVEL)
    method = SolverMethod.TWO_LEVEL
    h = _check_target(n, h)
    done = _endpoint(n, h, method)
    if done:
        return done
    # Bisect on the spread 1 - q rather than q: keeps relative precision near q = 1.
    lo, hi = 0.0, (n - 1) / n
    half_tol = 0.5 * cfg.tolerance
    budget = cfg.iteration_budget
    it = 0
    mid = 0.5 * (lo + hi)
    while it < budget:
        it += 1
        mid = 0.5 * (lo + hi)
        res = two_level_entropy(n, mid) - h
        if abs(res) <= half_tol or mid in (lo, hi):
            break
        if res < 0:
            lo = mid
        else:
            hi = mid
    return _finish(two_level_vector(n, mid), h, cfg, method, it)


def exponential_vector(n: int, decay: float) -> np.ndarray:
    w = np.exp(-decay * np.arange(n, dtype=np.float64))
    return w / w.sum()


def solve_exponential_family(n: int, h: float, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Bisection on the decay rate of ``p_i ∝ exp(-decay * i)``."""
    cfg = cfg or SolverConfig(method=SolverMethod.EXPONENTIAL_FAMILY)
    method = SolverMethod.EXPONENTIAL_FAMILY
    h = _check_target(n, h)
    done = _endpoint(n, h, method)
    if done:
        return done
    budget = cfg.iteration_budget
    it = 0
    lo, hi = 0.0, 1.0
    while shannon_entropy(exponential_vector(n, hi)) >= h:
        it += 1
        if it >= budget:
            raise NoConvergence(
                f"exponential_family: no upper bracket for {h} bits after {it} doublings",
                best=ProbabilityVector(exponential_vector(n, hi)), iterations=it,
            )
        lo, hi = hi, 2.0 * hi
    half_tol = 0.5 * cfg.tolerance
    mid = 0.5 * (lo + hi)
    while it < budget:
        it += 1
        mid = 0.5 * (lo + hi)
        res = shannon_entropy(exponential_vector(n, mid)) - h
        if abs(res) <= half_tol or mid in (lo, hi):
            break
        if res > 0:
            lo = mid
        else:
            hi = mid
    return _finish(exponential_vector(n, mid), h, cfg, method, it)


def solve_random_search(n: int, h: float, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Seeded greedy hill-climb by pairwise mass transfers.

    Starts from the two-level solution, scatters it with ``n`` unconditional
    transfers (each at most the smaller of the two masses) so the result
    leaves the two-level family, then accepts a transfer only when it does not
    increase ``|entropy - h|``. The step cap starts at ``0.1 / n`` and halves
    after every 1000 consecutive rejections.
    """
    cfg = cfg or SolverConfig(method=SolverMethod.RANDOM_SEARCH)
    method = SolverMethod.RANDOM_SEARCH
    h = _check_target(n, h)
    done = _endpoint(n, h, method)
    if done:
        return done
    start = solve_two_level(n, h, SolverConfig(tolerance=cfg.tolerance))
    p = start.vector.probs.tolist()
    rng = np.random.default_rng(cfg.seed)
    step = 0.1 / n
    budget = cfg.iteration_budget

    def draws(size):
        a = rng.integers(0, n, size=size)
        b = (a + rng.integers(1, n, size=size)) % n
        return a.tolist(), b.tolist(), rng.random(size).tolist()

    a_s, b_s, u_s = draws(n)
    for a, b, u in zip(a_s, b_s, u_s):
        d = u * min(p[a], p[b], step)
        p[a] -= d
        p[b] += d

    H = -math.fsum(_xlog2x(x) for x in p)
    best_p, best_res = list(p), abs(H - h)
    rejections = 0
    it = 0
    chunk = 4096
    while it < budget and best_res > cfg.tolerance:
        a_s, b_s, u_s = draws(chunk)
        for a, b, u in zip(a_s, b_s, u_s):
            it += 1
            pa, pb = p[a], p[b]
            d = u * min(pa, step)
            new_a, new_b = pa - d, pb + d
            if d > 0.0:
                H_new = H + _xlog2x(pa) + _xlog2x(pb) - _xlog2x(new_a) - _xlog2x(new_b)
            if d > 0.0 and abs(H_new - h) <= abs(H - h):
                p[a], p[b] = new_a, new_b
                H = H_new
                rejections = 0
            else:
                rejections += 1
                if rejections >= REJECTION_WINDOW:
                    step *= 0.5
                    rejections = 0
            # Incremental updates drift; confirm candidates with a full sum.
            if abs(H - h) <= 0.5 * cfg.tolerance or it % REJECTION_WINDOW == 0:
                H = -math.fsum(_xlog2x(x) for x in p)
                res = abs(H - h)
                if res < best_res:
                    best_p, best_res = list(p), res
                if res <= 0.5 * cfg.tolerance:
                    break
            if it >= budget:
                break
        else:
            continue
        break

    arr = np.array(best_p)
    arr /= math.fsum(best_p)
    try:
        return _finish(arr, h, cfg, method, it)
    except InvariantViolation:  # pragma: no cover - mass is conserved by each transfer
        raise NoConvergence("random_search: lost normalization", residual=best_res, iterations=it)


_DISPATCH = {
    SolverMethod.TWO_LEVEL: solve_two_level,
    SolverMethod.EXPONENTIAL_FAMILY: solve_exponential_family,
    SolverMethod.RANDOM_SEARCH: solve_random_search,
}


def solve_vector(n: int, h: float, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Dispatch on ``cfg.method``; optionally apply a seeded permutation."""
    cfg = cfg or SolverConfig()
    out = _DISPATCH[cfg.method](n, h, cfg)
    if cfg.shuffle:
        perm = np.random.default_rng([cfg.seed, 1]).permutation(n)
        out = SolveOutcome(ProbabilityVector(out.vector.probs[perm]), out.report)
    return out
