"""Exit criteria for the package, one test per criterion.

Tolerances are fixed here; a summary line per criterion is printed at the end
of the pytest run.
"""

import functools
import math
import operator
import time
from fractions import Fraction

import numpy as np
import pytest

from entropy_cascade import (
    DenseJointTensor,
    EntropySchedule,
    NoConvergence,
    ProbabilityVector,
    SolverConfig,
    SolverMethod,
    build_from_schedule,
    cumulative_targets,
    empirical_entropy,
    entry_at,
    joint_entropy_dense,
    joint_entropy_factored,
    marginal,
    materialize,
    sample_tuples,
    shannon_entropy,
    solve_vector,
    validate_schedule,
)
from entropy_cascade.cli import main
from entropy_cascade.serialization import (
    decode,
    encode,
    read_dense,
    read_factored,
    write_dense,
)


def _build_via_cli(tmp_path, capsys, schedule):
    out = tmp_path / "f.json"
    start = time.perf_counter()
    code = main(["build", "--symbols", "10", "--schedule", schedule, "--out", str(out)])
    f = read_factored(out)
    t = materialize(f)
    h = joint_entropy_dense(t)
    elapsed = time.perf_counter() - start
    capsys.readouterr()
    assert code == 0
    return f, t, h, elapsed


def test_criterion_1_worked_example_order_two(tmp_path, capsys):
    f, t, h, elapsed = _build_via_cli(tmp_path, capsys, "2.5,3.2")
    print(f"order 2: {t.entries.size} entries, H = {h!r} bits, {elapsed * 1e3:.1f} ms")
    assert f.order == 2 and t.entries.size == 100
    assert abs(h - 3.2) <= 1e-6
    assert elapsed < 1.0


def test_criterion_2_worked_example_order_three(tmp_path, capsys):
    f, t, h, elapsed = _build_via_cli(tmp_path, capsys, "2.5,3.2,3.8")
    print(f"order 3: {t.entries.size} entries, H = {h!r} bits, {elapsed * 1e3:.1f} ms")
    assert f.order == 3 and t.entries.size == 1000
    assert abs(h - 3.8) <= 1e-6
    assert elapsed < 1.0


def _random_schedules(count=500, seed=20141125):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, 33))
        k = int(rng.integers(1, 6))
        cap = math.log2(n)
        incs = rng.uniform(0, cap, size=k)
        # exercise the closed-form endpoints too
        pick = rng.random(k)
        incs[pick < 0.05] = 0.0
        incs[pick > 0.95] = cap
        s = EntropySchedule(n, tuple(cumulative_targets(incs.tolist())))
        if validate_schedule(s).valid:
            out.append(s)
    return out


@pytest.fixture(scope="module")
def random_builds():
    methods = [SolverMethod.TWO_LEVEL, SolverMethod.EXPONENTIAL_FAMILY]
    return [
        (s, build_from_schedule(s, SolverConfig(method=methods[i % 2])))
        for i, s in enumerate(_random_schedules())
    ]


def test_criterion_3_additivity_suite(random_builds):
    worst_target = worst_sum = 0.0
    for s, f in random_builds:
        t = materialize(f)
        dense = joint_entropy_dense(t)
        del t
        dev_target = abs(dense - s.targets[-1])
        dev_sum = abs(dense - joint_entropy_factored(f))
        assert dev_target <= 1e-8, (s, dense)
        assert dev_sum <= 1e-9 * f.order, (s, dense)
        worst_target = max(worst_target, dev_target)
        worst_sum = max(worst_sum, dev_sum / f.order)
    print(f"{len(random_builds)} schedules: max |dense - H_k| = {worst_target:.2e}, "
          f"max |dense - factored| / order = {worst_sum:.2e}")


def test_criterion_4_solver_sweep():
    rng = np.random.default_rng(4)
    pairs = []
    for _ in range(1000):
        n = int(rng.integers(2, 65))
        pairs.append((n, float(rng.uniform(0, math.log2(n)))))
    tolerances = {
        SolverMethod.TWO_LEVEL: 1e-10,
        SolverMethod.EXPONENTIAL_FAMILY: 1e-10,
        SolverMethod.RANDOM_SEARCH: 1e-8,
    }
    for method, tol in tolerances.items():
        failures = []
        for i, (n, h) in enumerate(pairs):
            cfg = SolverConfig(method=method, tolerance=tol, seed=i)
            try:
                out = solve_vector(n, h, cfg)
            except NoConvergence as err:
                failures.append((n, h, err.residual))
                continue
            assert abs(shannon_entropy(out.vector) - h) <= tol, (method, n, h)
            assert abs(out.vector.probs.sum() - 1.0) <= 1e-12
        print(f"{method.value}: {len(pairs) - len(failures)}/{len(pairs)} within {tol:g} bits; "
              f"non-converged {failures}")
        if method is SolverMethod.RANDOM_SEARCH:
            assert len(failures) <= 0.01 * len(pairs)
        else:
            assert not failures
        for n in range(2, 65):
            lo = solve_vector(n, 0.0, SolverConfig(method=method))
            hi = solve_vector(n, math.log2(n), SolverConfig(method=method))
            assert lo.vector == ProbabilityVector.point_mass(n)
            assert hi.vector == ProbabilityVector.uniform(n)
            assert shannon_entropy(lo.vector) == 0.0 and shannon_entropy(hi.vector) == math.log2(n)
            assert lo.report.residual == hi.report.residual == 0.0
            assert lo.report.iterations == hi.report.iterations == 0


def test_criterion_5_marginal_identity(random_builds):
    checked = 0
    worst = 0.0
    for _, f in random_builds:
        if f.n_entries > 10**6:
            continue
        t = materialize(f)
        for m in range(f.order):
            dev = float(np.max(np.abs(marginal(t, m).probs - f.factors[m].probs)))
            assert dev <= 1e-9
            worst = max(worst, dev)
        checked += 1
    print(f"{checked} distributions checked, max per-entry deviation {worst:.2e}")
    assert checked > 0


def test_criterion_6_statistical_end_to_end():
    f = build_from_schedule(EntropySchedule(10, (2.5, 3.2)))
    a = sample_tuples(f, 10**6, seed=6)
    b = sample_tuples(f, 10**6, seed=6)
    assert a == b
    h = empirical_entropy(a)
    print(f"empirical plug-in entropy {h:.5f} bits from 1e6 tuples")
    assert abs(h - 3.2) <= 0.01


def test_criterion_7_factored_scalability(monkeypatch):
    def no_dense(*args, **kwargs):
        raise AssertionError("materialization attempted")

    monkeypatch.setattr(DenseJointTensor, "__post_init__", no_dense)
    increments = [2.5, 0.7, 0.6, 1.1, 0.3, 2.0, 0.9, 1.5, 0.05, 3.0, 0.4, 1.2]
    s = EntropySchedule(10, tuple(cumulative_targets(increments)))
    timings = []
    for _ in range(5):
        start = time.perf_counter()
        f = build_from_schedule(s)
        h = joint_entropy_factored(f)
        timings.append(time.perf_counter() - start)
    print(f"order {f.order}, {f.n_entries:.0e} nominal entries, H = {h!r}, best {min(timings) * 1e3:.2f} ms")
    assert f.order == 12 and f.n_entries == 10**12
    assert abs(h - s.targets[-1]) <= 12 * 1e-10
    assert min(timings) < 0.010

    rng = np.random.default_rng(7)
    for _ in range(200):
        idx = tuple(int(i) for i in rng.integers(0, 10, size=12))
        p = entry_at(f, idx)
        terms = [f.factors[m].probs[i] for m, i in enumerate(idx)]
        assert p == functools.reduce(operator.mul, terms)
        exact = functools.reduce(operator.mul, map(Fraction, terms))
        assert abs(Fraction(p) - exact) <= exact * Fraction(12, 2**52)


def test_criterion_8_round_trip(tmp_path, capsys):
    f = build_from_schedule(EntropySchedule(10, (2.5, 3.2, 3.8)),
                            SolverConfig(method="random_search", shuffle=True, seed=8))
    t = materialize(f)
    objects = [
        EntropySchedule(10, (2.5, 3.2, 3.8)),
        f.factors[1],
        f,
        t,
        solve_vector(10, 0.7, SolverConfig(method="exponential_family")).report,
    ]
    for fmt in ("decimal", "hex"):
        for obj in objects:
            back = decode(encode(obj, fmt))
            assert type(back) is type(obj) and back == obj
            assert encode(back, fmt) == encode(obj, fmt)
    for fmt in ("indexed_csv", "flat_binary"):
        path = tmp_path / f"dense.{fmt}"
        write_dense(t, path, fmt)
        assert read_dense(path) == t
        assert np.array_equal(read_dense(path).entries.view(np.uint64), t.entries.view(np.uint64))

    src = tmp_path / "f.json"
    src.write_text(encode(f))
    runs = []
    for i in range(2):
        out = tmp_path / f"export{i}.bin"
        assert main(["export", "--in", str(src), "--format", "flat_binary", "--out", str(out)]) == 0
        runs.append(out.read_bytes())
    capsys.readouterr()
    assert runs[0] == runs[1]
