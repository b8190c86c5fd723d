"""Command-line front end.

Every command prints one JSON object on standard output. Exit codes:
0 success, 2 validation or parse failure, 3 solver non-convergence,
4 materialization cap exceeded, 5 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .cascade import DEFAULT_MATERIALIZATION_CAP, build_with_reports, marginal, materialize
from .entropy_core import (
    DenseJointTensor,
    EntropySchedule,
    FactoredJointDistribution,
    ProbabilityVector,
    SolverMethod,
    joint_entropy_dense,
    joint_entropy_factored,
    shannon_entropy,
    validate_schedule,
)
from .errors import (
    EntropyCascadeError,
    InvariantViolation,
    MaterializationTooLarge,
    NoConvergence,
    ParseError,
    TargetOutOfRange,
)
from .sampler import empirical_entropy, sample_tuples
from .serialization import DenseFormat, load_any, read_factored, write_dense, write_factored, write_vector
from .solver import DEFAULT_TOLERANCE, SolverConfig, solve_vector

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_CONVERGENCE = 3
EXIT_TOO_LARGE = 4
EXIT_MISMATCH = 5

VERIFY_TOLERANCE = 1e-6


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        method=SolverMethod(args.method), tolerance=args.tolerance,
        max_iterations=args.max_iterations, seed=args.seed, shuffle=args.shuffle,
    )


def _parse_schedule(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise CommandError(EXIT_INVALID, f"schedule {text!r} is not a comma-separated list of numbers")
    if not values:
        raise CommandError(EXIT_INVALID, "schedule is empty")
    return values


def cmd_solve(args) -> int:
    cfg = _solver_config(args)
    try:
        out = solve_vector(args.symbols, args.entropy, cfg)
    except TargetOutOfRange as err:
        raise CommandError(EXIT_INVALID, str(err))
    report = out.report.to_dict()
    report.update(n_symbols=args.symbols, target=args.entropy)
    if args.out:
        write_vector(out.vector, args.out, args.float_format)
        report["out"] = args.out
    else:
        report["probs"] = out.vector.probs.tolist()
    _emit(report)
    return EXIT_OK


def cmd_build(args) -> int:
    try:
        schedule = EntropySchedule(args.symbols, _parse_schedule(args.schedule))
    except InvariantViolation as err:
        raise CommandError(EXIT_INVALID, str(err))
    check = validate_schedule(schedule)
    if not check.valid:
        raise CommandError(EXIT_INVALID, "; ".join(f"order {v.order}: {v.message}" for v in check.violations))
    built = build_with_reports(schedule, _solver_config(args))
    f = built.distribution
    if args.dense and f.n_entries > args.cap:
        # Fail before writing anything.
        raise MaterializationTooLarge(f.n_entries, args.cap)
    orders = []
    cumulative = 0.0
    for step in built.steps:
        cumulative = math.fsum([cumulative, step.report.achieved_entropy])
        orders.append({
            "order": step.order,
            "target": step.target,
            "increment": step.increment,
            "factor_entropy": step.report.achieved_entropy,
            "joint_entropy": cumulative,
            "residual": step.report.residual,
            "iterations": step.report.iterations,
        })
    report = {
        "n_symbols": f.n_symbols,
        "order": f.order,
        "method": args.method,
        "joint_entropy": joint_entropy_factored(f),
        "orders": orders,
    }
    if args.out:
        write_factored(f, args.out, args.float_format)
        report["out"] = args.out
    if args.dense:
        t = materialize(f, args.cap)
        write_dense(t, args.dense, args.dense_format)
        report["dense"] = args.dense
        report["dense_entries"] = int(t.entries.size)
        report["dense_joint_entropy"] = joint_entropy_dense(t)
    _emit(report)
    return EXIT_OK


def cmd_verify(args) -> int:
    obj = load_any(args.input)
    if isinstance(obj, ProbabilityVector):
        obj = FactoredJointDistribution((obj,))
    report: dict = {}
    if isinstance(obj, FactoredJointDistribution):
        factored = joint_entropy_factored(obj)
        report.update(kind="factored", order=obj.order, n_symbols=obj.n_symbols)
        if obj.n_entries <= args.cap:
            t = materialize(obj, args.cap)
            dense = joint_entropy_dense(t)
            marginals = [shannon_entropy(marginal(t, m)) for m in range(t.order)]
        else:
            dense = None
            marginals = [shannon_entropy(v) for v in obj.factors]
        computed = dense if dense is not None else factored
    elif isinstance(obj, DenseJointTensor):
        report.update(kind="dense", order=obj.order, n_symbols=obj.n_symbols)
        dense = joint_entropy_dense(obj)
        marginals = [shannon_entropy(marginal(obj, m)) for m in range(obj.order)]
        # Sum of marginal entropies equals the joint entropy iff the tensor is a product.
        factored = math.fsum(marginals)
        computed = dense
    else:
        raise CommandError(EXIT_INVALID, f"cannot verify a {type(obj).__name__} artifact")
    report.update(
        joint_entropy=dense,
        factored_entropy=factored,
        difference=None if dense is None else dense - factored,
        marginal_entropies=marginals,
    )
    code = EXIT_OK
    if args.target is not None:
        deviation = computed - args.target
        report.update(target=args.target, deviation=deviation, tolerance=VERIFY_TOLERANCE)
        report["match"] = abs(deviation) <= VERIFY_TOLERANCE
        if not report["match"]:
            code = EXIT_MISMATCH
    _emit(report)
    return code


def cmd_sample(args) -> int:
    if args.count < 1:
        raise CommandError(EXIT_INVALID, f"--count must be >= 1, got {args.count}")
    f = read_factored(args.input)
    batch = sample_tuples(f, args.count, args.seed)
    lines = "\n".join(",".join(map(str, row)) for row in batch.tuples.tolist()) + "\n"
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(lines)
    report = {"count": batch.count, "order": batch.order, "n_symbols": batch.n_symbols,
              "seed": args.seed, "out": args.out}
    if args.report_entropy:
        report["empirical_entropy"] = empirical_entropy(batch)
        report["joint_entropy"] = joint_entropy_factored(f)
    _emit(report)
    return EXIT_OK


def cmd_export(args) -> int:
    f = read_factored(args.input)
    t = materialize(f, args.cap)
    write_dense(t, args.out, args.format)
    _emit({"format": args.format, "out": args.out, "order": t.order,
           "n_symbols": t.n_symbols, "entries": int(t.entries.size)})
    return EXIT_OK


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=[m.value for m in SolverMethod], default="two_level")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE, help="bits")
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shuffle", action="store_true", help="randomly permute each solved vector")
    p.add_argument("--float-format", choices=["decimal", "hex"], default="decimal")


def _add_cap(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cap", type=int, default=DEFAULT_MATERIALIZATION_CAP,
                   help="maximum number of dense entries (default %(default)s)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entropy-cascade",
        description="Build probability vectors and joint distributions with target entropies.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="probability vector with a given entropy")
    p.add_argument("--symbols", type=int, required=True)
    p.add_argument("--entropy", type=float, required=True, help="target entropy in bits")
    p.add_argument("--out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("build", help="joint distribution from an entropy schedule")
    p.add_argument("--symbols", type=int, required=True)
    p.add_argument("--schedule", required=True, help="comma-separated joint entropies H1,H2,...")
    p.add_argument("--out")
    p.add_argument("--dense", help="also write the materialized tensor here")
    p.add_argument("--dense-format", choices=[f.value for f in DenseFormat], default="indexed_csv")
    _add_solver_flags(p)
    _add_cap(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="recompute entropies of a stored distribution")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--target", type=float)
    _add_cap(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="draw tuples from a factored distribution")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="tuple file, one comma-separated tuple per line")
    p.add_argument("--report-entropy", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("export", help="materialize a factored distribution to a dense file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=[f.value for f in DenseFormat], default="indexed_csv")
    p.add_argument("--out", required=True)
    _add_cap(p)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandError as err:
        code, msg = err.code, str(err)
    except NoConvergence as err:
        code, msg = EXIT_NO_CONVERGENCE, str(err)
    except MaterializationTooLarge as err:
        code, msg = EXIT_TOO_LARGE, str(err)
    except (ParseError, InvariantViolation, EntropyCascadeError, ValueError) as err:
        code, msg = EXIT_INVALID, str(err)
    except OSError as err:
        code, msg = EXIT_INVALID, str(err)
    print(f"entropy-cascade: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
