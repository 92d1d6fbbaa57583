"""Command-line interface: ``flatvirtual <subcommand> ...``.

Exit codes: 0 success, 1 fuzz violations found, 2 parse error,
3 validation error, 4 state cap exceeded, 5 non-generic curve.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from .diagram import (
    DiagramSyntaxError,
    component_count,
    forget,
    load_diagram,
    serialize_diagram,
    validate,
    writhe,
)
from .moves import fuzz_invariance
from .phimap import CurveError, CurveSyntaxError, NonGenericError, load_curve, phi, phi_torus, restricted_eligible
from .statesum import DEFAULT_CAP, StateCapExceeded, flat_virtual_jones, state_table

EXIT_VIOLATION = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CAP = 4
EXIT_GENERICITY = 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _emit(args, text: str, record: dict) -> None:
    if args.format == "records":
        print(json.dumps(record, sort_keys=True))
    else:
        print(text)


def _read_diagram(path: str):
    try:
        d = load_diagram(path)
    except DiagramSyntaxError as e:
        raise CliError(f"{path}: {e}", EXIT_PARSE) from None
    except OSError as e:
        raise CliError(f"{path}: {e.strerror}", EXIT_PARSE) from None
    report = validate(d)
    if not report.ok:
        raise CliError(f"{path}: invalid diagram\n{report}", EXIT_VALIDATION)
    return d


def _invariant(args, d) -> str:
    try:
        return str(flat_virtual_jones(d, workers=args.workers, cap=args.cap))
    except StateCapExceeded as e:
        raise CliError(str(e), EXIT_CAP) from None


def _print_table(args, d) -> None:
    try:
        rows = state_table(d, cap=args.cap)
    except StateCapExceeded as e:
        raise CliError(str(e), EXIT_CAP) from None
    for row in rows:
        bits = " ".join(f"{cid}:{'A' if b == 0 else 'B'}" for cid, b in row.state.items())
        c = row.counts
        _emit(
            args,
            f"{bits}  alpha={c.alpha} beta={c.beta} even={c.gamma_even} odd={c.gamma_odd}  {row.contribution}",
            {
                "state": {str(k): v for k, v in row.state.items()},
                "alpha": c.alpha,
                "beta": c.beta,
                "gamma_even": c.gamma_even,
                "gamma_odd": c.gamma_odd,
                "contribution": str(row.contribution),
            },
        )


def cmd_invariant(args) -> int:
    d = _read_diagram(args.diagram)
    if args.table:
        _print_table(args, d)
    x = _invariant(args, d)
    _emit(args, x, {"file": args.diagram, "invariant": x})
    return 0


def cmd_phi(args) -> int:
    try:
        curve, group = load_curve(args.curve)
        d = phi(curve, group) if curve.space == "cylinder" else phi_torus(curve, group)
    except CurveSyntaxError as e:
        raise CliError(f"{args.curve}: {e}", EXIT_PARSE) from None
    except NonGenericError as e:
        raise CliError(f"{args.curve}: {e}", EXIT_GENERICITY) from None
    except CurveError as e:
        raise CliError(f"{args.curve}: {e}", EXIT_PARSE) from None
    except OSError as e:
        raise CliError(f"{args.curve}: {e.strerror}", EXIT_PARSE) from None
    orders = " ".join(map(str, group.orders))
    comments = [f"phi of {os.path.basename(args.curve)} ({curve.space}, group {orders})"]
    eligible = restricted_eligible(curve, group)
    if eligible:
        comments.append("restricted-eligible")
    text = serialize_diagram(d, comments=comments)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    x = _invariant(args, d) if args.invariant else None
    if args.format == "records":
        rec = {"diagram": text, "restricted_eligible": eligible}
        if x is not None:
            rec["invariant"] = x
        print(json.dumps(rec, sort_keys=True))
    else:
        if not args.output:
            sys.stdout.write(text)
        if x is not None:
            print(x)
    return 0


def cmd_fuzz(args) -> int:
    seeds = range(args.seed, args.seed + args.trials)
    run = partial(fuzz_invariance, steps=args.steps, restricted=args.restricted, cap=args.max_crossings)
    if args.workers > 1 and args.trials > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            reports = list(pool.map(run, seeds, chunksize=max(1, args.trials // (4 * args.workers))))
    else:
        reports = [run(s) for s in seeds]
    bad = [r for r in reports if not r.ok]
    for r in bad:
        if args.format == "records":
            print(json.dumps({"seed": r.seed, "violations": r.violations, "repro": r.reproduction()}))
        else:
            print(r)
    moves = sum(len(r.log) for r in reports)
    mode = "restricted" if args.restricted else "unrestricted"
    _emit(
        args,
        f"{args.trials} trials, {moves} moves ({mode}): "
        + ("no violations" if not bad else f"{len(bad)} trial(s) with violations"),
        {"trials": args.trials, "moves": moves, "restricted": args.restricted, "failed_trials": len(bad)},
    )
    if args.verbose and args.format == "text":
        for r in reports:
            print(r)
    return EXIT_VIOLATION if bad else 0


def cmd_forget(args) -> int:
    d = forget(_read_diagram(args.diagram))
    text = serialize_diagram(d)
    if args.format == "records":
        print(json.dumps({"diagram": text}))
    else:
        sys.stdout.write(text)
    return 0


def cmd_components(args) -> int:
    n = component_count(_read_diagram(args.diagram))
    _emit(args, str(n), {"components": n})
    return 0


def cmd_writhe(args) -> int:
    w = writhe(_read_diagram(args.diagram))
    _emit(args, str(w), {"writhe": w})
    return 0


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "records"), default="text")
    common.add_argument("--cap", type=_nonneg, default=DEFAULT_CAP, help="max classical crossings for the state sum")
    common.add_argument("--workers", type=_positive, default=os.cpu_count() or 1)

    p = argparse.ArgumentParser(prog="flatvirtual", description="Flat-virtual Jones polynomial toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("invariant", parents=[common], help="print the invariant of a diagram file")
    s.add_argument("diagram")
    s.add_argument("--table", action="store_true", help="also print every state's contribution")
    s.set_defaults(func=cmd_invariant)

    s = sub.add_parser("phi", parents=[common], help="diagram of a curve file")
    s.add_argument("curve")
    s.add_argument("--invariant", action="store_true")
    s.add_argument("-o", "--output", help="write the diagram here instead of stdout")
    s.set_defaults(func=cmd_phi)

    s = sub.add_parser("fuzz", parents=[common], help="random move sequences checking invariance")
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--steps", type=_nonneg, default=50)
    s.add_argument("--trials", type=_positive, default=100)
    s.add_argument("--restricted", action="store_true")
    s.add_argument("--max-crossings", type=_positive, default=12)
    s.add_argument("-v", "--verbose", action="store_true", help="print every trial's full report")
    s.set_defaults(func=cmd_fuzz)

    for name, func, text in (
        ("forget", cmd_forget, "turn every classical crossing flat"),
        ("components", cmd_components, "number of components"),
        ("writhe", cmd_writhe, "sum of classical signs"),
    ):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("diagram")
        s.set_defaults(func=func)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
