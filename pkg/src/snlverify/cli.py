"""Command-line front end: generate, verify, replay, sweep, bench.

Exit status: 0 Trivial / ProvedTrivial, 1 NonTrivial, 2 Incomplete /
Inconclusive, 3 invalid input (bad dims, out-of-range labels, size limit,
malformed documents), 4 usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import report as rep
from . import serialize
from .constructions import ARITY, BUILDERS, StateSet, build, build_theorem4
from .errors import ValidationError
from .replay import Mode, ReplayVerdict, overall, replay
from .tensor import MeasuredSet
from .verifier import DEFAULT_REL_TOL, THREADS_ENV, Verdict, default_threads, verify_strongest

EXIT_OK, EXIT_NONTRIVIAL, EXIT_INCOMPLETE, EXIT_INVALID, EXIT_USAGE = 0, 1, 2, 3, 4

log = logging.getLogger("snlverify")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims_arg(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace("x", ",").split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _rel_tol(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("rel-tol must lie in (0, 1)")
    return value


def _add_selector(p: argparse.ArgumentParser, allow_input: bool = True) -> None:
    p.add_argument("construction", nargs="?", choices=sorted(BUILDERS),
                   help="shipped construction")
    p.add_argument("--d", type=int, help="local dimension for t1 / t3")
    p.add_argument("--dims", type=_dims_arg, help="comma-separated dimensions for t2 / t4")
    p.add_argument("--literal", action="store_true",
                   help="t4 only: keep the short B36 range (k <= d2 - 1)")
    if allow_input:
        p.add_argument("--input", type=Path, help="StateSet JSON instead of a construction")


def _params(args) -> tuple[int, ...]:
    arity = ARITY[args.construction]
    if arity == 0:
        if args.d is not None or args.dims is not None:
            raise UsageError(f"{args.construction} takes no dimensions")
        return ()
    if arity == 1:
        if args.d is None:
            raise UsageError(f"{args.construction} needs --d")
        return (args.d,)
    if args.dims is None:
        raise UsageError(f"{args.construction} needs --dims with {arity} values")
    if len(args.dims) != arity:
        raise UsageError(f"{args.construction} needs {arity} dimensions, got {len(args.dims)}")
    return args.dims


def _load_set(args) -> StateSet:
    if getattr(args, "input", None) is not None:
        if args.construction is not None:
            raise UsageError("give either a construction or --input, not both")
        return serialize.load_stateset(args.input)
    if args.construction is None:
        raise UsageError("a construction or --input is required")
    params = _params(args)
    if args.literal:
        if args.construction != "t4":
            raise UsageError("--literal applies to t4 only")
        return build_theorem4(*params, literal=True)
    return build(args.construction, params)


def _parties(s: StateSet, wanted: Sequence[int] | None) -> list[int]:
    if not wanted:
        return list(range(s.n_parties))
    for p in wanted:
        if not 0 <= p < s.n_parties:
            raise ValidationError(f"party {p} outside 0..{s.n_parties - 1}")
    return list(wanted)


# -- commands ------------------------------------------------------------------

def cmd_generate(args) -> int:
    s = _load_set(args)
    text = serialize.dump(serialize.stateset_to_json(s), args.out)
    if args.out is None:
        sys.stdout.write(text)
    if args.grid is not None:
        Path(args.grid).write_text(rep.render_grid(s))
    if args.plot is not None:
        rep.plot_grid(s, args.plot)
    print(f"# {s.name}\tdims={'x'.join(map(str, s.dims))}\tstates={len(s)}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    s = _load_set(args)
    result = verify_strongest(s, args.rel_tol, args.threads)
    for line in rep.summary_lines(result):
        print(line)
    if args.report is not None:
        serialize.dump(serialize.wrap("VerifyReport", result.to_json()), args.report)
    if args.plot is not None:
        rep.plot_spectra(result, args.plot)
    return {Verdict.TRIVIAL: EXIT_OK, Verdict.NONTRIVIAL: EXIT_NONTRIVIAL}.get(result.verdict, EXIT_INCOMPLETE)


def cmd_replay(args) -> int:
    s = _load_set(args)
    results = [replay(s, MeasuredSet.complement_of(p, s.n_parties), args.mode)
               for p in _parties(s, args.party)]
    print("measured\tmode\tD\toffdiag_zero\toffdiag_total\tdiag_classes\tsteps\tverdict")
    for r in results:
        sm = r.summary()
        print("\t".join(str(x) for x in (
            ",".join(map(str, r.measured)), sm["mode"], sm["D"], sm["offdiag_zero"],
            sm["offdiag_total"], sm["diag_classes"], sm["steps"], sm["verdict"])))
    verdict = overall(results)
    print(f"overall\t{args.mode}\t\t\t\t\t\t{verdict.value}")
    if args.trace is not None:
        doc = {"construction": s.name, "dims": list(s.dims), "verdict": verdict.value,
               "bipartitions": [r.to_json() for r in results]}
        serialize.dump(serialize.wrap("ProofTrace", doc), args.trace)
    if args.text is not None:
        Path(args.text).write_text("\n".join(r.render_text(args.diff_appendix) for r in results))
    return EXIT_OK if verdict == ReplayVerdict.PROVED else EXIT_INCOMPLETE


def cmd_sweep(args) -> int:
    rows = rep.sweep(args.family, args.min, args.max, args.checks, args.rel_tol, args.threads)
    text = rep.sweep_csv(rows)
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    if args.plot is not None:
        rep.plot_sweep(rows, args.plot)
    failed = [r for r in rows if r.numeric_verdict not in ("", Verdict.TRIVIAL.value)
              or r.replay_verdict not in ("", ReplayVerdict.PROVED.value)]
    return EXIT_OK if not failed else EXIT_INCOMPLETE


def cmd_bench(args) -> int:
    cases = []
    for spec in args.case:
        name, _, params = spec.partition(":")
        if name not in BUILDERS:
            raise UsageError(f"unknown construction {name!r} in case {spec!r}")
        cases.append((name, _dims_arg(params) if params else ()))
    rows = rep.bench(cases, args.rel_tol, args.mode)
    text = serialize.dump(serialize.wrap("Bench", {"rows": rows}), args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="snlv", description="Build and certify strongest-nonlocal state sets.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a construction as StateSet JSON")
    _add_selector(p, allow_input=False)
    p.add_argument("--out", type=Path, help="JSON path (default: stdout)")
    p.add_argument("--grid", type=Path, help="text grid path")
    p.add_argument("--plot", type=Path, help="PNG grid path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="numerical triviality check on every single-party complement")
    _add_selector(p)
    p.add_argument("--rel-tol", type=_rel_tol, default=DEFAULT_REL_TOL)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or 1)")
    p.add_argument("--report", type=Path, help="JSON report path")
    p.add_argument("--plot", type=Path, help="PNG of the singular-value tails")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("replay", help="exact lemma-based proof replay")
    _add_selector(p)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.FIXPOINT.value)
    p.add_argument("--party", type=int, action="append",
                   help="replay only the complement of this party (repeatable)")
    p.add_argument("--trace", type=Path, help="trace JSON path")
    p.add_argument("--text", type=Path, help="readable proof text path")
    p.add_argument("--diff-appendix", action="store_true",
                   help="annotate stages with the matching appendix step names")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("sweep", help="cardinality table over a dimension range")
    p.add_argument("--family", choices=["t1", "t2", "t3", "t4"], required=True)
    p.add_argument("--min", type=int, default=2)
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--checks", choices=rep.CHECKS, default="none")
    p.add_argument("--rel-tol", type=_rel_tol, default=DEFAULT_REL_TOL)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    p.add_argument("--plot", type=Path, help="PNG cardinality comparison")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="timings per construction and complement as JSON")
    p.add_argument("case", nargs="+", help="construction[:dims], e.g. t1:3 t4:2,3,3,3 ex1")
    p.add_argument("--rel-tol", type=_rel_tol, default=DEFAULT_REL_TOL)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.FIXPOINT.value)
    p.add_argument("--out", type=Path, help="JSON path (default: stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        args.threads = default_threads()
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"snlv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"snlv: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"snlv: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
