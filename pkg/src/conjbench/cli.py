"""Command line entry point: build, verify, matrix, export."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .analysis import SizeBoundError, matrix_table, po_matrix, sg_matrix
from .artifacts import CONSTRUCTIONS, ArtifactError, load_build, verify_build, write_build
from .core import is_linear, validate
from .serialize import from_json, to_dot
from .shuffle import shuffle3

log = logging.getLogger("conjbench")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive(name, minimum=1):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if v < minimum:
            raise argparse.ArgumentTypeError(f"{name} must be at least {minimum}")
        return v
    return conv


def _read_structure(path: str):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    try:
        s = from_json(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"bad structure in {path}: {exc}") from exc
    report = validate(s)
    if not report.ok:
        raise UsageError(f"input violates {report.violations[0].axiom}: {report.violations[0].witness}")
    return s


STAGE_DEFAULTS = {"po": 2, "p3": 2, "semigeneric": 2, "bap": 1}


def _build_params(args) -> dict:
    if args.stages is None:
        args.stages = STAGE_DEFAULTS[args.construction]
    if args.construction in ("po", "p3"):
        return {"n_stages": args.stages, "p_copies": args.p_copies, "z_chains": args.z_chains,
                "z_window": args.z_window, "max_params": args.max_params, "pool_pairs": args.pool_pairs}
    if args.construction == "semigeneric":
        return {"n_stages": args.stages, "max_params": args.max_params, "pool_limit": args.pool_limit}
    return {"n_stages": args.stages, "max_params": args.max_params}


def cmd_build(args) -> int:
    if args.construction in ("po", "p3") and args.z_window < 2:
        raise UsageError("z-window must be at least 2")
    if args.construction in ("po", "p3") and args.max_params < 2:
        raise UsageError("max-params must be at least 2 for the poset reductions")
    s = _read_structure(args.input)
    if args.construction == "semigeneric" and not is_linear(s):
        raise UsageError("semigeneric construction needs a linear order")
    params = _build_params(args)
    out = Path(args.out)
    built, manifest = write_build(out, args.construction, s, params, args.seed, args.shuffled)
    sizes = [len(lv) for lv in built.levels]
    print(json.dumps({"out": str(out), "construction": args.construction, "stage_sizes": sizes}))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        report = verify_build(Path(args.build), args.suite)
    except ArtifactError as exc:
        raise UsageError(str(exc)) from exc
    text = json.dumps(report, sort_keys=True, indent=1)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    print(text)
    for row in report["checks"]:
        if not row["ok"]:
            log.error("violated: %s", row["check"])
    return EXIT_OK if report["ok"] else EXIT_FAIL


def cmd_matrix(args) -> int:
    if args.construction == "po":
        from .reduction_po import TruncationParams
        args.stages = args.stages or 2
        params = TruncationParams(args.stages, args.p_copies, args.z_chains, args.z_window,
                                  args.max_params, args.pool_pairs).check()
        report = po_matrix(args.n, params)
    else:
        try:
            args.stages = args.stages or 2
            report = sg_matrix(args.n, args.stages, args.max_params, args.pool_limit, args.bound)
        except SizeBoundError as exc:
            raise UsageError(str(exc)) from exc
    report["seed"] = args.seed
    Path(args.out).write_text(json.dumps(report, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    table = matrix_table(report)
    if args.table:
        Path(args.table).write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return EXIT_OK if report["agreement"] and all(report["recovered_ok"]) else EXIT_FAIL


def cmd_export(args) -> int:
    try:
        loaded = load_build(Path(args.build))
    except ArtifactError as exc:
        raise UsageError(str(exc)) from exc
    stages = loaded["stages"]
    if not 0 <= args.stage < len(stages):
        raise UsageError(f"stage {args.stage} out of range 0..{len(stages) - 1}")
    payload = stages[args.stage]
    if args.format == "json":
        text = json.dumps(payload, sort_keys=True)
    else:
        s = from_json(payload["structure"])
        if args.shuffled:
            s = shuffle3(s)
        text = to_dot(s, name=f"stage_{args.stage}")
    if args.out:
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return EXIT_OK


def _add_params(p):
    p.add_argument("--stages", type=_positive("stages"), default=None)
    p.add_argument("--max-params", type=_positive("max-params"), default=2)
    p.add_argument("--p-copies", type=_positive("p-copies", 2), default=3)
    p.add_argument("--z-chains", type=_positive("z-chains"), default=3)
    p.add_argument("--z-window", type=int, default=3, help="half-width of each chain window (>= 2)")
    p.add_argument("--pool-pairs", type=_positive("pool-pairs"), default=2)
    p.add_argument("--pool-limit", type=_positive("pool-limit"), default=8)
    p.add_argument("--seed", type=int, default=0)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conjbench", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="run a construction and write stage artifacts")
    b.add_argument("--construction", choices=CONSTRUCTIONS, required=True)
    b.add_argument("--input", required=True, help="structure JSON")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--shuffled", action="store_true", help="also store shuffled digraphs (p3)")
    _add_params(b)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="re-check invariants of a build directory")
    v.add_argument("build")
    v.add_argument("--suite", default="all",
                   help="all, or a substring of check names (parity, orbit, recovery, z_support, ...)")
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("matrix", help="conjugacy agreement matrix over small inputs")
    m.add_argument("--construction", choices=("po", "semigeneric"), required=True)
    m.add_argument("--n", type=_positive("n", 0), required=True, help="largest input size")
    m.add_argument("--out", required=True)
    m.add_argument("--table")
    m.add_argument("--bound", type=_positive("bound"), default=10)
    _add_params(m)
    m.set_defaults(func=cmd_matrix)

    e = sub.add_parser("export", help="print one stage as JSON or DOT")
    e.add_argument("build")
    e.add_argument("--stage", type=int, default=0)
    e.add_argument("--format", choices=("json", "dot"), default="dot")
    e.add_argument("--shuffled", action="store_true")
    e.add_argument("--out")
    e.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
