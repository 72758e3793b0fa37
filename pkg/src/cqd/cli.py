"""``cqd`` command-line front end.

Reports go to stdout, diagnostics to stderr.  Exit status is 0 on success,
1 when a verification finds violations, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

from .chain import (
    DEFAULT_PIECE_CAP, MAX_PIECE_CAP, ChainVerificationError, PieceCapError, build_chain,
    load_manifest, targets_up_to,
)
from .generate import SignatureRejected, generate
from .material import SignatureError, canonicalize_for_storage, chain_order, parse_signature
from .report import FORMATS, render_report, render_stats, write_figures
from .tablebase import MissingSubModelError, SubModelSet, TableFormatError, load, save
from .verify import (
    TableStructureError, all_draw_table, mutate, mutated_indices, set_workers,
    verify_decomposed, verify_full, verify_quiet_only,
)

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_VIOLATIONS, EXIT_USAGE = 0, 1, 2

# numba probes an old system TBB on import of parallel kernels; it falls back quietly otherwise.
warnings.filterwarnings("ignore", message="The TBB threading layer")
TB_ENV = "CQD_TB_DIR"

log = logging.getLogger("cqd")


class UsageError(Exception):
    pass


def _stored(sig: str):
    return canonicalize_for_storage(parse_signature(sig))[0]


def _tb(args) -> Path:
    tb = args.tb or os.environ.get(TB_ENV)
    if not tb:
        raise UsageError(f"no table directory; pass --tb or set {TB_ENV}")
    return Path(tb)


def _sub_models(sig, tb: Path) -> SubModelSet:
    """Every table ``sig`` depends on, read from ``tb``."""
    sub = SubModelSet()
    for dep in chain_order([sig]):
        if dep.name == sig.name:
            continue
        path = tb / f"{dep.name}.cqdt"
        if not path.exists():
            raise MissingSubModelError(f"sub-model file {path} is missing; build the chain first")
        sub.add(load(path))
    return sub


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_gen(args) -> int:
    sig = _stored(args.signature)
    tb = _tb(args)
    tb.mkdir(parents=True, exist_ok=True)
    set_workers(args.workers)
    table, stats = generate(sig, _sub_models(sig, tb), method=args.method)
    path = tb / f"{sig.name}.cqdt"
    checksum = save(table, path)
    log.info("wrote %s (crc32 %08x)", path, checksum)
    _emit(stats.to_json())
    return EXIT_OK


_VERIFIERS = {"decomposed": verify_decomposed, "full": verify_full, "quiet-only": verify_quiet_only}


def cmd_verify(args) -> int:
    sig = _stored(args.signature)
    tb = _tb(args)
    path = Path(args.table) if args.table else tb / f"{sig.name}.cqdt"
    table = load(path)
    if table.name != sig.name:
        raise UsageError(f"{path} holds {table.name}, not {sig.name}")
    report = _VERIFIERS[args.mode](table, _sub_models(sig, tb), workers=args.workers)
    _emit(report.to_json())
    return EXIT_OK if report.total_v == 0 else EXIT_VIOLATIONS


def cmd_chain(args) -> int:
    if args.targets:
        targets = [t for t in args.targets.split(",") if t]
    else:
        targets = targets_up_to(args.max_pieces)
    cap = MAX_PIECE_CAP if args.allow_five else DEFAULT_PIECE_CAP

    def progress(e):
        r = e.verification_reports
        log.info("%s: gen %.2fs, total_v decomposed=%d full=%d quiet-only=%d", e.canonical_name,
                 e.generation_stats.wall_time, r["decomposed"].total_v, r["full"].total_v,
                 r["quiet-only"].total_v)

    try:
        manifest = build_chain(targets, args.out, workers=args.workers, resume=args.resume,
                               piece_cap=cap, progress=progress)
    except ChainVerificationError as e:
        sys.stderr.write(str(e) + "\n")
        return EXIT_VIOLATIONS
    for e in manifest.entries:
        r = e.verification_reports
        sys.stdout.write(
            f"{e.canonical_name}\t{e.checksum:08x}\tverified={e.verified}\t"
            f"total_v={r['decomposed'].total_v}/{r['full'].total_v}/{r['quiet-only'].total_v}\n")
    return EXIT_OK


def cmd_stats(args) -> int:
    sys.stdout.write(render_stats(load_manifest(_tb(args)), args.format))
    return EXIT_OK


def cmd_report(args) -> int:
    tb = _tb(args)
    manifest = load_manifest(tb)
    fig_dir = Path(args.figures) if args.figures else tb / "figures"
    paths = write_figures(manifest, fig_dir)
    sys.stdout.write(render_report(manifest, args.format, [str(p) for p in paths]))
    return EXIT_OK


def cmd_mutate(args) -> int:
    sig = _stored(args.signature)
    table = load(_tb(args) / f"{sig.name}.cqdt")
    m = mutate(table, args.flips, args.seed)
    save(m, args.out)
    _emit({"signature": sig.name, "seed": args.seed, "flips": args.flips,
           "indices": [int(i) for i in mutated_indices(table, m)], "out": str(args.out)})
    return EXIT_OK


def cmd_alldraw(args) -> int:
    sig = _stored(args.signature)
    save(all_draw_table(sig, fix_terminals=args.fix_terminals), args.out)
    _emit({"signature": sig.name, "fix_terminals": args.fix_terminals, "out": str(args.out)})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cqd", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sp = p.add_subparsers(dest="command", required=True)

    def tb_arg(q):
        q.add_argument("--tb", help=f"table directory (default: ${TB_ENV})")

    def workers_arg(q):
        q.add_argument("--workers", type=int, default=None, help="worker threads (default: all cores)")

    q = sp.add_parser("gen", help="generate one table from the sub-tables in --tb")
    q.add_argument("signature")
    tb_arg(q)
    workers_arg(q)
    q.add_argument("--method", choices=("frontier", "scan"), default="frontier")
    q.set_defaults(func=cmd_gen)

    q = sp.add_parser("verify", help="verify one table")
    q.add_argument("signature")
    q.add_argument("--mode", choices=tuple(_VERIFIERS), default="decomposed")
    tb_arg(q)
    q.add_argument("--table", help="table file to check instead of <tb>/<name>.cqdt")
    workers_arg(q)
    q.set_defaults(func=cmd_verify)

    q = sp.add_parser("chain", help="build and verify a dependency closure")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--targets", help="comma-separated signatures")
    g.add_argument("--max-pieces", type=int, help="every signature up to this many pieces")
    q.add_argument("--out", required=True)
    q.add_argument("--resume", action="store_true")
    q.add_argument("--allow-five", action="store_true", help=f"raise the piece cap to {MAX_PIECE_CAP}")
    workers_arg(q)
    q.set_defaults(func=cmd_chain)

    q = sp.add_parser("stats", help="per-endgame category and violation table")
    tb_arg(q)
    q.add_argument("--format", choices=FORMATS, default="markdown")
    q.set_defaults(func=cmd_stats)

    q = sp.add_parser("report", help="stats plus timing section and figures")
    tb_arg(q)
    q.add_argument("--format", choices=FORMATS, default="markdown")
    q.add_argument("--figures", help="directory for PNG figures (default: <tb>/figures)")
    q.set_defaults(func=cmd_report)

    q = sp.add_parser("mutate", help="write a copy of a table with labels flipped")
    q.add_argument("signature")
    q.add_argument("--flips", type=int, required=True)
    q.add_argument("--seed", type=int, required=True)
    tb_arg(q)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_mutate)

    q = sp.add_parser("alldraw", help="write an all-draw table")
    q.add_argument("signature")
    q.add_argument("--fix-terminals", action="store_true")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_alldraw)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, SignatureError, SignatureRejected, PieceCapError, MissingSubModelError,
            TableFormatError, TableStructureError, FileNotFoundError, PermissionError,
            ValueError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        sys.stderr.write(f"cqd: error: {msg}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
