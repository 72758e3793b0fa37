"""Bottom-up chain builder: generate, verify and persist tables in dependency order."""

from __future__ import annotations

import datetime as _dt
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from . import __version__
from .generate import GenerationStats, check_signature, generate
from .material import (
    canonicalize_for_storage, capture_successor_signatures, chain_order, parse_signature,
)
from .tablebase import SubModelSet, WdlTable, load, save
from .verify import VerificationReport, set_workers, verify_decomposed, verify_full, verify_quiet_only

__all__ = [
    "ManifestEntry", "ChainManifest", "ChainVerificationError", "PieceCapError",
    "build_chain", "load_manifest", "load_chain", "stats_table", "targets_up_to",
    "MANIFEST_NAME", "DEFAULT_PIECE_CAP", "MAX_PIECE_CAP",
]

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
DEFAULT_PIECE_CAP = 4
MAX_PIECE_CAP = 5
VERIFY_MODES = ("decomposed", "full", "quiet-only")


class ChainVerificationError(RuntimeError):
    """A table failed one of the verifiers; the chain stops there."""

    def __init__(self, signature: str, reports: dict):
        self.signature = signature
        self.reports = reports
        lines = [f"{signature} failed verification:"]
        for mode, r in reports.items():
            lines.append(f"  {mode}: total_v={r.total_v} {r.violations}")
        failing = [r for r in reports.values() if r.total_v > 0]
        for s in failing[0].samples[:10]:
            lines.append(f"    index {s['index']}: {s.get('kind', 'LabelDifference')} {s['fen']}")
        super().__init__("\n".join(lines))


class PieceCapError(ValueError):
    pass


@dataclass
class ManifestEntry:
    canonical_name: str
    file_path: str
    checksum: int
    space_size: int
    generation_stats: GenerationStats
    verification_reports: dict
    dependencies: list = field(default_factory=list)
    verified: bool = False

    def to_json(self) -> dict:
        d = asdict(self)
        d["generation_stats"] = self.generation_stats.to_json()
        d["verification_reports"] = {m: r.to_json() for m, r in self.verification_reports.items()}
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ManifestEntry":
        d = dict(d)
        d["generation_stats"] = GenerationStats.from_json(d["generation_stats"])
        d["verification_reports"] = {
            m: VerificationReport.from_json(r) for m, r in d["verification_reports"].items()}
        return cls(**d)


@dataclass
class ChainManifest:
    entries: list = field(default_factory=list)
    created_at: str = ""
    tool_version: str = __version__

    def names(self) -> list:
        return [e.canonical_name for e in self.entries]

    def entry(self, name: str) -> ManifestEntry:
        rep = canonicalize_for_storage(parse_signature(name))[0].name
        for e in self.entries:
            if e.canonical_name == rep:
                return e
        raise KeyError(f"{name} is not in the manifest")

    def to_json(self) -> dict:
        return {"entries": [e.to_json() for e in self.entries],
                "created_at": self.created_at, "tool_version": self.tool_version}

    @classmethod
    def from_json(cls, d: dict) -> "ChainManifest":
        return cls([ManifestEntry.from_json(e) for e in d["entries"]],
                   d["created_at"], d["tool_version"])

    def write(self, out_dir) -> None:
        path = Path(out_dir) / MANIFEST_NAME
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")
        tmp.replace(path)


def load_manifest(out_dir) -> ChainManifest:
    return ChainManifest.from_json(json.loads((Path(out_dir) / MANIFEST_NAME).read_text()))


def load_chain(tb_dir, upto=None) -> SubModelSet:
    """Verified tables from ``tb_dir`` (all, or those ``upto`` needs)."""
    manifest = load_manifest(tb_dir)
    wanted = None if upto is None else {s.name for s in chain_order([upto])}
    sub = SubModelSet()
    for e in manifest.entries:
        if wanted is not None and e.canonical_name not in wanted:
            continue
        if not e.verified:
            continue
        sub.add(load(Path(tb_dir) / e.file_path))
    return sub


def targets_up_to(max_pieces: int) -> list:
    """Every buildable stored signature with at most ``max_pieces`` pieces."""
    from itertools import combinations_with_replacement

    from .material import MaterialSignature
    from .rules import Kind

    kinds = [Kind.QUEEN, Kind.ROOK, Kind.BISHOP, Kind.KNIGHT, Kind.PAWN]
    names = set()
    for extra in range(0, max_pieces - 1):
        for combo in combinations_with_replacement(kinds, extra):
            for split in range(extra + 1):
                s = MaterialSignature((Kind.KING, *combo[:split]), (Kind.KING, *combo[split:]))
                if s.two_sided_pawns:
                    continue
                names.add(canonicalize_for_storage(s)[0].name)
    return sorted(names)


def _check_cap(order, piece_cap: int) -> None:
    if piece_cap > MAX_PIECE_CAP:
        raise PieceCapError(f"piece cap {piece_cap} exceeds the supported maximum {MAX_PIECE_CAP}")
    for s in order:
        if s.piece_count > piece_cap:
            raise PieceCapError(f"{s.name} has {s.piece_count} pieces; cap is {piece_cap}")


def build_chain(targets: Iterable, out_dir, workers: Optional[int] = None, resume: bool = False,
                piece_cap: int = DEFAULT_PIECE_CAP, progress=None) -> ChainManifest:
    """Build, verify and persist the dependency closure of ``targets``.

    Every table is checked by all three verifiers before it may serve as a
    sub-model; the first failure raises :class:`ChainVerificationError`.
    With ``resume`` a table whose file matches its manifest checksum is
    loaded instead of regenerated (it is still re-verified).
    """
    targets = [parse_signature(t) for t in targets]
    for t in targets:
        check_signature(t)
    order = chain_order(targets)
    _check_cap(order, piece_cap)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"{out_dir} is not writable")
    set_workers(workers)

    previous = {}
    if resume and (out_dir / MANIFEST_NAME).exists():
        previous = {e.canonical_name: e for e in load_manifest(out_dir).entries}

    manifest = ChainManifest(created_at=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    sub = SubModelSet()
    for s in order:
        path = out_dir / f"{s.name}.cqdt"
        table, stats = _reuse(previous.get(s.name), path) if resume else (None, None)
        if table is None:
            log.info("generating %s", s.name)
            table, stats = generate(s, sub)
            checksum = save(table, path)
        else:
            log.info("reusing %s", s.name)
            checksum = table.checksum
        reports = {}
        for mode, f in zip(VERIFY_MODES, (verify_decomposed, verify_full, verify_quiet_only)):
            reports[mode] = f(table, sub)
        entry = ManifestEntry(
            canonical_name=s.name,
            file_path=path.name,
            checksum=checksum,
            space_size=table.space_size,
            generation_stats=stats,
            verification_reports=reports,
            dependencies=sorted({canonicalize_for_storage(d)[0].name
                                 for d in capture_successor_signatures(s)}),
            verified=all(r.total_v == 0 for r in reports.values()),
        )
        manifest.entries.append(entry)
        manifest.write(out_dir)
        if progress is not None:
            progress(entry)
        if not entry.verified:
            raise ChainVerificationError(s.name, reports)
        sub.add(table)
    return manifest


def _reuse(prev: Optional[ManifestEntry], path: Path) -> tuple:
    if prev is None or not path.exists():
        return None, None
    try:
        table = load(path)
    except ValueError:
        return None, None
    if table.checksum != prev.checksum:
        return None, None
    return table, prev.generation_stats


# ---------------------------------------------------------------------------
# Per-endgame statistics.

STATS_COLUMNS = ("endgame", "pieces", "valid", "term_pct", "capt_pct", "quiet_pct",
                 "total_v_decomposed", "total_v_full", "total_v_quiet_only")
TIMING_COLUMNS = ("endgame", "t_gen", "t_verify_decomposed", "t_verify_full",
                  "ratio_decomposed", "ratio_full")


def stats_table(manifest: ChainManifest) -> dict:
    """Per-endgame rows, per-piece-count capture fractions, and timings.

    Timings are kept in their own section so the rest is reproducible
    byte for byte.
    """
    rows, timing = [], []
    pooled = {}
    for e in manifest.entries:
        d = e.verification_reports["decomposed"]
        pc = d.position_counts
        valid = d.consistency_checks_performed
        n = parse_signature(e.canonical_name).piece_count
        rows.append({
            "endgame": e.canonical_name,
            "pieces": n,
            "valid": valid,
            "term_pct": round(d.fractions["term_pct"], 2),
            "capt_pct": round(d.fractions["capt_pct"], 2),
            "quiet_pct": round(d.fractions["quiet_pct"], 2),
            "total_v_decomposed": d.total_v,
            "total_v_full": e.verification_reports["full"].total_v,
            "total_v_quiet_only": e.verification_reports["quiet-only"].total_v,
        })
        acc = pooled.setdefault(n, [0, 0, 0, 0])
        acc[0] += 1
        acc[1] += valid
        acc[2] += pc["capture"]
        acc[3] += pc["terminal"]
        t_gen = e.generation_stats.wall_time
        t_dec = d.wall_time
        t_full = e.verification_reports["full"].wall_time
        timing.append({
            "endgame": e.canonical_name,
            "t_gen": round(t_gen, 3),
            "t_verify_decomposed": round(t_dec, 3),
            "t_verify_full": round(t_full, 3),
            "ratio_decomposed": round(t_dec / t_gen, 3) if t_gen > 0 else None,
            "ratio_full": round(t_full / t_gen, 3) if t_gen > 0 else None,
        })
    by_pieces = []
    for n in sorted(pooled):
        count, valid, capt, term = pooled[n]
        by_pieces.append({
            "pieces": n,
            "endgames": count,
            "valid": valid,
            "term_pct": round(100.0 * term / valid, 2) if valid else 0.0,
            "capt_pct": round(100.0 * capt / valid, 2) if valid else 0.0,
            "quiet_pct": round(100.0 * (valid - capt - term) / valid, 2) if valid else 0.0,
        })
    return {"endgames": rows, "by_piece_count": by_pieces, "timings": timing}
