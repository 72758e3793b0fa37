"""Verification of WDL tables.

Three verifiers share one contract (a table plus verified sub-models in, a
:class:`VerificationReport` out):

* :func:`verify_decomposed` classifies every position as terminal, capture
  or quiet and checks each once, attributing violations to categories.
* :func:`verify_full` is the baseline: an unrelated move walk that checks
  consistency at every position with no category dispatch.
* :func:`verify_quiet_only` fixes terminal and (validated) capture labels
  as boundary conditions and recomputes every quiet label from them.
"""

from __future__ import annotations

import enum
import itertools
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numba
import numpy as np

from . import _kernels as K
from . import _mailbox as M
from ._tables import ALIAS, DRAW, INVALID, LOSS, UNKNOWN, WIN
from .index import decode, encode, layout
from .material import capture_successor_signatures, canonicalize_for_storage, parse_signature
from .rules import Category, Kind, Position, apply_move, classify, is_material_changing, legal_moves
from .tablebase import CrossLinks, Label, SubModelSet, WdlTable, get_label, lookup_cross

__all__ = [
    "ViolationKind", "Violation", "VerificationReport", "TableStructureError",
    "check_consistency", "verify_decomposed", "verify_full", "verify_quiet_only",
    "mutate", "all_draw_table", "category_array", "set_workers",
    "affected_codes", "MutationResult", "mutation_trial", "mutation_harness",
]

CHUNK = 1 << 16


class TableStructureError(ValueError):
    """Invalid labels on legal positions or real labels on illegal codes."""


class ViolationKind(enum.Enum):
    TERMINAL_MISMATCH = "TerminalMismatch"
    WIN_NO_LOSS_SUCCESSOR = "WinNoLossSuccessor"
    LOSS_HAS_NON_WIN_SUCCESSOR = "LossHasNonWinSuccessor"
    DRAW_HAS_LOSS_SUCCESSOR = "DrawHasLossSuccessor"
    DRAW_NO_DRAW_SUCCESSOR = "DrawNoDrawSuccessor"


_KIND_OF_CODE = {
    K.V_TERMINAL: ViolationKind.TERMINAL_MISMATCH,
    K.V_WIN: ViolationKind.WIN_NO_LOSS_SUCCESSOR,
    K.V_LOSS: ViolationKind.LOSS_HAS_NON_WIN_SUCCESSOR,
    K.V_DRAW_LOSS: ViolationKind.DRAW_HAS_LOSS_SUCCESSOR,
    K.V_DRAW_NODRAW: ViolationKind.DRAW_NO_DRAW_SUCCESSOR,
}
_CATEGORY_OF_CODE = {
    K.CAT_MATE: Category.CHECKMATE,
    K.CAT_STALEMATE: Category.STALEMATE,
    K.CAT_CAPTURE: Category.CAPTURE,
    K.CAT_QUIET: Category.QUIET,
}


@dataclass(frozen=True)
class Violation:
    index: int
    category: Category
    kind: ViolationKind

    def __post_init__(self):
        if (self.kind == ViolationKind.TERMINAL_MISMATCH) != self.category.is_terminal:
            raise ValueError(f"{self.kind.value} is inconsistent with category {self.category.value}")

    def to_json(self, signature=None) -> dict:
        d = {"index": self.index, "category": self.category.value, "kind": self.kind.value}
        if signature is not None:
            p = decode(signature, self.index)
            d["fen"] = p.fen() if p is not None else None
        return d


@dataclass
class VerificationReport:
    signature: str
    mode: str
    position_counts: dict
    fractions: dict
    violations: dict
    estimated_speedup: float
    consistency_checks_performed: int
    wall_time: float
    label_differences: int = 0
    samples: list = field(default_factory=list)

    @property
    def total_v(self) -> int:
        return self.violations["total_v"]

    @property
    def valid_count(self) -> int:
        return self.consistency_checks_performed

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "VerificationReport":
        return cls(**d)


def set_workers(workers: Optional[int]) -> None:
    """Bound the number of threads used by the parallel scans."""
    if workers is None:
        return
    numba.set_num_threads(max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS)))


def _sample_positions(sig, indices, kinds=None, categories=None, limit=10) -> list:
    out = []
    for n, i in enumerate(indices[:limit]):
        p = decode(sig, int(i))
        entry = {"index": int(i), "fen": p.fen() if p is not None else None}
        if categories is not None:
            entry["category"] = categories[n]
        if kinds is not None:
            entry["kind"] = kinds[n]
        out.append(entry)
    return out


# ---------------------------------------------------------------------------
# Single-position check, straight from the rules module.

def check_consistency(p: Position, lp, t: WdlTable, sub: SubModelSet) -> Optional[Violation]:
    lp = Label(lp)
    if lp == Label.INVALID:
        raise ValueError("check_consistency needs a W/D/L label")
    idx = encode(p, t.signature)
    cat = classify(p)
    if cat.is_terminal:
        want = Label.LOSS if cat == Category.CHECKMATE else Label.DRAW
        return None if lp == want else Violation(idx, cat, ViolationKind.TERMINAL_MISMATCH)
    succ = []
    for m in legal_moves(p):
        q = apply_move(p, m)
        if is_material_changing(p, m):
            succ.append(lookup_cross(sub, q))
        else:
            succ.append(get_label(t, encode(q, t.signature)))
    kind = None
    if lp == Label.WIN and Label.LOSS not in succ:
        kind = ViolationKind.WIN_NO_LOSS_SUCCESSOR
    elif lp == Label.LOSS and any(x != Label.WIN for x in succ):
        kind = ViolationKind.LOSS_HAS_NON_WIN_SUCCESSOR
    elif lp == Label.DRAW:
        if Label.LOSS in succ:
            kind = ViolationKind.DRAW_HAS_LOSS_SUCCESSOR
        elif Label.DRAW not in succ:
            kind = ViolationKind.DRAW_NO_DRAW_SUCCESSOR
    return None if kind is None else Violation(idx, cat, kind)


# ---------------------------------------------------------------------------
# Decomposed verifier.

def _decomposed_codes(t: WdlTable, sub: SubModelSet, indices=None) -> np.ndarray:
    lay = layout(t.signature).as_tuple()
    xl = CrossLinks.build(t.signature, sub).as_tuple()
    if indices is None:
        out = np.empty(t.space_size, np.uint8)
        K.decomposed_scan(t.labels, out, lay, xl, CHUNK)
    else:
        indices = np.asarray(indices, np.int64)
        out = np.empty(indices.size, np.uint8)
        K.decomposed_at(indices, t.labels, out, lay, xl)
    return out


def category_array(t: WdlTable, sub: SubModelSet) -> np.ndarray:
    """Per-code category (CAT_* codes from the decomposed scan)."""
    return _decomposed_codes(t, sub) >> 3


def _raise_struct(sig, codes, idx_source):
    bad = np.nonzero((codes & 7) == K.V_STRUCT)[0]
    if bad.size:
        where = idx_source[bad] if idx_source is not None else bad
        raise TableStructureError(
            f"{sig.name}: {bad.size} codes carry labels inconsistent with legality "
            f"(first index {int(where[0])})")


def _report_from_codes(sig, mode, codes, idx_source, wall, space_size) -> VerificationReport:
    _raise_struct(sig, codes, idx_source)
    cats = codes >> 3
    kinds = codes & 7
    cat_counts = np.bincount(cats, minlength=5)
    violated = kinds != K.V_NONE
    v_by_cat = np.bincount(cats[violated], minlength=5)
    term = int(cat_counts[K.CAT_MATE] + cat_counts[K.CAT_STALEMATE])
    capt = int(cat_counts[K.CAT_CAPTURE])
    quiet = int(cat_counts[K.CAT_QUIET])
    invalid = int(cat_counts[K.CAT_INVALID]) + (space_size - codes.size)
    valid = term + capt + quiet
    terminal_v = int(v_by_cat[K.CAT_MATE] + v_by_cat[K.CAT_STALEMATE])
    capture_v = int(v_by_cat[K.CAT_CAPTURE])
    quiet_v = int(v_by_cat[K.CAT_QUIET])
    f_c = capt / valid if valid else 0.0
    bad = np.nonzero(violated)[0][:10]
    samples = _sample_positions(
        sig, idx_source[bad] if idx_source is not None else bad,
        kinds=[_KIND_OF_CODE[int(k)].value for k in kinds[bad]],
        categories=[_CATEGORY_OF_CODE[int(c)].value for c in cats[bad]],
    )
    return VerificationReport(
        signature=sig.name,
        mode=mode,
        position_counts={"terminal": term, "capture": capt, "quiet": quiet, "invalid": invalid},
        fractions={
            "term_pct": 100.0 * term / valid if valid else 0.0,
            "capt_pct": 100.0 * f_c,
            "quiet_pct": 100.0 * quiet / valid if valid else 0.0,
        },
        violations={"terminal_v": terminal_v, "capture_v": capture_v, "quiet_v": quiet_v,
                    "total_v": terminal_v + capture_v + quiet_v},
        estimated_speedup=1.0 / (1.0 - f_c) if f_c < 1.0 else float("inf"),
        consistency_checks_performed=valid,
        wall_time=wall,
        samples=samples,
    )


def verify_decomposed(t: WdlTable, sub: Optional[SubModelSet] = None, workers=None,
                      indices=None) -> VerificationReport:
    """Classify every position and check it once; violations per category.

    With ``indices`` only those codes are checked (counts then cover only
    that subset).
    """
    sub = sub if sub is not None else SubModelSet()
    set_workers(workers)
    t0 = time.perf_counter()
    codes = _decomposed_codes(t, sub, indices)
    wall = time.perf_counter() - t0
    src = None if indices is None else np.asarray(indices, np.int64)
    return _report_from_codes(t.signature, "decomposed", codes, src, wall,
                              codes.size if indices is not None else t.space_size)


# ---------------------------------------------------------------------------
# Full baseline.

def _material_key(pieces) -> int:
    key = 0
    for color, kind in pieces:
        if kind != Kind.KING:
            key += 1 << (3 * (int(color) * 5 + int(kind) - 1))
    return key


def _groups(sig) -> list:
    out = []
    for pc in sig.slots():
        g = (int(pc.color), int(pc.kind))
        if g not in out:
            out.append(g)
    return out


def _full_context(t: WdlTable, sub: SubModelSet) -> tuple:
    sig = t.signature
    slots = sig.slots()
    own_groups_list = _groups(sig)
    own_groups = (
        np.array([int(pc.color) for pc in slots], np.int64),
        np.array([int(pc.kind) for pc in slots], np.int64),
        np.array([g[0] for g in own_groups_list], np.int64),
        np.array([g[1] for g in own_groups_list], np.int64),
        len(own_groups_list),
        64 ** sig.piece_count,
    )
    own_key = _material_key((pc.color, pc.kind) for pc in slots)
    entries = []
    offsets = {}
    arrays = []
    total = 0
    for succ in sorted(capture_successor_signatures(sig), key=lambda s: s.name):
        table, transform = sub.table_for(succ)
        rep = table.signature
        if rep.name not in offsets:
            offsets[rep.name] = total
            arrays.append(table.labels)
            total += table.labels.size
        key = _material_key((pc.color, pc.kind) for pc in succ.slots())
        entries.append((key, offsets[rep.name], int(transform.flip_colors),
                        int(transform.mirror_ranks), _groups(rep), 64 ** rep.piece_count))
    entries.sort()
    n = len(entries)
    kmax = max(sig.piece_count, 1)
    r_gcolor = np.zeros((n, kmax), np.int64)
    r_gkind = np.zeros((n, kmax), np.int64)
    for e, entry in enumerate(entries):
        for g, (c, kd) in enumerate(entry[4]):
            r_gcolor[e, g] = c
            r_gkind[e, g] = kd
    routes = (
        np.array([e[0] for e in entries], np.int64),
        np.array([e[1] for e in entries], np.int64),
        np.array([e[2] for e in entries], np.int64),
        np.array([e[3] for e in entries], np.int64),
        r_gcolor,
        r_gkind,
        np.array([len(e[4]) for e in entries], np.int64),
        np.array([e[5] for e in entries], np.int64),
        np.concatenate(arrays) if arrays else np.zeros(1, np.uint8),
    )
    return own_groups, own_key, routes


def verify_full(t: WdlTable, sub: Optional[SubModelSet] = None, workers=None,
                indices=None) -> VerificationReport:
    """Baseline retrograde check at every position; only totals are reported."""
    sub = sub if sub is not None else SubModelSet()
    set_workers(workers)
    t0 = time.perf_counter()
    own_groups, own_key, routes = _full_context(t, sub)
    k = t.signature.piece_count
    if indices is None:
        out = np.empty(t.space_size, np.uint8)
        M.full_scan(t.labels, out, own_groups, own_key, routes, k, CHUNK)
        src = None
    else:
        src = np.asarray(indices, np.int64)
        out = np.empty(src.size, np.uint8)
        M.full_at(src, t.labels, out, own_groups, own_key, routes, k)
    wall = time.perf_counter() - t0
    counts = np.bincount(out, minlength=3)
    if counts[M.R_STRUCT]:
        first = int(np.nonzero(out == M.R_STRUCT)[0][0])
        raise TableStructureError(
            f"{t.name}: {int(counts[M.R_STRUCT])} codes carry labels inconsistent with legality "
            f"(first index {first if src is None else int(src[first])})")
    total = int(counts[M.R_VIOLATION])
    # With no structural errors, Invalid labels sit exactly on the illegal codes.
    checked = int(np.count_nonzero((t.labels if src is None else t.labels[src]) != INVALID))
    bad = np.nonzero(out == M.R_VIOLATION)[0][:10]
    size = t.space_size if src is None else src.size
    return VerificationReport(
        signature=t.name,
        mode="full",
        # The baseline never classifies positions, so per-category fields stay empty.
        position_counts={"terminal": None, "capture": None, "quiet": None, "invalid": size - checked},
        fractions={"term_pct": None, "capt_pct": None, "quiet_pct": None},
        violations={"terminal_v": None, "capture_v": None, "quiet_v": None, "total_v": total},
        estimated_speedup=None,
        consistency_checks_performed=checked,
        wall_time=wall,
        samples=_sample_positions(t.signature, bad if src is None else src[bad]),
    )


# ---------------------------------------------------------------------------
# Quiet-only reconstruction.

def verify_quiet_only(t: WdlTable, sub: Optional[SubModelSet] = None, workers=None) -> VerificationReport:
    """Recompute quiet labels from terminal and capture boundaries; count disagreements.

    Terminal and capture positions are first checked like the decomposed
    verifier does; their violations are reported under their categories and
    the quiet count is the number of quiet codes whose recomputed label
    differs from ``t``.
    """
    sub = sub if sub is not None else SubModelSet()
    set_workers(workers)
    t0 = time.perf_counter()
    sig = t.signature
    lay_obj = layout(sig)
    lay = lay_obj.as_tuple()
    xl = CrossLinks.build(sig, sub).as_tuple()
    codes = np.empty(t.space_size, np.uint8)
    K.decomposed_scan(t.labels, codes, lay, xl, CHUNK)
    _raise_struct(sig, codes, None)
    cats = codes >> 3
    kinds = codes & 7

    work = t.labels.copy()
    work[cats == K.CAT_MATE] = LOSS
    work[cats == K.CAT_STALEMATE] = DRAW
    quiet = cats == K.CAT_QUIET
    work[quiet] = UNKNOWN
    if lay_obj.has_dups:
        K.mark_aliases(work, lay)
    rounds = np.zeros(t.space_size, np.uint16)
    counters = np.zeros(t.space_size, np.uint16)
    queue = np.empty(max(int(np.count_nonzero(work == UNKNOWN)), 1), np.int64)
    scratch_cat = cats.astype(np.uint8)
    K.solve_frontier(work, rounds, counters, queue, scratch_cat, lay, xl)
    del counters, queue
    K.copy_aliases(work, rounds, scratch_cat, lay)
    diff = quiet & (work != t.labels)
    wall = time.perf_counter() - t0

    cat_counts = np.bincount(cats, minlength=5)
    boundary_bad = (kinds != K.V_NONE) & ~quiet
    v_by_cat = np.bincount(cats[boundary_bad], minlength=5)
    term = int(cat_counts[K.CAT_MATE] + cat_counts[K.CAT_STALEMATE])
    capt = int(cat_counts[K.CAT_CAPTURE])
    n_quiet = int(cat_counts[K.CAT_QUIET])
    valid = term + capt + n_quiet
    terminal_v = int(v_by_cat[K.CAT_MATE] + v_by_cat[K.CAT_STALEMATE])
    capture_v = int(v_by_cat[K.CAT_CAPTURE])
    n_diff = int(np.count_nonzero(diff))
    f_c = capt / valid if valid else 0.0
    return VerificationReport(
        signature=sig.name,
        mode="quiet-only",
        position_counts={"terminal": term, "capture": capt, "quiet": n_quiet,
                         "invalid": int(cat_counts[K.CAT_INVALID])},
        fractions={
            "term_pct": 100.0 * term / valid if valid else 0.0,
            "capt_pct": 100.0 * f_c,
            "quiet_pct": 100.0 * n_quiet / valid if valid else 0.0,
        },
        violations={"terminal_v": terminal_v, "capture_v": capture_v, "quiet_v": n_diff,
                    "total_v": terminal_v + capture_v + n_diff},
        estimated_speedup=1.0 / (1.0 - f_c) if f_c < 1.0 else float("inf"),
        consistency_checks_performed=valid,
        wall_time=wall,
        label_differences=n_diff,
        samples=_sample_positions(sig, np.nonzero(diff)[0][:10]),
    )


# ---------------------------------------------------------------------------
# Adversarial tables.

def mutate(t: WdlTable, flips: int, seed: int) -> WdlTable:
    """Rotate ``flips`` distinct valid labels W->D->L->W, chosen by ``seed``."""
    if flips < 1:
        raise ValueError("flips must be at least 1")
    valid = np.flatnonzero(t.labels != INVALID)
    if flips > valid.size:
        raise ValueError(f"cannot flip {flips} labels; {t.name} has {valid.size} valid codes")
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(valid, size=flips, replace=False))
    labels = t.labels.copy()
    labels[chosen] = (labels[chosen] + 2) % 3
    return t.with_labels(labels)


def mutated_indices(t: WdlTable, m: WdlTable) -> np.ndarray:
    return np.flatnonzero(t.labels != m.labels)


def all_draw_table(s, fix_terminals: bool = False) -> WdlTable:
    """Every legal code Draw; optionally terminals overwritten by their rule value."""
    s = parse_signature(s)
    lay = layout(s).as_tuple()
    xl = CrossLinks.structural(s).as_tuple()
    size = 2 * 64 ** s.piece_count
    labels = np.empty(size, np.uint8)
    rounds = np.zeros(size, np.uint16)
    cat = np.zeros(size, np.uint8)
    K.prepare_generation(labels, rounds, cat, lay, xl)
    labels[labels == UNKNOWN] = DRAW
    K.copy_aliases(labels, rounds, cat, lay)
    if not fix_terminals:
        labels[labels != INVALID] = DRAW
    return WdlTable(s, labels)


# ---------------------------------------------------------------------------
# Mutation harness.

def affected_codes(t: WdlTable, changed) -> np.ndarray:
    """Codes whose verdict can depend on the labels at ``changed``.

    A code's verdict reads its own label and its successors' labels, so only
    the changed codes and their same-table predecessors (including every
    ordering of identical pieces) can change verdict.
    """
    changed = np.asarray(changed, np.int64)
    lay_obj = layout(t.signature)
    preds = K.predecessors_of_many(changed, lay_obj.as_tuple())
    codes = np.unique(np.concatenate([changed, preds]))
    if lay_obj.has_dups:
        codes = _with_twins(codes, lay_obj)
    return codes


def _with_twins(codes: np.ndarray, lay_obj) -> np.ndarray:
    k = len(lay_obj.kinds)
    digits = np.empty((codes.size, k), np.int64)
    rest = codes.copy()
    for i in range(k - 1, -1, -1):
        digits[:, i] = rest & 63
        rest >>= 6
    stm = rest
    runs = []
    i = 0
    while i < k:
        j = i + 1
        while j < k and lay_obj.dup_prev[j]:
            j += 1
        runs.append(list(range(i, j)))
        i = j
    variants = [digits]
    for run in runs:
        if len(run) < 2:
            continue
        grown = []
        for perm in itertools.permutations(run):
            for d in variants:
                e = d.copy()
                e[:, run] = d[:, list(perm)]
                grown.append(e)
        variants = grown
    out = []
    for d in variants:
        ix = stm.copy()
        for i in range(k):
            ix = ix * 64 + d[:, i]
        out.append(ix)
    return np.unique(np.concatenate(out))


@dataclass(frozen=True)
class MutationResult:
    seed: int
    flipped: tuple
    decomposed_total_v: int
    full_total_v: int
    rechecked: int

    @property
    def agree(self) -> bool:
        return self.decomposed_total_v == self.full_total_v

    def to_json(self) -> dict:
        return asdict(self)


def mutation_trial(t: WdlTable, sub: SubModelSet, seed: int, flips: int = 1,
                   base_totals: tuple = (0, 0)) -> MutationResult:
    """Mutate ``t`` and score the mutant under both verifiers.

    Only :func:`affected_codes` are re-checked; every other verdict is the
    same as for ``t``, whose whole-table totals are ``base_totals``
    (decomposed, full).
    """
    m = mutate(t, flips, seed)
    flipped = mutated_indices(t, m)
    codes = affected_codes(t, flipped)
    totals = []
    for f, base in zip((verify_decomposed, verify_full), base_totals):
        before = f(t, sub, indices=codes).total_v
        after = f(m, sub, indices=codes).total_v
        totals.append(base - before + after)
    return MutationResult(seed, tuple(int(i) for i in flipped), totals[0], totals[1], int(codes.size))


def mutation_harness(t: WdlTable, sub: SubModelSet, trials: int = 100, seed: int = 0,
                     flips: int = 1, base_totals: tuple = (0, 0)) -> list:
    """``trials`` seeded mutations (seeds ``seed``, ``seed+1``, ...)."""
    return [mutation_trial(t, sub, seed + n, flips, base_totals) for n in range(trials)]
