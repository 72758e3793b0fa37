"""WDL generation by backward induction anchored on sub-endgame tables."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels as K
from ._tables import ALIAS, DRAW, INVALID, LOSS, UNKNOWN, WIN
from .index import layout, space_size
from .material import parse_signature
from .tablebase import CrossLinks, SubModelSet, WdlTable

__all__ = ["GenerationStats", "generate", "SignatureRejected"]


class SignatureRejected(ValueError):
    """Signature outside the modelled position space (pawns on both sides)."""


@dataclass
class GenerationStats:
    signature: str
    passes: int
    labeled_per_pass: list
    draws_by_default: int
    invalid: int
    wall_time: float
    terminal_count: int
    capture_count: int
    quiet_count: int
    method: str = "frontier"
    wins: int = 0
    draws: int = 0
    losses: int = 0

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "GenerationStats":
        return cls(**d)


def check_signature(s) -> None:
    s = parse_signature(s)
    if s.two_sided_pawns:
        raise SignatureRejected(
            f"{s.name}: pawns on both sides would need en-passant state, which is not modelled")


def generate(s, sub: SubModelSet | None = None, method: str = "frontier") -> tuple:
    """Label every code of ``s``; returns ``(WdlTable, GenerationStats)``.

    ``method="frontier"`` propagates level by level from newly labelled
    codes; ``method="scan"`` re-scans every unknown code each pass.  Both
    produce the same labels and rounds.
    """
    s = parse_signature(s)
    check_signature(s)
    sub = sub if sub is not None else SubModelSet()
    sub.require_closed_over(s)
    t0 = time.perf_counter()
    lay = layout(s).as_tuple()
    xl = CrossLinks.build(s, sub).as_tuple()
    size = space_size(s)
    labels = np.empty(size, np.uint8)
    rounds = np.zeros(size, np.uint16)
    cat = np.zeros(size, np.uint8)
    K.prepare_generation(labels, rounds, cat, lay, xl)
    unknown = int(np.count_nonzero(labels == UNKNOWN))
    queue = np.empty(max(unknown, 1), np.int64)
    if method == "frontier":
        counters = np.zeros(size, np.uint16)
        passes = K.solve_frontier(labels, rounds, counters, queue, cat, lay, xl)
        del counters
    elif method == "scan":
        passes = K.solve_scan(labels, rounds, queue, cat, lay, xl)
    else:
        raise ValueError(f"unknown generation method {method!r}")
    del queue
    K.copy_aliases(labels, rounds, cat, lay)
    assert not np.any((labels == UNKNOWN) | (labels == ALIAS))
    wall = time.perf_counter() - t0

    counts = np.bincount(cat, minlength=5)
    decided = (labels == WIN) | (labels == LOSS)
    terminal = (cat == K.CAT_MATE) | (cat == K.CAT_STALEMATE)
    per_pass = np.bincount(rounds[decided & ~terminal], minlength=passes + 1)
    per_pass[0] = int(np.count_nonzero(terminal))
    draws_default = int(np.count_nonzero((labels == DRAW) & ~terminal))
    label_counts = np.bincount(labels, minlength=4)
    stats = GenerationStats(
        signature=s.name,
        passes=int(passes),
        labeled_per_pass=[int(x) for x in per_pass[: passes + 1]],
        draws_by_default=draws_default,
        invalid=int(label_counts[INVALID]),
        wall_time=wall,
        terminal_count=int(counts[K.CAT_MATE] + counts[K.CAT_STALEMATE]),
        capture_count=int(counts[K.CAT_CAPTURE]),
        quiet_count=int(counts[K.CAT_QUIET]),
        method=method,
        wins=int(label_counts[WIN]),
        draws=int(label_counts[DRAW]),
        losses=int(label_counts[LOSS]),
    )
    return WdlTable(s, labels, rounds), stats
