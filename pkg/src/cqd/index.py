"""Dense mixed-radix indexing of the positions of one material signature.

Code layout: ``stm * 64**k + sum(square_i * 64**(k-1-i))`` with pieces in
signature slot order (White first, K,Q,R,B,N,P within a side).  Codes whose
pieces overlap, whose pawns sit on a back rank, or whose side not to move
is in check decode to ``None``.  Identical pieces give several codes per
position; the canonical one lists their squares in ascending order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .material import MaterialSignature, parse_signature
from .rules import Color, Kind, Position, is_legal_position

__all__ = ["space_size", "encode", "decode", "Layout", "layout", "canonical_code"]

INDEX_VERSION = 1


def space_size(s) -> int:
    s = parse_signature(s)
    return 2 * 64 ** s.piece_count


def _slot_squares(p: Position, s: MaterialSignature) -> list:
    by_piece = {}
    for sq, pc in p.pieces:
        by_piece.setdefault(pc, []).append(sq)
    squares = []
    for pc in s.slots():
        bucket = by_piece.get(pc)
        if not bucket:
            raise ValueError(f"position {p.fen()} does not match signature {s.name}")
        squares.append(bucket.pop(0))
    if any(by_piece.values()):
        raise ValueError(f"position {p.fen()} does not match signature {s.name}")
    return squares


def encode(p: Position, s=None) -> int:
    """Canonical code of ``p`` (identical pieces in ascending square order)."""
    if s is None:
        from .material import signature_of
        s = signature_of(p)
    s = parse_signature(s)
    code = int(p.turn)
    for sq in _slot_squares(p, s):
        code = code * 64 + sq
    return code


def decode(s, i: int):
    s = parse_signature(s)
    size = space_size(s)
    if not 0 <= i < size:
        raise IndexError(f"index {i} out of range for {s.name} (size {size})")
    k = s.piece_count
    squares = [(i >> (6 * (k - 1 - n))) & 63 for n in range(k)]
    turn = Color(i >> (6 * k))
    if len(set(squares)) != k:
        return None
    try:
        p = Position.from_placement(dict(zip(squares, s.slots())), turn)
    except ValueError:
        return None
    return p if is_legal_position(p) else None


def canonical_code(s, i: int) -> int:
    """Code with identical pieces' squares sorted ascending."""
    s = parse_signature(s)
    k = s.piece_count
    squares = [(i >> (6 * (k - 1 - n))) & 63 for n in range(k)]
    slots = s.slots()
    n = 0
    while n < k:
        m = n
        while m + 1 < k and slots[m + 1] == slots[n]:
            m += 1
        squares[n:m + 1] = sorted(squares[n:m + 1])
        n = m + 1
    code = i >> (6 * k)
    for sq in squares:
        code = code * 64 + sq
    return code


@dataclass(frozen=True)
class Layout:
    """Kernel-facing description of a signature's slots."""

    signature: MaterialSignature
    kinds: np.ndarray
    colors: np.ndarray
    weights: np.ndarray
    dup_prev: np.ndarray
    king_slot: np.ndarray

    @property
    def k(self) -> int:
        return len(self.kinds)

    @property
    def size(self) -> int:
        return 2 * 64 ** self.k

    @property
    def has_dups(self) -> bool:
        return bool(self.dup_prev.any())

    def as_tuple(self) -> tuple:
        return (self.kinds, self.colors, self.weights, self.dup_prev, self.king_slot,
                self.k, 64 ** self.k, self.has_dups)


@lru_cache(maxsize=None)
def _layout(name: str) -> Layout:
    s = parse_signature(name)
    slots = s.slots()
    k = len(slots)
    kinds = np.array([int(pc.kind) for pc in slots], np.int64)
    colors = np.array([int(pc.color) for pc in slots], np.int64)
    weights = np.array([64 ** (k - 1 - i) for i in range(k)], np.int64)
    dup_prev = np.array([i > 0 and slots[i] == slots[i - 1] for i in range(k)], np.bool_)
    king_slot = np.array([slots.index(pc) for pc in slots if pc.kind == Kind.KING], np.int64)
    return Layout(s, kinds, colors, weights, dup_prev, king_slot)


def layout(s) -> Layout:
    return _layout(parse_signature(s).name)
