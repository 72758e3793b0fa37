"""Material signatures and the capture/promotion lattice between endgames."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .rules import BLACK, WHITE, Color, Kind, Piece, Position, PROMOTION_KINDS

__all__ = [
    "MaterialSignature", "ColorTransform", "IDENTITY", "parse_signature",
    "capture_successor_signatures", "canonicalize_for_storage", "chain_order",
    "signature_of", "SignatureError",
]

_GRAMMAR = re.compile(r"^([KQRBNP]+)v([KQRBNP]+)$")

# Sort key alphabet for comparing names: piece order first, then the
# separator, so that the side with more/stronger material sorts as White.
_NAME_ORDER = {ch: i for i, ch in enumerate("KQRBNPv")}


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class MaterialSignature:
    """Piece multiset per side; kinds are stored in canonical K,Q,R,B,N,P order."""

    white: tuple
    black: tuple

    def __post_init__(self):
        for side, name in ((self.white, "white"), (self.black, "black")):
            if side.count(Kind.KING) != 1:
                raise SignatureError(f"{name} must have exactly one king")
        object.__setattr__(self, "white", tuple(sorted(Kind(k) for k in self.white)))
        object.__setattr__(self, "black", tuple(sorted(Kind(k) for k in self.black)))

    @property
    def name(self) -> str:
        return "".join(k.letter for k in self.white) + "v" + "".join(k.letter for k in self.black)

    canonical_name = name

    @property
    def piece_count(self) -> int:
        return len(self.white) + len(self.black)

    @property
    def pawn_count(self) -> int:
        return self.white.count(Kind.PAWN) + self.black.count(Kind.PAWN)

    @property
    def has_pawns(self) -> bool:
        return self.pawn_count > 0

    @property
    def two_sided_pawns(self) -> bool:
        return Kind.PAWN in self.white and Kind.PAWN in self.black

    def side(self, color: Color) -> tuple:
        return self.white if color == WHITE else self.black

    def slots(self) -> list:
        """Pieces in index order: White's in canonical order, then Black's."""
        return [Piece(WHITE, k) for k in self.white] + [Piece(BLACK, k) for k in self.black]

    def swapped(self) -> "MaterialSignature":
        return MaterialSignature(self.black, self.white)

    def order_key(self) -> tuple:
        return (self.piece_count, self.pawn_count)

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"MaterialSignature({self.name!r})"


def parse_signature(name: str) -> MaterialSignature:
    if isinstance(name, MaterialSignature):
        return name
    m = _GRAMMAR.match(name.strip())
    if not m:
        raise SignatureError(f"malformed signature {name!r}; expected e.g. 'KQvKR'")
    sides = []
    for text in m.groups():
        kings = text.count("K")
        if kings == 0:
            raise SignatureError(f"missing king in {name!r}")
        if kings > 1:
            raise SignatureError(f"more than one king per side in {name!r}")
        sides.append(tuple(Kind.from_letter(ch) for ch in text))
    return MaterialSignature(*sides)


def signature_of(p: Position) -> MaterialSignature:
    return MaterialSignature(
        tuple(pc.kind for _, pc in p.pieces if pc.color == WHITE),
        tuple(pc.kind for _, pc in p.pieces if pc.color == BLACK),
    )


def _remove_one(side: tuple, kind: Kind) -> tuple:
    lst = list(side)
    lst.remove(kind)
    return tuple(lst)


def _replace_one(side: tuple, old: Kind, new: Kind) -> tuple:
    return _remove_one(side, old) + (new,)


def capture_successor_signatures(s: MaterialSignature) -> set:
    """Signatures reachable from ``s`` by one capture, promotion, or both."""
    out = set()
    for mover in Color:
        own, opp = s.side(mover), s.side(mover.other)
        victims = {k for k in opp if k != Kind.KING}
        own_variants = [own]
        if Kind.PAWN in own:
            own_variants += [_replace_one(own, Kind.PAWN, k) for k in PROMOTION_KINDS]
        opp_variants = [opp] + [_remove_one(opp, k) for k in victims]
        for i, o in enumerate(own_variants):
            for j, v in enumerate(opp_variants):
                if i == 0 and j == 0:
                    continue
                white, black = (o, v) if mover == WHITE else (v, o)
                out.add(MaterialSignature(white, black))
    out.discard(s)
    return out


@dataclass(frozen=True)
class ColorTransform:
    """Maps positions of one signature onto its stored representative.

    Colors swap (and the side to move flips with them); ranks mirror when
    pawns are present so pawns keep moving "up" for White.
    """

    flip_colors: bool = False
    mirror_ranks: bool = False

    def __post_init__(self):
        if self.mirror_ranks and not self.flip_colors:
            raise ValueError("rank mirroring only accompanies a color flip")

    @property
    def is_identity(self) -> bool:
        return not self.flip_colors

    def apply_square(self, sq: int) -> int:
        return sq ^ 56 if self.mirror_ranks else sq

    def apply(self, p: Position) -> Position:
        if not self.flip_colors:
            return p
        placement = {self.apply_square(sq): Piece(pc.color.other, pc.kind) for sq, pc in p.pieces}
        return Position.from_placement(placement, p.turn.other)


IDENTITY = ColorTransform()


def _name_key(name: str) -> tuple:
    return tuple(_NAME_ORDER[ch] for ch in name)


def canonicalize_for_storage(s: MaterialSignature) -> tuple:
    """Return ``(representative, transform)`` with ``transform`` mapping s-positions onto it."""
    swapped = s.swapped()
    if _name_key(swapped.name) < _name_key(s.name):
        return swapped, ColorTransform(True, s.has_pawns)
    return s, IDENTITY


def chain_order(targets: Iterable) -> list:
    """Dependency closure of ``targets`` in build order, as stored representatives.

    Sorted by (piece count, pawn count, name); every capture/promotion edge
    strictly lowers that key, so dependencies always come first.
    """
    seen = {}
    stack = [canonicalize_for_storage(parse_signature(t))[0] for t in targets]
    while stack:
        s = stack.pop()
        if s.name in seen:
            continue
        seen[s.name] = s
        for succ in capture_successor_signatures(s):
            rep = canonicalize_for_storage(succ)[0]
            if rep.name not in seen:
                stack.append(rep)
    return sorted(seen.values(), key=lambda s: (s.piece_count, s.pawn_count, _name_key(s.name)))
