"""Chess rules for small endgames: board, legality, moves and categories.

Squares are integers ``rank * 8 + file`` (a1 = 0, h8 = 63).  Positions carry
no castling rights and no en-passant square.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

__all__ = [
    "Color", "Kind", "Piece", "Position", "Move", "Category",
    "WHITE", "BLACK", "square", "square_name", "parse_square",
    "is_legal_position", "legal_moves", "apply_move", "is_material_changing",
    "classify", "in_check", "attacked_squares", "king_moves_by_attack_sets",
]


class Color(enum.IntEnum):
    WHITE = 0
    BLACK = 1

    @property
    def other(self) -> "Color":
        return Color(1 - self)


WHITE = Color.WHITE
BLACK = Color.BLACK


class Kind(enum.IntEnum):
    """Piece kinds in canonical signature order."""

    KING = 0
    QUEEN = 1
    ROOK = 2
    BISHOP = 3
    KNIGHT = 4
    PAWN = 5

    @property
    def letter(self) -> str:
        return "KQRBNP"[self]

    @classmethod
    def from_letter(cls, ch: str) -> "Kind":
        try:
            return cls("KQRBNP".index(ch.upper()))
        except ValueError:
            raise ValueError(f"unknown piece letter {ch!r}") from None


PROMOTION_KINDS = (Kind.QUEEN, Kind.ROOK, Kind.BISHOP, Kind.KNIGHT)


@dataclass(frozen=True, order=True)
class Piece:
    color: Color
    kind: Kind

    def symbol(self) -> str:
        ch = self.kind.letter
        return ch if self.color == WHITE else ch.lower()

    @classmethod
    def from_symbol(cls, ch: str) -> "Piece":
        return cls(WHITE if ch.isupper() else BLACK, Kind.from_letter(ch))


def square(file: int, rank: int) -> int:
    if not (0 <= file < 8 and 0 <= rank < 8):
        raise ValueError(f"square out of range: file={file} rank={rank}")
    return rank * 8 + file


def square_name(sq: int) -> str:
    return "abcdefgh"[sq & 7] + str((sq >> 3) + 1)


def parse_square(name: str) -> int:
    if len(name) != 2 or name[0] not in "abcdefgh" or name[1] not in "12345678":
        raise ValueError(f"bad square name {name!r}")
    return square("abcdefgh".index(name[0]), int(name[1]) - 1)


@dataclass(frozen=True)
class Move:
    from_sq: int
    to_sq: int
    promotion: Optional[Kind] = None

    def uci(self) -> str:
        s = square_name(self.from_sq) + square_name(self.to_sq)
        if self.promotion is not None:
            s += self.promotion.letter.lower()
        return s


class Category(enum.Enum):
    CHECKMATE = "checkmate"
    STALEMATE = "stalemate"
    CAPTURE = "capture"
    QUIET = "quiet"

    @property
    def is_terminal(self) -> bool:
        return self in (Category.CHECKMATE, Category.STALEMATE)


@dataclass(frozen=True)
class Position:
    """Immutable board state: ``pieces`` is a square-sorted tuple of (square, Piece)."""

    pieces: tuple
    turn: Color

    def __post_init__(self):
        squares = [sq for sq, _ in self.pieces]
        if any(not 0 <= sq < 64 for sq in squares):
            raise ValueError("square out of range")
        if len(set(squares)) != len(squares):
            raise ValueError("two pieces on one square")
        if squares != sorted(squares):
            object.__setattr__(self, "pieces", tuple(sorted(self.pieces)))
        for color in Color:
            n = sum(1 for _, pc in self.pieces if pc == Piece(color, Kind.KING))
            if n != 1:
                raise ValueError(f"{color.name.lower()} must have exactly one king, found {n}")

    @classmethod
    def from_placement(cls, placement: Mapping[int, Piece], turn: Color) -> "Position":
        return cls(tuple(sorted(placement.items())), Color(turn))

    @property
    def placement(self) -> dict:
        return dict(self.pieces)

    def piece_at(self, sq: int) -> Optional[Piece]:
        for s, pc in self.pieces:
            if s == sq:
                return pc
        return None

    def king(self, color: Color) -> int:
        for s, pc in self.pieces:
            if pc.kind == Kind.KING and pc.color == color:
                return s
        raise AssertionError("unreachable: kings are validated on construction")

    def material(self) -> tuple:
        """Sorted (color, kind) multiset; two positions share an endgame iff equal."""
        return tuple(sorted((pc.color, pc.kind) for _, pc in self.pieces))

    def fen(self) -> str:
        rows = []
        for rank in range(7, -1, -1):
            row, empty = "", 0
            for file in range(8):
                pc = self.piece_at(rank * 8 + file)
                if pc is None:
                    empty += 1
                    continue
                if empty:
                    row += str(empty)
                    empty = 0
                row += pc.symbol()
            if empty:
                row += str(empty)
            rows.append(row)
        return "/".join(rows) + (" w" if self.turn == WHITE else " b") + " - -"

    @classmethod
    def from_fen(cls, fen: str) -> "Position":
        fields = fen.split()
        if len(fields) < 2:
            raise ValueError("FEN needs at least placement and side to move")
        for extra in fields[2:4]:
            if extra != "-":
                raise ValueError(f"castling/en-passant fields must be '-', got {extra!r}")
        rows = fields[0].split("/")
        if len(rows) != 8:
            raise ValueError("FEN placement must have 8 ranks")
        placement = {}
        for i, row in enumerate(rows):
            rank, file = 7 - i, 0
            for ch in row:
                if ch.isdigit():
                    file += int(ch)
                else:
                    if file > 7:
                        raise ValueError(f"rank {rank + 1} overflows")
                    placement[rank * 8 + file] = Piece.from_symbol(ch)
                    file += 1
            if file != 8:
                raise ValueError(f"rank {rank + 1} has {file} files")
        if fields[1] not in ("w", "b"):
            raise ValueError(f"bad side to move {fields[1]!r}")
        return cls.from_placement(placement, WHITE if fields[1] == "w" else BLACK)

    def __str__(self) -> str:
        return self.fen()


# ---------------------------------------------------------------------------
# Per-piece move generation by direction stepping.

KING_STEPS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
KNIGHT_STEPS = ((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2))
ROOK_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))
BISHOP_DIRS = ((1, 1), (-1, 1), (-1, -1), (1, -1))


def _step(sq: int, df: int, dr: int) -> Optional[int]:
    f, r = (sq & 7) + df, (sq >> 3) + dr
    if 0 <= f < 8 and 0 <= r < 8:
        return r * 8 + f
    return None


def _slides(kind: Kind) -> tuple:
    if kind == Kind.QUEEN:
        return ROOK_DIRS + BISHOP_DIRS
    if kind == Kind.ROOK:
        return ROOK_DIRS
    if kind == Kind.BISHOP:
        return BISHOP_DIRS
    return ()


def _attacks_from(board: Mapping[int, Piece], sq: int, pc: Piece) -> Iterable[int]:
    if pc.kind == Kind.PAWN:
        dr = 1 if pc.color == WHITE else -1
        for df in (-1, 1):
            t = _step(sq, df, dr)
            if t is not None:
                yield t
    elif pc.kind in (Kind.KING, Kind.KNIGHT):
        for df, dr in KING_STEPS if pc.kind == Kind.KING else KNIGHT_STEPS:
            t = _step(sq, df, dr)
            if t is not None:
                yield t
    else:
        for df, dr in _slides(pc.kind):
            t = _step(sq, df, dr)
            while t is not None:
                yield t
                if t in board:
                    break
                t = _step(t, df, dr)


def _is_attacked(board: Mapping[int, Piece], target: int, by: Color) -> bool:
    return any(pc.color == by and target in _attacks_from(board, sq, pc)
               for sq, pc in board.items())


def in_check(p: Position, color: Optional[Color] = None) -> bool:
    """Whether ``color`` (default: side to move) has its king attacked."""
    color = p.turn if color is None else color
    return _is_attacked(p.placement, p.king(color), color.other)


def is_legal_position(p: Position) -> bool:
    for sq, pc in p.pieces:
        if pc.kind == Kind.PAWN and (sq >> 3) in (0, 7):
            return False
    return not in_check(p, p.turn.other)


def _pseudo_moves(board: Mapping[int, Piece], turn: Color) -> Iterable[Move]:
    for sq, pc in board.items():
        if pc.color != turn:
            continue
        if pc.kind != Kind.PAWN:
            for t in _attacks_from(board, sq, pc):
                occupant = board.get(t)
                if occupant is None or occupant.color != turn:
                    yield Move(sq, t)
            continue
        dr = 1 if turn == WHITE else -1
        last_rank = 7 if turn == WHITE else 0
        targets = []
        one = _step(sq, 0, dr)
        if one is not None and one not in board:
            targets.append(one)
            start_rank = 1 if turn == WHITE else 6
            two = _step(one, 0, dr)
            if (sq >> 3) == start_rank and two not in board:
                targets.append(two)
        for t in _attacks_from(board, sq, pc):
            occupant = board.get(t)
            if occupant is not None and occupant.color != turn:
                targets.append(t)
        for t in targets:
            if (t >> 3) == last_rank:
                for kind in PROMOTION_KINDS:
                    yield Move(sq, t, kind)
            else:
                yield Move(sq, t)


def _after(board: Mapping[int, Piece], m: Move) -> dict:
    nb = dict(board)
    pc = nb.pop(m.from_sq)
    if m.promotion is not None:
        pc = Piece(pc.color, m.promotion)
    nb[m.to_sq] = pc
    return nb


def legal_moves(p: Position) -> list:
    board = p.placement
    out = []
    for m in _pseudo_moves(board, p.turn):
        target = board.get(m.to_sq)
        if target is not None and target.kind == Kind.KING:
            continue
        nb = _after(board, m)
        king_sq = m.to_sq if board[m.from_sq].kind == Kind.KING else p.king(p.turn)
        if not _is_attacked(nb, king_sq, p.turn.other):
            out.append(m)
    out.sort(key=lambda m: (m.from_sq, m.to_sq, -1 if m.promotion is None else m.promotion))
    return out


def apply_move(p: Position, m: Move) -> Position:
    if m not in legal_moves(p):
        raise ValueError(f"illegal move {m.uci()} in {p.fen()}")
    return Position.from_placement(_after(p.placement, m), p.turn.other)


def is_material_changing(p: Position, m: Move) -> bool:
    return m.promotion is not None or p.piece_at(m.to_sq) is not None


def classify(p: Position) -> Category:
    moves = legal_moves(p)
    if not moves:
        return Category.CHECKMATE if in_check(p) else Category.STALEMATE
    if any(is_material_changing(p, m) for m in moves):
        return Category.CAPTURE
    return Category.QUIET


# ---------------------------------------------------------------------------
# Attack-set formulation of king moves, kept separate from the per-piece
# generator so the two can cross-check each other.

def attacked_squares(board: Mapping[int, Piece], by: Color) -> set:
    attacked = set()
    for sq, pc in board.items():
        if pc.color == by:
            attacked.update(_attacks_from(board, sq, pc))
    return attacked


def king_moves_by_attack_sets(p: Position) -> set:
    """Legal king destinations: neighbourhood minus own men minus enemy-attacked squares.

    The enemy attack set is taken with our king lifted off the board so
    that squares behind it along a slider ray count as attacked.
    """
    ksq = p.king(p.turn)
    board = p.placement
    lifted = {sq: pc for sq, pc in board.items() if sq != ksq}
    danger = attacked_squares(lifted, p.turn.other)
    own = {sq for sq, pc in board.items() if pc.color == p.turn}
    neighbourhood = set()
    for df, dr in KING_STEPS:
        t = _step(ksq, df, dr)
        if t is not None:
            neighbourhood.add(t)
    out = set()
    for t in neighbourhood - own:
        if t in danger:
            continue
        captured = board.get(t)
        if captured is not None:
            # Capturing may open a line for another attacker; check the board afterwards.
            nb = dict(lifted)
            nb[t] = Piece(p.turn, Kind.KING)
            if _is_attacked(nb, t, p.turn.other):
                continue
        out.add(t)
    return out
