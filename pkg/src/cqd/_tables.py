"""Precomputed square tables shared by the numba kernels.

Bit masks are stored as int64 so numba never mixes signed and unsigned
arithmetic; bit 63 simply shows up as the sign bit.
"""

import numpy as np

KING, QUEEN, ROOK, BISHOP, KNIGHT, PAWN = range(6)
WHITE, BLACK = 0, 1

LOSS, DRAW, WIN, INVALID = 0, 1, 2, 3
# Working states, never persisted.
UNKNOWN, ALIAS = 4, 5

# Ray directions: four orthogonal first, then four diagonal.
DIRECTIONS = ((1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1))
_KING_STEPS = DIRECTIONS
_KNIGHT_STEPS = ((1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2))


def _on_board(f, r):
    return 0 <= f < 8 and 0 <= r < 8


def _bit(sq):
    return np.int64(1) << np.int64(sq)


def _build():
    king_targets = np.full((64, 8), -1, np.int64)
    king_count = np.zeros(64, np.int64)
    knight_targets = np.full((64, 8), -1, np.int64)
    knight_count = np.zeros(64, np.int64)
    king_mask = np.zeros(64, np.int64)
    knight_mask = np.zeros(64, np.int64)
    pawn_mask = np.zeros((2, 64), np.int64)
    pawn_targets = np.full((2, 64, 2), -1, np.int64)
    pawn_count = np.zeros((2, 64), np.int64)
    rays = np.full((64, 8, 7), -1, np.int64)
    ray_len = np.zeros((64, 8), np.int64)
    line_kind = np.zeros((64, 64), np.int64)
    between = np.zeros((64, 64), np.int64)

    for sq in range(64):
        f, r = sq & 7, sq >> 3
        for table, count, mask, steps in (
            (king_targets, king_count, king_mask, _KING_STEPS),
            (knight_targets, knight_count, knight_mask, _KNIGHT_STEPS),
        ):
            for df, dr in steps:
                if _on_board(f + df, r + dr):
                    t = (r + dr) * 8 + f + df
                    table[sq, count[sq]] = t
                    count[sq] += 1
                    mask[sq] |= _bit(t)
        for color, dr in ((WHITE, 1), (BLACK, -1)):
            for df in (-1, 1):
                if _on_board(f + df, r + dr):
                    t = (r + dr) * 8 + f + df
                    pawn_targets[color, sq, pawn_count[color, sq]] = t
                    pawn_count[color, sq] += 1
                    pawn_mask[color, sq] |= _bit(t)
        for d, (df, dr) in enumerate(DIRECTIONS):
            ff, rr, acc = f + df, r + dr, np.int64(0)
            while _on_board(ff, rr):
                t = rr * 8 + ff
                rays[sq, d, ray_len[sq, d]] = t
                ray_len[sq, d] += 1
                line_kind[sq, t] = 1 if d < 4 else 2
                between[sq, t] = acc
                acc |= _bit(t)
                ff, rr = ff + df, rr + dr

    return dict(
        KING_TARGETS=king_targets, KING_COUNT=king_count,
        KNIGHT_TARGETS=knight_targets, KNIGHT_COUNT=knight_count,
        KING_MASK=king_mask, KNIGHT_MASK=knight_mask,
        PAWN_MASK=pawn_mask, PAWN_TARGETS=pawn_targets, PAWN_COUNT=pawn_count,
        RAYS=rays, RAY_LEN=ray_len, LINE_KIND=line_kind, BETWEEN=between,
    )


_T = _build()
KING_TARGETS = _T["KING_TARGETS"]
KING_COUNT = _T["KING_COUNT"]
KNIGHT_TARGETS = _T["KNIGHT_TARGETS"]
KNIGHT_COUNT = _T["KNIGHT_COUNT"]
KING_MASK = _T["KING_MASK"]
KNIGHT_MASK = _T["KNIGHT_MASK"]
PAWN_MASK = _T["PAWN_MASK"]
PAWN_TARGETS = _T["PAWN_TARGETS"]
PAWN_COUNT = _T["PAWN_COUNT"]
RAYS = _T["RAYS"]
RAY_LEN = _T["RAY_LEN"]
LINE_KIND = _T["LINE_KIND"]
BETWEEN = _T["BETWEEN"]
del _T
