"""0x88 mailbox kernels for the full retrograde baseline.

Deliberately shares nothing with ``_kernels`` beyond the label constants:
its own board, its own attack detection (looking outward from the king),
its own move walk and its own routing of material-changing moves by
material key.
"""

import numpy as np
from numba import njit, prange

from ._tables import BISHOP, DRAW, INVALID, KING, KNIGHT, LOSS, PAWN, QUEEN, ROOK, WIN

KNIGHT_OFF = np.array([33, 31, 18, 14, -14, -18, -31, -33], np.int64)
KING_OFF = np.array([1, 15, 16, 17, -1, -15, -16, -17], np.int64)
ORTHO_OFF = np.array([1, 16, -1, -16], np.int64)
DIAG_OFF = np.array([15, 17, -15, -17], np.int64)

R_OK, R_VIOLATION, R_STRUCT = 0, 1, 2


@njit(cache=True)
def _to88(sq):
    return sq + (sq & 56)


@njit(cache=True)
def _to64(s88):
    return (s88 >> 4) * 8 + (s88 & 7)


@njit(cache=True)
def _code(color, kind):
    return color * 8 + kind + 1


@njit(cache=True)
def square_attacked(board, t, by):
    for off in KNIGHT_OFF:
        s = t + off
        if (s & 0x88) == 0 and board[s] == _code(by, KNIGHT):
            return True
    for off in KING_OFF:
        s = t + off
        if (s & 0x88) == 0 and board[s] == _code(by, KING):
            return True
    pawn = _code(by, PAWN)
    for off in (15, 17):
        s = t - off if by == 0 else t + off
        if (s & 0x88) == 0 and board[s] == pawn:
            return True
    for off in ORTHO_OFF:
        s = t + off
        while (s & 0x88) == 0:
            b = board[s]
            if b != 0:
                if b == _code(by, ROOK) or b == _code(by, QUEEN):
                    return True
                break
            s += off
    for off in DIAG_OFF:
        s = t + off
        while (s & 0x88) == 0:
            b = board[s]
            if b != 0:
                if b == _code(by, BISHOP) or b == _code(by, QUEEN):
                    return True
                break
            s += off
    return False


@njit(cache=True)
def _material_key(pc_color, pc_kind, alive, n):
    key = np.int64(0)
    for i in range(n):
        if alive[i] and pc_kind[i] != KING:
            key += np.int64(1) << (3 * (pc_color[i] * 5 + pc_kind[i] - 1))
    return key


@njit(cache=True)
def _encode_groups(g_color, g_kind, g_len, flip, mirror, stm, pc_sq, pc_color, pc_kind, alive, n, tmp):
    """Canonical code of the live pieces, groups being distinct (color, kind) pairs."""
    ix = np.int64(0)
    for g in range(g_len):
        want_c = g_color[g] ^ flip
        want_k = g_kind[g]
        cnt = 0
        for i in range(n):
            if alive[i] and pc_color[i] == want_c and pc_kind[i] == want_k:
                sq = _to64(pc_sq[i])
                if mirror:
                    sq ^= 56
                # insertion into tmp[0:cnt] keeping ascending order
                m = cnt
                while m > 0 and tmp[m - 1] > sq:
                    tmp[m] = tmp[m - 1]
                    m -= 1
                tmp[m] = sq
                cnt += 1
        for m in range(cnt):
            ix = ix * 64 + tmp[m]
    st = stm ^ flip
    return ix, st


@njit(cache=True)
def _successor_label(labels, own_key, own_groups, routes, pc_sq, pc_color, pc_kind, alive, n, stm_after, tmp):
    g_color, g_kind, g_len, stmw = own_groups[2], own_groups[3], own_groups[4], own_groups[5]
    r_keys, r_offset, r_flip, r_mirror, r_gcolor, r_gkind, r_glen, r_stmw, r_labels = routes
    key = _material_key(pc_color, pc_kind, alive, n)
    if key == own_key:
        ix, st = _encode_groups(g_color, g_kind, g_len, 0, False, stm_after,
                                pc_sq, pc_color, pc_kind, alive, n, tmp)
        return labels[st * stmw + ix]
    e = np.searchsorted(r_keys, key)
    if e >= r_keys.size or r_keys[e] != key:
        return np.uint8(255)
    ix, st = _encode_groups(r_gcolor[e], r_gkind[e], r_glen[e], r_flip[e], r_mirror[e] != 0,
                            stm_after, pc_sq, pc_color, pc_kind, alive, n, tmp)
    return r_labels[r_offset[e] + st * r_stmw[e] + ix]


@njit(cache=True)
def _full_one(idx, labels, own_groups, own_key, routes, k, board, pc_sq, pc_color, pc_kind, alive,
              tmp, dests):
    s_color, s_kind = own_groups[0], own_groups[1]
    lab = labels[idx]
    rest = idx
    for i in range(k - 1, -1, -1):
        pc_sq[i] = _to88(rest % 64)
        pc_color[i] = s_color[i]
        pc_kind[i] = s_kind[i]
        alive[i] = True
        rest //= 64
    stm = rest
    n = k
    bad = False
    for i in range(n):
        s = pc_sq[i]
        if board[s] != 0:
            bad = True
        board[s] = _code(pc_color[i], pc_kind[i])
        if pc_kind[i] == PAWN and ((s >> 4) == 0 or (s >> 4) == 7):
            bad = True
    my_king = -1
    their_king = -1
    for i in range(n):
        if pc_kind[i] == KING:
            if pc_color[i] == stm:
                my_king = i
            else:
                their_king = i
    if not bad and square_attacked(board, pc_sq[their_king], stm):
        bad = True
    if bad:
        for i in range(n):
            board[pc_sq[i]] = 0
        return R_OK if lab == INVALID else R_STRUCT
    if lab == INVALID:
        for i in range(n):
            board[pc_sq[i]] = 0
        return R_STRUCT

    n_loss = 0
    n_draw = 0
    n_win = 0
    n_moves = 0
    for i in range(n):
        if pc_color[i] != stm:
            continue
        src = pc_sq[i]
        kind = pc_kind[i]
        nd = 0
        if kind == PAWN:
            up = 16 if stm == 0 else -16
            t = src + up
            if board[t] == 0:
                dests[nd] = t
                nd += 1
                home = 1 if stm == 0 else 6
                if (src >> 4) == home and board[t + up] == 0:
                    dests[nd] = t + up
                    nd += 1
            for side in (-1, 1):
                t = src + up + side
                if (t & 0x88) == 0 and board[t] != 0 and (board[t] - 1) // 8 != stm:
                    dests[nd] = t
                    nd += 1
        elif kind == KNIGHT or kind == KING:
            offs = KNIGHT_OFF if kind == KNIGHT else KING_OFF
            for off in offs:
                t = src + off
                if (t & 0x88) == 0 and (board[t] == 0 or (board[t] - 1) // 8 != stm):
                    dests[nd] = t
                    nd += 1
        else:
            for d in range(8):
                if kind == ROOK and d >= 4:
                    break
                if kind == BISHOP and d < 4:
                    continue
                off = ORTHO_OFF[d] if d < 4 else DIAG_OFF[d - 4]
                t = src + off
                while (t & 0x88) == 0:
                    if board[t] != 0:
                        if (board[t] - 1) // 8 != stm:
                            dests[nd] = t
                            nd += 1
                        break
                    dests[nd] = t
                    nd += 1
                    t += off
        for m in range(nd):
            t = dests[m]
            victim = -1
            if board[t] != 0:
                for v in range(n):
                    if alive[v] and pc_sq[v] == t:
                        victim = v
                if pc_kind[victim] == KING:
                    continue
            # make
            saved = board[t]
            board[src] = 0
            board[t] = _code(stm, kind)
            pc_sq[i] = t
            if victim >= 0:
                alive[victim] = False
            ksq = t if kind == KING else pc_sq[my_king]
            legal = not square_attacked(board, ksq, 1 - stm)
            if legal:
                last = (t >> 4) == (7 if stm == 0 else 0)
                lo = QUEEN if (kind == PAWN and last) else kind
                hi = KNIGHT if (kind == PAWN and last) else kind
                for promo in range(lo, hi + 1):
                    pc_kind[i] = promo
                    s_lab = _successor_label(labels, own_key, own_groups, routes, pc_sq, pc_color,
                                             pc_kind, alive, n, 1 - stm, tmp)
                    n_moves += 1
                    if s_lab == LOSS:
                        n_loss += 1
                    elif s_lab == DRAW:
                        n_draw += 1
                    elif s_lab == WIN:
                        n_win += 1
                pc_kind[i] = kind
            # unmake
            if victim >= 0:
                alive[victim] = True
            pc_sq[i] = src
            board[t] = saved
            board[src] = _code(stm, kind)
    checked = square_attacked(board, pc_sq[my_king], 1 - stm)
    for i in range(n):
        board[pc_sq[i]] = 0
    if n_moves == 0:
        want = LOSS if checked else DRAW
        return R_OK if lab == want else R_VIOLATION
    if lab == WIN:
        return R_OK if n_loss > 0 else R_VIOLATION
    if lab == LOSS:
        return R_OK if n_win == n_moves else R_VIOLATION
    if lab == DRAW:
        return R_OK if (n_loss == 0 and n_draw > 0) else R_VIOLATION
    return R_STRUCT


@njit(cache=True, parallel=True)
def full_scan(labels, out, own_groups, own_key, routes, k, chunk):
    n_codes = labels.size
    n_chunks = (n_codes + chunk - 1) // chunk
    for c in prange(n_chunks):
        board = np.zeros(128, np.int64)
        pc_sq = np.empty(k, np.int64)
        pc_color = np.empty(k, np.int64)
        pc_kind = np.empty(k, np.int64)
        alive = np.empty(k, np.bool_)
        tmp = np.empty(k + 1, np.int64)
        dests = np.empty(32, np.int64)
        lo = c * chunk
        hi = min(lo + chunk, n_codes)
        for idx in range(lo, hi):
            out[idx] = _full_one(idx, labels, own_groups, own_key, routes, k, board,
                                 pc_sq, pc_color, pc_kind, alive, tmp, dests)


@njit(cache=True)
def full_at(indices, labels, out, own_groups, own_key, routes, k):
    board = np.zeros(128, np.int64)
    pc_sq = np.empty(k, np.int64)
    pc_color = np.empty(k, np.int64)
    pc_kind = np.empty(k, np.int64)
    alive = np.empty(k, np.bool_)
    tmp = np.empty(k + 1, np.int64)
    dests = np.empty(32, np.int64)
    for i in range(indices.size):
        out[i] = _full_one(indices[i], labels, own_groups, own_key, routes, k, board,
                           pc_sq, pc_color, pc_kind, alive, tmp, dests)
