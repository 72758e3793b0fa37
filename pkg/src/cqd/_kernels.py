"""Slot-based numba kernels: decoding, move and un-move generation, the
retrograde solver, and the decomposed consistency scan.

A position of a k-piece signature is held as ``sqs[k]`` (one square per
slot, slots in canonical signature order) plus the side to move.  Two
tuples travel with every call:

``lay`` = (kinds, colors, weights, dup_prev, king_slot, k, stm_weight, has_dups)
``xl``  = (tr_id, tr_len, tr_perm, tr_mirror, tr_flip, tr_stmw, tr_offset,
           tr_dup, sub_labels)

``xl`` describes every material-changing transition: ``tr_id[mover,
captured, promo]`` (captured == k for "none", promo 0 for "none", 1..4 for
Q,R,B,N) selects a row giving the stored sub-table's slot permutation,
color flip / rank mirror flags and its offset into the concatenated
``sub_labels`` array.

Successor codes are always canonical: squares of identical pieces are
sorted ascending.  Non-canonical codes are checked by the verifiers but
the solver only works on canonical ones and copies labels across.
"""

import numpy as np
from numba import njit, prange

from ._tables import (
    ALIAS, BETWEEN, BISHOP, DRAW, INVALID, KING, KING_COUNT, KING_MASK,
    KING_TARGETS, KNIGHT, KNIGHT_COUNT, KNIGHT_MASK, KNIGHT_TARGETS,
    LINE_KIND, LOSS, PAWN, PAWN_COUNT, PAWN_MASK, PAWN_TARGETS, QUEEN,
    RAYS, RAY_LEN, ROOK, UNKNOWN, WIN,
)

MAX_MOVES = 256
NOLOSE = 0xFFFF

# Category codes written by the decomposed scan (upper bits of the result byte).
CAT_INVALID, CAT_MATE, CAT_STALEMATE, CAT_CAPTURE, CAT_QUIET = range(5)
# Violation kinds (lower three bits).
V_NONE, V_TERMINAL, V_WIN, V_LOSS, V_DRAW_LOSS, V_DRAW_NODRAW, V_STRUCT = range(7)


@njit(cache=True)
def _bit(sq):
    return np.int64(1) << sq


@njit(cache=True)
def decode_into(idx, k, sqs):
    for i in range(k - 1, -1, -1):
        sqs[i] = idx & 63
        idx >>= 6
    return idx


@njit(cache=True)
def setup_board(sqs, k, board):
    """Fill ``board`` with slot ids; return the occupancy mask, or 0 on overlap.

    A real mask is never 0 (two kings) but may be negative (h8 is bit 63).
    """
    occ = np.int64(0)
    for i in range(k):
        b = _bit(sqs[i])
        if occ & b:
            for j in range(i):
                board[sqs[j]] = -1
            return np.int64(0)
        occ |= b
        board[sqs[i]] = i
    return occ


@njit(cache=True)
def clear_board(sqs, k, board):
    for i in range(k):
        board[sqs[i]] = -1


@njit(cache=True)
def attacked(target, by, sqs, kinds, colors, k, occ, skip):
    for j in range(k):
        if j == skip or colors[j] != by:
            continue
        s = sqs[j]
        kd = kinds[j]
        if kd == KING:
            if (KING_MASK[s] >> target) & 1:
                return True
        elif kd == KNIGHT:
            if (KNIGHT_MASK[s] >> target) & 1:
                return True
        elif kd == PAWN:
            if (PAWN_MASK[by, s] >> target) & 1:
                return True
        else:
            lk = LINE_KIND[s, target]
            if lk == 0:
                continue
            if kd == ROOK and lk != 1:
                continue
            if kd == BISHOP and lk != 2:
                continue
            if BETWEEN[s, target] & occ == 0:
                return True
    return False


@njit(cache=True)
def position_ok(sqs, lay, stm, occ):
    """Pawn ranks and side-not-to-move not in check (overlap handled by setup_board)."""
    kinds, colors, k, king_slot = lay[0], lay[1], lay[5], lay[4]
    for i in range(k):
        if kinds[i] == PAWN:
            r = sqs[i] >> 3
            if r == 0 or r == 7:
                return False
    other = 1 - stm
    return not attacked(sqs[king_slot[other]], stm, sqs, kinds, colors, k, occ, -1)


@njit(cache=True)
def is_canonical(sqs, lay):
    dup_prev, k = lay[3], lay[5]
    for i in range(1, k):
        if dup_prev[i] and sqs[i - 1] > sqs[i]:
            return False
    return True


@njit(cache=True)
def _sorted_runs(tmp, n, dup):
    for i in range(1, n):
        if dup[i]:
            v = tmp[i]
            m = i
            while m > 0 and dup[m] and tmp[m - 1] > v:
                tmp[m] = tmp[m - 1]
                m -= 1
            tmp[m] = v


@njit(cache=True)
def encode_canonical(sqs, lay, stm, tmp):
    k = lay[5]
    for i in range(k):
        tmp[i] = sqs[i]
    _sorted_runs(tmp, k, lay[3])
    ix = np.int64(0)
    for i in range(k):
        ix = ix * 64 + tmp[i]
    return ix + stm * lay[6]


@njit(cache=True)
def cross_index(tr, sqs, stm_after, xl, tmp):
    tr_len, tr_perm, tr_mirror, tr_flip, tr_stmw, tr_offset, tr_dup = (
        xl[1], xl[2], xl[3], xl[4], xl[5], xl[6], xl[7])
    kk = tr_len[tr]
    for m in range(kk):
        sq = sqs[tr_perm[tr, m]]
        if tr_mirror[tr]:
            sq ^= 56
        tmp[m] = sq
    _sorted_runs(tmp, kk, tr_dup[tr])
    ix = np.int64(0)
    for m in range(kk):
        ix = ix * 64 + tmp[m]
    st = stm_after
    if tr_flip[tr]:
        st = 1 - st
    return tr_offset[tr] + st * tr_stmw[tr] + ix


@njit(cache=True)
def successors(idx, sqs, lay, xl, stm, board, occ, tgt, tmp, out_kind, out_idx, first_only):
    """Enumerate legal moves as successor codes.

    ``out_kind`` is 0 for a same-table successor (``out_idx`` indexes this
    table) and 1 for a material-changing one (``out_idx`` indexes
    ``sub_labels``).  With ``first_only`` set, stops after one legal move.
    """
    kinds, colors, weights, king_slot, k, stmw, has_dups = (
        lay[0], lay[1], lay[2], lay[4], lay[5], lay[6], lay[7])
    tr_id = xl[0]
    n = 0
    after = 1 - stm
    for j in range(k):
        if colors[j] != stm:
            continue
        s = sqs[j]
        kd = kinds[j]
        nt = 0
        if kd == KING or kd == KNIGHT:
            for m in range(KING_COUNT[s] if kd == KING else KNIGHT_COUNT[s]):
                t = KING_TARGETS[s, m] if kd == KING else KNIGHT_TARGETS[s, m]
                b = board[t]
                if b >= 0 and colors[b] == stm:
                    continue
                tgt[nt] = t
                nt += 1
        elif kd == PAWN:
            fwd = 8 if stm == 0 else -8
            t = s + fwd
            if board[t] < 0:
                tgt[nt] = t
                nt += 1
                r = s >> 3
                if (stm == 0 and r == 1) or (stm == 1 and r == 6):
                    t2 = t + fwd
                    if board[t2] < 0:
                        tgt[nt] = t2
                        nt += 1
            for m in range(PAWN_COUNT[stm, s]):
                t = PAWN_TARGETS[stm, s, m]
                b = board[t]
                if b >= 0 and colors[b] != stm:
                    tgt[nt] = t
                    nt += 1
        else:
            d0 = 4 if kd == BISHOP else 0
            d1 = 4 if kd == ROOK else 8
            for d in range(d0, d1):
                for m in range(RAY_LEN[s, d]):
                    t = RAYS[s, d, m]
                    b = board[t]
                    if b >= 0:
                        if colors[b] != stm:
                            tgt[nt] = t
                            nt += 1
                        break
                    tgt[nt] = t
                    nt += 1
        for m in range(nt):
            t = tgt[m]
            cap = board[t]
            if cap >= 0 and kinds[cap] == KING:
                continue
            new_occ = (occ & ~_bit(s)) | _bit(t)
            sqs[j] = t
            ksq = t if kd == KING else sqs[king_slot[stm]]
            if attacked(ksq, after, sqs, kinds, colors, k, new_occ, cap):
                sqs[j] = s
                continue
            promo = kd == PAWN and ((t >> 3) == 7 or (t >> 3) == 0)
            if cap < 0 and not promo:
                out_kind[n] = 0
                if has_dups:
                    out_idx[n] = encode_canonical(sqs, lay, after, tmp)
                else:
                    out_idx[n] = idx + (t - s) * weights[j] + (1 - 2 * stm) * stmw
                n += 1
            else:
                c = cap if cap >= 0 else k
                p0 = 1 if promo else 0
                p1 = 5 if promo else 1
                for pr in range(p0, p1):
                    tr = tr_id[j, c, pr]
                    out_kind[n] = 1
                    out_idx[n] = cross_index(tr, sqs, after, xl, tmp)
                    n += 1
            sqs[j] = s
            if first_only and n > 0:
                return n
    return n


@njit(cache=True)
def predecessors(idx, sqs, lay, stm, board, occ, tgt, tmp, out):
    """Same-table predecessors: un-move a piece of the side that just moved.

    Only non-capturing, non-promoting moves can stay inside one table, so
    un-moves go to empty squares and pawns step straight back.
    """
    kinds, colors, weights, king_slot, k, stmw, has_dups = (
        lay[0], lay[1], lay[2], lay[4], lay[5], lay[6], lay[7])
    mover = 1 - stm
    n = 0
    for j in range(k):
        if colors[j] != mover:
            continue
        s = sqs[j]
        kd = kinds[j]
        nt = 0
        if kd == KING or kd == KNIGHT:
            for m in range(KING_COUNT[s] if kd == KING else KNIGHT_COUNT[s]):
                t = KING_TARGETS[s, m] if kd == KING else KNIGHT_TARGETS[s, m]
                if board[t] < 0:
                    tgt[nt] = t
                    nt += 1
        elif kd == PAWN:
            r = s >> 3
            back = -8 if mover == 0 else 8
            if (mover == 0 and r >= 2) or (mover == 1 and r <= 5):
                t = s + back
                if board[t] < 0:
                    tgt[nt] = t
                    nt += 1
                    if (mover == 0 and r == 3) or (mover == 1 and r == 4):
                        t2 = t + back
                        if board[t2] < 0:
                            tgt[nt] = t2
                            nt += 1
        else:
            d0 = 4 if kd == BISHOP else 0
            d1 = 4 if kd == ROOK else 8
            for d in range(d0, d1):
                for m in range(RAY_LEN[s, d]):
                    t = RAYS[s, d, m]
                    if board[t] >= 0:
                        break
                    tgt[nt] = t
                    nt += 1
        for m in range(nt):
            t = tgt[m]
            q_occ = (occ & ~_bit(s)) | _bit(t)
            sqs[j] = t
            if not attacked(sqs[king_slot[stm]], mover, sqs, kinds, colors, k, q_occ, -1):
                if has_dups:
                    out[n] = encode_canonical(sqs, lay, mover, tmp)
                else:
                    out[n] = idx + (t - s) * weights[j] + (mover - stm) * stmw
                n += 1
            sqs[j] = s
    return n


@njit(cache=True)
def in_check_now(sqs, lay, stm, occ):
    return attacked(sqs[lay[4][stm]], 1 - stm, sqs, lay[0], lay[1], lay[5], occ, -1)


@njit(cache=True)
def _label_of(kind, ix, labels, sub_labels):
    return labels[ix] if kind == 0 else sub_labels[ix]


# ---------------------------------------------------------------------------
# Table preparation and the retrograde solver.

@njit(cache=True)
def prepare_generation(labels, rounds, cat, lay, xl):
    """Mark invalid codes, aliases and terminals; everything else UNKNOWN."""
    k = lay[5]
    n_codes = labels.size
    sqs = np.empty(k, np.int64)
    tmp = np.empty(k + 1, np.int64)
    tgt = np.empty(64, np.int64)
    board = np.full(64, -1, np.int64)
    ok = np.empty(MAX_MOVES, np.int64)
    oi = np.empty(MAX_MOVES, np.int64)
    for idx in range(n_codes):
        rounds[idx] = 0
        stm = decode_into(idx, k, sqs)
        occ = setup_board(sqs, k, board)
        if occ == 0:
            labels[idx] = INVALID
            continue
        if not position_ok(sqs, lay, stm, occ):
            labels[idx] = INVALID
        elif not is_canonical(sqs, lay):
            labels[idx] = ALIAS
        elif successors(idx, sqs, lay, xl, stm, board, occ, tgt, tmp, ok, oi, True) == 0:
            if in_check_now(sqs, lay, stm, occ):
                labels[idx] = LOSS
                cat[idx] = CAT_MATE
            else:
                labels[idx] = DRAW
                cat[idx] = CAT_STALEMATE
        else:
            labels[idx] = UNKNOWN
        clear_board(sqs, k, board)


@njit(cache=True)
def copy_aliases(labels, rounds, cat, lay):
    k = lay[5]
    sqs = np.empty(k, np.int64)
    tmp = np.empty(k + 1, np.int64)
    for idx in range(labels.size):
        if labels[idx] != ALIAS:
            continue
        stm = decode_into(idx, k, sqs)
        c = encode_canonical(sqs, lay, stm, tmp)
        labels[idx] = labels[c]
        rounds[idx] = rounds[c]
        cat[idx] = cat[c]


@njit(cache=True)
def mark_aliases(labels, lay):
    """Turn every non-canonical UNKNOWN code into an ALIAS of its twin."""
    k = lay[5]
    sqs = np.empty(k, np.int64)
    for idx in range(labels.size):
        if labels[idx] != UNKNOWN:
            continue
        decode_into(idx, k, sqs)
        if not is_canonical(sqs, lay):
            labels[idx] = ALIAS


@njit(cache=True)
def solve_frontier(labels, rounds, counters, queue, cat, lay, xl):
    """Retrograde fixpoint over UNKNOWN codes, seeded from fixed labels.

    One forward scan computes, per unknown code, whether a fixed successor
    already loses (-> Win in round 1) and how many successors are still
    unknown.  Rounds then proceed level by level: a code learns Win from a
    successor that became Loss, and Loss once its last successor became
    Win.  Round numbers match a synchronous successor-scan pass count.
    Returns the last round number used.
    """
    k = lay[5]
    sub_labels = xl[8]
    sqs = np.empty(k, np.int64)
    tmp = np.empty(k + 1, np.int64)
    tgt = np.empty(64, np.int64)
    board = np.full(64, -1, np.int64)
    ok = np.empty(MAX_MOVES, np.int64)
    oi = np.empty(MAX_MOVES, np.int64)
    tail = 0
    for idx in range(labels.size):
        if labels[idx] != UNKNOWN:
            continue
        stm = decode_into(idx, k, sqs)
        occ = setup_board(sqs, k, board)
        n = successors(idx, sqs, lay, xl, stm, board, occ, tgt, tmp, ok, oi, False)
        clear_board(sqs, k, board)
        cat[idx] = CAT_QUIET
        for m in range(n):
            if ok[m] == 1:
                cat[idx] = CAT_CAPTURE
                break
        has_loss = False
        nolose = False
        pending = 0
        for m in range(n):
            lab = _label_of(ok[m], oi[m], labels, sub_labels)
            if lab == LOSS:
                has_loss = True
                break
            if lab == UNKNOWN:
                pending += 1
            elif lab != WIN:
                nolose = True
        if has_loss:
            queue[tail] = idx * 2 + 1
            tail += 1
        elif nolose:
            counters[idx] = NOLOSE
        else:
            counters[idx] = pending
            if pending == 0:
                queue[tail] = idx * 2
                tail += 1
    for i in range(tail):
        v = queue[i]
        idx = v >> 1
        labels[idx] = WIN if v & 1 else LOSS
        rounds[idx] = 1
        queue[i] = idx
    head = 0
    r = 1
    last = 0 if tail == 0 else 1
    while head < tail:
        end = tail
        for i in range(head, end):
            p = queue[i]
            lp = labels[p]
            stm = decode_into(p, k, sqs)
            occ = setup_board(sqs, k, board)
            n = predecessors(p, sqs, lay, stm, board, occ, tgt, tmp, oi)
            clear_board(sqs, k, board)
            for m in range(n):
                q = oi[m]
                if labels[q] != UNKNOWN:
                    continue
                if lp == LOSS:
                    labels[q] = WIN
                else:
                    c = counters[q]
                    if c == NOLOSE:
                        continue
                    c -= 1
                    counters[q] = c
                    if c != 0:
                        continue
                    labels[q] = LOSS
                rounds[q] = r + 1
                queue[tail] = q
                tail += 1
                last = r + 1
        head = end
        r += 1
    for idx in range(labels.size):
        if labels[idx] == UNKNOWN:
            labels[idx] = DRAW
            rounds[idx] = 0
    return last


@njit(cache=True)
def solve_scan(labels, rounds, queue, cat, lay, xl):
    """Reference solver: synchronous passes, each re-scanning successors of
    every unknown code against a frozen snapshot of the previous pass."""
    k = lay[5]
    sub_labels = xl[8]
    sqs = np.empty(k, np.int64)
    tmp = np.empty(k + 1, np.int64)
    tgt = np.empty(64, np.int64)
    board = np.full(64, -1, np.int64)
    ok = np.empty(MAX_MOVES, np.int64)
    oi = np.empty(MAX_MOVES, np.int64)
    r = 0
    while True:
        tail = 0
        for idx in range(labels.size):
            if labels[idx] != UNKNOWN:
                continue
            stm = decode_into(idx, k, sqs)
            occ = setup_board(sqs, k, board)
            n = successors(idx, sqs, lay, xl, stm, board, occ, tgt, tmp, ok, oi, False)
            clear_board(sqs, k, board)
            if r == 0:
                cat[idx] = CAT_QUIET
                for m in range(n):
                    if ok[m] == 1:
                        cat[idx] = CAT_CAPTURE
                        break
            has_loss = False
            all_win = True
            for m in range(n):
                lab = _label_of(ok[m], oi[m], labels, sub_labels)
                if lab == LOSS:
                    has_loss = True
                    break
                if lab != WIN:
                    all_win = False
            if has_loss:
                queue[tail] = idx * 2 + 1
                tail += 1
            elif all_win:
                queue[tail] = idx * 2
                tail += 1
        if tail == 0:
            break
        r += 1
        for i in range(tail):
            v = queue[i]
            labels[v >> 1] = WIN if v & 1 else LOSS
            rounds[v >> 1] = r
    for idx in range(labels.size):
        if labels[idx] == UNKNOWN:
            labels[idx] = DRAW
            rounds[idx] = 0
    return r


# ---------------------------------------------------------------------------
# Decomposed consistency scan.

@njit(cache=True)
def judge(lab, n, ok, oi, labels, sub_labels):
    """First failing consistency clause for a non-terminal code, or V_NONE."""
    if lab == WIN:
        for m in range(n):
            if _label_of(ok[m], oi[m], labels, sub_labels) == LOSS:
                return V_NONE
        return V_WIN
    if lab == LOSS:
        for m in range(n):
            if _label_of(ok[m], oi[m], labels, sub_labels) != WIN:
                return V_LOSS
        return V_NONE
    if lab == DRAW:
        seen_draw = False
        for m in range(n):
            s = _label_of(ok[m], oi[m], labels, sub_labels)
            if s == LOSS:
                return V_DRAW_LOSS
            if s == DRAW:
                seen_draw = True
        return V_NONE if seen_draw else V_DRAW_NODRAW
    return V_STRUCT


@njit(cache=True)
def _decomposed_one(idx, labels, lay, xl, sqs, tmp, tgt, board, ok, oi):
    k = lay[5]
    stm = decode_into(idx, k, sqs)
    occ = setup_board(sqs, k, board)
    lab = labels[idx]
    if occ == 0:
        return CAT_INVALID * 8 + (V_NONE if lab == INVALID else V_STRUCT)
    if not position_ok(sqs, lay, stm, occ):
        clear_board(sqs, k, board)
        return CAT_INVALID * 8 + (V_NONE if lab == INVALID else V_STRUCT)
    n = successors(idx, sqs, lay, xl, stm, board, occ, tgt, tmp, ok, oi, False)
    check = in_check_now(sqs, lay, stm, occ)
    clear_board(sqs, k, board)
    if n == 0:
        if check:
            return CAT_MATE * 8 + (V_NONE if lab == LOSS else V_TERMINAL)
        return CAT_STALEMATE * 8 + (V_NONE if lab == DRAW else V_TERMINAL)
    cat = CAT_QUIET
    for m in range(n):
        if ok[m] == 1:
            cat = CAT_CAPTURE
            break
    return cat * 8 + judge(lab, n, ok, oi, labels, xl[8])


@njit(cache=True, parallel=True)
def decomposed_scan(labels, out, lay, xl, chunk):
    """Per-code ``category * 8 + violation`` for every code of the table."""
    k = lay[5]
    n_codes = labels.size
    n_chunks = (n_codes + chunk - 1) // chunk
    for c in prange(n_chunks):
        sqs = np.empty(k, np.int64)
        tmp = np.empty(k + 1, np.int64)
        tgt = np.empty(64, np.int64)
        board = np.full(64, -1, np.int64)
        ok = np.empty(MAX_MOVES, np.int64)
        oi = np.empty(MAX_MOVES, np.int64)
        lo = c * chunk
        hi = min(lo + chunk, n_codes)
        for idx in range(lo, hi):
            out[idx] = _decomposed_one(idx, labels, lay, xl, sqs, tmp, tgt, board, ok, oi)


@njit(cache=True)
def decomposed_at(indices, labels, out, lay, xl):
    """The decomposed check restricted to ``indices`` (writes ``out[i]`` per entry)."""
    k = lay[5]
    sqs = np.empty(k, np.int64)
    tmp = np.empty(k + 1, np.int64)
    tgt = np.empty(64, np.int64)
    board = np.full(64, -1, np.int64)
    ok = np.empty(MAX_MOVES, np.int64)
    oi = np.empty(MAX_MOVES, np.int64)
    for i in range(indices.size):
        out[i] = _decomposed_one(indices[i], labels, lay, xl, sqs, tmp, tgt, board, ok, oi)


@njit(cache=True)
def successor_codes(idx, lay, xl):
    """Python-facing helper: (kinds, codes) of the successors of one code."""
    k = lay[5]
    sqs = np.empty(k, np.int64)
    tmp = np.empty(k + 1, np.int64)
    tgt = np.empty(64, np.int64)
    board = np.full(64, -1, np.int64)
    ok = np.empty(MAX_MOVES, np.int64)
    oi = np.empty(MAX_MOVES, np.int64)
    stm = decode_into(idx, k, sqs)
    occ = setup_board(sqs, k, board)
    n = successors(idx, sqs, lay, xl, stm, board, occ, tgt, tmp, ok, oi, False)
    return ok[:n].copy(), oi[:n].copy()


@njit(cache=True)
def predecessor_codes(idx, lay):
    k = lay[5]
    sqs = np.empty(k, np.int64)
    tmp = np.empty(k + 1, np.int64)
    tgt = np.empty(64, np.int64)
    board = np.full(64, -1, np.int64)
    out = np.empty(MAX_MOVES, np.int64)
    stm = decode_into(idx, k, sqs)
    occ = setup_board(sqs, k, board)
    n = predecessors(idx, sqs, lay, stm, board, occ, tgt, tmp, out)
    return out[:n].copy()


@njit(cache=True)
def predecessors_of_many(indices, lay):
    """Concatenated same-table predecessor codes of every code in ``indices``."""
    k = lay[5]
    sqs = np.empty(k, np.int64)
    tmp = np.empty(k + 1, np.int64)
    tgt = np.empty(64, np.int64)
    board = np.full(64, -1, np.int64)
    buf = np.empty(MAX_MOVES, np.int64)
    out = np.empty(indices.size * MAX_MOVES, np.int64)
    total = 0
    for i in range(indices.size):
        stm = decode_into(indices[i], k, sqs)
        occ = setup_board(sqs, k, board)
        n = predecessors(indices[i], sqs, lay, stm, board, occ, tgt, tmp, buf)
        clear_board(sqs, k, board)
        for m in range(n):
            out[total] = buf[m]
            total += 1
    return out[:total].copy()


@njit(cache=True)
def round_descent_scan(labels, rounds, lay, xl):
    """Count Win/Loss codes whose derivation round is not strictly justified.

    A Win needs some Loss successor with a smaller round; a non-terminal
    Loss needs every successor to be a Win with a smaller round.  Cross-table
    successors count as round 0.
    """
    k = lay[5]
    sub_labels = xl[8]
    sqs = np.empty(k, np.int64)
    tmp = np.empty(k + 1, np.int64)
    tgt = np.empty(64, np.int64)
    board = np.full(64, -1, np.int64)
    ok = np.empty(MAX_MOVES, np.int64)
    oi = np.empty(MAX_MOVES, np.int64)
    bad = 0
    for idx in range(labels.size):
        lab = labels[idx]
        if lab != WIN and lab != LOSS:
            continue
        own = rounds[idx]
        stm = decode_into(idx, k, sqs)
        occ = setup_board(sqs, k, board)
        n = successors(idx, sqs, lay, xl, stm, board, occ, tgt, tmp, ok, oi, False)
        clear_board(sqs, k, board)
        if n == 0:
            continue
        good = lab == LOSS
        for m in range(n):
            s = _label_of(ok[m], oi[m], labels, sub_labels)
            r = 0 if ok[m] == 1 else rounds[oi[m]]
            if lab == WIN:
                if s == LOSS and r < own:
                    good = True
                    break
            elif s != WIN or r >= own:
                good = False
                break
        if not good:
            bad += 1
    return bad
