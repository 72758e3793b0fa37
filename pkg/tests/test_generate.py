import numpy as np
import pytest

from cqd import _kernels as K
from cqd.generate import GenerationStats, SignatureRejected, generate
from cqd.index import encode, layout
from cqd.rules import Position
from cqd.tablebase import CrossLinks, Label, SubModelSet, get_label


def label(t, fen):
    return get_label(t, encode(Position.from_fen(fen), t.signature))


def test_kvk_is_all_draw(small_chain):
    t = small_chain[0].tables["KvK"]
    valid = t.labels != Label.INVALID
    assert int(valid.sum()) == 2 * 3612
    assert np.all(t.labels[valid] == Label.DRAW)


def test_kqk_known_values(small_chain):
    t = small_chain[0].tables["KQvK"]
    assert label(t, "k7/1Q6/1K6/8/8/8/8/8 b - -") is Label.LOSS      # mate
    assert label(t, "k7/8/1QK5/8/8/8/8/8 b - -") is Label.DRAW       # stalemate
    assert label(t, "k7/1Q6/8/8/8/8/8/7K b - -") is Label.DRAW       # queen hangs
    assert label(t, "7k/8/8/8/8/8/8/KQ6 w - -") is Label.WIN
    assert label(t, "7k/8/8/8/8/8/8/KQ6 b - -") is Label.LOSS


def test_kpk_known_values(small_chain):
    t = small_chain[0].tables["KPvK"]
    # King on the sixth in front of its pawn wins whoever moves.
    assert label(t, "4k3/8/4K3/4P3/8/8/8/8 w - -") is Label.WIN
    assert label(t, "4k3/8/4K3/4P3/8/8/8/8 b - -") is Label.LOSS
    assert label(t, "4k3/4P3/4K3/8/8/8/8/8 b - -") is Label.DRAW    # stalemate
    assert label(t, "8/8/8/8/8/8/P6k/K7 w - -") is Label.WIN        # outside the square
    assert label(t, "8/8/8/8/8/k7/P7/K7 w - -") is Label.DRAW       # rook pawn, blocked king


def test_stats_bookkeeping(small_chain):
    _, stats = small_chain
    st = stats["KQvK"]
    assert st.passes == 20
    assert sum(st.labeled_per_pass) + st.draws_by_default == st.wins + st.draws + st.losses
    assert st.invalid + st.wins + st.draws + st.losses == 2 * 64 ** 3
    assert st.terminal_count + st.capture_count + st.quiet_count == st.wins + st.draws + st.losses
    assert GenerationStats.from_json(st.to_json()) == st


@pytest.mark.parametrize("sig", ["KQvK", "KRvK", "KPvK"])
def test_frontier_matches_scan(sig, small_chain):
    sub, _ = small_chain
    a, sa = generate(sig, sub, method="frontier")
    b, sb = generate(sig, sub, method="scan")
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.rounds, b.rounds)
    assert sa.passes == sb.passes


@pytest.mark.parametrize("sig", ["KvK", "KQvK", "KRvK", "KBvK", "KNvK", "KPvK"])
def test_rounds_are_well_founded(sig, small_chain):
    sub, _ = small_chain
    t = sub.tables[sig]
    xl = CrossLinks.build(sig, sub).as_tuple()
    assert K.round_descent_scan(t.labels, t.rounds, layout(sig).as_tuple(), xl) == 0


def test_round_descent_detects_a_bad_round(small_chain):
    sub, _ = small_chain
    t = sub.tables["KQvK"]
    rounds = t.rounds.copy()
    win = int(np.flatnonzero((t.labels == Label.WIN) & (t.rounds > 3))[0])
    rounds[win] = 1
    xl = CrossLinks.build("KQvK", sub).as_tuple()
    assert K.round_descent_scan(t.labels, rounds, layout("KQvK").as_tuple(), xl) >= 1


def test_generation_is_deterministic(small_chain):
    sub, _ = small_chain
    a, _ = generate("KRvK", sub)
    b, _ = generate("KRvK", sub)
    assert a.to_bytes() == b.to_bytes()


def test_rejects_two_sided_pawns():
    with pytest.raises(SignatureRejected):
        generate("KPvKP", SubModelSet())


def test_unknown_method(small_chain):
    with pytest.raises(ValueError):
        generate("KQvK", small_chain[0], method="magic")
