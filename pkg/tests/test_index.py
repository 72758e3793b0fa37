import pytest
from hypothesis import given, settings, strategies as st

from cqd.index import canonical_code, decode, encode, layout, space_size
from cqd.rules import Position

SIGS = ["KvK", "KQvK", "KPvK", "KQvKR", "KQQvK", "KRvKN"]


def test_space_sizes():
    assert space_size("KvK") == 2 * 64 ** 2
    assert space_size("KQvKR") == 2 * 64 ** 4 == 33_554_432


def test_known_codes():
    p = Position.from_fen("8/8/8/8/8/8/8/K6k w - -")
    assert encode(p) == 0 * 64 + 7
    q = Position.from_fen("8/8/8/8/8/8/8/K6k b - -")
    assert encode(q) == 64 ** 2 + 7
    assert decode("KvK", 0) is None            # both kings on a1
    assert decode("KvK", 1) is None            # adjacent kings


def test_out_of_range():
    with pytest.raises(IndexError):
        decode("KvK", space_size("KvK"))
    with pytest.raises(IndexError):
        decode("KvK", -1)


def test_pawn_on_back_rank_is_invalid():
    # White king a1, pawn b8, black king h1.
    assert decode("KPvK", (0 * 64 + 57) * 64 + 7) is None


def test_identical_pieces_canonical_order():
    p = Position.from_fen("7k/8/8/8/8/8/8/KQQ5 w - -")
    code = encode(p)
    swapped = (0 * 64 + 2) * 64 + 1
    swapped = swapped * 64 + 63
    assert canonical_code("KQQvK", swapped) == code
    assert decode("KQQvK", swapped) == p
    assert bool(layout("KQQvK").has_dups) and not layout("KQvKR").has_dups


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(SIGS), st.data())
def test_decode_encode_round_trip(sig, data):
    i = data.draw(st.integers(0, space_size(sig) - 1))
    p = decode(sig, i)
    if p is None:
        return
    assert encode(p, sig) == canonical_code(sig, i)
    assert decode(sig, encode(p, sig)) == p
