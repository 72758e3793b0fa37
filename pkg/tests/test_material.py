import pytest

from cqd.chain import targets_up_to
from cqd.material import (
    ColorTransform, MaterialSignature, SignatureError, canonicalize_for_storage,
    capture_successor_signatures, chain_order, parse_signature, signature_of,
)
from cqd.rules import Position


def names(sigs):
    return sorted(s.name for s in sigs)


def test_parse_and_normalise():
    assert parse_signature("KQvKR").name == "KQvKR"
    assert parse_signature("QKvK").name == "KQvK"
    assert parse_signature("KQvKR").piece_count == 4
    for bad in ("KQK", "QvK", "KKvK", "KXvK", ""):
        with pytest.raises(SignatureError):
            parse_signature(bad)


def test_pawn_properties():
    assert parse_signature("KPvK").has_pawns
    assert parse_signature("KPvKP").two_sided_pawns
    assert not parse_signature("KPPvK").two_sided_pawns


def test_capture_successors():
    assert names(capture_successor_signatures(parse_signature("KQvK"))) == ["KvK"]
    assert names(capture_successor_signatures(parse_signature("KPvK"))) == \
        sorted(["KvK", "KQvK", "KRvK", "KBvK", "KNvK"])
    assert names(capture_successor_signatures(parse_signature("KQvKR"))) == ["KQvK", "KvKR"]
    assert capture_successor_signatures(parse_signature("KvK")) == set()


def test_storage_representative():
    rep, tr = canonicalize_for_storage(parse_signature("KvKQ"))
    assert rep.name == "KQvK" and tr.flip_colors and not tr.mirror_ranks
    rep, tr = canonicalize_for_storage(parse_signature("KvKP"))
    assert rep.name == "KPvK" and tr.mirror_ranks
    rep, tr = canonicalize_for_storage(parse_signature("KRvKQ"))
    assert rep.name == "KQvKR"
    assert canonicalize_for_storage(parse_signature("KRvKN"))[0].name == "KRvKN"


def test_transform_maps_positions_onto_representative():
    p = Position.from_fen("8/8/8/8/8/8/p7/K6k w - -")   # KvKP, black pawn a2
    rep, tr = canonicalize_for_storage(signature_of(p))
    q = tr.apply(p)
    assert signature_of(q) == rep
    assert q.fen() == "k6K/P7/8/8/8/8/8/8 b - -"
    with pytest.raises(ValueError):
        ColorTransform(False, True)


def test_chain_order_examples():
    assert [s.name for s in chain_order(["KQvK"])] == ["KvK", "KQvK"]
    order = [s.name for s in chain_order(["KPvK"])]
    assert len(order) == 6 and order[0] == "KvK" and order[-1] == "KPvK"
    assert set(order[1:5]) == {"KQvK", "KRvK", "KBvK", "KNvK"}


def test_chain_order_puts_dependencies_first():
    order = chain_order(targets_up_to(4))
    seen = set()
    for s in order:
        for d in capture_successor_signatures(s):
            assert canonicalize_for_storage(d)[0].name in seen, (s.name, d.name)
        seen.add(s.name)


def test_targets_up_to_excludes_two_sided_pawns():
    names4 = targets_up_to(4)
    assert "KPvKP" not in names4
    assert {"KvK", "KQvK", "KQvKR", "KQQvK", "KPPvK"} <= set(names4)
    assert all(parse_signature(n).piece_count <= 4 for n in names4)
    assert all(n == canonicalize_for_storage(parse_signature(n))[0].name for n in names4)


def test_signature_is_hashable_value():
    assert parse_signature("KRvK") == parse_signature("RKvK")
    assert len({parse_signature("KRvK"), parse_signature("KRvK")}) == 1
    assert parse_signature("KRvK").swapped().name == "KvKR"
