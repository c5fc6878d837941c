import pytest
from hypothesis import given, strategies as st

from coded_consensus.diagnosis import (
    ProtocolError,
    accuse_all,
    apply_dispute,
    fresh_graph,
    reduced_params,
    trusts,
)


def test_single_dispute():
    g = apply_dispute(fresh_graph(4, 1), 0, 1)
    assert not trusts(g, 0, 1) and not trusts(g, 1, 0)
    assert g.accusers(0) == {1} and g.accusers(1) == {0}
    assert trusts(g, 0, 2)


def test_threshold_isolates():
    g = fresh_graph(7, 2)
    g = apply_dispute(g, 3, 0)
    g = apply_dispute(g, 3, 1)
    assert 3 not in g.isolated
    g = apply_dispute(g, 3, 2)
    assert g.isolated == {3}
    assert reduced_params(g) == (6, 1)


def test_repeated_dispute_idempotent():
    g1 = apply_dispute(fresh_graph(4, 1), 0, 1)
    assert apply_dispute(g1, 0, 1) == g1
    assert apply_dispute(g1, 1, 0) == g1


def test_accuse_all_isolates_once():
    g = accuse_all(fresh_graph(4, 1), 2)
    assert g.isolated == {2}
    assert reduced_params(g) == (3, 0)
    assert accuse_all(g, 2) == g
    g = apply_dispute(apply_dispute(fresh_graph(7, 2), 4, 0), 4, 1)
    g = accuse_all(g, 4)
    assert g.isolated == {4}


def test_isolated_nodes_trusted_by_nobody():
    g = accuse_all(fresh_graph(4, 1), 3)
    assert not any(trusts(g, 3, j) or trusts(g, j, 3) for j in range(4))
    assert apply_dispute(g, 3, 0) == g


def test_fresh_graph():
    g = fresh_graph(5, 1)
    assert reduced_params(g) == (5, 1)
    assert all(trusts(g, i, j) == (i != j) for i in range(5) for j in range(5))


def test_full_isolation_degenerates():
    g = fresh_graph(7, 2)
    g = accuse_all(accuse_all(g, 5), 6)
    assert reduced_params(g) == (5, 0)


def test_too_many_isolations_is_protocol_error():
    g = accuse_all(fresh_graph(4, 1), 0)
    with pytest.raises(ProtocolError):
        accuse_all(g, 1)


def test_bad_arguments():
    with pytest.raises(ValueError):
        apply_dispute(fresh_graph(4, 1), 2, 2)
    with pytest.raises(ValueError):
        apply_dispute(fresh_graph(4, 1), 0, 4)


def test_serialization_is_canonical():
    a = apply_dispute(apply_dispute(fresh_graph(7, 2), 1, 0), 5, 2)
    b = apply_dispute(apply_dispute(fresh_graph(7, 2), 2, 5), 0, 1)
    assert a.to_dict() == b.to_dict()


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=40),
       st.sets(st.integers(0, 6), min_size=1, max_size=2))
def test_disputes_involving_faulty_never_isolate_fault_free(pairs, faulty):
    g = fresh_graph(7, 2)
    prev = g
    for a, b in pairs:
        if a == b or (a not in faulty and b not in faulty):
            continue
        g = apply_dispute(g, a, b)
        assert g.isolated <= faulty
        assert prev.accusations <= g.accusations and prev.isolated <= g.isolated
        prev = g
        for f in faulty:
            # a faulty node with t0 + 1 distinct accusers is gone
            if len({x for x, y in g.accusations if y == f}) >= 3:
                assert f in g.isolated
