from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from coded_consensus.gf import GF2m
from coded_consensus.rs import (
    CodeSpec,
    PuncturedCode,
    encode,
    is_codeword,
    min_distance_exhaustive,
    puncture,
)

F8 = GF2m(3)  # x^3 = x + 1
ALPHA = 2
C42 = CodeSpec(F8, 4, 2)


def poly_eval(F, coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = F.mul(acc, x) ^ c
    return acc


def brute_force_encode(F, data, n):
    """Search every degree < k polynomial for the one through the data points."""
    k = len(data)
    pts = [F.pow(ALPHA, i) for i in range(n)]
    hits = [
        coeffs
        for coeffs in product(range(F.order), repeat=k)
        if all(poly_eval(F, coeffs, pts[i]) == data[i] for i in range(k))
    ]
    assert len(hits) == 1
    return tuple(poly_eval(F, hits[0], p) for p in pts)


def test_evaluation_points_are_generator_powers():
    assert C42.points == (1, ALPHA, F8.mul(ALPHA, ALPHA), 3)


def test_encode_examples():
    assert encode((0, 0), C42) == (0, 0, 0, 0)
    for c in range(8):
        assert encode((c, c), C42) == (c, c, c, c)
    a2 = F8.mul(ALPHA, ALPHA)
    assert encode((1, 0), C42) == (1, 0, ALPHA, a2 ^ ALPHA)


def test_encode_matches_brute_force_interpolation():
    for data in product(range(8), repeat=2):
        assert encode(data, C42) == brute_force_encode(F8, data, 4)


def test_encode_errors():
    with pytest.raises(ValueError):
        encode((1, 2, 3), C42)
    with pytest.raises(ValueError):
        encode((1, 8), C42)


def test_is_codeword_single_symbol_changes_detected():
    for cw in C42.codewords():
        assert is_codeword(cw, C42)
        for pos in range(4):
            for other in range(8):
                if other != cw[pos]:
                    bad = list(cw)
                    bad[pos] = other
                    assert not is_codeword(bad, C42)


def test_is_codeword_edge_cases():
    assert is_codeword((0, 0, 0, 0), C42)
    assert not is_codeword((1, 0, ALPHA, None), C42)
    with pytest.raises(ValueError):
        is_codeword((0, 0, 0), C42)


@pytest.mark.parametrize("m", [2, 3])
def test_is_codeword_iff_distance_zero(m):
    F = GF2m(m)
    code = CodeSpec(F, 4, 2)
    words = set(code.codewords())
    for w in product(range(F.order), repeat=4):
        assert is_codeword(w, code) == (w in words)


def test_gf4_uses_zero_as_last_point():
    code = CodeSpec(GF2m(2), 4, 2)
    assert sorted(code.points) == [0, 1, 2, 3]
    assert min_distance_exhaustive(code) == 3


def test_puncture_all_positions_is_identical():
    p = puncture(C42, range(4))
    assert list(p.codewords()) == list(C42.codewords())
    assert p.distance == C42.distance == 3


@pytest.mark.parametrize("keep", list(combinations(range(4), 3)))
def test_puncture_three_positions_distance_two(keep):
    p = puncture(C42, keep)
    assert min_distance_exhaustive(p) == 2 == p.distance


def test_puncture_to_systematic_positions_accepts_everything():
    p = puncture(C42, [0, 1])
    for a, b in product(range(8), repeat=2):
        assert p.contains({0: a, 1: b})
        assert p.decode({0: a, 1: b}) == (a, b)


def test_puncture_errors():
    with pytest.raises(ValueError):
        puncture(C42, [2])
    with pytest.raises(ValueError):
        puncture(C42, [0, 9])
    with pytest.raises(ValueError):
        puncture(C42, [0, 1, 2]).contains({0: 1, 1: 2})


def test_punctured_decode_recovers_data_from_parity_positions():
    cw = encode((5, 3), C42)
    p = puncture(C42, [2, 3])
    assert p.decode({2: cw[2], 3: cw[3]}) == (5, 3)
    with pytest.raises(ValueError):
        puncture(C42, [1, 2, 3]).decode({1: cw[1] ^ 1, 2: cw[2], 3: cw[3]})


def test_min_distance_examples():
    assert min_distance_exhaustive(C42) == 3
    assert min_distance_exhaustive(puncture(C42, [0, 1, 3])) == 2
    assert min_distance_exhaustive(CodeSpec(F8, 7, 3)) == 5
    with pytest.raises(ValueError):
        min_distance_exhaustive(CodeSpec(GF2m(16), 10, 4))


def test_degenerate_specs_rejected():
    with pytest.raises(ValueError):
        CodeSpec(F8, 4, 4)
    with pytest.raises(ValueError):
        CodeSpec.for_network(4, 0, 3)
    with pytest.raises(ValueError):
        CodeSpec.for_network(6, 2, 3)
    with pytest.raises(ValueError):
        CodeSpec(GF2m(2), 5, 1)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([(4, 1, 3), (7, 2, 3), (7, 2, 8), (10, 3, 64)]), st.data())
def test_systematic_roundtrip_and_determinism(cfg, data):
    n, t, m = cfg
    code = CodeSpec.for_network(n, t, m)
    d = tuple(data.draw(st.lists(st.integers(0, (1 << m) - 1), min_size=code.k, max_size=code.k)))
    cw = code.encode(d)
    assert cw[: code.k] == d
    assert code.encode(cw[: code.k]) == cw == code.encode(d)
    assert code.is_codeword(cw)
    keep = data.draw(st.sets(st.integers(0, n - 1), min_size=code.k))
    p = PuncturedCode(code, keep)
    assert p.decode({q: cw[q] for q in keep}) == d
