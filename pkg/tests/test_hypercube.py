"""Bit-packed points, parities, truth tables, and exact distances."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from junta_walk.hypercube import (
    IndexSet,
    JuntaHypothesis,
    Point,
    TruthTable,
    chi,
    distance_exact,
    eval_junta,
    flip,
    parity_sign_u64,
    popcount_u64,
    restriction_indices,
    sample_distance,
)
from junta_walk.functions import and_table, parity_table


@st.composite
def dim_and_masks(draw, max_n=10, count=1):
    n = draw(st.integers(min_value=1, max_value=max_n))
    masks = [draw(st.integers(min_value=0, max_value=(1 << n) - 1)) for _ in range(count)]
    return (n, *masks)


# ---------------------------------------------------------------------------
# Point encoding


def test_point_all_plus_is_zero_word():
    p = Point(5)
    assert p.bits == 0
    assert p.signs() == (1, 1, 1, 1, 1)


def test_basis_point_sets_single_bit():
    e3 = Point.basis(6, 3)
    assert e3.bits == 0b100
    assert e3.coord(3) == -1
    assert all(e3.coord(i) == 1 for i in (1, 2, 4, 5, 6))


@given(dim_and_masks(count=1))
def test_signs_round_trip(nm):
    n, bits = nm
    p = Point(n, bits)
    assert Point.from_signs(p.signs()) == p


@given(dim_and_masks(count=1))
def test_text_round_trip(nm):
    n, bits = nm
    p = Point(n, bits)
    text = p.to_text()
    assert len(text) == n
    assert set(text) <= {"+", "-"}
    assert Point.from_text(text) == p


def test_text_example():
    # coordinate 1 is the leftmost character
    p = Point.from_signs([1, -1, 1, -1])
    assert p.to_text() == "+-+-"


@given(dim_and_masks(count=2))
def test_mul_is_xor(nmm):
    n, a, b = nmm
    x, y = Point(n, a), Point(n, b)
    assert x.mul(y).bits == a ^ b
    assert x.mul(y) == y.mul(x)
    assert x.mul(x) == Point(n)  # every point is its own inverse


def test_point_rejects_out_of_range_bits():
    with pytest.raises(ValueError):
        Point(3, 0b1000)
    with pytest.raises(ValueError):
        Point(0, 0)
    with pytest.raises(ValueError):
        Point.from_signs([1, 0, -1])


@given(dim_and_masks(count=1), st.data())
def test_flip_changes_exactly_one_coordinate(nm, data):
    n, bits = nm
    i = data.draw(st.integers(min_value=1, max_value=n))
    x = Point(n, bits)
    y = flip(x, i)
    assert y.coord(i) == -x.coord(i)
    assert all(y.coord(j) == x.coord(j) for j in range(1, n + 1) if j != i)
    assert flip(y, i) == x


# ---------------------------------------------------------------------------
# Index sets and parities


def test_index_set_basics():
    S = IndexSet.of(8, [2, 5, 7])
    assert len(S) == 3
    assert S.coords() == (2, 5, 7)
    assert 5 in S and 4 not in S and 9 not in S
    assert S.mask == 0b1010010


@given(dim_and_masks(count=2))
def test_complement_partitions(nmm):
    n, a, _ = nmm
    S = IndexSet(n, a)
    C = S.complement()
    assert S.mask & C.mask == 0
    assert S.mask | C.mask == (1 << n) - 1
    assert len(S) + len(C) == n


@given(dim_and_masks(count=2))
def test_union_matches_or(nmm):
    n, a, b = nmm
    assert IndexSet(n, a).union(IndexSet(n, b)).mask == a | b


@given(dim_and_masks(max_n=12, count=3))
def test_chi_multiplicative(nmmm):
    n, s, a, b = nmmm
    S = IndexSet(n, s)
    x, y = Point(n, a), Point(n, b)
    assert chi(S, x.mul(y)) == chi(S, x) * chi(S, y)


def test_chi_on_basis_points():
    S = IndexSet.of(7, [1, 4])
    for i in range(1, 8):
        expected = -1 if i in S else 1
        assert chi(S, Point.basis(7, i)) == expected


def test_chi_empty_set_is_constant_one():
    for bits in range(16):
        assert chi(IndexSet(4, 0), Point(4, bits)) == 1


@given(dim_and_masks(max_n=16, count=2))
def test_parity_sign_matches_scalar_chi(nmm):
    n, s, x = nmm
    arr = np.arange(1 << min(n, 10), dtype=np.uint64)
    signs = parity_sign_u64(arr, s)
    S = IndexSet(n, s)
    for bits in (0, int(arr[-1]), x % len(arr)):
        assert signs[bits] == chi(S, Point(n, bits))


def test_popcount_u64():
    arr = np.array([0, 1, 3, 0xFF, (1 << 63) | 1], dtype=np.uint64)
    np.testing.assert_array_equal(popcount_u64(arr), [0, 1, 2, 8, 2])


# ---------------------------------------------------------------------------
# Truth tables


def test_truth_table_rejects_bad_values():
    with pytest.raises(ValueError):
        TruthTable(2, [1, 1, 0, -1])
    with pytest.raises(ValueError):
        TruthTable(2, [1, 1, -1])  # wrong length


def test_truth_table_call_and_vectorized_agree():
    rng = np.random.default_rng(0)
    values = rng.choice(np.array([-1, 1], dtype=np.int8), size=32)
    f = TruthTable(5, values)
    bits = np.arange(32, dtype=np.uint64)
    np.testing.assert_array_equal(f.label_bits(bits), [f(int(b)) for b in bits])


def test_truth_table_json_round_trip():
    f = parity_table(4, [1, 3])
    g = TruthTable.from_json(f.to_json())
    assert g.n == f.n
    np.testing.assert_array_equal(g.values, f.values)


def test_truth_table_values_read_only():
    f = parity_table(3, [2])
    with pytest.raises(ValueError):
        f.values[0] = -1


def test_negate():
    f = and_table(3, [1, 2])
    np.testing.assert_array_equal(f.negate().values, -f.values)


# ---------------------------------------------------------------------------
# Junta hypotheses


def test_restriction_index_uses_increasing_coordinate_order():
    # J = {2, 5}: bit 0 of the index comes from coordinate 2, bit 1 from 5
    h = JuntaHypothesis(IndexSet.of(6, [2, 5]), [1, -1, 1, -1])
    x = Point.from_signs([1, -1, 1, 1, 1, 1])  # coordinate 2 is -1
    assert h.restriction_index(x.bits) == 0b01
    y = Point.from_signs([1, 1, 1, 1, -1, 1])  # coordinate 5 is -1
    assert h.restriction_index(y.bits) == 0b10


@given(st.integers(min_value=1, max_value=8), st.data())
def test_junta_table_round_trip(n, data):
    k = data.draw(st.integers(min_value=0, max_value=min(n, 3)))
    coords = data.draw(
        st.lists(st.integers(1, n), min_size=k, max_size=k, unique=True)
    )
    table = data.draw(
        st.lists(st.sampled_from([-1, 1]), min_size=1 << k, max_size=1 << k)
    )
    h = JuntaHypothesis(IndexSet.of(n, coords), table)
    f = h.to_truth_table()
    for bits in range(1 << n):
        assert f(bits) == h(bits)


def test_junta_ignores_coordinates_outside_J():
    h = JuntaHypothesis(IndexSet.of(5, [2]), [1, -1])
    x = Point.from_signs([1, -1, 1, 1, 1])
    for j in (1, 3, 4, 5):
        assert eval_junta(h, flip(x, j)) == eval_junta(h, x)
    assert eval_junta(h, flip(x, 2)) != eval_junta(h, x)


def test_junta_json_round_trip():
    h = JuntaHypothesis(IndexSet.of(6, [1, 4]), [1, -1, -1, 1])
    g = JuntaHypothesis.from_json(h.to_json(), 6)
    assert g.J == h.J
    np.testing.assert_array_equal(g.table, h.table)


def test_eval_junta_dimension_mismatch():
    h = JuntaHypothesis(IndexSet.of(4, [1]), [1, -1])
    with pytest.raises(ValueError):
        eval_junta(h, Point(5))


def test_restriction_indices_matches_scalar():
    J = IndexSet.of(8, [1, 3, 8])
    h = JuntaHypothesis(J, [1] * 8)
    bits = np.arange(256, dtype=np.uint64)
    np.testing.assert_array_equal(
        restriction_indices(J, bits), [h.restriction_index(int(b)) for b in bits]
    )


# ---------------------------------------------------------------------------
# Distances


def test_distance_to_self_and_negation():
    f = parity_table(5, [1, 2, 5])
    assert distance_exact(f, f) == 0
    assert distance_exact(f, f.negate()) == 1


def test_distance_between_shifted_ands():
    # AND on {1,2,3} vs AND on {2,3,4} at n=4 disagree on exactly 2 of 16 points
    f = and_table(4, [1, 2, 3])
    g = and_table(4, [2, 3, 4])
    assert distance_exact(f, g) == Fraction(1, 8)


@given(st.integers(min_value=1, max_value=8), st.data())
def test_distance_via_inner_product(n, data):
    fv = data.draw(
        st.lists(st.sampled_from([-1, 1]), min_size=1 << n, max_size=1 << n)
    )
    gv = data.draw(
        st.lists(st.sampled_from([-1, 1]), min_size=1 << n, max_size=1 << n)
    )
    f, g = TruthTable(n, fv), TruthTable(n, gv)
    ip = Fraction(int(np.dot(np.array(fv, dtype=np.int64), gv)), 1 << n)
    assert distance_exact(f, g) == (1 - ip) / 2


def test_distance_accepts_junta_argument():
    h = JuntaHypothesis(IndexSet.of(3, [2]), [1, -1])
    assert distance_exact(h.to_truth_table(), h) == 0


def test_sample_distance_counts_exactly():
    h = JuntaHypothesis(IndexSet.of(3, [1]), [1, -1])
    points = np.array([0b000, 0b001, 0b010, 0b011], dtype=np.uint64)
    labels = np.array([1, -1, -1, -1], dtype=np.int8)
    # h disagrees only at 0b010 (coordinate 1 is +1 there but label is -1)
    assert sample_distance(h, (points, labels)) == Fraction(1, 4)


def test_sample_distance_rejects_empty():
    h = JuntaHypothesis(IndexSet.of(3, [1]), [1, -1])
    with pytest.raises(ValueError):
        sample_distance(h, (np.array([], dtype=np.uint64), np.array([])))
