from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st
from sympy.matrices.normalforms import smith_normal_form

from latsubst.errors import BudgetExceeded, DetTooSmall, NotExpansive
from latsubst.lattice import (Coset, Inflation, charpoly, coset_contains, coset_measure,
                              cosets_intersect, determinant, enumerate_residues, is_expansive,
                              matmul, residue_of, smith_decomposition, validate_inflation)

from oracles import coset_mask

TWO_I = ((2, 0), (0, 2))
TWO_R = ((2, 2), (0, -2))
SAMPLE_INFLATIONS = [((2,),), ((-3,),), TWO_I, TWO_R, ((0, 2), (1, 0)), ((1, 1), (-1, 1)),
                     ((2, 1), (0, 3)), ((3, 0, 0), (0, 2, 1), (0, 0, 2))]

small_ints = st.integers(-20, 20)


def points(n):
    return st.tuples(*[small_ints] * n)


# --- validation -----------------------------------------------------------------------------

def test_two_identity_is_inflation_with_q_4():
    assert validate_inflation(TWO_I).q == 4


def test_twice_reflection_is_inflation_with_q_4():
    assert validate_inflation(TWO_R).q == 4


def test_unimodular_shear_rejected():
    with pytest.raises(DetTooSmall):
        validate_inflation(((1, 1), (0, 1)))


def test_neutral_direction_rejected():
    with pytest.raises(NotExpansive):
        validate_inflation(((1, 0), (0, 2)))


@pytest.mark.parametrize("m,expected", [
    (((1, 1), (-1, 1)), True), (((0, 2), (1, 0)), True), (((2, 1), (1, 1)), False),
    (((3, 1), (1, 1)), False), (((0, 1), (-2, 0)), True), (((1, 2), (2, 1)), False),
])
def test_expansive_examples(m, expected):
    assert is_expansive(m) is expected


@given(st.lists(st.integers(-4, 4), min_size=4, max_size=4))
def test_expansive_matches_numeric_roots(entries):
    m = ((entries[0], entries[1]), (entries[2], entries[3]))
    if abs(determinant(m)) < 2:
        return
    roots = np.roots([float(c) for c in charpoly(m)])
    moduli = np.abs(roots)
    if np.any(np.abs(moduli - 1) < 1e-6):
        return    # numeric oracle is not trustworthy on the unit circle
    assert is_expansive(m) == bool(np.all(moduli > 1))


@given(st.lists(st.integers(-3, 3), min_size=9, max_size=9))
def test_expansive_matches_numeric_roots_3d(entries):
    m = tuple(tuple(entries[3 * i:3 * i + 3]) for i in range(3))
    if abs(determinant(m)) < 2:
        return
    moduli = np.abs(np.roots([float(c) for c in charpoly(m)]))
    if np.any(np.abs(moduli - 1) < 1e-6):
        return
    assert is_expansive(m) == bool(np.all(moduli > 1))


@given(st.lists(st.integers(-5, 5), min_size=9, max_size=9))
def test_charpoly_and_det_match_sympy(entries):
    m = tuple(tuple(entries[3 * i:3 * i + 3]) for i in range(3))
    sm = sympy.Matrix(m)
    assert determinant(m) == sm.det()
    x = sympy.symbols("x")
    assert list(charpoly(m)) == sympy.Poly(sm.charpoly(x).as_expr(), x).all_coeffs()


# --- Smith form ------------------------------------------------------------------------------

@given(st.lists(st.integers(-6, 6), min_size=4, max_size=4))
def test_smith_decomposition_reconstructs_and_matches_sympy(entries):
    a = ((entries[0], entries[1]), (entries[2], entries[3]))
    if determinant(a) == 0:
        return
    u, diag, v, u_inv = smith_decomposition(a)
    d = tuple(tuple(diag[i] if i == j else 0 for j in range(2)) for i in range(2))
    assert matmul(u, matmul(d, v)) == a
    assert abs(determinant(u)) == 1 and abs(determinant(v)) == 1
    assert matmul(u_inv, u) == ((1, 0), (0, 1))
    assert diag[1] % diag[0] == 0 and all(x > 0 for x in diag)
    snf = smith_normal_form(sympy.Matrix(a), domain=sympy.ZZ)
    assert sorted(abs(snf[i, i]) for i in range(2)) == sorted(diag)


@pytest.mark.parametrize("q", SAMPLE_INFLATIONS)
def test_residue_system_diagonal_product(q):
    infl = Inflation(q)
    for k in range(4):
        rs = infl.residues(k)
        assert np.prod(rs.diagonal) == infl.q ** k == rs.size
        assert all(rs.diagonal[i + 1] % rs.diagonal[i] == 0 for i in range(len(rs.diagonal) - 1))


@pytest.mark.parametrize("q", [TWO_R, ((1, 1), (-1, 1)), ((2, 1), (0, 3))])
def test_group_coordinates_are_a_homomorphism(q):
    infl = Inflation(q)
    rs = infl.residues(3)
    rng = np.random.default_rng(0)
    for _ in range(50):
        x, y = rng.integers(-50, 50, 2), rng.integers(-50, 50, 2)
        gx, gy, gs = rs.group_coordinates(x), rs.group_coordinates(y), rs.group_coordinates(x + y)
        assert gs == tuple((a + b) % d for a, b, d in zip(gx, gy, rs.diagonal))
        assert (gx == rs.group_coordinates(rs.canonical(x)))


# --- residues -------------------------------------------------------------------------------

def test_zero_residue():
    assert residue_of(Inflation(TWO_I), (0, 0), 3).rep == (0, 0)


def test_componentwise_mod_two():
    assert residue_of(Inflation(TWO_I), (3, 2), 1).rep == (1, 0)


def test_twice_reflection_image_is_even_lattice():
    assert residue_of(Inflation(TWO_R), (1, 1), 1).rep == (1, 1)
    assert residue_of(Inflation(TWO_R), (3, -1), 1).rep == (1, 1)


def test_enumerate_counts():
    assert [c.rep for c in enumerate_residues(Inflation(TWO_I), 0)] == [(0, 0)]
    assert len(enumerate_residues(Inflation(TWO_I), 1)) == 4


def test_twice_reflection_depth_two_residues_are_distinct():
    infl = Inflation(TWO_R)
    cosets = enumerate_residues(infl, 2)
    assert len(cosets) == 16
    for a in cosets:
        for b in cosets:
            assert (a == b) == coset_mask(TWO_R, 2, a.rep, [b.rep])[0]


def test_enumeration_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_residues(Inflation(TWO_I), 5, budget=100)


@pytest.mark.parametrize("q", SAMPLE_INFLATIONS)
def test_canonical_reps_idempotent_and_stable(q):
    infl = Inflation(q)
    for k in range(3):
        reps = [c.rep for c in enumerate_residues(infl, k)]
        assert len(set(reps)) == infl.q ** k
        assert all(residue_of(infl, r, k).rep == r for r in reps)
        assert [c.rep for c in enumerate_residues(infl, k)] == reps


@given(st.sampled_from(SAMPLE_INFLATIONS), st.integers(0, 4), st.data())
def test_residue_invariant_under_lattice_shift(q, k, data):
    infl = Inflation(q)
    n = infl.dim
    x = data.draw(points(n))
    y = data.draw(points(n))
    shifted = tuple(a + b for a, b in zip(x, infl.apply(y, k)))
    assert residue_of(infl, x, k) == residue_of(infl, shifted, k)


@given(st.sampled_from(SAMPLE_INFLATIONS), st.integers(0, 3), st.data())
def test_equal_residue_iff_difference_in_sublattice(q, k, data):
    infl = Inflation(q)
    n = infl.dim
    x, y = data.draw(points(n)), data.draw(points(n))
    same = residue_of(infl, x, k) == residue_of(infl, y, k)
    assert same == bool(coset_mask(q, k, y, [x])[0])


@given(st.sampled_from(SAMPLE_INFLATIONS), st.integers(0, 3), st.data())
def test_index_array_matches_scalar_index(q, k, data):
    infl = Inflation(q)
    pts = data.draw(st.lists(points(infl.dim), min_size=1, max_size=20))
    rs = infl.residues(k)
    assert rs.index_array(pts).tolist() == [rs.index(p) for p in pts]
    assert [tuple(r) for r in rs.canonical_array(pts).tolist()] == [rs.canonical(p) for p in pts]


# --- measures and containment ---------------------------------------------------------------

def test_measures():
    infl = Inflation(TWO_I)
    assert coset_measure(infl, residue_of(infl, (0, 0), 0)) == 1
    assert coset_measure(infl, residue_of(infl, (0, 0), 2)) == Fraction(1, 16)
    assert coset_measure(infl, residue_of(infl, (0, 0), 8)) == Fraction(1, 65536)


@pytest.mark.parametrize("q", SAMPLE_INFLATIONS)
def test_measures_sum_to_one(q):
    infl = Inflation(q)
    for k in range(3):
        assert sum(coset_measure(infl, c) for c in enumerate_residues(infl, k)) == 1


def test_containment_examples():
    infl = Inflation(TWO_I)
    whole = residue_of(infl, (5, 7), 0)
    assert coset_contains(whole, residue_of(infl, (3, 1), 3))
    assert not coset_contains(residue_of(infl, (0, 0), 1), residue_of(infl, (1, 0), 1))
    assert coset_contains(residue_of(infl, (0, 0), 1), residue_of(infl, (2, 2), 2))


@given(st.sampled_from(SAMPLE_INFLATIONS[:6]), st.integers(0, 3), st.integers(0, 3), st.data())
def test_coset_trichotomy_against_point_sampling(q, ka, kb, data):
    infl = Inflation(q)
    n = infl.dim
    a = residue_of(infl, data.draw(points(n)), ka)
    b = residue_of(infl, data.draw(points(n)), kb)
    relations = [not cosets_intersect(a, b), coset_contains(a, b), coset_contains(b, a)]
    if a == b:
        assert relations == [False, True, True]
    else:
        assert sum(relations) == 1
    box = np.stack(np.meshgrid(*[np.arange(-16, 16)] * n, indexing="ij"), axis=-1).reshape(-1, n)
    in_a, in_b = coset_mask(q, ka, a.rep, box), coset_mask(q, kb, b.rep, box)
    assert (in_a & in_b).any() == cosets_intersect(a, b)
    if coset_contains(a, b):
        assert not (in_b & ~in_a).any()


@pytest.mark.parametrize("q", SAMPLE_INFLATIONS)
def test_intersection_of_powers_is_trivial_on_a_box(q):
    # every nonzero point in the box leaves Q^k L for some small k
    infl = Inflation(q)
    n = infl.dim
    box = [p for p in np.ndindex(*([9] * n))]
    for p in box:
        x = tuple(v - 4 for v in p)
        if any(x):
            assert any(residue_of(infl, x, k).rep != (0,) * n for k in range(1, 12)), x


def test_coset_str_and_order():
    infl = Inflation(TWO_I)
    cs = [residue_of(infl, (1, 1), 1), Coset(infl, 0, (0, 0))]
    assert sorted(cs, key=Coset.sort_key)[0].depth == 0
    assert str(cs[0]) == "(1, 1)+Q^1L"
