from collections import Counter
from fractions import Fraction

import pytest

from orbitool.group_lattice import a_r_n, all_characters, character_of, parse_group
from orbitool.staircase_hilb import (
    EnumerationBoundError,
    Staircase,
    StaircaseError,
    ar3_problems,
    brute_force_fixed_points,
    census,
    cone_of_staircase,
    enumerate_fixed_points,
    fixed_point_report,
    is_regular,
    matched_partner,
    minimal_generators,
    text_grid,
)

from oracles import random_groups


def l_shape(r, k):
    return Staircase.from_points([(i, 0) for i in range(k + 1)] + [(0, j) for j in range(1, r - k + 1)])


def test_order_ideal_validation():
    with pytest.raises(StaircaseError):
        Staircase.from_points([(0, 0), (2, 0)])
    with pytest.raises(StaircaseError):
        Staircase.from_points([])


def test_full_box_generators():
    box = Staircase.from_points([(i, j) for i in range(3) for j in range(2)])
    assert minimal_generators(box) == [(0, 2), (3, 0)]


def test_ar2_l_shapes():
    for r in range(1, 7):
        G = a_r_n(r, 2)
        for k in range(r + 1):
            st = l_shape(r, k)
            assert is_regular(G, st)
            listed = {(k + 1, 0), (0, r + 1 - k), (1, 1)}
            assert Staircase.from_generators(listed, (r + 2, r + 2)) == st
            # Z1Z2 is redundant at the two ends of the chain
            assert set(minimal_generators(st)) == {g for g in listed if g != (1, 1) or 0 < k < r}
            if k < r:
                assert matched_partner(G, st, (k + 1, 0)) == (0, r - k)
            assert matched_partner(G, st, (1, 1)) == (0, 0)
            cone = cone_of_staircase(G, st)
            want = {(Fraction(r + 1 - j, r + 1), Fraction(j, r + 1)) for j in (k, k + 1)}
            assert set(cone.points()) == want


def test_a14_charts():
    G = a_r_n(1, 4)
    # square-free monomials in Z2, Z3, Z4
    delta1 = Staircase.from_points([(0, a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)])
    assert is_regular(G, delta1)
    h = Fraction(1, 2)
    assert set(cone_of_staircase(G, delta1).points()) == {(1, 0, 0, 0), (h, h, 0, 0), (h, 0, h, 0), (h, 0, 0, h)}

    c1 = Staircase.from_points([(0, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1),
                                (0, 1, 1, 0), (0, 1, 0, 1), (0, 0, 1, 1), (1, 0, 0, 0)])
    gens = minimal_generators(c1)
    assert {(0, 1, 1, 1), (1, 1, 0, 0), (1, 0, 1, 0), (1, 0, 0, 1)} <= set(gens)
    assert matched_partner(G, c1, (0, 1, 1, 1)) == (1, 0, 0, 0)
    assert character_of(G, (0, 1, 1, 1)) == character_of(G, (1, 0, 0, 0))
    q = Fraction(1, 4)
    pts = set(cone_of_staircase(G, c1).points())
    assert (q, q, q, q) in pts and {(h, h, 0, 0), (h, 0, h, 0), (h, 0, 0, h)} <= pts


def test_non_regular_inputs():
    G = a_r_n(2, 2)
    origin = Staircase.from_points([(0, 0)])
    assert not is_regular(G, origin)
    with pytest.raises(StaircaseError):
        matched_partner(G, origin, (1, 0))


def test_trivial_group_has_one_fixed_point():
    G = a_r_n(0, 3)
    (st,) = enumerate_fixed_points(G)
    assert st.points == ((0, 0, 0),)
    assert len(cone_of_staircase(G, st).rays) == 3


@pytest.mark.parametrize("r,n", [(1, 2), (3, 2), (2, 3), (1, 4), (2, 4)])
def test_round_trip_and_census(r, n):
    G = a_r_n(r, n)
    for st in enumerate_fixed_points(G):
        box = [max(p[i] for p in minimal_generators(st)) + 1 for i in range(n)]
        assert Staircase.from_generators(minimal_generators(st), box) == st
        c = census(G, st)
        assert len(st) == G.order and set(c) == set(all_characters(G)) and set(c.values()) == {1}
        rep = fixed_point_report(G, st)
        assert rep.to_json()["census_total"] == len(st)


def test_counts():
    assert [len(enumerate_fixed_points(a_r_n(r, 2))) for r in range(1, 11)] == list(range(2, 12))
    assert len(enumerate_fixed_points(a_r_n(1, 4))) == 12
    for r in range(1, 4):
        assert len(enumerate_fixed_points(a_r_n(r, 3))) == (r + 1) ** 2


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_ar3_classification(r):
    G = a_r_n(r, 3)
    for st in enumerate_fixed_points(G):
        assert ar3_problems(G, st, r) == []


def test_a14_types():
    # 4 charts around the corners e^j and 8 around the barycentre c
    G = a_r_n(1, 4)
    q = (Fraction(1, 4),) * 4
    cones = [set(cone_of_staircase(G, st).points()) for st in enumerate_fixed_points(G)]
    corners = Counter(p for pts in cones for p in pts if sum(1 for x in p if x) == 1)
    assert corners == Counter({p: 1 for p in [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]})
    assert sum(q in pts for pts in cones) == 8


def test_bound_error():
    with pytest.raises(EnumerationBoundError):
        enumerate_fixed_points(a_r_n(2, 4), bound=20)


def test_parallel_matches_serial():
    G = a_r_n(2, 3)
    assert enumerate_fixed_points(G, workers=2) == enumerate_fixed_points(G, workers=1)


def test_oracle_equivalence_a_groups():
    for n in range(2, 6):
        for r in range(1, 16):
            if (r + 1) ** (n - 1) <= 16:
                G = a_r_n(r, n)
                assert enumerate_fixed_points(G) == brute_force_fixed_points(G), (r, n)


@pytest.mark.parametrize("spec", random_groups(7, 30) + [
    {"n": 3, "d": 4, "gens": [[1, 3, 0], [0, 1, 3]]},
    {"n": 3, "d": 16, "gens": [[1, 2, 13]]},
    {"n": 4, "d": 2, "gens": [[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]]},
])
def test_oracle_equivalence_random(spec):
    G = parse_group(spec)
    assert G.order <= 16
    assert enumerate_fixed_points(G) == brute_force_fixed_points(G)


def test_text_grid():
    grid = text_grid(l_shape(3, 1))
    assert grid.splitlines()[0].split() == ["3", "×", "·", "·"]
    assert "•" in grid and "×" in grid
