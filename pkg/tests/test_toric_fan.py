from fractions import Fraction
from itertools import combinations
from math import factorial

import pytest

from orbitool.group_lattice import a_r_n, character_of, n_coordinates
from orbitool.linalg import det, dot
from orbitool.resolutions import build_a14, build_minimal_ar2, build_xi_ar3, hilb_fan
from orbitool.toric_fan import (
    Cone,
    DecompositionError,
    HilbertBasisBoundError,
    UnsupportedError,
    build_decomposition,
    cell_cone,
    cell_volume,
    discrepancies,
    dual_cone_hilbert_basis,
    euler_number,
    interior_facets,
    is_crepant,
    is_smooth,
    primitive_ray,
    star_classify,
    strata,
    wall_relation,
)

H = Fraction(1, 2)
A14 = a_r_n(1, 4)


def corners(n):
    return [tuple(int(i == j) for j in range(n)) for i in range(n)]


def simplex(n):
    return build_decomposition(corners(n), [range(n)])


def corpus():
    out = [(build_a14(k), A14) for k in ("Xi", "Xi_1", "Xi_2", "Xi_3", "Xi_star")]
    out += [(build_xi_ar3(r), a_r_n(r, 3)) for r in range(1, 7)]
    out += [(build_minimal_ar2(r), a_r_n(r, 2)) for r in range(1, 7)]
    out += [(simplex(n), a_r_n(r, n)) for n in (2, 3, 4) for r in (0, 1, 2)]
    return out


def test_named_shapes():
    xi = build_a14("Xi")
    assert len(xi.vertices) == 10 and len(xi.cells) == 5
    assert sorted(len(c) for c in xi.cells) == [4, 4, 4, 4, 6]
    star = build_a14("Xi_star")
    assert len(star.vertices) == 11 and len(star.cells) == 12
    assert len(simplex(4).cells) == 1


def test_volumes_sum_exactly():
    for decomp, _ in corpus():
        n = decomp.n
        total = sum(cell_volume(decomp, c) for c in decomp.cells)
        assert total == Fraction(1, factorial(n))


def test_validation_errors():
    e = corners(3)
    m = (0, H, H)
    s = (H, Fraction(1, 4), Fraction(1, 4))
    pts = e + [m, s]
    with pytest.raises(DecompositionError) as gap:
        build_decomposition(pts, [[0, 1, 3]])
    assert gap.value.kind == "gap"
    with pytest.raises(DecompositionError) as over:
        build_decomposition(pts, [[0, 1, 2], [0, 1, 3]])
    assert over.value.kind == "overlap"
    # the edge e1-m is split on one side only
    with pytest.raises(DecompositionError) as dangling:
        build_decomposition(pts, [[0, 1, 3], [0, 4, 2], [4, 3, 2]])
    assert dangling.value.kind == "dangling"
    with pytest.raises(DecompositionError) as bad_vertex:
        build_decomposition([(1, 1, 0)] + e[1:], [[0, 1, 2]])
    assert bad_vertex.value.kind == "vertex"


def test_strata_and_euler():
    xi, star = build_a14("Xi"), build_a14("Xi_star")
    assert len(strata(xi, 3)) == 5
    assert len(strata(star, 0)) == 11
    assert strata(star, -1) == [frozenset()]
    assert len(strata(simplex(4), 3)) == 1
    assert euler_number(star) == 12
    assert all(euler_number(build_a14(f"Xi_{k}")) == 8 for k in (1, 2, 3))
    assert euler_number(simplex(3)) == 1


def test_crepant_and_smooth_flags():
    assert is_crepant(build_a14("Xi"), A14)
    assert not is_crepant(build_a14("Xi_star"), A14)
    assert is_crepant(simplex(4), A14)
    xi = build_a14("Xi")
    ok, bad = is_smooth(xi, A14)
    assert not ok and [len(c) for c in bad] == [6]
    assert is_smooth(build_a14("Xi_star"), A14)[0]
    for r in range(1, 5):
        assert is_smooth(build_xi_ar3(r), a_r_n(r, 3))[0]


def test_discrepancies():
    star = build_a14("Xi_star")
    assert [(star.label(i), a) for i, a in discrepancies(star, A14)] == [("c", 1)]
    assert discrepancies(build_a14("Xi_1"), A14) == []


def test_two_of_three():
    for decomp, G in corpus():
        flags = [is_smooth(decomp, G)[0], is_crepant(decomp, G), euler_number(decomp) == G.order]
        assert sum(flags) != 2, (decomp.labels, flags)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_corner_cell_unimodular(n):
    G = a_r_n(1, n)
    e1 = tuple(int(i == 0) for i in range(n))
    vs = [e1] + [tuple(H if i in (0, j) else 0 for i in range(n)) for j in range(1, n)]
    assert abs(det(vs)) == Fraction(1, 2 ** (n - 1))
    assert abs(det([n_coordinates(G, v) for v in vs])) == 1


def test_wall_relations_ar2():
    for r in range(1, 8):
        G = a_r_n(r, 2)
        fan = build_minimal_ar2(r)
        walls = interior_facets(fan)
        assert len(walls) == r
        for f in walls:
            w = wall_relation(fan, G, f)
            assert list(w.coefficients.values()) == [-2]


def test_wall_relations_vanish_exactly():
    for decomp, G in corpus():
        if not is_smooth(decomp, G)[0]:
            continue
        for f in interior_facets(decomp):
            w = wall_relation(decomp, G, f)
            total = [Fraction(0)] * decomp.n
            for i in w.opposite:
                total = [a + b for a, b in zip(total, primitive_ray(G, decomp, i))]
            for u, a in w.coefficients.items():
                assert isinstance(a, int)
                total = [x + a * y for x, y in zip(total, primitive_ray(G, decomp, u))]
            assert all(x == 0 for x in total)


def test_barycentre_walls_have_degree_minus_one():
    star = build_a14("Xi_star")
    c = star.index("c")
    walls = [f for f in interior_facets(star) if c in f]
    assert len(walls) == 12
    for f in walls:
        assert wall_relation(star, A14, f).coefficients[c] == -1
    w = wall_relation(star, A14, ["c", "v12", "v13"])
    assert {star.label(i) for i in w.opposite} == {"v14", "v23"}


def test_wall_relation_errors():
    star = build_a14("Xi_star")
    with pytest.raises(UnsupportedError):
        wall_relation(star, A14, ["e1", "v12", "v13"])
    xi = build_a14("Xi")
    with pytest.raises(UnsupportedError):
        wall_relation(xi, A14, ["v12", "v13", "v14"])


def test_star_classification():
    star = build_a14("Xi_star")
    info = star_classify(star, A14, "c")
    assert info.cube_pattern
    pairs = {frozenset(star.label(i) for i in p) for p in info.pairs}
    assert pairs == {frozenset(p) for p in (("v12", "v34"), ("v13", "v24"), ("v14", "v23"))}
    assert len(info.cells) == 8

    for r in range(2, 5):
        xi = build_xi_ar3(r)
        G = a_r_n(r, 3)
        for i in range(len(xi.vertices)):
            if xi.is_interior_vertex(i):
                info = star_classify(xi, G, i)
                assert len(info.cells) == 6 and not info.cube_pattern
    with pytest.raises(UnsupportedError):
        star_classify(star, A14, "e1")


def test_octahedron_local_model():
    xi = build_a14("Xi")
    dia = next(c for c in xi.cells if len(c) == 6)
    basis = dual_cone_hilbert_basis(A14, cell_cone(xi, A14, dia))
    assert len(basis) == 8
    squares = [tuple(2 * int(i == j) for i in range(4)) for j in range(4)]
    assert set(squares) <= set(basis)
    x = {j: squares[j] for j in range(4)}
    y = {j: next(m for m in basis if m[j] == -1) for j in range(4)}
    assert set(x.values()) | set(y.values()) == set(basis)

    def add(a, b):
        return tuple(p + q for p, q in zip(a, b))

    for i, j in combinations(range(4), 2):
        assert add(x[i], y[i]) == add(x[j], y[j])
        ip, jp = sorted(set(range(4)) - {i, j})
        assert add(x[i], x[j]) == add(y[ip], y[jp])
    assert all(not any(character_of(A14, m)) for m in basis)


def test_unimodular_cone_local_model_is_dual_basis():
    xi1 = build_a14("Xi_1")
    for cell in xi1.cells:
        cone = cell_cone(xi1, A14, cell)
        basis = dual_cone_hilbert_basis(A14, cone)
        assert len(basis) == 4
        pairing = sorted(tuple(dot(m, r) for r in cone.rays) for m in basis)
        assert pairing == sorted(corners(4))


@pytest.mark.parametrize("r,n", [(1, 2), (2, 2), (1, 3), (2, 3), (1, 4)])
def test_quadrant_invariants(r, n):
    G = a_r_n(r, n)
    basis = dual_cone_hilbert_basis(G, Cone(tuple(tuple(Fraction(x) for x in e) for e in corners(n))))
    want = [(1,) * n] + [tuple(r + 1 if i == j else 0 for i in range(n)) for j in range(n)]
    assert sorted(basis) == sorted(want)


def test_hilbert_bound_error():
    with pytest.raises(HilbertBasisBoundError):
        dual_cone_hilbert_basis(a_r_n(2, 3), Cone(tuple(tuple(Fraction(x) for x in e) for e in corners(3))), bound=2)


@pytest.mark.parametrize("r,n", [(r, 2) for r in range(1, 8)] + [(r, 3) for r in range(1, 4)] + [(1, 4), (2, 4)])
def test_hilb_fans_tile(r, n):
    # build_decomposition revalidates volume and facet pairing
    fan, reports = hilb_fan(a_r_n(r, n))
    assert all(rep.cone is not None for rep in reports)
    rebuilt = build_decomposition(fan.vertices, fan.cells)
    assert rebuilt.cell_set() == fan.cell_set()
    assert sum(cell_volume(fan, c) for c in fan.cells) * factorial(n) == 1


def test_cone_points_on_simplex():
    cone = Cone.from_directions(A14, [(1, 1, 1, 1), (1, 1, 0, 0)])
    assert sorted(cone.points()) == sorted([(Fraction(1, 4),) * 4, (H, H, 0, 0)])
    assert (H, H, H, H) in cone.rays
    assert all(x.denominator == 1 for r in cone.n_coordinates(A14) for x in map(Fraction, r))
