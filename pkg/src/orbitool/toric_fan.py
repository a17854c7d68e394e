"""Rational polytope decompositions of the simplex and their toric predicates.

A fan over the first quadrant of R^n is recorded by its trace on the simplex
``{x >= 0, sum x = 1}``: vertices are rational points, cells are vertex-id
sets (not necessarily simplices).  All geometry is done on the cones over the
cells, so faces are found with linear rather than affine algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import factorial
from typing import Iterable, Mapping, Sequence

from .group_lattice import GroupSpec, character_of, m_v, n_coordinates
from .linalg import det, dot, extreme_rays, frac_vector, nullspace, primitive_integer, rank, solve

DEFAULT_HILBERT_FACTOR = 4


class DecompositionError(ValueError):
    """Raised when vertex/cell data do not tile the simplex.

    ``kind`` is one of ``"vertex"``, ``"cell"``, ``"overlap"``, ``"gap"`` or
    ``"dangling"``.
    """

    def __init__(self, kind: str, message: str, detail=None):
        super().__init__(message)
        self.kind = kind
        self.detail = detail


class UnsupportedError(ValueError):
    pass


class HilbertBasisBoundError(RuntimeError):
    pass


def simplex_point(v: Sequence) -> tuple[Fraction, ...]:
    """Rescale a nonzero vector in the quadrant onto the simplex."""
    fr = frac_vector(v)
    s = sum(fr)
    if s <= 0:
        raise ValueError(f"{v} does not point into the first quadrant")
    return tuple(x / s for x in fr)


def fmt_point(v: Sequence) -> str:
    return "(" + ",".join(str(Fraction(x)) for x in v) + ")"


@dataclass(frozen=True)
class Cone:
    """A rational polyhedral cone stored by its primitive ray generators in N."""

    rays: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_directions(cls, G: GroupSpec, directions: Iterable[Sequence]) -> "Cone":
        rays = []
        for d in directions:
            p = simplex_point(d)
            k = m_v(G, p)
            rays.append(tuple(k * x for x in p))
        return cls(tuple(sorted(set(rays))))

    def points(self) -> tuple[tuple[Fraction, ...], ...]:
        """Where the rays meet the simplex."""
        return tuple(sorted(simplex_point(r) for r in self.rays))

    @property
    def dim(self) -> int:
        return rank(self.rays)

    def n_coordinates(self, G: GroupSpec) -> list[tuple[int, ...]]:
        """Ray generators as integer vectors in the Hermite basis of N."""
        out = []
        for r in self.rays:
            c = n_coordinates(G, r)
            if any(x.denominator != 1 for x in c):
                raise ValueError(f"ray {fmt_point(r)} is not in N")
            out.append(tuple(int(x) for x in c))
        return out

    def to_json(self) -> dict:
        return {"rays": [[[x.numerator, x.denominator] for x in r] for r in self.rays]}


# -- polytope combinatorics on vertex-id sets ----------------------------------


class _Geometry:
    """Face lattice and triangulations of cells, memoised per vertex array."""

    def __init__(self, vertices: Sequence[Sequence[Fraction]]):
        self.vertices = vertices
        self._facets: dict[frozenset, tuple[frozenset, ...]] = {}

    def rank(self, ids: Iterable[int]) -> int:
        ids = list(ids)
        return rank([self.vertices[i] for i in ids]) if ids else 0

    def facets(self, ids: frozenset) -> tuple[frozenset, ...]:
        """Facets of the cone spanned by the given vertices, as vertex-id sets."""
        hit = self._facets.get(ids)
        if hit is not None:
            return hit
        k = self.rank(ids)
        if k == len(ids):
            out = tuple(ids - {i} for i in sorted(ids))
        else:
            order = sorted(ids)
            basis: list[int] = []
            for i in order:
                if rank([self.vertices[j] for j in basis + [i]]) > len(basis):
                    basis.append(i)
            cols = [self.vertices[j] for j in basis]
            local = {i: solve(cols, self.vertices[i]) for i in order}
            found = set()
            for sub in combinations(order, k - 1):
                ns = nullspace([local[i] for i in sub], k)
                if len(ns) != 1:
                    continue
                ell = ns[0]
                vals = {i: dot(ell, local[i]) for i in order}
                if all(x >= 0 for x in vals.values()) or all(x <= 0 for x in vals.values()):
                    found.add(frozenset(i for i in order if vals[i] == 0))
            out = tuple(sorted(found, key=sorted))
        self._facets[ids] = out
        return out

    def faces(self, ids: frozenset) -> set[frozenset]:
        """All nonempty faces of the cell, the cell itself included."""
        out = {ids}
        stack = [ids]
        while stack:
            f = stack.pop()
            if len(f) <= 1:
                continue
            for g in self.facets(f):
                if g and g not in out:
                    out.add(g)
                    stack.append(g)
        return out

    def triangulate(self, ids: frozenset) -> list[frozenset]:
        """Pulling triangulation from the lowest vertex id."""
        k = self.rank(ids)
        if k == len(ids):
            return [ids]
        p = min(ids)
        out = []
        for f in self.facets(ids):
            if p not in f:
                out.extend(t | {p} for t in self.triangulate(f))
        return out


@dataclass(frozen=True)
class Decomposition:
    """A validated rational polytope decomposition of the simplex.

    Build through :func:`build_decomposition`; direct construction skips the
    tiling checks.
    """

    n: int
    vertices: tuple[tuple[Fraction, ...], ...]
    cells: tuple[frozenset, ...]
    labels: tuple[str, ...]
    _geom: _Geometry = field(repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        if self._geom is None:
            object.__setattr__(self, "_geom", _Geometry(self.vertices))

    def label(self, i: int) -> str:
        return self.labels[i]

    def index(self, key) -> int:
        """Vertex id from an id, a label or a coordinate tuple."""
        if isinstance(key, int):
            if not 0 <= key < len(self.vertices):
                raise KeyError(f"no vertex {key}")
            return key
        if isinstance(key, str):
            if key in self.labels:
                return self.labels.index(key)
            raise KeyError(f"no vertex labelled {key!r}")
        pt = frac_vector(key)
        if pt in self.vertices:
            return self.vertices.index(pt)
        raise KeyError(f"no vertex at {fmt_point(pt)}")

    def cell_set(self) -> frozenset:
        """Cells as sets of coordinates; equality here ignores vertex numbering."""
        return frozenset(frozenset(self.vertices[i] for i in c) for c in self.cells)

    def cells_containing(self, ids: Iterable[int]) -> list[frozenset]:
        ids = set(ids)
        return [c for c in self.cells if ids <= c]

    def is_boundary(self, face: Iterable[int]) -> bool:
        """Whether the face lies in a coordinate hyperplane (the boundary of the simplex)."""
        face = list(face)
        return any(all(self.vertices[i][j] == 0 for i in face) for j in range(self.n))

    def is_interior_vertex(self, i: int) -> bool:
        return all(x > 0 for x in self.vertices[i])


def default_label(v: Sequence[Fraction]) -> str:
    nz = [i for i, x in enumerate(v) if x]
    if len(nz) == 1:
        return f"e{nz[0] + 1}"
    return fmt_point(v)


def build_decomposition(vertices: Sequence[Sequence], cells: Iterable[Iterable[int]], labels: Sequence[str] | None = None) -> Decomposition:
    """Validate raw data and return a :class:`Decomposition`.

    Checks that vertices lie on the simplex, that cells are full-dimensional
    with the listed points as their vertices, that the cone volumes add up to
    exactly the simplex volume, and that each interior facet separates exactly
    two cells lying on opposite sides of it.
    """
    verts = tuple(frac_vector(v) for v in vertices)
    if not verts:
        raise DecompositionError("vertex", "no vertices")
    n = len(verts[0])
    for v in verts:
        if len(v) != n:
            raise DecompositionError("vertex", f"vertex {fmt_point(v)} has the wrong length")
        if any(x < 0 for x in v) or sum(v) != 1:
            raise DecompositionError("vertex", f"vertex {fmt_point(v)} is not on the simplex")
    if len(set(verts)) != len(verts):
        raise DecompositionError("vertex", "repeated vertex")
    cell_list = []
    for c in cells:
        c = frozenset(int(i) for i in c)
        if not c or any(not 0 <= i < len(verts) for i in c):
            raise DecompositionError("cell", f"cell {sorted(c)} refers to unknown vertices")
        cell_list.append(c)
    if len(set(cell_list)) != len(cell_list):
        raise DecompositionError("cell", "repeated cell")
    if labels is None:
        labels = [default_label(v) for v in verts]
    if len(labels) != len(verts):
        raise DecompositionError("vertex", "label count does not match vertex count")

    geom = _Geometry(verts)
    for c in cell_list:
        if geom.rank(c) != n:
            raise DecompositionError("cell", f"cell {sorted(c)} is not full-dimensional")
        zero_faces = {f for f in geom.faces(c) if len(f) == 1}
        if len(zero_faces) != len(c):
            raise DecompositionError("cell", f"cell {sorted(c)} lists points that are not its vertices")

    total = sum(abs(det([verts[i] for i in t])) for c in cell_list for t in geom.triangulate(c))
    # sum of |det| over the cones equals n! times their volume; the whole quadrant slab has volume 1/n!
    if total > 1:
        raise DecompositionError("overlap", f"cell volumes sum to {total} x vol(simplex)", total)
    if total < 1:
        raise DecompositionError("gap", f"cell volumes sum to {total} x vol(simplex)", total)

    decomp = Decomposition(n=n, vertices=verts, cells=tuple(sorted(cell_list, key=sorted)), labels=tuple(labels), _geom=geom)
    _check_facets(decomp)
    return decomp


def _check_facets(decomp: Decomposition) -> None:
    geom = decomp._geom
    owners: dict[frozenset, list[frozenset]] = {}
    for c in decomp.cells:
        for f in geom.facets(c):
            owners.setdefault(f, []).append(c)
    for f, cs in owners.items():
        boundary = decomp.is_boundary(f)
        if boundary and len(cs) != 1:
            raise DecompositionError("overlap", f"boundary facet {sorted(f)} lies in {len(cs)} cells", sorted(f))
        if not boundary:
            if len(cs) != 2:
                raise DecompositionError("dangling", f"interior facet {sorted(f)} lies in {len(cs)} cells", sorted(f))
            ell = nullspace([decomp.vertices[i] for i in f], decomp.n)
            if len(ell) != 1:
                raise DecompositionError("cell", f"facet {sorted(f)} is degenerate", sorted(f))
            sides = []
            for c in cs:
                vals = [dot(ell[0], decomp.vertices[i]) for i in c - f]
                sides.append(1 if max(vals) > 0 else -1)
            if sides[0] == sides[1]:
                raise DecompositionError("overlap", f"cells {sorted(cs[0])} and {sorted(cs[1])} lie on the same side of facet {sorted(f)}", sorted(f))


def cell_volume(decomp: Decomposition, cell: frozenset) -> Fraction:
    """Volume of the cone over the cell cut off by sum x <= 1."""
    geom = decomp._geom
    return sum(abs(det([decomp.vertices[i] for i in t])) for t in geom.triangulate(cell)) / factorial(decomp.n)


# -- strata and Euler number ---------------------------------------------------


def strata(decomp: Decomposition, i: int) -> list[frozenset]:
    """The i-dimensional faces of the decomposition, i = -1 .. n-1."""
    if not -1 <= i <= decomp.n - 1:
        raise ValueError(f"stratum dimension {i} out of range")
    if i == -1:
        return [frozenset()]
    geom = decomp._geom
    faces = set()
    for c in decomp.cells:
        faces.update(f for f in geom.faces(c) if geom.rank(f) == i + 1)
    return sorted(faces, key=sorted)


def euler_number(decomp: Decomposition) -> int:
    return len(strata(decomp, decomp.n - 1))


# -- predicates -----------------------------------------------------------------


def primitive_ray(G: GroupSpec, decomp: Decomposition, i: int) -> tuple[Fraction, ...]:
    v = decomp.vertices[i]
    k = m_v(G, v)
    return tuple(k * x for x in v)


def is_crepant(decomp: Decomposition, G: GroupSpec) -> bool:
    return all(m_v(G, v) == 1 for v in decomp.vertices)


def is_unimodular(decomp: Decomposition, G: GroupSpec, cell: frozenset) -> bool:
    """Scaled vertices of a simplicial cell form a basis of N.

    The covolume of N is 1/|G|, so this is |det| * |G| == 1 in standard coordinates.
    """
    if len(cell) != decomp.n:
        return False
    return abs(det([primitive_ray(G, decomp, i) for i in sorted(cell)])) * G.order == 1


def is_smooth(decomp: Decomposition, G: GroupSpec) -> tuple[bool, list[frozenset]]:
    bad = [c for c in decomp.cells if not is_unimodular(decomp, G, c)]
    return not bad, bad


def discrepancies(decomp: Decomposition, G: GroupSpec) -> list[tuple[int, int]]:
    """(vertex id, m_v - 1) for every vertex off the lattice N."""
    out = []
    for i, v in enumerate(decomp.vertices):
        k = m_v(G, v)
        if k > 1:
            out.append((i, k - 1))
    return out


@dataclass(frozen=True)
class StarInfo:
    vertex: int
    cells: tuple[frozenset, ...]
    link: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]
    cube_pattern: bool
    reason: str

    def to_json(self, decomp: Decomposition) -> dict:
        lab = decomp.label
        return {
            "vertex": lab(self.vertex),
            "cells": [sorted(lab(i) for i in c) for c in self.cells],
            "link": [lab(i) for i in self.link],
            "pairs": [[lab(a), lab(b)] for a, b in self.pairs],
            "cube_pattern": self.cube_pattern,
            "reason": self.reason,
        }


def antipodal_pairs(decomp: Decomposition, G: GroupSpec, center: Sequence, candidates: Iterable[int]) -> list[tuple[int, int]]:
    """Vertex pairs whose primitive rays add up to the primitive ray through ``center``.

    Pairs are ordered canonically by their lexicographically larger simplex point.
    """
    center = frac_vector(center)
    target = tuple(m_v(G, center) * x for x in center)
    candidates = sorted(set(candidates))
    rays = {i: primitive_ray(G, decomp, i) for i in candidates}
    pairs = []
    for a, b in combinations(candidates, 2):
        if tuple(x + y for x, y in zip(rays[a], rays[b])) == target:
            hi, lo = sorted((a, b), key=lambda i: decomp.vertices[i], reverse=True)
            pairs.append((hi, lo))
    pairs.sort(key=lambda p: decomp.vertices[p[0]])
    return pairs


def star_classify(decomp: Decomposition, G: GroupSpec, v) -> StarInfo:
    """Describe the star of an interior vertex and test for the cube pattern.

    The cube pattern: n-1 antipodal pairs of link rays each summing to the
    primitive ray of v, and the 2^(n-1) star cells are exactly v plus one
    vertex from each pair.  It is the fan-level signature of an exceptional
    divisor isomorphic to (P^1)^(n-1).
    """
    i = decomp.index(v)
    if not decomp.is_interior_vertex(i):
        raise UnsupportedError(f"vertex {decomp.label(i)} is not interior to the simplex")
    cells = tuple(decomp.cells_containing([i]))
    link = tuple(sorted(set().union(*cells) - {i}))
    pairs = tuple(antipodal_pairs(decomp, G, decomp.vertices[i], link))
    n = decomp.n

    def verdict(ok: bool, reason: str) -> StarInfo:
        return StarInfo(i, cells, link, pairs, ok, reason)

    if any(len(c) != n for c in cells):
        return verdict(False, "star contains a non-simplicial cell")
    if len(link) != 2 * (n - 1):
        return verdict(False, f"link has {len(link)} vertices, expected {2 * (n - 1)}")
    if len(pairs) != n - 1 or len({x for p in pairs for x in p}) != len(link):
        return verdict(False, f"link splits into {len(pairs)} antipodal pairs, expected {n - 1}")
    octants = {frozenset((i,) + choice) for choice in product(*pairs)}
    if set(cells) != octants:
        return verdict(False, "star cells are not the octants of the antipodal pairs")
    return verdict(True, "cube pattern")


@dataclass(frozen=True)
class WallRelation:
    """p_v + p_v' + sum_u a_u p_u = 0 across the wall ``facet``.

    ``a_u`` is the degree of the divisor D_u on the curve of the wall.
    """

    facet: frozenset
    opposite: tuple[int, int]
    coefficients: Mapping[int, int]

    def to_json(self, decomp: Decomposition) -> dict:
        lab = decomp.label
        return {
            "facet": sorted(lab(i) for i in self.facet),
            "opposite": [lab(i) for i in self.opposite],
            "coefficients": {lab(i): a for i, a in sorted(self.coefficients.items())},
        }


def interior_facets(decomp: Decomposition) -> list[frozenset]:
    return [f for f in strata(decomp, decomp.n - 2) if not decomp.is_boundary(f)]


def wall_relation(decomp: Decomposition, G: GroupSpec, facet: Iterable) -> WallRelation:
    tau = frozenset(decomp.index(x) for x in facet)
    if decomp.is_boundary(tau):
        raise UnsupportedError(f"facet {sorted(decomp.label(i) for i in tau)} lies on the boundary")
    if len(tau) != decomp.n - 1 or decomp._geom.rank(tau) != decomp.n - 1:
        raise UnsupportedError("wall relations need a simplicial codimension-one facet")
    cells = decomp.cells_containing(tau)
    if len(cells) != 2:
        raise UnsupportedError(f"facet lies in {len(cells)} cells, expected 2")
    for c in cells:
        if not is_unimodular(decomp, G, c):
            raise UnsupportedError(f"neighbouring cell {sorted(decomp.label(i) for i in c)} is not a unimodular simplex")
    (v,), (w,) = (c - tau for c in cells)
    pv, pw = primitive_ray(G, decomp, v), primitive_ray(G, decomp, w)
    us = sorted(tau)
    target = tuple(-(a + b) for a, b in zip(pv, pw))
    coeffs = solve([primitive_ray(G, decomp, u) for u in us], target)
    if coeffs is None or any(c.denominator != 1 for c in coeffs):
        raise UnsupportedError("no integral wall relation; neighbouring cones are not unimodular")
    return WallRelation(tau, tuple(sorted((v, w))), {u: int(c) for u, c in zip(us, coeffs)})


# -- local models ----------------------------------------------------------------


def dual_cone_hilbert_basis(G: GroupSpec, cone: Cone | Sequence[Sequence], bound: int | None = None) -> list[tuple[int, ...]]:
    """Minimal generators of the invariant Laurent monomials on a cone.

    The monoid is M intersected with the dual cone.  Points are searched in
    a box; the box is certified large enough by Caratheodory: an irreducible
    element is a combination of n linearly independent dual rays with
    coefficients in [0, 1), so each coordinate is bounded by the sum of the n
    largest ray entries there.
    """
    rays = cone.rays if isinstance(cone, Cone) else tuple(frac_vector(r) for r in cone)
    n = G.n
    if rank(rays) != n:
        raise UnsupportedError("cone is not full-dimensional")
    bound = DEFAULT_HILBERT_FACTOR * G.d if bound is None else bound
    dual_dirs = extreme_rays([primitive_integer(r) for r in rays], n)
    dual_rays = []
    for r in dual_dirs:
        k = 1
        while any(character_of(G, tuple(k * x for x in r))):
            k += 1
        dual_rays.append(tuple(k * x for x in r))
    need = []
    for j in range(n):
        entries = sorted((abs(r[j]) for r in dual_rays), reverse=True)
        need.append(sum(entries[:n]))
    if max(need) > bound:
        raise HilbertBasisBoundError(f"Hilbert basis may need exponents up to {max(need)}; raise the bound above {bound}")

    int_rays = [primitive_integer(r) for r in rays]
    weight = [sum(col) for col in zip(*int_rays)]
    members = []
    for m in product(*(range(-b, b + 1) for b in need)):
        if not any(m):
            continue
        if all(dot(m, r) >= 0 for r in int_rays) and not any(character_of(G, m)):
            members.append(m)
    members.sort(key=lambda m: (dot(m, weight), m))
    basis: list[tuple[int, ...]] = []
    for m in members:
        reducible = False
        for h in basis:
            diff = tuple(a - b for a, b in zip(m, h))
            if any(diff) and all(dot(diff, r) >= 0 for r in int_rays):
                reducible = True
                break
        if not reducible:
            basis.append(m)
    return sorted(basis)


def cell_cone(decomp: Decomposition, G: GroupSpec, cell: Iterable) -> Cone:
    ids = [decomp.index(x) for x in cell]
    return Cone(tuple(sorted(primitive_ray(G, decomp, i) for i in ids)))


def check_report(decomp: Decomposition, G: GroupSpec) -> dict:
    """The smooth / crepant / Euler / discrepancy summary used by ``fan check``."""
    smooth, bad = is_smooth(decomp, G)
    return {
        "smooth": smooth,
        "crepant": is_crepant(decomp, G),
        "euler": euler_number(decomp),
        "order": G.order,
        "discrepancies": [[decomp.label(i), a] for i, a in discrepancies(decomp, G)],
        "singular_cells": [sorted(decomp.label(i) for i in c) for c in bad],
    }
