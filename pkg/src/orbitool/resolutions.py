"""Named decompositions, blow-downs, flops and the Hilbert-scheme pipeline."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

from .group_lattice import GroupSpec, a_type_rank
from .linalg import dot, frac_vector, nullspace
from .staircase_hilb import (
    DEFAULT_BOUND,
    FixedPointReport,
    enumerate_fixed_points,
    fixed_point_report,
)
from .toric_fan import (
    Decomposition,
    DecompositionError,
    StarInfo,
    UnsupportedError,
    build_decomposition,
    cell_volume,
    default_label,
    discrepancies,
    euler_number,
    fmt_point,
    is_crepant,
    is_smooth,
    is_unimodular,
    primitive_ray,
    simplex_point,
    star_classify,
    strata,
)

log = logging.getLogger(__name__)

DEFAULT_COMBINATION_CAP = 729


class PipelineError(RuntimeError):
    def __init__(self, message: str, detail=None):
        super().__init__(message)
        self.detail = detail


def from_cell_points(cells: Iterable[Iterable[Sequence]], labels: dict | None = None, order: Sequence[Sequence] | None = None, validate: bool = True) -> Decomposition:
    """Decomposition from cells given by coordinates rather than vertex ids.

    Vertex numbering follows ``order`` when given (points absent from every
    cell are dropped), otherwise sorted coordinates.
    """
    cells = [frozenset(frac_vector(p) for p in c) for c in cells]
    used = set().union(*cells)
    if order is None:
        verts = sorted(used)
    else:
        verts = [p for p in (frac_vector(q) for q in order) if p in used]
        verts += sorted(used - set(verts))
    idx = {p: i for i, p in enumerate(verts)}
    labels = labels or {}
    labs = [labels.get(p) or default_label(p) for p in verts]
    id_cells = [[idx[p] for p in c] for c in cells]
    if validate:
        return build_decomposition(verts, id_cells, labs)
    return Decomposition(n=len(verts[0]), vertices=tuple(verts), cells=tuple(sorted((frozenset(c) for c in id_cells), key=sorted)),
                         labels=tuple(labs))


def _point(coords: Sequence[int], den: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(c, den) for c in coords)


# -- named decompositions -------------------------------------------------------


def build_minimal_ar2(r: int) -> Decomposition:
    """Minimal resolution of C^2/A_r: the segment split at k/(r+1), k = 0..r+1."""
    d = r + 1
    pts = [_point((d - k, k), d) for k in range(d + 1)]
    labels = {p: f"v{k}" for k, p in enumerate(pts)}
    return from_cell_points([(pts[k], pts[k + 1]) for k in range(d)], labels, order=pts)


def build_xi_ar3(r: int) -> Decomposition:
    """The triangulation of the triangle by lines parallel to its edges through N-points."""
    if r < 1:
        raise ValueError("r must be at least 1")
    d = r + 1
    ms = [(a, b, d - a - b) for a in range(d, -1, -1) for b in range(d - a, -1, -1)]
    pt = {m: _point(m, d) for m in ms}
    cells = []
    for m1, m2, m3 in ms:
        if m1 >= 1:
            cells.append((pt[(m1, m2, m3)], pt[(m1 - 1, m2 + 1, m3)], pt[(m1 - 1, m2, m3 + 1)]))
        if m1 >= 1 and m3 >= 1:
            cells.append((pt[(m1, m2, m3)], pt[(m1 - 1, m2 + 1, m3)], pt[(m1, m2 + 1, m3 - 1)]))
    labels = {pt[m]: "(" + ",".join(map(str, m)) + ")" for m in ms}
    return from_cell_points(cells, labels, order=[pt[m] for m in ms])


def _a14_points():
    e = {i: tuple(Fraction(int(j == i)) for j in range(4)) for i in range(4)}
    v = {(i, j): tuple(Fraction(1, 2) if k in (i, j) else Fraction(0) for k in range(4)) for i, j in combinations(range(4), 2)}
    c = (Fraction(1, 4),) * 4
    labels = {e[i]: f"e{i + 1}" for i in e}
    labels.update({v[k]: f"v{k[0] + 1}{k[1] + 1}" for k in v})
    labels[c] = "c"
    order = [e[i] for i in range(4)] + [v[k] for k in sorted(v)] + [c]
    return e, v, c, labels, order


def _vij(v, i, j):
    return v[tuple(sorted((i, j)))]


def build_a14(kind: str) -> Decomposition:
    """The decompositions Xi, Xi_k (k = 1, 2, 3) and Xi_star for A_1(4)."""
    e, v, c, labels, order = _a14_points()
    corners = [[e[i]] + [_vij(v, i, j) for j in range(4) if j != i] for i in range(4)]
    pairs = [(_vij(v, k, 3), _vij(v, *[x for x in range(3) if x != k])) for k in range(3)]
    if kind == "Xi":
        cells = corners + [list(v.values())]
    elif kind in ("Xi_1", "Xi_2", "Xi_3"):
        k = int(kind[-1]) - 1
        diag = pairs[k]
        others = [p for i, p in enumerate(pairs) if i != k]
        cells = corners + [list(diag) + [a, b] for a in others[0] for b in others[1]]
    elif kind == "Xi_star":
        cells = corners + [[c, a, b, x] for a, b, x in product(*pairs)]
    else:
        raise ValueError(f"unknown A_1(4) decomposition {kind!r}; expected Xi, Xi_1, Xi_2, Xi_3 or Xi_star")
    return from_cell_points(cells, labels, order=order)


def _inside(point, cell: frozenset, dec: Decomposition) -> bool:
    for f in dec._geom.facets(cell):
        ell = nullspace([dec.vertices[i] for i in f], dec.n)[0]
        side = next(x for x in (dot(ell, dec.vertices[i]) for i in cell) if x != 0)
        if dot(ell, point) * side < 0:
            return False
    return True


def refines(fine: Decomposition, coarse: Decomposition) -> bool:
    """Every cell of ``coarse`` is a union of cells of ``fine``.

    Fine cells are assigned to the coarse cell containing all their vertices;
    the assigned volumes must add up to the coarse cell's volume.
    """
    for cc in coarse.cells:
        vol = Fraction(0)
        for fc in fine.cells:
            if all(_inside(fine.vertices[i], cc, coarse) for i in fc):
                vol += cell_volume(fine, fc)
        if vol != cell_volume(coarse, cc):
            return False
    return True


# -- blow-down and flop ---------------------------------------------------------


def _resolve_choice(pairs: Sequence[tuple[int, int]], k, decomp: Decomposition) -> int:
    """0-based index of the diagonal pair chosen by a 1-based index or a vertex pair."""
    if isinstance(k, int):
        if not 1 <= k <= len(pairs):
            raise ValueError(f"diagonal choice {k} out of range 1..{len(pairs)}")
        return k - 1
    ids = frozenset(decomp.index(x) for x in k)
    for i, p in enumerate(pairs):
        if frozenset(p) == ids:
            return i
    raise ValueError(f"{sorted(decomp.label(i) for i in ids)} is not an antipodal pair of the site")


def _split_cells(pairs: Sequence[tuple[int, int]], diag: int) -> list[frozenset]:
    others = [p for i, p in enumerate(pairs) if i != diag]
    return [frozenset(pairs[diag]) | frozenset(choice) for choice in product(*others)]


def blow_down(decomp: Decomposition, G: GroupSpec, v, k, validate: bool = True) -> Decomposition:
    """Remove a cube-pattern vertex, re-splitting its star along diagonal ``k``."""
    info = star_classify(decomp, G, v)
    if not info.cube_pattern:
        raise UnsupportedError(f"vertex {decomp.label(info.vertex)} has no cube-pattern star: {info.reason}")
    diag = _resolve_choice(info.pairs, k, decomp)
    keep = [c for c in decomp.cells if info.vertex not in c]
    new = keep + _split_cells(info.pairs, diag)
    return _rebuild(decomp, new, validate)


def _rebuild(decomp: Decomposition, id_cells: list[frozenset], validate: bool) -> Decomposition:
    labels = {decomp.vertices[i]: decomp.labels[i] for i in range(len(decomp.vertices))}
    cells = [[decomp.vertices[i] for i in c] for c in id_cells]
    return from_cell_points(cells, labels, order=decomp.vertices, validate=validate)


@dataclass(frozen=True)
class FlopSite:
    """Four simplices around a diagonal of an octahedron with antipodal vertex pairs."""

    center: tuple[Fraction, ...]
    pairs: tuple[tuple[int, int], ...]
    diagonal: int  # 0-based index into pairs
    cells: tuple[frozenset, ...]

    def to_json(self, decomp: Decomposition) -> dict:
        lab = decomp.label
        return {
            "center": fmt_point(self.center),
            "pairs": [[lab(a), lab(b)] for a, b in self.pairs],
            "diagonal": self.diagonal + 1,
        }


def find_flop_sites(decomp: Decomposition, G: GroupSpec) -> list[FlopSite]:
    """All octahedra split into 2^(n-2) simplices around one diagonal."""
    n = decomp.n
    sites = []
    for edge in strata(decomp, 1):
        if decomp.is_boundary(edge):
            continue
        cells = decomp.cells_containing(edge)
        if len(cells) != 2 ** (n - 2) or any(len(c) != n for c in cells):
            continue
        u, w = sorted(edge)
        s = tuple(a + b for a, b in zip(primitive_ray(G, decomp, u), primitive_ray(G, decomp, w)))
        link = set().union(*cells) - edge
        others = _pairs_summing_to(decomp, G, s, link)
        if len(others) != n - 2 or len({x for p in others for x in p}) != len(link):
            continue
        if set(cells) != {edge | frozenset(ch) for ch in product(*others)}:
            continue
        hi, lo = sorted(edge, key=lambda i: decomp.vertices[i], reverse=True)
        pairs = sorted(others + [(hi, lo)], key=lambda p: decomp.vertices[p[0]])
        sites.append(FlopSite(simplex_point(s), tuple(pairs), pairs.index((hi, lo)), tuple(sorted(cells, key=sorted))))
    return sorted(sites, key=lambda s: s.center)


def _pairs_summing_to(decomp, G, target, candidates):
    rays = {i: primitive_ray(G, decomp, i) for i in candidates}
    out = []
    for a, b in combinations(sorted(candidates), 2):
        if tuple(x + y for x, y in zip(rays[a], rays[b])) == tuple(target):
            hi, lo = sorted((a, b), key=lambda i: decomp.vertices[i], reverse=True)
            out.append((hi, lo))
    return out


def flop(decomp: Decomposition, G: GroupSpec, site, from_k: int, to_k: int, validate: bool = True) -> Decomposition:
    """Re-split the octahedron at ``site`` from diagonal ``from_k`` to ``to_k`` (1-based).

    ``site`` is the center point of the octahedron (coordinates), or None when
    the decomposition has exactly one flop site.
    """
    sites = find_flop_sites(decomp, G)
    if site is None:
        if len(sites) != 1:
            raise UnsupportedError(f"decomposition has {len(sites)} flop sites; name one")
        chosen = sites[0]
    else:
        center = simplex_point(frac_vector(site))
        matches = [s for s in sites if s.center == center]
        if not matches:
            raise UnsupportedError(f"no flop structure at {fmt_point(center)}")
        chosen = matches[0]
    if chosen.diagonal != from_k - 1:
        raise UnsupportedError(f"site {fmt_point(chosen.center)} is split along diagonal {chosen.diagonal + 1}, not {from_k}")
    if to_k == from_k:
        raise ValueError("flop needs a different target diagonal")
    target = _resolve_choice(chosen.pairs, to_k, decomp)
    keep = [c for c in decomp.cells if c not in chosen.cells]
    return _rebuild(decomp, keep + _split_cells(chosen.pairs, target), validate)


# -- pipeline -------------------------------------------------------------------


def assemble_hilb_fan(G: GroupSpec, reports: Sequence[FixedPointReport]) -> Decomposition:
    """Glue the cones of the fixed points into a decomposition and validate it."""
    cells = [c.cone.points() for c in reports if c.cone is not None]
    try:
        return from_cell_points(cells)
    except DecompositionError as exc:
        raise PipelineError(f"fixed-point cones do not tile the quadrant ({exc.kind}): {exc}",
                            {"kind": exc.kind, "detail": exc.detail,
                             "cones": [[fmt_point(p) for p in c] for c in cells]}) from exc


def hilb_fan(G: GroupSpec, bound: int = DEFAULT_BOUND, workers: int | None = None) -> tuple[Decomposition, list[FixedPointReport]]:
    reports = [fixed_point_report(G, st) for st in enumerate_fixed_points(G, bound, workers)]
    return assemble_hilb_fan(G, reports), reports


@dataclass
class ResolutionReport:
    group: GroupSpec
    fan: Decomposition
    fixed_points: int
    excluded: list = field(default_factory=list)
    smooth: bool = False
    crepant: bool = False
    euler: int = 0
    singular_cells: list = field(default_factory=list)
    discrepancies: list = field(default_factory=list)
    stars: list[StarInfo] = field(default_factory=list)
    disjoint: bool = True
    blowdowns: list = field(default_factory=list)
    combinations_total: int = 0
    flop_edges: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        lab = self.fan.label
        return {
            "schema": "orbitool/1",
            "group": self.group.to_json(),
            "order": self.group.order,
            "fixed_points": self.fixed_points,
            "excluded": self.excluded,
            "smooth": self.smooth,
            "crepant": self.crepant,
            "euler": self.euler,
            "singular_cells": [sorted(lab(i) for i in c) for c in self.singular_cells],
            "discrepancies": [[lab(i), a] for i, a in self.discrepancies],
            "stars": [s.to_json(self.fan) for s in self.stars],
            "disjoint_stars": self.disjoint,
            "blowdowns": self.blowdowns,
            "blowdown_combinations": self.combinations_total,
            "flop_graph": {"nodes": [b["choice"] for b in self.blowdowns], "edges": self.flop_edges},
            "checks": self.checks,
        }


def _choice_key(choice: Sequence[int]) -> str:
    return "".join(str(k) for k in choice)


def blow_down_all(fan: Decomposition, G: GroupSpec, vertices: Sequence[int], choice: Sequence[int], validate: bool = True) -> Decomposition:
    """Blow down the given cube-pattern vertices in canonical (coordinate) order."""
    out = fan
    ordered = sorted(zip(vertices, choice), key=lambda vc: fan.vertices[vc[0]])
    for step, (vid, k) in enumerate(ordered):
        last = step == len(ordered) - 1
        out = blow_down(out, G, fan.vertices[vid], k, validate=validate and last)
    return out


def hilb_pipeline(G: GroupSpec, bound: int = DEFAULT_BOUND, combination_cap: int = DEFAULT_COMBINATION_CAP,
                  workers: int | None = None) -> ResolutionReport:
    """Fixed points -> cones -> fan -> predicates -> discrepant stars -> blow-downs and flops."""
    reports = [fixed_point_report(G, st) for st in enumerate_fixed_points(G, bound, workers)]
    fan = assemble_hilb_fan(G, reports)
    smooth, bad = is_smooth(fan, G)
    disc = discrepancies(fan, G)
    rep = ResolutionReport(
        group=G,
        fan=fan,
        fixed_points=len(reports),
        excluded=[[list(p) for p in r.staircase] for r in reports if r.cone is None],
        smooth=smooth,
        crepant=is_crepant(fan, G),
        euler=euler_number(fan),
        singular_cells=bad,
        discrepancies=disc,
    )
    interior = [i for i, _ in disc if fan.is_interior_vertex(i)]
    rep.stars = [star_classify(fan, G, i) for i in interior]
    ids = [i for i, _ in disc]
    rep.disjoint = not any(fan.cells_containing([a, b]) for a, b in combinations(ids, 2))
    all_cube = len(interior) == len(ids) and all(s.cube_pattern for s in rep.stars)

    if disc and all_cube and rep.disjoint:
        _blowdowns(rep, G, ids, combination_cap)

    r = a_type_rank(G)
    if r is not None and G.n == 4:
        rep.checks.update({
            "expected_divisors": r * (r + 1) * (r + 2) // 6,
            "divisor_count_ok": len(disc) == r * (r + 1) * (r + 2) // 6,
            "all_cube_pattern": all_cube,
            "all_coefficients_one": all(a == 1 for _, a in disc),
            "blowdowns_ok": bool(rep.blowdowns) and all(b["smooth"] and b["crepant"] and b["euler"] == G.order for b in rep.blowdowns),
        })
    return rep


def _blowdowns(rep: ResolutionReport, G: GroupSpec, ids: list[int], cap: int) -> None:
    fan = rep.fan
    npairs = fan.n - 1
    choices = list(product(range(1, npairs + 1), repeat=len(ids)))
    rep.combinations_total = len(choices)
    if len(choices) > cap:
        # stars are disjoint, so each blow-down only touches its own star:
        # check every local option once, then the uniform combinations in full
        log.info("%d blow-down combinations exceed cap %d; checking local options and uniform choices", len(choices), cap)
        local = []
        for vid in ids:
            for k in range(1, npairs + 1):
                dec = blow_down(fan, G, vid, k)
                local.append({"vertex": fan.label(vid), "choice": k, "smooth_cells_changed": all(
                    is_unimodular(dec, G, c) for c in dec.cells if c not in fan.cells)})
        rep.checks["local_blowdowns"] = local
        choices = [tuple([k] * len(ids)) for k in range(1, npairs + 1)]
    results = {}
    for choice in choices:
        dec = blow_down_all(fan, G, ids, choice)
        smooth, _ = is_smooth(dec, G)
        results[choice] = dec
        rep.blowdowns.append({"choice": _choice_key(choice), "smooth": smooth, "crepant": is_crepant(dec, G),
                              "euler": euler_number(dec)})
    edges = []
    for a, b in combinations(choices, 2):
        diff = [i for i in range(len(a)) if a[i] != b[i]]
        if len(diff) != 1:
            continue
        pos = diff[0]
        center = fan.vertices[ids[pos]]
        flopped = flop(results[a], G, center, a[pos], b[pos], validate=False)
        edges.append({"from": _choice_key(a), "to": _choice_key(b), "site": fan.label(ids[pos]),
                      "verified": flopped.cell_set() == results[b].cell_set()})
    rep.flop_edges = edges
