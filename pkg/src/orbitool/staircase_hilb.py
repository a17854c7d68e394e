"""Torus-fixed points of Hilb^G(C^n) as staircases.

A fixed point is a monomial ideal J whose standard monomials (the staircase,
an order ideal in N^n) carry every character of G exactly once.  Each such
staircase pairs every minimal generator g of J with the unique standard
monomial of the same character, and the weights v with <v, g> >= <v, partner>
for all g form the chart's cone in the fan.
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Sequence

from .group_lattice import Character, GroupSpec, character_of
from .linalg import extreme_rays, rank, sub
from .toric_fan import Cone

DEFAULT_BOUND = 64


class EnumerationBoundError(RuntimeError):
    """The group is too large for fixed-point enumeration at the current bound."""


class StaircaseError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Staircase:
    """A finite order ideal of exponent vectors, stored in lexicographic order."""

    points: tuple[tuple[int, ...], ...]

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]]) -> "Staircase":
        pts = sorted({tuple(int(x) for x in p) for p in points})
        if not pts:
            raise StaircaseError("empty staircase")
        n = len(pts[0])
        if any(len(p) != n for p in pts):
            raise StaircaseError("points of different lengths")
        s = set(pts)
        for p in pts:
            if min(p) < 0:
                raise StaircaseError(f"negative exponent in {p}")
            for j in range(n):
                if p[j] and _lower(p, j) not in s:
                    raise StaircaseError(f"not an order ideal: {p} present but {_lower(p, j)} missing")
        return cls(tuple(pts))

    @classmethod
    def from_generators(cls, gens: Iterable[Sequence[int]], box: Sequence[int]) -> "Staircase":
        """Standard monomials inside ``box`` of the ideal generated by ``gens``."""
        gens = [tuple(g) for g in gens]
        pts = [p for p in product(*(range(b) for b in box)) if not any(_divides(g, p) for g in gens)]
        return cls.from_points(pts)

    @property
    def n(self) -> int:
        return len(self.points[0])

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p):
        return tuple(p) in self._set

    @property
    def _set(self) -> frozenset:
        s = self.__dict__.get("_cached_set")
        if s is None:
            s = frozenset(self.points)
            object.__setattr__(self, "_cached_set", s)
        return s

    def extent(self) -> tuple[int, ...]:
        """Largest exponent on each axis."""
        return tuple(max(p[i] for p in self.points) for i in range(self.n))


def _lower(p: tuple, j: int) -> tuple:
    return p[:j] + (p[j] - 1,) + p[j + 1:]


def _raise(p: tuple, j: int) -> tuple:
    return p[:j] + (p[j] + 1,) + p[j + 1:]


def _divides(g: Sequence[int], p: Sequence[int]) -> bool:
    return all(a <= b for a, b in zip(g, p))


def census(G: GroupSpec, staircase: Staircase) -> Counter:
    """Multiplicity of each character among the standard monomials."""
    return Counter(character_of(G, p) for p in staircase)


def is_regular(G: GroupSpec, staircase: Staircase) -> bool:
    c = census(G, staircase)
    return len(staircase) == G.order and all(m == 1 for m in c.values())


def minimal_generators(staircase: Staircase) -> list[tuple[int, ...]]:
    """Minimal monomial generators of the ideal whose standard monomials are the staircase."""
    n = staircase.n
    out = set()
    for p in staircase:
        for k in range(n):
            q = _raise(p, k)
            if q in staircase:
                continue
            if all(q[j] == 0 or _lower(q, j) in staircase for j in range(n)):
                out.add(q)
    return sorted(out)


def matched_partner(G: GroupSpec, staircase: Staircase, g: Sequence[int]) -> tuple[int, ...]:
    """The standard monomial sharing the character of the generator ``g``."""
    chi = character_of(G, g)
    hits = [p for p in staircase if character_of(G, p) == chi]
    if len(hits) != 1:
        raise StaircaseError(f"staircase is not regular: {len(hits)} standard monomials have the character of {tuple(g)}")
    return hits[0]


def cone_inequalities(G: GroupSpec, staircase: Staircase) -> list[tuple[int, ...]]:
    n = staircase.n
    ineqs = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    for g in minimal_generators(staircase):
        diff = sub(g, matched_partner(G, staircase, g))
        if any(diff):
            ineqs.append(diff)
    return ineqs


def cone_of_staircase(G: GroupSpec, staircase: Staircase) -> Cone | None:
    """The cone {v >= 0 : <v, g> >= <v, partner(g)>}, or None if not full-dimensional."""
    if not is_regular(G, staircase):
        raise StaircaseError("cone_of_staircase needs a regular staircase")
    n = staircase.n
    rays = extreme_rays(cone_inequalities(G, staircase), n)
    if len(rays) < n or rank(rays) < n:
        return None
    return Cone.from_directions(G, rays)


# -- enumeration -------------------------------------------------------------


class _Search:
    """Depth-first generation of regular staircases.

    Points are added in increasing lexicographic order; since componentwise
    smaller exponents are lexicographically smaller, every prefix of the
    sorted staircase is itself an order ideal and each staircase is produced
    exactly once.  A branch dies as soon as a character repeats, or when some
    missing character has no point left that could still be added.

    Regular staircases never leave the box of character orders (Z_i^k with k
    the order of the character of Z_i shares the character of 1), so sets of
    points are int bitmasks over that box, indexed in lexicographic order.
    """

    def __init__(self, G: GroupSpec):
        self.G = G
        self.n = G.n
        self.size = G.order
        box = character_orders(G)
        self.points = list(product(*(range(k) for k in box)))
        index = {p: i for i, p in enumerate(self.points)}
        chars: dict[Character, int] = {}
        self.char = [chars.setdefault(character_of(G, p), len(chars)) for p in self.points]
        self.char_masks = [0] * len(chars)
        for i, c in enumerate(self.char):
            self.char_masks[c] |= 1 << i
        self.lower = [sum(1 << index[_lower(p, j)] for j in range(self.n) if p[j]) for p in self.points]
        self.upper = [[index[q] for q in (_raise(p, k) for k in range(self.n)) if q in index] for p in self.points]
        self.cone_above = [0] * len(self.points)
        for i in reversed(range(len(self.points))):
            m = 1 << i
            for j in self.upper[i]:
                m |= self.cone_above[j]
            self.cone_above[i] = m

    def origin(self) -> tuple:
        """State after placing 1: (members, used characters, last index, addable points)."""
        return self._add(0, 0, 0, 0)

    def _add(self, members: int, used: int, addable: int, i: int) -> tuple:
        members |= 1 << i
        addable &= ~(1 << i)
        for j in self.upper[i]:
            if self.lower[j] & ~members == 0:
                addable |= 1 << j
        return members, used | (1 << self.char[i]), i, addable

    def feasible(self, members: int, used: int, last: int, addable: int) -> bool:
        dead = 0
        for i in _bits(addable):
            if i < last or used >> self.char[i] & 1:
                dead |= self.cone_above[i]
        open_ = ~(members | dead)
        for c, mask in enumerate(self.char_masks):
            if not used >> c & 1 and not mask & open_:
                return False
        return True

    def run(self, state: tuple, depth: int, stop: int | None = None) -> Iterator[tuple]:
        stop = self.size if stop is None else stop
        members, used, last, addable = state
        if depth >= stop:
            yield state
            return
        if not self.feasible(members, used, last, addable):
            return
        for i in _bits(addable >> (last + 1)):
            i += last + 1
            if not used >> self.char[i] & 1:
                yield from self.run(self._add(members, used, addable, i), depth + 1, stop)

    def staircase(self, state: tuple) -> Staircase:
        return Staircase(tuple(self.points[i] for i in _bits(state[0])))


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _finish(args) -> list[Staircase]:
    G, state, depth = args
    s = _Search(G)
    return [s.staircase(st) for st in s.run(state, depth)]


def worker_count() -> int:
    raw = os.environ.get("ORBITOOL_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


def enumerate_fixed_points(G: GroupSpec, bound: int = DEFAULT_BOUND, workers: int | None = None) -> list[Staircase]:
    """All regular staircases of G in canonical order.

    ``workers`` > 1 farms subtrees out to processes; the merged result is
    sorted, so output does not depend on scheduling.
    """
    if G.order > bound:
        raise EnumerationBoundError(f"|G| = {G.order} exceeds the enumeration bound {bound}")
    workers = worker_count() if workers is None else workers
    search = _Search(G)
    if workers <= 1:
        found = [search.staircase(st) for st in search.run(search.origin(), 1)]
    else:
        depth = min(G.order, 4)
        prefixes = list(search.run(search.origin(), 1, stop=depth))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found = [st for chunk in pool.map(_finish, [(G, p, depth) for p in prefixes]) for st in chunk]
    return sorted(found)


def character_orders(G: GroupSpec) -> tuple[int, ...]:
    """Order of the character of Z_i, for each axis i."""
    out = []
    for i in range(G.n):
        k = 1
        while character_of(G, tuple(k if j == i else 0 for j in range(G.n))) != character_of(G, (0,) * G.n):
            k += 1
        out.append(k)
    return tuple(out)


def all_order_ideals(box: Sequence[int], size: int) -> Iterator[frozenset]:
    """Every order ideal of the given size inside prod_i [0, box_i).

    Built layer by layer along the last axis: an order ideal is a weakly
    decreasing chain of order ideals one dimension down.
    """
    if size == 0:
        yield frozenset()
        return
    if len(box) == 1:
        if size <= box[0]:
            yield frozenset((i,) for i in range(size))
        return
    lower = [frozenset()]
    for s in range(1, size + 1):
        lower.extend(all_order_ideals(box[:-1], s))
    by_size: dict[int, list[frozenset]] = {}
    for L in lower:
        by_size.setdefault(len(L), []).append(L)

    def chains(prev: frozenset | None, remaining: int, level: int):
        if remaining == 0:
            yield ()
            return
        if level == box[-1]:
            return
        cap = remaining if prev is None else min(remaining, len(prev))
        for s in range(cap, 0, -1):
            for L in by_size.get(s, ()):
                if prev is not None and not L <= prev:
                    continue
                for rest in chains(L, remaining - s, level + 1):
                    yield (L,) + rest

    for layers in chains(None, size, 0):
        yield frozenset(p + (h,) for h, L in enumerate(layers) for p in L)


def brute_force_fixed_points(G: GroupSpec) -> list[Staircase]:
    """Regular staircases by exhaustive order-ideal enumeration (no pruning).

    The search box uses only that Z_i^k with k the order of the character of
    Z_i shares the character of 1, so no regular staircase reaches it.
    """
    box = character_orders(G)
    out = []
    for ideal in all_order_ideals(box, G.order):
        st = Staircase(tuple(sorted(ideal)))
        if is_regular(G, st):
            out.append(st)
    return sorted(out)


@dataclass(frozen=True)
class FixedPointReport:
    staircase: Staircase
    generators: tuple[tuple[int, ...], ...]
    census: dict
    regular: bool
    cone: Cone | None

    def to_json(self) -> dict:
        return {
            "staircase": [list(p) for p in self.staircase],
            "generators": [list(g) for g in self.generators],
            "regular": self.regular,
            "census_total": sum(self.census.values()),
            "full_dimensional": self.cone is not None,
            "cone": None if self.cone is None else self.cone.to_json(),
        }


def fixed_point_report(G: GroupSpec, staircase: Staircase) -> FixedPointReport:
    regular = is_regular(G, staircase)
    return FixedPointReport(
        staircase=staircase,
        generators=tuple(minimal_generators(staircase)),
        census=dict(census(G, staircase)),
        regular=regular,
        cone=cone_of_staircase(G, staircase) if regular else None,
    )


# -- diagrams ----------------------------------------------------------------


def text_grid(staircase: Staircase, box: Sequence[int] | None = None) -> str:
    """Dot diagram: '•' for standard monomials, '×' for minimal generators.

    Rows run over the Z_2 exponent (top = largest), columns over Z_1; for
    n >= 3 one grid is printed per value of the remaining exponents.
    """
    n = staircase.n
    gens = set(minimal_generators(staircase))
    ext = tuple(max(p[i] for p in list(staircase) + list(gens)) for i in range(n)) if box is None else tuple(b - 1 for b in box)
    lines = []
    outer = list(product(*(range(ext[i] + 1) for i in range(2, n)))) if n > 2 else [()]
    for rest in outer:
        if rest:
            lines.append("layer " + ", ".join(f"Z{i + 3}^{e}" for i, e in enumerate(rest)) + ":")
        for y in range(ext[1], -1, -1):
            row = []
            for x in range(ext[0] + 1):
                p = (x, y) + rest
                row.append("•" if p in staircase else ("×" if p in gens else "·"))
            lines.append(f"{y:>3} " + " ".join(row))
        lines.append("    " + " ".join(str(x % 10) for x in range(ext[0] + 1)))
    return "\n".join(lines)


# -- A_r(3) classification ---------------------------------------------------


@dataclass(frozen=True)
class Ar3Type:
    """Exponent data of a fixed point for A_r(3).

    ``l[i]`` is the least l with Z_i^l outside the staircase and ``l_pairs[(j, k)]``
    the least l with (Z_j Z_k)^l outside it.  ``kind`` is "u" when
    sum(l) = 2r+3 and "d" when sum(l) = 2r+4; ``m`` is the lattice vertex of
    the matching triangle.
    """

    r: int
    l: tuple[int, int, int]
    l_pairs: dict
    kind: str | None
    m: tuple[int, int, int] | None

    def count(self) -> int:
        """Size of the staircase cut out by Z_i^{l_i}, (Z_jZ_k)^{l_jk} and Z_1Z_2Z_3."""
        total = 1 + sum(x - 1 for x in self.l)
        for (j, k), ljk in self.l_pairs.items():
            total += (self.l[j] - 1) * (self.l[k] - 1) - (self.l[j] - ljk) * (self.l[k] - ljk)
        return total

    def count_polynomial(self) -> int:
        """The same count written in s = sum(l) using l_i + l_jk = r + 2."""
        s, r = sum(self.l), self.r
        return -s * s + (4 * r + 7) * s - 3 * (r + 1) ** 2 - 6 * (r + 1) - 2

    def triangle(self) -> list[tuple[int, int, int]]:
        """Numerators (over r+1) of the triangle this fixed point should chart."""
        m1, m2, m3 = self.m
        if self.kind == "u":
            return sorted([(m1, m2, m3), (m1 - 1, m2 + 1, m3), (m1 - 1, m2, m3 + 1)])
        return sorted([(m1, m2, m3), (m1 - 1, m2 + 1, m3), (m1, m2 + 1, m3 - 1)])

    def generators(self) -> list[tuple[int, ...]]:
        gens = [(1, 1, 1)]
        for i in range(3):
            gens.append(tuple(self.l[i] if x == i else 0 for x in range(3)))
        for (j, k), ljk in self.l_pairs.items():
            gens.append(tuple(ljk if x in (j, k) else 0 for x in range(3)))
        return gens


def ar3_type(r: int, staircase: Staircase) -> Ar3Type:
    if staircase.n != 3:
        raise StaircaseError("A_r(3) classification needs n = 3")

    def first_missing(direction):
        t = 1
        while tuple(t * e for e in direction) in staircase:
            t += 1
        return t

    l = tuple(first_missing(tuple(int(i == x) for x in range(3))) for i in range(3))
    pairs = {(j, k): first_missing(tuple(int(x in (j, k)) for x in range(3))) for j, k in ((0, 1), (0, 2), (1, 2))}
    s = sum(l)
    if s == 2 * r + 3:
        kind, m = "u", (r + 2 - l[0], r + 1 - l[1], r + 1 - l[2])
    elif s == 2 * r + 4:
        kind, m = "d", (r + 2 - l[0], r + 1 - l[1], r + 2 - l[2])
    else:
        kind, m = None, None
    return Ar3Type(r=r, l=l, l_pairs=pairs, kind=kind, m=m)


def ar3_problems(G: GroupSpec, staircase: Staircase, r: int) -> list[str]:
    """Every way the staircase departs from the A_r(3) pattern (empty if it conforms)."""
    t = ar3_type(r, staircase)
    out = []
    if not all(1 <= x <= r + 1 for x in t.l):
        out.append(f"l = {t.l} outside [1, {r + 1}]")
    for i, (j, k) in enumerate(((1, 2), (0, 2), (0, 1))):
        if t.l[i] + t.l_pairs[(j, k)] != r + 2:
            out.append(f"l_{i + 1} + l_{j + 1}{k + 1} != r + 2")
    if t.kind is None:
        out.append(f"sum(l) = {sum(t.l)} is neither {2 * r + 3} nor {2 * r + 4}")
        return out
    box = [r + 2] * 3
    if Staircase.from_generators(t.generators(), box) != staircase:
        out.append("staircase is not cut out by the l-generators")
    if t.count() != (r + 1) ** 2 or t.count_polynomial() != (r + 1) ** 2:
        out.append(f"monomial count {t.count()} != {(r + 1) ** 2}")
    cone = cone_of_staircase(G, staircase)
    pts = None if cone is None else sorted(tuple(int(x * (r + 1)) for x in p) for p in cone.points())
    if pts != t.triangle():
        out.append(f"cone {pts} is not the expected triangle {t.triangle()}")
    return out
