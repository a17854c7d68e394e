"""Finite diagonal abelian subgroups of SL_n and their lattices.

A group is given by exponent generators ``a`` in ``(Z/d)^n``, the generator
being ``diag(exp(2 pi i a_1/d), ..., exp(2 pi i a_n/d))``.  From these we get
the lattice ``N = exp^{-1}(G)`` containing ``Z^n`` and its dual ``M``, the
lattice of invariant Laurent monomials.  Characters of monomials are kept in
a canonical form read off the Smith normal form of the generators of ``dN``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import lcm, prod
from pathlib import Path
from typing import Mapping, Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import hermite_normal_form, smith_normal_decomp

from .linalg import solve

Character = tuple  # canonical tuple in prod_i Z/s_i

MAX_ELEMENTS = 10**6


class GroupError(ValueError):
    """Invalid or unsupported group description."""


@dataclass(frozen=True)
class GroupSpec:
    """A finite diagonal abelian subgroup of SL_n(C).

    Only ``n``, ``d`` and ``gens`` are user data; everything else is derived
    once in ``__post_init__`` (the invariant factors ``moduli`` of the
    character group, the dual basis rows used to evaluate characters, and the
    Hermite basis of ``N``).
    """

    n: int
    d: int
    gens: tuple[tuple[int, ...], ...]
    family: tuple[str, int] | None = None
    moduli: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _char_rows: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _snf_cols: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _snf_diag: tuple[int, ...] = field(init=False, repr=False, compare=False)
    n_basis: tuple[tuple[Fraction, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise GroupError(f"dimension must be at least 2, got n={self.n}")
        if self.d < 1:
            raise GroupError(f"exponent must be positive, got d={self.d}")
        for g in self.gens:
            if len(g) != self.n:
                raise GroupError(f"generator {list(g)} has length {len(g)}, expected {self.n}")
            if sum(g) % self.d:
                raise GroupError(f"generator {list(g)} has row sum {sum(g)} not divisible by {self.d}; not in SL_n")

        # rows generate dN inside Z^n
        rows = [[self.d * int(i == j) for j in range(self.n)] for i in range(self.n)]
        rows += [list(g) for g in self.gens]
        A = Matrix(rows)
        D, _, T = smith_normal_decomp(A, domain=ZZ)
        V = T.inv()
        diag = [int(D[i, i]) for i in range(self.n)]
        moduli, char_rows = [], []
        for i, delta in enumerate(diag):
            s = self.d // delta
            if s > 1:
                moduli.append(s)
                char_rows.append(tuple(int(x) for x in V.row(i)))
        object.__setattr__(self, "moduli", tuple(moduli))
        object.__setattr__(self, "_char_rows", tuple(char_rows))
        object.__setattr__(self, "_snf_cols", tuple(tuple(int(x) for x in T.col(i)) for i in range(self.n)))
        object.__setattr__(self, "_snf_diag", tuple(diag))
        H = hermite_normal_form(A.T)
        basis = tuple(tuple(Fraction(int(H[r, c]), self.d) for r in range(self.n)) for c in range(H.shape[1]))
        object.__setattr__(self, "n_basis", basis)

    @property
    def order(self) -> int:
        return prod(self.moduli)

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    def to_json(self) -> dict:
        if self.family is not None:
            fam, r = self.family
            return {"family": fam, "r": r, "n": self.n}
        return {"n": self.n, "d": self.d, "gens": [list(g) for g in self.gens]}

    def __str__(self):
        if self.family is not None:
            return f"A_{self.family[1]}({self.n})"
        return f"G(n={self.n}, d={self.d}, gens={[list(g) for g in self.gens]})"


_AR_PATTERN = re.compile(r"^\s*A_?\{?(\d+)\}?\s*\(\s*(\d+)\s*\)\s*$")


def a_r_n(r: int, n: int) -> GroupSpec:
    """The group A_r(n) of diagonal matrices g in SL_n with g^(r+1) = 1."""
    if r < 0:
        raise GroupError(f"r must be non-negative, got {r}")
    if n < 2:
        raise GroupError(f"dimension must be at least 2, got n={n}")
    d = r + 1
    gens = []
    for i in range(n - 1):
        g = [0] * n
        g[i] = 1
        g[i + 1] = d - 1
        gens.append(tuple(x % d for x in g))
    return GroupSpec(n=n, d=d, gens=tuple(gens), family=("A", r))


_SPEC_KEYS = ({"n", "d", "gens"}, {"family", "r", "n"})


def parse_group(spec) -> GroupSpec:
    """Build a validated :class:`GroupSpec`.

    Accepts a GroupSpec, the shorthand string ``"A_r(n)"``, or a mapping in
    one of the two JSON shapes ``{"n", "d", "gens"}`` / ``{"family", "r", "n"}``.
    """
    if isinstance(spec, GroupSpec):
        return spec
    if isinstance(spec, str):
        m = _AR_PATTERN.match(spec)
        if not m:
            raise GroupError(f"cannot parse group shorthand {spec!r}; expected e.g. 'A_1(4)'")
        return a_r_n(int(m.group(1)), int(m.group(2)))
    if isinstance(spec, Mapping):
        keys = set(spec)
        if keys not in _SPEC_KEYS:
            extra = sorted(keys - (_SPEC_KEYS[0] | _SPEC_KEYS[1]))
            if extra:
                raise GroupError(f"unknown group fields: {extra}")
            raise GroupError(f"group spec needs exactly {sorted(_SPEC_KEYS[0])} or {sorted(_SPEC_KEYS[1])}, got {sorted(keys)}")
        if "family" in keys:
            if spec["family"] != "A":
                raise GroupError(f"unsupported family {spec['family']!r}; only 'A' is known")
            return a_r_n(_as_int(spec["r"], "r"), _as_int(spec["n"], "n"))
        n = _as_int(spec["n"], "n")
        d = _as_int(spec["d"], "d")
        if d < 1:
            raise GroupError(f"exponent must be positive, got d={d}")
        gens = tuple(tuple(_as_int(x, "generator entry") % d for x in g) for g in spec["gens"])
        return GroupSpec(n=n, d=d, gens=gens)
    raise GroupError(f"cannot interpret {type(spec).__name__} as a group")


def _as_int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise GroupError(f"{what} must be an integer, got {x!r}")
    return x


def load_group(path: str | Path) -> GroupSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_group(json.load(fh))


def character_of(G: GroupSpec, I: Sequence[int]) -> Character:
    """Character of the Laurent monomial Z^I as a canonical tuple."""
    return tuple(sum(a * b for a, b in zip(row, I)) % s for row, s in zip(G._char_rows, G.moduli))


def trivial_character(G: GroupSpec) -> Character:
    return (0,) * len(G.moduli)


def all_characters(G: GroupSpec) -> list[Character]:
    return list(product(*(range(s) for s in G.moduli)))


def character_representatives(G: GroupSpec) -> dict[Character, tuple[int, ...]]:
    """Lex-first monomial in the box [0, d)^n for each character.

    Z_i^d is invariant, so the box meets every character class.
    """
    reps: dict[Character, tuple[int, ...]] = {}
    for I in product(range(G.d), repeat=G.n):
        reps.setdefault(character_of(G, I), I)
    return reps


def is_invariant(G: GroupSpec, I: Sequence[int]) -> bool:
    return not any(character_of(G, I))


def in_n(G: GroupSpec, v: Sequence) -> bool:
    """Whether exp(v) lies in G, i.e. v is a point of N."""
    w = [Fraction(x) * G.d for x in v]
    if any(x.denominator != 1 for x in w):
        return False
    coords = [sum(int(wi) * t for wi, t in zip(w, col)) for col in G._snf_cols]
    return all(c % delta == 0 for c, delta in zip(coords, G._snf_diag))


def n_membership(G: GroupSpec, v: Sequence) -> tuple[bool, int]:
    """(v in N, m_v) where m_v is the least positive integer with m_v * v in N."""
    fr = [Fraction(x) for x in v]
    q = lcm(*(x.denominator for x in fr))
    # q * v is integral, hence in N, so m_v divides q
    for k in range(1, q + 1):
        if q % k == 0 and in_n(G, [k * x for x in fr]):
            return k == 1, k
    raise AssertionError("unreachable: q * v is integral")


def m_v(G: GroupSpec, v: Sequence) -> int:
    return n_membership(G, v)[1]


def n_coordinates(G: GroupSpec, v: Sequence) -> tuple[Fraction, ...]:
    """Coordinates of v in the Hermite basis of N (integral iff v in N)."""
    coords = solve(G.n_basis, v)
    assert coords is not None
    return coords


def elements(G: GroupSpec, cap: int = MAX_ELEMENTS) -> list[tuple[int, ...]]:
    """All group elements as exponent vectors mod d, by closure under generators."""
    if G.order > cap:
        raise GroupError(f"|G| = {G.order} exceeds enumeration cap {cap}")
    seen = {(0,) * G.n}
    frontier = list(seen)
    while frontier:
        nxt = []
        for x in frontier:
            for g in G.gens:
                y = tuple((a + b) % G.d for a, b in zip(x, g))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


def a_type_rank(G: GroupSpec) -> int | None:
    """r if G equals A_r(n) as a subgroup of SL_n, else None."""
    if G.family is not None and G.family[0] == "A":
        return G.family[1]
    n, order = G.n, G.order
    r = round(order ** (1 / (n - 1))) - 1
    for cand in {r - 1, r, r + 1}:
        if cand < 0 or (cand + 1) ** (n - 1) != order:
            continue
        if all(in_n(G, [Fraction(int(j == i) - int(j == i + 1), cand + 1) for j in range(n)]) for i in range(n - 1)):
            return cand
    return None


def socle_box(r: int, n: int) -> list[tuple[int, ...]]:
    """Exponents of the monomials spanning I(o)^perp for A_r(n)."""
    return [I for I in product(range(r + 1), repeat=n) if 0 in I]


def socle_generators(G: GroupSpec, rho: Character) -> set[tuple[int, ...]]:
    """Monomial basis of the rho-isotypic part of I(o)^perp for A_r(n).

    From any exponent I of character rho, subtracting i^j from every entry
    modulo r+1 gives the representative with zero in slot j; running j over
    all slots produces every basis monomial.
    """
    r = a_type_rank(G)
    if r is None:
        raise GroupError(f"{G} is not of type A_r(n); no closed form for the socle")
    rho = tuple(rho)
    reps = character_representatives(G)
    if rho not in reps:
        raise GroupError(f"{rho} is not a character of {G}")
    I = reps[rho]
    out = set()
    for j in range(G.n):
        piv = I[j]
        out.add(tuple(r + 1 - piv + s if s < piv else s - piv for s in I))
    return out


def invariant_monomials_a(r: int, n: int) -> list[tuple[int, ...]]:
    """The n+1 generators X = prod Z_i and Y_j = Z_j^(r+1) of the invariants of A_r(n)."""
    out = [(1,) * n]
    for j in range(n):
        out.append(tuple(r + 1 if i == j else 0 for i in range(n)))
    return out


def describe(G: GroupSpec) -> dict:
    """Summary used by ``group info``."""
    r = a_type_rank(G)
    return {
        "group": G.to_json(),
        "name": str(G),
        "n": G.n,
        "d": G.d,
        "order": G.order,
        "trivial": G.is_trivial,
        "invariant_factors": list(G.moduli),
        "a_type_rank": r,
        "n_basis": [[_fr(x) for x in b] for b in G.n_basis],
    }


def _fr(x: Fraction) -> list[int]:
    x = Fraction(x)
    return [x.numerator, x.denominator]
