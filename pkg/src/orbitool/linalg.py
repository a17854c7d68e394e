"""Exact rational linear algebra on small dense matrices.

Vectors are tuples and matrices are sequences of rows; entries are ints or
:class:`fractions.Fraction`.  Nothing here ever touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd, lcm
from typing import Iterable, Sequence

Vector = tuple  # of int | Fraction


def frac_vector(v: Iterable) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in v)


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


def add(u: Sequence, v: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence, v: Sequence) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


def scale(k, v: Sequence) -> tuple:
    return tuple(k * a for a in v)


def _echelon(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    if not m:
        return m, pivots
    ncols = len(m[0])
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        p = m[row][col]
        m[row] = [x / p for x in m[row]]
        for i in range(len(m)):
            if i != row and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        pivots.append(col)
        row += 1
        if row == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(_echelon(rows)[1])


def det(rows: Sequence[Sequence]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    n = len(m)
    result = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            result = -result
        p = m[col][col]
        result *= p
        for i in range(col + 1, n):
            if m[i][col] != 0:
                f = m[i][col] / p
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return result


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[tuple[Fraction, ...]]:
    """Basis of {x : rows @ x = 0}."""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    m, pivots = _echelon(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            x[pc] = -m[r][f]
        basis.append(tuple(x))
    return basis


def solve(columns: Sequence[Sequence], target: Sequence) -> tuple[Fraction, ...] | None:
    """Coefficients c with sum(c_i * columns[i]) == target, or None.

    The columns must be linearly independent; the solution is then unique.
    """
    k = len(columns)
    n = len(target)
    aug = [[Fraction(columns[j][i]) for j in range(k)] + [Fraction(target[i])] for i in range(n)]
    m, pivots = _echelon(aug)
    if k in pivots:
        return None
    if len(pivots) < k:
        raise ValueError("columns are linearly dependent")
    x = [Fraction(0)] * k
    for r, pc in enumerate(pivots):
        x[pc] = m[r][k]
    return tuple(x)


def primitive_integer(v: Sequence) -> tuple[int, ...]:
    """The primitive integer vector on the ray through a nonzero rational v."""
    fr = frac_vector(v)
    den = lcm(*(x.denominator for x in fr))
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return tuple(x // g for x in ints)


def extreme_rays(inequalities: Sequence[Sequence], dim: int) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone {x : a.x >= 0 for every a}.

    Brute force over (dim-1)-subsets of the constraints; rays come back as
    primitive integer vectors in sorted order.  Adequate for the handful of
    constraints arising from staircases in dimension <= 5.
    """
    ineqs = sorted({primitive_integer(a) for a in inequalities if any(a)})
    rays: set[tuple[int, ...]] = set()
    if dim == 1:
        for s in (1, -1):
            if all(a[0] * s >= 0 for a in ineqs):
                rays.add((s,))
        return sorted(rays)
    for subset in combinations(ineqs, dim - 1):
        ns = nullspace(list(subset), dim)
        if len(ns) != 1:
            continue
        r = primitive_integer(ns[0])
        for cand in (r, tuple(-x for x in r)):
            if all(dot(a, cand) >= 0 for a in ineqs):
                rays.add(cand)
    return sorted(rays)
