"""Matplotlib figures: triangulations of the triangle (n = 3) and staircases.

Output is deterministic: the SVG hash salt is fixed, the date stamp is
dropped and text stays as text rather than glyph paths.
"""

from __future__ import annotations

import io
from fractions import Fraction
from itertools import product
from math import atan2, lcm, sqrt
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .staircase_hilb import Staircase, minimal_generators  # noqa: E402
from .toric_fan import Decomposition  # noqa: E402

_RC = {"svg.hashsalt": "orbitool", "svg.fonttype": "none", "font.size": 8}

# e1 at the top, e2 bottom left, e3 bottom right
_CORNERS = ((0.5, sqrt(3) / 2), (0.0, 0.0), (1.0, 0.0))


class PlotError(ValueError):
    pass


def _to_plane(v: Sequence[Fraction]) -> tuple[float, float]:
    return (sum(float(a) * c[0] for a, c in zip(v, _CORNERS)), sum(float(a) * c[1] for a, c in zip(v, _CORNERS)))


def _svg(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def lattice_labels(decomp: Decomposition) -> list[str]:
    """Each vertex as its numerator vector over the common denominator."""
    den = lcm(*(x.denominator for v in decomp.vertices for x in v))
    return ["(" + ",".join(str(int(x * den)) for x in v) + ")" for v in decomp.vertices]


def triangulation_svg(decomp: Decomposition, title: str | None = None, highlight: Sequence[int] = ()) -> str:
    """SVG of a decomposition of the triangle; vertices labelled (m1,m2,m3)."""
    if decomp.n != 3:
        raise PlotError(f"SVG rendering needs n = 3, got n = {decomp.n}")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 5.4))
        pts = [_to_plane(v) for v in decomp.vertices]
        for cell in decomp.cells:
            ids = _cyclic(decomp, cell)
            xs = [pts[i][0] for i in ids] + [pts[ids[0]][0]]
            ys = [pts[i][1] for i in ids] + [pts[ids[0]][1]]
            ax.fill(xs, ys, facecolor="#dde8f4", edgecolor="#1f3b5c", linewidth=0.8)
        hl = set(highlight)
        for i, ((x, y), lab) in enumerate(zip(pts, lattice_labels(decomp))):
            ax.plot([x], [y], "o", color="#c0392b" if i in hl else "#1f3b5c", markersize=3)
            ax.annotate(lab, (x, y), textcoords="offset points", xytext=(0, 4), ha="center", fontsize=6)
        ax.set_aspect("equal")
        ax.set_axis_off()
        if title:
            ax.set_title(title)
        return _svg(fig)


def _cyclic(decomp: Decomposition, cell) -> list[int]:
    """Vertices of a planar cell in counter-clockwise order."""
    ids = sorted(cell)
    pts = {i: _to_plane(decomp.vertices[i]) for i in ids}
    cx = sum(p[0] for p in pts.values()) / len(ids)
    cy = sum(p[1] for p in pts.values()) / len(ids)
    return sorted(ids, key=lambda i: atan2(pts[i][1] - cy, pts[i][0] - cx))


def staircase_svg(staircase: Staircase, title: str | None = None) -> str:
    """Dot diagram of a staircase: filled dots for its monomials, crosses for generators.

    For n > 2 there is one panel per value of the exponents beyond the first two.
    """
    n = staircase.n
    gens = minimal_generators(staircase)
    ext = [max(p[i] for p in list(staircase) + gens) for i in range(n)]
    layers = list(product(*(range(ext[i] + 1) for i in range(2, n)))) if n > 2 else [()]
    layers = [L for L in layers if any(p[2:] == L for p in list(staircase) + gens)]
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, len(layers), figsize=(1.6 * len(layers) + 0.6, 2.0), squeeze=False)
        for ax, L in zip(axes[0], layers):
            inside = [p for p in staircase if p[2:] == L]
            outside = [g for g in gens if g[2:] == L]
            if inside:
                ax.plot([p[0] for p in inside], [p[1] for p in inside], "o", color="#1f3b5c", markersize=4)
            if outside:
                ax.plot([g[0] for g in outside], [g[1] for g in outside], "x", color="#c0392b", markersize=5)
            ax.set_xlim(-0.5, ext[0] + 0.5)
            ax.set_ylim(-0.5, ext[1] + 0.5)
            ax.set_xticks(range(ext[0] + 1))
            ax.set_yticks(range(ext[1] + 1))
            ax.set_aspect("equal")
            ax.grid(True, linewidth=0.3)
            if L:
                ax.set_title(", ".join(f"Z{i + 3}^{e}" for i, e in enumerate(L)), fontsize=7)
        if title:
            fig.suptitle(title, fontsize=8)
        return _svg(fig)
