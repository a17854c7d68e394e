"""JSON and DOT documents: fans, reports and flop graphs.

Every document carries ``"schema": "orbitool/1"``.  Rationals are written as
``[numerator, denominator]`` pairs so files stay exact.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .group_lattice import GroupSpec, parse_group
from .toric_fan import Decomposition, build_decomposition

SCHEMA = "orbitool/1"


class DocumentError(ValueError):
    pass


def dumps(doc: Any) -> str:
    """Canonical JSON text (sorted keys, two-space indent, trailing newline)."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _rational(x) -> list[int]:
    x = Fraction(x)
    return [x.numerator, x.denominator]


def _parse_rational(raw) -> Fraction:
    if isinstance(raw, list) and len(raw) == 2 and all(isinstance(t, int) for t in raw) and raw[1] != 0:
        return Fraction(raw[0], raw[1])
    if isinstance(raw, int) and not isinstance(raw, bool):
        return Fraction(raw)
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except ValueError:
            pass
    raise DocumentError(f"bad rational {raw!r}; expected [num, den]")


def fan_document(decomp: Decomposition, G: GroupSpec | None) -> dict:
    return {
        "schema": SCHEMA,
        "group": None if G is None else G.to_json(),
        "n": decomp.n,
        "vertices": [[_rational(x) for x in v] for v in decomp.vertices],
        "labels": list(decomp.labels),
        "cells": [sorted(c) for c in decomp.cells],
    }


def read_fan_document(doc: dict) -> tuple[Decomposition, GroupSpec | None]:
    """Rebuild (and fully revalidate) a decomposition from its document."""
    if not isinstance(doc, dict):
        raise DocumentError("fan document must be a JSON object")
    schema = doc.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise DocumentError(f"unsupported schema {schema!r}")
    try:
        verts = [[_parse_rational(x) for x in v] for v in doc["vertices"]]
        cells = [list(c) for c in doc["cells"]]
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"fan document needs 'vertices' and 'cells': {exc}") from exc
    labels = doc.get("labels")
    G = parse_group(doc["group"]) if doc.get("group") is not None else None
    decomp = build_decomposition(verts, cells, labels)
    if G is not None and G.n != decomp.n:
        raise DocumentError(f"group has n={G.n} but the fan lives in dimension {decomp.n}")
    return decomp, G


def load_fan(path: str | Path) -> tuple[Decomposition, GroupSpec | None]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON ({exc})") from exc
    return read_fan_document(doc)


def flop_graph_dot(report: dict) -> str:
    """Graphviz text for the flop graph of a resolution report document."""
    graph = report["flop_graph"]
    by_choice = {b["choice"]: b for b in report.get("blowdowns", [])}
    lines = ["graph flops {", "  node [shape=box];"]
    for node in graph["nodes"]:
        b = by_choice.get(node, {})
        tag = f"euler {b['euler']}" if "euler" in b else ""
        lines.append(f'  "{node}" [label="{node}\\n{tag}"];')
    for e in graph["edges"]:
        style = "" if e.get("verified", True) else ", style=dashed"
        lines.append(f'  "{e["from"]}" -- "{e["to"]}" [label="{e["site"]}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
