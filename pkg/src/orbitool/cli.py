"""Command-line front end.

Exit codes: 0 success, 1 validation failure (a JSON error object is printed),
2 resource bound exceeded, 3 bad usage.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .fanio import DocumentError, SCHEMA, dumps, fan_document, flop_graph_dot, load_fan
from .group_lattice import GroupError, GroupSpec, a_r_n, describe, load_group
from .plotting import PlotError, staircase_svg, triangulation_svg
from .resolutions import (
    DEFAULT_COMBINATION_CAP,
    PipelineError,
    build_a14,
    build_minimal_ar2,
    build_xi_ar3,
    find_flop_sites,
    flop,
    hilb_fan,
    hilb_pipeline,
)
from .staircase_hilb import (
    DEFAULT_BOUND,
    EnumerationBoundError,
    StaircaseError,
    enumerate_fixed_points,
    fixed_point_report,
    text_grid,
)
from .toric_fan import (
    DecompositionError,
    HilbertBasisBoundError,
    UnsupportedError,
    cell_cone,
    check_report,
    dual_cone_hilbert_basis,
    interior_facets,
    wall_relation,
)

EXIT_OK, EXIT_INVALID, EXIT_BOUND, EXIT_USAGE = 0, 1, 2, 3

# groups larger than this need `resolve --large`
PIPELINE_BOUND = 27


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- argument grammar ------------------------------------------------------------


def _group_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("group (use --group FILE or --family/--r/--n)")
    g.add_argument("--group", metavar="FILE", help="group spec JSON file")
    g.add_argument("--family", choices=["A"], help="group family")
    g.add_argument("--r", type=int, help="family parameter r")
    g.add_argument("--n", type=int, help="dimension n")


def _out_args(p: argparse.ArgumentParser, formats: Sequence[str]) -> None:
    p.add_argument("--format", choices=list(formats), default=formats[0])
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="orbitool", description="G-Hilbert schemes, toric fans and crepant resolutions of C^n/G.")
    top.add_argument("--version", action="version", version=f"orbitool {__version__}")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    group = sub.add_parser("group", help="group arithmetic").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = group.add_parser("info", help="order, invariant factors and N-basis")
    _group_args(p)
    _out_args(p, ["json", "text"])
    p.set_defaults(func=cmd_group_info)

    hilb = sub.add_parser("hilb", help="torus-fixed points of Hilb^G").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = hilb.add_parser("fixed-points", help="list the regular staircases")
    _group_args(p)
    p.add_argument("--bound", type=int, default=DEFAULT_BOUND, help="largest |G| to enumerate (default %(default)s)")
    _out_args(p, ["json", "text"])
    p.set_defaults(func=cmd_fixed_points)
    p = hilb.add_parser("fan", help="assemble the fan of the fixed points")
    _group_args(p)
    p.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    _out_args(p, ["json", "svg"])
    p.set_defaults(func=cmd_hilb_fan)

    fan = sub.add_parser("fan", help="operations on fan documents").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = fan.add_parser("build", help="write a named decomposition")
    p.add_argument("kind", choices=["Xi", "Xi_1", "Xi_2", "Xi_3", "Xi_star", "xi-ar3", "minimal-ar2"])
    p.add_argument("--r", type=int, default=1, help="r for xi-ar3 and minimal-ar2")
    _out_args(p, ["json", "svg"])
    p.set_defaults(func=cmd_fan_build)
    p = fan.add_parser("check", help="smooth / crepant / euler / discrepancies")
    p.add_argument("fan", help="fan document")
    _group_args(p)
    _out_args(p, ["json", "text"])
    p.set_defaults(func=cmd_fan_check)
    p = fan.add_parser("wall", help="wall relation across an interior facet")
    p.add_argument("fan")
    p.add_argument("--facet", nargs="+", metavar="VERTEX", help="facet vertices (labels or ids)")
    p.add_argument("--all", action="store_true", help="every interior facet")
    _group_args(p)
    _out_args(p, ["json"])
    p.set_defaults(func=cmd_fan_wall)

    p = sub.add_parser("local-model", help="Hilbert basis of the invariants on one cell")
    p.add_argument("fan")
    p.add_argument("--cell", nargs="+", required=True, metavar="VERTEX", help="cell vertices (labels or ids)")
    p.add_argument("--hilbert-bound", type=int, default=None, help="exponent box for the search (default 4d)")
    _group_args(p)
    _out_args(p, ["json"])
    p.set_defaults(func=cmd_local_model)

    p = sub.add_parser("resolve", help="full pipeline with blow-downs and flops")
    _group_args(p)
    p.add_argument("--bound", type=int, default=None, help=f"largest |G| (default {PIPELINE_BOUND}, {DEFAULT_BOUND} with --large)")
    p.add_argument("--large", action="store_true", help="opt in to groups up to |G| = 64 (slow)")
    p.add_argument("--combination-cap", type=int, default=DEFAULT_COMBINATION_CAP)
    p.add_argument("--figures", metavar="DIR", help="also write SVG figures and the DOT flop graph here")
    _out_args(p, ["json", "text", "dot"])
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("flop", help="switch the diagonal of an octahedron")
    p.add_argument("fan")
    p.add_argument("--site", help="octahedron center as comma-separated rationals (optional if unique)")
    p.add_argument("--from", dest="from_k", type=int, help="current diagonal (1-based)")
    p.add_argument("--to", dest="to_k", type=int, help="new diagonal (1-based)")
    p.add_argument("--list", action="store_true", help="list flop sites instead")
    _group_args(p)
    _out_args(p, ["json"])
    p.set_defaults(func=cmd_flop)

    p = sub.add_parser("render", help="draw an n = 3 fan document")
    p.add_argument("fan")
    p.add_argument("--title")
    _out_args(p, ["svg"])
    p.set_defaults(func=cmd_render)
    return top


# -- helpers ---------------------------------------------------------------------


def _group_from(args, fallback: GroupSpec | None = None) -> GroupSpec:
    inline = [args.family, args.r, args.n]
    if args.group and any(x is not None for x in inline):
        raise UsageError("give either --group or --family/--r/--n, not both")
    if args.group:
        try:
            return load_group(args.group)
        except OSError as exc:
            raise UsageError(f"cannot read group file: {exc}") from exc
    if any(x is not None for x in inline):
        if None in inline:
            raise UsageError("--family, --r and --n go together")
        return a_r_n(args.r, args.n)
    if fallback is not None:
        return fallback
    raise UsageError("a group is required (--group FILE or --family A --r R --n N)")


def _fan_from(args):
    try:
        decomp, G = load_fan(args.fan)
    except OSError as exc:
        raise UsageError(f"cannot read fan file: {exc}") from exc
    return decomp, _group_from(args, G)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _key(token: str):
    return int(token) if token.isdigit() else token


def _lines(*rows) -> str:
    return "\n".join(rows) + "\n"


# -- commands --------------------------------------------------------------------


def cmd_group_info(args) -> int:
    G = _group_from(args)
    info = describe(G)
    if args.format == "text":
        _emit(args, _lines(f"group: {info['name']}", f"order: {info['order']}", f"trivial: {str(info['trivial']).lower()}",
                           f"invariant factors: {info['invariant_factors']}"))
    else:
        _emit(args, dumps({"schema": SCHEMA, **info}))
    return EXIT_OK


def cmd_fixed_points(args) -> int:
    G = _group_from(args)
    reports = [fixed_point_report(G, st) for st in enumerate_fixed_points(G, args.bound)]
    if args.format == "text":
        out = [f"{G}: {len(reports)} fixed points"]
        for k, rep in enumerate(reports, 1):
            gens = " ".join("(" + ",".join(map(str, g)) + ")" for g in rep.generators)
            out += ["", f"#{k} generators: {gens}", text_grid(rep.staircase)]
        _emit(args, _lines(*out))
    else:
        _emit(args, dumps({"schema": SCHEMA, "group": G.to_json(), "count": len(reports),
                           "fixed_points": [r.to_json() for r in reports]}))
    return EXIT_OK


def cmd_hilb_fan(args) -> int:
    G = _group_from(args)
    fan, _ = hilb_fan(G, args.bound)
    _emit(args, _render(fan, args.format, G, f"Hilb fan of {G}"))
    return EXIT_OK


def _render(decomp, fmt: str, G: GroupSpec | None, title: str | None = None) -> str:
    if fmt == "svg":
        if decomp.n != 3:
            raise UsageError(f"svg output needs n = 3, got n = {decomp.n}")
        return triangulation_svg(decomp, title)
    return dumps(fan_document(decomp, G))


def cmd_fan_build(args) -> int:
    if args.kind == "xi-ar3":
        decomp, G = build_xi_ar3(args.r), a_r_n(args.r, 3)
    elif args.kind == "minimal-ar2":
        decomp, G = build_minimal_ar2(args.r), a_r_n(args.r, 2)
    else:
        decomp, G = build_a14(args.kind), a_r_n(1, 4)
    _emit(args, _render(decomp, args.format, G))
    return EXIT_OK


def cmd_fan_check(args) -> int:
    decomp, G = _fan_from(args)
    rep = check_report(decomp, G)
    if args.format == "text":
        disc = ", ".join(f"{v}:{a}" for v, a in rep["discrepancies"]) or "none"
        _emit(args, _lines(f"smooth: {str(rep['smooth']).lower()}", f"crepant: {str(rep['crepant']).lower()}",
                           f"euler: {rep['euler']} (|G| = {rep['order']})", f"discrepancies: {disc}"))
    else:
        _emit(args, dumps({"schema": SCHEMA, **rep}))
    return EXIT_OK


def cmd_fan_wall(args) -> int:
    decomp, G = _fan_from(args)
    if args.all == bool(args.facet):
        raise UsageError("give exactly one of --facet or --all")
    facets = interior_facets(decomp) if args.all else [[_key(t) for t in args.facet]]
    walls = [wall_relation(decomp, G, f).to_json(decomp) for f in facets]
    _emit(args, dumps({"schema": SCHEMA, "walls": walls}))
    return EXIT_OK


def cmd_local_model(args) -> int:
    decomp, G = _fan_from(args)
    cone = cell_cone(decomp, G, [_key(t) for t in args.cell])
    basis = dual_cone_hilbert_basis(G, cone, args.hilbert_bound)
    _emit(args, dumps({"schema": SCHEMA, "cell": [decomp.label(decomp.index(_key(t))) for t in args.cell],
                       "cone": cone.to_json(), "hilbert_basis": [list(m) for m in basis], "size": len(basis)}))
    return EXIT_OK


def cmd_resolve(args) -> int:
    G = _group_from(args)
    bound = args.bound if args.bound is not None else (DEFAULT_BOUND if args.large else PIPELINE_BOUND)
    if G.order > bound:
        hint = "" if args.large else "; pass --large to opt in"
        raise EnumerationBoundError(f"|G| = {G.order} exceeds the pipeline bound {bound}{hint}")
    rep = hilb_pipeline(G, bound=bound, combination_cap=args.combination_cap)
    doc = rep.to_json()
    if args.figures:
        doc["figures"] = _write_figures(Path(args.figures), rep, doc)
    if args.format == "dot":
        _emit(args, flop_graph_dot(doc))
    elif args.format == "text":
        disc = ", ".join(f"{v}:{a}" for v, a in doc["discrepancies"]) or "none"
        rows = [f"group: {G}", f"fixed points: {doc['fixed_points']}", f"smooth: {str(doc['smooth']).lower()}",
                f"crepant: {str(doc['crepant']).lower()}", f"euler: {doc['euler']}", f"discrepancies: {disc}"]
        rows += [f"star {s['vertex']}: {s['reason']}" for s in doc["stars"]]
        rows += [f"blow-down {b['choice']}: smooth={str(b['smooth']).lower()} crepant={str(b['crepant']).lower()} euler={b['euler']}"
                 for b in doc["blowdowns"]]
        rows += [f"{k}: {v}" for k, v in sorted(doc["checks"].items()) if not isinstance(v, (list, dict))]
        _emit(args, _lines(*rows))
    else:
        _emit(args, dumps(doc))
    return EXIT_OK


def _write_figures(folder: Path, rep, doc: dict) -> list[str]:
    folder.mkdir(parents=True, exist_ok=True)
    written = {}
    if rep.fan.n == 3:
        written["fan.svg"] = triangulation_svg(rep.fan, f"Hilb fan of {rep.group}")
    for k, st in enumerate(enumerate_fixed_points(rep.group, rep.group.order), 1):
        written[f"staircase_{k:02d}.svg"] = staircase_svg(st, f"fixed point {k}")
    written["flops.dot"] = flop_graph_dot(doc)
    for name, text in written.items():
        (folder / name).write_text(text, encoding="utf-8")
    return sorted(written)


def cmd_flop(args) -> int:
    decomp, G = _fan_from(args)
    if args.list:
        _emit(args, dumps({"schema": SCHEMA, "sites": [s.to_json(decomp) for s in find_flop_sites(decomp, G)]}))
        return EXIT_OK
    if args.from_k is None or args.to_k is None:
        raise UsageError("flop needs --from and --to (or --list)")
    site = None if args.site is None else [t.strip() for t in args.site.split(",")]
    _emit(args, dumps(fan_document(flop(decomp, G, site, args.from_k, args.to_k), G)))
    return EXIT_OK


def cmd_render(args) -> int:
    try:
        decomp, _ = load_fan(args.fan)
    except OSError as exc:
        raise UsageError(f"cannot read fan file: {exc}") from exc
    _emit(args, _render(decomp, "svg", None, args.title))
    return EXIT_OK


# -- entry points ----------------------------------------------------------------


def _error(kind: str, message: str, detail=None) -> str:
    body = {"kind": kind, "message": message}
    if detail is not None:
        body["detail"] = detail
    return dumps({"schema": SCHEMA, "error": body})


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, PlotError) as exc:
        sys.stderr.write(f"orbitool: {exc}\n")
        return EXIT_USAGE
    except (EnumerationBoundError, HilbertBasisBoundError) as exc:
        sys.stdout.write(_error("resource_bound", str(exc)))
        return EXIT_BOUND
    except DecompositionError as exc:
        sys.stdout.write(_error(exc.kind, str(exc), _jsonable(exc.detail)))
        return EXIT_INVALID
    except PipelineError as exc:
        sys.stdout.write(_error("pipeline", str(exc), _jsonable(exc.detail)))
        return EXIT_INVALID
    except (GroupError, DocumentError, StaircaseError, UnsupportedError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        kind = next((k for cls, k in _KINDS if isinstance(exc, cls)), "invalid")
        sys.stdout.write(_error(kind, str(msg)))
        return EXIT_INVALID


_KINDS = ((GroupError, "group"), (DocumentError, "document"), (StaircaseError, "staircase"),
          (UnsupportedError, "unsupported"), (KeyError, "lookup"))


def _jsonable(x):
    if isinstance(x, Fraction):
        return [x.numerator, x.denominator]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x if isinstance(x, (str, int, bool, type(None))) else str(x)


def main() -> None:
    sys.exit(run())
