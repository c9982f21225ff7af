"""Command-line interface: ``contdiam <command> INPUT``.

Input is a JSON document ``{"kind": "path" | "cycle", "vertices": [[x, y], ...]}``.
Results are printed as key-sorted JSON with floats rounded to 12 significant
digits.

Exit codes: 0 ok, 2 malformed input, 3 wrong network kind, 4 cycle not
convex, 5 degenerate cycle, 6 oracle budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .cycles import check_corollary_3_14, optimal_pair
from .errors import BudgetExceeded, Degenerate, NotConvex
from .geometry import ArcPosition, CycleNetwork, PathNetwork, plain_diameter
from .oracle import approx_diameter, grid_search_cycle_pair, grid_search_path
from .paths import candidate_lengths, optimal_path_shortcut
from .render import cycle_figure, path_figure, write_svg

EXIT_OK = 0
EXIT_MALFORMED = 2
EXIT_KIND = 3
EXIT_NOT_CONVEX = 4
EXIT_DEGENERATE = 5
EXIT_BUDGET = 6

SIG_DIGITS = 12


class InputError(Exception):
    pass


class KindMismatch(Exception):
    pass


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    if x == 0.0 or not math.isfinite(x):
        return x
    return float(f"{x:.{digits - 1}e}")


def _round_tree(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {k: _round_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_tree(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_round_tree(obj), sort_keys=True)


# --------------------------------------------------------------------------
# documents
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NetworkDocument:
    kind: str
    vertices: tuple[tuple[float, float], ...]

    @classmethod
    def from_dict(cls, data: Any) -> "NetworkDocument":
        if not isinstance(data, dict):
            raise InputError("top level: expected a JSON object")
        kind = data.get("kind")
        if kind not in ("path", "cycle"):
            raise InputError(f"field 'kind': expected \"path\" or \"cycle\", got {kind!r}")
        verts = data.get("vertices")
        if not isinstance(verts, list):
            raise InputError("field 'vertices': expected a list of [x, y] pairs")
        out = []
        for i, v in enumerate(verts):
            if (not isinstance(v, (list, tuple)) or len(v) != 2
                    or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
                raise InputError(f"field 'vertices[{i}]': expected [x, y] numbers, got {v!r}")
            x, y = float(v[0]), float(v[1])
            if not (math.isfinite(x) and math.isfinite(y)):
                raise InputError(f"field 'vertices[{i}]': coordinates must be finite")
            out.append((x, y))
        if kind == "cycle" and len(out) >= 2 and out[0] == out[-1]:
            out.pop()
        if len(out) < 2:
            raise InputError(f"field 'vertices': need at least 2 vertices, got {len(out)}")
        return cls(kind, tuple(out))

    @classmethod
    def from_json(cls, text: str) -> "NetworkDocument":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "vertices": [list(v) for v in self.vertices]}

    def network(self) -> PathNetwork | CycleNetwork:
        try:
            if self.kind == "path":
                return PathNetwork(self.vertices)
            return CycleNetwork(self.vertices)
        except ValueError as exc:
            raise InputError(f"field 'vertices': {exc}") from None


@dataclass(frozen=True)
class SolutionDocument:
    """A result: the input echo plus a flat mapping of result fields."""

    kind: str
    input: NetworkDocument
    result: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "input": self.input.to_dict(), **self.result}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "SolutionDocument":
        data = dict(data)
        kind = data.pop("kind")
        inp = NetworkDocument.from_dict(data.pop("input"))
        return cls(kind, inp, data)

    @classmethod
    def from_json(cls, text: str) -> "SolutionDocument":
        return cls.from_dict(json.loads(text))


def _position(net, pos: ArcPosition) -> dict:
    p = net.point_at(pos)
    return {"edge": pos.edge, "lambda": pos.lam, "xy": [p.x, p.y]}


def load_network(path: str) -> NetworkDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return NetworkDocument.from_json(text)


def _require_kind(doc: NetworkDocument, kind: str) -> None:
    if doc.kind != kind:
        raise KindMismatch(f"this command needs a {kind}, input is a {doc.kind}")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_diameter(args) -> SolutionDocument:
    doc = load_network(args.input)
    net = doc.network()
    return SolutionDocument(doc.kind, doc, {"diameter": plain_diameter(net)})


def path_solution_document(doc: NetworkDocument, path: PathNetwork, sol) -> SolutionDocument:
    return SolutionDocument("path", doc, {
        "x_star": sol.x_star,
        "p": _position(path, sol.p),
        "q": _position(path, sol.q),
        "shortcut_length": sol.shortcut_length,
        "budget_bound": sol.budget_bound,
        "diameter": sol.diameter,
        "improvement": sol.improvement,
    })


def cmd_path_shortcut(args) -> SolutionDocument:
    doc = load_network(args.input)
    _require_kind(doc, "path")
    path = doc.network()
    sol = optimal_path_shortcut(path)
    if not sol.is_shortcut:
        print("warning: no shortcut lowers the diameter of this path (improvement 0)", file=sys.stderr)
    p, q = path.point_at(sol.p), path.point_at(sol.q)
    if args.svg:
        shortcuts, highlight = [], []
        if sol.is_shortcut:
            shortcuts = [(p, q)]
            cand = candidate_lengths(path, sol.p, sol.q)
            highlight = {"U": ["s", "e"], "S": ["s"], "E": ["e"]}
            highlight = sorted({h for name in cand.diametral for h in highlight[name]})
        s, e = path.point_at(path.start), path.point_at(path.end)
        write_svg(args.svg, path, shortcuts, [("s", s), ("e", e), ("p", p), ("q", q)], highlight)
    if args.figure:
        path_figure(path, sol, args.figure)
    return path_solution_document(doc, path, sol)


def cycle_solution_document(doc: NetworkDocument, cycle: CycleNetwork, sol) -> SolutionDocument:
    pair = sol.pair
    return SolutionDocument("cycle", doc, {
        "p": _position(cycle, pair.p),
        "r": _position(cycle, pair.r),
        "q": _position(cycle, pair.q),
        "s": _position(cycle, pair.s),
        "a": pair.a, "b": pair.b, "c": pair.c, "d": pair.d,
        "len_pq": pair.len_pq,
        "len_rs": pair.len_rs,
        "diameter": sol.diameter,
        "improvement": sol.improvement,
        "stage_count": sol.stage_count,
        "balance_residuals": list(sol.config.residuals),
        "corollary_3_14_residuals": check_corollary_3_14(sol.config).tolist(),
    })


def cmd_cycle_pair(args) -> SolutionDocument:
    doc = load_network(args.input)
    _require_kind(doc, "cycle")
    cycle = doc.network()
    sol = optimal_pair(cycle, tol=args.tolerance)
    if args.svg:
        pts = [(name, cycle.point_at(pos)) for name, pos in zip("prqs", sol.pair.positions)]
        xy = dict(pts)
        write_svg(args.svg, cycle, [(xy["p"], xy["q"]), (xy["r"], xy["s"])], pts)
    if args.figure:
        cycle_figure(cycle, sol, args.figure)
    return cycle_solution_document(doc, cycle, sol)


def cmd_oracle(args) -> SolutionDocument:
    doc = load_network(args.input)
    net = doc.network()
    mode = args.mode
    if mode == "diameter":
        h = args.spacing if args.spacing is not None else net.total_length / 400.0
        approx = approx_diameter(net, [], h)
        exact = plain_diameter(net)
        bound = 2.0 * h
        return SolutionDocument(doc.kind, doc, {
            "oracle": "diameter", "spacing": h,
            "oracle_diameter": approx, "solver_diameter": exact,
            "error_bound": bound, "within_bound": exact - bound <= approx <= exact + 1e-12 * net.total_length,
        })
    if mode == "path":
        _require_kind(doc, "path")
        m = args.grid if args.grid is not None else 400
        grid = grid_search_path(net, m)
        sol = optimal_path_shortcut(net)
        return SolutionDocument("path", doc, {
            "oracle": "path", "grid": m,
            "oracle_diameter": grid.diameter, "solver_diameter": sol.diameter,
            "oracle_p": _position(net, grid.p), "oracle_q": _position(net, grid.q),
            "error_bound": grid.error_bound,
            "within_bound": sol.diameter - 1e-9 * net.total_length <= grid.diameter <= sol.diameter + grid.error_bound,
        })
    _require_kind(doc, "cycle")
    m = args.grid if args.grid is not None else 30
    h = args.spacing if args.spacing is not None else net.total_length / 800.0
    grid = grid_search_cycle_pair(net, m, h)
    out = {
        "oracle": "cycle", "grid": m, "spacing": h,
        "oracle_diameter": grid.diameter,
        "oracle_grid_diameter": grid.grid_diameter,
        "oracle_discretized_diameter": grid.discretized_diameter,
        "oracle_lower_bound": grid.lower_bound,
        "oracle_p": _position(net, grid.p), "oracle_r": _position(net, grid.r),
        "oracle_q": _position(net, grid.q), "oracle_s": _position(net, grid.s),
        "error_bound": grid.grid_error_bound + 2.0 * h,
    }
    sol = optimal_pair(net, tol=args.tolerance)
    out["solver_diameter"] = sol.diameter
    out["within_bound"] = (grid.lower_bound - 1e-9 * net.total_length <= sol.diameter
                           <= grid.diameter + 1e-9 * net.total_length)
    return SolutionDocument("cycle", doc, out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contdiam",
        description="Continuous diameter of polygonal paths and cycles, and optimal shortcuts.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, render=False):
        p.add_argument("--tolerance", type=float, default=1e-7,
                       help="relative solver tolerance (default 1e-7)")
        if render:
            p.add_argument("--svg", metavar="FILE", help="write an SVG drawing")
            p.add_argument("--figure", metavar="FILE", help="write a matplotlib report figure (png/pdf/svg)")

    p = sub.add_parser("diameter", help="continuous diameter of the plain network")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_diameter)

    p = sub.add_parser("path-shortcut", help="optimal single shortcut for a path")
    p.add_argument("input")
    common(p, render=True)
    p.set_defaults(func=cmd_path_shortcut)

    p = sub.add_parser("cycle-pair", help="optimal pair of shortcuts for a convex cycle")
    p.add_argument("input")
    common(p, render=True)
    p.set_defaults(func=cmd_cycle_pair)

    p = sub.add_parser("oracle", help="brute-force check against the solvers")
    p.add_argument("mode", choices=("path", "cycle", "diameter"))
    p.add_argument("input")
    p.add_argument("--grid", type=int, help="grid size m (path 400, cycle 30)")
    p.add_argument("--spacing", type=float, help="sample spacing h for shortest paths")
    common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = args.func(args)
    except InputError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except KindMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_KIND
    except Degenerate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NotConvex as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVEX
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    print(doc.to_json())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
