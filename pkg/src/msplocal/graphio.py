"""Stable JSON schemas for graphs and artifacts, plus a DOT emitter.

All rationals are rendered "p/q" strings (or "p" when integral), never
floats.  Field names are part of the artifact contract; adding a field is a
schema change.  The DOT output ranks vertices by level and colors them by
hour; `read_dot` is a strict reader used for round-trip checks.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Dict, List

from .errors import FileMalformed
from .graphs import DecoratedGraph, Edge, EdgeKind, Leg, Level, Vertex
from .model import Marking


def frac_str(x: Fraction) -> str:
    return str(x)


def parse_frac(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise FileMalformed(f"rational must be a string, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise FileMalformed(f"bad rational {text!r}: {exc}")


def graph_to_json(graph: DecoratedGraph) -> dict:
    return {
        "vertices": [
            {
                "level": vx.level.value,
                "hour": vx.hour,
                "genus": vx.genus,
                "d0": frac_str(vx.d0),
                "dinf": frac_str(vx.dinf),
                "legs": [
                    {"index": leg.index, "marking": leg.marking.render()} for leg in vx.legs
                ],
            }
            for vx in graph.vertices
        ],
        "edges": [
            {
                "ends": list(e.ends),
                "kind": e.kind.value,
                "d0": frac_str(e.d0),
                "dinf": frac_str(e.dinf),
            }
            for e in graph.edges
        ],
    }


def _marking_from_text(text: str) -> Marking:
    if text == "rho":
        return Marking.rho_unit()
    if text.startswith("narrow:"):
        return Marking("narrow", int(text.split(":", 1)[1]))
    raise FileMalformed(f"unknown marking {text!r}")


def graph_from_json(data: dict) -> DecoratedGraph:
    try:
        vertices = tuple(
            Vertex(
                Level(v["level"]),
                v["hour"],
                int(v["genus"]),
                parse_frac(v["d0"]),
                parse_frac(v["dinf"]),
                tuple(
                    Leg(int(l["index"]), _marking_from_text(l["marking"]))
                    for l in v["legs"]
                ),
            )
            for v in data["vertices"]
        )
        edges = tuple(
            Edge(
                (int(e["ends"][0]), int(e["ends"][1])),
                EdgeKind(e["kind"]),
                parse_frac(e["d0"]),
                parse_frac(e["dinf"]),
            )
            for e in data["edges"]
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise FileMalformed(f"bad graph record: {exc}")
    return DecoratedGraph(vertices, edges)


def dumps_canonical(payload) -> str:
    """Deterministic JSON: sorted keys, no float formatting surprises."""
    return json.dumps(payload, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


# ---------------------------------------------------------------------------
# DOT

_HOUR_COLORS = [
    "black", "blue", "red", "green", "orange", "purple", "brown", "cyan",
]
_LEVEL_RANK = {Level.ZERO: "min", Level.ONE: "same", Level.INF: "max"}


def graph_to_dot(graph: DecoratedGraph, name: str = "msp") -> str:
    lines = [f"graph \"{name}\" {{", "  rankdir=TB;"]
    by_level: Dict[Level, List[int]] = {}
    for v in range(len(graph.vertices)):
        by_level.setdefault(graph.vertices[v].level, []).append(v)
    for level in (Level.ZERO, Level.ONE, Level.INF):
        members = by_level.get(level, [])
        if not members:
            continue
        lines.append(f"  subgraph \"cluster_{level.value}\" {{")
        lines.append(f"    label=\"level {level.value}\";")
        for v in members:
            vx = graph.vertices[v]
            color = _HOUR_COLORS[(vx.hour or 0) % len(_HOUR_COLORS)]
            legs = ",".join(leg.marking.render() for leg in vx.legs)
            label = f"v{v} g={vx.genus} d=({vx.d0},{vx.dinf})"
            if vx.hour is not None:
                label += f" hr={vx.hour}"
            if legs:
                label += f" [{legs}]"
            lines.append(f"    v{v} [label=\"{label}\", color={color}];")
        lines.append("  }")
    for i, e in enumerate(graph.edges):
        label = f"{e.kind.value} dL={e.dL}"
        lines.append(f"  v{e.ends[0]} -- v{e.ends[1]} [label=\"{label}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


_DOT_NODE = re.compile(r"^\s*v(\d+)\s*\[label=\"([^\"]*)\", color=(\w+)\];$")
_DOT_EDGE = re.compile(r"^\s*v(\d+)\s*--\s*v(\d+)\s*\[label=\"([^\"]*)\"\];$")


def read_dot(text: str) -> dict:
    """Strict reader for the emitter's output; returns nodes/edges found.

    Raises FileMalformed on anything the emitter could not have produced,
    so tests can assert the full corpus round-trips.
    """
    nodes = {}
    edges = []
    depth = 0
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("graph") or stripped.startswith("subgraph"):
            if not stripped.endswith("{"):
                raise FileMalformed(f"unterminated block header: {line!r}")
            depth += 1
            continue
        if stripped == "}":
            depth -= 1
            if depth < 0:
                raise FileMalformed("unbalanced braces")
            continue
        if stripped.startswith(("rankdir", "label=")):
            continue
        m = _DOT_NODE.match(line)
        if m:
            nodes[int(m.group(1))] = m.group(2)
            continue
        m = _DOT_EDGE.match(line)
        if m:
            edges.append((int(m.group(1)), int(m.group(2)), m.group(3)))
            continue
        raise FileMalformed(f"unrecognized DOT line: {line!r}")
    if depth != 0:
        raise FileMalformed("unbalanced braces at end of file")
    return {"nodes": nodes, "edges": edges}
