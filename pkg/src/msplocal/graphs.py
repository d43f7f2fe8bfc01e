"""Decorated localization graphs: validity, monodromy, flattening, regularity.

A graph records one torus-fixed-locus class: vertices carry level (0, 1 or
infinity), an hour (the acting torus factor, levels 1/inf only), genus, a
degree pair (d0, dinf) = (deg L(x)N, deg N), and labeled legs; edges carry a
kind determined by the levels they join and their own degree pair.  The line
bundle degree dL = d0 - dinf is derived.

Vertex dimension ("stability") follows the fixed-locus geometry: an isolated
vertex is a whole fixed curve; a vertex with edges is a curve exactly when
2g - 2 + (edges + legs) > 0 or, at level 0, when it carries positive degree.
Everything else is an unstable point with genus 0, degree (0,0) and at most
two special points.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .errors import NotAValenceTwoVertex, NotFlat, WrongEdgeType
from .model import DiscreteData, Marking, WeightSystem, is_narrow_exponent


class Level(enum.Enum):
    ZERO = "0"
    ONE = "1"
    INF = "inf"


class EdgeKind(enum.Enum):
    E01 = "E01"
    E11 = "E11"
    E1INF = "E1inf"
    E0INF = "E0inf"
    EINFINF = "Einfinf"


# (level, level) -> edge kind; unordered.  No E00 edges exist.
_KIND_BY_LEVELS = {
    frozenset((Level.ZERO, Level.ONE)): EdgeKind.E01,
    frozenset((Level.ONE,)): EdgeKind.E11,
    frozenset((Level.ONE, Level.INF)): EdgeKind.E1INF,
    frozenset((Level.ZERO, Level.INF)): EdgeKind.E0INF,
    frozenset((Level.INF,)): EdgeKind.EINFINF,
}


@dataclass(frozen=True)
class Leg:
    index: int  # position in the discrete data's marking list
    marking: Marking


@dataclass(frozen=True)
class Vertex:
    level: Level
    hour: Optional[int]
    genus: int
    d0: Fraction
    dinf: Fraction
    legs: Tuple[Leg, ...] = ()

    @staticmethod
    def make(level, hour=None, genus=0, d0=0, dinf=0, legs=()) -> "Vertex":
        return Vertex(level, hour, int(genus), Fraction(d0), Fraction(dinf), tuple(legs))


@dataclass(frozen=True)
class Edge:
    ends: Tuple[int, int]
    kind: EdgeKind
    d0: Fraction
    dinf: Fraction

    @staticmethod
    def make(ends, kind, d0=0, dinf=0) -> "Edge":
        return Edge(tuple(ends), kind, Fraction(d0), Fraction(dinf))

    @property
    def dL(self) -> Fraction:
        return self.d0 - self.dinf


# A flag is (edge index, end index in {0,1}).
Flag = Tuple[int, int]


@dataclass(frozen=True)
class DecoratedGraph:
    vertices: Tuple[Vertex, ...]
    edges: Tuple[Edge, ...]

    # -- structure helpers -------------------------------------------------
    def edge_indices_at(self, v: int) -> List[int]:
        return [i for i, e in enumerate(self.edges) for end in (0, 1) if e.ends[end] == v]

    def flags_at(self, v: int) -> List[Flag]:
        return [(i, end) for i, e in enumerate(self.edges) for end in (0, 1) if e.ends[end] == v]

    def flags(self) -> List[Flag]:
        return [(i, end) for i in range(len(self.edges)) for end in (0, 1)]

    def flag_vertex(self, flag: Flag) -> int:
        return self.edges[flag[0]].ends[flag[1]]

    def other_end(self, flag: Flag) -> int:
        e, end = flag
        return self.edges[e].ends[1 - end]

    def valence(self, v: int) -> int:
        """Special points on the vertex curve: incident flags plus legs."""
        return len(self.flags_at(v)) + len(self.vertices[v].legs)

    def is_stable_vertex(self, v: int) -> bool:
        """dim C_v = 1: isolated, or enough special points, or positive degree."""
        vx = self.vertices[v]
        flags = self.flags_at(v)
        if not flags:
            return True
        if 2 * vx.genus - 2 + len(flags) + len(vx.legs) > 0:
            return True
        return vx.level is Level.ZERO and vx.d0 > 0

    def vertex_class(self, v: int) -> str:
        """'S' for stable, else 'a,b' with a legs and b edges."""
        if self.is_stable_vertex(v):
            return "S"
        return f"{len(self.vertices[v].legs)},{len(self.flags_at(v))}"

    def stable_vertices(self) -> List[int]:
        return [v for v in range(len(self.vertices)) if self.is_stable_vertex(v)]

    def betti1(self) -> int:
        return len(self.edges) - len(self.vertices) + self.component_count()

    def component_count(self) -> int:
        n = len(self.vertices)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            a, b = find(e.ends[0]), find(e.ends[1])
            if a != b:
                parent[a] = b
        return len({find(v) for v in range(n)})

    def total_d0(self) -> Fraction:
        return sum((x.d0 for x in self.vertices), Fraction(0)) + sum(
            (e.d0 for e in self.edges), Fraction(0)
        )

    def total_dinf(self) -> Fraction:
        return sum((x.dinf for x in self.vertices), Fraction(0)) + sum(
            (e.dinf for e in self.edges), Fraction(0)
        )

    def total_genus(self) -> int:
        return sum(x.genus for x in self.vertices) + self.betti1()

    def leg_indices(self) -> List[int]:
        return sorted(leg.index for v in self.vertices for leg in v.legs)

    def end_at_level(self, e: int, level: Level) -> int:
        """End index (0 or 1) of edge e lying at the given level."""
        edge = self.edges[e]
        for end in (0, 1):
            if self.vertices[edge.ends[end]].level is level:
                return end
        raise WrongEdgeType(f"edge {e} has no end at level {level.value}")


def make_graph(vertices: Iterable[Vertex], edges: Iterable[Edge]) -> DecoratedGraph:
    return DecoratedGraph(tuple(vertices), tuple(edges))


# ---------------------------------------------------------------------------
# Flag monodromy


@dataclass(frozen=True)
class FlagMonodromy:
    """Monodromy tag zeta_k^b with b in 1..k (b = k is the trivial tag)."""

    b: int
    sector: str  # "rho" | "phi" | "plain"
    degeneracy_empty: bool = False

    def render(self, k: int) -> str:
        base = f"zeta^{self.b}" if self.b != k else "1"
        return f"({base},{self.sector})" if self.sector != "plain" else base


def _exponent_in_range(value: Fraction, k: int) -> int:
    """b in [1, k] with value = a + b/k for an integer a."""
    numer = value * k
    if numer.denominator != 1:
        raise ValueError(f"degree {value} is not in (1/{k})Z")
    b = int(numer) % k
    return b if b else k


def flag_monodromy(graph: DecoratedGraph, flag: Flag, ws: WeightSystem) -> FlagMonodromy:
    """Monodromy decoration of a flag, derived from its edge's degree data.

    Edges internal to level infinity carry no assignment here (they live
    inside the opaque web factor); asking about one raises WrongEdgeType.
    """
    e, end = flag
    edge = graph.edges[e]
    level = graph.vertices[edge.ends[end]].level
    k = ws.k
    if edge.kind is EdgeKind.E01:
        if level is Level.ZERO:
            b = _exponent_in_range(edge.dL, k)
            return FlagMonodromy(b, "rho", degeneracy_empty=(b != k))
        return FlagMonodromy(k, "rho")
    if edge.kind is EdgeKind.E1INF:
        if level is Level.ONE:
            return FlagMonodromy(k, "phi")
        b = _exponent_in_range(edge.dL, k)
        return FlagMonodromy(b, "phi")
    if edge.kind is EdgeKind.E0INF:
        if level is Level.ZERO:
            b = _exponent_in_range(edge.d0, k)
            return FlagMonodromy(b, "plain", degeneracy_empty=(b != k))
        b = _exponent_in_range(edge.dinf, k)
        return FlagMonodromy(b, "plain", degeneracy_empty=(b != k))
    raise WrongEdgeType(f"no flag monodromy for edge kind {edge.kind.value}")


# ---------------------------------------------------------------------------
# Validity


@dataclass(frozen=True)
class Violation:
    code: str
    element: str
    message: str


@dataclass(frozen=True)
class ValidityReport:
    violations: Tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set:
        return {v.code for v in self.violations}


def _quantized(value: Fraction, k: int) -> bool:
    return k % value.denominator == 0


def validate(graph: DecoratedGraph, ws: WeightSystem, dd: DiscreteData) -> ValidityReport:
    """Check every structural invariant; report all failures, raise nothing."""
    out: List[Violation] = []
    k = ws.k

    def bad(code: str, element: str, message: str) -> None:
        out.append(Violation(code, element, message))

    n = len(graph.vertices)
    if n == 0:
        bad("empty", "graph", "graph has no vertices")
        return ValidityReport(tuple(out))

    for i, e in enumerate(graph.edges):
        if not (0 <= e.ends[0] < n and 0 <= e.ends[1] < n):
            bad("edge-ends", f"edge {i}", "edge endpoint out of range")
            return ValidityReport(tuple(out))

    # -- vertex decorations -------------------------------------------------
    for v, vx in enumerate(graph.vertices):
        name = f"vertex {v}"
        if vx.genus < 0:
            bad("genus-negative", name, "genus must be nonnegative")
        if vx.level is Level.ZERO:
            if vx.hour is not None:
                bad("hour-at-level0", name, "level-0 vertices carry no hour")
            if vx.dinf != 0:
                bad("level0-dinf", name, "level-0 vertices have dinf = 0")
            if vx.d0 < 0 or not _quantized(vx.d0, k):
                bad("level0-d0", name, f"level-0 degree must be in (1/{k})Z and >= 0")
        else:
            if vx.hour is None or not 1 <= vx.hour <= dd.n_tori:
                bad("hour-missing", name, "levels 1/inf need an hour in 1..N")
        if vx.level is Level.ONE and (vx.d0 != 0 or vx.dinf != 0):
            bad("level1-degree", name, "level-1 vertices have degree (0,0)")
        if vx.level is Level.INF:
            if vx.d0 != 0:
                bad("levelinf-d0", name, "level-inf vertices have d0 = 0")
            if graph.is_stable_vertex(v):
                forced = -Fraction(2 * vx.genus - 2 + graph.valence(v), k)
                if vx.dinf != forced:
                    bad(
                        "levelinf-dinf",
                        name,
                        f"stable level-inf vertex must have dinf = {forced}",
                    )
            elif vx.dinf != 0:
                bad("levelinf-dinf", name, "unstable level-inf vertex has dinf = 0")
        # The unstable-vertex shape rules (genus 0, degree (0,0), at most two
        # special points) need no checks here: is_stable_vertex derives the
        # dimension from the decorations, so no representable vertex violates
        # them — positive genus or three special points force a curve, and
        # nonzero degrees are caught by the per-level rules above.
        if not graph.flags_at(v) and vx.level is not Level.ZERO:
            # Isolated level-0 vertices index the plain GW phase and are
            # always kept; isolated level-1/inf phases need stable moduli.
            if 2 * vx.genus - 2 + len(vx.legs) <= 0:
                bad("isolated-unstable", name, "isolated non-level-0 vertex needs 2g-2+l > 0")
        for leg in vx.legs:
            if leg.marking.is_stacky:
                if vx.level is not Level.INF:
                    bad("narrow-leg-level", name, "stacky legs live at level inf")
                elif not is_narrow_exponent(ws, leg.marking.m):
                    bad("broad-leg", name, "leg monodromy is not narrow")
            else:
                if vx.level is Level.INF:
                    bad("rho-leg-level", name, "rho-unit legs live at levels 0/1")

    # -- edge decorations ---------------------------------------------------
    for i, e in enumerate(graph.edges):
        name = f"edge {i}"
        la = graph.vertices[e.ends[0]].level
        lb = graph.vertices[e.ends[1]].level
        if la is Level.ZERO and lb is Level.ZERO:
            bad("E00", name, "edges between two level-0 vertices do not exist")
            continue
        expected = _KIND_BY_LEVELS.get(frozenset((la, lb)))
        if expected is not e.kind:
            bad("edge-kind", name, f"kind {e.kind.value} does not match levels {la.value},{lb.value}")
            continue
        if e.ends[0] == e.ends[1]:
            bad("self-loop", name, "no edge joins a vertex to itself")
            continue
        ha = graph.vertices[e.ends[0]].hour
        hb = graph.vertices[e.ends[1]].hour
        if e.kind is EdgeKind.E11 and ha == hb:
            bad("E11-hours-equal", name, "E11 hours equal")
        if e.kind is EdgeKind.EINFINF and ha == hb:
            bad("Einfinf-hours-equal", name, "level-inf internal edges join distinct hours")
        if e.kind is EdgeKind.E1INF and ha != hb:
            bad("E1inf-hours-differ", name, "E1inf endpoints share the hour")
        if e.kind is EdgeKind.E01:
            if e.dinf != 0:
                bad("E01-dinf", name, "E01 edges have dinf = 0")
            if e.dL <= 0:
                bad("E01-degree-positive", name, "E01 degree must be positive")
            elif not _quantized(e.dL, k):
                bad("degree-quantized", name, f"degree not in (1/{k})Z")
        if e.kind is EdgeKind.E11:
            if e.dinf != 0:
                bad("E11-dinf", name, "E11 edges have dinf = 0")
            if e.d0 <= 0 or e.d0.denominator != 1:
                bad("E11-degree", name, "E11 degree must be a positive integer")
        if e.kind is EdgeKind.E1INF:
            if e.d0 != 0:
                bad("E1inf-d0", name, "E1inf edges have d0 = 0")
            if e.dL >= 0:
                bad("E1inf-degree-negative", name, "E1inf line-bundle degree must be negative")
            elif not _quantized(e.dL, k):
                bad("degree-quantized", name, f"degree not in (1/{k})Z")
        if e.kind is EdgeKind.E0INF:
            if e.d0 <= 0 or e.dinf <= 0:
                bad("E0inf-degrees", name, "E0inf edges have positive d0 and dinf")
            elif not (_quantized(e.d0, k) and _quantized(e.dinf, k)):
                bad("degree-quantized", name, f"degree not in (1/{k})Z")
        if e.kind is EdgeKind.EINFINF:
            if e.d0 != e.dinf or e.d0 <= 0 or e.d0.denominator != 1:
                bad("Einfinf-degree", name, "web edges carry d0 = dinf a positive integer")

    # -- stacky flags sit at special points ---------------------------------
    for flag in graph.flags():
        e, end = flag
        edge = graph.edges[e]
        if edge.kind in (EdgeKind.E11, EdgeKind.EINFINF):
            continue
        try:
            mono = flag_monodromy(graph, flag, ws)
        except (WrongEdgeType, ValueError):
            continue
        if mono.b == k:
            continue
        v = edge.ends[end]
        cls = graph.vertex_class(v)
        name = f"flag ({e},{end})"
        if cls == "0,1":
            bad("stacky-bare-end", name, "a stacky flag cannot sit at a bare unstable end")
        if cls == "1,1":
            leg = graph.vertices[v].legs[0]
            want = leg.marking.m if leg.marking.is_stacky else k
            if want != mono.b:
                bad("stacky-leg-mismatch", name, "marking monodromy must match the flag's")

    # -- global conservation -------------------------------------------------
    if graph.component_count() != 1:
        bad("disconnected", "graph", "underlying graph must be connected")
    if graph.total_d0() != dd.d0:
        bad("d0-conservation", "graph", f"total d0 {graph.total_d0()} != {dd.d0}")
    if graph.total_dinf() != dd.dinf:
        bad("dinf-conservation", "graph", f"total dinf {graph.total_dinf()} != {dd.dinf}")
    if graph.total_genus() != dd.genus:
        bad("genus-conservation", "graph", f"total genus {graph.total_genus()} != {dd.genus}")
    legs = graph.leg_indices()
    if legs != list(range(dd.n_legs)):
        bad("legs-partition", "graph", "legs must use each marking index exactly once")
    else:
        for v in graph.vertices:
            for leg in v.legs:
                if leg.marking != dd.markings[leg.index]:
                    bad("leg-marking", f"leg {leg.index}", "leg marking differs from discrete data")

    return ValidityReport(tuple(out))


# ---------------------------------------------------------------------------
# Balanced nodes and flattening


def is_balanced(graph: DecoratedGraph, v: int, ws: WeightSystem) -> bool:
    """Torus-balanced test for a two-edge unstable vertex.

    The only balanced pattern is an (E01, E1inf) pair through a level-1
    point whose level-inf end is a special point and whose line-bundle
    degrees cancel; every other two-edge pattern has tangent weights that
    are positive multiples of each other.
    """
    vx = graph.vertices[v]
    flags = graph.flags_at(v)
    if len(flags) != 2 or vx.legs or graph.is_stable_vertex(v):
        raise NotAValenceTwoVertex(f"vertex {v} is not a bare two-edge point")
    kinds = {graph.edges[f[0]].kind for f in flags}
    if kinds != {EdgeKind.E01, EdgeKind.E1INF} or vx.level is not Level.ONE:
        return False
    e01 = next(f for f in flags if graph.edges[f[0]].kind is EdgeKind.E01)
    e1i = next(f for f in flags if graph.edges[f[0]].kind is EdgeKind.E1INF)
    inf_vertex = graph.other_end(e1i)
    if graph.vertex_class(inf_vertex) == "0,1":
        return False  # free end: not a special point
    return graph.edges[e01[0]].dL + graph.edges[e1i[0]].dL == 0


def balanced_vertices(graph: DecoratedGraph, ws: WeightSystem) -> List[int]:
    out = []
    for v in range(len(graph.vertices)):
        vx = graph.vertices[v]
        if graph.is_stable_vertex(v) or vx.legs or len(graph.flags_at(v)) != 2:
            continue
        if is_balanced(graph, v, ws):
            out.append(v)
    return out


def flatten(graph: DecoratedGraph, ws: WeightSystem) -> DecoratedGraph:
    """Remove every balanced node, joining its two edges into one 0-inf edge.

    The replacement edge keeps d0 from the 01 side and dinf from the 1-inf
    side; monodromy needs no transport since flags derive it from degrees.
    Idempotent: flattening never creates new balanced nodes.
    """
    while True:
        balanced = balanced_vertices(graph, ws)
        if not balanced:
            return graph
        v = balanced[0]
        flags = graph.flags_at(v)
        f01 = next(f for f in flags if graph.edges[f[0]].kind is EdgeKind.E01)
        f1i = next(f for f in flags if graph.edges[f[0]].kind is EdgeKind.E1INF)
        v0 = graph.other_end(f01)
        vinf = graph.other_end(f1i)
        new_edge = Edge.make(
            (v0, vinf),
            EdgeKind.E0INF,
            d0=graph.edges[f01[0]].d0,
            dinf=graph.edges[f1i[0]].dinf,
        )
        keep = [i for i in range(len(graph.vertices)) if i != v]
        remap = {old: new for new, old in enumerate(keep)}
        vertices = tuple(graph.vertices[i] for i in keep)
        edges = []
        for i, e in enumerate(graph.edges):
            if i in (f01[0], f1i[0]):
                continue
            edges.append(replace(e, ends=(remap[e.ends[0]], remap[e.ends[1]])))
        edges.append(replace(new_edge, ends=(remap[v0], remap[vinf])))
        graph = DecoratedGraph(vertices, tuple(edges))


# ---------------------------------------------------------------------------
# Classification


class GraphClass(enum.Enum):
    REGULAR = "regular"
    IRREGULAR = "irregular"
    PURE_LOOP = "pure-loop"


def is_pure_loop(graph: DecoratedGraph) -> bool:
    return not graph.stable_vertices() and all(
        len(graph.flags_at(v)) == 2 for v in range(len(graph.vertices))
    )


def _infinity_vertex_regular(graph: DecoratedGraph, v: int, ws: WeightSystem) -> bool:
    vx = graph.vertices[v]
    allowed = {1}
    if is_narrow_exponent(ws, 2):
        allowed.add(2)
    if graph.is_stable_vertex(v):
        for leg in vx.legs:
            if not leg.marking.is_stacky or leg.marking.m not in allowed:
                return False
        for flag in graph.flags_at(v):
            if graph.edges[flag[0]].kind is EdgeKind.EINFINF:
                continue  # inside the web factor
            if flag_monodromy(graph, flag, ws).b not in allowed:
                return False
        return True
    touches_e1inf = any(graph.edges[f[0]].kind is EdgeKind.E1INF for f in graph.flags_at(v))
    if not touches_e1inf:
        return True
    # an unstable end of a 1-inf edge must be a stacky marking
    if graph.vertex_class(v) != "1,1":
        return False
    leg = vx.legs[0]
    return leg.marking.is_stacky


def classify(graph: DecoratedGraph, ws: WeightSystem) -> GraphClass:
    """Regular / Irregular / PureLoop for a flat graph."""
    if balanced_vertices(graph, ws):
        raise NotFlat("classification requires a flattened graph")
    if is_pure_loop(graph):
        return GraphClass.PURE_LOOP
    if any(e.kind is EdgeKind.E0INF for e in graph.edges):
        return GraphClass.IRREGULAR
    for v in range(len(graph.vertices)):
        if graph.vertices[v].level is Level.INF and not _infinity_vertex_regular(graph, v, ws):
            return GraphClass.IRREGULAR
    return GraphClass.REGULAR


def degeneracy_supported(graph: DecoratedGraph, ws: WeightSystem) -> bool:
    """False when some flag is tagged degeneracy-empty (fixed locus misses
    the degeneracy locus, so the graph cannot contribute)."""
    for flag in graph.flags():
        if graph.edges[flag[0]].kind in (EdgeKind.E11, EdgeKind.EINFINF):
            continue
        if flag_monodromy(graph, flag, ws).degeneracy_empty:
            return False
    return True


# ---------------------------------------------------------------------------
# Webs


def web_components(graph: DecoratedGraph) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Nondegenerate level-inf pieces: (vertex indices, internal edge indices).

    Obtained by deleting everything outside level infinity and keeping the
    connected pieces that contain a stable vertex or an internal edge.
    """
    inf_vertices = [v for v in range(len(graph.vertices)) if graph.vertices[v].level is Level.INF]
    parent = {v: v for v in inf_vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    web_edges = [i for i, e in enumerate(graph.edges) if e.kind is EdgeKind.EINFINF]
    for i in web_edges:
        a, b = (find(x) for x in graph.edges[i].ends)
        if a != b:
            parent[a] = b
    groups: dict = {}
    for v in inf_vertices:
        groups.setdefault(find(v), []).append(v)
    out = []
    for members in groups.values():
        edges = [i for i in web_edges if graph.edges[i].ends[0] in members]
        if edges or any(graph.is_stable_vertex(v) for v in members):
            out.append((tuple(sorted(members)), tuple(sorted(edges))))
    out.sort()
    return out
