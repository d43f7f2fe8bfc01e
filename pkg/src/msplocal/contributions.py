"""Per-graph localization factors, exactly, as multivariate rational functions.

Every moving-part factor of the inverse virtual-normal-bundle Euler class is
assembled as an explicit product over exact rationals: edge
factors for the three evaluable edge kinds, node factors, tangent weights,
and the level-1 Hodge-bundle blocks.  Pushforward classes on the level-0 and
level-infinity moduli are never expanded; they ride along as opaque
correlator tokens, one per stable level-0 vertex and one per web.

Bookkeeping conventions with more than one defensible reading are
centralized in `Policies` and injectable:

* delta flags: by default the rho flags mirror the plain flags, keying
  every one to bare one-edge endpoints; `delta_mode="rho-marking"` instead
  keys the rho flags to one-leg endpoints carrying a (1,rho) marking.
  Primed flags always refer to the level-1 end of the edge.
* the upper index range of the 01-edge numerator has two consistent
  bookkeeping variants; `e01_range` selects "euler" (default, indexed like
  the Euler-class product) or "cohomology" (indexed like the direct-image
  summands).
* k_e is the least positive integer clearing the edge degree's denominator.
* |G_e| defaults to k*d / gcd(k*d, k) per positive degree block.

For mixed-hour edges between two level-1 vertices the product formula
fixes an orientation.  We orient canonically: the alpha role goes to the
endpoint with the larger delta sum (the more stable end); on ties the
formula is orientation-symmetric, so the choice is immaterial.  This makes
the result independent of storage order and of hour relabeling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .algebra import (
    RatFunc,
    Variable,
    hodge_euler,
    homogeneous_degree,
    standard_grading,
)
from .canonical import automorphism_order, canonical_digest
from .errors import (
    BroadInfinityNode,
    IrregularGraph,
    NotFlat,
    UnsupportedEdgeType,
    WrongEdgeType,
)
from .graphs import (
    DecoratedGraph,
    Edge,
    EdgeKind,
    Flag,
    GraphClass,
    Leg,
    Level,
    Vertex,
    balanced_vertices,
    classify,
    degeneracy_supported,
    flag_monodromy,
    validate,
    web_components,
)
from .model import DiscreteData, Marking, WeightSystem, is_narrow_exponent


def _t(alpha: int) -> RatFunc:
    return RatFunc.var(Variable.equiv(alpha))


@dataclass(frozen=True)
class Policies:
    delta_mode: str = "mirrored"  # "mirrored" | "rho-marking"
    e01_range: str = "euler"  # "euler" | "cohomology"
    k_e: Callable[[Fraction], int] = None
    edge_group: Callable[[WeightSystem, DecoratedGraph, int], int] = None

    def __post_init__(self):
        if self.delta_mode not in ("mirrored", "rho-marking"):
            raise ValueError(f"unknown delta_mode {self.delta_mode!r}")
        if self.e01_range not in ("euler", "cohomology"):
            raise ValueError(f"unknown e01_range {self.e01_range!r}")
        if self.k_e is None:
            object.__setattr__(self, "k_e", default_k_e)
        if self.edge_group is None:
            object.__setattr__(self, "edge_group", default_edge_group_order)


def default_k_e(dL: Fraction) -> int:
    """Least positive integer q with q*dL an integer (stacky point order)."""
    return dL.denominator


def _group_block(ws: WeightSystem, degree: Fraction) -> int:
    numer = abs(int(degree * ws.k))
    if numer == 0:
        return 1
    return numer // math.gcd(numer, ws.k)


def default_edge_group_order(ws: WeightSystem, graph: DecoratedGraph, e: int) -> int:
    """|G_e| under the default convention, one block per positive degree.

    No closed form is forced by the geometry alone; the convention here
    gives the deck group of the degree-d cyclic cover for integer-degree
    edges and 1 for the minimal fractional covers.  Injectable via Policies.
    """
    edge = graph.edges[e]
    if edge.kind is EdgeKind.EINFINF:
        raise UnsupportedEdgeType("web-internal edges live inside the web factor")
    if edge.kind is EdgeKind.E0INF:
        return max(1, _group_block(ws, edge.d0)) * max(1, _group_block(ws, edge.dinf))
    return max(1, _group_block(ws, abs(edge.dL)))


DEFAULT_POLICIES = Policies()


def edge_group_order(
    graph: DecoratedGraph, e: int, ws: WeightSystem, policies: Policies = DEFAULT_POLICIES
) -> int:
    return policies.edge_group(ws, graph, e)


# ---------------------------------------------------------------------------
# delta flags


def _delta(graph: DecoratedGraph, v: int, policies: Policies) -> int:
    return -1 if graph.vertex_class(v) == "0,1" else 0


def _delta_rho(graph: DecoratedGraph, v: int, policies: Policies) -> int:
    if policies.delta_mode == "mirrored":
        return -1 if graph.vertex_class(v) == "0,1" else 0
    if graph.vertex_class(v) == "1,1":
        leg = graph.vertices[v].legs[0]
        if not leg.marking.is_stacky:
            return -1
    return 0


# ---------------------------------------------------------------------------
# shared evaluation classes for hyperplane variables


def hyperplane_rep(graph: DecoratedGraph, e: int) -> int:
    """Representative edge index of e's evaluation class.

    Two 01-type or 0inf-type edges meeting at an unstable two-edge level-0
    vertex evaluate to the same point, so they share one hyperplane class.
    """
    pool = [
        i
        for i, edge in enumerate(graph.edges)
        if edge.kind in (EdgeKind.E01, EdgeKind.E0INF)
    ]
    parent = {i: i for i in pool}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in range(len(graph.vertices)):
        if graph.vertices[v].level is Level.ZERO and graph.vertex_class(v) == "0,2":
            flags = graph.flags_at(v)
            a, b = (find(f[0]) for f in flags)
            if a != b:
                parent[max(a, b)] = min(a, b)
    if e not in parent:
        raise WrongEdgeType(f"edge {e} carries no hyperplane class")
    return min(i for i in pool if find(i) == find(e))


def _h(graph: DecoratedGraph, e: int) -> RatFunc:
    return RatFunc.var(Variable.hyperplane(hyperplane_rep(graph, e)))


def _level1_hour(graph: DecoratedGraph, e: int) -> int:
    end = graph.end_at_level(e, Level.ONE)
    return graph.vertices[graph.edges[e].ends[end]].hour


# ---------------------------------------------------------------------------
# tangent weights


def tangent_weight(
    graph: DecoratedGraph,
    flag: Flag,
    ws: WeightSystem,
    policies: Policies = DEFAULT_POLICIES,
) -> RatFunc:
    """Torus weight of the edge-branch tangent line at the flag's node."""
    e, end = flag
    edge = graph.edges[e]
    v = edge.ends[end]
    level = graph.vertices[v].level
    if edge.kind is EdgeKind.E01:
        alpha = _level1_hour(graph, e)
        d = edge.dL
        w = (_h(graph, e) + _t(alpha)) / RatFunc.const(d)
        return w if level is Level.ZERO else -w
    if edge.kind is EdgeKind.E1INF:
        alpha = _level1_hour(graph, e)
        d = edge.dL
        inf_end = graph.end_at_level(e, Level.INF)
        inf_vertex = edge.ends[inf_end]
        if graph.vertex_class(inf_vertex) == "0,1":
            w = RatFunc.const(Fraction(ws.k, ws.k * d + 1)) * _t(alpha)
            return w if level is Level.INF else -w
        if level is Level.INF:
            ke = policies.k_e(d)
            return _t(alpha) / RatFunc.const(ke * d)
        return -_t(alpha) / RatFunc.const(d)
    if edge.kind is EdgeKind.E11:
        beta = graph.vertices[v].hour
        alpha = graph.vertices[edge.ends[1 - end]].hour
        return (_t(alpha) - _t(beta)) / RatFunc.const(edge.dL)
    raise UnsupportedEdgeType(f"no tangent weight for edge kind {edge.kind.value}")


# ---------------------------------------------------------------------------
# node factors


def node_contribution(
    graph: DecoratedGraph,
    flag: Flag,
    ws: WeightSystem,
    dd: DiscreteData,
) -> RatFunc:
    """Euler class of the node's field restriction, by the level of the
    vertex; valid at stable-vertex flags and two-edge unstable points."""
    e, end = flag
    edge = graph.edges[e]
    v = edge.ends[end]
    vx = graph.vertices[v]
    if edge.kind is EdgeKind.EINFINF:
        raise WrongEdgeType("web-internal flags are inside the web factor")
    if not (graph.is_stable_vertex(v) or graph.vertex_class(v) == "0,2"):
        raise WrongEdgeType("node factor needs a stable vertex or a two-edge point")
    n_tori = dd.n_tori
    if vx.level is Level.ZERO:
        h = _h(graph, e)
        out = RatFunc.one()
        for alpha in range(1, n_tori + 1):
            out = out * (h + _t(alpha))
        return out
    if vx.level is Level.ONE:
        alpha = vx.hour
        coeff = Fraction(-ws.k)
        for a in ws.a:
            coeff *= a
        out = RatFunc.const(coeff) * _t(alpha) ** 6
        for beta in range(1, n_tori + 1):
            if beta != alpha:
                out = out * (_t(alpha) - _t(beta))
        return out
    mono = flag_monodromy(graph, flag, ws)
    if mono.b == ws.k or not is_narrow_exponent(ws, mono.b):
        raise BroadInfinityNode(f"flag {flag} carries non-narrow monodromy b={mono.b}")
    alpha = vx.hour
    out = RatFunc.one()
    for beta in range(1, n_tori + 1):
        if beta != alpha:
            out = out * (_t(beta) - _t(alpha))
    return out


def flag_factor(
    graph: DecoratedGraph,
    flag: Flag,
    ws: WeightSystem,
    dd: DiscreteData,
    policies: Policies = DEFAULT_POLICIES,
) -> RatFunc:
    """node factor / (tangent weight - psi); psi stays a formal variable."""
    w = tangent_weight(graph, flag, ws, policies)
    psi = RatFunc.var(Variable.psi(*flag))
    return node_contribution(graph, flag, ws, dd) / (w - psi)


# ---------------------------------------------------------------------------
# edge factors


def _prod(factors) -> RatFunc:
    out = RatFunc.one()
    for f in factors:
        out = out * f
    return out


def _edge_roles(graph: DecoratedGraph, e: int) -> Tuple[int, int]:
    """(v, v1) with v1 the level-1 end, for 01 and 1inf edges."""
    end1 = graph.end_at_level(e, Level.ONE)
    edge = graph.edges[e]
    return edge.ends[1 - end1], edge.ends[end1]


def edge_contribution(
    graph: DecoratedGraph,
    e: int,
    ws: WeightSystem,
    dd: DiscreteData,
    policies: Policies = DEFAULT_POLICIES,
) -> RatFunc:
    """Moving-part factor of one edge, expanded term by term.

    Empty products are 1 (in particular every cross-hour block when N = 1).
    """
    edge = graph.edges[e]
    k = ws.k
    n_tori = dd.n_tori
    if edge.kind is EdgeKind.E01:
        return _e01_contribution(graph, e, ws, n_tori, policies)
    if edge.kind is EdgeKind.E1INF:
        return _e1inf_contribution(graph, e, ws, n_tori, policies)
    if edge.kind is EdgeKind.E11:
        return _e11_contribution(graph, e, ws, n_tori, policies)
    raise UnsupportedEdgeType(
        f"edge kind {edge.kind.value} has no direct factor (0inf edges cannot "
        "occur in regular graphs; web-internal edges live inside the web factor)"
    )


def _e01_contribution(graph, e, ws, n_tori, policies) -> RatFunc:
    edge = graph.edges[e]
    k = ws.k
    if edge.dL.denominator != 1 or edge.dL <= 0:
        raise UnsupportedEdgeType(
            "01-edge factors need a positive integer degree (fractional degrees "
            "miss the degeneracy locus)"
        )
    d = int(edge.dL)
    v, v1 = _edge_roles(graph, e)
    alpha = graph.vertices[v1].hour
    h = _h(graph, e)
    t_a = _t(alpha)
    dd1 = _delta(graph, v1, policies)
    dd1_rho = _delta_rho(graph, v1, policies)
    d0 = _delta(graph, v, policies)
    d0_rho = _delta_rho(graph, v, policies)
    step = (h + t_a) / RatFunc.const(d)
    if policies.e01_range == "euler":
        top = k * d - 1 - dd1 - dd1_rho
        base = RatFunc.const(-k) * h + RatFunc.const(Fraction(dd1 + dd1_rho, d)) * h
        num = _prod(base + RatFunc.const(j) * step for j in range(1, top + 1))
    else:
        lo = 1 + d0 + d0_rho
        hi = k * d - 1 - d0 - dd1_rho
        num = _prod(
            (RatFunc.const(-k * d + dd1 + dd1_rho + j) * h + RatFunc.const(j) * t_a)
            / RatFunc.const(d)
            for j in range(lo, hi + 1)
        )
    den = RatFunc.one()
    for a_i in ws.a:
        den = den * _prod(
            RatFunc.const(a_i) * h - RatFunc.const(j) * step for j in range(1, a_i * d + 1)
        )
    den = den * _prod(RatFunc.const(j) * step for j in range(1, d + 1))
    for beta in range(1, n_tori + 1):
        if beta == alpha:
            continue
        den = den * _prod(
            RatFunc.const(j) * step + _t(beta) - t_a for j in range(1, d + 1)
        )
    return num / den


def _e1inf_contribution(graph, e, ws, n_tori, policies) -> RatFunc:
    edge = graph.edges[e]
    k = ws.k
    d = edge.dL  # negative rational in (1/k)Z
    v, v1 = _edge_roles(graph, e)
    alpha = graph.vertices[v1].hour
    t_a = _t(alpha)
    kd = int(k * d)
    delta = _delta(graph, v, policies)
    dd1 = _delta(graph, v1, policies)
    dd1_rho = _delta_rho(graph, v1, policies)
    denom_scale = kd - delta
    if denom_scale == 0:
        raise UnsupportedEdgeType("degenerate 1inf edge: k*d = -1 with a bare end")
    num = RatFunc.one()
    for a_i in ws.a:
        top = math.ceil(-a_i * d) - 1
        for j in range(1, top + 1):
            num = num * (
                RatFunc.const(-a_i) + RatFunc.const(Fraction(k * j, denom_scale))
            ) * t_a
    den = _prod(
        RatFunc.const(Fraction(-k * j, denom_scale)) * t_a
        for j in range(1, -kd + dd1 + dd1_rho + 1)
    )
    den = den * _prod(
        RatFunc.const(Fraction(k * j, denom_scale)) * t_a
        for j in range(1, math.floor(-d) + 1)
    )
    for beta in range(1, n_tori + 1):
        if beta != alpha:
            den = den * (_t(beta) - t_a)
    return num / den


def _e11_roles(graph: DecoratedGraph, e: int, policies: Policies) -> Tuple[int, int]:
    """(v_alpha, v_beta) under the canonical orientation (see module doc)."""
    edge = graph.edges[e]
    u0, u1 = edge.ends
    s0 = _delta(graph, u0, policies) + _delta_rho(graph, u0, policies)
    s1 = _delta(graph, u1, policies) + _delta_rho(graph, u1, policies)
    if s0 > s1:
        return u0, u1
    if s1 > s0:
        return u1, u0
    return u0, u1  # tie: the formula is orientation-symmetric here


def _e11_contribution(graph, e, ws, n_tori, policies) -> RatFunc:
    edge = graph.edges[e]
    k = ws.k
    d = int(edge.dL)
    v1, v = _e11_roles(graph, e, policies)  # v1 plays alpha, v plays beta
    alpha = graph.vertices[v1].hour
    beta = graph.vertices[v].hour
    t_a, t_b = _t(alpha), _t(beta)
    s_beta = _delta(graph, v, policies) + _delta_rho(graph, v, policies)
    s_alpha = _delta(graph, v1, policies) + _delta_rho(graph, v1, policies)
    pref = RatFunc.const(
        Fraction((-1) ** d * d ** (2 * d), math.factorial(d) ** 2)
    ) / (t_b - t_a) ** (2 * d)
    num = RatFunc.one()
    if s_alpha == s_beta != 0:
        # Both ends carry equal nonzero flags: the oriented product reads
        # differently from its two orientations here, so no role choice can
        # be presentation- and hour-independent.  Use its symmetric
        # reindexing (identical to the oriented form whenever the flags
        # vanish): terms k t_beta + ((s + j)/d)(t_alpha - t_beta).
        for j in range(1, k * d - 1 - s_alpha - s_beta + 1):
            num = num * (
                RatFunc.const(k) * t_b
                + RatFunc.const(Fraction(s_beta + j, d)) * (t_a - t_b)
            )
    else:
        for j in range(1 + s_alpha, k * d - 1 - s_beta + 1):
            num = num * (
                RatFunc.const(k) * t_a
                - RatFunc.const(Fraction(s_beta, d)) * t_a
                - RatFunc.const(Fraction(j, d)) * (t_a - t_b)
            )
    den = RatFunc.one()
    for a_i in ws.a:
        for a in range(0, a_i * d + 1):
            b = a_i * d - a
            den = den * (
                RatFunc.const(Fraction(-a, d)) * t_a + RatFunc.const(Fraction(-b, d)) * t_b
            )
    for gamma in range(1, n_tori + 1):
        if gamma in (alpha, beta):
            continue
        for a in range(0, d + 1):
            b = d - a
            den = den * (
                _t(gamma)
                - RatFunc.const(Fraction(a, d)) * t_a
                - RatFunc.const(Fraction(b, d)) * t_b
            )
    return pref * num / den


# ---------------------------------------------------------------------------
# vertex factors


def _hodge_block_level1(
    graph: DecoratedGraph, v: int, ws: WeightSystem, n_tori: int
) -> RatFunc:
    vx = graph.vertices[v]
    g, alpha = vx.genus, vx.hour
    k = ws.k
    t_a = _t(alpha)
    n_edges = len(graph.flags_at(v))
    out = RatFunc.one()
    for a_i in ws.a:
        c = RatFunc.const(-a_i) * t_a
        out = out * RatFunc.from_poly(hodge_euler(g, c, dual=True, vertex=v)) / c
    ktal = RatFunc.const(k) * t_a
    out = out * ktal / (
        RatFunc.from_poly(hodge_euler(g, ktal, dual=False, vertex=v)) * ktal ** n_edges
    )
    for beta in range(1, n_tori + 1):
        if beta == alpha:
            continue
        c = _t(beta) - t_a
        out = out * RatFunc.from_poly(hodge_euler(g, c, dual=True, vertex=v)) / c
    return out


def _hodge_block_cross_hours(
    graph: DecoratedGraph, v: int, n_tori: int
) -> RatFunc:
    vx = graph.vertices[v]
    out = RatFunc.one()
    for beta in range(1, n_tori + 1):
        if beta == vx.hour:
            continue
        c = _t(beta) - _t(vx.hour)
        out = out * RatFunc.from_poly(hodge_euler(vx.genus, c, dual=True, vertex=v)) / c
    return out


def vertex_descriptor(graph: DecoratedGraph, v: int, ws: WeightSystem) -> str:
    vx = graph.vertices[v]
    n = graph.valence(v)
    if vx.level is Level.ZERO:
        return f"gw(g={vx.genus};n={n};d0={vx.d0})"
    if vx.level is Level.ONE:
        return f"hodge(g={vx.genus};n={n})"
    monos = sorted(
        [flag_monodromy(graph, f, ws).b for f in graph.flags_at(v)]
        + [leg.marking.m for leg in vx.legs if leg.marking.is_stacky]
    )
    return f"fjrw(g={vx.genus};n={n};hour={vx.hour};mono={tuple(monos)})"


def vertex_contribution(
    graph: DecoratedGraph,
    v: int,
    ws: WeightSystem,
    dd: DiscreteData,
    policies: Policies = DEFAULT_POLICIES,
) -> RatFunc:
    """The vertex block of the inverse Euler class, tokens included.

    Stable level-0 and level-infinity vertices contribute their pushforward
    Euler classes as opaque tokens (times the explicit cross-hour Hodge
    block at level infinity); stable level-1 vertices are fully explicit.
    Unstable vertices follow the tangent-weight table.
    """
    vx = graph.vertices[v]
    cls = graph.vertex_class(v)
    if cls == "S":
        if vx.level is Level.ZERO:
            return RatFunc.var(Variable.token("obs:" + vertex_descriptor(graph, v, ws)))
        if vx.level is Level.ONE:
            return _hodge_block_level1(graph, v, ws, dd.n_tori)
        token = RatFunc.var(Variable.token("obs:" + vertex_descriptor(graph, v, ws)))
        return token * _hodge_block_cross_hours(graph, v, dd.n_tori)
    if cls == "0,1":
        (flag,) = graph.flags_at(v)
        return tangent_weight(graph, flag, ws, policies)
    if cls == "0,2":
        f1, f2 = graph.flags_at(v)
        w1 = tangent_weight(graph, f1, ws, policies)
        w2 = tangent_weight(graph, f2, ws, policies)
        return node_contribution(graph, f1, ws, dd) / (w1 + w2)
    return RatFunc.one()  # one-leg endpoints: a smooth marked point adds nothing


# ---------------------------------------------------------------------------
# whole-graph assembly


@dataclass(frozen=True)
class FixedFactor:
    sign: int
    token: str


@dataclass(frozen=True)
class FactorEntry:
    label: str
    value: RatFunc
    degree: Optional[int]
    in_product: bool = True  # informational rows (tangent weights) are not


@dataclass(frozen=True)
class PackageFlag:
    flag: Flag
    weight: RatFunc
    psi: Variable
    owner_genus: int
    owner_valence: int


@dataclass(frozen=True)
class ModuliPackage:
    """One stable-moduli block: token, its explicit Hodge part, its psi flags."""

    kind: str  # "gw" | "hodge" | "web"
    descriptor: str
    vertices: Tuple[int, ...]
    token: Optional[Variable]
    hodge_factor: RatFunc
    flags: Tuple[PackageFlag, ...]

    def symbolic_factor(self) -> RatFunc:
        out = self.hodge_factor
        if self.token is not None:
            out = out * RatFunc.var(self.token)
        for pf in self.flags:
            out = out / (pf.weight - RatFunc.var(pf.psi))
        return out


class GraphContribution:
    """One graph's localization term, kept in factored form.

    The expanded products are computed lazily: factor lists stay small even
    when the fully expanded rational function would be enormous, and the
    recorded degree comes from degree additivity over the factors.
    """

    def __init__(self, graph, prefactor, fixed_part, packages, factors, canonical):
        self.graph: DecoratedGraph = graph
        self.prefactor: Fraction = prefactor
        self.fixed_part: Tuple[FixedFactor, ...] = fixed_part
        self.packages: Tuple[ModuliPackage, ...] = packages
        self.factors: Tuple[FactorEntry, ...] = factors
        self.canonical: str = canonical
        self._explicit: Optional[RatFunc] = None
        self._inverse: Optional[RatFunc] = None

    @property
    def explicit_rest(self) -> RatFunc:
        if self._explicit is None:
            out = RatFunc.one()
            for entry in self.factors:
                if entry.in_product:
                    out = out * entry.value
            self._explicit = out
        return self._explicit

    @property
    def inverse_euler(self) -> RatFunc:
        if self._inverse is None:
            out = self.explicit_rest
            for pkg in self.packages:
                out = out * pkg.symbolic_factor()
            self._inverse = out
        return self._inverse

    @property
    def degree(self) -> Optional[int]:
        """Degree of the inverse Euler class by additivity over factors."""
        total = 0
        for entry in self.factors:
            if not entry.in_product:
                continue
            if entry.degree is None:
                return None
            total += entry.degree
        for pkg in self.packages:
            part = homogeneous_degree(pkg.hodge_factor, standard_grading)
            if part is None:
                return None
            total += part - len(pkg.flags)
        return total


def web_descriptor(graph: DecoratedGraph, ws: WeightSystem, members, internal) -> str:
    """Deterministic token name for one web: digest of the web subgraph with
    its boundary edges replaced by stacky legs."""
    remap = {v: i for i, v in enumerate(members)}
    boundary: List[Tuple[int, int]] = []  # (member vertex, monodromy b)
    for i, e in enumerate(graph.edges):
        if i in internal:
            continue
        for end in (0, 1):
            v = e.ends[end]
            if v in remap and e.kind in (EdgeKind.E1INF, EdgeKind.E0INF):
                boundary.append((v, flag_monodromy(graph, (i, end), ws).b))
    boundary.sort()
    vertices = []
    for v in members:
        vx = graph.vertices[v]
        legs = list(vx.legs)
        for j, (bv, b) in enumerate(boundary):
            if bv == v:
                legs.append(Leg(index=1000 + j, marking=Marking("narrow", b)))
        vertices.append(
            Vertex(vx.level, vx.hour, vx.genus, vx.d0, vx.dinf, tuple(legs))
        )
    edges = tuple(
        Edge(
            (remap[graph.edges[i].ends[0]], remap[graph.edges[i].ends[1]]),
            graph.edges[i].kind,
            graph.edges[i].d0,
            graph.edges[i].dinf,
        )
        for i in internal
    )
    digest = canonical_digest(DecoratedGraph(tuple(vertices), edges))
    return f"fjrw(web={digest[:16]})"


def assemble_graph(
    graph: DecoratedGraph,
    ws: WeightSystem,
    dd: DiscreteData,
    policies: Policies = DEFAULT_POLICIES,
) -> GraphContribution:
    """Full localization term of one flat regular graph.

    prefactor 1/(|Aut| * prod |G_e|); inverse Euler class as the product of
    flag, vertex, and edge blocks with one opaque web factor per web; fixed
    part as a signed token list.
    """
    report = validate(graph, ws, dd)
    if not report.ok:
        raise IrregularGraph(f"graph fails validation: {sorted(report.codes())}")
    if balanced_vertices(graph, ws):
        raise NotFlat("assembly requires a flattened graph")
    cls = classify(graph, ws)
    if cls is not GraphClass.REGULAR:
        raise IrregularGraph(f"assembly requires a Regular graph, got {cls.value}")
    if not degeneracy_supported(graph, ws):
        raise IrregularGraph("graph misses the degeneracy locus (fractional 01 degree)")

    factors: List[FactorEntry] = []

    group = 1
    for i, e in enumerate(graph.edges):
        if e.kind is not EdgeKind.EINFINF:
            group *= edge_group_order(graph, i, ws, policies)
    aut = automorphism_order(graph)
    prefactor = Fraction(1, aut * group)

    fixed: List[FixedFactor] = []
    packages: List[ModuliPackage] = []
    webs = web_components(graph)
    web_of_vertex: Dict[int, int] = {}
    for wi, (members, internal) in enumerate(webs):
        for v in members:
            web_of_vertex[v] = wi
    web_flags: Dict[int, List[PackageFlag]] = {wi: [] for wi in range(len(webs))}
    vertex_flags: Dict[int, List[PackageFlag]] = {}

    # flag blocks over stable-vertex flags of evaluable edges
    for flag in graph.flags():
        e, end = flag
        if graph.edges[e].kind is EdgeKind.EINFINF:
            continue
        v = graph.flag_vertex(flag)
        if not graph.is_stable_vertex(v):
            continue
        num = node_contribution(graph, flag, ws, dd)
        w = tangent_weight(graph, flag, ws, policies)
        factors.append(
            FactorEntry(f"node({e},{end})", num, homogeneous_degree(num, standard_grading))
        )
        pf = PackageFlag(
            flag=flag,
            weight=w,
            psi=Variable.psi(e, end),
            owner_genus=graph.vertices[v].genus,
            owner_valence=graph.valence(v),
        )
        if graph.vertices[v].level is Level.INF:
            web_flags[web_of_vertex[v]].append(pf)
        else:
            vertex_flags.setdefault(v, []).append(pf)
        factors.append(
            FactorEntry(
                f"weight({e},{end})", w, homogeneous_degree(w, standard_grading), False
            )
        )

    # vertex blocks over everything outside level infinity
    for v in range(len(graph.vertices)):
        vx = graph.vertices[v]
        if vx.level is Level.INF:
            continue
        cls_v = graph.vertex_class(v)
        if cls_v == "S":
            flags = tuple(vertex_flags.get(v, []))
            if vx.level is Level.ZERO:
                desc = vertex_descriptor(graph, v, ws)
                token = Variable.token("obs:" + desc)
                packages.append(
                    ModuliPackage("gw", desc, (v,), token, RatFunc.one(), flags)
                )
                sign = 1 if (1 - vx.genus) % 2 == 0 else -1
                fixed.append(FixedFactor(sign, "class:" + desc))
            else:
                desc = vertex_descriptor(graph, v, ws)
                block = _hodge_block_level1(graph, v, ws, dd.n_tori)
                packages.append(ModuliPackage("hodge", desc, (v,), None, block, flags))
                fixed.append(FixedFactor(1, "class:" + desc))
                factors.append(
                    FactorEntry(
                        f"vertex({v})",
                        block,
                        homogeneous_degree(block, standard_grading),
                        False,  # lives inside the vertex package
                    )
                )
        else:
            value = vertex_contribution(graph, v, ws, dd, policies)
            factors.append(
                FactorEntry(
                    f"vertex({v})", value, homogeneous_degree(value, standard_grading)
                )
            )
            if vx.level is Level.ZERO:
                fixed.append(FixedFactor(-1, "class:Z"))

    # edge blocks
    for i, e in enumerate(graph.edges):
        if e.kind is EdgeKind.EINFINF:
            continue
        value = edge_contribution(graph, i, ws, dd, policies)
        factors.append(
            FactorEntry(f"edge({i})", value, homogeneous_degree(value, standard_grading))
        )

    # web blocks
    for wi, (members, internal) in enumerate(webs):
        desc = web_descriptor(graph, ws, members, internal)
        token = Variable.token("obs:" + desc)
        packages.append(
            ModuliPackage("web", desc, members, token, RatFunc.one(), tuple(web_flags[wi]))
        )
        fixed.append(FixedFactor(1, "class:" + desc))

    return GraphContribution(
        graph=graph,
        prefactor=prefactor,
        fixed_part=tuple(sorted(fixed, key=lambda f: (f.token, f.sign))),
        packages=tuple(packages),
        factors=tuple(factors),
        canonical=canonical_digest(graph),
    )
