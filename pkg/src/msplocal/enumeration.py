"""Enumeration of flat regular decorated graphs, one per isomorphism class.

The search composes graphs in stages: a sorted vertex-type vector (level and
hour), an edge multiset with degree decorations, a genus split of what the
cycle count leaves over, leg placements, and finally the degrees that the
decorations force (level-0 degree splits; level-infinity degrees are
determined by the vertex's special-point count).  Everything is filtered
through `validate`, flatness, and the Regular classification, then
deduplicated by canonical form and emitted in sorted canonical order.

Degree menus quantize in units of 1/k and only degeneracy-supported choices
are generated (01-edges carry integer degree).  Pure loops are collected on
a separate channel, never mixed into the regular list.

`brute_force_enumerate` is the test oracle: it generates every labeled
decorated graph within (small) caps from raw menus, filters with the same
public predicates, and deduplicates by pairwise brute-force isomorphism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .canonical import brute_force_isomorphic, canonical_form
from .errors import CapTooLarge
from .graphs import (
    DecoratedGraph,
    Edge,
    EdgeKind,
    GraphClass,
    Leg,
    Level,
    Vertex,
    balanced_vertices,
    classify,
    degeneracy_supported,
    validate,
)
from .model import DiscreteData, Marking, WeightSystem, is_narrow_exponent


@dataclass(frozen=True)
class EnumerationCaps:
    max_vertices: int = 6
    max_edges: int = 6
    max_edge_degree_numerator: int = 36
    max_vertex_genus: int = 4

    def check(self) -> None:
        if min(self.max_vertices, self.max_edges) < 0 or self.max_edge_degree_numerator < 1:
            raise ValueError("caps must be positive")


@dataclass(frozen=True)
class EnumerationResult:
    regular: Tuple[DecoratedGraph, ...]
    pure_loops: Tuple[DecoratedGraph, ...]
    truncation: Tuple[str, ...]

    @property
    def truncated(self) -> bool:
        return bool(self.truncation)


def natural_bounds(ws: WeightSystem, dd: DiscreteData) -> Dict[str, int]:
    """Conservative caps that guarantee a complete enumeration.

    Degree-zero edges do not exist, so each edge consumes either d0 budget
    (at least k/k = 1 in numerator units) or dinf budget net of the genus,
    leg, and flag offsets that stable level-infinity vertices can absorb.
    """
    k = ws.k
    n0 = int(dd.d0 * k)
    ninf = int(dd.dinf * k)
    legs = dd.n_legs
    g = dd.genus
    d0_edges = max(0, n0 // k)
    slack = max(0, ninf) + 2 * g + legs
    e1inf_stable = slack // max(1, k - 3) + (1 if slack % max(1, k - 3) else 0)
    m_nat = d0_edges + legs + e1inf_stable + g  # cycles need one extra edge each
    n_nat = max(1, 2 * m_nat)
    deg_nat = max(n0, max(0, ninf) + 2 * g + legs + e1inf_stable + 2 * d0_edges, k)
    return {
        "max_vertices": n_nat,
        "max_edges": m_nat,
        "max_edge_degree_numerator": deg_nat,
        "max_vertex_genus": g,
    }


def truncation_report(ws: WeightSystem, dd: DiscreteData, caps: EnumerationCaps) -> Tuple[str, ...]:
    bounds = natural_bounds(ws, dd)
    notes = []
    for name, needed in bounds.items():
        have = getattr(caps, name)
        if have < needed:
            notes.append(f"{name}={have} is below the completeness bound {needed}")
    return tuple(notes)


# ---------------------------------------------------------------------------
# vertex-type shards


def _type_menu(dd: DiscreteData) -> List[Tuple[Level, Optional[int]]]:
    menu: List[Tuple[Level, Optional[int]]] = [(Level.ZERO, None)]
    for hour in range(1, dd.n_tori + 1):
        menu.append((Level.ONE, hour))
    for hour in range(1, dd.n_tori + 1):
        menu.append((Level.INF, hour))
    return menu


def shards(ws: WeightSystem, dd: DiscreteData, caps: EnumerationCaps) -> List[tuple]:
    """Independent work units: (vertex count, sorted level/hour profile)."""
    menu = _type_menu(dd)
    out = []
    for n in range(1, caps.max_vertices + 1):
        for profile in itertools.combinations_with_replacement(range(len(menu)), n):
            out.append((n, tuple(menu[i] for i in profile)))
    return out


def _e1inf_numerators(ws: WeightSystem, dd: DiscreteData, caps: EnumerationCaps) -> List[int]:
    """Degree numerators a 1inf edge can carry in an emitted graph.

    The level-inf end of such an edge is, in a Regular graph, either a
    stable vertex (monodromy 1 or 2, narrow) or a one-leg stacky marking
    matching one of the discrete data's narrow insertions; in a pure loop
    it is a two-edge node, and conservation then bounds the degree by the
    dinf budget outright.  Any other degree only feeds irregular graphs.
    """
    k = ws.k
    ninf = int(dd.dinf * k)
    slack = max(0, ninf) + 2 * dd.genus + dd.n_legs + 3 * caps.max_edges
    cap = min(caps.max_edge_degree_numerator, max(slack, 1))
    allowed_b = {b for b in (1, 2) if is_narrow_exponent(ws, b)}
    allowed_b |= {mk.m for mk in dd.markings if mk.is_stacky}
    out = []
    for c in range(1, cap + 1):
        b = (-c) % k or k
        if b in allowed_b or c <= max(0, ninf):
            out.append(c)
    return out


def _edge_slots(
    profile, ws: WeightSystem, dd: DiscreteData, caps: EnumerationCaps
) -> List[Tuple[int, int, EdgeKind, Fraction, Fraction]]:
    """All decorated edge candidates for a vertex-type profile."""
    k = ws.k
    n0 = int(dd.d0 * k)
    cap = caps.max_edge_degree_numerator
    e1inf_menu = _e1inf_numerators(ws, dd, caps)
    slots = []
    for i in range(len(profile)):
        for j in range(i + 1, len(profile)):
            (la, ha), (lb, hb) = profile[i], profile[j]
            levels = frozenset((la, lb))
            if levels == frozenset((Level.ZERO, Level.ONE)):
                for numer in range(k, min(n0, cap) + 1, k):
                    slots.append((i, j, EdgeKind.E01, Fraction(numer, k), Fraction(0)))
            elif levels == frozenset((Level.ONE,)) and ha != hb:
                for numer in range(k, min(n0, cap) + 1, k):
                    slots.append((i, j, EdgeKind.E11, Fraction(numer, k), Fraction(0)))
            elif levels == frozenset((Level.ONE, Level.INF)) and ha == hb:
                for numer in e1inf_menu:
                    slots.append((i, j, EdgeKind.E1INF, Fraction(0), Fraction(numer, k)))
            elif levels == frozenset((Level.INF,)) and ha != hb:
                for numer in range(k, min(n0, cap) + 1, k):
                    slots.append(
                        (i, j, EdgeKind.EINFINF, Fraction(numer, k), Fraction(numer, k))
                    )
    return slots


def _connected(n: int, edges) -> bool:
    if n == 1:
        return True
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        a, b = find(e[0]), find(e[1])
        if a != b:
            parent[a] = b
    return len({find(v) for v in range(n)}) == 1


def _compositions(total: int, parts: int, cap: Optional[int] = None):
    if parts == 0:
        if total == 0:
            yield ()
        return
    hi = total if cap is None else min(total, cap)
    for first in range(hi + 1):
        for rest in _compositions(total - first, parts - 1, cap):
            yield (first,) + rest


def _edge_multisets(slots, max_edges: int, d0_budget: int, dinf_slack: int, k: int):
    """Multisets of edge slots within the degree budgets.

    The dinf prune is sound because each level-inf flag can lower a stable
    vertex's forced degree by at most 1/k: the running dinf cost minus the
    number of level-inf flags may never exceed the budget plus the genus
    and leg offsets (folded into dinf_slack by the caller).
    """

    def inf_flags(slot) -> int:
        if slot[2] is EdgeKind.E1INF:
            return 1
        if slot[2] is EdgeKind.EINFINF:
            return 2
        return 0

    def rec(start: int, budget: int, slack: int, room: int):
        yield ()
        if room == 0:
            return
        for idx in range(start, len(slots)):
            cost = int(slots[idx][3] * k)
            if cost > budget:
                continue
            dinf_cost = int(slots[idx][4] * k) - inf_flags(slots[idx])
            if dinf_cost > slack:
                continue
            for rest in rec(idx, budget - cost, slack - dinf_cost, room - 1):
                yield (idx,) + rest

    yield from rec(0, d0_budget, dinf_slack, max_edges)


def _leg_targets(marking: Marking, profile) -> List[int]:
    out = []
    for v, (level, _) in enumerate(profile):
        if marking.is_stacky and level is Level.INF:
            out.append(v)
        if not marking.is_stacky and level in (Level.ZERO, Level.ONE):
            out.append(v)
    return out


def run_shard(
    shard, ws: WeightSystem, dd: DiscreteData, caps: EnumerationCaps
) -> List[DecoratedGraph]:
    """All candidate graphs of one shard that are valid, flat, and either
    Regular or a pure loop (classification is re-checked by the caller)."""
    n, profile = shard
    k = ws.k
    n0 = int(dd.d0 * k)
    ninf = int(dd.dinf * k)
    if n0 < 0:
        return []
    slots = _edge_slots(profile, ws, dd, caps)
    zero_vertices = [v for v, (lv, _) in enumerate(profile) if lv is Level.ZERO]
    dinf_slack = max(0, ninf) + 2 * dd.genus + dd.n_legs
    out: List[DecoratedGraph] = []
    for combo in _edge_multisets(slots, caps.max_edges, n0, dinf_slack, k):
        edges = [slots[i] for i in combo]
        if not _connected(n, edges):
            continue
        b1 = len(edges) - n + 1
        genus_left = dd.genus - b1
        if genus_left < 0:
            continue
        edge_d0 = sum(int(s[3] * k) for s in edges)
        rem0 = n0 - edge_d0
        if rem0 < 0 or (rem0 > 0 and not zero_vertices):
            continue
        leg_choices = [_leg_targets(mk, profile) for mk in dd.markings]
        if any(not c for c in leg_choices):
            continue
        for genus_split in _compositions(genus_left, n, caps.max_vertex_genus):
            for leg_assign in itertools.product(*leg_choices):
                legs_at: Dict[int, List[Leg]] = {}
                for idx, v in enumerate(leg_assign):
                    legs_at.setdefault(v, []).append(Leg(idx, dd.markings[idx]))
                for d0_split in _compositions(rem0, len(zero_vertices)):
                    graph = _build(
                        profile, edges, genus_split, legs_at, zero_vertices, d0_split, ws
                    )
                    if graph is None:
                        continue
                    if graph.total_dinf() != dd.dinf:
                        continue
                    if not validate(graph, ws, dd).ok:
                        continue
                    if balanced_vertices(graph, ws):
                        continue
                    out.append(graph)
    return out


def _build(profile, edges, genus_split, legs_at, zero_vertices, d0_split, ws) -> Optional[DecoratedGraph]:
    k = ws.k
    n = len(profile)
    flag_count = [0] * n
    for e in edges:
        flag_count[e[0]] += 1
        flag_count[e[1]] += 1
    d0_of = dict(zip(zero_vertices, d0_split))
    vertices = []
    for v, (level, hour) in enumerate(profile):
        genus = genus_split[v]
        legs = tuple(sorted(legs_at.get(v, []), key=lambda l: l.index))
        d0 = Fraction(d0_of.get(v, 0), k) if level is Level.ZERO else Fraction(0)
        dinf = Fraction(0)
        if level is Level.INF:
            val = flag_count[v] + len(legs)
            if flag_count[v] == 0 or 2 * genus - 2 + val > 0:
                dinf = -Fraction(2 * genus - 2 + val, k)
        vertices.append(Vertex(level, hour, genus, d0, dinf, legs))
    edge_objs = tuple(Edge((e[0], e[1]), e[2], e[3], e[4]) for e in edges)
    return DecoratedGraph(tuple(vertices), edge_objs)


def enumerate_flat_regular(
    ws: WeightSystem,
    dd: DiscreteData,
    caps: EnumerationCaps = EnumerationCaps(),
    threads: int = 1,
) -> EnumerationResult:
    """Every flat Regular graph for the discrete data, up to isomorphism,
    in sorted canonical order; pure loops reported on their own channel.

    Shards (vertex count, level/hour profile) are independent; with
    threads > 1 they run on a pool, and the sorted-canonical-form merge
    keeps the output identical at any thread count.
    """
    caps.check()
    dd.check(ws)
    work = shards(ws, dd, caps)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(lambda s: run_shard(s, ws, dd, caps), work))
    else:
        batches = [run_shard(s, ws, dd, caps) for s in work]
    regular: Dict[bytes, DecoratedGraph] = {}
    loops: Dict[bytes, DecoratedGraph] = {}
    for batch in batches:
        for graph in batch:
            cls = classify(graph, ws)
            if cls is GraphClass.REGULAR and degeneracy_supported(graph, ws):
                regular.setdefault(canonical_form(graph), graph)
            elif cls is GraphClass.PURE_LOOP:
                loops.setdefault(canonical_form(graph), graph)
    return EnumerationResult(
        regular=tuple(regular[key] for key in sorted(regular)),
        pure_loops=tuple(loops[key] for key in sorted(loops)),
        truncation=truncation_report(ws, dd, caps),
    )


# ---------------------------------------------------------------------------
# brute-force oracle

_HARD_LIMITS = {"max_vertices": 5, "max_edges": 5, "max_edge_degree_numerator": 40}


def brute_force_enumerate(
    ws: WeightSystem, dd: DiscreteData, caps: EnumerationCaps
) -> List[DecoratedGraph]:
    """Exhaustive labeled generation from raw menus; the slow reference.

    Every decoration is drawn from a plain range and every filter is a
    public predicate, so this shares no search logic with the staged
    enumerator.  Deduplication is pairwise brute-force isomorphism.
    """
    for name, limit in _HARD_LIMITS.items():
        if getattr(caps, name) > limit:
            raise CapTooLarge(f"{name} exceeds the brute-force hard limit {limit}")
    k = ws.k
    n0 = int(dd.d0 * k)
    ninf = int(dd.dinf * k)
    cap = caps.max_edge_degree_numerator
    menu = _type_menu(dd)
    found: List[DecoratedGraph] = []
    for n in range(1, caps.max_vertices + 1):
        for types in itertools.product(menu, repeat=n):
            for graph in _brute_graphs(types, ws, dd, caps, n0, ninf, cap):
                if not validate(graph, ws, dd).ok:
                    continue
                if balanced_vertices(graph, ws):
                    continue
                if classify(graph, ws) is not GraphClass.REGULAR:
                    continue
                if not degeneracy_supported(graph, ws):
                    continue
                if any(brute_force_isomorphic(graph, seen) for seen in found):
                    continue
                found.append(graph)
    found.sort(key=canonical_form)
    return found


def _brute_graphs(types, ws, dd, caps, n0, ninf, cap):
    k = ws.k
    n = len(types)
    pair_menus = []
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in pairs:
        options = []
        levels = frozenset((types[i][0], types[j][0]))
        if levels == frozenset((Level.ZERO, Level.ONE)):
            options = [
                (EdgeKind.E01, Fraction(c, k), Fraction(0)) for c in range(1, min(n0, cap) + 1)
            ]
        elif levels == frozenset((Level.ONE,)):
            options = [
                (EdgeKind.E11, Fraction(c, k), Fraction(0)) for c in range(1, min(n0, cap) + 1)
            ]
        elif levels == frozenset((Level.ONE, Level.INF)):
            options = [
                (EdgeKind.E1INF, Fraction(0), Fraction(c, k)) for c in range(1, cap + 1)
            ]
        elif levels == frozenset((Level.INF,)):
            options = [
                (EdgeKind.EINFINF, Fraction(c, k), Fraction(c, k))
                for c in range(1, min(n0, cap) + 1)
            ]
        pair_menus.append(options)
    slot_list = [
        (i, j, kind, d0, dinf)
        for (i, j), options in zip(pairs, pair_menus)
        for kind, d0, dinf in options
    ]
    genus_menu = range(0, min(dd.genus, caps.max_vertex_genus) + 1)
    d0_menu = {
        v: (range(0, n0 + 1) if types[v][0] is Level.ZERO else (0,)) for v in range(n)
    }
    dinf_floor = -(2 * dd.genus + 2 * caps.max_edges + dd.n_legs + 2)
    dinf_menu = {
        v: (range(dinf_floor, max(0, ninf) + 1) if types[v][0] is Level.INF else (0,))
        for v in range(n)
    }
    leg_menu = [range(n) for _ in dd.markings]
    for m in range(0, caps.max_edges + 1):
        for combo in itertools.combinations_with_replacement(range(len(slot_list)), m):
            edges = tuple(
                Edge((slot_list[i][0], slot_list[i][1]), slot_list[i][2], slot_list[i][3], slot_list[i][4])
                for i in combo
            )
            if sum((e.d0 for e in edges), Fraction(0)) > dd.d0:
                continue
            for genus_split in itertools.product(genus_menu, repeat=n):
                if sum(genus_split) > dd.genus:
                    continue
                for leg_assign in itertools.product(*leg_menu):
                    legs_at: Dict[int, List[Leg]] = {}
                    for idx, v in enumerate(leg_assign):
                        legs_at.setdefault(v, []).append(Leg(idx, dd.markings[idx]))
                    for d0_pick in itertools.product(*(d0_menu[v] for v in range(n))):
                        if sum(d0_pick) != n0 - sum(int(e.d0 * k) for e in edges):
                            continue
                        for dinf_pick in itertools.product(*(dinf_menu[v] for v in range(n))):
                            vertices = tuple(
                                Vertex(
                                    types[v][0],
                                    types[v][1],
                                    genus_split[v],
                                    Fraction(d0_pick[v], k),
                                    Fraction(dinf_pick[v], k),
                                    tuple(
                                        sorted(
                                            legs_at.get(v, []), key=lambda l: l.index
                                        )
                                    ),
                                )
                                for v in range(n)
                            )
                            yield DecoratedGraph(vertices, edges)
