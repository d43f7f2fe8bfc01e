"""Canonical forms and automorphisms of decorated graphs.

Canonical labeling = iterative color refinement (seeded by the full vertex
decoration, legs included) followed by individualization backtracking; the
canonical form is the lexicographically smallest serialization over the
discrete refinements reached.  Automorphisms are counted as pairs of a
decoration-preserving vertex permutation and a compatible edge bijection,
so parallel identical edges contribute factorially.
"""

from __future__ import annotations

import hashlib
import itertools
from typing import Dict, List

from .graphs import DecoratedGraph, Edge, Vertex


def _vertex_seed(vx: Vertex) -> tuple:
    legs = tuple(sorted((leg.index, leg.marking.sector, leg.marking.m) for leg in vx.legs))
    return (
        vx.level.value,
        -1 if vx.hour is None else vx.hour,
        vx.genus,
        vx.d0.numerator,
        vx.d0.denominator,
        vx.dinf.numerator,
        vx.dinf.denominator,
        legs,
    )


def _edge_deco(e: Edge) -> tuple:
    return (e.kind.value, e.d0.numerator, e.d0.denominator, e.dinf.numerator, e.dinf.denominator)


def _refine(graph: DecoratedGraph, colors: List[int]) -> List[int]:
    """Stable coloring: extend by sorted multiset of (edge deco, neighbor color)."""
    n = len(graph.vertices)
    while True:
        signatures = []
        for v in range(n):
            nbhd = []
            for i, e in enumerate(graph.edges):
                for end in (0, 1):
                    if e.ends[end] == v:
                        nbhd.append((_edge_deco(e), colors[e.ends[1 - end]]))
            signatures.append((colors[v], tuple(sorted(nbhd))))
        order = {sig: rank for rank, sig in enumerate(sorted(set(signatures)))}
        new_colors = [order[sig] for sig in signatures]
        if new_colors == colors:
            return colors
        colors = new_colors


def _initial_colors(graph: DecoratedGraph) -> List[int]:
    seeds = [_vertex_seed(vx) for vx in graph.vertices]
    order = {s: rank for rank, s in enumerate(sorted(set(seeds)))}
    return _refine(graph, [order[s] for s in seeds])


def _serialize(graph: DecoratedGraph, perm: List[int]) -> bytes:
    """Bytes of the graph relabeled by perm (perm[old] = new)."""
    n = len(graph.vertices)
    inv = [0] * n
    for old, new in enumerate(perm):
        inv[new] = old
    parts: List[str] = []
    for new in range(n):
        parts.append(repr(_vertex_seed(graph.vertices[inv[new]])))
    edge_rows = []
    for e in graph.edges:
        a, b = sorted((perm[e.ends[0]], perm[e.ends[1]]))
        edge_rows.append((a, b, _edge_deco(e)))
    for row in sorted(edge_rows):
        parts.append(repr(row))
    return "|".join(parts).encode()


def _discrete_perms(graph: DecoratedGraph, colors: List[int]):
    """Yield vertex orderings consistent with the coloring, individualizing
    the first non-singleton class and re-refining at each branch."""
    n = len(graph.vertices)
    classes: Dict[int, List[int]] = {}
    for v, c in enumerate(colors):
        classes.setdefault(c, []).append(v)
    target = None
    for c in sorted(classes):
        if len(classes[c]) > 1:
            target = c
            break
    if target is None:
        ranked = sorted(range(n), key=lambda v: colors[v])
        perm = [0] * n
        for new, old in enumerate(ranked):
            perm[old] = new
        yield perm
        return
    for v in classes[target]:
        branched = list(colors)
        branched[v] = -1  # individualize below every existing color
        order = {c: rank for rank, c in enumerate(sorted(set(branched)))}
        branched = _refine(graph, [order[c] for c in branched])
        yield from _discrete_perms(graph, branched)


def canonical_form(graph: DecoratedGraph) -> bytes:
    """Isomorphism-invariant byte string, injective on isomorphism classes."""
    colors = _initial_colors(graph)
    best = None
    for perm in _discrete_perms(graph, colors):
        data = _serialize(graph, perm)
        if best is None or data < best:
            best = data
    assert best is not None
    return best


def canonical_digest(graph: DecoratedGraph) -> str:
    return hashlib.sha256(canonical_form(graph)).hexdigest()


def _edge_type_counts(graph: DecoratedGraph, perm=None) -> Dict[tuple, int]:
    out: Dict[tuple, int] = {}
    for e in graph.edges:
        u, v = e.ends
        if perm is not None:
            u, v = perm[u], perm[v]
        key = (tuple(sorted((u, v))), _edge_deco(e))
        out[key] = out.get(key, 0) + 1
    return out


def _color_class_permutations(colors: List[int]):
    classes: Dict[int, List[int]] = {}
    for v, c in enumerate(colors):
        classes.setdefault(c, []).append(v)
    keys = sorted(classes)
    pools = [list(itertools.permutations(classes[c])) for c in keys]
    for combo in itertools.product(*pools):
        perm = [0] * len(colors)
        for c, images in zip(keys, combo):
            for src, dst in zip(classes[c], images):
                perm[src] = dst
        yield perm


def automorphism_order(graph: DecoratedGraph) -> int:
    """Number of decoration-preserving automorphisms (vertex and edge maps)."""
    colors = _initial_colors(graph)
    base_types = _edge_type_counts(graph)
    total = 0
    for perm in _color_class_permutations(colors):
        if _edge_type_counts(graph, perm) != base_types:
            continue
        ways = 1
        for count in base_types.values():
            for i in range(2, count + 1):
                ways *= i
        total += ways
    return total


# ---------------------------------------------------------------------------
# Independent brute-force oracle (no refinement, plain permutation search).


def brute_force_automorphism_order(graph: DecoratedGraph) -> int:
    n = len(graph.vertices)
    seeds = [_vertex_seed(vx) for vx in graph.vertices]
    base_types = _edge_type_counts(graph)
    total = 0
    for perm in itertools.permutations(range(n)):
        if any(seeds[v] != seeds[perm[v]] for v in range(n)):
            continue
        if _edge_type_counts(graph, list(perm)) != base_types:
            continue
        ways = 1
        for count in base_types.values():
            for i in range(2, count + 1):
                ways *= i
        total += ways
    return total


def brute_force_isomorphic(g1: DecoratedGraph, g2: DecoratedGraph) -> bool:
    if len(g1.vertices) != len(g2.vertices) or len(g1.edges) != len(g2.edges):
        return False
    seeds1 = [_vertex_seed(vx) for vx in g1.vertices]
    seeds2 = [_vertex_seed(vx) for vx in g2.vertices]
    if sorted(seeds1) != sorted(seeds2):
        return False
    types2 = _edge_type_counts(g2)
    for perm in itertools.permutations(range(len(g1.vertices))):
        if any(seeds1[v] != seeds2[perm[v]] for v in range(len(seeds1))):
            continue
        if _edge_type_counts(g1, list(perm)) == types2:
            return True
    return False
