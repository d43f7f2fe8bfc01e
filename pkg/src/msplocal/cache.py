"""Content-addressed enumeration cache.

Entries are keyed by a digest of (weights, discrete data, caps, code
version); a hit is trusted only after every stored graph re-validates.
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Optional

from . import __version__
from .enumeration import EnumerationCaps, EnumerationResult
from .graphio import dumps_canonical, graph_from_json, graph_to_json
from .graphs import GraphClass, balanced_vertices, classify, validate
from .model import DiscreteData, WeightSystem

ENV_CACHE_DIR = "MSPLOCAL_CACHE_DIR"


def cache_key(ws: WeightSystem, dd: DiscreteData, caps: EnumerationCaps) -> str:
    payload = {
        "weights": list(ws.a),
        "n_tori": dd.n_tori,
        "genus": dd.genus,
        "markings": [mk.render() for mk in dd.markings],
        "d0": str(dd.d0),
        "dinf": str(dd.dinf),
        "caps": [
            caps.max_vertices,
            caps.max_edges,
            caps.max_edge_degree_numerator,
            caps.max_vertex_genus,
        ],
        "version": __version__,
    }
    return hashlib.sha256(dumps_canonical(payload).encode()).hexdigest()


def _entry_path(cache_dir: str, key: str) -> str:
    return os.path.join(cache_dir, f"enum-{key}.json")


def store(cache_dir: str, ws, dd, caps, result: EnumerationResult) -> str:
    os.makedirs(cache_dir, exist_ok=True)
    path = _entry_path(cache_dir, cache_key(ws, dd, caps))
    payload = {
        "version": __version__,
        "regular": [graph_to_json(g) for g in result.regular],
        "pure_loops": [graph_to_json(g) for g in result.pure_loops],
        "truncation": list(result.truncation),
    }
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(payload))
    os.replace(tmp, path)
    return path


def load(cache_dir: str, ws, dd, caps) -> Optional[EnumerationResult]:
    """Cached result, or None on miss or any verification failure."""
    path = _entry_path(cache_dir, cache_key(ws, dd, caps))
    if not os.path.exists(path):
        return None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        regular = tuple(graph_from_json(g) for g in payload["regular"])
        loops = tuple(graph_from_json(g) for g in payload["pure_loops"])
        truncation = tuple(payload["truncation"])
    except Exception:
        return None
    for g in regular:
        if not validate(g, ws, dd).ok or balanced_vertices(g, ws):
            return None
        if classify(g, ws) is not GraphClass.REGULAR:
            return None
    for g in loops:
        if not validate(g, ws, dd).ok or classify(g, ws) is not GraphClass.PURE_LOOP:
            return None
    return EnumerationResult(regular=regular, pure_loops=loops, truncation=truncation)


def gc(cache_dir: str) -> int:
    """Drop entries written by other code versions; returns removals."""
    if not os.path.isdir(cache_dir):
        return 0
    removed = 0
    for name in sorted(os.listdir(cache_dir)):
        if not (name.startswith("enum-") and name.endswith(".json")):
            continue
        path = os.path.join(cache_dir, name)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
            keep = payload.get("version") == __version__
        except Exception:
            keep = False
        if not keep:
            os.remove(path)
            removed += 1
    return removed
