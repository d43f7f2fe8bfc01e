"""Strict run-configuration parsing.

A config is one JSON object; unknown keys are rejected, rationals are "p/q"
strings, and everything resolves to validated (weights, discrete data, caps,
oracle mode, output options).  `to_json(parse(...))` is idempotent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .contributions import Policies
from .enumeration import EnumerationCaps
from .errors import ConfigInvalid
from .model import DiscreteData, Marking, WeightSystem

_TOP_KEYS = {
    "weights",
    "n_tori",
    "genus",
    "markings",
    "d0",
    "dinf",
    "caps",
    "oracle",
    "outputs",
    "threads",
    "cache_dir",
    "delta_mode",
    "e01_range",
}
_CAP_KEYS = {"max_vertices", "max_edges", "max_edge_degree_numerator", "max_vertex_genus"}
_OUTPUTS = {"json", "csv", "dot"}


@dataclass(frozen=True)
class RunConfig:
    ws: WeightSystem
    dd: DiscreteData
    caps: EnumerationCaps
    oracle_mode: str  # "symbolic" | "zero" | "tabulated"
    oracle_path: Optional[str]
    outputs: Tuple[str, ...]
    threads: int
    cache_dir: Optional[str]
    policies: Policies

    def to_json(self) -> dict:
        oracle = self.oracle_mode
        if self.oracle_mode == "tabulated":
            oracle = f"tabulated:{self.oracle_path}"
        return {
            "weights": list(self.ws.a),
            "n_tori": self.dd.n_tori,
            "genus": self.dd.genus,
            "markings": [mk.render() for mk in self.dd.markings],
            "d0": str(self.dd.d0),
            "dinf": str(self.dd.dinf),
            "caps": {
                "max_vertices": self.caps.max_vertices,
                "max_edges": self.caps.max_edges,
                "max_edge_degree_numerator": self.caps.max_edge_degree_numerator,
                "max_vertex_genus": self.caps.max_vertex_genus,
            },
            "oracle": oracle,
            "outputs": list(self.outputs),
            "threads": self.threads,
            "cache_dir": self.cache_dir,
            "delta_mode": self.policies.delta_mode,
            "e01_range": self.policies.e01_range,
        }


def _fail(message: str) -> None:
    raise ConfigInvalid(message)


def _rational(value, key: str) -> Fraction:
    if isinstance(value, int):
        return Fraction(value)
    # decimals are refused even though exact: the artifact contract is p/q
    if isinstance(value, str) and "." not in value:
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            _fail(f"{key}: bad rational {value!r}")
    _fail(f"{key}: rationals must be strings like \"1/6\", got {value!r}")


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        _fail("config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        _fail(f"unknown config keys: {sorted(unknown)}")
    for key in ("weights", "n_tori", "genus", "d0", "dinf"):
        if key not in data:
            _fail(f"missing config key {key!r}")

    weights = data["weights"]
    if isinstance(weights, str):
        weights = [part.strip() for part in weights.split(",")]
    try:
        ws = WeightSystem.of([int(w) for w in weights])
    except (TypeError, ValueError) as exc:
        _fail(f"weights: {exc}")

    try:
        n_tori = int(data["n_tori"])
        genus = int(data["genus"])
    except (TypeError, ValueError):
        _fail("n_tori and genus must be integers")

    markings = []
    for text in data.get("markings", []):
        try:
            markings.append(Marking.parse(text, ws))
        except Exception as exc:
            _fail(f"markings: {exc}")

    d0 = _rational(data["d0"], "d0")
    dinf = _rational(data["dinf"], "dinf")
    try:
        dd = DiscreteData.of(genus, markings, d0, dinf, n_tori, ws)
    except Exception as exc:
        _fail(f"discrete data: {exc}")

    caps_data = data.get("caps", {})
    if not isinstance(caps_data, dict):
        _fail("caps must be an object")
    unknown = set(caps_data) - _CAP_KEYS
    if unknown:
        _fail(f"unknown caps keys: {sorted(unknown)}")
    caps = EnumerationCaps(
        max_vertices=int(caps_data.get("max_vertices", 4)),
        max_edges=int(caps_data.get("max_edges", 4)),
        max_edge_degree_numerator=int(caps_data.get("max_edge_degree_numerator", 4 * ws.k)),
        max_vertex_genus=int(caps_data.get("max_vertex_genus", genus)),
    )

    oracle = data.get("oracle", "symbolic")
    oracle_path = None
    if oracle in ("symbolic", "zero"):
        mode = oracle
    elif isinstance(oracle, str) and oracle.startswith("tabulated:"):
        mode = "tabulated"
        oracle_path = oracle.split(":", 1)[1]
        if not oracle_path:
            _fail("tabulated oracle needs a path: \"tabulated:FILE\"")
    else:
        _fail(f"oracle must be symbolic, zero, or tabulated:PATH; got {oracle!r}")

    outputs = tuple(data.get("outputs", ["json", "csv"]))
    if not set(outputs) <= _OUTPUTS:
        _fail(f"outputs must be a subset of {sorted(_OUTPUTS)}")

    threads = int(data.get("threads", 1))
    if threads < 1:
        _fail("threads must be >= 1")

    try:
        policies = Policies(
            delta_mode=data.get("delta_mode", "mirrored"),
            e01_range=data.get("e01_range", "euler"),
        )
    except ValueError as exc:
        _fail(str(exc))

    return RunConfig(
        ws=ws,
        dd=dd,
        caps=caps,
        oracle_mode=mode,
        oracle_path=oracle_path,
        outputs=outputs,
        threads=threads,
        cache_dir=data.get("cache_dir"),
        policies=policies,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        _fail(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        _fail(f"config is not valid JSON: {exc}")
    return parse_config(data)
