"""Batch front door: enumerate, evaluate, inspect, cache gc.

Artifacts are byte-identical across runs and thread counts: workers only
compute, a single writer emits canonical JSON with sorted keys, and files
appear atomically via rename.  Exit codes: 0 success, 2 invalid config,
3 enumeration truncated by caps, 4 missing correlator, 5 malformed file.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

from . import __version__, cache
from .canonical import automorphism_order, canonical_digest
from .config import RunConfig, load_config
from .contributions import GraphContribution, assemble_graph, edge_group_order
from .enumeration import EnumerationResult, enumerate_flat_regular
from .errors import (
    CapExceeded,
    ConfigInvalid,
    FileMalformed,
    MissingCorrelator,
)
from .graphio import dumps_canonical, graph_from_json, graph_to_dot, graph_to_json
from .graphs import EdgeKind
from .oracle import (
    SymbolicOracle,
    TabulatedOracle,
    ZeroOracle,
    resolve,
    sum_graphs,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPS = 3
EXIT_ORACLE = 4
EXIT_MALFORMED = 5


def _atomic_write(path: str, data: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _cache_dir(config: RunConfig) -> Optional[str]:
    return config.cache_dir or os.environ.get(cache.ENV_CACHE_DIR)


def _enumerate(config: RunConfig, log) -> EnumerationResult:
    cache_dir = _cache_dir(config)
    if cache_dir:
        hit = cache.load(cache_dir, config.ws, config.dd, config.caps)
        if hit is not None:
            log("cache hit: enumeration reused after re-validation")
            return hit
    result = enumerate_flat_regular(config.ws, config.dd, config.caps, threads=config.threads)
    if cache_dir:
        cache.store(cache_dir, config.ws, config.dd, config.caps, result)
    return result


def _graphs_payload(config: RunConfig, result: EnumerationResult) -> dict:
    echo = config.to_json()
    # runtime knobs must not leak into artifacts: bytes are contractually
    # identical across thread counts and cache locations
    echo.pop("threads")
    echo.pop("cache_dir")
    return {
        "schema": "msplocal/graphs/1",
        "version": __version__,
        "config": echo,
        "regular": [graph_to_json(g) for g in result.regular],
        "pure_loops": [graph_to_json(g) for g in result.pure_loops],
        "canonical": [canonical_digest(g) for g in result.regular],
        "truncation": list(result.truncation),
    }


def _contribution_payload(config: RunConfig, contribution: GraphContribution, resolved) -> dict:
    graph = contribution.graph
    group = 1
    for i, e in enumerate(graph.edges):
        if e.kind is not EdgeKind.EINFINF:
            group *= edge_group_order(graph, i, config.ws, config.policies)
    return {
        "canonical": contribution.canonical,
        "n_vertices": len(graph.vertices),
        "n_edges": len(graph.edges),
        "aut": automorphism_order(graph),
        "edge_group_order": group,
        "prefactor": str(contribution.prefactor),
        "fixed_part": [
            {"sign": f.sign, "token": f.token} for f in contribution.fixed_part
        ],
        "inverse_euler": contribution.inverse_euler.render(),
        "degree": contribution.degree,
        "factors": [
            {"label": f.label, "value": f.value.render(), "degree": f.degree}
            for f in contribution.factors
        ],
        "resolved": None if resolved.value is None else resolved.value.render(),
    }


def _summary_csv(rows: List[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["canonical", "n_vertices", "n_edges", "aut", "edge_group_order", "prefactor", "degree"]
    )
    for row in rows:
        writer.writerow(
            [
                row["canonical"],
                row["n_vertices"],
                row["n_edges"],
                row["aut"],
                row["edge_group_order"],
                row["prefactor"],
                "" if row["degree"] is None else row["degree"],
            ]
        )
    return buf.getvalue()


def _make_oracle(config: RunConfig):
    if config.oracle_mode == "symbolic":
        return SymbolicOracle()
    if config.oracle_mode == "zero":
        return ZeroOracle()
    return TabulatedOracle.from_file(config.oracle_path)


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    """Command-line flags win over the config file, field by field."""
    from dataclasses import replace

    from .enumeration import EnumerationCaps

    caps = config.caps
    cap_fields = {
        "max_vertices": args.max_vertices,
        "max_edges": args.max_edges,
        "max_edge_degree_numerator": args.max_degree,
        "max_vertex_genus": args.max_genus,
    }
    if any(v is not None for v in cap_fields.values()):
        caps = EnumerationCaps(
            **{
                name: current if override is None else override
                for (name, override), current in zip(
                    cap_fields.items(),
                    (
                        caps.max_vertices,
                        caps.max_edges,
                        caps.max_edge_degree_numerator,
                        caps.max_vertex_genus,
                    ),
                )
            }
        )
    updates = {"caps": caps}
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigInvalid("threads must be >= 1")
        updates["threads"] = args.threads
    if args.oracle is not None:
        if args.oracle in ("symbolic", "zero"):
            updates["oracle_mode"] = args.oracle
            updates["oracle_path"] = None
        elif args.oracle.startswith("tabulated:") and args.oracle[10:]:
            updates["oracle_mode"] = "tabulated"
            updates["oracle_path"] = args.oracle.split(":", 1)[1]
        else:
            raise ConfigInvalid(f"bad --oracle value {args.oracle!r}")
    if args.formats is not None:
        formats = tuple(part.strip() for part in args.formats.split(",") if part.strip())
        if not set(formats) <= {"json", "csv", "dot"}:
            raise ConfigInvalid(f"bad --formats value {args.formats!r}")
        updates["outputs"] = formats
    return replace(config, **updates)


def run(config_path: str, out_dir: str, log=print, evaluate: bool = True, args=None) -> int:
    """Orchestrate one batch run; returns the process exit code."""
    config = load_config(config_path)
    if args is not None:
        config = _apply_overrides(config, args)
    os.makedirs(out_dir, exist_ok=True)
    result = _enumerate(config, log)
    payload = _graphs_payload(config, result)
    _atomic_write(os.path.join(out_dir, "graphs.json"), dumps_canonical(payload))
    log(
        f"enumerated {len(result.regular)} regular graphs, "
        f"{len(result.pure_loops)} pure loops"
    )
    exit_code = EXIT_OK
    if result.truncation:
        log("WARNING: enumeration truncated: " + "; ".join(result.truncation))
        exit_code = EXIT_CAPS
    if not evaluate:
        return exit_code

    oracle = _make_oracle(config)
    graphs = list(result.regular)
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        contributions = list(
            pool.map(
                lambda g: assemble_graph(g, config.ws, config.dd, config.policies),
                graphs,
            )
        )
    report = sum_graphs(
        graphs, config.ws, config.dd, oracle, config.policies, contributions=contributions
    )
    resolved_by_canonical = {r.canonical: r for r in report.entries}
    rows = [
        _contribution_payload(config, c, resolved_by_canonical[c.canonical])
        for c in sorted(contributions, key=lambda c: c.canonical)
    ]
    contrib_payload = {
        "schema": "msplocal/contributions/1",
        "version": __version__,
        "oracle": config.oracle_mode,
        "graphs": rows,
        "groups": [
            {
                "fixed_part": [[s, t] for s, t in g.fixed_signature],
                "members": list(g.members),
                "subtotal": g.subtotal.render(),
            }
            for g in report.groups
        ],
        "total": None if report.total is None else report.total.render(),
    }
    _atomic_write(
        os.path.join(out_dir, "contributions.json"), dumps_canonical(contrib_payload)
    )
    _atomic_write(os.path.join(out_dir, "summary.csv"), _summary_csv(rows))
    if "dot" in config.outputs:
        dots = [
            graph_to_dot(g, name=canonical_digest(g)[:16]) for g in result.regular
        ]
        _atomic_write(os.path.join(out_dir, "graphs.dot"), "".join(dots))
    log(f"wrote artifacts to {out_dir}")
    return exit_code


# ---------------------------------------------------------------------------
# inspect


def _load_graphs_artifact(path: str):
    import json

    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FileMalformed(f"cannot read {path}: {exc}")
    if payload.get("schema") != "msplocal/graphs/1":
        raise FileMalformed("not a graphs artifact")
    return [graph_from_json(g) for g in payload["regular"]], payload


def inspect(
    path: str,
    has_edge=None,
    canonical=None,
    aut=None,
    level_profile=None,
    dot_out=None,
    log=print,
) -> int:
    graphs, _ = _load_graphs_artifact(path)
    rows = []
    for g in graphs:
        digest = canonical_digest(g)
        if has_edge and not any(e.kind.value == has_edge for e in g.edges):
            continue
        if canonical and not digest.startswith(canonical):
            continue
        if aut is not None and automorphism_order(g) != aut:
            continue
        if level_profile is not None:
            profile = "/".join(sorted(v.level.value for v in g.vertices))
            if profile != "/".join(sorted(level_profile.split("/"))):
                continue
        rows.append((digest, g))
    log(f"{'canonical':16}  {'V':>2} {'E':>2} {'aut':>4}  levels")
    for digest, g in rows:
        profile = "/".join(v.level.value for v in g.vertices)
        log(f"{digest[:16]:16}  {len(g.vertices):>2} {len(g.edges):>2} "
            f"{automorphism_order(g):>4}  {profile}")
    if dot_out:
        _atomic_write(dot_out, "".join(graph_to_dot(g, digest[:16]) for digest, g in rows))
        log(f"wrote {dot_out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="msplocal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("config")
        p.add_argument("--out", default="out")
        p.add_argument("--threads", type=int)
        p.add_argument("--oracle", help="symbolic | zero | tabulated:FILE")
        p.add_argument("--formats", help="comma-separated subset of json,csv,dot")
        p.add_argument("--max-vertices", type=int)
        p.add_argument("--max-edges", type=int)
        p.add_argument("--max-degree", type=int, help="cap on k*|degree| per edge")
        p.add_argument("--max-genus", type=int)

    p_enum = sub.add_parser("enumerate", help="enumerate graphs only")
    add_run_flags(p_enum)

    p_eval = sub.add_parser("evaluate", help="enumerate and evaluate contributions")
    add_run_flags(p_eval)

    p_inspect = sub.add_parser("inspect", help="filter and display a graphs artifact")
    p_inspect.add_argument("artifact")
    p_inspect.add_argument("--has-edge", choices=[k.value for k in EdgeKind])
    p_inspect.add_argument("--canonical")
    p_inspect.add_argument("--aut", type=int)
    p_inspect.add_argument("--level-profile", help="slash-separated levels, e.g. 0/1/1")
    p_inspect.add_argument("--dot")

    p_cache = sub.add_parser("cache", help="cache maintenance")
    cache_sub = p_cache.add_subparsers(dest="cache_command", required=True)
    p_gc = cache_sub.add_parser("gc", help="drop stale cache entries")
    p_gc.add_argument("--cache-dir", default=os.environ.get(cache.ENV_CACHE_DIR))

    args = parser.parse_args(argv)
    try:
        if args.command == "enumerate":
            return run(args.config, args.out, evaluate=False, args=args)
        if args.command == "evaluate":
            return run(args.config, args.out, evaluate=True, args=args)
        if args.command == "inspect":
            return inspect(
                args.artifact,
                has_edge=args.has_edge,
                canonical=args.canonical,
                aut=args.aut,
                level_profile=args.level_profile,
                dot_out=args.dot,
            )
        if args.command == "cache":
            if not args.cache_dir:
                print("no cache directory configured", file=sys.stderr)
                return EXIT_CONFIG
            removed = cache.gc(args.cache_dir)
            print(f"removed {removed} stale entries")
            return EXIT_OK
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapExceeded as exc:
        print(f"cap truncation: {exc}", file=sys.stderr)
        return EXIT_CAPS
    except MissingCorrelator as exc:
        print(f"oracle miss: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except FileMalformed as exc:
        print(f"malformed file: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
