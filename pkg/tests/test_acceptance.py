"""Acceptance gate: every criterion at its stated scale and time budget.

Each test prints one PASS/FAIL line.  Expected values are either produced by
independently coded evaluators living in the test tree (audits.py and the
inline reference formulas below) or are structural properties checked
exactly; nothing is compared against the implementation's own output.
"""

import json
import random
import time
from fractions import Fraction

import pytest

import audits
import corpus
from msplocal.algebra import RatFunc, Variable, homogeneous_degree, standard_grading
from msplocal.canonical import (
    brute_force_automorphism_order,
    brute_force_isomorphic,
    canonical_form,
)
from msplocal.cli import main
from msplocal.contributions import (
    DEFAULT_POLICIES,
    assemble_graph,
    automorphism_order,
    edge_contribution,
)
from msplocal.enumeration import EnumerationCaps, brute_force_enumerate, enumerate_flat_regular
from msplocal.errors import IrregularGraph
from msplocal.graphs import (
    DecoratedGraph,
    Edge,
    EdgeKind,
    GraphClass,
    Level,
    Vertex,
    balanced_vertices,
    classify,
    flatten,
    make_graph,
    validate,
)
from msplocal.model import (
    DiscreteData,
    Marking,
    WeightSystem,
    cosection_pairing,
    presets,
    random_discrete_data,
    virtual_dimension,
)

WS6 = WeightSystem.of((1, 1, 1, 1, 2))


class Timer:
    def __init__(self, budget: float):
        self.budget = budget
        self.start = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def report(self, name: str, ok: bool, detail: str) -> None:
        state = "PASS" if ok and self.elapsed < self.budget else "FAIL"
        print(f"{state} {name}: {detail} (t={self.elapsed:.2f}s < {self.budget:.0f}s)")
        assert ok, detail
        assert self.elapsed < self.budget, f"{name} exceeded {self.budget}s"


def test_criterion_1_virtual_dimension():
    timer = Timer(1.0)
    rng = random.Random(101)
    checked = 0
    for _ in range(50):
        ws = WeightSystem.of(random.Random(rng.random()).choice(((1, 1, 1, 1, 2), (1, 1, 1, 1, 4), (1, 1, 1, 2, 5))))
        dd = random_discrete_data(ws, rng)
        got = virtual_dimension(ws, dd)
        # reference formula, recomputed from raw fields
        stacky = [mk.m for mk in dd.markings if mk.sector == "narrow"]
        expected = (
            dd.n_tori * dd.d0
            + dd.n_tori * (1 - dd.genus)
            + dd.dinf
            + len(dd.markings)
            - Fraction(4 * sum(stacky), ws.k)
        )
        assert got == expected
        checked += 1
    timer.report("criterion 1 (virtual dimension)", checked == 50, f"{checked} randomized data sets match the reference formula exactly")


def test_criterion_2_cosection_euler_identity():
    timer = Timer(1.0)
    rng = random.Random(202)
    checked = 0
    for ws in presets():
        for _ in range(100):
            phi = [Fraction(rng.randrange(-9, 10), rng.randrange(1, 8)) for _ in range(5)]
            rho = Fraction(rng.randrange(-9, 10), rng.randrange(1, 8))
            phidot = [a * p for a, p in zip(ws.a, phi)]
            assert cosection_pairing(ws, phi, rho, phidot, -ws.k * rho) == 0
            checked += 1
    timer.report("criterion 2 (cosection identity)", checked == 300, f"{checked} Euler-direction points vanish exactly across the three presets")


def test_criterion_3_flattening():
    timer = Timer(10.0)
    samples = corpus.balanced_chain_corpus(200, seed=303)
    for ws, n_tori, graph in samples:
        dd = corpus.derive_dd(graph, n_tori)
        assert validate(graph, ws, dd).ok
        assert balanced_vertices(graph, ws)
        flat = flatten(graph, ws)
        assert not balanced_vertices(flat, ws)
        assert flatten(flat, ws) == flat
        assert flat.total_d0() == graph.total_d0()
        assert flat.total_dinf() == graph.total_dinf()
        assert flat.total_genus() == graph.total_genus()
    timer.report("criterion 3 (flattening)", len(samples) >= 200, f"{len(samples)} balanced-node graphs flatten idempotently with conserved decorations")


def _aut_corpus():
    pool = [g for _, _, g in corpus.regular_corpus(360, seed=404)]
    pool += [g for _, _, g in corpus.balanced_chain_corpus(160, seed=405)]
    ws = WS6
    caps = EnumerationCaps(3, 2, 12, 2)
    for dd in (
        DiscreteData.of(0, [], Fraction(1), Fraction(0), 2, ws),
        DiscreteData.of(1, [], Fraction(2), Fraction(0), 1, ws),
    ):
        result = enumerate_flat_regular(ws, dd, caps)
        pool += list(result.regular) + list(result.pure_loops)
    # symmetric shapes with nontrivial automorphisms
    for d in (1, 2):
        hub = Vertex(Level.ONE, 1, 3, Fraction(0), Fraction(0), ())
        tip = Vertex(Level.ONE, 2, 1, Fraction(0), Fraction(0), ())
        e = Edge((0, 1), EdgeKind.E11, Fraction(d), Fraction(0))
        pool.append(make_graph([hub, tip], [e, e]))
        pool.append(make_graph([hub, tip, tip], [e, Edge((0, 2), EdgeKind.E11, Fraction(d), Fraction(0))]))
    return [g for g in pool if len(g.vertices) <= 6]


def test_criterion_4_canonical_and_automorphisms():
    timer = Timer(60.0)
    pool = _aut_corpus()
    assert len(pool) >= 500
    for g in pool:
        assert automorphism_order(g) == brute_force_automorphism_order(g)
    groups = {}
    for g in pool:
        groups.setdefault(canonical_form(g), []).append(g)
    for members in groups.values():
        first = members[0]
        for other in members[1:]:
            assert brute_force_isomorphic(first, other)
    rng = random.Random(406)
    reps = [members[0] for members in groups.values()]
    cross_checked = 0
    while cross_checked < 300:
        a, b = rng.sample(range(len(reps)), 2)
        assert not brute_force_isomorphic(reps[a], reps[b])
        cross_checked += 1
    timer.report(
        "criterion 4 (canonical/automorphism oracle)",
        True,
        f"{len(pool)} graphs: |Aut| matches brute force; {len(groups)} classes verified within and across groups",
    )


def test_criterion_5_enumeration_oracle():
    timer = Timer(120.0)
    ws = WS6
    mid = EnumerationCaps(3, 2, 12, 2)
    configs = [
        (DiscreteData.of(0, [], Fraction(0), Fraction(0), 1, ws), EnumerationCaps(2, 1, 12, 0)),
        (DiscreteData.of(0, [], Fraction(1), Fraction(0), 1, ws), EnumerationCaps(3, 2, 12, 1)),
        (DiscreteData.of(1, [], Fraction(1), Fraction(0), 1, ws), mid),
        (DiscreteData.of(0, [], Fraction(1), Fraction(0), 2, ws), mid),
        (DiscreteData.of(0, [Marking.narrow(1, ws)], Fraction(0), Fraction(5, 6), 1, ws), EnumerationCaps(2, 1, 12, 0)),
    ]
    counts = []
    for dd, caps in configs:
        ours = enumerate_flat_regular(ws, dd, caps)
        brute = brute_force_enumerate(ws, dd, caps)
        assert {canonical_form(g) for g in ours.regular} == {canonical_form(g) for g in brute}
        counts.append(len(brute))
    timer.report("criterion 5 (enumeration oracle)", counts == [1, 2, 3, 4, 1], f"5 configurations agree with the brute-force oracle (class counts {counts})")


def test_criterion_6_formula_audits():
    timer = Timer(30.0)
    from test_contributions import (
        E01_CASES,
        E11_CASES,
        E1INF_CASES,
        RHO_MARKING,
        _delta_sum,
        _end_vertex,
        _renumber_legs,
    )

    audited = 0
    h = RatFunc.var(Variable.hyperplane(0))
    for d, v_cls, v1_cls in E01_CASES:
        for policies in (DEFAULT_POLICIES, RHO_MARKING):
            g = make_graph(
                _renumber_legs([_end_vertex(v_cls, Level.ZERO, None), _end_vertex(v1_cls, Level.ONE, 1)]),
                [Edge((0, 1), EdgeKind.E01, Fraction(d), Fraction(0))],
            )
            dd = corpus.derive_dd(g, 2)
            got = edge_contribution(g, 0, WS6, dd, policies)
            assert got == audits.indep_e01_final(WS6, 2, 1, d, _delta_sum(g, 1, policies), h)
            audited += 1
    for c, inf_cls, v1_cls in E1INF_CASES:
        b = (-c) % WS6.k or WS6.k
        from msplocal.graphs import Leg

        if inf_cls == "S":
            vinf = corpus.stable_inf_vertex(WS6, 1, 1, 1)
        elif inf_cls == "1,1":
            vinf = Vertex(Level.INF, 1, 0, Fraction(0), Fraction(0), (Leg(0, Marking("narrow", b)),))
        else:
            vinf = Vertex(Level.INF, 1, 0, Fraction(0), Fraction(0), ())
        g = make_graph(
            _renumber_legs([_end_vertex(v1_cls, Level.ONE, 1), vinf]),
            [Edge((0, 1), EdgeKind.E1INF, Fraction(0), Fraction(c, WS6.k))],
        )
        dd = corpus.derive_dd(g, 1)
        got = edge_contribution(g, 0, WS6, dd)
        delta = -1 if inf_cls == "0,1" else 0
        assert got == audits.indep_e1inf(WS6, 1, 1, Fraction(-c, WS6.k), delta, _delta_sum(g, 0, DEFAULT_POLICIES))
        audited += 1
    for d, cls_a, cls_b in E11_CASES:
        g = make_graph(
            _renumber_legs([_end_vertex(cls_a, Level.ONE, 1), _end_vertex(cls_b, Level.ONE, 2)]),
            [Edge((0, 1), EdgeKind.E11, Fraction(d), Fraction(0))],
        )
        dd = corpus.derive_dd(g, 2)
        got = edge_contribution(g, 0, WS6, dd)
        s_a = _delta_sum(g, 0, DEFAULT_POLICIES)
        s_b = _delta_sum(g, 1, DEFAULT_POLICIES)
        if s_a >= s_b:
            expected = audits.indep_e11(WS6, 2, 1, 2, d, s_a, s_b)
        else:
            expected = audits.indep_e11(WS6, 2, 2, 1, d, s_b, s_a)
        assert got == expected
        audited += 1
    # tangent weights, nodes, and the level-1 vertex block
    from msplocal.contributions import node_contribution, tangent_weight, vertex_contribution
    from msplocal.graphs import Leg

    g = make_graph(
        [Vertex(Level.ZERO, None, 1, Fraction(0), Fraction(0), ()), Vertex(Level.ONE, 1, 2, Fraction(0), Fraction(0), ())],
        [Edge((0, 1), EdgeKind.E01, Fraction(1), Fraction(0))],
    )
    dd = corpus.derive_dd(g, 2)
    t1 = RatFunc.var(Variable.equiv(1))
    assert tangent_weight(g, (0, 0), WS6) == h + t1
    assert tangent_weight(g, (0, 1), WS6) == -(h + t1)
    assert node_contribution(g, (0, 0), WS6, dd) == audits.indep_node_level0(2, h)
    assert node_contribution(g, (0, 1), WS6, dd) == audits.indep_node_level1(WS6, 2, 1)
    audited += 4
    for genus in (0, 1, 2):
        legs = tuple(Leg(i, Marking.rho_unit()) for i in range(3))
        hub = Vertex(Level.ONE, 1, genus, Fraction(0), Fraction(0), legs)
        g2 = make_graph(
            [hub, Vertex(Level.ZERO, None, 0, Fraction(1), Fraction(0), ())],
            [Edge((0, 1), EdgeKind.E01, Fraction(1), Fraction(0))],
        )
        dd2 = corpus.derive_dd(g2, 2)
        assert vertex_contribution(g2, 0, WS6, dd2) == audits.indep_level1_vertex(WS6, 2, 1, genus, 1, 0)
        audited += 1
    timer.report("criterion 6 (formula audits)", audited >= 20, f"{audited} decorated cases match independent product evaluations exactly")


def test_criterion_7_symmetries():
    timer = Timer(30.0)
    from test_contributions import _renumber_legs, assert_equivariant

    rng = random.Random(707)
    samples = corpus.regular_corpus(100, seed=708, n_tori_options=(2, 3))
    for ws, dd, g in samples:
        sigma = list(range(1, dd.n_tori + 1))
        rng.shuffle(sigma)
        assert_equivariant(ws, dd, g, sigma)
    swaps = 0
    for ws, dd, g in samples:
        for i, e in enumerate(g.edges):
            if e.kind is not EdgeKind.E11:
                continue
            flipped_edges = list(g.edges)
            flipped_edges[i] = Edge((e.ends[1], e.ends[0]), e.kind, e.d0, e.dinf)
            flipped = DecoratedGraph(g.vertices, tuple(flipped_edges))
            assert edge_contribution(g, i, ws, dd) == edge_contribution(flipped, i, ws, dd)
            swaps += 1
    timer.report(
        "criterion 7 (symmetry suite)",
        swaps > 0,
        f"100 contributions hour-equivariant; {swaps} mixed-hour edges orientation-symmetric",
    )


def test_criterion_8_homogeneity():
    timer = Timer(30.0)
    from test_contributions import contribution_size

    verified = 0
    samples = corpus.regular_corpus(150, seed=808, n_tori_options=(1, 2))
    for ws, dd, g in samples:
        c = assemble_graph(g, ws, dd)
        assert c.degree is not None
        for entry in c.factors:
            assert entry.degree is not None, entry.label
        if contribution_size(c) > 600 or verified >= 120:
            continue
        assert homogeneous_degree(c.inverse_euler, standard_grading) == c.degree
        verified += 1
    timer.report(
        "criterion 8 (homogeneity)",
        verified >= 100,
        f"150 assembled graphs factor-homogeneous; {verified} expanded products match the additive degree",
    )


def test_criterion_9_pruning():
    timer = Timer(5.0)
    mutants = corpus.irregular_mutants(20, seed=909)
    for ws, dd, g in mutants:
        assert classify(g, ws) is GraphClass.IRREGULAR
        with pytest.raises(IrregularGraph):
            assemble_graph(g, ws, dd)
    timer.report("criterion 9 (pruning)", len(mutants) == 20, "20 irregular mutants classified Irregular and refused by assembly")


def test_criterion_10_determinism(tmp_path):
    timer = Timer(300.0)
    base = {
        "weights": [1, 1, 1, 1, 2],
        "n_tori": 2,
        "genus": 0,
        "markings": [],
        "d0": "1",
        "dinf": "0",
        "caps": {"max_vertices": 3, "max_edges": 2, "max_edge_degree_numerator": 12, "max_vertex_genus": 1},
        "oracle": "zero",
        "outputs": ["json", "csv", "dot"],
    }
    blobs = set()
    runs = 0
    for threads in (1, 4, 16):
        for repeat in range(3):
            config = dict(base)
            config["threads"] = threads
            path = tmp_path / f"cfg-{threads}-{repeat}.json"
            path.write_text(json.dumps(config), encoding="utf-8")
            out = tmp_path / f"out-{threads}-{repeat}"
            assert main(["evaluate", str(path), "--out", str(out)]) == 0
            blob = b"".join(
                (out / name).read_bytes()
                for name in ("graphs.json", "contributions.json", "summary.csv", "graphs.dot")
            )
            blobs.add(blob)
            runs += 1
    timer.report("criterion 10 (determinism)", len(blobs) == 1, f"{runs} runs at parallelism 1/4/16 produced byte-identical artifacts")
