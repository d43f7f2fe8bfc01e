"""Enumerator behavior: conservation, determinism, caps, oracle agreement."""

from fractions import Fraction

import pytest

from msplocal.canonical import canonical_form
from msplocal.enumeration import (
    EnumerationCaps,
    brute_force_enumerate,
    enumerate_flat_regular,
    natural_bounds,
)
from msplocal.errors import CapTooLarge
from msplocal.graphs import GraphClass, balanced_vertices, classify, validate
from msplocal.model import DiscreteData, Marking, WeightSystem

WS = WeightSystem.of((1, 1, 1, 1, 2))
CAPS = EnumerationCaps(max_vertices=3, max_edges=2, max_edge_degree_numerator=12, max_vertex_genus=2)


def test_minimal_config_has_one_graph():
    dd = DiscreteData.of(0, [], Fraction(0), Fraction(0), 1, WS)
    result = enumerate_flat_regular(WS, dd, CAPS)
    assert len(result.regular) == 1
    only = result.regular[0]
    assert len(only.vertices) == 1 and not only.edges
    assert only.vertices[0].level.value == "0" and only.vertices[0].genus == 0


def test_every_emitted_graph_validates_and_is_flat_regular():
    dd = DiscreteData.of(1, [], Fraction(1), Fraction(0), 2, WS)
    result = enumerate_flat_regular(WS, dd, CAPS)
    assert result.regular
    for g in result.regular:
        assert validate(g, WS, dd).ok
        assert not balanced_vertices(g, WS)
        assert classify(g, WS) is GraphClass.REGULAR
        assert g.total_d0() == dd.d0 and g.total_dinf() == dd.dinf
        assert g.total_genus() == dd.genus


def test_conservation_rules_out_negative_budget():
    dd = DiscreteData.of(0, [], Fraction(-1), Fraction(0), 1, WS)
    assert enumerate_flat_regular(WS, dd, CAPS).regular == ()


def test_deterministic_order():
    dd = DiscreteData.of(0, [], Fraction(1), Fraction(0), 2, WS)
    a = enumerate_flat_regular(WS, dd, CAPS)
    b = enumerate_flat_regular(WS, dd, CAPS)
    assert [canonical_form(g) for g in a.regular] == [canonical_form(g) for g in b.regular]
    forms = [canonical_form(g) for g in a.regular]
    assert forms == sorted(forms)


def test_cap_monotonicity():
    dd = DiscreteData.of(1, [], Fraction(1), Fraction(0), 1, WS)
    small = enumerate_flat_regular(WS, dd, CAPS)
    bigger = enumerate_flat_regular(
        WS, dd, EnumerationCaps(max_vertices=4, max_edges=3, max_edge_degree_numerator=18, max_vertex_genus=2)
    )
    small_forms = {canonical_form(g) for g in small.regular}
    big_forms = {canonical_form(g) for g in bigger.regular}
    assert small_forms <= big_forms


def test_truncation_reporting():
    dd = DiscreteData.of(0, [], Fraction(2), Fraction(0), 1, WS)
    tight = EnumerationCaps(max_vertices=2, max_edges=1, max_edge_degree_numerator=6, max_vertex_genus=0)
    result = enumerate_flat_regular(WS, dd, tight)
    assert result.truncated
    generous = EnumerationCaps(max_vertices=8, max_edges=6, max_edge_degree_numerator=24, max_vertex_genus=0)
    assert not enumerate_flat_regular(WS, dd, generous).truncated
    bounds = natural_bounds(WS, dd)
    assert bounds["max_edge_degree_numerator"] >= 12


def test_pure_loops_reported_separately():
    dd = DiscreteData.of(1, [], Fraction(2), Fraction(0), 1, WS)
    result = enumerate_flat_regular(WS, dd, CAPS)
    assert result.pure_loops
    for g in result.pure_loops:
        assert classify(g, WS) is GraphClass.PURE_LOOP
        assert canonical_form(g) not in {canonical_form(r) for r in result.regular}


def test_brute_force_guard_rails():
    dd = DiscreteData.of(0, [], Fraction(0), Fraction(0), 1, WS)
    with pytest.raises(CapTooLarge):
        brute_force_enumerate(WS, dd, EnumerationCaps(max_vertices=6))
    empty = brute_force_enumerate(
        WS,
        DiscreteData.of(0, [], Fraction(-1), Fraction(0), 1, WS),
        EnumerationCaps(max_vertices=2, max_edges=1, max_edge_degree_numerator=6),
    )
    assert empty == []


def test_oracle_agreement_two_quick_configs():
    quick = EnumerationCaps(max_vertices=2, max_edges=1, max_edge_degree_numerator=12, max_vertex_genus=1)
    for dd in (
        DiscreteData.of(0, [], Fraction(0), Fraction(0), 1, WS),
        DiscreteData.of(0, [], Fraction(1), Fraction(0), 1, WS),
    ):
        ours = enumerate_flat_regular(WS, dd, quick)
        brute = brute_force_enumerate(WS, dd, quick)
        assert {canonical_form(g) for g in ours.regular} == {canonical_form(g) for g in brute}
