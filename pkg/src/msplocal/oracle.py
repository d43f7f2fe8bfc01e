"""Correlator oracles and the localization sum over graphs.

Three modes resolve the opaque moduli tokens of a `GraphContribution`:

* symbolic (default): nothing is resolved; the ledger carries the exact
  token-bearing rational functions.
* zero: every stable-moduli correlator is 0, so any graph owning a stable
  vertex or a web contributes 0; fully-unstable graphs survive with their
  signed point-class tokens left symbolic.
* tabulated: user-supplied table rows (vertex descriptor, psi powers,
  lambda monomial) -> exact rational.  The engine expands each package's
  1/(w - psi) blocks as geometric series and its Hodge blocks as truncated
  lambda series, then pairs coefficients with table rows.  A queried row
  that is absent is a hard error, never a silent zero.

Truncation: psi/lambda monomials are cut at the owning vertex's moduli
dimension 3g - 3 + n.  For fundamental-class packages (level-1 vertices)
only exact-dimension monomials are queried; lower degrees vanish against
the fundamental class by dimension, which is an axiom, not a default.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import Polynomial, RatFunc, Variable
from .contributions import (
    DEFAULT_POLICIES,
    GraphContribution,
    ModuliPackage,
    Policies,
    assemble_graph,
)
from .errors import DuplicateClass, FileMalformed, MissingCorrelator
from .graphs import DecoratedGraph
from .model import DiscreteData, WeightSystem

PsiVec = Tuple[int, ...]
LamMono = Tuple[Tuple[int, int], ...]  # ((i, power), ...) sorted by i


class SymbolicOracle:
    mode = "symbolic"


class ZeroOracle:
    mode = "zero"


class TabulatedOracle:
    """Strict lookup table; rows are keyed by vertex descriptor, the sorted
    psi-power vector, and the lambda monomial."""

    mode = "tabulated"

    def __init__(self, rows: Dict[Tuple[str, PsiVec, LamMono], Fraction]):
        self.rows = dict(rows)

    def lookup(self, descriptor: str, psi: PsiVec, lam: LamMono) -> Fraction:
        key = (descriptor, tuple(psi), tuple(lam))
        if key not in self.rows:
            raise MissingCorrelator(f"no table row for {key}")
        return self.rows[key]

    @staticmethod
    def from_file(path) -> "TabulatedOracle":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise FileMalformed(f"cannot read correlator table {path}: {exc}")
        rows = {}
        if not isinstance(data, list):
            raise FileMalformed("correlator table must be a list of rows")
        for row in data:
            try:
                desc = row["vertex"]
                psi = tuple(int(p) for p in row.get("psi", []))
                lam = tuple((int(i), int(p)) for i, p in row.get("lambda", []))
                value = Fraction(row["value"])
            except (KeyError, TypeError, ValueError) as exc:
                raise FileMalformed(f"bad correlator row {row!r}: {exc}")
            rows[(desc, psi, lam)] = value
        return TabulatedOracle(rows)


# ---------------------------------------------------------------------------
# lambda-series expansion of a package's Hodge factor


def _lam_split(mono) -> Tuple[LamMono, tuple]:
    lam = []
    rest = []
    for v, e in mono:
        if v.kind == "lam":
            lam.append(((v.idx[1]), e))
        else:
            rest.append((v, e))
    return tuple(sorted(lam)), tuple(rest)


def _lam_weight(lam: LamMono) -> int:
    return sum(i * p for i, p in lam)


def _lam_mul(a: LamMono, b: LamMono) -> LamMono:
    merged: Dict[int, int] = {}
    for i, p in a:
        merged[i] = merged.get(i, 0) + p
    for i, p in b:
        merged[i] = merged.get(i, 0) + p
    return tuple(sorted(merged.items()))


def _series_of_poly(p: Polynomial, cut: int) -> Dict[LamMono, RatFunc]:
    out: Dict[LamMono, Polynomial] = {}
    for mono, c in p.terms.items():
        lam, rest = _lam_split(mono)
        if _lam_weight(lam) > cut:
            continue
        out[lam] = out.get(lam, Polynomial.zero()) + Polynomial({tuple(rest): c})
    return {lam: RatFunc.from_poly(q) for lam, q in out.items() if not q.is_zero()}


def _series_mul(a, b, cut: int) -> Dict[LamMono, RatFunc]:
    out: Dict[LamMono, RatFunc] = {}
    for la, ca in a.items():
        for lb, cb in b.items():
            lam = _lam_mul(la, lb)
            if _lam_weight(lam) > cut:
                continue
            out[lam] = out.get(lam, RatFunc.zero()) + ca * cb
    return {lam: c for lam, c in out.items() if not c.is_zero()}


def _series_inv(a, cut: int) -> Dict[LamMono, RatFunc]:
    c0 = a.get((), None)
    if c0 is None or c0.is_zero():
        raise ZeroDivisionError("lambda series has no invertible constant term")
    inv = {(): RatFunc.one() / c0}
    # solve (a * inv) = 1 weight by weight
    for w in range(1, cut + 1):
        for lam in {l for l in _all_weight_monos(a, cut) if _lam_weight(l) == w}:
            acc = RatFunc.zero()
            for la, ca in a.items():
                if not la or _lam_weight(la) > w:
                    continue
                need = _lam_minus(lam, la)
                if need is None:
                    continue
                acc = acc + ca * inv.get(need, RatFunc.zero())
            value = -acc / c0
            if not value.is_zero():
                inv[lam] = value
    return inv


def _lam_minus(a: LamMono, b: LamMono) -> Optional[LamMono]:
    da = dict(a)
    for i, p in b:
        if da.get(i, 0) < p:
            return None
        da[i] -= p
    return tuple(sorted((i, p) for i, p in da.items() if p))


def _all_weight_monos(a, cut: int) -> set:
    """All lambda monomials reachable as products of a's monomials, bounded."""
    out = {()}
    frontier = {()}
    gens = [l for l in a if l]
    while frontier:
        new = set()
        for base in frontier:
            for g in gens:
                m = _lam_mul(base, g)
                if _lam_weight(m) <= cut and m not in out:
                    new.add(m)
        out |= new
        frontier = new
    return out


def package_lambda_series(pkg: ModuliPackage, cut: int) -> Dict[LamMono, RatFunc]:
    """Truncated lambda expansion of the package's explicit Hodge factor."""
    series = {(): RatFunc.one()}
    num = _series_of_poly(pkg.hodge_factor.num, cut)
    series = _series_mul(series, num, cut)
    den = _series_of_poly(pkg.hodge_factor.den, cut)
    series = _series_mul(series, _series_inv(den, cut), cut)
    return series


# ---------------------------------------------------------------------------
# package resolution


def _psi_vectors(n_flags: int, cap: int):
    if n_flags == 0:
        yield ()
        return
    for total in range(0, cap + 1):
        for cuts in itertools.combinations_with_replacement(range(total + 1), n_flags - 1):
            parts = []
            prev = 0
            for c in cuts:
                parts.append(c - prev)
                prev = c
            parts.append(total - prev)
            yield tuple(parts)


def _package_dim(pkg: ModuliPackage) -> int:
    if pkg.kind in ("gw", "hodge"):
        # one vertex; every flag records the same owner data
        if pkg.flags:
            g, n = pkg.flags[0].owner_genus, pkg.flags[0].owner_valence
        else:
            g, n = _descriptor_gn(pkg.descriptor)
        return max(0, 3 * g - 3 + n)
    total = 0
    seen = set()
    for pf in pkg.flags:
        key = (pf.owner_genus, pf.owner_valence)
        if key not in seen:
            seen.add(key)
            total += max(0, 3 * pf.owner_genus - 3 + pf.owner_valence)
    return total


def _descriptor_gn(desc: str) -> Tuple[int, int]:
    inner = desc[desc.index("(") + 1 : desc.rindex(")")]
    fields = dict(part.split("=", 1) for part in inner.split(";"))
    return int(fields["g"]), int(fields["n"])


def resolve_package(pkg: ModuliPackage, oracle: TabulatedOracle) -> RatFunc:
    """Table-driven value of one stable-moduli block, exact in t (and h)."""
    cut = _package_dim(pkg)
    flags = sorted(pkg.flags, key=lambda pf: pf.flag)
    lam_series = package_lambda_series(pkg, cut) if not pkg.hodge_factor.is_one() else {(): RatFunc.one()}
    exact_dim = pkg.kind == "hodge"
    total = RatFunc.zero()
    for psi in _psi_vectors(len(flags), cut):
        weight_coeff = RatFunc.one()
        for pf, p in zip(flags, psi):
            weight_coeff = weight_coeff / pf.weight ** (p + 1)
        for lam, lam_coeff in lam_series.items():
            deg = sum(psi) + _lam_weight(lam)
            if deg > cut:
                continue
            if exact_dim and deg != cut:
                continue  # dies against the fundamental class by dimension
            value = oracle.lookup(pkg.descriptor, tuple(sorted(psi, reverse=True)), lam)
            if value:
                total = total + weight_coeff * lam_coeff * RatFunc.const(value)
    return total


# ---------------------------------------------------------------------------
# resolution of a whole contribution and the graph sum


@dataclass(frozen=True)
class ResolvedContribution:
    canonical: str
    fixed_signature: Tuple[Tuple[int, str], ...]
    symbolic: RatFunc  # prefactor * inverse Euler class, tokens included
    value: Optional[RatFunc]  # resolved value in zero/tabulated mode


def resolve(contribution: GraphContribution, oracle) -> ResolvedContribution:
    signature = tuple((f.sign, f.token) for f in contribution.fixed_part)
    sym = contribution.inverse_euler * RatFunc.const(contribution.prefactor)
    if oracle.mode == "symbolic":
        return ResolvedContribution(contribution.canonical, signature, sym, None)
    if oracle.mode == "zero":
        if contribution.packages:
            value = RatFunc.zero()
        else:
            value = sym
            for sign, token in signature:
                value = value * RatFunc.const(sign) * RatFunc.var(Variable.token(token))
        return ResolvedContribution(contribution.canonical, signature, sym, value)
    if oracle.mode != "tabulated":
        raise ValueError(f"unknown oracle mode {oracle.mode!r}")
    value = contribution.explicit_rest * RatFunc.const(contribution.prefactor)
    absorbed = {"class:" + pkg.descriptor for pkg in contribution.packages}
    for pkg in contribution.packages:
        value = value * resolve_package(pkg, oracle)
    for sign, token in signature:
        value = value * RatFunc.const(sign)
        if token not in absorbed:
            value = value * RatFunc.const(oracle.lookup(token.split(":", 1)[1], (), ()))
    return ResolvedContribution(contribution.canonical, signature, sym, value)


@dataclass(frozen=True)
class SumGroup:
    fixed_signature: Tuple[Tuple[int, str], ...]
    members: Tuple[str, ...]
    subtotal: RatFunc


@dataclass(frozen=True)
class SumReport:
    mode: str
    entries: Tuple[ResolvedContribution, ...]
    groups: Tuple[SumGroup, ...]
    total: Optional[RatFunc]


def sum_graphs(
    graphs: Sequence[DecoratedGraph],
    ws: WeightSystem,
    dd: DiscreteData,
    oracle=None,
    policies: Policies = DEFAULT_POLICIES,
    contributions: Optional[Sequence[GraphContribution]] = None,
) -> SumReport:
    """Ledger of per-graph localization terms, deterministically ordered.

    In symbolic mode token-bearing terms are only added within groups whose
    fixed parts match; in zero/tabulated mode the grand total is the exact
    sum of resolved values.  Two isomorphic inputs are an error.
    """
    oracle = oracle or SymbolicOracle()
    if contributions is None:
        contributions = [assemble_graph(g, ws, dd, policies) for g in graphs]
    seen = {}
    for c in contributions:
        if c.canonical in seen:
            raise DuplicateClass(f"two input graphs share canonical form {c.canonical[:16]}")
        seen[c.canonical] = c
    resolved = sorted(
        (resolve(c, oracle) for c in contributions), key=lambda r: r.canonical
    )
    groups: Dict[tuple, List[ResolvedContribution]] = {}
    for r in resolved:
        groups.setdefault(r.fixed_signature, []).append(r)
    group_rows = []
    for sig in sorted(groups, key=lambda s: repr(s)):
        members = groups[sig]
        subtotal = RatFunc.zero()
        for r in members:
            subtotal = subtotal + (r.value if r.value is not None else r.symbolic)
        group_rows.append(
            SumGroup(sig, tuple(r.canonical for r in members), subtotal)
        )
    total = None
    if oracle.mode in ("zero", "tabulated"):
        total = RatFunc.zero()
        for r in resolved:
            total = total + r.value
    return SumReport(oracle.mode, tuple(resolved), tuple(group_rows), total)
