"""Weight systems, discrete data, and the moduli-selector arithmetic.

A weight system is a tuple a = (a_1..a_5) of positive integers with every
a_i dividing k = sum(a_i); the Fermat exponents are b_i = k/a_i.  Three
weight systems are first-class here, plus (1,1,1,1,1) kept for cross-checks
against the quintic literature.  Discrete data (g, markings, d0, dinf, N)
selects one moduli problem; both degrees are exact rationals with
denominator dividing k.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import InvalidMarking

PRESET_WEIGHTS = ((1, 1, 1, 1, 2), (1, 1, 1, 1, 4), (1, 1, 1, 2, 5))
CROSSCHECK_WEIGHTS = (1, 1, 1, 1, 1)


@dataclass(frozen=True)
class WeightSystem:
    a: tuple
    k: int
    b: tuple
    # True only for the three supported tuples; (1,1,1,1,1) is accepted but
    # flagged so downstream consumers can tell cross-check runs apart.
    standard: bool

    @staticmethod
    def of(a: Sequence[int]) -> "WeightSystem":
        a = tuple(int(x) for x in a)
        if len(a) != 5 or any(x <= 0 for x in a):
            raise ValueError("weight system needs five positive integers")
        k = sum(a)
        if any(k % x for x in a):
            raise ValueError(f"every weight must divide k={k}; got {a}")
        return WeightSystem(a=a, k=k, b=tuple(k // x for x in a), standard=a in PRESET_WEIGHTS)

    def narrow_exponents(self) -> tuple:
        """All m in 1..k-1 whose k-th root of unity lies in no mu_{a_i}."""
        return tuple(m for m in range(1, self.k) if is_narrow_exponent(self, m))


def presets() -> tuple:
    return tuple(WeightSystem.of(a) for a in PRESET_WEIGHTS)


def is_narrow_exponent(ws: WeightSystem, m: int) -> bool:
    """zeta_k^m avoids every mu_{a_i}, i.e. m*a_i is never 0 mod k."""
    if not 1 <= m < ws.k:
        return False
    return all((m * a) % ws.k for a in ws.a)


@dataclass(frozen=True)
class Marking:
    """One insertion: either the (1,rho) unit or a stacky narrow marking."""

    sector: str  # "rho" | "narrow"
    m: int = 0

    @staticmethod
    def rho_unit() -> "Marking":
        return Marking("rho", 0)

    @staticmethod
    def narrow(m: int, ws: WeightSystem) -> "Marking":
        if not is_narrow_exponent(ws, m):
            raise InvalidMarking(f"m={m} is not narrow for weights {ws.a} (k={ws.k})")
        return Marking("narrow", m)

    @property
    def is_stacky(self) -> bool:
        return self.sector == "narrow"

    def render(self) -> str:
        return "rho" if self.sector == "rho" else f"narrow:{self.m}"

    @staticmethod
    def parse(text: str, ws: WeightSystem) -> "Marking":
        if text == "rho":
            return Marking.rho_unit()
        if text.startswith("narrow:"):
            return Marking.narrow(int(text.split(":", 1)[1]), ws)
        raise InvalidMarking(f"unknown marking {text!r}")


@dataclass(frozen=True)
class DiscreteData:
    genus: int
    markings: tuple
    d0: Fraction
    dinf: Fraction
    n_tori: int

    @staticmethod
    def of(
        genus: int,
        markings: Iterable[Marking],
        d0: Fraction,
        dinf: Fraction,
        n_tori: int,
        ws: Optional[WeightSystem] = None,
    ) -> "DiscreteData":
        dd = DiscreteData(int(genus), tuple(markings), Fraction(d0), Fraction(dinf), int(n_tori))
        if dd.genus < 0 or dd.n_tori < 1:
            raise ValueError("genus must be >= 0 and N >= 1")
        if ws is not None:
            dd.check(ws)
        return dd

    def check(self, ws: WeightSystem) -> None:
        for d in (self.d0, self.dinf):
            if ws.k % d.denominator:
                raise ValueError(f"degree {d} is not in (1/{ws.k})Z")
        for mk in self.markings:
            if mk.is_stacky and not is_narrow_exponent(ws, mk.m):
                raise InvalidMarking(f"marking {mk.render()} invalid for k={ws.k}")

    @property
    def n_legs(self) -> int:
        return len(self.markings)


def virtual_dimension(ws: WeightSystem, dd: DiscreteData) -> Fraction:
    """N*d0 + N*(1-g) + dinf + ell - 4 * sum(m_i/k) over stacky insertions."""
    dd.check(ws)
    stacky = Fraction(sum(mk.m for mk in dd.markings if mk.is_stacky), ws.k)
    return (
        dd.n_tori * dd.d0
        + dd.n_tori * (1 - dd.genus)
        + dd.dinf
        + dd.n_legs
        - 4 * stacky
    )


def cosection_pairing(
    ws: WeightSystem,
    phi: Sequence[Fraction],
    rho: Fraction,
    phidot: Sequence[Fraction],
    rhodot: Fraction,
) -> Fraction:
    """sum_i b_i * rho * phi_i^(b_i-1) * phidot_i + rhodot * sum_i phi_i^b_i.

    A desk-scale witness of the pairing's shape over exact rationals; it
    vanishes identically along the Euler direction phidot_i = a_i phi_i,
    rhodot = -k rho by quasi-homogeneity.
    """
    phi = [Fraction(x) for x in phi]
    phidot = [Fraction(x) for x in phidot]
    rho = Fraction(rho)
    rhodot = Fraction(rhodot)
    if len(phi) != 5 or len(phidot) != 5:
        raise ValueError("phi and phidot must have five entries")
    first = sum(b * rho * phi_i ** (b - 1) * dot for b, phi_i, dot in zip(ws.b, phi, phidot))
    second = rhodot * sum(phi_i ** b for b, phi_i in zip(ws.b, phi))
    return first + second


@dataclass(frozen=True)
class NarrownessReport:
    narrow: bool
    stacky_count: int
    classification: tuple  # per marking: "rho-unit" | "narrow"


def is_narrow(dd: DiscreteData) -> NarrownessReport:
    """Stacky-part narrowness plus a per-marking classification.

    Broad markings cannot be constructed, so the stacky part is narrow by
    construction; rho-unit insertions are reported separately rather than
    counted as stacky.
    """
    tags = tuple("narrow" if mk.is_stacky else "rho-unit" for mk in dd.markings)
    return NarrownessReport(
        narrow=True,
        stacky_count=sum(1 for mk in dd.markings if mk.is_stacky),
        classification=tags,
    )


def random_discrete_data(ws: WeightSystem, rng: random.Random, max_numer: int = 24) -> DiscreteData:
    """Seeded sampler used by the randomized verification suites."""
    genus = rng.randrange(0, 4)
    n_tori = rng.randrange(1, 4)
    narrow = ws.narrow_exponents()
    markings = []
    for _ in range(rng.randrange(0, 4)):
        if narrow and rng.random() < 0.5:
            markings.append(Marking.narrow(rng.choice(narrow), ws))
        else:
            markings.append(Marking.rho_unit())
    d0 = Fraction(rng.randrange(0, max_numer), ws.k)
    dinf = Fraction(rng.randrange(-max_numer, max_numer), ws.k)
    return DiscreteData.of(genus, markings, d0, dinf, n_tori, ws)
