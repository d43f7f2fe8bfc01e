"""Independent direct-product evaluators for the moving-part formulas.

Each function below is written straight from the raw product formulas,
parameterized by raw integers (degrees, delta sums, hours), sharing nothing
with the production code paths except the exact-arithmetic kernel.  The
audits compare these against the graph-driven implementations.
"""

from __future__ import annotations

import math
from fractions import Fraction

from msplocal.algebra import RatFunc, Variable, hodge_euler


def t(alpha):
    return RatFunc.var(Variable.equiv(alpha))


def indep_e01_final(ws, n_tori, alpha, d, s1, h):
    """01-edge factor, Euler-product indexing; s1 = primed delta sum at the level-1 end."""
    k = ws.k
    ta = t(alpha)
    num = RatFunc.one()
    for j in range(1, k * d - 1 - s1 + 1):
        num = num * (
            RatFunc.const(-k) * h
            + RatFunc.const(Fraction(s1, d)) * h
            + RatFunc.const(Fraction(j, d)) * (h + ta)
        )
    den = RatFunc.one()
    for a_i in ws.a:
        for j in range(1, a_i * d + 1):
            den = den * (RatFunc.const(a_i) * h - RatFunc.const(Fraction(j, d)) * (h + ta))
    for j in range(1, d + 1):
        den = den * RatFunc.const(Fraction(j, d)) * (h + ta)
    for beta in range(1, n_tori + 1):
        if beta != alpha:
            for j in range(1, d + 1):
                den = den * (RatFunc.const(Fraction(j, d)) * (h + ta) + t(beta) - ta)
    return num / den


def indep_e01_cohomology(ws, n_tori, alpha, d, delta, delta_rho, s1_rho_mix, s1, h):
    """01-edge factor with the direct-image numerator indexing.

    The range runs from 1 + delta + delta_rho to kd - 1 - delta - delta'_rho
    with summand ((-kd + delta' + delta'_rho + j) h + j t)/d; s1 is the
    primed sum, s1_rho_mix the primed rho flag alone.
    """
    k = ws.k
    ta = t(alpha)
    num = RatFunc.one()
    for j in range(1 + delta + delta_rho, k * d - 1 - delta - s1_rho_mix + 1):
        num = num * (
            RatFunc.const(Fraction(-k * d + s1 + j, d)) * h
            + RatFunc.const(Fraction(j, d)) * ta
        )
    den = RatFunc.one()
    for a_i in ws.a:
        for j in range(1, a_i * d + 1):
            den = den * (RatFunc.const(a_i) * h - RatFunc.const(Fraction(j, d)) * (h + ta))
    for j in range(1, d + 1):
        den = den * RatFunc.const(Fraction(j, d)) * (h + ta)
    for beta in range(1, n_tori + 1):
        if beta != alpha:
            for j in range(1, d + 1):
                den = den * (RatFunc.const(Fraction(j, d)) * (h + ta) + t(beta) - ta)
    return num / den


def indep_e1inf(ws, n_tori, alpha, dL, delta, s1):
    """1inf-edge factor, unified form; dL < 0, delta keyed to the far end."""
    k = ws.k
    ta = t(alpha)
    kd = int(k * dL)
    scale = kd - delta
    num = RatFunc.one()
    for a_i in ws.a:
        for j in range(1, math.ceil(-a_i * dL) - 1 + 1):
            num = num * (RatFunc.const(-a_i) * ta + RatFunc.const(Fraction(k * j, scale)) * ta)
    den = RatFunc.one()
    for j in range(1, -kd + s1 + 1):
        den = den * RatFunc.const(Fraction(-k * j, scale)) * ta
    for j in range(1, math.floor(-dL) + 1):
        den = den * RatFunc.const(Fraction(k * j, scale)) * ta
    for beta in range(1, n_tori + 1):
        if beta != alpha:
            den = den * (t(beta) - ta)
    return num / den


def indep_e11(ws, n_tori, alpha, beta, d, s_alpha, s_beta):
    """Mixed-hour edge factor; s_alpha/s_beta are the delta sums at the
    alpha-role and beta-role ends.  Ties with nonzero flags take the
    symmetric reindexing of the product (the documented convention)."""
    k = ws.k
    ta, tb = t(alpha), t(beta)
    pref = RatFunc.const(
        Fraction((-1) ** d * d ** (2 * d), math.factorial(d) ** 2)
    ) / (tb - ta) ** (2 * d)
    num = RatFunc.one()
    if s_alpha == s_beta != 0:
        for j in range(1, k * d - 1 - 2 * s_alpha + 1):
            num = num * (
                RatFunc.const(k) * tb + RatFunc.const(Fraction(s_beta + j, d)) * (ta - tb)
            )
    else:
        for j in range(1 + s_alpha, k * d - 1 - s_beta + 1):
            num = num * (
                RatFunc.const(k) * ta
                - RatFunc.const(Fraction(s_beta, d)) * ta
                - RatFunc.const(Fraction(j, d)) * (ta - tb)
            )
    den = RatFunc.one()
    for a_i in ws.a:
        for a in range(0, a_i * d + 1):
            b = a_i * d - a
            den = den * (RatFunc.const(Fraction(-a, d)) * ta + RatFunc.const(Fraction(-b, d)) * tb)
    for gamma in range(1, n_tori + 1):
        if gamma in (alpha, beta):
            continue
        for a in range(0, d + 1):
            b = d - a
            den = den * (
                t(gamma) - RatFunc.const(Fraction(a, d)) * ta - RatFunc.const(Fraction(b, d)) * tb
            )
    return pref * num / den


def indep_level1_vertex(ws, n_tori, alpha, genus, n_edges, vertex):
    k = ws.k
    ta = t(alpha)
    out = RatFunc.one()
    for a_i in ws.a:
        c = RatFunc.const(-a_i) * ta
        out = out * RatFunc.from_poly(hodge_euler(genus, c, True, vertex)) / c
    kt = RatFunc.const(k) * ta
    out = out * kt / (RatFunc.from_poly(hodge_euler(genus, kt, False, vertex)) * kt ** n_edges)
    for beta in range(1, n_tori + 1):
        if beta != alpha:
            c = t(beta) - ta
            out = out * RatFunc.from_poly(hodge_euler(genus, c, True, vertex)) / c
    return out


def indep_node_level0(n_tori, h):
    out = RatFunc.one()
    for alpha in range(1, n_tori + 1):
        out = out * (h + t(alpha))
    return out


def indep_node_level1(ws, n_tori, alpha):
    coeff = -ws.k
    for a_i in ws.a:
        coeff *= a_i
    out = RatFunc.const(coeff) * t(alpha) ** 6
    for beta in range(1, n_tori + 1):
        if beta != alpha:
            out = out * (t(alpha) - t(beta))
    return out


def indep_node_levelinf(n_tori, alpha):
    out = RatFunc.one()
    for beta in range(1, n_tori + 1):
        if beta != alpha:
            out = out * (t(beta) - t(alpha))
    return out
