"""Exact sparse multivariate polynomials and rational functions.

Coefficients are `fractions.Fraction` (unbounded exact rationals), so overflow
is impossible and no floating point enters anywhere.  A polynomial is a map
from monomials to coefficients; a monomial is a tuple of (Variable, exponent)
pairs sorted by the fixed variable order, exponents positive:

    3/2 * t_1^2 * h_0  ->  {((t_1, 2), (h_0, 1)): Fraction(3, 2)}

The zero polynomial stores no terms.  The canonical term order is graded
lexicographic: higher total degree first; on ties, walk the variables in
ascending variable order and the monomial with the larger exponent at the
first difference is the larger term.  The variable order is by kind

    EquivParam < Hyperplane < Psi < Lambda < CorrelatorToken

and then by index within a kind.  Rational functions are pairs num/den with
den never zero and the leading coefficient of den normalized to 1; equality
is decided by cross-multiplication, never by syntactic identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Union

from .errors import DenominatorVanishes, DivisionByZero, ParseError

_KIND_RANK = {"t": 0, "h": 1, "psi": 2, "lam": 3, "tok": 4}

Scalar = Union[int, Fraction]


@dataclass(frozen=True)
class Variable:
    """A formal variable; identity is structural (kind plus full index)."""

    kind: str
    idx: tuple

    def __post_init__(self) -> None:
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown variable kind {self.kind!r}")

    @staticmethod
    def equiv(alpha: int) -> "Variable":
        """Torus weight t_alpha, alpha in 1..N."""
        return Variable("t", (alpha,))

    @staticmethod
    def hyperplane(edge: int) -> "Variable":
        """Evaluation hyperplane class h attached to an edge."""
        return Variable("h", (edge,))

    @staticmethod
    def psi(edge: int, end: int) -> "Variable":
        """Cotangent psi class attached to the flag (edge, end)."""
        return Variable("psi", (edge, end))

    @staticmethod
    def lam(vertex: int, i: int) -> "Variable":
        """Hodge class lambda_i of the rank-g bundle at a vertex; 1 <= i <= g."""
        if i < 1:
            raise ValueError("lambda index must be >= 1")
        return Variable("lam", (vertex, i))

    @staticmethod
    def token(name: str) -> "Variable":
        """Opaque correlator token; the name may not contain '{' or '}'."""
        if "{" in name or "}" in name:
            raise ValueError("token names may not contain braces")
        return Variable("tok", (name,))

    @property
    def sort_key(self) -> tuple:
        return (_KIND_RANK[self.kind], self.idx)

    def render(self) -> str:
        if self.kind == "t":
            return f"t_{self.idx[0]}"
        if self.kind == "h":
            return f"h_{self.idx[0]}"
        if self.kind == "psi":
            return f"psi_{self.idx[0]}_{self.idx[1]}"
        if self.kind == "lam":
            return f"lam_{self.idx[0]}_{self.idx[1]}"
        return "tok{%s}" % self.idx[0]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.render()


# A monomial: ((Variable, exponent), ...) sorted by variable sort key.
Monomial = tuple

_EMPTY_MONO: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    merged: dict = {}
    for v, e in a:
        merged[v] = merged.get(v, 0) + e
    for v, e in b:
        merged[v] = merged.get(v, 0) + e
    return tuple(sorted(((v, e) for v, e in merged.items() if e), key=lambda p: p[0].sort_key))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_weighted_degree(m: Monomial, grading: Callable[[Variable], int]) -> int:
    return sum(e * grading(v) for v, e in m)


def _mono_grlex_gt(a: Monomial, b: Monomial) -> bool:
    """True when a > b in graded lex order."""
    da, db = _mono_degree(a), _mono_degree(b)
    if da != db:
        return da > db
    ia, ib = 0, 0
    while ia < len(a) or ib < len(b):
        if ia == len(a):
            # a has exponent 0 on b's next (smaller-ordered) variable
            return False
        if ib == len(b):
            return True
        va, ea = a[ia]
        vb, eb = b[ib]
        ka, kb = va.sort_key, vb.sort_key
        if ka == kb:
            if ea != eb:
                return ea > eb
            ia += 1
            ib += 1
        elif ka < kb:
            return True  # a has positive exponent on an earlier variable
        else:
            return False
    return False


def _sorted_terms(terms: Mapping[Monomial, Fraction]) -> list:
    """Terms sorted descending in the canonical graded-lex order."""
    import functools

    def cmp(x, y):
        if x[0] == y[0]:
            return 0
        return -1 if _mono_grlex_gt(x[0], y[0]) else 1

    return sorted(terms.items(), key=functools.cmp_to_key(cmp))


class Polynomial:
    """Sparse exact polynomial; immutable after construction."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, Fraction]] = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[m] = c
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *a):  # noqa: D105
        raise AttributeError("Polynomial is immutable")

    # -- constructors -----------------------------------------------------
    @staticmethod
    def zero() -> "Polynomial":
        return _P_ZERO

    @staticmethod
    def one() -> "Polynomial":
        return _P_ONE

    @staticmethod
    def const(c: Scalar) -> "Polynomial":
        c = Fraction(c)
        return Polynomial({_EMPTY_MONO: c}) if c else _P_ZERO

    @staticmethod
    def variable(v: Variable) -> "Polynomial":
        return Polynomial({((v, 1),): Fraction(1)})

    # -- predicates --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {_EMPTY_MONO: Fraction(1)}

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _EMPTY_MONO in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.terms.get(_EMPTY_MONO, Fraction(0))

    def variables(self) -> set:
        out = set()
        for m in self.terms:
            for v, _ in m:
                out.add(v)
        return out

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, Fraction(0)) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        if not self.terms or not other.terms:
            return _P_ZERO
        out: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = _mono_mul(ma, mb)
                s = out.get(m, Fraction(0)) + ca * cb
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Polynomial(out)

    def scale(self, c: Scalar) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return _P_ZERO
        return Polynomial({m: q * c for m, q in self.terms.items()})

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power of a polynomial; use RatFunc")
        result = _P_ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        h = object.__getattribute__(self, "_hash")
        if h is None:
            h = hash(frozenset(self.terms.items()))
            object.__setattr__(self, "_hash", h)
        return h

    # -- term order ----------------------------------------------------------
    def leading(self) -> tuple:
        """(monomial, coefficient) of the graded-lex leading term."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        best = None
        for m in self.terms:
            if best is None or _mono_grlex_gt(m, best):
                best = m
        return best, self.terms[best]

    def homogeneous_degree(self, grading: Callable[[Variable], int]) -> Optional[int]:
        """Weighted degree when all terms agree, else None; zero reports 0."""
        if not self.terms:
            return 0
        degs = {_mono_weighted_degree(m, grading) for m in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def substitute_poly(self, bindings: Mapping[Variable, "RatFunc"]) -> "RatFunc":
        out = RatFunc.zero()
        for m, c in self.terms.items():
            term = RatFunc.const(c)
            for v, e in m:
                if v in bindings:
                    term = term * bindings[v] ** e
                else:
                    term = term * RatFunc.from_poly(Polynomial({((v, e),): Fraction(1)}))
            out = out + term
        return out

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in _sorted_terms(self.terms):
            factors = [str(c)] if (c != 1 or not m) else []
            if c == -1 and m:
                factors = ["-1"]
            for v, e in m:
                factors.append(v.render() if e == 1 else f"{v.render()}^{e}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.render()


_P_ZERO = Polynomial.__new__(Polynomial)
object.__setattr__(_P_ZERO, "terms", {})
object.__setattr__(_P_ZERO, "_hash", None)
_P_ONE = Polynomial.__new__(Polynomial)
object.__setattr__(_P_ONE, "terms", {_EMPTY_MONO: Fraction(1)})
object.__setattr__(_P_ONE, "_hash", None)


_DIV_ATTEMPT_LIMIT = 1600  # skip speculative division on big operands


def _poly_exact_div(num: Polynomial, den: Polynomial) -> Optional[Polynomial]:
    """num / den when den divides num exactly, else None.

    Speculative: returns None rather than working hard on large operands;
    callers only use this for lazy cancellation, never for correctness.
    """
    if den.is_zero():
        return None
    if den.is_constant():
        return num.scale(1 / den.constant_value())
    if num.is_zero():
        return _P_ZERO
    if len(num.terms) * len(den.terms) > _DIV_ATTEMPT_LIMIT:
        return None
    lead_m, lead_c = den.leading()
    lead_vars = dict(lead_m)
    quotient: dict = {}
    rest = num
    # Bounded by the number of terms of the quotient; bail out on failure.
    for _ in range(len(num.terms) * 2 + 8):
        if rest.is_zero():
            return Polynomial(quotient)
        rm, rc = rest.leading()
        rvars = dict(rm)
        q_exp = {}
        ok = True
        for v, e in lead_vars.items():
            if rvars.get(v, 0) < e:
                ok = False
                break
            q_exp[v] = rvars[v] - e
        if not ok:
            return None
        for v, e in rvars.items():
            if v not in lead_vars:
                q_exp[v] = e
        qm = tuple(sorted(((v, e) for v, e in q_exp.items() if e), key=lambda p: p[0].sort_key))
        qc = rc / lead_c
        quotient[qm] = quotient.get(qm, Fraction(0)) + qc
        rest = rest - den * Polynomial({qm: qc})
    return None


def _mono_gcd(polys: Iterable[Polynomial]) -> Monomial:
    common: Optional[dict] = None
    for p in polys:
        for m in p.terms:
            d = dict(m)
            if common is None:
                common = d
            else:
                common = {v: min(e, d.get(v, 0)) for v, e in common.items() if d.get(v, 0)}
        if not common:
            return _EMPTY_MONO
    if not common:
        return _EMPTY_MONO
    return tuple(sorted(((v, e) for v, e in common.items() if e), key=lambda p: p[0].sort_key))


def _mono_quotient(p: Polynomial, m: Monomial) -> Polynomial:
    if not m:
        return p
    drop = dict(m)
    out = {}
    for mono, c in p.terms.items():
        d = dict(mono)
        for v, e in drop.items():
            d[v] -= e
        out[tuple(sorted(((v, e) for v, e in d.items() if e), key=lambda q: q[0].sort_key))] = c
    return Polynomial(out)


class RatFunc:
    """Exact rational function num/den in canonical form.

    Cancellation is lazy: only the shared monomial factor, rational content,
    and exact single-divisor division are attempted.  Equality is decided by
    cross-multiplying, so unreduced representatives still compare correctly.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial):
        if den.is_zero():
            raise DivisionByZero("zero denominator")
        if num.is_zero():
            num, den = _P_ZERO, _P_ONE
        else:
            g = _mono_gcd([num, den])
            if g:
                num, den = _mono_quotient(num, g), _mono_quotient(den, g)
            q = _poly_exact_div(num, den)
            if q is not None:
                num, den = q, _P_ONE
            else:
                q = _poly_exact_div(den, num)
                if q is not None and not q.is_constant():
                    num, den = _P_ONE, q
        if not den.is_one():
            _, lc = den.leading()
            if lc != 1:
                num = num.scale(1 / lc)
                den = den.scale(1 / lc)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *a):  # noqa: D105
        raise AttributeError("RatFunc is immutable")

    # -- constructors -----------------------------------------------------
    @staticmethod
    def zero() -> "RatFunc":
        return _R_ZERO

    @staticmethod
    def one() -> "RatFunc":
        return _R_ONE

    @staticmethod
    def const(c: Scalar) -> "RatFunc":
        return RatFunc(Polynomial.const(c), _P_ONE)

    @staticmethod
    def from_poly(p: Polynomial) -> "RatFunc":
        return RatFunc(p, _P_ONE)

    @staticmethod
    def var(v: Variable) -> "RatFunc":
        return RatFunc(Polynomial.variable(v), _P_ONE)

    @staticmethod
    def coerce(x: Union["RatFunc", Polynomial, Scalar]) -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, Polynomial):
            return RatFunc.from_poly(x)
        return RatFunc.const(x)

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num == self.den

    def variables(self) -> set:
        return self.num.variables() | self.den.variables()

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "RatFunc":
        other = RatFunc.coerce(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __radd__(self, other) -> "RatFunc":
        return self + other

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other) -> "RatFunc":
        return self + (-RatFunc.coerce(other))

    def __rsub__(self, other) -> "RatFunc":
        return RatFunc.coerce(other) - self

    def __mul__(self, other) -> "RatFunc":
        other = RatFunc.coerce(other)
        if self.is_zero() or other.is_zero():
            return _R_ZERO
        return RatFunc(self.num * other.num, self.den * other.den)

    def __rmul__(self, other) -> "RatFunc":
        return self * other

    def inv(self) -> "RatFunc":
        if self.is_zero():
            raise DivisionByZero("inverting zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other) -> "RatFunc":
        other = RatFunc.coerce(other)
        if other.is_zero():
            raise DivisionByZero("dividing by zero")
        return self * other.inv()

    def __rtruediv__(self, other) -> "RatFunc":
        return RatFunc.coerce(other) / self

    def __pow__(self, n: int) -> "RatFunc":
        if n == 0:
            return _R_ONE
        if n < 0:
            return self.inv() ** (-n)
        return RatFunc(self.num ** n, self.den ** n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (RatFunc, Polynomial, int, Fraction)):
            return NotImplemented
        other = RatFunc.coerce(other)
        return self.num * other.den == other.num * self.den

    def __hash__(self) -> int:
        # Hash must agree for unreduced equal representatives; constants are
        # the only case the engine puts in hash-based containers.
        if self.num.is_constant() and self.den.is_constant():
            return hash(self.num.constant_value() / self.den.constant_value())
        return hash((len(self.num.terms), len(self.den.terms)))

    def render(self) -> str:
        if self.den.is_one():
            return f"({self.num.render()})"
        return f"({self.num.render()}) / ({self.den.render()})"

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.render()


_R_ZERO = RatFunc.__new__(RatFunc)
object.__setattr__(_R_ZERO, "num", _P_ZERO)
object.__setattr__(_R_ZERO, "den", _P_ONE)
_R_ONE = RatFunc.__new__(RatFunc)
object.__setattr__(_R_ONE, "num", _P_ONE)
object.__setattr__(_R_ONE, "den", _P_ONE)


def _rename_target(r: "RatFunc") -> Optional[Variable]:
    if not r.den.is_one() or len(r.num.terms) != 1:
        return None
    ((mono, c),) = tuple(r.num.terms.items())
    if c != 1 or len(mono) != 1 or mono[0][1] != 1:
        return None
    return mono[0][0]


def _rename_poly(p: Polynomial, table: Mapping[Variable, Variable]) -> Polynomial:
    out: dict = {}
    for mono, c in p.terms.items():
        merged: dict = {}
        for v, e in mono:
            w = table.get(v, v)
            merged[w] = merged.get(w, 0) + e
        key = tuple(sorted(merged.items(), key=lambda q: q[0].sort_key))
        out[key] = out.get(key, Fraction(0)) + c
    return Polynomial(out)


def substitute(f: RatFunc, bindings: Mapping[Variable, RatFunc]) -> RatFunc:
    """Substitute bindings into f exactly; unbound variables pass through.

    Raises DenominatorVanishes when the bound denominator becomes zero.
    Pure variable renamings take a direct monomial-rewriting path.
    """
    bindings = {v: RatFunc.coerce(x) for v, x in bindings.items()}
    renames = {v: _rename_target(x) for v, x in bindings.items()}
    if all(w is not None for w in renames.values()):
        num = _rename_poly(f.num, renames)
        den = _rename_poly(f.den, renames)
        if den.is_zero():
            raise DenominatorVanishes("substitution made the denominator zero")
        return RatFunc(num, den)
    num = f.num.substitute_poly(bindings)
    den = f.den.substitute_poly(bindings)
    if den.is_zero():
        raise DenominatorVanishes("substitution made the denominator zero")
    return num / den


def homogeneous_degree(
    f: RatFunc, grading: Callable[[Variable], int]
) -> Optional[int]:
    """deg(num) - deg(den) under the grading, or None when not homogeneous."""
    dn = f.num.homogeneous_degree(grading)
    dd = f.den.homogeneous_degree(grading)
    if dn is None or dd is None:
        return None
    return dn - dd


def standard_grading(v: Variable) -> int:
    """Degree 1 for t/h/psi, i for lambda_i, 0 for correlator tokens."""
    if v.kind == "lam":
        return v.idx[1]
    if v.kind == "tok":
        return 0
    return 1


def hodge_euler(g: int, c: RatFunc, dual: bool, vertex: int) -> Polynomial:
    """Equivariant Euler class of the rank-g Hodge bundle twisted by weight c.

    Returns sum_{i=0..g} s_i * lam_{vertex,i} * c^(g-i) with lam_0 = 1 and
    s_i = (-1)^i for the dual bundle, +1 otherwise.  c must be a linear form
    in the torus weights.
    """
    if g < 0:
        raise ValueError("genus must be nonnegative")
    c = RatFunc.coerce(c)
    if not c.den.is_one():
        raise ValueError("twist weight must be polynomial")
    cp = c.num
    if any(v.kind != "t" for v in cp.variables()) or cp.homogeneous_degree(lambda v: 1) not in (0, 1):
        raise ValueError("twist weight must be a linear form in the torus weights")
    out = Polynomial.zero()
    for i in range(g + 1):
        sign = Fraction(-1) ** i if dual else Fraction(1)
        piece = (cp ** (g - i)).scale(sign)
        if i > 0:
            piece = piece * Polynomial.variable(Variable.lam(vertex, i))
        out = out + piece
    return out


# --------------------------------------------------------------------------
# Stable textual rendering and its round-trip parser.

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<name>t_\d+|h_\d+|psi_\d+_\d+|lam_\d+_\d+|tok\{[^{}]*\})"
    r"|(?P<op>[-+*/^()]))"
)


def render(f: RatFunc) -> str:
    return f.render()


class _Parser:
    def __init__(self, text: str):
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise ParseError(f"bad token at {text[pos:pos + 20]!r}")
                break
            self.tokens.append(m)
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.i += 1
        return tok

    def parse(self) -> RatFunc:
        out = self.expr()
        if self.peek() is not None:
            raise ParseError("trailing input")
        return out

    def expr(self) -> RatFunc:
        # unary minus handled by a leading zero
        tok = self.peek()
        if tok is not None and tok.group("op") == "-":
            self.next()
            value = -self.term()
        else:
            value = self.term()
        while True:
            tok = self.peek()
            if tok is None or tok.group("op") not in ("+", "-"):
                return value
            op = self.next().group("op")
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs

    def term(self) -> RatFunc:
        value = self.factor()
        while True:
            tok = self.peek()
            if tok is None or tok.group("op") not in ("*", "/"):
                return value
            op = self.next().group("op")
            rhs = self.factor()
            value = value * rhs if op == "*" else value / rhs

    def factor(self) -> RatFunc:
        base = self.atom()
        tok = self.peek()
        if tok is not None and tok.group("op") == "^":
            self.next()
            neg = False
            tok = self.peek()
            if tok is not None and tok.group("op") == "-":
                self.next()
                neg = True
            etok = self.next()
            if not etok.group("int"):
                raise ParseError("exponent must be an integer")
            e = int(etok.group("int"))
            return base ** (-e if neg else e)
        return base

    def atom(self) -> RatFunc:
        tok = self.next()
        if tok.group("int"):
            return RatFunc.const(int(tok.group("int")))
        if tok.group("name"):
            return RatFunc.var(_variable_from_name(tok.group("name")))
        if tok.group("op") == "(":
            value = self.expr()
            closing = self.next()
            if closing.group("op") != ")":
                raise ParseError("expected ')'")
            return value
        if tok.group("op") == "-":
            return -self.atom()
        raise ParseError(f"unexpected token {tok.group(0)!r}")


def _variable_from_name(name: str) -> Variable:
    if name.startswith("tok{"):
        return Variable.token(name[4:-1])
    if name.startswith("t_"):
        return Variable.equiv(int(name[2:]))
    if name.startswith("h_"):
        return Variable.hyperplane(int(name[2:]))
    if name.startswith("psi_"):
        a, b = name[4:].split("_")
        return Variable.psi(int(a), int(b))
    a, b = name[4:].split("_")
    return Variable.lam(int(a), int(b))


def parse(text: str) -> RatFunc:
    """Parse the stable rendering back into a RatFunc."""
    return _Parser(text).parse()
