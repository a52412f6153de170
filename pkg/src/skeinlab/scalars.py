"""Exact arithmetic in the fraction field Q(q, t).

Values are fractions of integer Laurent polynomials in the two commuting
variables q and t.  Every Scalar is kept in a canonical form (coprime
numerator/denominator, denominator a true polynomial touching both exponent
axes, positive leading coefficient, coefficient gcd 1), so equal values have
identical representations and can be compared or hashed directly.

Laurent polynomials are dicts mapping (q_exponent, t_exponent) to nonzero
integer coefficients.  The polynomial gcd needed for cancellation uses a
primitive pseudo-remainder sequence on a recursive dense representation,
which is plenty fast for the small supports that arise here.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd

from .errors import DivisionByZero, ParseError, PoleAtOne, SpecializationPole

# ---------------------------------------------------------------------------
# Laurent dictionaries: {(eq, et): coeff}


def _trim(d):
    return {k: c for k, c in d.items() if c}

def _add(a, b):
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, 0) + c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out

def _neg(a):
    return {k: -c for k, c in a.items()}

def _mul(a, b):
    if len(a) > len(b):
        a, b = b, a
    out = {}
    for (ea, ta), ca in a.items():
        for (eb, tb), cb in b.items():
            k = (ea + eb, ta + tb)
            s = out.get(k, 0) + ca * cb
            if s:
                out[k] = s
            else:
                del out[k]
    return out

def _mono_mul(a, eq, et, c=1):
    return {(e + eq, f + et): x * c for (e, f), x in a.items()}

def _grlex_key(k):
    return (k[0] + k[1], k[0])

def _lead_coeff(a):
    return a[max(a, key=_grlex_key)]

def _content(a):
    return reduce(gcd, (abs(c) for c in a.values()), 0)

def _min_exps(a):
    return (min(e for e, _ in a), min(f for _, f in a))


# ---------------------------------------------------------------------------
# Recursive dense polynomials for gcd: a poly in t with coeffs in Z[q],
# stored as a list (index = t-degree) of lists (index = q-degree) of ints.


def _u_trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p

def _u_add(a, b):
    n = max(len(a), len(b))
    return _u_trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])

def _u_neg(a):
    return [-c for c in a]

def _u_mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _u_trim(out)

def _u_scale(a, c):
    return [] if c == 0 else [x * c for x in a]

def _u_content(a):
    return reduce(gcd, (abs(c) for c in a), 0)

def _u_divexact(a, c):
    return [x // c for x in a]

def _u_poslead(a):
    return _u_neg(a) if a and a[-1] < 0 else list(a)

def _u_gcd(a, b):
    """gcd in Z[q], primitive PRS."""
    a, b = list(a), list(b)
    if not a:
        return _u_poslead(b)
    if not b:
        return _u_poslead(a)
    ca, cb = _u_content(a), _u_content(b)
    a, b = _u_divexact(a, ca), _u_divexact(b, cb)
    while b:
        a = _u_prem(a, b)
        if a:
            a = _u_divexact(a, _u_content(a))
        a, b = b, a
    a = _u_poslead(a)
    c = gcd(ca, cb)
    return _u_scale(a, c) if c != 1 else a

def _u_prim(a):
    if not a:
        return []
    c = _u_content(a)
    a = _u_divexact(a, c)
    if a[-1] < 0:
        a = _u_neg(a)
    return a

def _u_prem(a, b):
    """Pseudo-remainder of a by b in Z[q]."""
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(a) - 1 >= db and a:
        da, la = len(a) - 1, a[-1]
        a = _u_scale(a, lb)
        shift = da - db
        sub = [0] * shift + _u_scale(b, la)
        a = _u_add(a, _u_neg(sub))
        if len(a) - 1 == da:  # defensive; cancellation must occur
            a = _u_trim(a)
    return _u_trim(a)

def _r_trim(p):
    while p and not p[-1]:
        p.pop()
    return p

def _r_from_dict(a):
    """Laurent dict with min exponents (0,0)-shifted -> recursive dense."""
    if not a:
        return []
    dt = max(f for _, f in a)
    dq = max(e for e, _ in a)
    out = [[0] * (dq + 1) for _ in range(dt + 1)]
    for (e, f), c in a.items():
        out[f][e] = c
    return _r_trim([_u_trim(row) for row in out])

def _r_to_dict(p):
    out = {}
    for f, row in enumerate(p):
        for e, c in enumerate(row):
            if c:
                out[(e, f)] = c
    return out

def _r_mul(a, b):
    if not a or not b:
        return []
    out = [[] for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = _u_add(out[i + j], _u_mul(x, y))
    return _r_trim(out)

def _r_content(a):
    """Content of a in Z[q] (gcd of t-coefficients)."""
    c = []
    for row in a:
        c = _u_gcd(c, row)
        if c == [1]:
            break
    return c

def _r_prem(a, b):
    """Pseudo-remainder in (Z[q])[t]."""
    a = [list(r) for r in a]
    db, lb = len(b) - 1, b[-1]
    while a and len(a) - 1 >= db:
        da, la = len(a) - 1, a[-1]
        a = [_u_mul(r, lb) for r in a]
        shift = da - db
        sub = [[] for _ in range(shift)] + [_u_mul(r, la) for r in b]
        n = max(len(a), len(sub))
        a = _r_trim([_u_add(a[i] if i < len(a) else [], _u_neg(sub[i]) if i < len(sub) else []) for i in range(n)])
    return a

def _r_divexact_u(a, c):
    """Divide every coefficient by c in Z[q]; division must be exact."""
    return _r_trim([_u_divexact_poly(r, c) for r in a])

def _u_divexact_poly(a, b):
    """Exact division in Z[q]."""
    if not a:
        return []
    q_out = [0] * (len(a) - len(b) + 1)
    rem = list(a)
    lb = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        if len(rem) - 1 == i + len(b) - 1 and rem:
            c = rem[-1]
            assert c % lb == 0, "inexact division"
            q_out[i] = c // lb
            sub = [0] * i + _u_scale(b, q_out[i])
            rem = _u_add(rem, _u_neg(sub))
    assert not rem, "inexact division"
    return _u_trim(q_out)

def _r_gcd(a, b):
    """gcd in Z[q][t] via primitive PRS; result primitive up to q-content."""
    if not a:
        return b
    if not b:
        return a
    ca, cb = _r_content(a), _r_content(b)
    a = _r_divexact_u(a, ca)
    b = _r_divexact_u(b, cb)
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _r_prem(a, b)
        if r:
            r = _r_divexact_u(r, _r_content(r))
        a, b = b, r
    cg = _u_gcd(ca, cb)
    if cg and cg != [1]:
        a = [_u_mul(row, cg) for row in a]
    return a

def _r_divexact(a, b):
    """Exact division in Z[q][t] (a = b * result)."""
    if not a:
        return []
    out = [[] for _ in range(len(a) - len(b) + 1)]
    rem = [list(r) for r in a]
    lb = b[-1]
    while rem and len(rem) - 1 >= len(b) - 1:
        i = len(rem) - len(b)
        c = _u_divexact_poly(rem[-1], lb)
        out[i] = c
        sub = [[] for _ in range(i)] + [_u_mul(r, c) for r in b]
        n = max(len(rem), len(sub))
        rem = _r_trim([_u_add(rem[k] if k < len(rem) else [], _u_neg(sub[k]) if k < len(sub) else []) for k in range(n)])
    assert not rem, "inexact division"
    return _r_trim(out)

def _dict_gcd(a, b):
    """gcd of two Laurent dicts, as a polynomial dict (min exps (0,0) irrelevant:
    monomial factors are dropped, gcd taken of shifted polynomial parts)."""
    sa = _mono_mul(a, *(-e for e in _min_exps(a)))
    sb = _mono_mul(b, *(-e for e in _min_exps(b)))
    g = _r_gcd(_r_from_dict(sa), _r_from_dict(sb))
    return _r_to_dict(g)

def _dict_divexact(a, g):
    """Exact division of Laurent dict a by polynomial dict g."""
    ma = _min_exps(a)
    sa = _mono_mul(a, -ma[0], -ma[1])
    quot = _r_divexact(_r_from_dict(sa), _r_from_dict(g))
    return _mono_mul(_r_to_dict(quot), *ma)


# ---------------------------------------------------------------------------


class Scalar:
    """An element of Q(q, t) in canonical form.  Immutable and hashable."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _canonical=False):
        if den is None:
            den = {(0, 0): 1}
        if not den:
            raise DivisionByZero("zero denominator")
        if _canonical:
            self.num, self.den = num, den
        else:
            self.num, self.den = _canonicalize(_trim(dict(num)), _trim(dict(den)))
        self._hash = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_int(n):
        return _SMALL.get(n) or Scalar({(0, 0): n} if n else {})

    @staticmethod
    def monomial(eq=0, et=0, coeff=1):
        return Scalar({(eq, et): coeff} if coeff else {})

    @staticmethod
    def q_int(a):
        """The quantum integer (q^a - q^-a)/(q - q^-1), expanded."""
        if a == 0:
            return ZERO
        sign = 1 if a > 0 else -1
        n = abs(a)
        return Scalar({(n - 1 - 2 * k, 0): sign for k in range(n)})

    # -- ring / field operations -------------------------------------------

    def __add__(self, other):
        if self.den == other.den:
            return Scalar(_add(self.num, other.num), self.den)
        return Scalar(
            _add(_mul(self.num, other.den), _mul(other.num, self.den)),
            _mul(self.den, other.den),
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Scalar(_neg(self.num), dict(self.den), _canonical=True)

    def __mul__(self, other):
        return Scalar(_mul(self.num, other.num), _mul(self.den, other.den))

    def inv(self):
        if not self.num:
            raise DivisionByZero("inverse of zero")
        return Scalar(dict(self.den), dict(self.num))

    def __truediv__(self, other):
        return self * other.inv()

    def __pow__(self, n):
        if n < 0:
            return self.inv() ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- structure ----------------------------------------------------------

    def is_zero(self):
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        return isinstance(other, Scalar) and self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), frozenset(self.den.items())))
        return self._hash

    def bar(self):
        """The automorphism q -> q^-1, t -> t^-1."""
        return Scalar(
            {(-e, -f): c for (e, f), c in self.num.items()},
            {(-e, -f): c for (e, f), c in self.den.items()},
        )

    def involves_t(self):
        return any(f for _, f in self.num) or any(f for _, f in self.den)

    def specialize_t(self, d):
        """Substitute t = q^d; result involves q only."""
        num = {}
        for (e, f), c in self.num.items():
            k = (e + d * f, 0)
            s = num.get(k, 0) + c
            if s:
                num[k] = s
            else:
                del num[k]
        den = {}
        for (e, f), c in self.den.items():
            k = (e + d * f, 0)
            s = den.get(k, 0) + c
            if s:
                den[k] = s
            else:
                del den[k]
        if not den:
            raise SpecializationPole(f"denominator vanishes under t -> q^{d}")
        return Scalar(num, den)

    def eval_q1(self):
        """Exact value at q = 1 (for t-free scalars), cancelling (q-1) factors."""
        if self.involves_t():
            raise ValueError("eval_q1 requires a scalar free of t")
        num, den = self.num, self.den
        qm1 = {(1, 0): 1, (0, 0): -1}
        while True:
            n1 = sum(num.values())
            d1 = sum(den.values())
            if d1 != 0:
                return Fraction(n1, d1)
            if n1 != 0:
                raise PoleAtOne("pole at q = 1")
            num = _dict_divexact(num, qm1) if num else num
            den = _dict_divexact(den, qm1)
            if not num:
                if sum(den.values()) == 0:
                    # keep cancelling the denominator's (q-1) factors
                    continue
                return Fraction(0)

    # -- text form -----------------------------------------------------------

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        return format_scalar(self)


def _canonicalize(num, den):
    if not den:
        raise DivisionByZero("zero denominator")
    if not num:
        return {}, {(0, 0): 1}
    g = _dict_gcd(num, den)
    if len(g) > 1 or (len(g) == 1 and next(iter(g.items()))[1] not in (1, -1)):
        num = _dict_divexact(num, g)
        den = _dict_divexact(den, g)
    # integer content
    c = gcd(_content(num), _content(den))
    if c > 1:
        num = {k: x // c for k, x in num.items()}
        den = {k: x // c for k, x in den.items()}
    # denominator: polynomial touching both axes, positive leading coefficient
    mq, mt = _min_exps(den)
    if (mq, mt) != (0, 0):
        den = _mono_mul(den, -mq, -mt)
        num = _mono_mul(num, -mq, -mt)
    if _lead_coeff(den) < 0:
        den = _neg(den)
        num = _neg(num)
    return num, den


def format_laurent(d, compact=False):
    if not d:
        return "0"
    parts = []
    for (e, f), c in sorted(d.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True):
        factors = []
        if e:
            factors.append("q" if e == 1 else f"q^{e}")
        if f:
            factors.append("t" if f == 1 else f"t^{f}")
        mono = "*".join(factors)
        if not mono:
            term = str(abs(c))
        elif abs(c) == 1:
            term = mono
        else:
            term = f"{abs(c)}*{mono}"
        parts.append(("- " if c < 0 else "+ ") + term)
    s = " ".join(parts)
    s = "-" + s[2:] if s.startswith("- ") else s[2:]
    return s.replace(" ", "") if compact else s


def format_scalar(x, compact=False):
    if not x.num:
        return "0"
    num, den = x.num, x.den
    if den == {(0, 0): 1}:
        return format_laurent(num, compact)
    # shift num and den jointly so the denominator is balanced, e.g.
    # (q*t - q*t^-1)/(q^2 - 1) prints as (t - t^-1)/(q - q^-1)
    qs = [e for e, _ in den]
    ts = [f for _, f in den]
    sq, st = -((min(qs) + max(qs)) // 2), -((min(ts) + max(ts)) // 2)
    if sq or st:
        num = _mono_mul(num, sq, st)
        den = _mono_mul(den, sq, st)
    n = format_laurent(num, compact)
    d = format_laurent(den, compact)
    n = f"({n})" if ("+" in n[1:] or "-" in n[1:] or "*" in n) else n
    d = f"({d})" if ("+" in d[1:] or "-" in d[1:] or "*" in d) else d
    return f"{n}/{d}"


# ---------------------------------------------------------------------------
# Parser for the scalar text form: integers, q, t, ^, * (optional), + - /, parens.


class _Tok:
    def __init__(self, src):
        self.src = src
        self.pos = 0

    def peek(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def take(self):
        ch = self.peek()
        self.pos += 1
        return ch


def parse_scalar(text):
    tok = _Tok(text)
    val = _parse_sum(tok)
    if tok.peek():
        raise ParseError(f"trailing input in scalar at offset {tok.pos}", span=(tok.pos, len(text)))
    return val


def _parse_sum(tok):
    val = _parse_product(tok)
    while tok.peek() and tok.peek() in "+-":
        op = tok.take()
        rhs = _parse_product(tok)
        val = val + rhs if op == "+" else val - rhs
    return val


def _parse_product(tok):
    val = _parse_atom(tok)
    while True:
        ch = tok.peek()
        if ch == "*":
            tok.take()
            val = val * _parse_atom(tok)
        elif ch == "/":
            tok.take()
            val = val / _parse_atom(tok)
        elif ch.isdigit() or (ch and ch in "qt("):
            val = val * _parse_atom(tok)  # implicit product, e.g. "2q"
        else:
            return val


def _parse_atom(tok):
    ch = tok.peek()
    if ch == "(":
        tok.take()
        val = _parse_sum(tok)
        if tok.peek() != ")":
            raise ParseError(f"expected ')' at offset {tok.pos}", span=(tok.pos, tok.pos + 1))
        tok.take()
        return _maybe_power(tok, val)
    if ch == "-":
        tok.take()
        return -_parse_atom(tok)
    if ch.isdigit():
        n = 0
        while tok.peek().isdigit():
            n = 10 * n + int(tok.take())
        return _maybe_power(tok, Scalar.from_int(n))
    if ch and ch in "qt":
        tok.take()
        e = _parse_exponent(tok)
        return Scalar.monomial(eq=e) if ch == "q" else Scalar.monomial(et=e)
    raise ParseError(f"unexpected character {ch!r} at offset {tok.pos}", span=(tok.pos, tok.pos + 1))


def _parse_exponent(tok):
    if tok.peek() != "^":
        return 1
    tok.take()
    sign = 1
    if tok.peek() == "-":
        tok.take()
        sign = -1
    if not tok.peek().isdigit():
        raise ParseError(f"expected exponent at offset {tok.pos}", span=(tok.pos, tok.pos + 1))
    n = 0
    while tok.peek().isdigit():
        n = 10 * n + int(tok.take())
    return sign * n


def _maybe_power(tok, val):
    if tok.peek() == "^":
        return val ** _parse_exponent(tok)
    return val


# ---------------------------------------------------------------------------

ZERO = Scalar({})
ONE = Scalar({(0, 0): 1})
MINUS_ONE = Scalar({(0, 0): -1})
Q = Scalar.monomial(eq=1)
QI = Scalar.monomial(eq=-1)
T = Scalar.monomial(et=1)
TI = Scalar.monomial(et=-1)
Z = Scalar({(1, 0): 1, (-1, 0): -1})            # q - q^-1
BUBBLE = Scalar({(0, 1): 1, (0, -1): -1}, {(1, 0): 1, (-1, 0): -1})  # (t-t^-1)/(q-q^-1)

_SMALL = {0: ZERO, 1: ONE, -1: MINUS_ONE}
