"""Multivariate polynomials over Q(i) in the graded variables z, zb, u, pi.

The weight (anisotropic order) of a monomial is deg_z + deg_zb + 2*deg_u; the
constant pi carries weight 0, is fixed by conjugation and killed by every
derivative. It exists so that expressions like 1/(2*pi*rho^2) stay exact.

Terms are stored sparsely as {(ez, ezb, eu, epi): GaussRational} with no zero
coefficients. Polynomials are treated as immutable once built.
"""

from __future__ import annotations

from .gauss import GR_ONE, GR_ZERO, GaussRational

VARS = ("z", "zb", "u", "pi")
_SLOT = {"z": 0, "zb": 1, "u": 2, "pi": 3}
_WEIGHT = (1, 1, 2, 0)


def wdeg(exps):
    return exps[0] + exps[1] + 2 * exps[2]


class Poly:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        t = {}
        if terms:
            for exps, c in terms.items():
                if not isinstance(c, GaussRational):
                    c = GaussRational(c)
                if not c.is_zero():
                    t[exps] = c
        object.__setattr__(self, "terms", t)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def const(cls, c):
        if not isinstance(c, GaussRational):
            c = GaussRational(c)
        return cls({(0, 0, 0, 0): c})

    @classmethod
    def var(cls, name):
        e = [0, 0, 0, 0]
        e[_SLOT[name]] = 1
        return cls({tuple(e): GR_ONE})

    @classmethod
    def monomial(cls, coeff, ez=0, ezb=0, eu=0, epi=0):
        return cls({(ez, ezb, eu, epi): coeff})

    # -- ring operations -------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, GaussRational)):
            return Poly.const(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        t = dict(self.terms)
        for exps, c in o.terms.items():
            nc = t.get(exps, GR_ZERO) + c
            if nc.is_zero():
                t.pop(exps, None)
            else:
                t[exps] = nc
        return Poly(t)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __neg__(self):
        return Poly({e: -c for e, c in self.terms.items()})

    def mul(self, other, order=None):
        """Product, optionally dropping monomials of weight >= order."""
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot multiply Poly by {type(other).__name__}")
        a, b = self.terms, o.terms
        if len(a) > len(b):
            a, b = b, a
        t = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3])
                if order is not None and wdeg(e) >= order:
                    continue
                nc = t.get(e, GR_ZERO) + c1 * c2
                if nc.is_zero():
                    t.pop(e, None)
                else:
                    t[e] = nc
        return Poly(t)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.mul(o)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of a Poly")
        out = P_ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    # -- calculus ---------------------------------------------------------

    def diff(self, var):
        if var == "pi":
            raise ValueError("pi is a constant; no derivative in pi")
        s = _SLOT[var]
        t = {}
        for e, c in self.terms.items():
            k = e[s]
            if k == 0:
                continue
            ne = list(e)
            ne[s] = k - 1
            t[tuple(ne)] = c * k
        return Poly(t)

    def conj(self):
        return Poly(
            {(e[1], e[0], e[2], e[3]): c.conj() for e, c in self.terms.items()}
        )

    # -- structure queries -------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_const(self):
        return not self.terms or set(self.terms) == {(0, 0, 0, 0)}

    def const_term(self):
        return self.terms.get((0, 0, 0, 0), GR_ZERO)

    def min_wdeg(self):
        """Weighted valuation; +inf for the zero polynomial."""
        if not self.terms:
            return float("inf")
        return min(wdeg(e) for e in self.terms)

    def max_wdeg(self):
        if not self.terms:
            return 0
        return max(wdeg(e) for e in self.terms)

    def truncate(self, order):
        """Drop all monomials of weight >= order."""
        return Poly({e: c for e, c in self.terms.items() if wdeg(e) < order})

    def graded_part(self, k):
        return Poly({e: c for e, c in self.terms.items() if wdeg(e) == k})

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        if self._hash is None:
            h = hash(tuple(sorted((e, c.as_quad()) for e, c in self.terms.items())))
            object.__setattr__(self, "_hash", h)
        return self._hash

    # -- evaluation and substitution ---------------------------------------

    def eval(self, point):
        """Exact evaluation; point maps each used variable to a GaussRational."""
        vals = [point.get(v) for v in VARS]
        cache = [{0: GR_ONE} for _ in VARS]

        def power(s, k):
            pc = cache[s]
            while k not in pc:
                top = max(pc)
                if vals[s] is None:
                    raise KeyError(f"no value supplied for {VARS[s]}")
                pc[top + 1] = pc[top] * vals[s]
            return pc[k]

        out = GR_ZERO
        for e, c in self.terms.items():
            term = c
            for s in range(4):
                if e[s]:
                    term = term * power(s, e[s])
            out = out + term
        return out

    def dilate(self, t):
        """Anisotropic dilation (z,zb,u) -> (tz, t zb, t^2 u) for rational t."""
        if not isinstance(t, GaussRational):
            t = GaussRational(t)
        return Poly({e: c * _pow(t, wdeg(e)) for e, c in self.terms.items()})

    # -- division -----------------------------------------------------------

    def leading(self):
        """Lex-leading (exps, coeff) over the slot order (z, zb, u, pi)."""
        e = max(self.terms)
        return e, self.terms[e]

    def divide_exact(self, divisor):
        """Exact quotient self/divisor, or None when not divisible."""
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero():
            return P_ZERO
        de, dc = divisor.leading()
        rem = dict(self.terms)
        out = {}
        while rem:
            re_ = max(rem)
            ne = tuple(re_[k] - de[k] for k in range(4))
            if any(x < 0 for x in ne):
                return None
            qc = rem[re_] / dc
            out[ne] = qc
            for e2, c2 in divisor.terms.items():
                e = tuple(ne[k] + e2[k] for k in range(4))
                nc = rem.get(e, GR_ZERO) - qc * c2
                if nc.is_zero():
                    rem.pop(e, None)
                else:
                    rem[e] = nc
        return Poly(out)

    def monic(self):
        """(self/lc, lc) with lc the lex-leading coefficient."""
        if self.is_zero():
            return self, GR_ONE
        _, lc = self.leading()
        if lc == GR_ONE:
            return self, GR_ONE
        return Poly({e: c / lc for e, c in self.terms.items()}), lc

    # -- serialization and display -------------------------------------------

    def to_json_terms(self):
        """Sorted [[ez, ezb, eu], quad] list; requires no pi dependence."""
        out = []
        for e in sorted(self.terms):
            if e[3]:
                raise ValueError("pi-dependent polynomial has no 3-slot form")
            out.append([[e[0], e[1], e[2]], list(self.terms[e].as_quad())])
        return out

    @classmethod
    def from_json_terms(cls, data):
        t = {}
        for exps, quad in data:
            e = tuple(exps) + (0,) * (4 - len(exps))
            t[e] = GaussRational.from_quad(quad)
        return cls(t)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda x: (wdeg(x), x)):
            c = self.terms[e]
            mono = "*".join(
                v if k == 1 else f"{v}^{k}"
                for v, k in zip(VARS, e)
                if k
            )
            parts.append(f"{c!r}*{mono}" if mono else repr(c))
        return " + ".join(parts)


def _pow(t, n):
    out = GR_ONE
    for _ in range(n):
        out = out * t
    return out


def poly_arith(a, b, op):
    """Dispatcher kept for the module contract: op in {add, sub, mul}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


P_ZERO = Poly()
P_ONE = Poly.const(1)
Z = Poly.var("z")
ZB = Poly.var("zb")
U = Poly.var("u")
PI = Poly.var("pi")
