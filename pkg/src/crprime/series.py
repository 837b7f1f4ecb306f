"""Truncated graded power series: a polynomial plus an explicit O(rho^k) error.

The error order may be math.inf for exact polynomial data; exactness survives
ring operations and derivatives, and the first genuine inversion (or exp/log)
imposes a finite working order, which callers thread through explicitly.

Order propagation is conservative: it may understate accuracy, never overstate
it, so every O(rho^k) claim emitted by this layer is a true statement.
"""

from __future__ import annotations

import math

from .gauss import GR_ONE, GaussRational, rat
from .poly import P_ONE, P_ZERO, Poly

INF = math.inf


class GradedSeries:
    __slots__ = ("poly", "order")

    def __init__(self, poly, order=INF):
        if not isinstance(poly, Poly):
            poly = Poly.const(poly)
        if order != INF:
            order = int(order)
            if order < 0:
                raise ValueError("error order must be >= 0")
            poly = poly.truncate(order)
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "order", order)

    def __setattr__(self, name, value):
        raise AttributeError("GradedSeries is immutable")

    @classmethod
    def const(cls, c, order=INF):
        return cls(Poly.const(c), order)

    # -- queries -----------------------------------------------------------

    def valuation(self):
        """Weighted order of vanishing of the represented function."""
        return min(self.poly.min_wdeg(), self.order)

    def is_zero(self):
        """True when the stored jet is zero (the O-tail is not interrogated)."""
        return self.poly.is_zero()

    def certifies_O(self, k):
        """Does this series prove `function = O(rho^k)`?

        True: yes (no terms below k, tracked through order >= k).
        False: no, there is a nonzero term of weight < k.
        None: truncation order too low to decide.
        """
        if not self.poly.truncate(k).is_zero():
            return False
        if self.order < k:
            return None
        return True

    def __eq__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return self.poly == other.poly and self.order == other.order

    def __hash__(self):
        return hash((self.poly, self.order))

    # -- ring operations -----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, GradedSeries):
            return other
        if isinstance(other, (int, GaussRational, Poly)):
            return GradedSeries(other if isinstance(other, Poly) else Poly.const(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GradedSeries(self.poly + o.poly, min(self.order, o.order))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GradedSeries(self.poly - o.poly, min(self.order, o.order))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return GradedSeries(-self.poly, self.order)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        # (f + O(k))(g + O(m)) = fg + f*O(m) + g*O(k) + O(k+m)
        order = min(
            self.order + o.valuation(),
            o.order + self.valuation(),
            self.order + o.order,
        )
        poly = self.poly.mul(o.poly, None if order == INF else order)
        return GradedSeries(poly, order)

    __rmul__ = __mul__

    def conj(self):
        return GradedSeries(self.poly.conj(), self.order)

    def diff(self, var):
        drop = 2 if var == "u" else 1
        if self.order != INF and self.order - drop <= 0:
            raise ValueError(
                f"derivative in {var} leaves no information (order {self.order})"
            )
        return GradedSeries(self.poly.diff(var), self.order - drop)

    def truncated(self, order):
        return GradedSeries(self.poly, min(self.order, order))

    # -- series functions ------------------------------------------------------

    def _target(self, order):
        t = self.order if order is None else min(order, self.order)
        if t == INF:
            raise ValueError("series function on exact data needs an explicit order")
        return int(t)

    def invert(self, order=None):
        c0 = self.poly.const_term()
        if c0.is_zero():
            raise ZeroDivisionError("inversion of a series with zero constant term")
        n = self._target(order)
        x = GradedSeries((self.poly * (GR_ONE / c0)) - P_ONE, n)
        out = GradedSeries(P_ONE, n)
        term = GradedSeries(P_ONE, n)
        k = 0
        while True:
            k += 1
            term = term * (-x)
            if term.poly.is_zero():
                break
            out = out + term
            if k > n:
                break
        return out * (GR_ONE / c0)

    def exp(self, order=None):
        if not self.poly.const_term().is_zero():
            raise ValueError("exp needs zero constant term to stay rational")
        n = self._target(order)
        x = GradedSeries(self.poly, n)
        out = GradedSeries(P_ONE, n)
        term = GradedSeries(P_ONE, n)
        k = 0
        while True:
            k += 1
            term = term * x
            if term.poly.is_zero():
                break
            out = out + term * GaussRational(rat(1, math.factorial(k)))
            if x.poly.is_zero() or k > n:
                break
        return out

    def log1p(self, order=None):
        if not self.poly.const_term().is_zero():
            raise ValueError("log1p needs zero constant term")
        n = self._target(order)
        x = GradedSeries(self.poly, n)
        out = GradedSeries(P_ZERO, n)
        term = GradedSeries(P_ONE, n)
        k = 0
        while True:
            k += 1
            term = term * x
            if term.poly.is_zero():
                break
            sign = 1 if k % 2 else -1
            out = out + term * GaussRational(rat(sign, k))
            if k > n:
                break
        return out

    def sqrt(self, order=None):
        """(1 + x)^(1/2); requires constant term exactly 1."""
        if self.poly.const_term() != GR_ONE:
            raise ValueError("sqrt implemented for series with constant term 1")
        n = self._target(order)
        x = GradedSeries(self.poly - P_ONE, n)
        out = GradedSeries(P_ONE, n)
        term = GradedSeries(P_ONE, n)
        coeff = GaussRational(1)
        k = 0
        while True:
            k += 1
            # binomial(1/2, k) built incrementally
            coeff = coeff * GaussRational(rat(3 - 2 * k, 2 * k))
            term = term * x
            if term.poly.is_zero():
                break
            out = out + term * coeff
            if k > n:
                break
        return out

    def __repr__(self):
        tail = "" if self.order == INF else f" + O({self.order})"
        return f"<{self.poly!r}{tail}>"


def series_arith(a, b, op, order=None):
    """Module contract dispatcher: op in {add, sub, mul, invert, exp, log1p, sqrt}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "invert":
        return a.invert(order)
    if op == "exp":
        return a.exp(order)
    if op == "log1p":
        return a.log1p(order)
    if op == "sqrt":
        return a.sqrt(order)
    raise ValueError(f"unknown op {op!r}")


def series_diff(a, var):
    return a.diff(var)
