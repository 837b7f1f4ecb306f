"""Exact closed-form scalars on the Heisenberg group.

Two layers:

  RatExpr  -- elements of Q(i)(z, zb, u)[s] / (s^2 - Sigma) where
              Sigma = (z zb)^2 + u^2 and s = rho^2 is the quartic radius.
              Denominators are kept factored and s-free; dividing by
              (a + b s) rationalizes against its conjugate.

  LogExpr  -- finite sums  sum_k  c_k * prod_j log(f_j)^{p_jk}  with RatExpr
              coefficients and log arguments drawn from a fixed atom registry.
              One derivative turns log f into f'/f, so curvature-type
              quantities collapse back to RatExpr automatically.

Zero testing is coefficient-wise in the atoms.  The atoms carry one genuine
relation, log zeta + log zetab = 2 log s, but no identity verified here mixes
those three; treating atoms as independent is therefore conservative and safe.
"""

from __future__ import annotations

from .gauss import G, GR_ONE, GR_ZERO, GaussRational, rat
from .poly import P_ONE, P_ZERO, PI, U, Z, ZB, Poly

SIGMA = (Z * ZB) ** 2 + U**2  # s^2 as a polynomial
ZETA = Z * ZB - G(0, 1) * U
ZETAB = Z * ZB + G(0, 1) * U

_DS_NUM = {"z": Z * ZB**2, "zb": Z**2 * ZB, "u": U}  # ds = num * s / Sigma


def _normalize_den(den):
    """Fold constants out of factors; return (canonical dict, numerator scale).

    Sigma itself splits as zeta * zetab over Q(i); storing the split form lets
    the trial-division reducer cancel against the factors dlog produces.
    """
    out = {}
    scale = GR_ONE
    stack = list(den.items())
    while stack:
        f, e = stack.pop()
        if e == 0:
            continue
        if e < 0:
            raise ValueError("negative denominator exponent")
        if f.is_zero():
            raise ZeroDivisionError("zero denominator factor")
        if f.is_const():
            scale = scale * f.const_term() ** -e
            continue
        _, lc = f.leading()
        if lc != GR_ONE:
            f = f * (GR_ONE / lc)
            scale = scale * lc**-e
        if f == SIGMA:
            stack.append((ZETA, e))
            stack.append((ZETAB, e))
            continue
        out[f] = out.get(f, 0) + e
    return out, scale


class RatExpr:
    __slots__ = ("na", "nb", "den")

    def __init__(self, na=P_ZERO, nb=P_ZERO, den=None):
        na = na if isinstance(na, Poly) else Poly.const(na)
        nb = nb if isinstance(nb, Poly) else Poly.const(nb)
        den, scale = _normalize_den(den or {})
        if scale != GR_ONE:
            na, nb = na * scale, nb * scale
        if na.is_zero() and nb.is_zero():
            den = {}
        object.__setattr__(self, "na", na)
        object.__setattr__(self, "nb", nb)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatExpr is immutable")

    @classmethod
    def from_poly(cls, p):
        return cls(na=p)

    @classmethod
    def const(cls, c):
        return cls(na=Poly.const(c))

    # -- structure ----------------------------------------------------------

    def is_zero(self):
        return self.na.is_zero() and self.nb.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def is_rational(self):
        return self.nb.is_zero()

    def as_poly(self):
        if self.nb.is_zero() and not self.den:
            return self.na
        return None

    def __eq__(self, other):
        if isinstance(other, (int, GaussRational, Poly)):
            other = RatExpr(na=other if isinstance(other, Poly) else Poly.const(other))
        if not isinstance(other, RatExpr):
            return NotImplemented
        return (self - other).is_zero()

    def _reduce(self):
        """Cancel denominator factors dividing both numerator components."""
        na, nb, den = self.na, self.nb, dict(self.den)
        changed = False
        for f in list(den):
            while den[f] > 0:
                qa = na.divide_exact(f)
                if qa is None:
                    break
                if nb.is_zero():
                    qb = P_ZERO
                else:
                    qb = nb.divide_exact(f)
                    if qb is None:
                        break
                na, nb = qa, qb
                den[f] -= 1
                changed = True
            if den[f] == 0:
                del den[f]
        if not changed:
            return self
        return RatExpr(na, nb, den)

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RatExpr):
            return other
        if isinstance(other, (int, GaussRational)):
            return RatExpr(na=Poly.const(other))
        if isinstance(other, Poly):
            return RatExpr(na=other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        den = dict(self.den)
        for f, e in o.den.items():
            den[f] = max(den.get(f, 0), e)
        ls = P_ONE
        for f, e in den.items():
            k = e - self.den.get(f, 0)
            if k:
                ls = ls * f**k
        rs = P_ONE
        for f, e in den.items():
            k = e - o.den.get(f, 0)
            if k:
                rs = rs * f**k
        return RatExpr(
            self.na * ls + o.na * rs, self.nb * ls + o.nb * rs, den
        )._reduce()

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
        return RatExpr(-self.na, -self.nb, self.den)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        den = dict(self.den)
        for f, e in o.den.items():
            den[f] = den.get(f, 0) + e
        na = self.na * o.na + self.nb * o.nb * SIGMA
        nb = self.na * o.nb + self.nb * o.na
        return RatExpr(na, nb, den)._reduce()

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out, base = RX_ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        dpoly = P_ONE
        for f, e in self.den.items():
            dpoly = dpoly * f**e
        a, b = self.na, self.nb
        if b.is_zero():
            return RatExpr(dpoly, P_ZERO, {a: 1})._reduce()
        # 1/(a + b s) = (a - b s)/(a^2 - b^2 Sigma)
        norm = a * a - b * b * SIGMA
        if norm.is_zero():
            raise ZeroDivisionError("a + b*s collapses on the surface s^2 = Sigma")
        return RatExpr(dpoly * a, -(dpoly * b), {norm: 1})._reduce()

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def conj(self):
        return RatExpr(
            self.na.conj(), self.nb.conj(), {f.conj(): e for f, e in self.den.items()}
        )

    def diff(self, var):
        out = RatExpr(self.na.diff(var), self.nb.diff(var), self.den)
        if not self.nb.is_zero():
            # d s = _DS_NUM * s / Sigma
            den = dict(self.den)
            den[SIGMA] = den.get(SIGMA, 0) + 1
            out = out + RatExpr(P_ZERO, self.nb * _DS_NUM[var], den)._reduce()
        for f, e in self.den.items():
            df = f.diff(var)
            if df.is_zero():
                continue
            den = dict(self.den)
            den[f] = den[f] + 1
            out = out - e * RatExpr(self.na * df, self.nb * df, den)._reduce()
        return out

    def dilate(self, t):
        """Parabolic dilation z -> t z, u -> t^2 u (so s -> t^2 s)."""
        t = t if isinstance(t, GaussRational) else GaussRational(t)
        den = {f.dilate(t): e for f, e in self.den.items()}
        return RatExpr(self.na.dilate(t), self.nb.dilate(t) * t * t, den)

    def eval(self, point, s_val):
        num = self.na.eval(point) + self.nb.eval(point) * s_val
        d = GR_ONE
        for f, e in self.den.items():
            d = d * f.eval(point) ** e
        return num / d

    def __repr__(self):
        d = " / " + " * ".join(f"({f!r})^{e}" for f, e in self.den.items()) if self.den else ""
        s = "" if self.nb.is_zero() else f" + ({self.nb!r})*s"
        return f"[({self.na!r}){s}{d}]"


RX_ZERO = RatExpr()
RX_ONE = RatExpr(na=P_ONE)
RX_S = RatExpr(nb=P_ONE)


class Atom:
    """A registered log argument; conj_name must point at the conjugate atom."""

    registry: dict = {}

    __slots__ = ("name", "arg", "conj_name")

    def __init__(self, name, arg, conj_name):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "conj_name", conj_name)

    def __setattr__(self, name, value):
        raise AttributeError("Atom is immutable")

    @classmethod
    def register(cls, name, arg, conj_name):
        if name in cls.registry:
            existing = cls.registry[name]
            if existing.arg != arg or existing.conj_name != conj_name:
                raise ValueError(f"atom {name!r} already registered differently")
            return existing
        atom = cls(name, arg, conj_name)
        cls.registry[name] = atom
        return atom

    @classmethod
    def get(cls, name):
        return cls.registry[name]

    def dlog(self, var):
        return self.arg.diff(var) / self.arg


Atom.register("log_s", RX_S, "log_s")
Atom.register("log_zeta", RatExpr(na=ZETA), "log_zetab")
Atom.register("log_zetab", RatExpr(na=ZETAB), "log_zeta")
Atom.register("log_2pi", RatExpr(na=2 * PI), "log_2pi")


def _merge_key(key, name, dp):
    d = dict(key)
    d[name] = d.get(name, 0) + dp
    if d[name] == 0:
        del d[name]
    return tuple(sorted(d.items()))


class LogExpr:
    """Polynomial in log atoms with RatExpr coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for key, coeff in (terms or {}).items():
            if not isinstance(coeff, RatExpr):
                coeff = RatExpr.const(coeff) if not isinstance(coeff, Poly) else RatExpr(na=coeff)
            if coeff.is_zero():
                continue
            clean[tuple(sorted(key))] = coeff
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("LogExpr is immutable")

    @classmethod
    def from_rat(cls, rx):
        return cls({(): rx})

    @classmethod
    def atom(cls, name):
        Atom.get(name)
        return cls({((name, 1),): RX_ONE})

    # -- structure ---------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def rational_part(self):
        return self.terms.get((), RX_ZERO)

    def as_rat(self):
        """The RatExpr value when no atom survives, else None."""
        if all(k == () for k in self.terms):
            return self.rational_part()
        return None

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).is_zero()

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, LogExpr):
            return other
        if isinstance(other, (int, GaussRational, Poly, RatExpr)):
            rx = other if isinstance(other, RatExpr) else None
            if rx is None:
                rx = RatExpr(na=other) if isinstance(other, Poly) else RatExpr.const(other)
            return LogExpr.from_rat(rx)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        terms = dict(self.terms)
        for key, c in o.terms.items():
            terms[key] = terms.get(key, RX_ZERO) + c
        return LogExpr(terms)

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
        return LogExpr({k: -c for k, c in self.terms.items()})

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        terms = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in o.terms.items():
                key = k1
                for name, p in k2:
                    key = _merge_key(key, name, p)
                c = c1 * c2
                terms[key] = terms.get(key, RX_ZERO) + c
        return LogExpr(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, GaussRational)):
            other = RatExpr.const(other)
        if isinstance(other, RatExpr):
            inv = other.inverse()
            return LogExpr({k: c * inv for k, c in self.terms.items()})
        return NotImplemented

    def conj(self):
        terms = {}
        for key, c in self.terms.items():
            nk = tuple(sorted((Atom.get(n).conj_name, p) for n, p in key))
            terms[nk] = terms.get(nk, RX_ZERO) + c.conj()
        return LogExpr(terms)

    def diff(self, var):
        terms = {}

        def bump(key, c):
            if key in terms:
                terms[key] = terms[key] + c
            else:
                terms[key] = c

        for key, c in self.terms.items():
            dc = c.diff(var)
            if not dc.is_zero():
                bump(key, dc)
            for name, p in key:
                dl = Atom.get(name).dlog(var)
                if dl.is_zero():
                    continue
                bump(_merge_key(key, name, -1), p * c * dl)
        return LogExpr(terms)

    def exp(self):
        """exp of an integer combination of atoms, as a RatExpr."""
        num, den = RX_ONE, RX_ONE
        for key, c in self.terms.items():
            if key == ():
                if not c.is_zero():
                    raise ValueError("exp needs a pure log combination")
                continue
            if len(key) != 1 or key[0][1] != 1:
                raise ValueError("exp of higher log powers is not rational")
            cp = c.as_poly()
            if cp is None or not cp.is_const():
                raise ValueError("exp needs constant coefficients")
            cc = cp.const_term()
            if not cc.is_real() or cc.re.denominator != 1:
                raise ValueError("exp needs integer coefficients")
            n = int(cc.re)
            base = Atom.get(key[0][0]).arg
            if n >= 0:
                num = num * base**n if n else num
            else:
                den = den * base ** (-n)
        return num / den

    def eval(self, point, s_val, atom_values):
        total = GR_ZERO
        for key, c in self.terms.items():
            v = c.eval(point, s_val)
            for name, p in key:
                v = v * atom_values[name] ** p
            total = total + v
        return total

    def __repr__(self):
        if not self.terms:
            return "LogExpr(0)"
        bits = []
        for key, c in sorted(self.terms.items()):
            mono = "*".join(f"{n}^{p}" if p > 1 else n for n, p in key) or "1"
            bits.append(f"{mono}: {c!r}")
        return "LogExpr{" + "; ".join(bits) + "}"


def log_atom(name):
    return LogExpr.atom(name)


def re_part(x: LogExpr) -> LogExpr:
    return (x + x.conj()) * G("1/2")


def im_part(x: LogExpr) -> LogExpr:
    return (x - x.conj()) * G(0, "-1/2")


def expr_diff(x, var):
    return x.diff(var)


def expr_is_zero(x):
    return x.is_zero()


def random_probe(rng):
    """A generic rational point where s is exactly rational, plus atom values.

    zb is the honest conjugate of z and conjugate atoms get conjugate values,
    so conj() commutes with eval().  Atom values are otherwise unconstrained:
    probes cross-check formal manipulations, they are not the zero test.
    """
    while True:
        p, q = rng.randint(-5, 5), rng.randint(-5, 5)
        if p or q:
            break
    z = G(p, q)
    m = z * z.conj()
    t = rat(rng.randint(2, 9), rng.randint(1, 3))
    u = m.re * (t * t - 1) / (2 * t)
    s_val = G(m.re * (t * t + 1) / (2 * t))
    point = {
        "z": z,
        "zb": z.conj(),
        "u": G(u),
        "pi": G(rat(355, 113)),  # any positive stand-in; pi never cancels
    }
    v_zeta = G(rat(rng.randint(1, 7)), rat(rng.randint(1, 7)))
    atom_values = {
        "log_s": G(rat(rng.randint(1, 9), 2)),
        "log_zeta": v_zeta,
        "log_zetab": v_zeta.conj(),
        "log_2pi": G(rat(rng.randint(1, 9), 3)),
    }
    return point, s_val, atom_values
