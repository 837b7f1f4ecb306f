"""Exterior calculus on a 3-dimensional chart with coordinates (z, zb, u).

Forms are sparse dictionaries over the basis dz, dzb, du (indices 0, 1, 2)
with strictly increasing index tuples.  Component scalars are duck-typed:
graded series, closed-form expressions, and bare rationals all work, as long
as they support +, -, *, conj, diff, is_zero.  Mixing kinds inside one form
is the caller's problem.
"""

from __future__ import annotations

from .expr import LogExpr, RatExpr
from .gauss import GaussRational, rat
from .series import GradedSeries

_VARS = ("z", "zb", "u")
_IDX = {"z": 0, "zb": 1, "u": 2}


def sc_is_zero(x):
    if isinstance(x, int):
        return x == 0
    return x.is_zero()


def sc_conj(x):
    if isinstance(x, int):
        return x
    return x.conj()


def sc_diff(x, var):
    if isinstance(x, (int, GaussRational)):
        return 0
    return x.diff(var)


def invert_scalar(x, order=None):
    """Multiplicative inverse in whichever scalar ring x lives in."""
    if isinstance(x, GradedSeries):
        return x.invert(order)
    if isinstance(x, RatExpr):
        return x.inverse()
    if isinstance(x, LogExpr):
        r = x.as_rat()
        if r is None:
            raise ValueError("cannot invert a scalar still carrying log terms")
        return LogExpr.from_rat(r.inverse())
    if isinstance(x, GaussRational):
        return x.inverse()
    if isinstance(x, int):
        return GaussRational(rat(1, x))
    raise TypeError(f"no inverse for {type(x).__name__}")


def _sort_key(idx):
    """Sort a multi-index, returning (tuple, sign); sign 0 on repeats."""
    idx = list(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return tuple(idx), 0
    return tuple(idx), sign


class DifferentialForm:
    __slots__ = ("degree", "comps")

    def __init__(self, degree, comps=None):
        if not 0 <= degree <= 3:
            raise ValueError("degree out of range on a 3-manifold")
        clean = {}
        for idx, c in (comps or {}).items():
            key, sign = _sort_key(tuple(idx))
            if sign == 0 or sc_is_zero(c):
                continue
            if len(key) != degree:
                raise ValueError("index length does not match degree")
            c = c if sign == 1 else -c
            clean[key] = clean[key] + c if key in clean else c
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "comps", {k: v for k, v in clean.items() if not sc_is_zero(v)})

    def __setattr__(self, name, value):
        raise AttributeError("DifferentialForm is immutable")

    def is_zero(self):
        return not self.comps

    def component(self, *idx):
        key, sign = _sort_key(idx)
        c = self.comps.get(key, 0)
        return c if sign >= 0 else -c

    def __add__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        comps = dict(self.comps)
        for k, c in other.comps.items():
            comps[k] = comps[k] + c if k in comps else c
        return DifferentialForm(self.degree, comps)

    def __sub__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return DifferentialForm(self.degree, {k: -c for k, c in self.comps.items()})

    def __mul__(self, scalar):
        if isinstance(scalar, DifferentialForm):
            return NotImplemented
        return DifferentialForm(self.degree, {k: c * scalar for k, c in self.comps.items()})

    def __rmul__(self, scalar):
        if isinstance(scalar, DifferentialForm):
            return NotImplemented
        return DifferentialForm(self.degree, {k: scalar * c for k, c in self.comps.items()})

    def conj(self):
        """Complex conjugation: swaps dz and dzb, fixes du."""
        swap = {0: 1, 1: 0, 2: 2}
        comps = {}
        for idx, c in self.comps.items():
            key, sign = _sort_key(tuple(swap[i] for i in idx))
            cc = sc_conj(c)
            cc = cc if sign == 1 else -cc
            comps[key] = comps[key] + cc if key in comps else cc
        return DifferentialForm(self.degree, comps)

    def __repr__(self):
        names = {0: "dz", 1: "dzb", 2: "du"}
        if not self.comps:
            return f"<0-form 0>" if self.degree == 0 else f"<{self.degree}-form 0>"
        bits = ["^".join(names[i] for i in k) or "1" for k in sorted(self.comps)]
        return f"<{self.degree}-form on " + ", ".join(bits) + ">"


class VectorField:
    __slots__ = ("vz", "vzb", "vu")

    def __init__(self, vz, vzb, vu):
        object.__setattr__(self, "vz", vz)
        object.__setattr__(self, "vzb", vzb)
        object.__setattr__(self, "vu", vu)

    def __setattr__(self, name, value):
        raise AttributeError("VectorField is immutable")

    def comp(self, i):
        return (self.vz, self.vzb, self.vu)[i]

    def conj(self):
        return VectorField(sc_conj(self.vzb), sc_conj(self.vz), sc_conj(self.vu))

    def apply(self, f):
        """Directional derivative of a scalar."""
        out = 0
        for var, v in zip(_VARS, (self.vz, self.vzb, self.vu)):
            if sc_is_zero(v):
                continue
            df = sc_diff(f, var)
            term = v * df
            out = term if isinstance(out, int) and out == 0 else out + term
        if isinstance(out, int):
            return _zero_like(f)
        return out

    def __repr__(self):
        return f"VectorField({self.vz!r}, {self.vzb!r}, {self.vu!r})"


def _zero_like(scalar):
    if isinstance(scalar, GradedSeries):
        return GradedSeries(0, scalar.order)
    if isinstance(scalar, RatExpr):
        return RatExpr()
    if isinstance(scalar, LogExpr):
        return LogExpr({})
    return 0


def form_from_scalar(f):
    return DifferentialForm(0, {(): f})


def one_form(cz=0, czb=0, cu=0):
    return DifferentialForm(1, {(0,): cz, (1,): czb, (2,): cu})


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    deg = a.degree + b.degree
    if deg > 3:
        return DifferentialForm(3, {})
    comps = {}
    for ia, ca in a.comps.items():
        for ib, cb in b.comps.items():
            key, sign = _sort_key(ia + ib)
            if sign == 0:
                continue
            c = ca * cb
            c = c if sign == 1 else -c
            comps[key] = comps[key] + c if key in comps else c
    return DifferentialForm(deg, comps)


def exterior_d(form: DifferentialForm) -> DifferentialForm:
    if form.degree == 3:
        return DifferentialForm(3, {})
    comps = {}
    for idx, c in form.comps.items():
        for var in _VARS:
            dc = sc_diff(c, var)
            if sc_is_zero(dc):
                continue
            key, sign = _sort_key((_IDX[var],) + idx)
            if sign == 0:
                continue
            dc = dc if sign == 1 else -dc
            comps[key] = comps[key] + dc if key in comps else dc
    return DifferentialForm(form.degree + 1, comps)


def contract(form: DifferentialForm, X: VectorField) -> DifferentialForm:
    """Interior product: (i_X w)(Y, ...) = w(X, Y, ...)."""
    if form.degree == 0:
        raise ValueError("cannot contract a 0-form")
    comps = {}
    for idx, c in form.comps.items():
        for pos, i in enumerate(idx):
            v = X.comp(i)
            if sc_is_zero(v):
                continue
            rest = idx[:pos] + idx[pos + 1 :]
            term = c * v if pos % 2 == 0 else -(c * v)
            comps[rest] = comps[rest] + term if rest in comps else term
    return DifferentialForm(form.degree - 1, comps)


def evaluate(form: DifferentialForm, *vectors) -> object:
    if len(vectors) != form.degree:
        raise ValueError("wrong number of vector arguments")
    out = form
    for X in vectors:
        out = contract(out, X)
    return out.comps.get((), 0)


def reeb_field(theta: DifferentialForm, invert_order=None) -> VectorField:
    """The unique T with theta(T) = 1 and dtheta(T, .) = 0."""
    dth = exterior_d(theta)
    # in 3 variables the kernel direction of a 2-form is a cross product
    v = VectorField(
        dth.component(1, 2), -dth.component(0, 2), dth.component(0, 1)
    )
    norm = evaluate(theta, v)
    scale = invert_scalar(norm, invert_order)
    return VectorField(scale * v.vz, scale * v.vzb, scale * v.vu)


class AdaptedCoframe:
    """Coframe (theta, theta1, theta1b) with its dual frame (T, Z1, Z1b)."""

    __slots__ = ("theta", "theta1", "theta1b", "T", "Z1", "Z1b", "_order")

    def __init__(self, theta, theta1, invert_order=None, theta1b=None):
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "theta1", theta1)
        object.__setattr__(self, "theta1b", theta1b if theta1b is not None else theta1.conj())
        object.__setattr__(self, "_order", invert_order)
        M = [
            [self.theta.component(i) for i in range(3)],
            [self.theta1.component(i) for i in range(3)],
            [self.theta1b.component(i) for i in range(3)],
        ]
        det = (
            M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
            - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
            + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])
        )
        dinv = invert_scalar(det, invert_order)
        cols = []
        for a in range(3):
            col = []
            for i in range(3):
                # inverse[i][a] = cofactor(a, i) / det
                r = [x for x in range(3) if x != a]
                c = [x for x in range(3) if x != i]
                minor = M[r[0]][c[0]] * M[r[1]][c[1]] - M[r[0]][c[1]] * M[r[1]][c[0]]
                sign = 1 if (a + i) % 2 == 0 else -1
                col.append(dinv * minor if sign == 1 else -(dinv * minor))
            cols.append(VectorField(*col))
        object.__setattr__(self, "T", cols[0])
        object.__setattr__(self, "Z1", cols[1])
        object.__setattr__(self, "Z1b", cols[2])

    def __setattr__(self, name, value):
        raise AttributeError("AdaptedCoframe is immutable")

    def expand_in_coframe(self, form: DifferentialForm) -> dict:
        """Components of a form against theta, theta1, theta1b and their wedges."""
        T, Z1, Z1b = self.T, self.Z1, self.Z1b
        if form.degree == 0:
            return {"1": form.comps.get((), 0)}
        if form.degree == 1:
            return {
                "theta": evaluate(form, T),
                "theta1": evaluate(form, Z1),
                "theta1b": evaluate(form, Z1b),
            }
        if form.degree == 2:
            return {
                "theta^theta1": evaluate(form, T, Z1),
                "theta^theta1b": evaluate(form, T, Z1b),
                "theta1^theta1b": evaluate(form, Z1, Z1b),
            }
        return {"theta^theta1^theta1b": evaluate(form, T, Z1, Z1b)}

    def verify_duality(self):
        """Pairing residuals; all nine should be zero scalars."""
        out = []
        for name, f in (("theta", self.theta), ("theta1", self.theta1), ("theta1b", self.theta1b)):
            row = self.expand_in_coframe(f)
            want = {"theta": name == "theta", "theta1": name == "theta1", "theta1b": name == "theta1b"}
            for k, flag in want.items():
                r = row[k] - 1 if flag else row[k]
                out.append((f"{name}({k})", r))
        return out
