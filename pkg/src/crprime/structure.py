"""Pseudohermitian structure equations and the operator suite built on them.

Given a contact form theta on a 3-manifold chart, solve_structure produces the
adapted coframe, Levi metric g, connection form omega, torsion A (the A^1_1b
component) and scalar curvature R, by reading coefficients out of

    d theta  = i g theta1 ^ theta1b
    d theta1 = theta1 ^ omega + A theta ^ theta1b
    d g      = g (omega + conj omega)
    d omega  = R g theta1 ^ theta1b   (mod theta)

All index plumbing lives in covariant_derivative / _cov_step: a lower 1 index
picks up -omega(X), a lower 1b picks up -conj(omega)(X), upper indices the
opposite signs, and raising is always by g^{1 1b}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .expr import LogExpr
from .forms import (
    AdaptedCoframe,
    DifferentialForm,
    VectorField,
    evaluate,
    exterior_d,
    form_from_scalar,
    invert_scalar,
    one_form,
    sc_conj,
    sc_is_zero,
    wedge,
)
from .gauss import G, GaussRational

I = G(0, 1)
HALF = G("1/2")


class StructureError(ValueError):
    """Degenerate or inadmissible geometric input."""


@dataclass(frozen=True)
class PseudohermitianStructure:
    theta: DifferentialForm
    theta1: DifferentialForm
    theta1b: DifferentialForm
    frame: AdaptedCoframe
    g: object
    ginv: object
    omega: DifferentialForm
    A: object  # A^1_{1b}
    R: object
    invert_order: Optional[int] = None
    # connection coefficients omega(T), omega(Z1), omega(Z1b), cached
    conn: tuple = field(default=None, repr=False)

    @property
    def T(self):
        return self.frame.T

    @property
    def Z1(self):
        return self.frame.Z1

    @property
    def Z1b(self):
        return self.frame.Z1b

    def omega_at(self, token):
        """omega(X) for X the frame vector named by '0', '1', '1b'."""
        return self.conn[{"0": 0, "1": 1, "1b": 2}[token]]


@dataclass(frozen=True)
class OperatorResult:
    value: object
    operator_name: str
    convention: Optional[str] = None


def solve_structure(theta, theta1_hint=None, invert_order=None):
    from .forms import reeb_field

    try:
        T = reeb_field(theta, invert_order)
    except ZeroDivisionError as exc:
        raise StructureError("theta is not a contact form (theta ^ dtheta = 0)") from exc

    if theta1_hint is None:
        # dz minus its Reeb component; adapted since theta1(T) = 0
        theta1 = one_form(cz=1) - T.vz * theta
    else:
        theta1 = theta1_hint
    frame = AdaptedCoframe(theta, theta1, invert_order)

    dth = exterior_d(theta)
    c = frame.expand_in_coframe(dth)
    if not (sc_is_zero(c["theta^theta1"]) and sc_is_zero(c["theta^theta1b"])):
        raise StructureError("coframe hint not admissible: dtheta has theta ^ theta1 terms")
    g = c["theta1^theta1b"] * G(0, -1)
    try:
        ginv = invert_scalar(g, invert_order)
    except (ZeroDivisionError, ValueError) as exc:
        raise StructureError("Levi form degenerates at the base point") from exc

    dth1 = exterior_d(theta1)
    e = frame.expand_in_coframe(dth1)
    p, q, r = e["theta^theta1"], e["theta^theta1b"], e["theta1^theta1b"]

    w0 = -p
    w1 = ginv * frame.Z1.apply(g) - sc_conj(r)
    w2 = r
    omega = w0 * theta + w1 * theta1 + w2 * frame.theta1b

    dom = exterior_d(omega)
    R = ginv * evaluate(dom, frame.Z1, frame.Z1b)

    conn = (
        evaluate(omega, frame.T),
        evaluate(omega, frame.Z1),
        evaluate(omega, frame.Z1b),
    )
    return PseudohermitianStructure(
        theta=theta,
        theta1=theta1,
        theta1b=frame.theta1b,
        frame=frame,
        g=g,
        ginv=ginv,
        omega=omega,
        A=q,
        R=R,
        invert_order=invert_order,
        conn=conn,
    )


def verify_structure(struct) -> list:
    """Named residuals of the four defining equations, all zero for a valid solve."""
    s = struct
    ig = s.g * I
    res1 = exterior_d(s.theta) - ig * wedge(s.theta1, s.theta1b)

    res2 = (
        exterior_d(s.theta1)
        - wedge(s.theta1, s.omega)
        - s.A * wedge(s.theta, s.theta1b)
    )

    dg = exterior_d(form_from_scalar(s.g))
    res3 = dg - s.g * (s.omega + s.omega.conj())

    dom = exterior_d(s.omega)
    res4 = evaluate(dom, s.Z1, s.Z1b) - s.R * s.g

    out = []
    for name, form in (("contact", res1), ("torsion_eq", res2), ("metric_compat", res3)):
        for key, val in s.frame.expand_in_coframe(form).items():
            out.append((f"{name}[{key}]", val))
    out.append(("curvature_mod_theta", res4))
    out.append(("g_real", s.g - sc_conj(s.g)))
    return out


# -- covariant derivatives ---------------------------------------------------


def _tokenize(pattern: str):
    toks = []
    i = 0
    while i < len(pattern):
        if pattern[i] != "1":
            raise ValueError(f"bad index pattern {pattern!r}")
        if i + 1 < len(pattern) and pattern[i + 1] == "b":
            toks.append("1b")
            i += 2
        else:
            toks.append("1")
            i += 1
    if not 1 <= len(toks) <= 4:
        raise ValueError("index patterns supported up to 4th order")
    return toks


def _cov_step(struct, value, counts, token):
    """One covariant derivative of a tensor component.

    counts = (lower-1, lower-1b, upper-1, upper-1b) of the input component.
    """
    lo1, lo1b, up1, up1b = counts
    X = struct.Z1 if token == "1" else struct.Z1b
    om = struct.omega_at(token)
    # conj(omega)(X) = conj(omega(conj X))
    omb = sc_conj(struct.omega_at("1b" if token == "1" else "1"))
    out = X.apply(value)
    k = up1 - lo1
    if k and not sc_is_zero(om):
        out = out + k * (om * value)
    kb = up1b - lo1b
    if kb and not sc_is_zero(omb):
        out = out + kb * (omb * value)
    if token == "1":
        counts = (lo1 + 1, lo1b, up1, up1b)
    else:
        counts = (lo1, lo1b + 1, up1, up1b)
    return out, counts


def covariant_derivative(struct, f, pattern: str):
    """f_{,pattern} with pattern like "1", "1b", "1b11"; leftmost applied first."""
    value = f
    counts = (0, 0, 0, 0)
    for tok in _tokenize(pattern):
        value, counts = _cov_step(struct, value, counts, tok)
    return value


def _raised_divergence(struct, value):
    """g^{1 1b} * covariant 1b-derivative of a lower-1 component."""
    stepped, _ = _cov_step(struct, value, (1, 0, 0, 0), "1b")
    return struct.ginv * stepped


def re_scalar(x):
    if isinstance(x, int):
        return x
    return (x + sc_conj(x)) * HALF


def im_scalar(x):
    if isinstance(x, int):
        return 0
    return (x - sc_conj(x)) * G(0, "-1/2")


# -- operator suite ---------------------------------------------------------


def sublaplacian(struct, f):
    """Delta_b f = g^{1 1b} (f_{,1 1b} + f_{,1b 1})."""
    a = covariant_derivative(struct, f, "11b")
    b = covariant_derivative(struct, f, "1b1")
    return struct.ginv * (a + b)


def cr_laplacian(struct, f):
    """L f = -4 Delta_b f + R f."""
    return -4 * sublaplacian(struct, f) + struct.R * f


def p3_operator(struct, f):
    """(P3 f)_1 = g^{1 1b} f_{,1b 1 1} + i A_11 g^{1 1b} f_{,1b}.

    A_11 g^{1 1b} collapses to conj(A^1_{1b}) since g is real.
    """
    t3 = covariant_derivative(struct, f, "1b11")
    t1 = covariant_derivative(struct, f, "1b")
    return struct.ginv * t3 + I * (sc_conj(struct.A) * t1)


def paneitz(struct, f, convention="body"):
    if convention == "body":
        return 4 * _raised_divergence(struct, p3_operator(struct, f))
    if convention != "intro":
        raise ValueError("convention must be 'intro' or 'body'")
    lap2 = sublaplacian(struct, sublaplacian(struct, f))
    t2 = struct.T.apply(struct.T.apply(f))
    a11 = struct.g * sc_conj(struct.A)
    inner = a11 * (struct.ginv * covariant_derivative(struct, f, "1b"))
    div = _raised_divergence(struct, inner)
    return lap2 + t2 - 4 * im_scalar(div)


def p_prime(struct, f):
    """P' f = 4 Delta_b^2 f - 8 Im grad^1(A_1^{1b} f_{,1b}) - 4 Re grad^1(R f_{,1})."""
    lap2 = sublaplacian(struct, sublaplacian(struct, f))
    a11 = struct.g * sc_conj(struct.A)
    torsion_inner = a11 * (struct.ginv * covariant_derivative(struct, f, "1b"))
    torsion_div = _raised_divergence(struct, torsion_inner)
    curv_inner = struct.R * covariant_derivative(struct, f, "1")
    curv_div = _raised_divergence(struct, curv_inner)
    return 4 * lap2 - 8 * im_scalar(torsion_div) - 4 * re_scalar(curv_div)


def q_prime(struct):
    """Q' = -2 Delta_b R + R^2 - 4 |A|^2 with indices raised by g twice."""
    asq = struct.A * sc_conj(struct.A)
    return -2 * sublaplacian(struct, struct.R) + struct.R * struct.R - 4 * asq


def pseudo_einstein_tensor(struct):
    """R_{,1} - i A^{1b}_{1,1b}; identically zero iff theta is pseudo-Einstein."""
    r1 = covariant_derivative(struct, struct.R, "1")
    abar = sc_conj(struct.A)  # A^{1b}_1: upper 1b, lower 1
    stepped, _ = _cov_step(struct, abar, (1, 0, 0, 1), "1b")
    return r1 - I * stepped


# -- conformal change --------------------------------------------------------


def _exp_of(ups, mode, order=None):
    if mode == "exact":
        if not isinstance(ups, LogExpr):
            raise StructureError("exact mode needs Upsilon as a log combination")
        return ups.exp()
    if mode == "graded":
        return ups.exp(order)
    raise ValueError("mode must be 'exact' or 'graded'")


def conformal_change(struct, ups, mode="exact", invert_order=None):
    """Re-solve the structure equations for theta_hat = e^Upsilon theta.

    No transformation formulas are used; this is the oracle side of every
    dual-path test.  The adapted coframe hint theta1 + i Upsilon^{,1} theta
    differs from e^{Upsilon/2}(theta1 + i Upsilon^{,1} theta) by a real
    factor, which leaves A^1_{1b} unchanged, so torsion comparisons are exact.
    """
    order = invert_order if invert_order is not None else struct.invert_order
    f = _exp_of(ups, mode, order)
    theta_hat = f * struct.theta
    b = struct.ginv * covariant_derivative(struct, ups, "1b")
    if isinstance(b, LogExpr):
        br = b.as_rat()
        if br is not None:
            b = br
    hint = struct.theta1 + (I * b) * struct.theta
    return solve_structure(theta_hat, theta1_hint=hint, invert_order=order)


def torsion_transform(struct, ups, mode="exact", invert_order=None):
    """Predicted hatted torsion A-hat^1_{1b} for theta_hat = e^Upsilon theta.

    The law is stated for A_11 with G = e^{Upsilon/2}:
        A-hat_11 = G^{-2} (A_11 + 2i (log G)_{,11} - 4i ((log G)_{,1})^2)
                 = e^{-Upsilon} (A_11 + i Upsilon_{,11} - i (Upsilon_{,1})^2).
    Raising back uses the unhatted g, because in the hatted Lee coframe
    g-hat = g.
    """
    order = invert_order if invert_order is not None else struct.invert_order
    f = _exp_of(ups, mode, order)
    finv = invert_scalar(f, order)
    a11 = struct.g * sc_conj(struct.A)
    u1 = covariant_derivative(struct, ups, "1")
    u11 = covariant_derivative(struct, ups, "11")
    ahat11 = finv * (a11 + I * u11 - I * (u1 * u1))
    return struct.ginv * sc_conj(ahat11)


def qprime_conformal_rhs(struct, ups):
    """Right side of the Q' transformation law e^{2 Ups} Q'-hat = ... .

    Valid for pseudo-Einstein base structures; the body Paneitz convention
    is used throughout.
    """
    pe = pseudo_einstein_tensor(struct)
    if not sc_is_zero(pe):
        raise StructureError("base structure is not pseudo-Einstein")
    grad_pair = (struct.ginv * covariant_derivative(struct, ups, "1b")) * p3_operator(
        struct, ups
    )
    return (
        q_prime(struct)
        + p_prime(struct, ups)
        + HALF * paneitz(struct, ups * ups, "body")
        - ups * paneitz(struct, ups, "body")
        - 16 * re_scalar(grad_pair)
    )
