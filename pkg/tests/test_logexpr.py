"""Closed-form scalar layer, checked against hand-computed Heisenberg facts.

Frame conventions used throughout: zeta = z*zb - i*u, s = rho^2, s^2 = zeta*zetab,
Z1 = d/dz + i*zb*d/du and its conjugate.
"""

import random

from crprime.expr import (
    RX_ONE,
    RX_S,
    SIGMA,
    ZETA,
    ZETAB,
    Atom,
    LogExpr,
    RatExpr,
    expr_is_zero,
    im_part,
    log_atom,
    random_probe,
    re_part,
)
from crprime.gauss import G
from crprime.poly import P_ONE, U, Z, ZB


def Z1(f):
    return f.diff("z") + G(0, 1) * RatExpr(na=ZB) * f.diff("u")


def Z1b(f):
    return f.diff("zb") - G(0, 1) * RatExpr(na=Z) * f.diff("u")


def rx(p):
    return RatExpr(na=p)


def test_sigma_factorizes():
    assert ZETA * ZETAB == SIGMA
    assert ZETA.conj() == ZETAB


def test_rat_arithmetic():
    zeta = rx(ZETA)
    a = RX_ONE / zeta
    assert a * zeta == RX_ONE
    assert (a + a) * zeta == 2 * RX_ONE
    assert (RX_ONE / (zeta * zeta)) * zeta == a


def test_s_squared_reduces():
    assert RX_S * RX_S == rx(SIGMA)
    inv_s = RX_ONE / RX_S
    assert inv_s * RX_S == RX_ONE
    # 1/s = s / (zeta zetab)
    assert inv_s == RX_S / rx(SIGMA)


def test_s_derivative():
    # d_z s = z zb^2 / s
    ds = RX_S.diff("z")
    assert ds * RX_S == rx(Z * ZB**2)


def test_z1_log_s():
    # Z1 log s = zb / zeta
    dls = Z1(log_atom("log_s"))
    want = LogExpr.from_rat(rx(ZB) / rx(ZETA))
    assert (dls - want).is_zero()


def test_z1_log_rho4():
    log_rho4 = 2 * log_atom("log_s")
    d = Z1(log_rho4)
    assert d == LogExpr.from_rat(2 * rx(ZB) / rx(ZETA))
    d2 = Z1(Z1(log_rho4))
    assert d2 == LogExpr.from_rat(-4 * rx(ZB * ZB) / rx(ZETA * ZETA))


def test_flat_sublaplacian_of_log_rho():
    log_rho = G("1/2") * log_atom("log_s")
    lap = Z1(Z1b(log_rho)) + Z1b(Z1(log_rho))
    # expected z zb / s^2
    want = LogExpr.from_rat(rx(Z * ZB) / rx(SIGMA))
    assert lap == want


def test_harmonic_inverse_s():
    f = LogExpr.from_rat(RX_ONE / RX_S)
    lap = Z1(Z1b(f)) + Z1b(Z1(f))
    assert lap.is_zero()


def test_log_zeta_kernel_pieces():
    lz = log_atom("log_zeta")
    assert Z1b(lz).is_zero()  # zeta is CR-holomorphic
    w = re_part(lz)
    assert Z1(Z1(Z1b(w))).is_zero()
    assert im_part(lz + lz.conj()).is_zero()


def test_conj_symmetry():
    x = log_atom("log_zeta") * rx(Z) + log_atom("log_s") * rx(U)
    assert x.conj().conj() == x
    y = re_part(x)
    assert y.conj() == y


def test_exp_of_log_combination():
    # exp(2 log s - log zeta) = s^2 / zeta = zetab
    e = (2 * log_atom("log_s") - log_atom("log_zeta")).exp()
    assert e == rx(ZETAB)


def test_dilation_homogeneity():
    t = G("3/7")
    f = RX_ONE / rx(SIGMA)  # Sigma = rho^4 has weight 4
    assert f.dilate(t) == f * (t.inverse() ** 4)
    g = rx(ZB) / rx(ZETA)  # weight -1
    assert g.dilate(t) == g * t.inverse()
    assert RX_S.dilate(t) == RX_S * t * t


def test_eval_probes_agree_with_structure():
    rng = random.Random(7)
    x = log_atom("log_zeta") * rx(Z + U) + rx(ZB) / rx(ZETA)
    y = x + x - x
    hits = 0
    while hits < 20:
        point, s_val, atoms = random_probe(rng)
        try:
            lhs = x.eval(point, s_val, atoms)
            rhs = y.eval(point, s_val, atoms)
        except ZeroDivisionError:
            continue
        assert lhs == rhs
        hits += 1


def test_eval_respects_conj():
    rng = random.Random(11)
    x = log_atom("log_zeta") * rx(Z) + log_atom("log_s") * rx(U)
    for _ in range(10):
        point, s_val, atoms = random_probe(rng)
        try:
            v = x.eval(point, s_val, atoms)
            w = x.conj().eval(point, s_val, atoms)
        except ZeroDivisionError:
            continue
        assert w == v.conj()


def test_diff_commutes_on_probe():
    # d_z d_u == d_u d_z through the quotient rule and the s-rule
    f = (RX_ONE + RX_S) / rx(ZETA)
    a = f.diff("z").diff("u")
    b = f.diff("u").diff("z")
    assert (a - b).is_zero()


def test_probe_point_consistency():
    rng = random.Random(3)
    for _ in range(25):
        point, s_val, _ = random_probe(rng)
        assert point["zb"] == point["z"].conj()
        assert s_val * s_val == SIGMA.eval(point)


def test_registry_guards():
    assert Atom.get("log_s").conj_name == "log_s"
    assert Atom.get("log_zeta").conj_name == "log_zetab"
    try:
        Atom.register("log_s", RX_ONE, "log_s")
        raised = False
    except ValueError:
        raised = True
    assert raised


def test_expr_is_zero_dispatch():
    assert expr_is_zero(LogExpr({}))
    assert expr_is_zero(RatExpr())
    assert not expr_is_zero(RX_ONE)
    assert not expr_is_zero(rx(P_ONE) - rx(P_ONE) + rx(Z))
