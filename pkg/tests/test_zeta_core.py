import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetacorr import prime_engine as pe
from zetacorr import rmt_core as rc
from zetacorr import zeta_core as zc
from zetacorr.errors import PoleCollision, TooLarge
from zetacorr.numerics import chi_logderiv

CTX = pe.build_prime_context(53)
H = zc.HeightContext(1e6)


def test_height_context():
    with pytest.raises(ValueError):
        zc.HeightContext(5.0)
    with pytest.raises(ValueError):
        zc.HeightContext(1e3, "other")
    h = zc.HeightContext.from_ell(7.5)
    assert h.ell == pytest.approx(7.5, abs=1e-13)
    assert zc.HeightContext(1e6).ell == pytest.approx(11.97763349155493, abs=1e-12)


def test_x_factor_exact_close_to_ell_form_at_height():
    S, T = [0.1 + 0.3j], [-0.05 + 0.2j]
    approx = zc.x_factor(S, T, zc.HeightContext(1e8))
    exact = zc.x_factor(S, T, zc.HeightContext(1e8, zc.EXACT))
    assert abs(exact / approx - 1) < 1e-6
    assert zc.x_factor([], [], H) == 1
    with pytest.raises(ValueError):
        zc.x_factor([0.1], [], H)


def test_one_point_density_is_ell():
    req = zc.ZetaCorrelationRequest((0.3,), H, CTX)
    assert zc.correlation_zeta(req) == pytest.approx(H.ell, abs=1e-10)


def test_one_sided_average_vanishes_in_closed_form():
    assert zc._closed_any([0.1 + 0.2j], [], H, CTX) == 0
    assert zc._closed_any([], [], H, CTX) == 1


shift = st.builds(complex, st.floats(-0.2, 0.2), st.floats(-1.5, 1.5))


@given(st.lists(shift, min_size=1, max_size=1), st.lists(shift, min_size=1, max_size=2))
@settings(max_examples=25, deadline=None)
def test_closed_forms_match_general_machinery(A, B):
    vals = A + B
    if any(abs(x - y) < 0.05 for i, x in enumerate(vals) for y in vals[i + 1:]):
        return
    if any(abs(a + b) < 0.05 for a in A for b in B):
        return
    shape = "pair" if len(B) == 1 else "triple"
    g = zc.jstar_zeta_general(A, B, (), H, CTX)
    c = zc.jstar_zeta_closed(shape, A, B, H, CTX)
    assert abs(g - c) <= 1e-8 * max(1.0, abs(g))


@pytest.mark.parametrize("shape,A,B", [
    ("quad_1_3", [0.1 + 0.3j], [-0.1 + 0.7j, 0.05 - 0.4j, 0.15 + 1.1j]),
    ("quad_2_2", [0.1 + 0.3j, -0.12 - 0.5j], [0.05 - 0.4j, 0.15 + 1.1j]),
])
def test_quadruple_closed_forms_match_general_machinery(shape, A, B):
    g = zc.jstar_zeta_general(A, B, (), H, CTX)
    c = zc.jstar_zeta_closed(shape, A, B, H, CTX)
    assert abs(g - c) <= 1e-9 * max(1.0, abs(g))


def test_closed_form_shape_validation():
    with pytest.raises(ValueError):
        zc.jstar_zeta_closed("pair", [0.1], [0.2, 0.3], H, CTX)
    with pytest.raises(ValueError):
        zc.jstar_zeta_closed("five", [0.1], [0.2], H, CTX)
    with pytest.raises(TooLarge):
        zc._closed_any([0.1, 0.2], [0.3, 0.4, 0.5], H, CTX)


@pytest.mark.parametrize("N", [1, 4, 11])
def test_unitary_backend_reduces_to_rmt(N):
    A = [0.3 + 0.4j, -0.2 + 1.1j]
    B = [0.25 - 0.6j]
    g = zc.jstar_zeta_general(A, B, backend=zc.UnitaryBackend(N))
    assert abs(g - rc.jstar(A, B, N)) < 1e-12 * max(1.0, abs(g))


def test_general_machinery_guards():
    with pytest.raises(TooLarge):
        zc.jstar_zeta_general([0.1, 0.2], [0.3, 0.4], [0.5j], H, CTX)
    with pytest.raises(PoleCollision):
        zc.jstar_zeta_general([0.1], [-0.1], (), H, CTX)
    with pytest.raises(ValueError):
        zc.jstar_zeta_general([0.1], [0.2])


def test_correlation_guards():
    with pytest.raises(TooLarge):
        zc.correlation_zeta(zc.ZetaCorrelationRequest((0.1, 0.2, 0.3, 0.4, 0.5), H, CTX))
    with pytest.raises(PoleCollision):
        zc.correlation_zeta(zc.ZetaCorrelationRequest((0.1, 0.1), H, CTX))
    with pytest.raises(ValueError):
        zc.correlation_zeta(zc.ZetaCorrelationRequest(
            (0.1, 0.5), zc.HeightContext(1e6, zc.EXACT), CTX))
    with pytest.raises(ValueError):
        zc.correlation_zeta(zc.ZetaCorrelationRequest((0.1, 0.5), H, CTX, engine="x"))


def test_engines_agree_on_triple_correlation():
    pts = (0.0, 0.4, 1.1)
    a = zc.correlation_zeta(zc.ZetaCorrelationRequest(pts, H, CTX))
    b = zc.correlation_zeta(zc.ZetaCorrelationRequest(pts, H, CTX, engine="general_machinery"))
    assert a == pytest.approx(b, rel=1e-10)


def test_correlation_symmetric_and_translation_invariant():
    pts = (0.0, 0.4, 1.1)
    a = zc.correlation_zeta(zc.ZetaCorrelationRequest(pts, H, CTX))
    b = zc.correlation_zeta(zc.ZetaCorrelationRequest((1.1, 0.0, 0.4), H, CTX))
    c = zc.correlation_zeta(zc.ZetaCorrelationRequest(tuple(p + 0.37 for p in pts), H, CTX))
    assert a == pytest.approx(b, rel=1e-10)
    assert a == pytest.approx(c, rel=1e-10)


def test_pair_density_near_sine_kernel_at_height():
    ctx = pe.build_prime_context(1000, "geometric-estimate")
    dev = zc.pair_scaling_deviation(zc.HeightContext(1e12), ctx, np.linspace(0.2, 2.8, 9))
    assert np.max(np.abs(dev)) < 0.05


def test_pair_density_small_at_short_range():
    # repulsion: R_2 vanishes quadratically as the points merge
    ell = H.ell
    r = [zc.correlation_zeta(zc.ZetaCorrelationRequest((0.0, d), H, CTX)) / ell ** 2
         for d in (0.02, 0.01)]
    assert r[0] < 0.01
    assert r[1] / r[0] == pytest.approx(0.25, abs=0.02)


@pytest.mark.parametrize("mode", [zc.EXACT, zc.APPROX])
def test_residue_identity(mode):
    h = zc.HeightContext(1e4, mode)
    out = zc.residue_check_zeta([0.1 + 0.3j], [0.05 - 0.6j, -0.1 + 0.9j], (), 0, 0, h, CTX)
    assert out["abs_error"] < 1e-8 * max(1.0, abs(out["rhs"]))
    assert abs(out["double_pole"]) < 1e-8 * max(1.0, abs(out["rhs"]))



# ---------------------------------------------------------------------------
# further documented examples


def test_x_factor_modes_at_moderate_height():
    h_exact = zc.HeightContext(1e6, zc.EXACT)
    r = 1.0 / H.ell
    S, T = [r * (0.3 + 0.8j)], [r * (-0.5 + 0.4j)]
    gap = abs(zc.x_factor(S, T, h_exact) / zc.x_factor(S, T, H) - 1)
    assert gap < 1e-4


def test_x_factor_exact_cancels_for_opposite_shifts():
    h = zc.HeightContext(1e5, zc.EXACT)
    a = 0.07 + 0.3j
    assert abs(zc.x_factor([a], [-a], h) - 1) < 1e-12


def test_general_one_sided_average_vanishes():
    assert abs(zc.jstar_zeta_general([], [0.1 + 0.4j], (), H, CTX)) < 1e-14
    assert abs(zc.jstar_zeta_general([0.1 + 0.4j], [], (), H, CTX)) < 1e-14


def test_pair_is_p1_plus_p2_with_independent_zeta():
    mpmath.mp.dps = 30
    h = zc.HeightContext.from_ell(25.0)
    ctx = pe.build_prime_context(1009)
    a, b = 0.04, 0.03
    x = a + b
    zeta = lambda s: complex(mpmath.zeta(s))  # noqa: E731
    logd_prime = complex(mpmath.diff(lambda u: mpmath.zeta(u, derivative=1) / mpmath.zeta(u), 1 + x))
    P1 = (math.exp(-25.0 * x) * pe.closed_form_prime_term("A", [x], ctx)
          * zeta(1 + x) * zeta(1 - x))
    P2 = logd_prime - pe.closed_form_prime_term("B", [x], ctx)
    got = zc.jstar_zeta_closed("pair", [a], [b], h, ctx)
    assert abs(got - (P1 + P2)) < 1e-9 * abs(P1 + P2)


def test_closed_form_symmetries():
    a1, a2, b1, b2 = 0.1 + 0.3j, -0.12 - 0.5j, 0.05 - 0.4j, 0.15 + 1.1j
    t1 = zc.jstar_zeta_closed("triple", [a1], [b1, b2], H, CTX)
    t2 = zc.jstar_zeta_closed("triple", [a1], [b2, b1], H, CTX)
    assert abs(t1 - t2) < 1e-12 * abs(t1)
    q = zc.jstar_zeta_closed("quad_2_2", [a1, a2], [b1, b2], H, CTX)
    assert abs(q - zc.jstar_zeta_closed("quad_2_2", [a2, a1], [b1, b2], H, CTX)) < 1e-12 * abs(q)
    assert abs(q - zc.jstar_zeta_closed("quad_2_2", [a1, a2], [b2, b1], H, CTX)) < 1e-12 * abs(q)


def test_three_point_assembly_term_count():
    # 27 ordered tripartitions; 1 + 6 + 6 carry nonzero averages
    from zetacorr.combinat import enumerate_tripartitions
    pts = (0.0, 0.4, 1.1)
    nonzero = {0: 0, 1: 0, 3: 0}
    for tp in enumerate_tripartitions(3):
        A = [-1j * pts[k - 1] for k in tp.K]
        B = [1j * pts[k - 1] for k in tp.L]
        val = zc._closed_any(A, B, H, CTX) if (A or B) else 1.0
        if val != 0:
            nonzero[len(tp.M)] += 1
    assert nonzero == {0: 6, 1: 6, 3: 1}


def test_pair_residue_is_chi_logderivative():
    h = zc.HeightContext(1e4, zc.EXACT)
    b = 0.05 - 0.6j
    out = zc.residue_check_zeta([0.1 + 0.3j], [b], (), 0, 0, h, CTX)
    assert abs(out["lhs"] + chi_logderiv(h.s - b)) < 1e-8 * abs(out["lhs"])


def test_residue_identity_two_by_two():
    h = zc.HeightContext(1e4, zc.EXACT)
    ctx = pe.build_prime_context(101)
    out = zc.residue_check_zeta([0.1 + 0.3j, -0.05 + 0.9j], [0.05 - 0.6j, 0.12 + 0.2j], (),
                                0, 0, h, ctx)
    assert out["abs_error"] < 1e-5 * abs(out["rhs"])
    assert abs(out["double_pole"]) < 1e-5 * max(1.0, abs(out["rhs"]))
