import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from zetacorr import mc_lab as mc
from zetacorr import rmt_core as rc
from zetacorr.errors import SideConditionViolated, TooLarge


def test_streams_are_deterministic_and_distinct():
    a = mc.sample_haar_eigenangles(6, mc.RngStream(11), 3).angles
    b = mc.sample_haar_eigenangles(6, mc.RngStream(11), 3).angles
    c = mc.sample_haar_eigenangles(6, mc.RngStream(11, stream_id=1), 3).angles
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


def test_haar_matrices_are_unitary():
    U = mc.haar_unitary(7, np.random.default_rng(0), count=5)
    eye = np.eye(7)
    for M in U:
        assert np.allclose(M.conj().T @ M, eye, atol=1e-12)


def test_size_one_angles_are_uniform():
    blocks = mc.sample_angles(1, 10000, mc.RngStream(5))
    x = np.concatenate(blocks).ravel() / (2 * np.pi)
    assert stats.kstest(x, "uniform").pvalue > 0.01


def test_sample_validation():
    with pytest.raises(TooLarge):
        mc.sample_haar_eigenangles(65, mc.RngStream(0))
    with pytest.raises(ValueError):
        mc.EigenAngleSample(3, np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        mc.EigenAngleSample(2, np.array([0.3, 0.2]))


def test_worker_count_does_not_change_results():
    f = mc.TrigPolynomial.from_dict(2, {(1, -1): 1.0})
    a = mc.estimate_correlation(2, 5, f, 800, mc.RngStream(3), workers=1)
    b = mc.estimate_correlation(2, 5, f, 800, mc.RngStream(3), workers=4)
    assert a.mean == b.mean
    assert a.std_error == b.std_error


def test_constant_function_counts_ordered_pairs():
    f = mc.TrigPolynomial.from_dict(2, {(0, 0): 1.0})
    est = mc.estimate_correlation(2, 6, f, 320, mc.RngStream(1))
    assert est.mean == pytest.approx(30.0, abs=1e-12)
    assert est.std_error < 1e-12


def test_mean_trace_is_zero():
    f = mc.TrigPolynomial.from_dict(1, {(1,): 1.0})
    est = mc.estimate_correlation(1, 5, f, 10000, mc.RngStream(2))
    assert abs(est.mean) < 4 * est.std_error + 1e-12


@pytest.mark.parametrize("k", [1, 3, 8])
def test_trace_power_moments(k):
    # E |Tr U^k|^2 = min(k, N); off-diagonal part subtracts N
    N = 6
    f = mc.TrigPolynomial.from_dict(2, {(k, -k): 1.0})
    est = mc.estimate_correlation(2, N, f, 6400, mc.RngStream(40 + k))
    expect = min(k, N) - N
    assert abs(est.mean - expect) < 4 * est.std_error + 1e-9


def test_std_error_scales_with_samples():
    f = mc.TrigPolynomial.from_dict(2, {(1, -1): 1.0, (2, -1): 0.5})
    a = mc.estimate_correlation(2, 6, f, 1600, mc.RngStream(9))
    b = mc.estimate_correlation(2, 6, f, 25600, mc.RngStream(9))
    ratio = a.std_error / b.std_error
    assert 4 / 1.5 < ratio < 4 * 1.5


def test_rotation_invariance_of_estimate():
    f = mc.TrigPolynomial.from_dict(2, {(1, -1): 1.0})
    blocks = mc.sample_angles(5, 320, mc.RngStream(12))
    a = mc._batch_estimate([mc.distinct_sum(f, x) for x in blocks]).mean
    b = mc._batch_estimate([mc.distinct_sum(f, np.mod(x + 0.9, 2 * np.pi)) for x in blocks]).mean
    assert abs(a - b) < 1e-10


def test_estimate_guards():
    f = mc.TrigPolynomial.from_dict(2, {(1, -1): 1.0})
    with pytest.raises(TooLarge):
        mc.estimate_correlation(5, 4, mc.TrigPolynomial.from_dict(5, {(0,) * 5: 1}), 100,
                                mc.RngStream(0))
    with pytest.raises(ValueError):
        mc.estimate_correlation(3, 4, f, 100, mc.RngStream(0))
    with pytest.raises(ValueError):
        mc._batch_estimate([np.ones(3)] * 4)
    with pytest.raises(ValueError):
        mc.TrigPolynomial.from_dict(2, {(1,): 1.0})


def _brute_distinct(f, angles):
    out = 0j
    for idx in itertools.permutations(range(len(angles)), f.n):
        out += f(*[angles[i] for i in idx])
    return out


@given(st.integers(1, 3), st.integers(3, 6), st.integers(0, 2 ** 31))
@settings(max_examples=30, deadline=None)
def test_distinct_sum_matches_brute_force(n, N, seed):
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0, 2 * np.pi, N)
    terms = {tuple(int(x) for x in rng.integers(-3, 4, n)): complex(rng.normal(), rng.normal())
             for _ in range(3)}
    f = mc.TrigPolynomial.from_dict(n, terms)
    got = mc.distinct_sum(f, ang)[0]
    assert abs(got - _brute_distinct(f, ang)) < 1e-10 * max(1.0, abs(got))


def test_population_integral_exact_for_trig_polynomials():
    f = mc.TrigPolynomial.from_dict(2, {(0, 0): 2.0, (1, -1): 5.0, (3, 0): 1.0})
    val = mc.population_integral(lambda th: f(*th), 2, 8)
    assert abs(val - 2.0) < 1e-13


def test_population_integral_against_rmt_density():
    # the expected distinct-pair sum equals the density integral
    N = 4
    f = mc.TrigPolynomial.from_dict(2, {(1, -1): 1.0, (-1, 1): 1.0})
    val = mc.population_integral(lambda th: f(*th) * rc.correlation_rmt(th, N), 2, 16)
    assert abs(val - 2 * (1 - N)) < 1e-8


def test_ratio_average_empty_sets_is_one():
    est = mc.estimate_ratio_average([], [], [], [], 4, 160, mc.RngStream(0))
    assert est.mean == 1
    assert est.std_error == 0


def test_ratio_average_against_closed_form():
    A, B, C, D = [0.3 + 0.2j], [0.2 - 0.4j], [0.4 + 0.1j], [0.35 + 0.2j]
    est = mc.estimate_ratio_average(A, B, C, D, 5, 16000, mc.RngStream(21))
    ref = rc.ratios_average(A, B, C, D, 5)
    assert abs(est.mean - ref) < 4 * est.std_error


def test_ratio_average_side_condition():
    with pytest.raises(SideConditionViolated):
        mc.estimate_ratio_average([], [], [-0.1], [], 4, 160, mc.RngStream(0))


def test_functional_equation_per_sample():
    blocks = mc.sample_angles(9, 64, mc.RngStream(4))
    for ang in blocks:
        assert np.max(mc.fe_residuals(ang)) < 1e-12
        assert np.max(mc.fe_product_residuals(ang)) < 1e-12


def test_char_poly_logderiv_matches_difference_quotient():
    ang = np.array([0.3, 1.4, 4.0])
    s, h = 0.6 + 0.2j, 1e-6
    fd = (mc.char_poly(s + h, ang) - mc.char_poly(s - h, ang)) / (2 * h) / mc.char_poly(s, ang)
    assert abs(mc.char_poly_logderiv(s, ang) - fd) < 1e-8
    assert math.isclose(abs(mc.char_poly(0.0, ang)), 1.0)


def test_one_point_constant_counts_eigenvalues():
    f = mc.TrigPolynomial.from_dict(1, {(0,): 1.0})
    blocks = mc.sample_angles(7, 64, mc.RngStream(8))
    for b in blocks:
        assert np.all(mc.distinct_sum(f, b) == 7)
    est = mc.estimate_correlation(1, 7, f, 64, mc.RngStream(8))
    assert est.mean == 7 and est.std_error == 0


@pytest.mark.parametrize("N", [3, 6])
def test_first_mode_population_value(N):
    # the e^{-i theta} coefficient of S_N^2 is N - 1, so the population
    # value of e^{i(theta_1 - theta_2)} is 1 - N
    f = mc.TrigPolynomial.from_dict(2, {(1, -1): 1.0})
    pop = mc.population_integral(lambda th: f(*th) * rc.correlation_rmt(th, N), 2, N + 3)
    assert abs(pop - (1 - N)) < 1e-9
    est = mc.estimate_correlation(2, N, f, 8000, mc.RngStream(60 + N))
    assert abs(est.mean - (1 - N)) < 3 * est.std_error


def test_numerator_only_ratio_against_closed_form():
    est = mc.estimate_ratio_average([0.1], [0.2], [], [], 4, 20000, mc.RngStream(22))
    ref = rc.ratios_average([0.1], [0.2], [], [], 4)
    assert abs(est.mean - ref) < 3 * est.std_error
