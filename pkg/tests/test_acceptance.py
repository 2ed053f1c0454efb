"""One test per acceptance criterion, at the stated parameters and tolerances.

Each test prints (and records for the terminal summary) a single PASS/FAIL
line with the measured quantity and its threshold.
"""
import os
import warnings

import pytest

from zetacorr import validation, zeros_io

from conftest import ACCEPTANCE_LINES

ZERO_TABLE_ENV = "ZETACORR_ZERO_TABLE"


def report(number: int, title: str, res) -> None:
    status = "PASS" if res.passed else "FAIL"
    line = (f"[{status}] {number:2d} {title}: measured={res.measured:.3g} "
            f"threshold={res.threshold:.3g} ({res.seconds:.1f}s)")
    print(line)
    ACCEPTANCE_LINES.append(line)


def test_01_determinant_equivalence():
    res = validation.check_determinant(ns=(2, 3, 4), Ns=(2, 3, 5, 8), tuples=100,
                                       min_sep=0.05, tol=1e-8)
    report(1, "correlation sum equals sine-kernel determinant", res)
    assert res.passed


def test_02_rmt_residue_identity():
    res = validation.check_residue_rmt(sizes=(1, 2, 3), Ns=(2, 5), tol=1e-6)
    report(2, "unitary residue identity and simple pole", res)
    assert res.details["relative_error"] < 1e-6
    assert res.details["double_pole"] < 1e-6
    assert res.passed


def test_03_on_axis_pole_cancellation():
    res = validation.check_on_axis(deltas=(1e-1, 1e-2, 1e-3, 1e-4), tol=1e-4)
    report(3, "no pole on the diagonal (Richardson variation)", res)
    assert res.passed


def test_04_ratios_monte_carlo():
    res = validation.check_mc_ratio(N=4, samples=20000, sigmas=3.0)
    report(4, "ratios formula and second moment vs Monte Carlo (z)", res)
    assert res.details["z_ratio"] <= 3.0
    assert res.details["z_moment"] <= 3.0
    assert res.passed


def test_05_correlation_monte_carlo():
    res = validation.check_mc_correlation(N=6, samples=20000, sigmas=3.0)
    report(5, "pair correlation integral vs Monte Carlo (z)", res)
    assert res.passed


def test_06_functional_equation_identity():
    res = validation.check_fe_identity(N=8, samples=1000, tol=1e-10)
    report(6, "per-sample functional equation residual", res)
    assert res.passed


def test_07_zeta_engine_equivalence():
    res = validation.check_engine_equivalence(cutoff=101, nodes=256, tuples=25, tol=1e-6)
    report(7, "closed forms vs general machinery (relative)", res)
    assert set(res.details["per_shape"]) == {"pair", "triple", "quad_1_3", "quad_2_2"}
    assert res.passed


def test_08_rmt_degeneration():
    res = validation.check_degeneration(sets=50, tol=1e-10)
    report(8, "prime-free zeta machinery equals unitary J*", res)
    assert res.passed


def test_09_scaling_limit():
    res = validation.check_scaling(t=1e12, tol=0.02)
    report(9, "scaled pair density vs 1 - sinc^2 (sup)", res)
    assert res.details["sup_deviation_doubled_ell"] < res.details["sup_deviation"]
    assert res.passed


def test_10_zeta_residue_identity():
    res = validation.check_residue_zeta(sizes=(1, 2), cutoff=101, tol=1e-5)
    report(10, "zeta residue identity, exact chi (relative)", res)
    assert res.passed


def test_11_empirical_zeros_pair():
    path = os.environ.get(ZERO_TABLE_ENV)
    if not path:
        line = f"[SKIP] 11 empirical zeros comparison: set {ZERO_TABLE_ENV} to a zero table"
        print(line)
        ACCEPTANCE_LINES.append(line)
        warnings.warn(f"criterion 11 skipped: no zero table ({ZERO_TABLE_ENV} unset)")
        pytest.skip("no zero table supplied")
    table = zeros_io.load_zero_table(path)
    res = validation.check_zeros_pair(table)
    report(11, "zeros pair statistic within 3 se; full beats sine in L2", res)
    assert res.details["l2_full"] < res.details["l2_sine"]
    assert res.passed
