"""Named numerical checks with thresholds, shared by the command line and the
acceptance tests. Every check returns a CheckResult with the measured value
next to its threshold.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import mc_lab, rmt_core, zeros_io, zeta_core
from .numerics import DEFAULT_EM, TWO_PI, EulerMaclaurinParams
from .prime_engine import ThetaQuadrature, build_prime_context


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: measured {self.measured:.3e} "
                f"vs threshold {self.threshold:.3e} ({self.seconds:.1f} s)")


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def random_angles(n: int, rng: np.random.Generator, min_sep: float = 0.05) -> np.ndarray:
    """n angles in [0, 2pi) with pairwise circular separation at least min_sep."""
    while True:
        th = rng.uniform(0.0, TWO_PI, n)
        d = np.abs(np.subtract.outer(th, th)) % TWO_PI
        d = np.minimum(d, TWO_PI - d)
        np.fill_diagonal(d, np.inf)
        if d.min() >= min_sep:
            return th


def random_shifts(k: int, rng: np.random.Generator, re: float = 0.2, im: float = 1.0) -> list:
    return list(rng.uniform(-re, re, k) + 1j * rng.uniform(-im, im, k))


def _well_separated(A, B, center, radius) -> bool:
    """No other singular or near-coincident point within ``radius`` of the probe."""
    pts = [-b for b in B] + list(A)
    others = [p for p in pts if abs(p - center) > 1e-14]
    if any(abs(p - center) < radius for p in others):
        return False
    vals = list(A) + [-b for b in B]
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if abs(vals[i] - vals[j]) < radius and abs(vals[i] - center) > 1e-14:
                return False
    return True


# ---------------------------------------------------------------------------
# unitary-group checks


@_timed
def check_determinant(ns=(2, 3, 4), Ns=(2, 3, 5, 8), tuples: int = 100, seed: int = 0,
                      min_sep: float = 0.05, tol: float = 1e-8) -> CheckResult:
    """n-point formula against the sine-kernel determinant."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in ns:
        for N in Ns:
            for _ in range(tuples):
                th = random_angles(n, rng, min_sep)
                r = rmt_core.correlation_rmt(th, N)
                d = rmt_core.determinant_oracle(th, N)
                worst = max(worst, abs(r - d) / max(1.0, abs(d)))
    return CheckResult("determinant", worst <= tol, worst, tol,
                       {"ns": list(ns), "Ns": list(Ns), "tuples": tuples})


@_timed
def check_residue_rmt(sizes=(1, 2, 3), Ns=(2, 5), trials: int = 2, seed: int = 1,
                      tol: float = 1e-6) -> CheckResult:
    """Contour-extracted residue of J* against the three-term identity."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_dp = 0.0
    for k in sizes:
        for N in Ns:
            done = 0
            while done < trials:
                A = random_shifts(k, rng, 0.3, 2.0)
                B = random_shifts(k, rng, 0.3, 2.0)
                if not _well_separated(A, B, -B[0], 0.1):
                    continue
                res = rmt_core.residue_check(A, B, 0, 0, N)
                worst = max(worst, res["abs_error"] / max(1.0, abs(res["rhs"])))
                worst_dp = max(worst_dp, abs(res["double_pole"]))
                done += 1
    measured = max(worst, worst_dp)
    return CheckResult("residue-rmt", measured < tol, measured, tol,
                       {"relative_error": worst, "double_pole": worst_dp,
                        "sizes": list(sizes), "Ns": list(Ns)})


@_timed
def check_on_axis(configs=((2, 4), (3, 5), (4, 3)), deltas=(1e-1, 1e-2, 1e-3, 1e-4),
                  seed: int = 2, tol: float = 1e-4) -> CheckResult:
    """Correlation sum as theta_1 - theta_2 -> 0: the extrapolated variation
    stays bounded, so no pole sits on the diagonal."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    limits = []
    for n, N in configs:
        base = random_angles(n, rng, 0.3)
        vals = []
        for d in deltas:
            th = list(base)
            th[1] = th[0] + d
            vals.append(rmt_core.correlation_rmt_complex(th, N, allow_close=True))
        limit, spread = rmt_core.richardson_variation(deltas, vals)
        th = list(base)
        th[1] = th[0]
        det = rmt_core.determinant_oracle(th, N)
        worst = max(worst, spread)
        limits.append({"n": n, "N": N, "extrapolated": limit.real, "determinant": det})
    return CheckResult("on-axis", worst < tol, worst, tol, {"configs": limits})


@_timed
def check_mc_ratio(N: int = 4, samples: int = 20000, seed: int = 3, workers: int = 1,
                   sigmas: float = 3.0) -> CheckResult:
    """Monte Carlo ratio average and the second-moment limit against formulas."""
    A, B, C, D = [0.1], [0.2], [0.3], [0.25]
    est = mc_lab.estimate_ratio_average(A, B, C, D, N, samples, mc_lab.RngStream(seed, 0),
                                        workers=workers)
    formula = rmt_core.ratios_average(A, B, C, D, N)
    z1 = abs(est.mean - formula) / est.std_error
    eps = 1e-3
    mom = mc_lab.estimate_ratio_average([eps], [eps], [], [], N, samples,
                                        mc_lab.RngStream(seed, 1), workers=workers)
    z2 = abs(mom.mean - (N + 1)) / mom.std_error
    measured = max(z1, z2)
    return CheckResult("mc-ratio", measured <= sigmas, measured, sigmas,
                       {"mc": [est.mean.real, est.mean.imag], "std_error": est.std_error,
                        "formula": formula.real, "moment_mc": mom.mean.real,
                        "moment_std_error": mom.std_error, "moment_limit": N + 1,
                        "z_ratio": z1, "z_moment": z2})


CORRELATION_TEST_FUNCTION = mc_lab.TrigPolynomial.from_dict(
    2, {(1, -1): 0.5, (-1, 1): 0.5, (2, -2): 0.25, (-2, 2): 0.25, (1, 1): 0.3, (0, 0): 1.0})


@_timed
def check_mc_correlation(N: int = 6, samples: int = 20000, seed: int = 4, workers: int = 1,
                         sigmas: float = 3.0) -> CheckResult:
    """Monte Carlo distinct-pair sum against the integral of R_{N,2} f."""
    f = CORRELATION_TEST_FUNCTION
    est = mc_lab.estimate_correlation(2, N, f, samples, mc_lab.RngStream(seed, 0), workers=workers)
    nodes = N + f.degree + 2
    pop = mc_lab.population_integral(lambda th: rmt_core.correlation_rmt(th, N) * f(*th), 2, nodes)
    z = abs(est.mean - pop) / est.std_error
    return CheckResult("mc-correlation", z <= sigmas, z, sigmas,
                       {"mc": [est.mean.real, est.mean.imag], "std_error": est.std_error,
                        "population": [pop.real, pop.imag]})


@_timed
def check_fe_identity(N: int = 8, samples: int = 1000, seed: int = 5,
                      tol: float = 1e-10) -> CheckResult:
    """Per-sample functional equation of the characteristic polynomial."""
    blocks = mc_lab.sample_angles(N, samples, mc_lab.RngStream(seed, 0))
    r1 = max(float(mc_lab.fe_residuals(a).max()) for a in blocks)
    r2 = max(float(mc_lab.fe_product_residuals(a).max()) for a in blocks)
    measured = max(r1, r2)
    return CheckResult("fe-identity", measured < tol, measured, tol,
                       {"logderiv_residual": r1, "product_residual": r2, "samples": samples})


# ---------------------------------------------------------------------------
# zeta checks


@_timed
def check_engine_equivalence(cutoff: int = 101, nodes: int = 256, tuples: int = 25,
                             t: float = 1e4, seed: int = 6, tol: float = 1e-6,
                             em: EulerMaclaurinParams = DEFAULT_EM) -> CheckResult:
    """Closed forms against the general subset/partition machinery."""
    rng = np.random.default_rng(seed)
    height = zeta_core.HeightContext(t)
    ctx = build_prime_context(cutoff)
    quad = ThetaQuadrature(nodes)
    per_shape = {}
    for shape, (m, n) in zeta_core.SHAPES.items():
        worst = 0.0
        for _ in range(tuples):
            A = random_shifts(m, rng, 0.2, 1.0)
            B = random_shifts(n, rng, 0.2, 1.0)
            g = zeta_core.jstar_zeta_general(A, B, (), height, ctx, quad, em=em)
            c = zeta_core.jstar_zeta_closed(shape, A, B, height, ctx, em)
            worst = max(worst, abs(g - c) / max(1.0, abs(g)))
        per_shape[shape] = worst
    measured = max(per_shape.values())
    return CheckResult("engine-equivalence", measured <= tol, measured, tol,
                       {"per_shape": per_shape, "cutoff": cutoff, "nodes": nodes})


@_timed
def check_degeneration(sets: int = 50, seed: int = 7, tol: float = 1e-10) -> CheckResult:
    """Prime-free zeta machinery with z, N in place of zeta, ell equals J*."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(sets):
        m = int(rng.integers(0, 3))
        n = int(rng.integers(0, 5 - m))
        N = int(rng.integers(1, 12))
        A = random_shifts(m, rng, 0.3, 3.0)
        B = random_shifts(n, rng, 0.3, 3.0)
        g = zeta_core.jstar_zeta_general(A, B, backend=zeta_core.UnitaryBackend(N))
        r = rmt_core.jstar(A, B, N)
        worst = max(worst, abs(g - r) / max(1.0, abs(r)))
    return CheckResult("degeneration", worst <= tol, worst, tol, {"sets": sets})


@_timed
def check_scaling(t: float = 1e12, cutoff: int = 10000, points: int = 59,
                  tol: float = 0.02) -> CheckResult:
    """Scaled pair density against 1 - sinc^2, at t and at doubled ell."""
    ctx = build_prime_context(cutoff, "geometric-estimate")
    r = np.linspace(0.1, 3.0, points)
    h1 = zeta_core.HeightContext(t)
    h2 = zeta_core.HeightContext.from_ell(2 * h1.ell)
    d1 = float(np.abs(zeta_core.pair_scaling_deviation(h1, ctx, r)).max())
    d2 = float(np.abs(zeta_core.pair_scaling_deviation(h2, ctx, r)).max())
    passed = d1 < tol and d2 < d1
    return CheckResult("scaling", passed, d1, tol,
                       {"ell": h1.ell, "sup_deviation": d1, "sup_deviation_doubled_ell": d2})


@_timed
def check_residue_zeta(sizes=(1, 2), cutoff: int = 101, t: float = 1e4, trials: int = 2,
                       seed: int = 8, tol: float = 1e-5) -> CheckResult:
    """Residue identity for the zeta average with the exact chi factor."""
    rng = np.random.default_rng(seed)
    height = zeta_core.HeightContext(t, zeta_core.EXACT)
    ctx = build_prime_context(cutoff)
    worst = 0.0
    worst_dp = 0.0
    for k in sizes:
        done = 0
        while done < trials:
            A = random_shifts(k, rng, 0.1, 1.0)
            B = random_shifts(k, rng, 0.1, 1.0)
            if not _well_separated(A, B, -B[0], 0.1):
                continue
            res = zeta_core.residue_check_zeta(A, B, [], 0, 0, height, ctx)
            worst = max(worst, res["abs_error"] / max(1.0, abs(res["rhs"])))
            worst_dp = max(worst_dp, abs(res["double_pole"]) / max(1.0, abs(res["rhs"])))
            done += 1
    return CheckResult("residue-zeta", worst < tol, worst, tol,
                       {"relative_error": worst, "double_pole": worst_dp, "cutoff": cutoff})


ZEROS_WINDOW = (1e4, 5e4)
ZEROS_SIGMA = 0.25
ZEROS_CENTERS = tuple(np.round(np.linspace(0.0, 2.4, 13), 6))
ZEROS_MIN_COUNT = 10000


@_timed
def check_zeros_pair(table: zeros_io.ZeroTable, window=ZEROS_WINDOW, sigma: float = ZEROS_SIGMA,
                     centers=ZEROS_CENTERS, cutoff: int = 10000, sigmas: float = 3.0) -> CheckResult:
    """Gaussian pair statistic of tabulated zeros against the conjectured
    density, and the lower-order terms against the plain sine-kernel limit."""
    lo, hi = window
    inside = int(np.sum((table.gammas > lo) & (table.gammas <= hi)))
    if inside < ZEROS_MIN_COUNT:
        return CheckResult("zeros-pair", False, float(inside), float(ZEROS_MIN_COUNT),
                           {"error": f"only {inside} ordinates in window"})
    ctx = build_prime_context(cutoff, "geometric-estimate")
    fams = [zeros_io.GaussianDifference(2, sigma, c) for c in centers]
    emp = [zeros_io.empirical_correlation(table, 2, f, window) for f in fams]
    full = zeros_io.conjecture_pair_statistic(fams, window, ctx, "full")
    sine = zeros_io.conjecture_pair_statistic(fams, window, None, "sine")
    values = np.array([e.value for e in emp])
    errors = np.array([e.std_error for e in emp])
    z0 = abs(values[0] - full[0]) / errors[0]
    disc_full = float(np.sqrt(np.sum((values - full) ** 2)))
    disc_sine = float(np.sqrt(np.sum((values - sine) ** 2)))
    passed = z0 <= sigmas and disc_full < disc_sine
    return CheckResult("zeros-pair", passed, float(z0), sigmas,
                       {"ordinates_in_window": inside, "empirical": values.tolist(),
                        "std_error": errors.tolist(), "conjecture_full": full.tolist(),
                        "conjecture_sine": sine.tolist(), "l2_full": disc_full,
                        "l2_sine": disc_sine, "centers": list(centers), "sigma": sigma})
