"""Monte Carlo over Haar-distributed unitary matrices: eigenangle sampling,
distinct-index correlation sums, ratio averages and a per-sample check of the
functional equation of the characteristic polynomial.
"""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .combinat import set_partitions_idx
from .errors import SideConditionViolated, TooLarge
from .numerics import TWO_PI

MAX_SIZE = 64
MIN_BATCHES = 16
FE_POINT = 0.7 * cmath.exp(0.3j)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by (seed, stream_id).

    Sub-streams for batches are spawned through numpy's SeedSequence, so
    distinct ids give independent PCG64 streams.
    """
    seed: int
    stream_id: int = 0

    def generator(self, *sub: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,) + tuple(sub))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class EigenAngleSample:
    N: int
    angles: np.ndarray

    def __post_init__(self):
        if len(self.angles) != self.N:
            raise ValueError("need exactly N angles")
        if np.any(np.diff(self.angles) < 0):
            raise ValueError("angles must be sorted")


@dataclass(frozen=True)
class EstimateWithError:
    mean: complex
    std_error: float
    samples: int
    batch_means: np.ndarray = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# sampling


def haar_unitary(N: int, gen: np.random.Generator, count: int | None = None) -> np.ndarray:
    """Haar unitary matrices: Ginibre -> QR -> phases of diag(R) moved into Q."""
    shape = (N, N) if count is None else (count, N, N)
    while True:
        Z = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / math.sqrt(2.0)
        Q, R = np.linalg.qr(Z)
        d = np.diagonal(R, axis1=-2, axis2=-1)
        if np.all(np.abs(d) > 0.0):  # degenerate QR has probability zero
            break
    return Q * (d / np.abs(d))[..., None, :]


def _angles_batch(N: int, count: int, gen: np.random.Generator) -> np.ndarray:
    U = haar_unitary(N, gen, count)
    ev = np.linalg.eigvals(U)
    return np.sort(np.mod(np.angle(ev), TWO_PI), axis=-1)


def _check_size(N: int):
    if not 1 <= N <= MAX_SIZE:
        raise TooLarge(f"N={N} outside 1..{MAX_SIZE}")


def sample_haar_eigenangles(size: int, rng: RngStream, index: int = 0) -> EigenAngleSample:
    """Sorted eigenangles of one Haar unitary; ``index`` selects the draw."""
    _check_size(size)
    gen = rng.generator(index)
    U = haar_unitary(size, gen)
    ang = np.sort(np.mod(np.angle(np.linalg.eigvals(U)), TWO_PI))
    # sum of angles must match arg det U
    d = (ang.sum() - cmath.phase(np.linalg.det(U))) % TWO_PI
    if min(d, TWO_PI - d) > 1e-8:
        raise ArithmeticError("eigenangles inconsistent with det")
    return EigenAngleSample(size, ang)


def sample_angles(size: int, samples: int, rng: RngStream, batches: int = MIN_BATCHES,
                  workers: int = 1) -> list:
    """Eigenangle arrays, one (batch_size, N) array per batch, in batch order.

    Batch b is drawn from sub-stream b, so the result does not depend on the
    number of workers.
    """
    _check_size(size)
    sizes = [len(c) for c in np.array_split(np.arange(samples), batches)]

    def job(b):
        return _angles_batch(size, sizes[b], rng.generator(b))

    if workers <= 1:
        return [job(b) for b in range(batches)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(job, range(batches)))


def _batch_estimate(values_per_batch: Sequence[np.ndarray]) -> EstimateWithError:
    if len(values_per_batch) < MIN_BATCHES:
        raise ValueError(f"need at least {MIN_BATCHES} batches")
    means = np.array([np.mean(v) for v in values_per_batch])
    counts = np.array([len(v) for v in values_per_batch])
    total = int(counts.sum())
    mean = complex(np.sum(means * counts) / total)
    B = len(means)
    spread = np.abs(means - means.mean())
    se = float(math.sqrt(np.sum(spread ** 2) / (B - 1) / B))
    return EstimateWithError(mean, se, total, means)


# ---------------------------------------------------------------------------
# test functions and distinct-index sums


@dataclass(frozen=True)
class TrigPolynomial:
    """f(theta_1..theta_n) = sum_k c_k exp(i k . theta), finitely many k."""
    n: int
    terms: tuple  # ((k_1, ..., k_n), c) pairs

    def __post_init__(self):
        for k, _ in self.terms:
            if len(k) != self.n:
                raise ValueError("frequency vector has wrong arity")

    @classmethod
    def from_dict(cls, n: int, terms: dict) -> "TrigPolynomial":
        return cls(n, tuple((tuple(int(x) for x in k), complex(c)) for k, c in terms.items()))

    @property
    def degree(self) -> int:
        return max((max(abs(x) for x in k) for k, _ in self.terms), default=0)

    def __call__(self, *thetas):
        out = 0j
        for k, c in self.terms:
            out = out + c * np.exp(1j * sum(ki * th for ki, th in zip(k, thetas)))
        return out


def _mobius_weight(part) -> int:
    w = 1
    for block in part:
        w *= (-1) ** (len(block) - 1) * math.factorial(len(block) - 1)
    return w


def distinct_sum(f: TrigPolynomial, angles: np.ndarray) -> np.ndarray:
    """Sum of f over n-tuples of distinct indices, for each row of angles.

    Uses Moebius inversion over set partitions of the n slots, so each term
    reduces to power sums p_k = sum_j exp(i k theta_j).
    """
    angles = np.atleast_2d(angles)
    parts = set_partitions_idx(f.n)
    weights = [_mobius_weight(p) for p in parts]
    cache: dict = {}

    def power(k):
        if k not in cache:
            cache[k] = np.exp(1j * k * angles).sum(axis=-1)
        return cache[k]

    out = np.zeros(angles.shape[0], dtype=complex)
    for k, c in f.terms:
        acc = np.zeros_like(out)
        for part, w in zip(parts, weights):
            term = np.full_like(out, w)
            for block in part:
                term = term * power(sum(k[i] for i in block))
            acc += term
        out += c * acc
    return out


def estimate_correlation(n: int, size: int, f: TrigPolynomial, samples: int, rng: RngStream,
                         batches: int = MIN_BATCHES, workers: int = 1) -> EstimateWithError:
    """Monte Carlo average of the distinct-index sum of f over Haar matrices."""
    if not 1 <= n <= 4:
        raise TooLarge(f"n={n} outside 1..4")
    if f.n != n:
        raise ValueError("test function arity differs from n")
    blocks = sample_angles(size, samples, rng, batches, workers)
    return _batch_estimate([distinct_sum(f, a) for a in blocks])


# ---------------------------------------------------------------------------
# characteristic polynomials


def char_poly(s, angles: np.ndarray, conjugate: bool = False) -> np.ndarray:
    """Lambda_X(s) = prod (1 - s e^{-i theta}); with ``conjugate`` Lambda_{X*}."""
    sign = 1.0 if conjugate else -1.0
    return np.prod(1.0 - s * np.exp(sign * 1j * angles), axis=-1)


def char_poly_logderiv(s, angles: np.ndarray, conjugate: bool = False) -> np.ndarray:
    """Lambda'/Lambda at s."""
    sign = 1.0 if conjugate else -1.0
    e = np.exp(sign * 1j * angles)
    return np.sum(-e / (1.0 - s * e), axis=-1)


def ratio_values(A, B, C, D, angles: np.ndarray) -> np.ndarray:
    """Per-sample ratio of characteristic polynomials at e^{-shift}."""
    out = np.ones(np.atleast_2d(angles).shape[0], dtype=complex)
    for a in A:
        out *= char_poly(cmath.exp(-a), angles)
    for b in B:
        out *= char_poly(cmath.exp(-b), angles, conjugate=True)
    for g in C:
        out /= char_poly(cmath.exp(-g), angles)
    for d in D:
        out /= char_poly(cmath.exp(-d), angles, conjugate=True)
    return out


def estimate_ratio_average(A, B, C, D, size: int, samples: int, rng: RngStream,
                           batches: int = MIN_BATCHES, workers: int = 1) -> EstimateWithError:
    """Monte Carlo average of the ratio of characteristic polynomials."""
    A, B, C, D = ([complex(x) for x in X] for X in (A, B, C, D))
    if any(g.real <= 0 for g in C) or any(d.real <= 0 for d in D):
        raise SideConditionViolated("need Re gamma > 0 and Re delta > 0")
    blocks = sample_angles(size, samples, rng, batches, workers)
    return _batch_estimate([ratio_values(A, B, C, D, a) for a in blocks])


def fe_residuals(angles: np.ndarray, s: complex = FE_POINT) -> np.ndarray:
    """|s L'/L_X(s) + (1/s) L'/L_{X*}(1/s) - N| per sample."""
    angles = np.atleast_2d(angles)
    N = angles.shape[-1]
    lhs = s * char_poly_logderiv(s, angles) + char_poly_logderiv(1 / s, angles, conjugate=True) / s
    return np.abs(lhs - N)


def fe_product_residuals(angles: np.ndarray, s: complex = FE_POINT) -> np.ndarray:
    """Relative residual of Lambda_X(s) = (-1)^N det X* s^N Lambda_{X*}(1/s)."""
    angles = np.atleast_2d(angles)
    N = angles.shape[-1]
    detstar = np.exp(-1j * angles.sum(axis=-1))
    lhs = char_poly(s, angles)
    rhs = (-1) ** N * detstar * s ** N * char_poly(1 / s, angles, conjugate=True)
    return np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))


def population_integral(func: Callable, n: int, nodes: int) -> complex:
    """(2 pi)^{-n} times the integral of func over the n-torus by the product
    trapezoid rule. Variable i is offset by i h / n so no two coordinates
    coincide on the grid; exact for trig polynomials of degree < nodes.
    """
    h = TWO_PI / nodes
    grids = [np.arange(nodes) * h + i * h / n for i in range(n)]
    total = 0j
    for idx in np.ndindex(*([nodes] * n)):
        total += func([grids[i][j] for i, j in enumerate(idx)])
    return total / nodes ** n
