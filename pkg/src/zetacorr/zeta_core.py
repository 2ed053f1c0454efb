"""Zeta side: averages of products of logarithmic derivatives of zeta near
height t, both from the general subset/partition machinery and from the
closed-form expressions for n <= 4, plus the assembled n-point density and
a numerical residue check.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .combinat import enumerate_tripartitions, set_partitions_idx, subset_pairs_idx
from .errors import ImaginaryResidue, PoleCollision, ProbeNotIsolated, TooLarge
from .numerics import (DEFAULT_EM, TWO_PI, EulerMaclaurinParams, LaurentProbe, chi_logderiv,
                       laurent_coefficients, log_chi_shift, z, zeta_suite, zlog, zlog_prime)
from .prime_engine import (LocalThetaData, PrimeContext, ThetaQuadrature, Zp_ratio,
                           H_p1, closed_form_prime_term)

EXACT = "exact_chi"
APPROX = "ell_approx"
COLLISION_TOL = 1e-6
MAX_GENERAL_SIZE = 4
CAVEAT = ("Zeta-side values rest on the ratios conjecture; its error term "
          "O(T^(1/2+eps)) is not quantified and is not included.")


@dataclass(frozen=True)
class HeightContext:
    t: float
    x_mode: str = APPROX

    def __post_init__(self):
        if not self.t > TWO_PI:
            raise ValueError("height t must exceed 2 pi")
        if self.x_mode not in (EXACT, APPROX):
            raise ValueError(f"x_mode must be {EXACT!r} or {APPROX!r}")

    @property
    def ell(self) -> float:
        return math.log(self.t / TWO_PI)

    @property
    def s(self) -> complex:
        return complex(0.5, self.t)

    @classmethod
    def from_ell(cls, ell: float, x_mode: str = APPROX) -> "HeightContext":
        return cls(TWO_PI * math.exp(ell), x_mode)


def x_factor(S: Sequence[complex], T: Sequence[complex], height: HeightContext) -> complex:
    """X_t(S,T) = prod chi(s + a) prod chi(1 - s + b), exactly or in the ell form."""
    if len(S) != len(T):
        raise ValueError("|S| must equal |T|")
    if not S:
        return 1.0 + 0j
    if height.x_mode == APPROX:
        return cmath.exp(-height.ell * (sum(S) + sum(T)))
    s = height.s
    logx = sum(log_chi_shift(s, a) for a in S) - sum(log_chi_shift(s, -b) for b in T)
    return cmath.exp(logx)


def u_factor(mu: complex, height: HeightContext) -> complex:
    """-chi'/chi(s + mu), or ell in the approximate mode."""
    if height.x_mode == APPROX:
        return complex(height.ell)
    return -chi_logderiv(height.s + mu)


# ---------------------------------------------------------------------------
# backends: zeta with primes, and the unitary-group analogue


class _NoPrimes:
    A = 1.0 + 0j

    def prime_H(self, mask: int) -> complex:
        return 0j


class _PrimeArithmetic:
    """Arithmetic factor and prime parts of script-H for one (S, T)."""

    def __init__(self, ctx: PrimeContext, quad: ThetaQuadrature, S, T, free):
        p = ctx.primes.astype(float)
        self.p = p
        self.S, self.T, self.free = S, T, free
        self.data = LocalThetaData(p, S, T, free, quad)
        Tm = [-t for t in T]
        Sm = [-s for s in S]
        self.A = complex(np.prod(Zp_ratio(p, Tm, Sm, S, T) * self.data.D))
        self._cache: dict = {}

    def prime_H(self, mask: int) -> complex:
        if mask not in self._cache:
            W = [self.free[i] for i in range(len(self.free)) if mask >> i & 1]
            h1 = H_p1(self.p, self.S, self.T, W)
            h2 = self.data.hp2(mask)
            self._cache[mask] = complex(np.sum(h2 - h1))
        return self._cache[mask]


class ZetaBackend:
    """zeta(1+x) family at height t with a truncated set of primes."""

    def __init__(self, height: HeightContext, primes: PrimeContext | None,
                 quad: ThetaQuadrature = ThetaQuadrature(), em: EulerMaclaurinParams = DEFAULT_EM):
        self.height = height
        self.primes = primes
        self.quad = quad
        self.em = em

    def zeta1(self, x):
        return zeta_suite(1.0 + x, "value", self.em)

    def logd(self, x):
        return zeta_suite(1.0 + x, "logderiv", self.em)

    def logdp(self, x):
        return zeta_suite(1.0 + x, "logderiv_prime", self.em)

    def x_factor(self, S, T):
        return x_factor(S, T, self.height)

    def u_factor(self, mu):
        return u_factor(mu, self.height)

    def arithmetic(self, S, T, free):
        if self.primes is None or len(self.primes.primes) == 0:
            return _NoPrimes()
        return _PrimeArithmetic(self.primes, self.quad, S, T, free)


class UnitaryBackend:
    """Substitutes z for zeta(1+.), N for ell and drops every prime term."""

    def __init__(self, N: int):
        self.N = N

    def zeta1(self, x):
        return z(x)

    def logd(self, x):
        return zlog(x)

    def logdp(self, x):
        return zlog_prime(x)

    def x_factor(self, S, T):
        return cmath.exp(-self.N * (sum(S) + sum(T)))

    def u_factor(self, mu):
        return complex(self.N)

    def arithmetic(self, S, T, free):
        return _NoPrimes()


def _check_collisions(A, B):
    for a in A:
        for b in B:
            if abs(a + b) < COLLISION_TOL:
                raise PoleCollision(f"alpha + beta = {a + b} at a pole", location=(a, b))
    for X in (A, B):
        for i in range(len(X)):
            for j in range(i + 1, len(X)):
                if abs(X[i] - X[j]) < COLLISION_TOL:
                    raise PoleCollision(f"shifts {X[i]} and {X[j]} collide", location=(X[i], X[j]))


def jstar_zeta_general(A, B, U=(), height: HeightContext | None = None,
                       primes: PrimeContext | None = None,
                       quad: ThetaQuadrature = ThetaQuadrature(), backend=None,
                       max_size: int = MAX_GENERAL_SIZE,
                       em: EulerMaclaurinParams = DEFAULT_EM) -> complex:
    """J*_{zeta,t}(A;B;U) from the sum over subsets and unrestricted set partitions."""
    A = [complex(a) for a in A]
    B = [complex(b) for b in B]
    U = [complex(u) for u in U]
    if len(A) + len(B) + len(U) > max_size:
        raise TooLarge(f"|A|+|B|+|U| = {len(A) + len(B) + len(U)} exceeds guard {max_size}")
    if backend is None:
        if height is None:
            raise ValueError("height is required for the zeta backend")
        backend = ZetaBackend(height, primes, quad, em)
    _check_collisions(A, B)
    m, n = len(A), len(B)
    total = 0j
    for Si, Ti in subset_pairs_idx(m, n):
        S = [A[i] for i in Si]
        T = [B[j] for j in Ti]
        Sbar = [A[i] for i in range(m) if i not in Si]
        Tbar = [B[j] for j in range(n) if j not in Ti]
        q = backend.x_factor(S, T)
        for s in S:
            for t in T:
                q *= backend.zeta1(s + t) * backend.zeta1(-s - t)
        for X in (S, T):
            for i, x in enumerate(X):
                for j, y in enumerate(X):
                    if i != j:
                        q /= backend.zeta1(x - y)
        free = [(a, "alpha") for a in Sbar] + [(b, "beta") for b in Tbar]
        arith = backend.arithmetic(S, T, free)
        k = len(free)
        Hval = {}
        for mask in range(1, 1 << k):
            W = [free[i] for i in range(k) if mask >> i & 1]
            h = 0j
            if len(W) == 1:
                v, side = W[0]
                same, other = (S, T) if side == "alpha" else (T, S)
                h = sum(backend.logd(v - x) for x in same) - sum(backend.logd(v + x) for x in other)
            elif len(W) == 2 and W[0][1] != W[1][1]:
                h = backend.logdp(W[0][0] + W[1][0])
            Hval[mask] = h + arith.prime_H(mask)
        psum = 0j
        for part in set_partitions_idx(k):
            term = 1.0 + 0j
            for block in part:
                mask = 0
                for b in block:
                    mask |= 1 << b
                term *= Hval[mask]
            psum += term
        total += q * arith.A * psum
    for mu in U:
        total *= backend.u_factor(mu)
    return total


# ---------------------------------------------------------------------------
# closed forms (ell form of X_t)


class ClosedForms:
    """Building blocks P1, P2, P3, W, W1 and the closed-form averages."""

    def __init__(self, height: HeightContext, primes: PrimeContext,
                 em: EulerMaclaurinParams = DEFAULT_EM):
        self.ell = height.ell
        self.ctx = primes
        self.em = em

    def zeta(self, s, order="value"):
        return zeta_suite(s, order, self.em)

    def prime(self, kind, *shifts):
        return closed_form_prime_term(kind, shifts, self.ctx, check_strip=False)

    def P1(self, x):
        return (cmath.exp(-self.ell * x) * self.prime("A", x)
                * self.zeta(1 + x) * self.zeta(1 - x))

    def P2(self, x):
        return self.zeta(1 + x, "logderiv_prime") - self.prime("B", x)

    def P3(self, a, b, c):
        return (self.prime("B1", a + b, a + c) + self.zeta(1 + a + c, "logderiv")
                - self.zeta(1 + c - b, "logderiv"))

    def W(self, a1, b1, a2, b2):
        return self.P1(a1 + b1) * (self.P2(a2 + b2) - self.prime("B3", a1, a2, b1, b2)
                                   + self.P3(a1, b1, b2) * self.P3(b1, a1, a2))

    def W1(self, a, b1, b2, b3):
        return self.P1(a + b1) * (self.P3(a, b1, b2) * self.P3(a, b1, b3)
                                  - self.prime("B2", a, b1, b2, b3))

    def pair(self, a, b):
        return self.P1(a + b) + self.P2(a + b)

    def triple(self, a, b1, b2):
        return (self.prime("Q", a + b1, a + b2) - self.P1(a + b1) * self.P3(a, b1, b2)
                - self.P1(a + b2) * self.P3(a, b2, b1))

    def quad_1_3(self, a, b1, b2, b3):
        return (self.prime("L4", a, b1, b2, b3)
                + self.W1(a, b1, b2, b3) + self.W1(a, b2, b1, b3) + self.W1(a, b3, b1, b2))

    def quad_2_2(self, a1, a2, b1, b2):
        zs = lambda x: self.zeta(1 + x)  # noqa: E731
        zratio = (zs(a1 + b1) * zs(a1 + b2) * zs(a2 + b1) * zs(a2 + b2)
                  * zs(-a1 - b1) * zs(-a1 - b2) * zs(-a2 - b1) * zs(-a2 - b2)
                  / (zs(a1 - a2) * zs(a2 - a1) * zs(b1 - b2) * zs(b2 - b1)))
        out = self.P2(a1 + b1) * self.P2(a2 + b2) + self.P2(a1 + b2) * self.P2(a2 + b1)
        out -= self.prime("B4", a1, a2, b1, b2)
        out += cmath.exp(-self.ell * (a1 + a2 + b1 + b2)) * self.prime("Astar", a1, a2, b1, b2) * zratio
        out += (self.W(a1, b1, a2, b2) + self.W(a1, b2, a2, b1)
                + self.W(a2, b1, a1, b2) + self.W(a2, b2, a1, b1))
        return out


SHAPES = {"pair": (1, 1), "triple": (1, 2), "quad_1_3": (1, 3), "quad_2_2": (2, 2)}


def jstar_zeta_closed(shape: str, A, B, height: HeightContext, primes: PrimeContext,
                      em: EulerMaclaurinParams = DEFAULT_EM) -> complex:
    """Closed-form J*_{zeta,t}(A;B) for the shapes with |A|=1 or |A|=|B|=2."""
    if shape not in SHAPES:
        raise ValueError(f"unknown shape {shape!r}")
    A = [complex(a) for a in A]
    B = [complex(b) for b in B]
    if (len(A), len(B)) != SHAPES[shape]:
        raise ValueError(f"shape {shape} needs |A|,|B| = {SHAPES[shape]}")
    _check_collisions(A, B)
    cf = ClosedForms(height, primes, em)
    if shape == "pair":
        return cf.pair(A[0], B[0])
    if shape == "triple":
        return cf.triple(A[0], B[0], B[1])
    if shape == "quad_1_3":
        return cf.quad_1_3(A[0], *B)
    return cf.quad_2_2(A[0], A[1], B[0], B[1])


def _closed_any(A, B, height, primes, em=DEFAULT_EM):
    """Closed form for any |A|+|B| <= 4 using the A<->B symmetry."""
    if len(A) > len(B):
        A, B = B, A
    if not A:
        return 0j if B else 1.0 + 0j
    key = (len(A), len(B))
    for shape, k in SHAPES.items():
        if k == key:
            return jstar_zeta_closed(shape, A, B, height, primes, em)
    raise TooLarge(f"no closed form for |A|,|B| = {key}")


# ---------------------------------------------------------------------------
# assembled n-point density


@dataclass(frozen=True)
class ZetaCorrelationRequest:
    points: tuple
    height: HeightContext
    primes: PrimeContext | None
    quad: ThetaQuadrature = ThetaQuadrature()
    engine: str = "closed_form"
    em: EulerMaclaurinParams = DEFAULT_EM

    @property
    def n(self) -> int:
        return len(self.points)


def correlation_zeta_complex(req: ZetaCorrelationRequest) -> complex:
    pts = [float(u) for u in req.points]
    n = len(pts)
    if n < 1 or n > 4:
        raise TooLarge(f"n={n} outside 1..4")
    for i in range(n):
        for j in range(i + 1, n):
            if abs(pts[i] - pts[j]) < COLLISION_TOL:
                raise PoleCollision(f"points {pts[i]} and {pts[j]} collide", location=(i, j))
    if req.engine == "closed_form" and req.height.x_mode != APPROX:
        raise ValueError("closed forms use the ell form of X_t")
    total = 0j
    for tp in enumerate_tripartitions(n):
        A = [-1j * pts[k - 1] for k in tp.K]
        B = [1j * pts[k - 1] for k in tp.L]
        Uset = [1j * pts[k - 1] for k in tp.M]
        if req.engine == "closed_form":
            val = _closed_any(A, B, req.height, req.primes, req.em) if (A or B) else 1.0 + 0j
            val *= req.height.ell ** len(Uset)
        elif req.engine == "general_machinery":
            val = jstar_zeta_general(A, B, Uset, req.height, req.primes, req.quad, em=req.em)
        else:
            raise ValueError(f"unknown engine {req.engine!r}")
        total += val
    return total


def correlation_zeta(req: ZetaCorrelationRequest, imag_tol: float = 1e-8) -> float:
    """R_{zeta,t,n} at the given offsets from t (t-local density, no averaging)."""
    val = correlation_zeta_complex(req)
    if abs(val.imag) > imag_tol * max(1.0, abs(val.real)):
        raise ImaginaryResidue(f"imaginary part {val.imag} of correlation {val.real}")
    return val.real


def pair_scaling_deviation(height: HeightContext, primes: PrimeContext,
                           r_grid: Sequence[float]) -> np.ndarray:
    """(1/ell^2) R_2(0, 2 pi r/ell) - (1 - sinc^2 r) over a grid of r."""
    ell = height.ell
    out = []
    for r in r_grid:
        req = ZetaCorrelationRequest((0.0, TWO_PI * r / ell), height, primes)
        val = correlation_zeta(req) / ell ** 2
        sinc = math.sin(math.pi * r) / (math.pi * r)
        out.append(val - (1.0 - sinc * sinc))
    return np.array(out)


# ---------------------------------------------------------------------------
# residue check


def residue_check_zeta(A, B, U, starA: int, starB: int, height: HeightContext,
                       primes: PrimeContext | None, probe: LaurentProbe | None = None,
                       quad: ThetaQuadrature = ThetaQuadrature(),
                       isolation_tol: float = 1e-6) -> dict:
    """Numerically extracted residue at alpha* = -beta* against the three-term
    right side built from shorter averages.
    """
    A = [complex(a) for a in A]
    B = [complex(b) for b in B]
    U = [complex(u) for u in U]
    bstar = B[starB]
    Ap = [a for i, a in enumerate(A) if i != starA]
    Bp = [b for j, b in enumerate(B) if j != starB]
    center = -bstar
    if probe is None:
        probe = LaurentProbe(center=center)
    backend = ZetaBackend(height, primes, quad)

    def f(astar):
        AA = list(A)
        AA[starA] = astar
        return jstar_zeta_general(AA, B, U, backend=backend)

    c1 = laurent_coefficients(f, center, probe.radius, probe.nodes, orders=(-2, -1))
    c2 = laurent_coefficients(f, center, 2 * probe.radius, probe.nodes, orders=(-1,))
    lhs = c1[-1]
    if height.x_mode == APPROX:
        factor = complex(height.ell)
    else:
        factor = -chi_logderiv(height.s - bstar)
    rhs = (factor * jstar_zeta_general(Ap, Bp, U, backend=backend)
           + jstar_zeta_general(Ap, B, U, backend=backend)
           + jstar_zeta_general(Ap + [-bstar], Bp, U, backend=backend))
    if abs(c2[-1] - lhs) > isolation_tol * max(1.0, abs(lhs)):
        raise ProbeNotIsolated(f"residues on radius {probe.radius} and {2 * probe.radius} "
                               f"differ: {lhs} vs {c2[-1]}")
    return {"lhs": lhs, "rhs": rhs, "abs_error": abs(lhs - rhs), "double_pole": c1[-2]}
