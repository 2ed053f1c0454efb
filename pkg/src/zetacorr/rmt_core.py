"""Unitary-group formulas: the ratios average, the logarithmic-derivative
average J*(A;B), the n-point correlation R_{N,n}, the sine-kernel determinant
and a numerical residue check.
"""
from __future__ import annotations

import cmath
import math
from typing import Sequence

import numpy as np

from .combinat import enumerate_tripartitions, matchings_idx, subset_pairs_idx
from .errors import (ImaginaryResidue, PoleCollision, ProbeNotIsolated,
                     SideConditionViolated, TooLarge)
from .numerics import (TWO_PI, LaurentProbe, laurent_coefficients, sine_kernel,
                       z, zlog, zlog_prime)

COLLISION_TOL = 1e-6
DAGGER_TOL = 1e-12
MAX_CORRELATION_N = 4
MAX_SIZE = 64


def _vals(X) -> list:
    """Accept a ShiftSet or any sequence of numbers; return complex values."""
    if hasattr(X, "values") and not callable(X.values):
        return [complex(v) for v in X.values]
    return [complex(v) for v in X]


def _near_pole(x: complex, tol: float) -> bool:
    k = round(x.imag / TWO_PI)
    return abs(x - 1j * TWO_PI * k) < tol


def _zprod(X, Y) -> complex:
    out = 1.0 + 0j
    for x in X:
        for y in Y:
            out *= z(x + y)
    return out


def Z_ratio(A, B, C, D) -> complex:
    """Z(A,B;C,D) = Z(A,B) Z(C,D) / (Z(A,D) Z(B,C))."""
    for X, Y in ((A, B), (C, D), (A, D), (B, C)):
        for x in X:
            for y in Y:
                if _near_pole(x + y, DAGGER_TOL):
                    raise PoleCollision("z argument hits a pole", location=(x, y))
    return _zprod(A, B) * _zprod(C, D) / (_zprod(A, D) * _zprod(B, C))


def ratios_average(A, B, C, D, N: int) -> complex:
    """Haar average of the ratio of characteristic polynomials, in closed form."""
    A, B, C, D = _vals(A), _vals(B), _vals(C), _vals(D)
    if N < 1:
        raise ValueError("N must be >= 1")
    if any(g.real <= 0 for g in C) or any(d.real <= 0 for d in D):
        raise SideConditionViolated("need Re gamma > 0 and Re delta > 0")
    if len(C) > len(A) + N or len(D) > len(B) + N:
        raise SideConditionViolated("need |C| <= |A| + N and |D| <= |B| + N")
    total = 0j
    for S, T in subset_pairs_idx(len(A), len(B)):
        Sv = [A[i] for i in S]
        Tv = [B[j] for j in T]
        Sbar = [A[i] for i in range(len(A)) if i not in S]
        Tbar = [B[j] for j in range(len(B)) if j not in T]
        first = Sbar + [-t for t in Tv]
        second = Tbar + [-s for s in Sv]
        total += cmath.exp(-N * (sum(Sv) + sum(Tv))) * Z_ratio(first, second, C, D)
    return total


def _check_shifts(A, B, allow_same_side: bool, tol: float = COLLISION_TOL):
    for a in A:
        for b in B:
            if _near_pole(a + b, tol):
                raise PoleCollision(f"alpha + beta = {a + b} is at a pole", location=(a, b))
    if allow_same_side:
        tol = DAGGER_TOL
    for X in (A, B):
        for i in range(len(X)):
            for j in range(i + 1, len(X)):
                if _near_pole(X[i] - X[j], tol):
                    raise PoleCollision(f"shifts {X[i]} and {X[j]} collide", location=(X[i], X[j]))


def jstar(A, B, N: int, allow_same_side: bool = False) -> complex:
    """J*(A;B): average of the product of logarithmic derivatives.

    ``allow_same_side`` relaxes the collision guard for nearly equal shifts on
    the same side (used when probing the removable singularity).
    """
    A, B = _vals(A), _vals(B)
    _check_shifts(A, B, allow_same_side)
    m, n = len(A), len(B)
    total = 0j
    for S, T in subset_pairs_idx(m, n):
        Sv = [A[i] for i in S]
        Tv = [B[j] for j in T]
        Sbar = [A[i] for i in range(m) if i not in S]
        Tbar = [B[j] for j in range(n) if j not in T]
        pref = cmath.exp(-N * (sum(Sv) + sum(Tv)))
        for a in Sv:
            for b in Tv:
                pref *= z(a + b) * z(-a - b)
        # dagger products skip the diagonal i = j
        for X in (Sv, Tv):
            for i, x in enumerate(X):
                for j, y in enumerate(X):
                    if i != j:
                        pref /= z(x - y)
        ha = [sum(zlog(a - s) for s in Sv) - sum(zlog(a + t) for t in Tv) for a in Sbar]
        hb = [sum(zlog(b - t) for t in Tv) - sum(zlog(b + s) for s in Sv) for b in Tbar]
        psum = 0j
        for match in matchings_idx(len(Sbar), len(Tbar)):
            term = 1.0 + 0j
            used_a = set()
            used_b = set()
            for i, j in match:
                term *= zlog_prime(Sbar[i] + Tbar[j])
                used_a.add(i)
                used_b.add(j)
            for i, h in enumerate(ha):
                if i not in used_a:
                    term *= h
            for j, h in enumerate(hb):
                if j not in used_b:
                    term *= h
            psum += term
        total += pref * psum
    return total


def _check_points(thetas, tol: float = COLLISION_TOL):
    for i in range(len(thetas)):
        for j in range(i + 1, len(thetas)):
            d = (thetas[i] - thetas[j]) % TWO_PI
            if min(d, TWO_PI - d) < tol:
                raise PoleCollision(f"angles {thetas[i]} and {thetas[j]} collide", location=(i, j))


def correlation_rmt_complex(thetas: Sequence[float], N: int, allow_close: bool = False) -> complex:
    """Sum over K+L+M of N^{|M|} J*(-i theta_K; i theta_L), before projection."""
    thetas = [float(t) for t in thetas]
    n = len(thetas)
    if n > MAX_CORRELATION_N:
        raise TooLarge(f"n={n} exceeds guard {MAX_CORRELATION_N}")
    if N < 1 or N > MAX_SIZE:
        raise TooLarge(f"N={N} outside 1..{MAX_SIZE}")
    if not allow_close:
        _check_points(thetas)
    total = 0j
    for tp in enumerate_tripartitions(n):
        A = [-1j * thetas[k - 1] for k in tp.K]
        B = [1j * thetas[k - 1] for k in tp.L]
        total += N ** len(tp.M) * jstar(A, B, N, allow_same_side=allow_close)
    return total


def correlation_rmt(thetas: Sequence[float], N: int, allow_close: bool = False,
                    imag_tol: float = 1e-8) -> float:
    """n-point correlation R_{N,n} at the given eigenangles."""
    val = correlation_rmt_complex(thetas, N, allow_close=allow_close)
    if abs(val.imag) > imag_tol * max(1.0, abs(val.real)):
        raise ImaginaryResidue(f"imaginary part {val.imag} of correlation {val.real}")
    return val.real


def determinant_oracle(thetas: Sequence[float], N: int) -> float:
    """det[S_N(theta_j - theta_k)] via LU with partial pivoting."""
    th = np.asarray(thetas, dtype=float)
    if th.size == 0:
        return 1.0
    M = sine_kernel(N, np.subtract.outer(th, th))
    return float(np.linalg.det(M))


def richardson_even(deltas: Sequence[float], values: Sequence[complex]) -> list:
    """Richardson tableau for F(delta) = F0 + c1 delta^2 + c2 delta^4 + ...

    Neville extrapolation to delta = 0 in the variable h = delta^2. Returns
    the list of levels; level k removes the terms through delta^{2k}.
    """
    levels = [list(values)]
    for k in range(1, len(deltas)):
        prev = levels[-1]
        cur = []
        for i in range(len(prev) - 1):
            hi, hk = deltas[i] ** 2, deltas[i + k] ** 2
            cur.append((hi * prev[i + 1] - hk * prev[i]) / (hi - hk))
        levels.append(cur)
    return levels


def richardson_variation(deltas: Sequence[float], values: Sequence[complex]) -> tuple:
    """(extrapolated value, spread) from the deepest tableau level with two entries."""
    levels = richardson_even(deltas, values)
    deep = [lv for lv in levels if len(lv) >= 2][-1]
    spread = max(abs(a - b) for a in deep for b in deep)
    return deep[-1], spread


def residue_check(A, B, starA: int, starB: int, N: int, probe: LaurentProbe | None = None,
                  isolation_tol: float = 1e-6) -> dict:
    """Compare the numerically extracted residue of J* at alpha* = -beta* with
    N J*(A';B') + J*(A';B) + J*(A'+{-beta*};B').

    ``starA`` and ``starB`` index the distinguished shifts in A and B.
    """
    A, B = _vals(A), _vals(B)
    bstar = B[starB]
    Ap = [a for i, a in enumerate(A) if i != starA]
    Bp = [b for j, b in enumerate(B) if j != starB]
    center = -bstar
    if probe is None:
        probe = LaurentProbe(center=center)

    def f(astar):
        AA = list(A)
        AA[starA] = astar
        return jstar(AA, B, N)

    c1 = laurent_coefficients(f, center, probe.radius, probe.nodes, orders=(-2, -1))
    c2 = laurent_coefficients(f, center, 2 * probe.radius, probe.nodes, orders=(-1,))
    lhs = c1[-1]
    rhs = N * jstar(Ap, Bp, N) + jstar(Ap, B, N) + jstar(Ap + [-bstar], Bp, N)
    if abs(c2[-1] - lhs) > isolation_tol * max(1.0, abs(lhs)):
        raise ProbeNotIsolated(f"residues on radius {probe.radius} and {2 * probe.radius} differ: "
                               f"{lhs} vs {c2[-1]}")
    return {"lhs": lhs, "rhs": rhs, "abs_error": abs(lhs - rhs),
            "double_pole": c1[-2]}
