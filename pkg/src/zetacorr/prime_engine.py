"""Prime-indexed machinery: sieve, truncated Euler products and prime sums,
local factors z_p, z_{p,theta}, A_{p,theta}, the theta-averages c_{S,T}(X),
H_{p,1}, H_{p,2} and the arithmetic factor.

Per-prime work is vectorised over a numpy array of primes; reductions run in
ascending prime order so results are reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .combinat import set_partitions_idx
from .errors import (ArityMismatch, CutoffTooSmall, DenominatorNearZero, LocalPole,
                     QuadratureNotConverged, StripViolation)

STRIP = 0.25
TAIL_POLICIES = ("none", "geometric-estimate")


def sieve(n: int) -> np.ndarray:
    """Primes <= n by the sieve of Eratosthenes."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for k in range(2, int(math.isqrt(n)) + 1):
        if flags[k]:
            flags[k * k::k] = False
    return np.nonzero(flags)[0].astype(np.int64)


@dataclass(frozen=True)
class PrimeContext:
    cutoff: int
    primes: np.ndarray = field(repr=False, compare=False)
    tail_policy: str = "none"

    @property
    def logp(self) -> np.ndarray:
        return np.log(self.primes.astype(float))


def build_prime_context(cutoff: int, tail_policy: str = "none") -> PrimeContext:
    if cutoff < 11:
        raise CutoffTooSmall(f"prime cutoff {cutoff} < 11")
    if tail_policy not in TAIL_POLICIES:
        raise ValueError(f"tail_policy must be one of {TAIL_POLICIES}")
    primes = sieve(int(cutoff))
    primes.setflags(write=False)
    return PrimeContext(int(cutoff), primes, tail_policy)


@dataclass(frozen=True)
class ThetaQuadrature:
    nodes: int = 256
    tol: float = 1e-10
    max_nodes: int = 8192

    def __post_init__(self):
        n = self.nodes
        if n < 32 or n & (n - 1):
            raise ValueError("quadrature nodes must be a power of two >= 32")


def _check_strip(values, width: float = STRIP):
    for v in values:
        if not abs(complex(v).real) < width:
            raise StripViolation(f"shift {v} outside |Re| < {width}")


# ---------------------------------------------------------------------------
# elementary local functions, vectorised over p (float arrays allowed)


def _ppow(p, x):
    """p^{-x} for array p and complex x."""
    return np.exp(-complex(x) * np.log(p))


def zp(p, x):
    """z_p(x) = (1 - p^{-x})^{-1}."""
    return 1.0 / (1.0 - _ppow(p, x))


def zp_logd(p, x):
    """z_p'/z_p(x) = -log p / (p^x - 1)."""
    L = np.log(p)
    return -L / np.expm1(complex(x) * L)


def zp_logd_prime(p, x):
    """(z_p'/z_p)'(x) = log^2 p p^x / (p^x - 1)^2."""
    L = np.log(p)
    q = _ppow(p, x)
    return L * L * q / (1.0 - q) ** 2


def z_p_theta(p, theta, x):
    """z_{p,theta}(x) = (1 - e(theta) p^{-x})^{-1}."""
    return 1.0 / (1.0 - np.exp(2j * np.pi * theta) * _ppow(p, x))


def local_factor(p, theta, A, B, C, D) -> complex:
    """A_{p,theta}(A,B;C,D) for one prime and one theta."""
    p = float(p)
    out = 1.0 + 0j
    for X, sign, numer in ((A, -1, True), (B, 1, True), (C, -1, False), (D, 1, False)):
        for x in X:
            w = complex(np.exp(2j * np.pi * sign * theta)) * p ** (-(0.5 + complex(x)))
            if abs(1.0 - w) < 1e-12:
                raise LocalPole(f"z_(p,theta) singular at p={p}, theta={theta}, x={x}")
            out = out / (1.0 - w) if numer else out * (1.0 - w)
    return out


# ---------------------------------------------------------------------------
# theta machinery for one (S, T)


def _theta_grid(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


class LocalThetaData:
    """Per-prime theta integrals for fixed S, T and a list of free shifts.

    ``free`` is a list of (value, side) pairs for the elements of Sbar+Tbar.
    ``c(mask)`` returns the array over primes of c_{S,T}(X) where X is the
    subset of ``free`` selected by the bit mask.
    """

    def __init__(self, primes: np.ndarray, S, T, free, quad: ThetaQuadrature):
        self.p = np.asarray(primes, dtype=float)
        self.S = [complex(s) for s in S]
        self.T = [complex(t) for t in T]
        self.free = [(complex(v), side) for v, side in free]
        n = quad.nodes
        while True:
            c, D, ok = self._compute(n, quad.tol)
            if ok:
                break
            if n >= quad.max_nodes:
                raise QuadratureNotConverged(f"theta quadrature not converged at {n} nodes")
            n *= 2
        self.nodes = n
        self._c = c
        self.D = D

    def _compute(self, n: int, tol: float):
        L = np.log(self.p)[:, None]
        e = _theta_grid(n)[None, :]
        ebar = np.conj(e)

        def zt(sign_e, x):
            return 1.0 / (1.0 - sign_e * np.exp(-(0.5 + x) * L))

        base = np.ones((len(self.p), n), dtype=complex)
        for t in self.T:
            base *= zt(ebar, -t) / zt(e, t)
        for s in self.S:
            base *= zt(e, -s) / zt(ebar, s)
        gs = []
        for v, side in self.free:
            ee = ebar if side == "alpha" else e
            q = ee * np.exp(-(0.5 + v) * L)
            gs.append(-q * L / (1.0 - q))
        D = base.mean(axis=1)
        Dh = base[:, ::2].mean(axis=1)
        if np.any(np.abs(D) < 1e-12):
            raise DenominatorNearZero("theta integral of the local factor vanishes")
        k = len(gs)
        c = {0: np.ones(len(self.p), dtype=complex)}
        ok = np.allclose(D, Dh, rtol=tol, atol=tol)
        for mask in range(1, 1 << k):
            integrand = base.copy()
            for i in range(k):
                if mask >> i & 1:
                    integrand *= gs[i]
            num = integrand.mean(axis=1)
            numh = integrand[:, ::2].mean(axis=1)
            c[mask] = num / D
            ch = numh / Dh
            if not np.all(np.abs(c[mask] - ch) <= tol * np.maximum(1.0, np.abs(c[mask]))):
                ok = False
        return c, D, ok

    def c(self, mask: int) -> np.ndarray:
        return self._c[mask]

    def hp2(self, mask: int) -> np.ndarray:
        """H_{p,2}(W) per prime for W selected by ``mask`` (cumulant formula)."""
        idx = [i for i in range(len(self.free)) if mask >> i & 1]
        total = np.zeros(len(self.p), dtype=complex)
        for part in set_partitions_idx(len(idx)):
            J = len(part)
            term = (-1) ** (J - 1) * math.factorial(J - 1) * np.ones(len(self.p), dtype=complex)
            for block in part:
                m = 0
                for b in block:
                    m |= 1 << idx[b]
                term = term * self._c[m]
            total += term
        return total


def _free_list(Sbar, Tbar):
    return [(a, "alpha") for a in Sbar] + [(b, "beta") for b in Tbar]


def c_ST(p: int, S, T, Sbar, Tbar, X_alpha, X_beta, quad: ThetaQuadrature = ThetaQuadrature()) -> complex:
    """c_{S,T}(X) at a single prime.

    ``X_alpha`` and ``X_beta`` are index lists into ``Sbar`` and ``Tbar``.
    """
    data = LocalThetaData(np.array([p]), S, T, _free_list(Sbar, Tbar), quad)
    mask = 0
    for i in X_alpha:
        mask |= 1 << i
    for j in X_beta:
        mask |= 1 << (len(Sbar) + j)
    return complex(data.c(mask)[0])


def H_p1(p, S, T, W) -> np.ndarray:
    """Unsigned H_{p,1;S,T}(W). ``W`` is a list of (value, side) pairs.

    ``p`` may be a scalar or an array of primes.
    """
    p = np.asarray(p, dtype=float)
    if len(W) == 1:
        v, side = W[0]
        same, other = (S, T) if side == "alpha" else (T, S)
        out = np.zeros_like(p, dtype=complex)
        for h in same:
            out = out + zp_logd(p, 1.0 + v - h)
        for h in other:
            out = out - zp_logd(p, 1.0 + v + h)
        return out
    if len(W) == 2 and W[0][1] != W[1][1]:
        return zp_logd_prime(p, 1.0 + W[0][0] + W[1][0]) + 0j
    return np.zeros_like(p, dtype=complex)


def H_p2(p, S, T, Sbar, Tbar, W_alpha, W_beta, quad: ThetaQuadrature = ThetaQuadrature()) -> complex:
    """H_{p,2;S,T}(W) at one prime; W given by index lists into Sbar, Tbar."""
    data = LocalThetaData(np.array([p]), S, T, _free_list(Sbar, Tbar), quad)
    mask = 0
    for i in W_alpha:
        mask |= 1 << i
    for j in W_beta:
        mask |= 1 << (len(Sbar) + j)
    return complex(data.hp2(mask)[0])


def Zp_ratio(p, A, B, C, D) -> np.ndarray:
    """Z_p(A,B;C,D) with Z_p(X,Y) = prod (1 - p^{-1-x-y})."""
    p = np.asarray(p, dtype=float)

    def Zp(X, Y):
        out = np.ones_like(p, dtype=complex)
        for x in X:
            for y in Y:
                out = out * (1.0 - _ppow(p, 1.0 + x + y))
        return out

    return Zp(A, B) * Zp(C, D) / (Zp(A, D) * Zp(B, C))


def arithmetic_factor(A, B, C, D, ctx: PrimeContext, quad: ThetaQuadrature = ThetaQuadrature()) -> complex:
    """Truncated prod_p Z_p(A,B;C,D) int_0^1 A_{p,theta}(A,B;C,D) dtheta."""
    A, B, C, D = ([complex(v) for v in X] for X in (A, B, C, D))
    _check_strip(A + B + C + D)
    p = ctx.primes.astype(float)
    L = np.log(p)[:, None]
    n = quad.nodes
    while True:
        e = _theta_grid(n)[None, :]
        ebar = np.conj(e)
        f = np.ones((len(p), n), dtype=complex)
        for x in A:
            f /= 1.0 - ebar * np.exp(-(0.5 + x) * L)
        for x in B:
            f /= 1.0 - e * np.exp(-(0.5 + x) * L)
        for x in C:
            f *= 1.0 - ebar * np.exp(-(0.5 + x) * L)
        for x in D:
            f *= 1.0 - e * np.exp(-(0.5 + x) * L)
        I = f.mean(axis=1)
        Ih = f[:, ::2].mean(axis=1)
        if np.all(np.abs(I - Ih) <= quad.tol * np.maximum(1.0, np.abs(I))):
            break
        if n >= quad.max_nodes:
            raise QuadratureNotConverged(f"theta quadrature not converged at {n} nodes")
        n *= 2
    local = Zp_ratio(p, A, B, C, D) * I
    return complex(np.prod(local))


# ---------------------------------------------------------------------------
# closed-form prime sums and products


def _local_A(p, x):
    # (1 - p^{-1-x})(1 - 2/p + p^{-1-x}) / (1 - 1/p)^2 rewritten as 1 - d^2,
    # d = (p^{-x} - 1)/(p - 1), which is exactly 1 at x = 0
    d = np.expm1(-complex(x) * np.log(p)) / (p - 1.0)
    return 1.0 - d * d


def _log_local_A(p, x):
    d = np.expm1(-x * np.log(p)) / (p - 1.0)
    return np.log1p(-d * d)


def _local_B(p, x):
    L = np.log(p)
    return (L / np.expm1((1.0 + x) * L)) ** 2


def _local_Q(p, x, y):
    L = np.log(p)
    return -L ** 3 / ((1.0 / _ppow(p, 2.0 + x + y)) * (1.0 - _ppow(p, 1.0 + x)) * (1.0 - _ppow(p, 1.0 + y)))


def _local_B1(p, x, y):
    L = np.log(p)
    px, py = _ppow(p, x), _ppow(p, y)
    num = (1.0 - px) * (1.0 - px - py + py / p) * L
    den = ((1.0 - _ppow(p, 1.0 - x + y)) * (1.0 - py / p) * (1.0 - 2.0 / p + px / p)
           / _ppow(p, 2.0 - x + y))
    return num / den


def _P(p, x):
    """p^x for array p."""
    return np.exp(complex(x) * np.log(p))


def _local_B2(p, a, b1, b2, b3):
    L = np.log(p)
    u = _P(p, a + b1)
    num = (p - 1.0) * _P(p, 2 * b1) * (u - 1.0) * (u - p) * L ** 2
    den = ((-2.0 * u + p * u + 1.0) ** 2 * (_P(p, b1) - p * _P(p, b2))
           * (_P(p, b1) - p * _P(p, b3)))
    return num / den


def _local_C(p, a1, a2, b1, b2):
    P = lambda e: _P(p, e)  # noqa: E731
    return (-P(a1 + b1) + 2 * P(a1 + b1 + 1) - P(a2 + b1 + 2) - P(2 * a1 + 2 * b1 + 1)
            + P(a1 + a2 + 2 * b1 + 1) - P(a1 + b2 + 2) + P(a2 + b2 + 2)
            + P(2 * a1 + b1 + b2 + 1) - 2 * P(a1 + a2 + b1 + b2 + 2) + P(a1 + a2 + b1 + b2 + 3))


def _local_B3(p, a1, a2, b1, b2):
    L = np.log(p)
    P = lambda e: _P(p, e)  # noqa: E731
    u = P(a1 + b1)
    k = -2.0 * u + p * u + 1.0
    t1 = ((p - 1.0) ** 2 * (u - 1.0) ** 2 * u
          / ((P(a1) - P(a2 + 1)) * k ** 2 * (P(b1) - P(b2 + 1))))
    t2 = (_local_C(p, a1, a2, b1, b2)
          / ((P(a1) - P(a2 + 1)) * k * (P(b2 + 1) - P(b1)) * (P(a2 + b2 + 1) - 1.0)))
    t3 = 1.0 / (P(a2 + b2 + 1) - 1.0)
    return L ** 2 * (t1 + t2 + t3)


def _local_B4(p, a1, a2, b1, b2):
    L = np.log(p)
    P = lambda e: _P(p, e)  # noqa: E731
    num = (3.0 - P(1 + a1 + b1) - P(1 + a2 + b1) - P(1 + a1 + b2) - P(1 + a2 + b2)
           + P(2 + a1 + a2 + b1 + b2)) * L ** 4
    den = ((P(1 + a1 + b1) - 1.0) * (P(1 + a2 + b1) - 1.0)
           * (P(1 + a1 + b2) - 1.0) * (P(1 + a2 + b2) - 1.0))
    return num / den


def _local_L4(p, a, b1, b2, b3):
    """Leading prime sum of the 1+3 quadruple average, per prime.

    Equals +log^4 p prod_i z_p(1+a+b_i) / p^{3+3a+b1+b2+b3}; see
    ``_local_L4_printed`` for the variant with the opposite sign.
    """
    L = np.log(p)
    return (zp(p, 1 + a + b1) * zp(p, 1 + a + b2) * zp(p, 1 + a + b3) * L ** 4
            * _ppow(p, 3 + 3 * a + b1 + b2 + b3))


def _local_L4_printed(p, a, b1, b2, b3):
    return -_local_L4(p, a, b1, b2, b3)


def _astar_parts(p, a1, a2, b1, b2):
    Zpf = lambda X, Y: np.prod([1.0 - _ppow(p, 1 + x + y) for x in X for y in Y], axis=0)  # noqa: E731
    ratio = (Zpf([a1, a2], [b1, b2]) * Zpf([-a1, -a2], [-b1, -b2])
             / (Zpf([a1, a2], [-a1, -a2]) * Zpf([b1, b2], [-b1, -b2])))
    F1 = (zp(p, 1 - a1 - b1) * zp(p, 1 - a2 - b1) * zp(p, b2 - b1)
          / (zp(p, 1) * zp(p, -a1 - b1) * zp(p, -a2 - b1) * zp(p, 1 + b2 - b1)))
    F2 = (zp(p, 1 - a1 - b2) * zp(p, 1 - a2 - b2) * zp(p, b1 - b2)
          / (zp(p, 1) * zp(p, -a1 - b2) * zp(p, -a2 - b2) * zp(p, 1 + b1 - b2)))
    return ratio * _ppow(p, a1 + a2 + b1 + b2), F1, F2


def _local_Astar(p, a1, a2, b1, b2):
    """Local factor of A*: the theta-average of the local factor, evaluated by
    residues at 0 and at p^{-1/2+b_j}. Equals the displayed product with
    1 - F1 - F2 in the bracket."""
    pre, F1, F2 = _astar_parts(p, a1, a2, b1, b2)
    return pre * (1.0 - F1 - F2)


def _local_Astar_printed(p, a1, a2, b1, b2):
    pre, F1, F2 = _astar_parts(p, a1, a2, b1, b2)
    return pre * (1.0 + F1 + F2)


# kind -> (arity, local function, is_product)
_KINDS: dict = {
    "A": (1, _local_A, True),
    "B": (1, _local_B, False),
    "Q": (2, _local_Q, False),
    "B1": (2, _local_B1, False),
    "B2": (4, _local_B2, False),
    "B3": (4, _local_B3, False),
    "B4": (4, _local_B4, False),
    "Astar": (4, _local_Astar, True),
    "L4": (4, _local_L4, False),
}

# Literal readings of displayed formulas that disagree with the general
# machinery; kept so the disagreement stays testable.
PRINTED_VARIANTS: dict = {
    "Astar": (4, _local_Astar_printed, True),
    "L4": (4, _local_L4_printed, False),
}

# accurate logarithms of product local factors, for the tail integral
_LOG_LOCAL = {"A": _log_local_A}

# without an accurate log form, rounding in log(local factor) is amplified by
# the prime density weight, so the tail integral stops at this x
PRODUCT_TAIL_LIMIT = 1e8

CLOSED_FORM_KINDS = tuple(_KINDS)


def local_term(kind: str, p, shifts: Sequence[complex]):
    """Per-prime term of a closed-form sum (or factor of a product)."""
    arity, fn, _ = _KINDS[kind]
    if len(shifts) != arity:
        raise ArityMismatch(f"{kind} takes {arity} shifts, got {len(shifts)}")
    return fn(np.asarray(p, dtype=float), *[complex(s) for s in shifts])


def tail_estimate(kind: str, shifts: Sequence[complex], cutoff: int, upper: float = np.inf,
                  span: float = 80.0, panels: int = 160, order: int = 16) -> complex:
    """Estimate of the contribution of primes beyond ``cutoff``.

    The local term is continued to real x and integrated against the
    prime density 1/log x. For products the estimate is for the sum of logs.
    The integral runs in u = log x, where the integrand decays exponentially,
    by composite Gauss-Legendre; ``span`` bounds the u-range when ``upper``
    is infinite.
    """
    _, fn, is_product = _KINDS[kind]
    shifts = [complex(s) for s in shifts]
    u0 = math.log(cutoff)
    u1 = u0 + span if not np.isfinite(upper) else math.log(upper)
    if is_product and kind not in _LOG_LOCAL:
        u1 = min(u1, math.log(PRODUCT_TAIL_LIMIT))
    if u1 <= u0:
        return 0j
    node, weight = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(u0, u1, panels + 1)
    h = np.diff(edges)[:, None]
    u = (0.5 * h * node + 0.5 * (edges[:-1, None] + edges[1:, None])).ravel()
    w = (0.5 * h * weight).ravel()
    x = np.exp(u)
    if kind in _LOG_LOCAL:
        v = _LOG_LOCAL[kind](x, *shifts)
    else:
        v = fn(x, *shifts)
        if is_product:
            v = np.log(v)
    # dx / log x = e^u du / u
    return complex(np.sum(w * v * x / u))


def closed_form_prime_report(kind: str, shifts: Sequence[complex], ctx: PrimeContext,
                             check_strip: bool = True) -> tuple:
    """(truncated value, tail estimate) of a closed-form prime sum/product.

    For products the tail estimate is that of the logarithm.
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    arity, fn, is_product = _KINDS[kind]
    if len(shifts) != arity:
        raise ArityMismatch(f"{kind} takes {arity} shifts, got {len(shifts)}")
    if check_strip:
        _check_strip(shifts)
    terms = local_term(kind, ctx.primes, shifts)
    value = complex(np.prod(terms)) if is_product else complex(np.sum(terms))
    tail = tail_estimate(kind, shifts, ctx.cutoff) if ctx.tail_policy != "none" else 0j
    return value, tail


def closed_form_prime_term(kind: str, shifts: Sequence[complex], ctx: PrimeContext,
                           check_strip: bool = True) -> complex:
    """Truncated closed-form sum/product; tail-corrected when the context asks for it."""
    value, tail = closed_form_prime_report(kind, shifts, ctx, check_strip)
    if ctx.tail_policy == "none":
        return value
    _, _, is_product = _KINDS[kind]
    return value * complex(np.exp(tail)) if is_product else value + tail
