"""Scalar special functions: z(x), the sine kernel, zeta near and away from 1,
chi'/chi and helpers for shifted log-chi differences.

Everything is binary64 complex. Poles are signalled with typed exceptions,
never with inf.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import bernoulli, loggamma

from .errors import PoleAtOne, PoleAtZero, PoleOfGamma, ZeroDenominator

TWO_PI = 2.0 * math.pi
LOG_TWO_PI = math.log(TWO_PI)

# B_0 .. B_60 as floats; only even indices beyond 1 are used.
_BERN = bernoulli(60)


def expm1c(x: complex) -> complex:
    """exp(x) - 1 for complex x without cancellation near 0."""
    x = complex(x)
    a, b = x.real, x.imag
    if a > 700.0:
        return cmath.exp(x)
    em = math.expm1(a)
    re = em * math.cos(b) - 2.0 * math.sin(0.5 * b) ** 2
    im = math.exp(a) * math.sin(b)
    return complex(re, im)


def log1pc(x: complex) -> complex:
    """log(1 + x) for complex x, accurate for small |x|."""
    x = complex(x)
    if abs(x) < 1e-4:
        return x - x * x / 2 + x ** 3 / 3 - x ** 4 / 4 + x ** 5 / 5
    return cmath.log(1.0 + x)


# ---------------------------------------------------------------------------
# z(x) = 1/(1 - e^{-x})

Z_COLLISION_TOL = 1e-12


def _reduce_2pi_i(x: complex) -> complex:
    k = round(x.imag / TWO_PI)
    return x - 1j * TWO_PI * k


def z_family(x: complex, tol: float = Z_COLLISION_TOL):
    """Return (z(x), z'/z(x), (z'/z)'(x)) for z(x) = 1/(1 - e^{-x})."""
    x = complex(x)
    if abs(_reduce_2pi_i(x)) < tol:
        raise PoleAtZero(x, {"z": (1.0, 0.5, 1.0 / 12.0), "zlog_prime": (1.0,)})
    return z(x), zlog(x), zlog_prime(x)


def z(x: complex) -> complex:
    x = complex(x)
    if x.real < -700.0:
        return -cmath.exp(x) / (1.0 - cmath.exp(x))
    return -1.0 / expm1c(-x)


def zlog(x: complex) -> complex:
    """(z'/z)(x) = -1/(e^x - 1)."""
    x = complex(x)
    if x.real > 700.0:
        return -cmath.exp(-x) / (1.0 - cmath.exp(-x))
    return -1.0 / expm1c(x)


def zlog_prime(x: complex) -> complex:
    """(z'/z)'(x) = e^x/(e^x - 1)^2, an even function of x."""
    x = complex(x)
    if x.real < 0:
        x = -x
    em = expm1c(-x)
    return cmath.exp(-x) / (em * em)


# ---------------------------------------------------------------------------
# sine kernel


def sine_kernel(N: int, theta):
    """sin(N theta/2)/sin(theta/2) with its continuous limit at theta = 2 pi m.

    At theta = 2 pi m the limit is (-1)^{(N-1) m} N; for m = 0 (or odd N)
    this is N. Accepts scalars or numpy arrays.
    """
    th = np.asarray(theta, dtype=float)
    m = np.round(th / TWO_PI)
    phi = th - TWO_PI * m
    sign = np.where(((N - 1) * m.astype(np.int64)) % 2 == 0, 1.0, -1.0)
    small = np.abs(phi) < 1e-3
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.sin(N * phi / 2.0) / np.sin(phi / 2.0)
    if np.any(small):
        k = np.arange(N) - (N - 1) / 2.0
        direct = np.cos(np.multiply.outer(phi, k)).sum(axis=-1)
        ratio = np.where(small, direct, ratio)
    out = sign * ratio
    if np.ndim(theta) == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# zeta via Euler-Maclaurin


@dataclass(frozen=True)
class EulerMaclaurinParams:
    direct_terms: int = 64
    bernoulli_order: int = 12
    tol: float = 1e-15

    def __post_init__(self):
        if self.direct_terms < 8:
            raise ValueError("direct_terms must be >= 8")
        if self.bernoulli_order < 2:
            raise ValueError("bernoulli_order must be >= 2")
        if 2 * self.bernoulli_order + 2 > len(_BERN) - 1:
            raise ValueError("bernoulli_order too large")


@dataclass(frozen=True)
class LaurentWindow:
    radius: float = 0.1
    series_order: int = 8

    def __post_init__(self):
        if not (0.0 < self.radius <= 0.5):
            raise ValueError("window radius must lie in (0, 0.5]")
        if self.series_order < 1:
            raise ValueError("series_order must be positive")


DEFAULT_EM = EulerMaclaurinParams()
DEFAULT_WINDOW = LaurentWindow()


@lru_cache(maxsize=64)
def _log_n(M: int) -> np.ndarray:
    return np.log(np.arange(1, M, dtype=float))


def _em_terms(s: complex, M: int, K: int):
    """Euler-Maclaurin (zeta, zeta', zeta'') at s with M terms and K corrections.

    Also returns the magnitude of the first omitted correction term.
    """
    ln = _log_n(M)
    ns = np.exp(-s * ln)
    v0 = complex(ns.sum())
    v1 = complex(-(ln * ns).sum())
    v2 = complex((ln * ln * ns).sum())

    L = math.log(M)
    Ms = cmath.exp(-s * L)
    # M^{1-s}/(s-1) and its s-derivatives
    f = M * Ms / (s - 1.0)
    g = -L - 1.0 / (s - 1.0)
    f1 = f * g
    f2 = f1 * g + f / (s - 1.0) ** 2
    v0 += f + 0.5 * Ms
    v1 += f1 - 0.5 * L * Ms
    v2 += f2 + 0.5 * L * L * Ms

    # rising factorial (s)_j with first two derivatives, built incrementally
    P, P1, P2 = 1.0 + 0j, 0j, 0j
    j = 0
    fact = 1.0
    err = 0.0
    Mpow = Ms / M  # M^{-s-1}
    for k in range(1, K + 2):
        while j < 2 * k - 1:
            P2 = P2 * (s + j) + 2.0 * P1
            P1 = P1 * (s + j) + P
            P = P * (s + j)
            j += 1
        fact *= (2 * k - 1) * (2 * k)
        c = _BERN[2 * k] / fact
        term = c * Mpow
        if k == K + 1:
            err = abs(term * P)
            break
        v0 += term * P
        v1 += term * (P1 - L * P)
        v2 += term * (P2 - 2.0 * L * P1 + L * L * P)
        Mpow /= M * M
    return v0, v1, v2, err


@lru_cache(maxsize=4096)
def _zeta_em(s: complex, M: int, K: int, tol: float):
    M_eff = max(M, int(abs(s.imag)) + 8)
    for _ in range(12):
        v0, v1, v2, err = _em_terms(s, M_eff, K)
        if err <= tol * max(1.0, abs(v0)):
            break
        M_eff *= 2
    return v0, v1, v2


# ---------------------------------------------------------------------------
# Laurent data at s = 1


@lru_cache(maxsize=4)
def _laurent_coeffs(order: int) -> tuple:
    """Coefficients a_n of zeta(1+x) - 1/x = sum a_n x^n, n = 0..order.

    Computed by trapezoid Cauchy integrals on |x| = 1 using a high-accuracy
    Euler-Maclaurin evaluation.
    """
    nodes = 64
    ang = TWO_PI * np.arange(nodes) / nodes
    xs = np.exp(1j * ang)
    vals = np.array([_zeta_em(complex(1.0 + x), 128, 20, 1e-17)[0] - 1.0 / x for x in xs])
    coeffs = []
    for n in range(order + 1):
        coeffs.append(complex(np.mean(vals * xs ** (-n))).real)
    return tuple(coeffs)


def stieltjes_constants(order: int = 8) -> np.ndarray:
    """gamma_0 .. gamma_order, from zeta(1+x) = 1/x + sum (-1)^n gamma_n x^n / n!."""
    a = _laurent_coeffs(order)
    return np.array([(-1) ** n * math.factorial(n) * a[n] for n in range(order + 1)])


def _window_u(x: complex, order: int):
    """u(x) = x zeta(1+x) = 1 + sum a_n x^{n+1} with u', u''."""
    a = _laurent_coeffs(order)
    u, u1, u2 = 1.0 + 0j, 0j, 0j
    xp = [1.0 + 0j]
    for _ in range(order + 2):
        xp.append(xp[-1] * x)
    for n, an in enumerate(a):
        m = n + 1
        u += an * xp[m]
        u1 += an * m * xp[m - 1]
        if m >= 2:
            u2 += an * m * (m - 1) * xp[m - 2]
    return u, u1, u2


# ---------------------------------------------------------------------------
# public zeta API in the shifted variable x = s - 1


def _shifted_parts(x: complex, params: EulerMaclaurinParams, window: LaurentWindow):
    """Return (zeta(1+x) - 1/x, zeta'/zeta(1+x) + 1/x, (zeta'/zeta)'(1+x) - 1/x^2).

    These regular parts are analytic at x = 0.
    """
    x = complex(x)
    if abs(x) < window.radius:
        u, u1, u2 = _window_u(x, window.series_order)
        if abs(u) < 1e-13:
            raise ZeroDenominator(f"zeta vanishes near s={1 + x}")
        g = sum(an * x ** n for n, an in enumerate(_laurent_coeffs(window.series_order)))
        return g, u1 / u, (u2 * u - u1 * u1) / (u * u)
    v0, v1, v2 = _zeta_em(1.0 + x, params.direct_terms, params.bernoulli_order, params.tol)
    if abs(v0) < 1e-13:
        raise ZeroDenominator(f"zeta vanishes near s={1 + x}")
    ld = v1 / v0
    return v0 - 1.0 / x, ld + 1.0 / x, v2 / v0 - ld * ld - 1.0 / (x * x)


def zeta_suite(s: complex, order: str = "value", params: EulerMaclaurinParams = DEFAULT_EM,
               window: LaurentWindow = DEFAULT_WINDOW) -> complex:
    """zeta(s), zeta'/zeta(s) or (zeta'/zeta)'(s) depending on ``order``."""
    s = complex(s)
    x = s - 1.0
    if x == 0:
        if order == "value":
            raise PoleAtOne("zeta has a pole at s=1")
        raise PoleAtOne(f"{order} of zeta has a pole at s=1")
    if abs(x) < window.radius:
        g, l1, l2 = _shifted_parts(x, params, window)
        if order == "value":
            return g + 1.0 / x
        if order == "logderiv":
            return l1 - 1.0 / x
        if order == "logderiv_prime":
            return l2 + 1.0 / (x * x)
        raise ValueError(f"unknown order {order!r}")
    if s.real < REFLECT_BELOW:
        return _reflected(s, order, params, window)
    v0, v1, v2 = _zeta_em(s, params.direct_terms, params.bernoulli_order, params.tol)
    if order == "value":
        return v0
    if abs(v0) < 1e-13:
        raise ZeroDenominator(f"zeta vanishes near s={s}")
    ld = v1 / v0
    if order == "logderiv":
        return ld
    if order == "logderiv_prime":
        return v2 / v0 - ld * ld
    raise ValueError(f"unknown order {order!r}")


# left of this line the direct sum loses digits to cancellation, so use
# zeta(s) = chi(s) zeta(1-s) instead
REFLECT_BELOW = -0.5


def _reflected(s: complex, order: str, params: EulerMaclaurinParams,
               window: LaurentWindow) -> complex:
    if order == "value":
        return cmath.exp(log_chi(s)) * zeta_suite(1.0 - s, "value", params, window)
    if order == "logderiv":
        return chi_logderiv(s) - zeta_suite(1.0 - s, "logderiv", params, window)
    if order == "logderiv_prime":
        return chi_logderiv_prime(s) + zeta_suite(1.0 - s, "logderiv_prime", params, window)
    raise ValueError(f"unknown order {order!r}")


def zeta(s: complex) -> complex:
    return zeta_suite(s, "value")


def zeta_logderiv(s: complex) -> complex:
    return zeta_suite(s, "logderiv")


def zeta_logderiv_prime(s: complex) -> complex:
    return zeta_suite(s, "logderiv_prime")


def zeta1_regular(x: complex) -> complex:
    """zeta(1+x) - 1/x, analytic at x = 0."""
    return _shifted_parts(x, DEFAULT_EM, DEFAULT_WINDOW)[0]


def zeta_logderiv1_regular(x: complex) -> complex:
    """zeta'/zeta(1+x) + 1/x."""
    return _shifted_parts(x, DEFAULT_EM, DEFAULT_WINDOW)[1]


def zeta_logderiv_prime1_regular(x: complex) -> complex:
    """(zeta'/zeta)'(1+x) - 1/x^2."""
    return _shifted_parts(x, DEFAULT_EM, DEFAULT_WINDOW)[2]


# ---------------------------------------------------------------------------
# digamma and chi


def _near_nonpositive_int(w: complex, tol: float = 1e-12) -> bool:
    return w.real < 0.5 and abs(w - round(w.real)) < tol


def digamma(w: complex) -> complex:
    """psi(w) by reflection, upward recurrence and the asymptotic series."""
    w = complex(w)
    if _near_nonpositive_int(w):
        raise PoleOfGamma(f"digamma pole at {w}")
    if w.real < 0.5:
        return digamma(1.0 - w) - math.pi / cmath.tan(math.pi * w)
    acc = 0j
    while abs(w) < 10.0:
        acc -= 1.0 / w
        w += 1.0
    w2 = 1.0 / (w * w)
    series = 0j
    wp = w2
    for k in range(1, 11):
        series += _BERN[2 * k] / (2 * k) * wp
        wp *= w2
    return acc + cmath.log(w) - 0.5 / w - series


def trigamma(w: complex) -> complex:
    """psi'(w) by reflection, upward recurrence and the asymptotic series."""
    w = complex(w)
    if _near_nonpositive_int(w):
        raise PoleOfGamma(f"trigamma pole at {w}")
    if w.real < 0.5:
        return (math.pi / cmath.sin(math.pi * w)) ** 2 - trigamma(1.0 - w)
    acc = 0j
    while abs(w) < 10.0:
        acc += 1.0 / (w * w)
        w += 1.0
    w2 = 1.0 / (w * w)
    series = 0j
    wp = w2 / w
    for k in range(1, 11):
        series += _BERN[2 * k] * wp
        wp *= w2
    return acc + 1.0 / w + 0.5 * w2 + series


def chi_logderiv_prime(s: complex) -> complex:
    """Derivative of chi'/chi at s."""
    s = complex(s)
    if _near_nonpositive_int(1.0 - s):
        raise PoleOfGamma(f"Gamma(1-s) has a pole at s={s}")
    c = cmath.cos(0.5 * math.pi * (1.0 - s))
    return trigamma(1.0 - s) - 0.25 * math.pi ** 2 / (c * c)


def chi_logderiv(s: complex) -> complex:
    """chi'/chi(s) for zeta(s) = chi(s) zeta(1-s)."""
    s = complex(s)
    if _near_nonpositive_int(1.0 - s):
        raise PoleOfGamma(f"Gamma(1-s) has a pole at s={s}")
    return LOG_TWO_PI - digamma(1.0 - s) + 0.5 * math.pi * cmath.tan(0.5 * math.pi * (1.0 - s))


def log_chi(s: complex) -> complex:
    """A branch of log chi(s) = s log 2 + (s-1) log pi + log sin(pi s/2) + log Gamma(1-s)."""
    s = complex(s)
    if _near_nonpositive_int(1.0 - s):
        raise PoleOfGamma(f"Gamma(1-s) has a pole at s={s}")
    return (s * math.log(2.0) + (s - 1.0) * math.log(math.pi)
            + _log_sin(0.5 * math.pi * s) + complex(loggamma(1.0 - s)))


def _log_sin(zv: complex) -> complex:
    if zv.imag > 10.0:
        return -1j * zv + cmath.log(0.5j) + log1pc(-cmath.exp(2j * zv))
    if zv.imag < -10.0:
        return 1j * zv + cmath.log(-0.5j) + log1pc(-cmath.exp(-2j * zv))
    return cmath.log(cmath.sin(zv))


def _log_sin_diff(zv: complex, d: complex) -> complex:
    """log sin(zv + d) - log sin(zv) (mod 2 pi i), stable for large |Im zv|."""
    if zv.imag > 10.0 and (zv + d).imag > 10.0:
        return -1j * d + log1pc(-cmath.exp(2j * (zv + d))) - log1pc(-cmath.exp(2j * zv))
    if zv.imag < -10.0 and (zv + d).imag < -10.0:
        return 1j * d + log1pc(-cmath.exp(-2j * (zv + d))) - log1pc(-cmath.exp(-2j * zv))
    return cmath.log(cmath.sin(zv + d) / cmath.sin(zv))


def _loggamma_diff(w: complex, h: complex) -> complex:
    """log Gamma(w + h) - log Gamma(w) (mod 2 pi i)."""
    if abs(w) > 20.0 and abs(w + h) > 20.0 and w.real > 0 and (w + h).real > 0:
        out = (w - 0.5) * log1pc(h / w) + h * cmath.log(w + h) - h
        for k in range(1, 12):
            c = _BERN[2 * k] / (2 * k * (2 * k - 1))
            out += c * ((w + h) ** (1 - 2 * k) - w ** (1 - 2 * k))
        return out
    return complex(loggamma(w + h)) - complex(loggamma(w))


def log_chi_shift(s: complex, a: complex) -> complex:
    """log chi(s + a) - log chi(s) modulo 2 pi i, accurate for large Im s."""
    s = complex(s)
    a = complex(a)
    if _near_nonpositive_int(1.0 - s - a) or _near_nonpositive_int(1.0 - s):
        raise PoleOfGamma(f"Gamma pole near s={s}, shift {a}")
    out = a * LOG_TWO_PI
    out += _log_sin_diff(0.5 * math.pi * s, 0.5 * math.pi * a)
    out += _loggamma_diff(1.0 - s, -a)
    return out


# ---------------------------------------------------------------------------
# numerical Laurent coefficients on a circle


@dataclass(frozen=True)
class LaurentProbe:
    center: complex
    radius: float = 1e-2
    nodes: int = 64


def laurent_coefficients(f, center: complex, radius: float, nodes: int = 64,
                         orders=(-2, -1, 0)) -> dict:
    """Laurent coefficients c_k of f about ``center`` by the trapezoid rule.

    c_k = mean_j f(x_j) (x_j - center)^{-k} over equispaced x_j on the circle.
    """
    ang = TWO_PI * (np.arange(nodes) + 0.5) / nodes
    offs = radius * np.exp(1j * ang)
    vals = np.array([complex(f(center + o)) for o in offs])
    return {k: complex(np.mean(vals * offs ** (-k))) for k in orders}
