"""Tables of zeta-zero ordinates: parsing, the counting-function check,
empirical correlation sums over a height window, and the matching
conjecture-side quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyFile, NotAscending, ParseError, SupportTooWide, WindowEmpty
from .numerics import TWO_PI
from .prime_engine import PrimeContext
from .zeta_core import HeightContext, ZetaCorrelationRequest, correlation_zeta

FIRST_ZERO = 14.134725141734693
MAX_SUPPORT_SPACINGS = 50.0
MIN_SUBWINDOWS = 8
MAX_RELATIVE_WIDTH = 0.2


@dataclass(frozen=True)
class ZeroTable:
    gammas: np.ndarray
    source: str = ""

    @property
    def count(self) -> int:
        return len(self.gammas)

    @property
    def starts_at_first_zero(self) -> bool:
        return self.count > 0 and abs(self.gammas[0] - FIRST_ZERO) < 1e-3


def parse_zero_table(text: str, source: str = "<string>") -> ZeroTable:
    values = []
    prev = -math.inf
    seen_data = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if seen_data:
                raise ParseError(lineno, stripped)
            continue
        seen_data = True
        for tok in stripped.split():
            try:
                v = float(tok)
            except ValueError:
                raise ParseError(lineno, tok) from None
            if not math.isfinite(v) or v <= 0:
                raise ParseError(lineno, tok)
            if v <= prev:
                raise NotAscending(lineno)
            prev = v
            values.append(v)
    if not values:
        raise EmptyFile(f"no ordinates in {source}")
    return ZeroTable(np.array(values), source)


def load_zero_table(path) -> ZeroTable:
    """Read whitespace/newline separated ascending ordinates; leading lines
    starting with '#' are comments."""
    path = Path(path)
    return parse_zero_table(path.read_text(), str(path))


def emit_zero_table(table: ZeroTable, path) -> None:
    """Write one ordinate per line with round-trip precision."""
    Path(path).write_text("".join(f"{float(g)!r}\n" for g in table.gammas))


# ---------------------------------------------------------------------------
# counting function


@dataclass(frozen=True)
class CountingCheck:
    T: float
    observed: int
    predicted: float
    slack: float

    @property
    def flagged(self) -> bool:
        return abs(self.observed - self.predicted) > self.slack


def counting_check(table: ZeroTable, T: float) -> CountingCheck:
    """Observed count of ordinates <= T against (T/2pi) log(T/(2 pi e))."""
    if T > table.gammas[-1]:
        raise ValueError(f"T={T} exceeds the largest ordinate {table.gammas[-1]}")
    observed = int(np.searchsorted(table.gammas, T, side="right"))
    predicted = T / TWO_PI * math.log(T / (TWO_PI * math.e))
    return CountingCheck(T, observed, predicted, 2.0 + 2.0 * math.log(T))


def mean_spacing(t: float) -> float:
    return TWO_PI / math.log(t / TWO_PI)


# ---------------------------------------------------------------------------
# test functions of differences


@dataclass(frozen=True)
class GaussianDifference:
    """Translation-invariant Gaussian in the differences of n ordinates.

    n=2: (g(d - c) + g(d + c)) / 2 with g(x) = exp(-x^2 / 2 sigma^2), so
    ``center`` moves the bump away from the diagonal while keeping f even.
    n=3: exp(-sum_{i<j} (x_i - x_j)^2 / (2 sigma^2)).
    """
    n: int
    sigma: float
    center: float = 0.0
    cutoff: float = 8.5

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("n must be 2 or 3")
        if self.n == 3 and self.center != 0.0:
            raise ValueError("center is only defined for n=2")

    @property
    def support(self) -> float:
        return abs(self.center) + self.cutoff * self.sigma

    def __call__(self, diffs):
        """n=2: array of differences; n=3: (..., 2) array of (x2-x1, x3-x1)."""
        d = np.asarray(diffs, dtype=float)
        s2 = 2.0 * self.sigma ** 2
        if self.n == 2:
            return 0.5 * (np.exp(-(d - self.center) ** 2 / s2) + np.exp(-(d + self.center) ** 2 / s2))
        d1, d2 = d[..., 0], d[..., 1]
        return np.exp(-(d1 ** 2 + d2 ** 2 + (d1 - d2) ** 2) / s2)

    def describe(self) -> dict:
        return {"family": "gaussian", "n": self.n, "sigma": self.sigma, "center": self.center}


@dataclass(frozen=True)
class IndicatorDifference:
    """1 when every pairwise difference is at most ``width`` in absolute value."""
    n: int
    width: float

    @property
    def support(self) -> float:
        return self.width

    def __call__(self, diffs):
        d = np.asarray(diffs, dtype=float)
        if self.n == 2:
            return (np.abs(d) <= self.width).astype(float)
        d1, d2 = d[..., 0], d[..., 1]
        ok = (np.abs(d1) <= self.width) & (np.abs(d2) <= self.width) & (np.abs(d1 - d2) <= self.width)
        return ok.astype(float)

    def describe(self) -> dict:
        return {"family": "indicator", "n": self.n, "width": self.width}


# ---------------------------------------------------------------------------
# empirical sums


def _pair_sum(g: np.ndarray, f, support: float) -> float:
    total = 0.0
    for k in range(1, len(g)):
        d = g[k:] - g[:-k]
        if d.size == 0 or d.min() > support:
            break
        d = d[d <= support]
        total += float(np.sum(f(d)) + np.sum(f(-d)))
    return total


def _triple_sum(g: np.ndarray, f, support: float) -> float:
    m = len(g)
    # largest index offset that can fit inside the support
    K = int(np.max(np.searchsorted(g, g + support, side="right") - np.arange(m))) if m else 0
    total = 0.0
    for a in range(1, K):
        for b in range(a + 1, K):
            if b >= m:
                break
            x0, x1, x2 = g[:m - b], g[a:m - b + a], g[b:]
            keep = (x2 - x0) <= support
            if not np.any(keep):
                continue
            x0, x1, x2 = x0[keep], x1[keep], x2[keep]
            # all orderings of the three distinct indices
            for p, q, r in ((x0, x1, x2), (x0, x2, x1), (x1, x0, x2),
                            (x1, x2, x0), (x2, x0, x1), (x2, x1, x0)):
                total += float(np.sum(f(np.stack([q - p, r - p], axis=-1))))
    return total


def distinct_tuple_sum(g: np.ndarray, n: int, f, support: float | None = None) -> float:
    """Sum of f over ordered n-tuples of distinct entries of g, sliding over
    neighbours within the support of f (O(len(g) * support))."""
    g = np.asarray(g, dtype=float)
    support = f.support if support is None else support
    if n == 2:
        return _pair_sum(g, f, support)
    if n == 3:
        return _triple_sum(g, f, support)
    raise ValueError("n must be 2 or 3")


def brute_force_sum(g: np.ndarray, n: int, f) -> float:
    """O(len(g)^n) reference for distinct_tuple_sum."""
    g = np.asarray(g, dtype=float)
    if n == 2:
        d = np.subtract.outer(g, g)
        mask = ~np.eye(len(g), dtype=bool)
        return float(np.sum(f(d[mask])))
    total = 0.0
    idx = np.arange(len(g))
    for i in idx:
        d = g - g[i]
        D1, D2 = np.meshgrid(d, d, indexing="ij")
        mask = np.ones_like(D1, dtype=bool)
        mask[i, :] = False
        mask[:, i] = False
        np.fill_diagonal(mask, False)
        total += float(np.sum(f(np.stack([D1[mask], D2[mask]], axis=-1))))
    return total


def split_window(window: tuple, min_parts: int = MIN_SUBWINDOWS,
                 max_relative_width: float = MAX_RELATIVE_WIDTH) -> list:
    """Equal-width sub-windows, at least ``min_parts``, each no wider than
    ``max_relative_width`` times its own centre."""
    lo, hi = float(window[0]), float(window[1])
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < T_lo < T_hi")
    parts = min_parts
    while True:
        w = (hi - lo) / parts
        if w <= max_relative_width * (lo + w / 2):
            break
        parts += 1
    edges = lo + w * np.arange(parts + 1)
    edges[-1] = hi
    return [(float(edges[i]), float(edges[i + 1])) for i in range(parts)]


@dataclass(frozen=True)
class EmpiricalStatistic:
    n: int
    window: tuple
    test_function: dict
    value: float
    std_error: float
    subwindows: tuple = ()
    subvalues: tuple = ()


def _detrended_error(centers, values) -> float:
    """Standard error of sum(values) from the scatter of the per-sub-window
    values about a quadratic trend in the sub-window centre."""
    c = np.asarray(centers)
    v = np.asarray(values)
    B = len(v)
    deg = 2 if B > 4 else 0
    x = (c - c.mean()) / max(np.ptp(c), 1.0)
    coef = np.polyfit(x, v, deg)
    rss = float(np.sum((v - np.polyval(coef, x)) ** 2))
    return math.sqrt(B * rss / (B - deg - 1))


def empirical_correlation(table: ZeroTable, n: int, f, window: tuple,
                          min_subwindows: int = MIN_SUBWINDOWS) -> EmpiricalStatistic:
    """Distinct-tuple sum of f over ordinates in the window.

    The window is cut into sub-windows (at least ``min_subwindows``, each at
    most 20% of its centre wide); the statistic is the sum of the
    within-sub-window tuple sums, and its standard error comes from their
    scatter about a smooth trend.
    """
    if n not in (2, 3):
        raise ValueError("n must be 2 or 3")
    lo, hi = float(window[0]), float(window[1])
    if hi > table.gammas[-1] + 1e-9:
        raise ValueError("window extends past the largest ordinate")
    centre = 0.5 * (lo + hi)
    if f.support > MAX_SUPPORT_SPACINGS * mean_spacing(centre):
        raise SupportTooWide(f"support {f.support} exceeds {MAX_SUPPORT_SPACINGS} mean spacings")
    subs = split_window((lo, hi), min_subwindows)
    vals = []
    for a, b in subs:
        g = table.gammas[(table.gammas > a) & (table.gammas <= b)]
        if len(g) == 0:
            raise WindowEmpty(f"no ordinates in ({a}, {b}]")
        vals.append(distinct_tuple_sum(g, n, f))
    centers = [0.5 * (a + b) for a, b in subs]
    return EmpiricalStatistic(n, (lo, hi), f.describe(), float(sum(vals)),
                              _detrended_error(centers, vals), tuple(subs), tuple(vals))


# ---------------------------------------------------------------------------
# conjecture side


def pair_density_grid(t: float, y: np.ndarray, primes: PrimeContext | None,
                      model: str = "full") -> np.ndarray:
    """R_2(0, y) at height t: ``full`` from the closed-form pair average with
    the arithmetic factor, ``sine`` from ell^2 (1 - sinc^2(ell y / 2 pi))."""
    height = HeightContext(t)
    ell = height.ell
    if model == "sine":
        r = ell * np.asarray(y) / TWO_PI
        return ell ** 2 * (1.0 - np.sinc(r) ** 2)
    if model != "full":
        raise ValueError(f"unknown model {model!r}")
    return np.array([correlation_zeta(ZetaCorrelationRequest((0.0, float(v)), height, primes))
                     for v in y])


def _gauss_panels(a: float, b: float, panels: int, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def conjecture_pair_statistic(functions: Sequence, window: tuple, primes: PrimeContext | None,
                              model: str = "full", panels: int = 24, order: int = 16,
                              min_subwindows: int = MIN_SUBWINDOWS) -> np.ndarray:
    """Predicted pair sums for each test function, over the same sub-windows
    as ``empirical_correlation``.

    For a sub-window of width L at centre t the prediction is
    (2 pi)^{-2} int R_2(0, y) f(y) (L - |y|) dy, the density taken at t.
    """
    subs = split_window(window, min_subwindows)
    Y = max(f.support for f in functions)
    y, w = _gauss_panels(0.0, Y, panels, order)
    out = np.zeros(len(functions))
    for a, b in subs:
        L = b - a
        t = 0.5 * (a + b)
        R = pair_density_grid(t, y, primes, model)
        weight = 2.0 * w * R * np.clip(L - y, 0.0, None) / TWO_PI ** 2
        for i, f in enumerate(functions):
            out[i] += float(np.sum(weight * f(y)))
    return out
