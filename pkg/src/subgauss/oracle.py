"""Brute-force verification of variance proxies.

Nothing here uses the critical-point characterization: a candidate proxy is
checked by minimizing g(.; sigma2) over a certified lambda window, and the
optimal proxy is pinned by bisection on that predicate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distribution import DiscreteDistribution, cgf_grid, log_mgf, variance

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GridConfig:
    points: int = 20001
    golden_iterations: int = 64
    # at most this many grid basins are refined, lowest first
    max_basins: int = 32


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    min_g: float
    argmin_lambda: float
    grid_points: int
    window: tuple[float, float]


def proxy_window(d: DiscreteDistribution, sigma2: float) -> tuple[float, float]:
    """Window outside of which g(.; sigma2) > 0 is guaranteed.

    For l > 0, M(l) <= l (x_max - mu), hence g(l) >= l (l sigma2 / 2 - (x_max - mu))
    which is nonnegative once l >= 2 (x_max - mu) / sigma2; symmetrically for l < 0.
    """
    mu = float(d.weights @ d.atoms)
    return -2.0 * (mu - d.x_min) / sigma2, 2.0 * (d.x_max - mu) / sigma2


def _g(d: DiscreteDistribution, lam: np.ndarray, sigma2: float) -> np.ndarray:
    return 0.5 * lam * lam * sigma2 - log_mgf(d, lam)


def golden_min(f, a: np.ndarray, b: np.ndarray, iterations: int) -> tuple[np.ndarray, np.ndarray]:
    """Golden-section search run on many brackets ``[a_k, b_k]`` at once; ``f`` is vectorized."""
    a, b = np.array(a, dtype=float), np.array(b, dtype=float)
    c = b - _INVPHI * (b - a)
    e = a + _INVPHI * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(iterations):
        left = fc < fe
        # left: minimum in [a, e]; otherwise in [c, b]
        b = np.where(left, e, b)
        a = np.where(left, a, c)
        keep = np.where(left, c, e)
        fkeep = np.where(left, fc, fe)
        new = np.where(left, b - _INVPHI * (b - a), a + _INVPHI * (b - a))
        fnew = f(new)
        c, fc = np.where(left, new, keep), np.where(left, fnew, fkeep)
        e, fe = np.where(left, keep, new), np.where(left, fkeep, fnew)
    take_c = fc < fe
    return np.where(take_c, c, e), np.where(take_c, fc, fe)


def violation_tolerance(sigma2: float) -> float:
    return 1e-12 * max(1.0, sigma2)


def is_variance_proxy(d: DiscreteDistribution, sigma2: float, grid: GridConfig = GridConfig()) -> VerificationReport:
    """Grid scan of g(.; sigma2) followed by golden-section descent in each grid basin."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    if len(d) == 1:
        return VerificationReport(True, 0.0, 0.0, 0, (0.0, 0.0))
    if sigma2 == 0:
        # M > 0 away from zero for a non-degenerate law
        lam = 1.0 / d.span
        g = float(_g(d, np.array([lam]), 0.0)[0])
        return VerificationReport(False, g, lam, 1, (lam, lam))

    lo, hi = proxy_window(d, sigma2)
    lam = np.linspace(lo, hi, grid.points)
    values = _g(d, lam, sigma2)
    i_min = int(np.argmin(values))
    best_lam, best_g = float(lam[i_min]), float(values[i_min])

    inner = values[1:-1]
    basins = np.nonzero((inner <= values[:-2]) & (inner <= values[2:]))[0] + 1
    basins = basins[np.argsort(values[basins], kind="stable")][: grid.max_basins]
    if basins.size:
        t, v = golden_min(lambda u: _g(d, u, sigma2), lam[basins - 1], lam[basins + 1],
                          grid.golden_iterations)
        k = int(np.argmin(v))
        if v[k] < best_g:
            best_lam, best_g = float(t[k]), float(v[k])

    passed = best_g >= -violation_tolerance(sigma2)
    return VerificationReport(bool(passed), best_g, best_lam, grid.points, (lo, hi))


def bisect_optimal_proxy(d: DiscreteDistribution, rel_tol: float = 1e-7, grid: GridConfig = GridConfig()) -> float:
    """Smallest sigma2 accepted by :func:`is_variance_proxy`, to relative precision ``rel_tol``.

    Brackets between the variance and the Hoeffding proxy ``span^2 / 4``.
    """
    if rel_tol < 1e-10:
        raise ValueError("rel_tol must be at least 1e-10")
    if len(d) == 1:
        return 0.0
    lo = variance(d)
    if is_variance_proxy(d, lo, grid).passed:
        return lo
    hi = d.span ** 2 / 4.0
    if not is_variance_proxy(d, hi, grid).passed:
        raise RuntimeError("Hoeffding proxy rejected by the grid check")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if is_variance_proxy(d, mid, grid).passed:
            hi = mid
        else:
            lo = mid
    return hi


def export_curve(d: DiscreteDistribution, sigma2: float, lam_min: float, lam_max: float,
                 samples: int) -> np.ndarray:
    """Rows ``(lambda, g, g', g'', h)`` on a uniform lambda grid."""
    if not (math.isfinite(lam_min) and math.isfinite(lam_max)) or lam_min >= lam_max:
        raise ValueError(f"need finite lambda_min < lambda_max, got {lam_min!r}, {lam_max!r}")
    if samples < 2:
        raise ValueError("samples must be at least 2")
    lam = np.linspace(lam_min, lam_max, int(samples))
    m0, m1, m2 = cgf_grid(d, lam)
    return np.column_stack([
        lam,
        0.5 * lam * lam * sigma2 - m0,
        lam * sigma2 - m1,
        sigma2 - m2,
        lam * m1 - 2.0 * m0,
    ])
