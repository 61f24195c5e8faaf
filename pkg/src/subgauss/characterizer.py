"""General optimal-proxy engine built on the critical equation.

The optimal proxy equals ``max(Var, sup S)`` where ``S`` collects the values
``M'(l) / l`` at nonzero roots ``l`` of ``h(l) = l M'(l) - 2 M(l)`` that are
local minima of ``g(.; M'(l) / l)``.  The engine brackets roots of ``h`` on a
scan grid, polishes them with Brent's method and classifies each one.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .distribution import (
    DiscreteDistribution,
    cgf_at,
    g_eval,
    h_eval,
    h_grid,
    variance,
)

log = logging.getLogger(__name__)

STRICT_RTOL = 1e-9


class SolverError(RuntimeError):
    """Raised when the root search cannot be carried out."""


@dataclass(frozen=True)
class SolverConfig:
    scan_multiplier: int = 64
    min_scan: int = 1024
    # log-spaced samples per half-line, added to resolve roots near zero
    log_scan: int = 256
    brent_rtol: float = 1e-12
    zero_exclusion: float = 1e-4
    tau2: float = 1e-10
    c_safe: float = 40.0
    max_doublings: int = 60
    tangent_rtol: float = 1e-13


@dataclass(frozen=True)
class CandidatePoint:
    lambda_c: float
    s_c: float
    is_local_min: bool
    g2_at_candidate: float


@dataclass
class ProxyResult:
    sigma2_opt: float
    variance: float
    strict: bool
    candidates: list[CandidatePoint] = field(default_factory=list)
    method: str = "general-engine"
    diagnostics: dict = field(default_factory=dict)


def is_strict(sigma2: float, var: float) -> bool:
    return bool(sigma2 <= var * (1.0 + STRICT_RTOL))


def exclusion_radius(d: DiscreteDistribution, config: SolverConfig = SolverConfig()) -> float:
    return config.zero_exclusion / d.span


def search_window(d: DiscreteDistribution, config: SolverConfig = SolverConfig()) -> tuple[float, float]:
    """Interval outside of which ``h < 0``, so no critical point lies beyond it."""
    if len(d) < 2:
        raise SolverError("search window needs at least two atoms")
    mu = float(d.weights @ d.atoms)
    up, down = d.x_max - mu, mu - d.x_min
    hi = (2.0 * math.log(1.0 / d.weights[-1]) + config.c_safe) / up
    lo = -(2.0 * math.log(1.0 / d.weights[0]) + config.c_safe) / down

    def expand(end: float) -> float:
        for _ in range(config.max_doublings):
            if h_eval(d, end) < 0:
                return end
            end *= 2.0
        raise SolverError(f"window expansion exhausted at lambda={end!r}")

    return expand(lo), expand(hi)


def scan_grid(lo: float, hi: float, eps: float, n_uniform: int, n_log: int) -> np.ndarray:
    """Sorted grid on ``[lo, -eps] U [eps, hi]``: uniform points plus log-spaced points near zero."""
    parts = []
    for end in (lo, hi):
        side = math.copysign(1.0, end)
        length = abs(end)
        if length <= eps:
            continue
        uni = np.linspace(eps, length, n_uniform)
        geo = np.geomspace(eps, length, n_log)
        parts.append(side * np.union1d(uni, geo))
    return np.sort(np.concatenate(parts)) if parts else np.empty(0)


def bracket_roots(f: Callable[[float], float], grid: np.ndarray, values: np.ndarray,
                  rtol: float) -> tuple[list[float], int]:
    """Brent-refine every sign change of ``values`` between consecutive grid points.

    Brackets straddling zero (``grid[i] < 0 < grid[i + 1]``) are skipped.
    Returns the roots and the total number of function calls.
    """
    roots, calls = [], 0
    sign = np.sign(values)
    for i in np.nonzero(sign[:-1] * sign[1:] <= 0)[0]:
        a, b = grid[i], grid[i + 1]
        if a < 0 < b:
            continue
        if values[i] == 0:
            root = a
        elif values[i + 1] == 0:
            continue  # picked up as the left end of the next bracket
        else:
            root, info = brentq(f, a, b, xtol=1e-300, rtol=rtol, full_output=True)
            calls += info.function_calls
        roots.append(float(root))
    return roots, calls


def _tangential_roots(d: DiscreteDistribution, grid: np.ndarray, values: np.ndarray,
                      config: SolverConfig) -> list[dict]:
    # local minima of |h| with no sign change around them
    scale = max(1.0, float(np.abs(values).max()))
    found = []
    absv = np.abs(values)
    for i in range(1, len(grid) - 1):
        if not (absv[i] <= absv[i - 1] and absv[i] <= absv[i + 1]):
            continue
        if grid[i - 1] < 0 < grid[i + 1]:
            continue
        if np.sign(values[i - 1]) != np.sign(values[i + 1]) or values[i] == 0:
            continue
        res = minimize_scalar(lambda t: abs(h_eval(d, t)), bounds=(grid[i - 1], grid[i + 1]),
                              method="bounded", options={"xatol": 1e-14 * max(1.0, abs(grid[i]))})
        found.append({"lambda": float(res.x), "abs_h": float(res.fun),
                      "accepted": bool(res.fun < config.tangent_rtol * scale)})
    return found


def find_h_roots(d: DiscreteDistribution, window: tuple[float, float],
                 config: SolverConfig = SolverConfig(), diagnostics: dict | None = None) -> list[float]:
    """Sorted nonzero sign-change roots of h inside ``window``, excluding a neighbourhood of zero."""
    lo, hi = window
    eps = exclusion_radius(d, config)
    n = max(config.min_scan, config.scan_multiplier * len(d))
    grid = scan_grid(lo, hi, eps, n, config.log_scan)
    values = h_grid(d, grid)
    roots, calls = bracket_roots(lambda t: h_eval(d, t), grid, values, config.brent_rtol)
    tangential = _tangential_roots(d, grid, values, config)
    if diagnostics is not None:
        diagnostics.update(scan_points=int(grid.size), brackets=len(roots),
                           brent_calls=calls, tangential=tangential)
    roots += [t["lambda"] for t in tangential if t["accepted"]]
    log.debug("h roots for %r: %s", d, roots)
    return sorted(roots)


def classify_candidate(d: DiscreteDistribution, lam: float,
                       config: SolverConfig = SolverConfig()) -> CandidatePoint:
    """Decide whether a critical point is a local minimum of g(.; M'(lam)/lam)."""
    if abs(lam) < exclusion_radius(d, config):
        raise ValueError(f"lambda={lam!r} lies inside the zero-exclusion interval")
    _, m1, m2 = cgf_at(d, lam)
    s = m1 / lam
    g2 = s - m2
    tau = config.tau2 * abs(s)
    if g2 > tau:
        is_min = True
    elif g2 < -tau:
        is_min = False
    else:
        g0 = g_eval(d, lam, s)
        is_min = all(
            g_eval(d, lam + side * delta * abs(lam), s) >= g0 - 1e-14
            for delta in (1e-4, 1e-3, 1e-2)
            for side in (-1.0, 1.0)
        )
    return CandidatePoint(float(lam), float(s), bool(is_min), float(g2))


def _unit_span(d: DiscreteDistribution) -> DiscreteDistribution:
    x = (d.atoms - d.x_min) / d.span
    return DiscreteDistribution(x, d.weights.copy())


def optimal_proxy_general(d: DiscreteDistribution, config: SolverConfig = SolverConfig()) -> ProxyResult:
    """Optimal proxy of ``d`` from the roots of h.

    The search runs on the law rescaled to unit span; lambdas and proxies are
    mapped back, which keeps the scan independent of the units of ``d``.
    """
    var = variance(d)
    if len(d) == 1:
        return ProxyResult(0.0, 0.0, True, [], "general-engine", {"single_atom": True})
    unit = _unit_span(d)
    scale = d.span
    diagnostics: dict = {}
    window = search_window(unit, config)
    diagnostics["window"] = [window[0] / scale, window[1] / scale]
    roots = find_h_roots(unit, window, config, diagnostics)
    candidates = []
    for r in roots:
        c = classify_candidate(unit, r, config)
        candidates.append(CandidatePoint(c.lambda_c / scale, c.s_c * scale * scale, c.is_local_min,
                                         c.g2_at_candidate * scale * scale))
    for t in diagnostics.get("tangential", []):
        t["lambda"] /= scale
    best = float(max([var] + [c.s_c for c in candidates if c.is_local_min]))
    return ProxyResult(best, var, is_strict(best, var), candidates, "general-engine", diagnostics)
