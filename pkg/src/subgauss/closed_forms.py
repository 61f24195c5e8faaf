"""Exact and semi-analytic optimal proxies for the solved families.

Families: Bernoulli and binomial, symmetric and asymmetric three-mass laws on
``{-a, 0, a}``, and the discrete uniform law on an arithmetic progression.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .characterizer import (
    CandidatePoint,
    ProxyResult,
    SolverConfig,
    SolverError,
    bracket_roots,
    classify_candidate,
    is_strict,
    scan_grid,
    search_window,
)
from .distribution import DiscreteDistribution, new_discrete

_LIMIT_RTOL = 1e-12
_RECOGNIZE_RTOL = 1e-12


def _log_ratio(hi: float, lo: float) -> float:
    # ln(hi / lo) without cancellation when hi ~ lo
    return math.log1p((hi - lo) / lo)


def bernoulli_proxy(p: float) -> float:
    """Kearns-Saul optimal proxy ``(1 - 2p) / (2 ln((1 - p) / p))`` for a {0, 1} variable."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    q = 1.0 - p
    if abs(q - p) < _LIMIT_RTOL:
        return 0.25
    return (q - p) / (2.0 * _log_ratio(q, p))


def binomial_proxy(n: int, p: float) -> float:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return n * bernoulli_proxy(p)


def symmetric_lambda0(p: float) -> float:
    """Positive zero of the third derivative of g in the symmetric three-mass law, p < 1/6."""
    if not 0.0 < p < 1.0 / 6.0:
        raise ValueError(f"p must lie in (0, 1/6), got {p!r}")
    return math.acosh((1.0 - 4.0 * p - 4.0 * p * p) / (2.0 * p * (1.0 - 2.0 * p)))


def symmetric_sigma1(p: float) -> float:
    """Upper bound (1 - 2p)^2 / (4 (1 - 4p)) on the proxy of the symmetric law for p < 1/6."""
    return (1.0 - 2.0 * p) ** 2 / (4.0 * (1.0 - 4.0 * p))


def _symmetric_tangent_lambda(p: float, s: float) -> float:
    disc = max((1.0 - 2.0 * p) ** 2 - 4.0 * (1.0 - 4.0 * p) * s, 0.0)
    return math.acosh(((1.0 - 2.0 * p) * (1.0 - 2.0 * s) + math.sqrt(disc)) / (4.0 * p * s))


def _sigma2_equation(s: float, p: float) -> float:
    lam = _symmetric_tangent_lambda(p, s)
    return s - 2.0 * p * math.sinh(lam) / (lam * (1.0 + 2.0 * p * math.cosh(lam) - 2.0 * p))


def symmetric_sigma2(p: float) -> float:
    """Tighter upper bound on the symmetric proxy for p < 1/6, root of an implicit equation in (2p, sigma1).

    Reported as a diagnostic only; the solver never uses it.
    """
    if not 0.0 < p < 1.0 / 6.0:
        raise ValueError(f"p must lie in (0, 1/6), got {p!r}")
    lo, hi = 2.0 * p, symmetric_sigma1(p)
    return brentq(_sigma2_equation, lo * (1.0 + 1e-12), hi * (1.0 - 1e-12), args=(p,), rtol=1e-14)


def _safe_sigma2(p: float) -> float:
    try:
        return symmetric_sigma2(p)
    except ValueError:
        return float("nan")


def _symmetric_equation(lam: float, p: float) -> float:
    u = 1.0 - 2.0 * p + 2.0 * p * math.cosh(lam)
    return p * lam * math.sinh(lam) - u * math.log(u)


def symmetric_three_mass_proxy(p: float, a: float = 1.0) -> ProxyResult:
    """Optimal proxy of the law with masses ``p, 1 - 2p, p`` on ``-a, 0, a``.

    Strict for ``p >= 1/6``.  Below that the critical point is the unique root
    of ``p l sinh l = u ln u`` (``u = 1 - 2p + 2p cosh l``) beyond ``lambda0``.
    """
    if not 0.0 < p < 0.5:
        raise ValueError(f"p must lie in (0, 1/2), got {p!r}")
    if not a > 0:
        raise ValueError(f"a must be positive, got {a!r}")
    var = 2.0 * p
    if p >= 1.0 / 6.0:
        return ProxyResult(a * a * var, a * a * var, True, [], "closed-form:symmetric-three-mass",
                           {"regime": "strict"})

    lam0 = symmetric_lambda0(p)
    lo = lam0 * (1.0 + 1e-9)
    if _symmetric_equation(lo, p) <= 0:
        raise SolverError(f"symmetric equation is not positive past lambda0={lam0!r}")
    hi = 2.0 * lam0
    for _ in range(60):
        if _symmetric_equation(hi, p) < 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise SolverError("bracket expansion failed for the symmetric three-mass equation")
    lam_c = brentq(_symmetric_equation, lo, hi, args=(p,), xtol=1e-300, rtol=1e-14)
    s = 2.0 * p * math.sinh(lam_c) / (lam_c * (2.0 * p * math.cosh(lam_c) + 1.0 - 2.0 * p))
    sigma1 = symmetric_sigma1(p)
    if not var < s < sigma1:
        raise SolverError(f"proxy {s!r} outside ({var!r}, {sigma1!r})")
    d = new_discrete([-1.0, 0.0, 1.0], [p, 1.0 - 2.0 * p, p])
    candidates = []
    for sgn in (-1.0, 1.0):
        c = _classified(d, sgn * lam_c, s, SolverConfig())
        candidates.append(CandidatePoint(c.lambda_c / a, a * a * s, c.is_local_min, a * a * c.g2_at_candidate))
    return ProxyResult(a * a * s, a * a * var, False, candidates, "closed-form:symmetric-three-mass",
                       {"regime": "non-strict", "lambda0": lam0 / a, "sigma1": a * a * sigma1,
                        "sigma2_bound": a * a * _safe_sigma2(p)})


@dataclass(frozen=True)
class ThreeMassParams:
    p1: float
    p2: float
    a: float = 1.0

    def __post_init__(self):
        p1, p2, a = self.p1, self.p2, self.a
        if not (math.isfinite(p1) and math.isfinite(p2) and math.isfinite(a)):
            raise ValueError("three-mass parameters must be finite")
        if not (p1 > 0 and p2 > 0 and p1 + p2 <= 1.0 + 1e-15 and a > 0):
            raise ValueError(f"need p1 > 0, p2 > 0, p1 + p2 <= 1, a > 0; got {p1!r}, {p2!r}, {a!r}")

    @property
    def p3(self) -> float:
        return max(0.0, 1.0 - self.p1 - self.p2)

    def distribution(self) -> DiscreteDistribution:
        return new_discrete([-self.a, 0.0, self.a], [self.p1, self.p3, self.p2])


def _three_mass_u(p1: float, p2: float, p3: float, lam):
    em, ep = np.exp(-lam), np.exp(lam)
    return p1 * em + p2 * ep + p3, p2 * ep - p1 * em


def _classified(d: DiscreteDistribution, lam: float, s: float, config: SolverConfig) -> CandidatePoint:
    c = classify_candidate(d, lam, config)
    return CandidatePoint(lam, s, c.is_local_min, c.g2_at_candidate)


def _asymmetric_core(p1: float, p2: float, config: SolverConfig) -> tuple[float, list[CandidatePoint], dict]:
    """Unit-scale proxy for ``p1 <= p2`` with three positive masses."""
    p3 = 1.0 - p1 - p2
    mu = p2 - p1
    var = p1 + p2 - mu * mu
    equal = abs(p2 - p1) < _LIMIT_RTOL * (p1 + p2)
    closed = 2.0 * p1 if equal else 2.0 * (p2 - p1) / _log_ratio(p2, p1)
    regime = "A" if p3 <= 4.0 * math.sqrt(p1 * p2) else "B"
    diagnostics: dict = {"regime": regime, "p3": p3, "log_ratio_branch": closed}
    d = new_discrete([-1.0, 0.0, 1.0], [p1, p3, p2])
    candidates = []
    if not equal:
        lam = -_log_ratio(p2, p1)
        candidates.append(_classified(d, lam, closed, config))
    if regime == "A":
        return closed, candidates, diagnostics

    def F(lam: float) -> float:
        u0, u1 = _three_mass_u(p1, p2, p3, lam)
        return lam * u1 - 2.0 * u0 * math.log(u0) + lam * u0 * mu

    def s_at(lam: float) -> float:
        u0, u1 = _three_mass_u(p1, p2, p3, lam)
        return float((u1 / u0 - mu) / lam)

    lo, hi = search_window(d, config)
    eps = config.zero_exclusion / 2.0
    n = max(config.min_scan, 3 * config.scan_multiplier)
    grid = scan_grid(lo, hi, eps, n, config.log_scan)
    u0, u1 = _three_mass_u(p1, p2, p3, grid)
    values = grid * u1 - 2.0 * u0 * np.log(u0) + grid * u0 * mu
    roots, _ = bracket_roots(F, grid, values, config.brent_rtol)
    # the log-ratio critical point is found analytically; drop its numerical copy
    if candidates:
        roots = [r for r in roots if abs(r - candidates[0].lambda_c) > 1e-8 * abs(r)]
    positive = [r for r in roots if r > 0]
    negative = [r for r in roots if r < 0]
    positive_branch_value = max([closed] + [s_at(r) for r in positive])
    candidates += [_classified(d, r, s_at(r), config) for r in roots]
    # every zero of F gives a lower bound on the proxy, so the maximum is taken
    # over all of them; the largest one above Var is always a local minimum
    best = float(max([var, closed] + [c.s_c for c in candidates]))
    diagnostics.update(F_roots_positive=positive, F_roots_negative=negative, positive_branch_value=positive_branch_value)
    return best, candidates, diagnostics


def asymmetric_three_mass_proxy(params: ThreeMassParams, config: SolverConfig = SolverConfig()) -> ProxyResult:
    """Optimal proxy of the law with masses ``p1, p3, p2`` on ``-a, 0, a``.

    Regime A (``p3 <= 4 sqrt(p1 p2)``) is the closed form ``2 (p2 - p1) / ln(p2 / p1)``.
    Regime B takes the maximum of that value, the variance and ``M'(l)/l`` over
    the nonzero zeros of ``F(l) = l u1 - 2 u0 ln u0 + l u0 (p2 - p1)`` on both
    half-lines.
    """
    p1, p2, a = params.p1, params.p2, params.a
    if params.p3 <= 0.0:
        # two atoms -a, +a: Bernoulli scaled by 2a
        s = 4.0 * a * a * bernoulli_proxy(p2)
        var = 4.0 * a * a * p1 * p2
        return ProxyResult(s, var, is_strict(s, var), [], "closed-form:bernoulli", {"regime": "two-atom"})

    reflected = p1 > p2
    if reflected:
        p1, p2 = p2, p1
    s, candidates, diagnostics = _asymmetric_core(p1, p2, config)
    sign = -1.0 if reflected else 1.0
    candidates = [CandidatePoint(sign * c.lambda_c / a, a * a * c.s_c, c.is_local_min, c.g2_at_candidate)
                  for c in candidates]
    var = a * a * (p1 + p2 - (p2 - p1) ** 2)
    sigma2 = a * a * s
    diagnostics["reflected"] = reflected
    if diagnostics["regime"] == "A":
        strict = abs(p2 - p1) < _LIMIT_RTOL * (p1 + p2)
    else:
        strict = is_strict(sigma2, var)
        diagnostics["positive_branch_value"] *= a * a
    return ProxyResult(sigma2, var, strict, candidates, "closed-form:asymmetric-three-mass", diagnostics)


def discrete_uniform_proxy(N: int, a: float = 1.0, b: float = 0.0) -> ProxyResult:
    """Uniform law on ``{k a + b : k = 1..N}`` is strictly sub-Gaussian: proxy ``a^2 (N^2 - 1) / 12``."""
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if a == 0:
        raise ValueError("a must be nonzero")
    s = a * a * (N * N - 1) / 12.0
    return ProxyResult(s, s, True, [], "closed-form:discrete-uniform", {})


def _close(u: float, v: float, scale: float) -> bool:
    return abs(u - v) <= _RECOGNIZE_RTOL * scale


def closed_form_for(d: DiscreteDistribution) -> ProxyResult | None:
    """Closed-form result when ``d`` belongs to a solved family (up to shift and scale), else None."""
    n = len(d)
    x, w = d.atoms, d.weights
    if n == 1:
        return ProxyResult(0.0, 0.0, True, [], "closed-form:point-mass", {})
    span = d.span
    if n == 2:
        s = span * span * bernoulli_proxy(float(w[1]))
        var = span * span * float(w[0] * w[1])
        return ProxyResult(s, var, is_strict(s, var), [], "closed-form:bernoulli", {})
    steps = np.diff(x)
    if not all(_close(st, steps[0], span) for st in steps):
        return None
    if all(_close(wi, w[0], 1.0) for wi in w):
        return discrete_uniform_proxy(n, float(steps[0]))
    if n == 3:
        half = span / 2.0
        p1, p3, p2 = (float(v) for v in w)
        if _close(p1, p2, 1.0):
            return symmetric_three_mass_proxy(0.5 * (p1 + p2), half)
        return asymmetric_three_mass_proxy(ThreeMassParams(p1, p2, half))
    return None
