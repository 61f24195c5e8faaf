"""Finite discrete distributions and their centered cumulant-generating function.

All derivative evaluations go through exponential tilting: for a given lambda
the weights ``q_i ~ w_i exp(lambda (x_i - mu))`` define a probability law whose
mean and variance are M'(lambda) and M''(lambda).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

# atoms closer than this fraction of the support width are merged
DEDUP_RTOL = 1e-12
# relative deviation of sum(weights) from 1 tolerated when check_sum=True
SUM_RTOL = 1e-9
# below this value of |lambda| * (x_max - x_min) the log1p/expm1 path is used
_SMALL_EXPONENT = 0.5


class CgfDerivatives(NamedTuple):
    m0: float
    m1: float
    m2: float


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Distribution with strictly increasing atoms and positive weights summing to one.

    Build instances with :func:`new_discrete`, which sorts, merges and
    normalizes; the constructor itself does not validate.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.atoms.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self) -> int:
        return len(self.atoms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return (np.array_equal(self.atoms, other.atoms)
                and np.array_equal(self.weights, other.weights))

    def __repr__(self) -> str:
        return f"DiscreteDistribution(atoms={self.atoms.tolist()}, weights={self.weights.tolist()})"

    @property
    def x_min(self) -> float:
        return float(self.atoms[0])

    @property
    def x_max(self) -> float:
        return float(self.atoms[-1])

    @property
    def span(self) -> float:
        return self.x_max - self.x_min

    @property
    def centered(self) -> np.ndarray:
        return self.atoms - mean(self)


def new_discrete(atoms: Sequence[float], weights: Sequence[float],
                 check_sum: bool = False) -> DiscreteDistribution:
    """Build a normalized, sorted and deduplicated distribution.

    Zero-weight atoms are dropped and atoms closer than ``1e-12 * span`` are
    merged by summing their weights.  With ``check_sum=True`` a weight vector
    whose total is farther than 1e-9 (relative) from one is rejected instead
    of being rescaled.
    """
    x = np.asarray(atoms, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if x.size == 0 or x.size != w.size:
        raise ValueError(f"atoms and weights must have the same nonzero length, got {x.size} and {w.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
        raise ValueError("atoms and weights must be finite")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError("at least one weight must be positive")
    if check_sum and abs(total - 1.0) > SUM_RTOL:
        raise ValueError(f"weights sum to {total!r}, expected 1")

    keep = w > 0
    x, w = x[keep], w[keep] / total
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]

    tol = DEDUP_RTOL * (x[-1] - x[0])
    merged_x, merged_w = [x[0]], [w[0]]
    for xi, wi in zip(x[1:], w[1:]):
        if xi - merged_x[-1] <= tol:
            merged_w[-1] += wi
        else:
            merged_x.append(xi)
            merged_w.append(wi)
    w = np.array(merged_w)
    return DiscreteDistribution(np.array(merged_x), w / w.sum())


def mean(d: DiscreteDistribution) -> float:
    return float(math.fsum(d.weights * d.atoms))


def central_moment(d: DiscreteDistribution, k: int) -> float:
    if k < 1:
        raise ValueError("moment order must be a positive integer")
    c = d.atoms - mean(d)
    return float(math.fsum(d.weights * c**k))


def variance(d: DiscreteDistribution) -> float:
    return central_moment(d, 2)


def _log_mgf(centered: np.ndarray, weights: np.ndarray, lam: np.ndarray, span: float) -> np.ndarray:
    t = np.multiply.outer(lam, centered)
    shift = t.max(axis=-1, keepdims=True)
    m0 = shift[..., 0] + np.log(np.exp(t - shift) @ weights)
    # near lambda = 0 the shifted form loses ~1e-16 absolute, which swamps
    # h(lambda) ~ kappa_3 lambda^3 / 6
    small = np.abs(lam) * span < _SMALL_EXPONENT
    if np.any(small):
        m0 = np.where(small, np.log1p(np.expm1(np.where(small[..., None], t, 0.0)) @ weights), m0)
    return m0


def _cgf_arrays(centered: np.ndarray, weights: np.ndarray, lam: np.ndarray, span: float):
    lam = np.asarray(lam, dtype=float)
    t = np.multiply.outer(lam, centered)
    shift = t.max(axis=-1, keepdims=True)
    e = np.exp(t - shift)
    z = e @ weights
    m0 = _log_mgf(centered, weights, lam, span)
    q = e * weights / z[..., None]
    m1 = q @ centered
    dev = centered - m1[..., None]
    m2 = np.maximum((q * dev * dev).sum(axis=-1), 0.0)
    return m0, m1, m2


def cgf_grid(d: DiscreteDistribution, lam) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (M, M', M'') on an array of lambda values."""
    lam = np.asarray(lam, dtype=float)
    if not np.all(np.isfinite(lam)):
        raise ValueError("lambda must be finite")
    return _cgf_arrays(d.centered, d.weights, lam, d.span)


def log_mgf(d: DiscreteDistribution, lam) -> np.ndarray:
    """M(lambda) alone, vectorized."""
    lam = np.asarray(lam, dtype=float)
    return _log_mgf(d.centered, d.weights, lam, d.span)


def cgf_at(d: DiscreteDistribution, lam: float) -> CgfDerivatives:
    if not math.isfinite(lam):
        raise ValueError(f"lambda must be finite, got {lam!r}")
    m0, m1, m2 = _cgf_arrays(d.centered, d.weights, np.array([lam]), d.span)
    return CgfDerivatives(float(m0[0]), float(m1[0]), float(m2[0]))


def g_eval(d: DiscreteDistribution, lam: float, sigma2: float) -> float:
    """g(lambda; sigma2) = lambda^2 sigma2 / 2 - M(lambda); sigma2 is a proxy iff g >= 0."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    return 0.5 * lam * lam * sigma2 - cgf_at(d, lam).m0


def h_eval(d: DiscreteDistribution, lam: float) -> float:
    """lambda M'(lambda) - 2 M(lambda); its nonzero roots are the critical points."""
    m0, m1, _ = cgf_at(d, lam)
    return lam * m1 - 2.0 * m0


def h_grid(d: DiscreteDistribution, lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    m0, m1, _ = cgf_grid(d, lam)
    return lam * m1 - 2.0 * m0


def affine_transform(d: DiscreteDistribution, a: float, b: float) -> DiscreteDistribution:
    """Law of ``a X + b``."""
    if a == 0 or not math.isfinite(a) or not math.isfinite(b):
        raise ValueError("scale must be finite and nonzero")
    x = a * d.atoms + b
    w = d.weights
    if a < 0:
        x, w = x[::-1], w[::-1]
    if len(x) > 1 and not np.all(np.diff(x) > DEDUP_RTOL * (x[-1] - x[0])):
        # atoms collided under rounding
        return new_discrete(x, w)
    return DiscreteDistribution(np.array(x), np.array(w))
