"""Acceptance criteria, each run at its stated tolerance and time budget.

A one-line verdict per criterion is printed in the terminal summary.
"""
import json
import math

import numpy as np

from subgauss import (
    ThreeMassParams,
    affine_transform,
    asymmetric_three_mass_proxy,
    bernoulli_proxy,
    bisect_optimal_proxy,
    cgf_at,
    export_curve,
    new_discrete,
    optimal_proxy_general,
    symmetric_sigma1,
    symmetric_three_mass_proxy,
    variance,
)
from subgauss.cli import run

SEED = 20251016


def rel_err(x: float, y: float) -> float:
    return abs(x - y) / max(abs(y), 1e-300)


def random_distributions(count: int, seed: int = SEED):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(3, 7))
        atoms = rng.uniform(-3.0, 3.0, n)
        weights = rng.dirichlet(np.ones(n))
        if weights.min() < 1e-3 or np.min(np.diff(np.sort(atoms))) < 1e-2:
            continue
        out.append(new_discrete(atoms, weights))
    return out


def cli_json(capsys, *argv) -> dict:
    assert run(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def test_criterion_1_skewed_three_mass(criterion, capsys):
    with criterion(1, "three-mass (0.05, 0.01): critical points, candidates, variance", 0.1) as c:
        out = cli_json(capsys, "three-mass", "--p1", "0.05", "--p2", "0.01")
        _check_skewed(c, out)


def _check_skewed(c, out: dict) -> None:
    lams = [cand["lambda"] for cand in out["candidates"]]
    svals = [cand["s"] for cand in out["candidates"]]
    for target in (-5.4108345267, 9.0943387806):
        near = min(lams, key=lambda t: abs(t - target))
        c.check(f"lambda near {target}", abs(near - target) <= 5e-4, f"closest {near:.10f}")
    for target in (0.17, 0.11):
        near = min(svals, key=lambda t: abs(t - target))
        c.check(f"candidate near {target}", abs(near - target) <= 0.005, f"closest {near:.10f}")
    c.check("variance 0.0584", abs(out["variance"] - 0.0584) <= 5e-4, f"{out['variance']:.12g}")
    best = max(cand["s"] for cand in out["candidates"] if cand["local_min"])
    c.check("sigma2_opt is the larger candidate", out["sigma2_opt"] == best, f"{out['sigma2_opt']:.15g}")


def test_criterion_2_regime_a_closed_form(criterion):
    target = 0.24 / math.log(25 / 13)
    with criterion(2, "three-mass (0.13, 0.25): closed form, engine, curves", 1.0) as c:
        params = ThreeMassParams(0.13, 0.25)
        d = params.distribution()
        closed = asymmetric_three_mass_proxy(params).sigma2_opt
        engine = optimal_proxy_general(d).sigma2_opt
        at_opt = export_curve(d, closed, -10.0, 10.0, 20001)
        at_var = export_curve(d, variance(d), -10.0, 10.0, 20001)
        c.check("closed form", rel_err(closed, target) <= 1e-10, f"rel err {rel_err(closed, target):.2e}")
        c.check("engine", rel_err(engine, closed) <= 1e-8, f"rel err {rel_err(engine, closed):.2e}")
        c.check("curve at optimum nonnegative", at_opt[:, 1].min() >= -1e-10, f"min {at_opt[:, 1].min():.3e}")
        neg = at_var[at_var[:, 0] < 0, 1].min()
        c.check("curve at variance dips below -1e-5 for lambda < 0", neg < -1e-5, f"min {neg:.3e}")


def test_criterion_3_symmetric_phase_transition(criterion):
    with criterion(3, "symmetric three-mass phase transition at p = 1/6", 5.0) as c:
        for p in (0.17, 0.20, 0.30, 0.45):
            r = symmetric_three_mass_proxy(p)
            e = optimal_proxy_general(new_discrete([-1, 0, 1], [p, 1 - 2 * p, p]))
            c.check(f"p={p} strict", r.strict and r.sigma2_opt == 2 * p and e.strict,
                    f"closed {r.sigma2_opt!r}, engine {e.sigma2_opt!r}")
        for p in (0.05, 0.10, 0.15):
            d = new_discrete([-1, 0, 1], [p, 1 - 2 * p, p])
            r = symmetric_three_mass_proxy(p)
            e = optimal_proxy_general(d).sigma2_opt
            o = bisect_optimal_proxy(d, rel_tol=1e-6)
            c.check(f"p={p} non-strict and bounded",
                    not r.strict and 2 * p < r.sigma2_opt < symmetric_sigma1(p), f"{r.sigma2_opt:.12g}")
            c.check(f"p={p} engine", rel_err(e, r.sigma2_opt) <= 1e-6, f"rel err {rel_err(e, r.sigma2_opt):.2e}")
            c.check(f"p={p} oracle", rel_err(o, r.sigma2_opt) <= 1e-4, f"rel err {rel_err(o, r.sigma2_opt):.2e}")


def test_criterion_4_discrete_uniform(criterion):
    with criterion(4, "discrete uniform N = 2..50 strictly sub-Gaussian", 30.0) as c:
        worst, all_strict = 0.0, True
        for n in range(2, 51):
            r = optimal_proxy_general(new_discrete(np.arange(1, n + 1), np.ones(n)))
            worst = max(worst, rel_err(r.sigma2_opt, (n * n - 1) / 12))
            all_strict &= r.strict
        c.check("engine", worst <= 1e-6 and all_strict, f"worst rel err {worst:.2e}, all strict {all_strict}")
        for n in (2, 5, 10):
            o = bisect_optimal_proxy(new_discrete(np.arange(1, n + 1), np.ones(n)), rel_tol=1e-6)
            target = (n * n - 1) / 12
            c.check(f"oracle N={n}", rel_err(o, target) <= 1e-4, f"rel err {rel_err(o, target):.2e}")


def test_criterion_5_bernoulli(criterion, capsys):
    with criterion(5, "Bernoulli: closed form, engine and oracle agree", 5.0) as c:
        for p in (0.01, 0.1, 0.25, 0.4, 0.5):
            d = new_discrete([0, 1], [1 - p, p])
            vals = {"closed": bernoulli_proxy(p), "engine": optimal_proxy_general(d).sigma2_opt,
                    "oracle": bisect_optimal_proxy(d, rel_tol=1e-6)}
            spread = max(rel_err(u, v) for u in vals.values() for v in vals.values())
            c.check(f"p={p}", spread <= 1e-4, f"max pairwise rel err {spread:.2e}")
        out = cli_json(capsys, "bernoulli", "--p", "0.5")
        c.check("p=0.5 exact", bernoulli_proxy(0.5) == 0.25 and out["sigma2_opt"] == 0.25,
                f"{out['sigma2_opt']!r}")


def test_criterion_6_asymmetric_reduces_to_symmetric(criterion):
    with criterion(6, "asymmetric(p, p) equals symmetric(p)") as c:
        for p in (0.05, 0.1, 1 / 6, 0.25, 0.4):
            a = asymmetric_three_mass_proxy(ThreeMassParams(p, p)).sigma2_opt
            s = symmetric_three_mass_proxy(p).sigma2_opt
            c.check(f"p={p:.6g}", rel_err(a, s) <= 1e-8, f"rel err {rel_err(a, s):.2e}")


def _local_min_counts(d) -> tuple[int, int]:
    cands = [x for x in optimal_proxy_general(d).candidates if x.is_local_min]
    return sum(x.lambda_c < 0 for x in cands), sum(x.lambda_c > 0 for x in cands)


def test_criterion_7_property_suite(criterion):
    with criterion(7, "property suite", 120.0) as c:
        cases = random_distributions(200)
        results = [optimal_proxy_general(d) for d in cases]

        worst = 0.0
        for d, r in zip(cases[:20], results[:20]):
            for a in (0.5, 2.0, -3.0):
                for b in (0.0, 7.0):
                    t = optimal_proxy_general(affine_transform(d, a, b)).sigma2_opt
                    worst = max(worst, rel_err(t, a * a * r.sigma2_opt))
        c.check("affine equivariance", worst <= 1e-9, f"worst rel err {worst:.2e}")

        worst = max(rel_err(optimal_proxy_general(affine_transform(d, -1.0, 0.0)).sigma2_opt, r.sigma2_opt)
                    for d, r in zip(cases, results))
        c.check("reflection invariance", worst <= 1e-9, f"worst rel err {worst:.2e}")

        below = sum(r.sigma2_opt < r.variance for r in results)
        c.check("sigma2_opt >= Var on 200 cases", below == 0, f"{below} violations")

        worst = max(rel_err(bisect_optimal_proxy(d, rel_tol=1e-6), r.sigma2_opt) for d, r in zip(cases, results))
        c.check("oracle vs engine on 200 cases", worst <= 1e-4, f"worst rel err {worst:.2e}")

        worst, step = 0.0, 1e-5
        for d in cases:
            for lam in (-2.0, -0.3, 0.7, 1.9):
                lo, mid, hi = (cgf_at(d, lam + k * step) for k in (-1, 0, 1))
                for fd, exact in (((hi.m0 - lo.m0) / (2 * step), mid.m1), ((hi.m1 - lo.m1) / (2 * step), mid.m2)):
                    worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-3))
        c.check("CGF derivatives vs finite differences", worst <= 1e-6, f"worst rel err {worst:.2e}")

        rng = np.random.default_rng(SEED)
        masses = [(0.05, 0.94, 0.01), (0.13, 0.62, 0.25), (0.1, 0.8, 0.1), (0.05, 0.9, 0.05)]
        masses += [tuple(p) for p in rng.dirichlet(np.ones(3), 300) if p.min() >= 1e-3]
        offenders = []
        for p in masses:
            counts = _local_min_counts(new_discrete([-1, 0, 1], p))
            if max(counts) > 1:
                offenders.append(p)
        example = ", ".join(f"{v:.6g}" for v in offenders[0]) if offenders else "none"
        c.check("at most one local-min candidate per half-line (3-mass)", not offenders,
                f"{len(offenders)}/{len(masses)} cases violate; first masses on (-1, 0, 1): ({example})")
