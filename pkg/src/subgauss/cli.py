"""Command-line front end.

Examples::

    subgauss three-mass --p1 0.05 --p2 0.01
    subgauss uniform --n 10 --method general
    subgauss discrete --atoms 0,1,3 --weights 0.2,0.5,0.3 --curve g.csv --sigma2 opt

Exit codes: 0 success, 2 invalid input, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Sequence

from scipy.stats import binom

from . import closed_forms
from .characterizer import ProxyResult, SolverConfig, SolverError, is_strict, optimal_proxy_general
from .distribution import DiscreteDistribution, new_discrete, variance
from .oracle import bisect_optimal_proxy, export_curve

log = logging.getLogger("subgauss")

KINDS = ("bernoulli", "binomial", "three-mass", "uniform", "discrete")
METHODS = ("auto", "closed-form", "general", "oracle")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3


class InputError(ValueError):
    pass


@dataclass
class DistributionSpec:
    kind: str
    params: dict = field(default_factory=dict)
    method: str = "auto"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown distribution kind {self.kind!r}")
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}")

    def distribution(self) -> DiscreteDistribution:
        p = self.params
        try:
            if self.kind == "bernoulli":
                _check_prob(p["p"])
                return new_discrete([0.0, 1.0], [1.0 - p["p"], p["p"]])
            if self.kind == "binomial":
                n = _check_count(p["n"])
                _check_prob(p["p"])
                k = list(range(n + 1))
                return new_discrete(k, binom.pmf(k, n, p["p"]))
            if self.kind == "three-mass":
                return closed_forms.ThreeMassParams(p["p1"], p["p2"], p.get("a", 1.0)).distribution()
            if self.kind == "uniform":
                n = _check_count(p["n"])
                a, b = p.get("a", 1.0), p.get("b", 0.0)
                if a == 0:
                    raise InputError("uniform scale a must be nonzero")
                return new_discrete([k * a + b for k in range(1, n + 1)], [1.0] * n)
            return new_discrete(p["atoms"], p["weights"])
        except KeyError as exc:
            raise InputError(f"{self.kind}: missing parameter {exc.args[0]!r}") from None
        except InputError:
            raise
        except (ValueError, TypeError) as exc:
            raise InputError(str(exc)) from None

    def closed_form(self) -> ProxyResult | None:
        p = self.params
        if self.kind == "bernoulli":
            s = closed_forms.bernoulli_proxy(p["p"])
            var = p["p"] * (1.0 - p["p"])
            return ProxyResult(s, var, is_strict(s, var), [], "closed-form:bernoulli", {})
        if self.kind == "binomial":
            s = closed_forms.binomial_proxy(p["n"], p["p"])
            var = p["n"] * p["p"] * (1.0 - p["p"])
            return ProxyResult(s, var, is_strict(s, var), [], "closed-form:binomial", {})
        if self.kind == "three-mass":
            params = closed_forms.ThreeMassParams(p["p1"], p["p2"], p.get("a", 1.0))
            if params.p1 == params.p2 and params.p3 > 0:
                return closed_forms.symmetric_three_mass_proxy(params.p1, params.a)
            return closed_forms.asymmetric_three_mass_proxy(params)
        if self.kind == "uniform":
            return closed_forms.discrete_uniform_proxy(p["n"], p.get("a", 1.0), p.get("b", 0.0))
        return closed_forms.closed_form_for(self.distribution())


def _check_prob(p) -> None:
    if not (isinstance(p, (int, float)) and 0.0 < p < 1.0):
        raise InputError(f"probability must lie in (0, 1), got {p!r}")


def _check_count(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, float)) or n != int(n) or n < 1:
        raise InputError(f"count must be a positive integer, got {n!r}")
    return int(n)


def _reject_constant(name: str):
    raise InputError(f"non-finite number {name} in spec file")


def _finite(value, path: str = "$"):
    if isinstance(value, float) and not math.isfinite(value):
        raise InputError(f"non-finite number at {path}")
    if isinstance(value, list):
        for i, v in enumerate(value):
            _finite(v, f"{path}[{i}]")
    elif isinstance(value, dict):
        for k, v in value.items():
            _finite(v, f"{path}.{k}")
    return value


_SPEC_FIELDS = {
    "bernoulli": {"p"},
    "binomial": {"n", "p"},
    "three-mass": {"p1", "p2", "a"},
    "uniform": {"n", "a", "b"},
    "discrete": {"atoms", "weights"},
}


def parse_spec_file(path: str) -> DistributionSpec:
    """Read ``{"atoms": [...], "weights": [...]}`` or ``{"kind": ..., <params>}``."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh, parse_constant=_reject_constant)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise InputError("spec file must hold a JSON object")
    raw = dict(_finite(raw))
    kind = raw.pop("kind", "discrete")
    method = raw.pop("method", "auto")
    if kind not in _SPEC_FIELDS:
        raise InputError(f"unknown distribution kind {kind!r}")
    if kind == "uniform" and "N" in raw:
        raw["n"] = raw.pop("N")
    extra = set(raw) - _SPEC_FIELDS[kind]
    if extra:
        raise InputError(f"unexpected fields for {kind}: {sorted(extra)}")
    for key, value in raw.items():
        if key in ("atoms", "weights"):
            if not (isinstance(value, list) and all(_is_number(v) for v in value)):
                raise InputError(f"{key} must be a list of numbers")
            raw[key] = [float(v) for v in value]
        elif not _is_number(value):
            raise InputError(f"{key} must be a number")
    spec = DistributionSpec(kind, raw, method)
    spec.distribution()
    return spec


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _float_list(text: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError("values must be finite")
    return values


def _finite_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("value must be finite")
    return v


def _add_global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    def default(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--method", choices=METHODS, default=default("auto"))
    p.add_argument("--json", action="store_true", default=default(True),
                   help="emit JSON on stdout (the default and only format)")
    p.add_argument("--curve", metavar="OUT.csv", default=default(None),
                   help="write lambda,g,g1,g2,h samples to this CSV file")
    p.add_argument("--lambda-min", type=_finite_float, default=default(-5.0))
    p.add_argument("--lambda-max", type=_finite_float, default=default(5.0))
    p.add_argument("--samples", type=int, default=default(201))
    p.add_argument("--sigma2", default=default("opt"), help="proxy used for the curve, or 'opt'")
    p.add_argument("--tol", type=_finite_float, default=default(None),
                   help="relative tolerance for the general engine and the oracle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subgauss", description="Optimal sub-Gaussian variance proxies.")
    _add_global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="kind", required=True, metavar="{" + ",".join(KINDS) + "}")

    p = sub.add_parser("bernoulli")
    p.add_argument("--p", type=_finite_float, required=True)
    p = sub.add_parser("binomial")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=_finite_float, required=True)
    p = sub.add_parser("three-mass")
    p.add_argument("--p1", type=_finite_float, required=True)
    p.add_argument("--p2", type=_finite_float, required=True)
    p.add_argument("--a", type=_finite_float, default=1.0)
    p = sub.add_parser("uniform")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=_finite_float, default=1.0)
    p.add_argument("--b", type=_finite_float, default=0.0)
    p = sub.add_parser("discrete")
    p.add_argument("--atoms", type=_float_list)
    p.add_argument("--weights", type=_float_list)
    p.add_argument("--spec", metavar="FILE.json")
    for name, sp in sub.choices.items():
        _add_global_flags(sp, suppress=True)
    return parser


def _spec_from_args(args: argparse.Namespace) -> DistributionSpec:
    if args.kind == "discrete":
        if args.spec is not None:
            if args.atoms is not None or args.weights is not None:
                raise InputError("--spec cannot be combined with --atoms/--weights")
            spec = parse_spec_file(args.spec)
            if args.method != "auto":
                spec.method = args.method
            return spec
        if args.atoms is None or args.weights is None:
            raise InputError("discrete needs --atoms and --weights, or --spec")
        params = {"atoms": args.atoms, "weights": args.weights}
    else:
        names = {"bernoulli": ("p",), "binomial": ("n", "p"), "three-mass": ("p1", "p2", "a"),
                 "uniform": ("n", "a", "b")}[args.kind]
        params = {k: getattr(args, k) for k in names}
    spec = DistributionSpec(args.kind, params, args.method)
    spec.distribution()
    return spec


def solve(spec: DistributionSpec, tol: float | None = None) -> tuple[DiscreteDistribution, ProxyResult]:
    """Dispatch on ``spec.method``; auto prefers a closed form over the general engine."""
    d = spec.distribution()
    if spec.method in ("auto", "closed-form"):
        try:
            result = spec.closed_form()
        except ValueError as exc:
            raise InputError(str(exc)) from None
        if result is not None:
            return d, result
        if spec.method == "closed-form":
            raise InputError(f"no closed form available for this {spec.kind} distribution")
    if spec.method == "oracle":
        s = bisect_optimal_proxy(d, rel_tol=tol if tol is not None else 1e-7)
        var = variance(d)
        return d, ProxyResult(s, var, is_strict(s, var), [], "oracle", {"rel_tol": tol or 1e-7})
    config = SolverConfig() if tol is None else SolverConfig(brent_rtol=tol)
    return d, optimal_proxy_general(d, config)


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return repr(float(x))


def dumps(obj) -> str:
    """JSON with floats in shortest round-trip form and non-finite values as null."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return dumps(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def result_payload(result: ProxyResult) -> dict:
    return {
        "sigma2_opt": float(result.sigma2_opt),
        "variance": float(result.variance),
        "strict": bool(result.strict),
        "method": result.method,
        "candidates": [{"lambda": c.lambda_c, "s": c.s_c, "local_min": c.is_local_min}
                       for c in result.candidates],
        "diagnostics": result.diagnostics,
    }


def write_curve(path: str, rows) -> None:
    lines = ["lambda,g,g1,g2,h"] + [",".join(_fmt(float(v)) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run(argv: Sequence[str] | None = None) -> int:
    if os.environ.get("SUBGAUSS_LOG", "").lower() == "debug":
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        spec = _spec_from_args(args)
        if args.samples < 2:
            raise InputError("--samples must be at least 2")
        if args.tol is not None and not 1e-15 <= args.tol < 1:
            raise InputError("--tol must lie in [1e-15, 1)")
        if args.method == "oracle" and args.tol is not None and args.tol < 1e-10:
            raise InputError("--tol must be at least 1e-10 with --method oracle")
        curve_sigma2 = None
        if args.curve is not None and args.sigma2 != "opt":
            curve_sigma2 = _finite_float(args.sigma2)
            if curve_sigma2 < 0:
                raise InputError("--sigma2 must be nonnegative")
        d, result = solve(spec, args.tol)
        payload = result_payload(result)
        if args.curve is not None:
            s2 = result.sigma2_opt if curve_sigma2 is None else curve_sigma2
            write_curve(args.curve, export_curve(d, s2, args.lambda_min, args.lambda_max, args.samples))
            payload["diagnostics"] = dict(payload["diagnostics"], curve={"path": args.curve, "sigma2": s2})
    except (InputError, argparse.ArgumentTypeError) as exc:
        print(f"subgauss: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"subgauss: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, RuntimeError, ArithmeticError) as exc:
        print(f"subgauss: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"subgauss: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(dumps(payload) + "\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())
