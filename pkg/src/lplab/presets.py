"""Named scenarios and the dispatch from target names to verifiers.

A preset fixes a target and a set of default parameters, including
input builders.  ``run_target`` merges user overrides over a preset's
defaults and calls the verifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import harness
from .errors import ConfigurationError
from .functions import GridFunction, Profile, scale_fn
from .numerics import Box, RandomSource
from .report import VerificationReport
from .sets import CoefficientSet, DiscreteSet


def indicator(lo: float, hi: float) -> Profile:
    """Indicator of ``[lo, hi]`` (closed; node roundoff absorbed)."""
    eps = 1e-12 * max(1.0, abs(lo), abs(hi))
    return Profile(lambda x: ((x[:, 0] >= lo - eps) & (x[:, 0] <= hi + eps)).astype(float), Box((lo,), (hi,)), f"indicator[{lo},{hi}]")


def tent(center: float = 0.0, half_width: float = 1.0, height: float = 1.0) -> Profile:
    lo, hi = center - half_width, center + half_width
    return Profile(
        lambda x: height * np.maximum(0.0, 1.0 - np.abs(x[:, 0] - center) / half_width),
        Box((lo,), (hi,)),
        f"tent({center},{half_width},{height})",
    )


def gaussian(radius: float = 6.0) -> Profile:
    return Profile(lambda x: np.exp(-0.5 * np.sum(x**2, axis=1)) / math.sqrt(2 * math.pi), Box((-radius,), (radius,)), "gaussian")


def _grid_fn(obj, points: int) -> GridFunction:
    return obj.sample(points) if isinstance(obj, Profile) else obj


# -- target runners -------------------------------------------------------------------------


def _need(params, *keys):
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        raise ConfigurationError(f"missing input(s) for target: {', '.join(missing)}")


def _rng(params) -> RandomSource:
    return RandomSource(params.get("seed", 0))


def _run_bm(P):
    _need(P, "K", "L", "lam")
    return harness.verify_bm(P["K"], P["L"], P["lam"], P.get("samples", 10**5), _rng(P))


def _run_lp_bm(P):
    _need(P, "K", "L", "p")
    return harness.verify_lp_bm(P["K"], P["L"], P["p"], P.get("lambda_resolution", 1001), P.get("samples", 10**5), _rng(P))


def _triple(P):
    _need(P, "f", "g", "lam")
    n = P.get("resolution", 257)
    f, g = _grid_fn(P["f"], n), _grid_fn(P["g"], n)
    return f, g, n


def _run_pl(P):
    f, g, n = _triple(P)
    h = P.get("h")
    h = harness.minimal_mean_h(f, g, P["lam"], 0.0) if h is None else _grid_fn(h, n)
    return harness.verify_pl(f, g, h, P["lam"])


def _run_bbl(P):
    f, g, n = _triple(P)
    alpha = P.get("alpha", 0.0)
    h = P.get("h")
    h = harness.minimal_mean_h(f, g, P["lam"], alpha) if h is None else _grid_fn(h, n)
    report = harness.verify_bbl(f, g, h, P["lam"], alpha)
    report.artifacts["h"] = h
    return report


def _run_functional_lp_bm(P):
    _need(P, "f", "g")
    resolutions = P.get("resolutions")
    if resolutions is None:
        resolutions = [P["resolution"]] if "resolution" in P else (65, 129, 257)
    if "lambda_resolution" in P:
        resolutions = [(r if isinstance(r, int) else r[0], P["lambda_resolution"]) for r in resolutions]
    cfg = harness.FunctionalLpConfig(P["f"], P["g"], P.get("p", 2.0), P.get("s", 1.0), P.get("mu", 1.0), P.get("omega", 1.0), resolutions)
    return harness.verify_functional_lp_bm(cfg)


def _coefficients(P) -> CoefficientSet:
    M = P.get("M", "lp_curve")
    if isinstance(M, CoefficientSet):
        return M
    if M == "lp_curve":
        return CoefficientSet.lp_curve(P.get("p", 2.0), P.get("lambda_resolution", 257))
    if M == "lp_hull":
        return CoefficientSet.lp_curve(P.get("p", 2.0), P.get("lambda_resolution", 65)).convex_hull()
    if M == "two_point":
        return CoefficientSet.explicit([[1.0, 0.0], [0.0, 1.0]])
    if M == "classical":
        return CoefficientSet.classical()
    raise ConfigurationError(f"unknown coefficient set {M!r} (lp_curve, lp_hull, two_point, classical)")


def _run_sup_conv_concavity(P):
    _need(P, "f", "g")
    n = P.get("resolution", 129)
    return harness.check_sup_conv_concavity(_grid_fn(P["f"], n), _grid_fn(P["g"], n), _coefficients(P), P.get("s", 1.0), P.get("condition", "convex_M"))


def _run_lift_inclusion(P):
    _need(P, "f", "g")
    n = P.get("resolution", 129)
    return harness.check_lift_inclusion(_grid_fn(P["f"], n), _grid_fn(P["g"], n), _coefficients(P), P.get("s", 1), P.get("samples", 10**5), _rng(P))


def _run_lp_minkowski(P):
    _need(P, "f", "g")
    n = P.get("resolution", 129)
    p, s = P.get("p", 2.0), P.get("s", 1.0)
    f, g = _grid_fn(P["f"], n), _grid_fn(P["g"], n)
    if P.get("f_scale") is not None:
        f = scale_fn(g, P["f_scale"], p, s)
    return harness.verify_lp_minkowski(f, g, p, s, P.get("epsilons", (0.1, 0.05, 0.025, 0.0125)), None, P.get("lambda_resolution", 1025))


def _run_lift_volume(P):
    _need(P, "f")
    n = P.get("resolution", 129)
    return harness.verify_lift_volume(_grid_fn(P["f"], n), P.get("s", 1), P.get("samples", 10**6), _rng(P))


TARGETS: dict[str, Callable[[dict], VerificationReport]] = {
    "bm": _run_bm,
    "pl": _run_pl,
    "bbl": _run_bbl,
    "lp_bm": _run_lp_bm,
    "functional_lp_bm": _run_functional_lp_bm,
    "sup_conv_concavity": _run_sup_conv_concavity,
    "lift_inclusion": _run_lift_inclusion,
    "lp_minkowski": _run_lp_minkowski,
    "lift_volume": _run_lift_volume,
}


# -- presets --------------------------------------------------------------------------------


@dataclass(frozen=True)
class Preset:
    name: str
    target: str
    description: str
    params: dict = field(default_factory=dict)


_PRESETS = [
    Preset("indicator-equal", "functional_lp_bm", "f = g = indicator[0,1], p=2, s=1: equality, h = sqrt2 on [0, sqrt2]",
           {"f": indicator(0, 1), "g": indicator(0, 1), "p": 2.0, "s": 1.0}),
    Preset("indicator-unequal", "functional_lp_bm", "f = indicator[0,1], g = indicator[0,2], p=2, s=1: strict inequality",
           {"f": indicator(0, 1), "g": indicator(0, 2), "p": 2.0, "s": 1.0}),
    Preset("tent-p1", "functional_lp_bm", "p = 1, mu = omega = 1/2, tents: the classical (1,1) sup-convolution case",
           {"f": tent(), "g": tent(0.5, 0.5), "p": 1.0, "s": 1.0, "mu": 0.5, "omega": 0.5}),
    Preset("segment-lp-bm", "lp_bm", "K = [0,1], L = [0,2]: L_p sum is [0, (1+2^p)^(1/p)], equality",
           {"K": DiscreteSet.interval(0, 1), "L": DiscreteSet.interval(0, 2), "p": 2.0, "lambda_resolution": 1001}),
    Preset("segment-bm", "bm", "K = [0,1], L = [0,3], lambda = 1/2: lhs = rhs = 2",
           {"K": DiscreteSet.interval(0, 1), "L": DiscreteSet.interval(0, 3), "lam": 0.5}),
    Preset("square-bm", "bm", "K = L = unit square, lambda = 1/2: equality",
           {"K": DiscreteSet.box_vertices([0, 0], [1, 1]), "L": DiscreteSet.box_vertices([0, 0], [1, 1]), "lam": 0.5}),
    Preset("gaussian-pl", "pl", "f = g = h = standard Gaussian on [-6,6], lambda = 1/2: equality",
           {"f": gaussian(), "g": gaussian(), "h": gaussian(), "lam": 0.5, "resolution": 1201}),
    Preset("indicator-pl", "pl", "f = g = h = indicator[0,1]: lhs = rhs = 1",
           {"f": indicator(0, 1), "g": indicator(0, 1), "h": indicator(0, 1), "lam": 0.5}),
    Preset("tent-bbl", "bbl", "alpha = 1, tents, minimal admissible h",
           {"f": tent(), "g": tent(), "lam": 0.5, "alpha": 1.0, "resolution": 129}),
    Preset("minkowski-equal", "lp_minkowski", "f = g = indicator[0,1], p=2, s=1: both sides 1",
           {"f": indicator(0, 1), "g": indicator(0, 1), "p": 2.0, "s": 1.0}),
    Preset("minkowski-scaled", "lp_minkowski", "f = 2 x_{2,1} g, g = indicator[0,1]: equality",
           {"f": indicator(0, 1), "g": indicator(0, 1), "f_scale": 2.0, "p": 2.0, "s": 1.0}),
    Preset("minkowski-unequal", "lp_minkowski", "f = indicator[0,1], g = indicator[0,3]: inequality",
           {"f": indicator(0, 1), "g": indicator(0, 3), "p": 2.0, "s": 1.0}),
    Preset("lift-interval", "lift_volume", "f = indicator[0,1], s = 1: volume 2",
           {"f": indicator(0, 1), "s": 1}),
    Preset("concavity-hull", "sup_conv_concavity", "tents with the convex hull of the L_2 curve",
           {"f": tent(), "g": tent(), "M": "lp_hull", "p": 2.0, "s": 1.0, "condition": "convex_M"}),
    Preset("concavity-two-point", "sup_conv_concavity", "indicators with M = {(1,0), (0,1)}, supports containing 0",
           {"f": indicator(0, 1), "g": indicator(0, 1), "M": "two_point", "s": 1.0, "condition": "origin_supports"}),
    Preset("lift-inclusion-indicator", "lift_inclusion", "f = g = indicator[0,1], s=1, L_2 curve: lift inclusion",
           {"f": indicator(0, 1), "g": indicator(0, 1), "M": "lp_curve", "p": 2.0, "s": 1, "lambda_resolution": 257}),
]

PRESETS: dict[str, Preset] = {p.name: p for p in _PRESETS}

#: Preset used when a target is given without one.
DEFAULT_PRESET = {
    "bm": "square-bm",
    "pl": "indicator-pl",
    "bbl": "tent-bbl",
    "lp_bm": "segment-lp-bm",
    "functional_lp_bm": "indicator-equal",
    "sup_conv_concavity": "concavity-hull",
    "lift_inclusion": "lift-inclusion-indicator",
    "lp_minkowski": "minkowski-equal",
    "lift_volume": "lift-interval",
}


def catalog() -> str:
    width = max(len(name) for name in PRESETS)
    tw = max(len(p.target) for p in _PRESETS)
    return "".join(f"{p.name:<{width}}  {p.target:<{tw}}  {p.description}\n" for p in _PRESETS)


def resolve(target: str | None, preset: str | None) -> tuple[str, dict]:
    """Target name and default parameters for a (target, preset) choice."""
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {preset!r}; see 'demo --list'")
        chosen = PRESETS[preset]
        if target is not None and target != chosen.target:
            raise ConfigurationError(f"preset {preset!r} is for target {chosen.target!r}, not {target!r}")
        return chosen.target, dict(chosen.params)
    if target is None:
        raise ConfigurationError("need --target or --preset")
    if target not in TARGETS:
        raise ConfigurationError(f"unknown verifier {target!r}; choose from {', '.join(TARGETS)}")
    return target, dict(PRESETS[DEFAULT_PRESET[target]].params)


def run_target(target: str, params: dict) -> VerificationReport:
    if target not in TARGETS:
        raise ConfigurationError(f"unknown verifier {target!r}; choose from {', '.join(TARGETS)}")
    return TARGETS[target](params)
