"""The ten acceptance criteria, each at its stated tolerance.

Every test prints one ``ACCEPTANCE n: PASS|FAIL`` line (also collected in
the terminal summary).  Criteria that cannot be met are left failing;
see the README for the analysis.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, indicator_fn
from lplab.functions import GridFunction, alpha_mean, scale_fn
from lplab.harness import (
    FunctionalLpConfig,
    check_sup_conv_concavity,
    check_lift_inclusion,
    minimal_mean_h,
    verify_bbl,
    verify_lift_volume,
    verify_lp_bm,
    verify_lp_minkowski,
    verify_pl,
    verify_functional_lp_bm,
)
from lplab.numerics import Box, Grid, RandomSource
from lplab.presets import indicator
from lplab.sets import CoefficientSet, DiscreteSet


def record(number: int, ok: bool, detail: str) -> bool:
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_1_lift_volume():
    f = indicator_fn(0, 1, 129)
    details, ok = [], True
    for s, expected in ((1, 2.0), (2, math.pi)):
        start = time.perf_counter()
        r = verify_lift_volume(f, s, samples=10**6, rng=RandomSource(0))
        elapsed = time.perf_counter() - start
        stderr = r.metadata["stderr"]
        good = (
            r.rhs == pytest.approx(expected, rel=1e-12)
            and abs(r.lhs - r.rhs) <= 3 * stderr + 1e-12 * expected
            and elapsed < 10
        )
        ok &= good
        details.append(f"s={s}: {r.lhs:.5f} vs {r.rhs:.5f} (3 stderr {3 * stderr:.1e}, {elapsed:.1f}s)")
    assert record(1, ok, "; ".join(details))


def test_criterion_2_equality_case():
    start = time.perf_counter()
    r = verify_functional_lp_bm(FunctionalLpConfig(indicator(0, 1), indicator(0, 1), p=2.0, s=1.0, mu=1.0, omega=1.0, resolutions=(65, 129, 257)))
    elapsed = time.perf_counter() - start
    sweep = r.metadata["sweep"]
    lam_res = [row["lambda_resolution"] for row in sweep]
    margins = [row["margin"] for row in sweep]
    ok = (
        lam_res == [129, 257, 513]
        and r.metadata["margins_nondecreasing"]
        and abs(r.margin) <= 5e-3
        and abs(r.lhs - 2.0) <= 5e-3
        and elapsed < 30
    )
    assert record(2, ok, f"margins {margins}, lhs {r.lhs:.12f}, {elapsed:.1f}s")


def test_criterion_3_segment_lp_bm():
    K, L = DiscreteSet.interval(0, 1), DiscreteSet.interval(0, 2)
    details, ok = [], True
    for p in (1.0, 1.5, 2.0, 3.0):
        r = verify_lp_bm(K, L, p, lambda_resolution=1000)
        target = 1 + 2**p
        good = abs(r.lhs - target) <= 1e-3 and abs(r.rhs - target) <= 1e-3
        if p == 1.0:
            good &= r.lhs == r.rhs == 3.0
        ok &= good
        details.append(f"p={p}: lhs {r.lhs:.7f}, rhs {r.rhs:.7f}")
    assert record(3, ok, "; ".join(details))


def test_criterion_4_indicator_reduction():
    set_lhs = verify_lp_bm(DiscreteSet.interval(0, 1), DiscreteSet.interval(0, 2), 2.0, lambda_resolution=1000).lhs
    lhs = []
    for s in (1.0, 0.5, 0.25):
        r = verify_functional_lp_bm(FunctionalLpConfig(indicator(0, 1), indicator(0, 2), p=2.0, s=s))
        lhs.append(r.lhs)
    gaps = [abs(v - set_lhs) for v in lhs]
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = monotone and gaps[-1] <= 1e-2
    detail = f"set-level lhs {set_lhs:.6f}; functional lhs at s=1,0.5,0.25: {[round(v, 6) for v in lhs]}; final gap {gaps[-1]:.4f}"
    assert record(4, ok, detail)


def _random_nonneg(gen, points):
    vals = gen.random(points) * 3
    vals[gen.random(points) < 0.2] = 0.0
    if not vals.any():
        vals[points // 2] = 1.0
    return vals


def test_criterion_5_bbl_pl_reduction():
    gen = RandomSource(2024).generator()
    mismatches, verdicts = [], []
    for i in range(20):
        points = int(gen.integers(9, 66))
        grid = Grid(Box((-1.0,), (1.0,)), points)
        f = GridFunction(grid, _random_nonneg(gen, points))
        g = GridFunction(grid, _random_nonneg(gen, points))
        lam = float(gen.uniform(0.05, 0.95))
        if i % 2:
            h = GridFunction(grid.scaled(1.5), _random_nonneg(gen, points))
        else:
            h = minimal_mean_h(f, g, lam, 0.0)
        a, b = verify_pl(f, g, h, lam), verify_bbl(f, g, h, lam, 0.0)
        verdicts.append(a.verdict)
        if abs(a.lhs - b.lhs) > 1e-12 or abs(a.rhs - b.rhs) > 1e-12 or a.verdict != b.verdict:
            mismatches.append(i)
    kinds = {v: verdicts.count(v) for v in sorted(set(verdicts))}
    assert record(5, not mismatches, f"20 triples, mismatches {mismatches}, verdicts {kinds}")


def test_criterion_6_lift_inclusion():
    f = indicator_fn(0, 1, 129)
    r = check_lift_inclusion(f, f, CoefficientSet.lp_curve(2.0, 257), 1, n_samples=10**5, rng=RandomSource(0))
    failures = r.metadata["forward_failures"]
    assert record(6, failures == 0 and r.metadata["samples"] == 10**5, f"{failures} failures in {r.metadata['samples']} samples")


def _random_s_concave(gen, s, points=65):
    """height * phi**s for a concave phi >= 0 on an interval containing 0."""
    lo, hi = -float(gen.uniform(0.1, 1.0)), float(gen.uniform(0.1, 1.0))
    kind = ("tent", "parabola", "indicator")[int(gen.integers(3))]
    height = float(gen.uniform(0.2, 2.0))
    c, w = (lo + hi) / 2, (hi - lo) / 2

    def base(x):
        t = (x[:, 0] - c) / w
        if kind == "tent":
            return np.maximum(0.0, 1.0 - np.abs(t))
        if kind == "parabola":
            return np.maximum(0.0, 1.0 - t**2)
        return np.ones(len(x))

    return GridFunction.sample(lambda x: height * base(x) ** s, Box((lo,), (hi,)), points), kind


def test_criterion_7_s_concavity_suite():
    gen = RandomSource(7).generator()
    hull = CoefficientSet.lp_curve(2.0, 65).convex_hull()
    two_point = CoefficientSet.explicit([[1.0, 0.0], [0.0, 1.0]])
    hull_pass, two_pass, notes = 0, 0, []
    for i in range(10):
        s = float((0.5, 1.0, 2.0)[int(gen.integers(3))])
        f, kind_f = _random_s_concave(gen, s)
        g, kind_g = _random_s_concave(gen, s)
        a = check_sup_conv_concavity(f, g, hull, s, "convex_M")
        b = check_sup_conv_concavity(f, g, two_point, s, "origin_supports")
        hull_pass += a.passed and a.metadata["worst_violation"] <= 2 * a.artifacts["h"].grid.max_spacing
        two_pass += b.passed
        if not b.passed:
            notes.append(f"#{i} {kind_f}/{kind_g} s={s}: worst {b.metadata.get('worst_violation', float('nan')):.3f}")
    ok = hull_pass == 10 and two_pass == 10
    detail = f"convex-hull M {hull_pass}/10, two-point M {two_pass}/10"
    if notes:
        detail += " (two-point failures: " + "; ".join(notes[:3]) + (" ..." if len(notes) > 3 else "") + ")"
    assert record(7, ok, detail)


def test_criterion_8_minkowski_equality():
    g = indicator_fn(0, 1, 129)
    details, ok = [], True
    for lam, p, s in ((1.0, 2.0, 1.0), (2.0, 2.0, 1.0), (0.5, 3.0, 1.0)):
        f = scale_fn(g, lam, p, s)
        r = verify_lp_minkowski(f, g, p, s, epsilons=(0.1, 0.05, 0.025, 0.0125))
        closed = lam ** ((1 + s) / p - 1) * g.integral()
        good = abs(r.lhs - closed) <= 1e-2 and abs(r.lhs - r.rhs) <= 1e-2
        ok &= good
        details.append(f"(lam,p,s)=({lam},{p},{s}): s_tilde {r.lhs:.5f}, closed {closed:.5f}, rhs {r.rhs:.5f}")
    assert record(8, ok, "; ".join(details))


def test_criterion_9_power_mean_monotone():
    gen = RandomSource(9).generator()
    n = 10**4
    a = 10 ** gen.uniform(-3, 3, n)
    b = 10 ** gen.uniform(-3, 3, n)
    lam = gen.uniform(0.001, 0.999, n)
    alphas = [-math.inf, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, math.inf]
    means = np.stack([alpha_mean(a, b, lam, al) for al in alphas], axis=1)
    worst = float(np.max(means[:, :-1] - means[:, 1:]))
    assert record(9, worst <= 1e-12, f"{n} triples x {len(alphas)} orders, worst decrease {worst:.2e}")


def _cli_json(args, path):
    subprocess.run([sys.executable, "-m", "lplab", "verify", *args, "--output", str(path)], check=False)
    return path.read_bytes()


def test_criterion_10_determinism(tmp_path):
    runs = [
        ["--preset", "lift-interval", "--s", "2", "--samples", "200000", "--seed", "31"],
        ["--preset", "lift-inclusion-indicator", "--samples", "20000", "--seed", "31"],
        ["--preset", "indicator-unequal", "--resolutions", "33,65", "--seed", "31"],
    ]
    same = []
    for k, args in enumerate(runs):
        first = _cli_json(args, tmp_path / f"{k}a.json")
        second = _cli_json(args, tmp_path / f"{k}b.json")
        same.append(first == second and len(first) > 0)
    assert record(10, all(same), f"byte-identical reports for {sum(same)}/{len(runs)} presets")
