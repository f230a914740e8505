"""Verifiers for the Brunn-Minkowski family of inequalities.

Each verifier computes both sides of one inequality on concrete inputs
and returns a :class:`~lplab.report.VerificationReport`.  Discrete
sup-convolutions are lower bounds of the exact ones, so a verifier that
puts one on the left-hand side errs on the safe side: a pass implies the
exact inequality holds at least as strongly.

Tolerances follow one policy::

    tol = scale * (GRID_COEF * grid_spacing + LAMBDA_COEF * lambda_spacing)
          + 3 * propagated_stderr + FLOAT_RTOL * scale

with ``scale`` the magnitude of the compared quantities.  The
coefficients were fixed on the closed-form segment and indicator cases
and are recorded in every report's metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import DomainError
from .functions import (
    GridFunction,
    LiftedBody,
    Profile,
    alpha_mean,
    is_s_concave,
    lift_volume,
    scale_fn,
    sum_grid,
    sup_conv_m,
    sup_conv_p,
    sup_conv_witness,
)
from .numerics import Grid, RandomSource, kappa
from .report import (
    HYPOTHESIS_FAILED,
    NO_LIMIT,
    PRECONDITION_FAILED,
    VIOLATED,
    VerificationReport,
    digest_inputs,
    verdict_for,
)
from .sets import CoefficientSet, DiscreteSet, lp_pointwise_sum, m_add, volume_hull

GRID_COEF = 0.5
LAMBDA_COEF = 0.5
FLOAT_RTOL = 1e-12

#: Slack for "nondecreasing" comparisons between floating-point margins.
MONOTONE_SLACK = 1e-12


def _policy(**extra) -> dict:
    return {"grid_coef": GRID_COEF, "lambda_coef": LAMBDA_COEF, "float_rtol": FLOAT_RTOL, **extra}


def _tolerance(scale: float, grid_spacing: float = 0.0, lambda_spacing: float = 0.0, stderr: float = 0.0) -> float:
    scale = abs(scale)
    return scale * (GRID_COEF * grid_spacing + LAMBDA_COEF * lambda_spacing) + 3.0 * stderr + FLOAT_RTOL * max(scale, 1.0)


def _check_lambda(lam: float):
    if not 0 < lam < 1:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")


def _check_p(p: float):
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")


def _check_same_dim(*objs):
    dims = {o.dim for o in objs}
    if len(dims) != 1:
        raise DomainError(f"dimension mismatch: {sorted(dims)}")


def _check_nonempty(*fns: GridFunction):
    for fn in fns:
        if not fn.positive.any():
            raise DomainError("input function has empty support")


def _root_stderr(volume: float, stderr: float, exponent: float) -> float:
    """Delta-method stderr of ``volume ** exponent``."""
    if stderr == 0 or volume <= 0:
        return 0.0
    return abs(exponent) * volume ** (exponent - 1.0) * stderr


# -- set inequalities ---------------------------------------------------------------------


def verify_bm(K: DiscreteSet, L: DiscreteSet, lam: float, samples: int = 10**5, rng: RandomSource | None = None) -> VerificationReport:
    """Brunn-Minkowski for the hulls of two point clouds.

    ``lhs = V((1-lam) K + lam L)^(1/n)``, ``rhs = (1-lam) V(K)^(1/n) + lam V(L)^(1/n)``.
    """
    _check_lambda(lam)
    _check_same_dim(K, L)
    rng = rng or RandomSource(0)
    n = K.dim
    Kx, Lx = DiscreteSet(K.extreme_points()), DiscreteSet(L.extreme_points())
    combo = m_add(Kx, Lx, CoefficientSet.minkowski(lam))
    vC, eC = volume_hull(combo, samples, rng, (0,))
    vK, eK = volume_hull(Kx, samples, rng, (1,))
    vL, eL = volume_hull(Lx, samples, rng, (2,))
    lhs = vC ** (1.0 / n)
    rhs = (1 - lam) * vK ** (1.0 / n) + lam * vL ** (1.0 / n)
    stderr = math.sqrt(
        _root_stderr(vC, eC, 1.0 / n) ** 2 + ((1 - lam) * _root_stderr(vK, eK, 1.0 / n)) ** 2 + (lam * _root_stderr(vL, eL, 1.0 / n)) ** 2
    )
    tol = _tolerance(max(lhs, rhs), stderr=stderr)
    margin = lhs - rhs
    return VerificationReport(
        "brunn_minkowski",
        lhs,
        rhs,
        margin,
        tol,
        verdict_for(margin, tol),
        digest_inputs(K, L, lam=lam, samples=samples, seed=rng.seed),
        {"lambda": lam, "dim": n, "samples": samples, "seed": rng.seed, "volumes": [vC, vK, vL], "stderr": stderr, "tolerance_policy": _policy()},
    )


def verify_lp_bm(
    K: DiscreteSet,
    L: DiscreteSet,
    p: float,
    lambda_resolution: int = 1001,
    samples: int = 10**5,
    rng: RandomSource | None = None,
) -> VerificationReport:
    """L_p Brunn-Minkowski: ``V(K +_p L)^(p/n) >= V(K)^(p/n) + V(L)^(p/n)``.

    The left side is the volume of the hull of the pointwise L_p sum.  For
    convex inputs that is the L_p sum itself; for nonconvex samples it is
    an upper bound, which the report labels.
    """
    _check_p(p)
    _check_same_dim(K, L)
    rng = rng or RandomSource(0)
    n = K.dim
    # the hull of an M-sum only depends on the extreme points of the summands
    Kx, Lx = DiscreteSet(K.extreme_points()), DiscreteSet(L.extreme_points())
    S = lp_pointwise_sum(Kx, Lx, p, lambda_resolution)
    vS, eS = volume_hull(S, samples, rng, (0,))
    vK, eK = volume_hull(Kx, samples, rng, (1,))
    vL, eL = volume_hull(Lx, samples, rng, (2,))
    e = p / n
    lhs = vS**e
    rhs = vK**e + vL**e
    stderr = math.sqrt(_root_stderr(vS, eS, e) ** 2 + _root_stderr(vK, eK, e) ** 2 + _root_stderr(vL, eL, e) ** 2)
    dlam = 0.0 if p == 1 else 1.0 / (lambda_resolution - 1)
    tol = _tolerance(max(lhs, rhs), lambda_spacing=dlam, stderr=stderr)
    margin = lhs - rhs
    return VerificationReport(
        "lp_brunn_minkowski",
        lhs,
        rhs,
        margin,
        tol,
        verdict_for(margin, tol),
        digest_inputs(K, L, p=p, lambda_resolution=lambda_resolution, samples=samples, seed=rng.seed),
        {
            "p": p,
            "dim": n,
            "lambda_resolution": lambda_resolution,
            "samples": samples,
            "seed": rng.seed,
            "lhs_kind": "hull upper bound (exact for convex inputs)",
            "volumes": [vS, vK, vL],
            "stderr": stderr,
            "tolerance_policy": _policy(),
        },
    )


# -- functional inequalities --------------------------------------------------------------


class HypothesisCheck(NamedTuple):
    holds: bool
    worst_violation: float
    tolerance: float
    pairs_checked: int


def check_pointwise_hypothesis(f: GridFunction, g: GridFunction, h: GridFunction, lam: float, alpha: float) -> HypothesisCheck:
    """Test ``h((1-lam) x + lam y) >= M_alpha(f(x), g(y), lam)`` for all x, y.

    Grid functions are their piecewise multilinear interpolants, so it is
    enough that h dominates the smallest admissible function at h's own
    nodes: interpolation is monotone and carries the bound in between.
    The smallest function is ``minimal_mean_h`` on h's grid, a sup over the
    nodes of f; only float round-off is tolerated.
    """
    env = minimal_mean_h(f, g, lam, alpha, out_grid=h.grid)
    worst = float(np.max(env.values - h.values))
    tol = FLOAT_RTOL * max(float(env.values.max(initial=0.0)), 1.0)
    return HypothesisCheck(worst <= tol, worst, tol, h.grid.size * len(f.support_nodes()[0]))


def _functional_report(name, lhs, rhs, tol, hyp: HypothesisCheck, digest, metadata) -> VerificationReport:
    margin = lhs - rhs
    verdict = verdict_for(margin, tol) if hyp.holds else HYPOTHESIS_FAILED
    metadata = dict(metadata)
    metadata["hypothesis"] = {
        "holds": hyp.holds,
        "worst_violation": hyp.worst_violation,
        "tolerance": hyp.tolerance,
        "pairs_checked": hyp.pairs_checked,
    }
    return VerificationReport(name, lhs, rhs, margin, tol, verdict, digest, metadata)


def verify_pl(f: GridFunction, g: GridFunction, h: GridFunction, lam: float) -> VerificationReport:
    """Prékopa-Leindler: ``int h >= (int f)^(1-lam) (int g)^lam``.

    The pointwise hypothesis is checked first; if it fails the verdict is
    ``hypothesis_failed`` regardless of the integrals.
    """
    _check_lambda(lam)
    _check_same_dim(f, g, h)
    _check_nonempty(f, g)
    hyp = check_pointwise_hypothesis(f, g, h, lam, 0.0)
    If, Ig = f.integral(), g.integral()
    lhs = h.integral()
    rhs = If ** (1.0 - lam) * Ig**lam
    spacing = max(f.grid.max_spacing, g.grid.max_spacing, h.grid.max_spacing)
    tol = _tolerance(max(lhs, rhs), grid_spacing=spacing)
    return _functional_report(
        "prekopa_leindler",
        lhs,
        rhs,
        tol,
        hyp,
        digest_inputs(f, g, h, lam=lam),
        {"lambda": lam, "integrals": [If, Ig], "tolerance_policy": _policy()},
    )


def bbl_index(alpha: float, n: int) -> float:
    """Mean index ``alpha / (n alpha + 1)`` with its limiting conventions."""
    if alpha == math.inf:
        return 1.0 / n
    if math.isclose(alpha, -1.0 / n, rel_tol=0.0, abs_tol=1e-15):
        return -math.inf
    if alpha == 0:
        return 0.0
    return alpha / (n * alpha + 1.0)


def verify_bbl(f: GridFunction, g: GridFunction, h: GridFunction, lam: float, alpha: float) -> VerificationReport:
    """Borell-Brascamp-Lieb: ``int h >= M_{alpha/(n alpha+1)}(int f, int g, lam)``.

    Requires ``alpha >= -1/n``.  At ``alpha = -1/n`` the index is taken as
    ``-inf`` by continuity, which the report flags.
    """
    _check_lambda(lam)
    _check_same_dim(f, g, h)
    _check_nonempty(f, g)
    n = f.dim
    if alpha < -1.0 / n and not math.isclose(alpha, -1.0 / n, rel_tol=0.0, abs_tol=1e-15):
        raise DomainError(f"alpha must be >= -1/n = {-1.0 / n}, got {alpha}")
    index = bbl_index(alpha, n)
    hyp = check_pointwise_hypothesis(f, g, h, lam, alpha)
    If, Ig = f.integral(), g.integral()
    lhs = h.integral()
    rhs = alpha_mean(If, Ig, lam, index)
    spacing = max(f.grid.max_spacing, g.grid.max_spacing, h.grid.max_spacing)
    tol = _tolerance(max(lhs, rhs), grid_spacing=spacing)
    meta = {"lambda": lam, "alpha": alpha, "mean_index": index, "integrals": [If, Ig], "tolerance_policy": _policy()}
    if index == -math.inf:
        meta["boundary_convention"] = "alpha = -1/n: mean index taken as -inf (limit)"
    return _functional_report("borell_brascamp_lieb", lhs, rhs, tol, hyp, digest_inputs(f, g, h, lam=lam, alpha=alpha), meta)


def minimal_mean_h(f: GridFunction, g: GridFunction, lam: float, alpha: float, out_grid: Grid | None = None) -> GridFunction:
    """Smallest grid function meeting the BBL hypothesis, up to discretisation.

    ``h(w) = sup {M_alpha(f(x), g(y), lam) : w = (1-lam) x + lam y}`` with x
    running over support nodes of f and y solved exactly (g interpolated).
    """
    _check_lambda(lam)
    M = CoefficientSet.minkowski(lam)
    if out_grid is None:
        out_grid = sum_grid(f, g, M)
    xf, mf = f.support_nodes()
    vf = f.values.ravel()[mf]
    W = out_grid.nodes()
    best = np.zeros(len(W))
    for i0 in range(0, len(xf), 256):
        x, fx = xf[i0:i0 + 256], vf[i0:i0 + 256]
        y = (W[:, None, :] - (1 - lam) * x[None, :, :]) / lam
        gy = g(y.reshape(-1, f.dim)).reshape(len(W), len(x))
        best = np.maximum(best, np.max(alpha_mean(np.broadcast_to(fx, gy.shape), gy, lam, alpha), axis=1))
    return GridFunction(out_grid, best.reshape(out_grid.shape))


# -- the L_p Prékopa-Leindler type inequality ---------------------------------------------------

FunctionLike = Union[GridFunction, Profile]


def _normalise_resolutions(resolutions) -> tuple:
    out = []
    for r in resolutions:
        if isinstance(r, (tuple, list)):
            points, lam_res = int(r[0]), int(r[1])
        else:
            points, lam_res = int(r), 2 * int(r) - 1
        if points < 2 or lam_res < 2:
            raise DomainError(f"invalid resolution {r}")
        out.append((points, lam_res))
    if not out:
        raise DomainError("at least one resolution is required")
    return tuple(out)


@dataclass
class FunctionalLpConfig:
    """Inputs of the L_p Prékopa-Leindler type inequality.

    ``f`` and ``g`` are grid functions (used as given at every resolution)
    or profiles (re-sampled at each resolution).  ``resolutions`` lists
    ``(grid points, lambda resolution)`` pairs; a bare integer ``r`` means
    ``(r, 2r - 1)``.
    """

    f: FunctionLike
    g: FunctionLike
    p: float = 2.0
    s: float = 1.0
    mu: float = 1.0
    omega: float = 1.0
    resolutions: Sequence = (65, 129, 257)

    def __post_init__(self):
        _check_p(self.p)
        for name in ("s", "mu", "omega"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        self.resolutions = _normalise_resolutions(self.resolutions)
        for fn in self.sampled(self.resolutions[0][0]):
            _check_nonempty(fn)

    def sampled(self, points: int) -> tuple[GridFunction, GridFunction]:
        return tuple(fn.sample(points) if isinstance(fn, Profile) else fn for fn in (self.f, self.g))

    @property
    def exponent(self) -> float:
        f0 = self.sampled(self.resolutions[0][0])[0]
        return self.p / (f0.dim + self.s)


def construct_functional_sum(cfg: FunctionalLpConfig, out_grid: Grid | None = None, resolution=None) -> GridFunction:
    """``[mu x_{p,s} f] (+)_{p,s} [omega x_{p,s} g]``: the smallest admissible h.

    ``resolution`` is a ``(grid points, lambda resolution)`` pair; the
    finest configured one by default.
    """
    points, lam_res = resolution if resolution is not None else cfg.resolutions[-1]
    f, g = cfg.sampled(points)
    fs = scale_fn(f, cfg.mu, cfg.p, cfg.s)
    gs = scale_fn(g, cfg.omega, cfg.p, cfg.s)
    if out_grid is None:
        out_grid = sum_grid(fs, gs, CoefficientSet.lp_curve(cfg.p, lam_res), points)
    return sup_conv_p(fs, gs, cfg.p, cfg.s, lam_res, out_grid)


def verify_functional_lp_bm(cfg: FunctionalLpConfig, out_grid: Grid | None = None) -> VerificationReport:
    """``(int h)^(p/(n+s)) >= mu (int f)^(p/(n+s)) + omega (int g)^(p/(n+s))``.

    h is the discrete minimal function from :func:`construct_functional_sum`,
    which sits below the exact one, so the margin approaches its limit
    from below under refinement.  Every configured resolution is run and
    recorded; the verdict uses the finest.
    """
    sweep = []
    h = None
    for points, lam_res in cfg.resolutions:
        f, g = cfg.sampled(points)
        h = construct_functional_sum(cfg, out_grid, (points, lam_res))
        e = cfg.p / (f.dim + cfg.s)
        If, Ig, Ih = f.integral(), g.integral(), h.integral()
        lhs = Ih**e
        rhs = cfg.mu * If**e + cfg.omega * Ig**e
        dlam = 0.0 if cfg.p == 1 else 1.0 / (lam_res - 1)
        tol = _tolerance(max(lhs, rhs), grid_spacing=h.grid.max_spacing, lambda_spacing=dlam)
        sweep.append(
            {"points": points, "lambda_resolution": lam_res, "lhs": lhs, "rhs": rhs, "margin": lhs - rhs, "tolerance": tol, "integrals": [If, Ig, Ih]}
        )
    margins = [row["margin"] for row in sweep]
    last = sweep[-1]
    f, g = cfg.sampled(cfg.resolutions[-1][0])
    report = VerificationReport(
        "lp_prekopa_leindler",
        last["lhs"],
        last["rhs"],
        last["margin"],
        last["tolerance"],
        verdict_for(last["margin"], last["tolerance"]),
        digest_inputs(f, g, p=cfg.p, s=cfg.s, mu=cfg.mu, omega=cfg.omega, resolutions=cfg.resolutions),
        {
            "p": cfg.p,
            "s": cfg.s,
            "mu": cfg.mu,
            "omega": cfg.omega,
            "exponent": cfg.p / (f.dim + cfg.s),
            "sweep": sweep,
            "margins_nondecreasing": all(b >= a - MONOTONE_SLACK for a, b in zip(margins, margins[1:])),
            "lhs_note": "discrete h is a pointwise lower bound of the exact minimal h",
            "tolerance_policy": _policy(),
        },
    )
    report.artifacts["h"] = h
    return report


# -- sup-convolution concavity and lift inclusion ---------------------------------


def check_sup_conv_concavity(
    f: GridFunction,
    g: GridFunction,
    M: CoefficientSet,
    s: float,
    condition: str,
    tolerance: float | None = None,
    convexity_tol: float = 0.05,
) -> VerificationReport:
    """s-concavity of ``f (+)_{M,s} g`` under ``condition``.

    ``condition`` is ``"convex_M"`` (M's samples fill their hull to within
    ``convexity_tol``) or ``"origin_supports"`` (both supports contain the
    origin).  The report's margin is minus the worst concavity violation
    of the sup-convolution's root; the default tolerance is two output
    grid spacings.
    """
    if condition not in ("convex_M", "origin_supports"):
        raise DomainError(f"unknown condition {condition!r}")
    _check_same_dim(f, g)
    digest = digest_inputs(f, g, M, s=s, condition=condition)
    failures = []
    for name, fn in (("f", f), ("g", g)):
        if not fn.positive.any():
            failures.append(f"{name} has empty support")
            continue
        res = is_s_concave(fn, s, tol=1e-9 * max(1.0, float(fn.root(s).max())))
        if not res.concave:
            failures.append(f"{name} is not s-concave (support convex: {res.support_convex}, worst violation {res.worst_violation:.3g})")
    meta = {"condition": condition, "s": s, "pairs": len(M)}
    if condition == "convex_M":
        gap = M.convexity_gap()
        meta["convexity_gap"] = gap
        if gap > convexity_tol:
            failures.append(f"M is not convex to tolerance {convexity_tol} (gap {gap:.3g})")
    elif not failures:
        origin = np.zeros((1, f.dim))
        if not (f.in_support(origin)[0] and g.in_support(origin)[0]):
            failures.append("supports do not both contain the origin")
    if failures:
        meta["precondition_failures"] = failures
        return VerificationReport("sup_conv_s_concavity", math.nan, 0.0, math.nan, 0.0, PRECONDITION_FAILED, digest, meta)

    H = sup_conv_m(f, g, M, s)
    tol = 2.0 * H.grid.max_spacing if tolerance is None else tolerance
    res = is_s_concave(H, s, tol=tol)
    meta.update({"support_convex": res.support_convex, "worst_violation": res.worst_violation, "output_spacing": H.grid.max_spacing})
    margin = -res.worst_violation
    verdict = verdict_for(margin, tol) if res.support_convex else VIOLATED
    report = VerificationReport("sup_conv_s_concavity", margin, 0.0, margin, tol, verdict, digest, meta)
    report.artifacts["h"] = H
    return report


def check_lift_inclusion(
    f: GridFunction,
    g: GridFunction,
    M: CoefficientSet,
    s: int,
    n_samples: int = 10**5,
    rng: RandomSource | None = None,
    reverse_samples: int = 500,
) -> VerificationReport:
    """Lift inclusion for ``K_f (+)_M K_g`` inside the lift of ``f (+)_{M,s} g``.

    Forward: ``n_samples`` M-combinations of uniform lift points must be
    members of the sup-convolution's lift (one output spacing of slack);
    the report's lhs is the member fraction.  Reverse: interior points of
    the sup-convolution's lift are rebuilt as M-combinations of lift
    points; the failure fraction is recorded but does not gate the verdict.
    """
    s_int = LiftedBody(f, s).s
    rng = rng or RandomSource(0)
    H = sup_conv_m(f, g, M, s_int)
    Lf, Lg, LH = LiftedBody(f, s_int), LiftedBody(g, s_int), LiftedBody(H, s_int)
    spacing = H.grid.max_spacing

    gen = rng.generator(0)
    pf = Lf.sample(n_samples, gen)
    pg = Lg.sample(n_samples, gen)
    idx = gen.integers(0, len(M), n_samples)
    a, b = M.pairs[idx, 0][:, None], M.pairs[idx, 1][:, None]
    combos = a * pf + b * pg
    member = LH.contains(combos, tol=spacing)
    failures = int(np.count_nonzero(~member))

    meta = {"s": s_int, "samples": n_samples, "seed": rng.seed, "forward_failures": failures, "tolerance_spacing": spacing, "pairs": len(M)}
    if reverse_samples and LH.radius > 0:
        meta.update(_reverse_inclusion(f, g, M, s_int, H, LH, reverse_samples, rng.generator(1)))
    else:
        meta["reverse_checked"] = 0

    lhs = 1.0 - failures / n_samples
    report = VerificationReport(
        "lift_inclusion",
        lhs,
        1.0,
        lhs - 1.0,
        0.0,
        verdict_for(lhs - 1.0, 0.0),
        digest_inputs(f, g, M, s=s_int, samples=n_samples, seed=rng.seed),
        meta,
    )
    report.artifacts["h"] = H
    return report


def _reverse_inclusion(f, g, M, s, H, LH, count, gen) -> dict:
    n = f.dim
    pts = LH.sample(count, gen)
    z, zp = pts[:, :n], 0.95 * pts[:, n:]
    # keep base points at least one spacing inside the support
    inner = np.ones(len(z), dtype=bool)
    for axis in range(n):
        for sign in (-1.0, 1.0):
            shifted = z.copy()
            shifted[:, axis] += sign * H.grid.spacing[axis]
            inner &= H.in_support(shifted)
    z, zp = z[inner], zp[inner]
    if len(z) == 0:
        return {"reverse_checked": 0}
    w = sup_conv_witness(f, g, M, s, z)
    S = w.root_value
    zn = np.linalg.norm(zp, axis=1)
    ok = np.isfinite(S) & (S > zn)
    Sx = np.where(ok, S, 1.0)
    rf, okf = f.root_at(np.nan_to_num(w.x), s)
    rg, okg = g.root_at(np.nan_to_num(w.y), s)
    xp = (rf / Sx)[:, None] * zp
    yp = (rg / Sx)[:, None] * zp
    rebuilt = w.a[:, None] * np.hstack([w.x, xp]) + w.b[:, None] * np.hstack([w.y, yp])
    scale = max(1.0, float(np.max(np.abs(pts))))
    ok &= np.all(np.abs(rebuilt - np.hstack([z, zp])) <= 1e-9 * scale, axis=1)
    ok &= (okf | (w.a == 0)) & (okg | (w.b == 0))
    return {"reverse_checked": int(len(z)), "reverse_failure_fraction": float(np.count_nonzero(~ok)) / len(z)}


# -- lift volume -------------------------------------------------------------------------


def verify_lift_volume(f: GridFunction, s: int, samples: int = 10**6, rng: RandomSource | None = None) -> VerificationReport:
    """Monte Carlo volume of the lift against ``kappa_s * int f`` (two-sided, 3 stderr)."""
    rng = rng or RandomSource(0)
    L = LiftedBody(f, s)
    est, err = lift_volume(L, samples, rng)
    rhs = kappa(L.s) * f.integral()
    tol = 3.0 * err + FLOAT_RTOL * max(rhs, 1.0)
    margin = est - rhs
    return VerificationReport(
        "lift_volume",
        est,
        rhs,
        margin,
        tol,
        verdict_for(margin, tol, two_sided=True),
        digest_inputs(f, s=L.s, samples=samples, seed=rng.seed),
        {"s": L.s, "samples": samples, "seed": rng.seed, "stderr": err, "kappa": kappa(L.s), "integral": f.integral()},
    )


# -- functional L_p Minkowski ---------------------------------------------------------------------


class STildeResult(NamedTuple):
    estimate: float
    table: list
    monotone: bool


def s_tilde(
    f: GridFunction,
    g: GridFunction,
    p: float,
    s: float,
    epsilons: Sequence[float] = (0.1, 0.05, 0.025, 0.0125),
    out_grid: Grid | None = None,
    lambda_resolution: int = 1025,
    monotone_rtol: float = 1e-3,
) -> STildeResult:
    """First variation ``(p/(n+s)) lim (int[f (+)_{p,s} (eps x_{p,s} g)] - int f) / eps``.

    Difference quotients are computed at each ``eps`` and the last two are
    Richardson-extrapolated to ``eps -> 0`` (assuming linear dependence on
    eps).  ``monotone`` is False when the quotients change direction by
    more than ``monotone_rtol`` relative to their size.
    """
    _check_p(p)
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    eps = [float(e) for e in epsilons]
    if len(eps) < 3:
        raise DomainError("s_tilde needs at least three epsilons")
    if any(not 0 < e <= 1 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError(f"epsilons must be strictly decreasing in (0, 1], got {eps}")
    _check_same_dim(f, g)
    _check_nonempty(f, g)
    c = p / (f.dim + s)
    If = f.integral()
    table = []
    for e in eps:
        h = sup_conv_p(f, scale_fn(g, e, p, s), p, s, lambda_resolution, out_grid)
        Ih = h.integral()
        table.append({"epsilon": e, "integral": Ih, "quotient": c * (Ih - If) / e})
    q = np.array([row["quotient"] for row in table])
    steps = np.diff(q)
    slack = monotone_rtol * max(1.0, float(np.max(np.abs(q))))
    monotone = bool(np.all(steps >= -slack) or np.all(steps <= slack))
    e1, e2 = eps[-2], eps[-1]
    q1, q2 = q[-2], q[-1]
    estimate = float(q2 - (q1 - q2) * e2 / (e1 - e2))
    return STildeResult(estimate, table, monotone)


def homothety_factor(f: GridFunction, g: GridFunction, p: float, s: float, rtol: float = 1e-9) -> float | None:
    """``lam`` with ``f == lam x_{p,s} g`` node for node, or None."""
    if f.grid.shape != g.grid.shape:
        return None
    flo, fhi = f.box.lo_array, f.box.hi_array
    glo, ghi = g.box.lo_array, g.box.hi_array
    ratio = (fhi - flo) / (ghi - glo)
    r = float(ratio[0])
    if not np.allclose(ratio, r, rtol=rtol) or not np.allclose(flo, r * glo, rtol=rtol, atol=rtol) or not np.allclose(fhi, r * ghi, rtol=rtol, atol=rtol):
        return None
    lam = r**p
    if not np.allclose(f.values, lam ** (s / p) * g.values, rtol=rtol, atol=rtol * float(f.values.max())):
        return None
    return lam


def verify_lp_minkowski(
    f: GridFunction,
    g: GridFunction,
    p: float,
    s: float,
    epsilons: Sequence[float] = (0.1, 0.05, 0.025, 0.0125),
    out_grid: Grid | None = None,
    lambda_resolution: int = 1025,
    tolerance: float = 1e-2,
) -> VerificationReport:
    """Functional L_p Minkowski: ``S~_{p,s}(f; g) >= (int f)^(1-p/(n+s)) (int g)^(p/(n+s))``.

    When f is a ``x_{p,s}`` multiple of an s-concave g whose support has
    interior and contains the origin (s integer), equality is expected and
    the check becomes two-sided.
    """
    st = s_tilde(f, g, p, s, epsilons, out_grid, lambda_resolution)
    c = p / (f.dim + s)
    If, Ig = f.integral(), g.integral()
    rhs = If ** (1.0 - c) * Ig**c
    lhs = st.estimate
    margin = lhs - rhs

    lam = homothety_factor(f, g, p, s)
    equality = False
    if lam is not None and float(s).is_integer():
        origin = np.zeros((1, g.dim))
        interior = all(k >= 3 for k in g.grid.shape) and g.positive.sum() > 1
        equality = bool(g.in_support(origin)[0] and interior and is_s_concave(g, s).concave)
    if not st.monotone:
        verdict = NO_LIMIT
    else:
        verdict = verdict_for(margin, tolerance, two_sided=equality)
    meta = {
        "p": p,
        "s": s,
        "epsilons": list(epsilons),
        "lambda_resolution": lambda_resolution,
        "table": st.table,
        "monotone": st.monotone,
        "equality_case": equality,
        "integrals": [If, Ig],
    }
    if lam is not None:
        meta["homothety_factor"] = lam
        meta["closed_form"] = lam ** ((f.dim + s) / p - 1.0) * Ig
    return VerificationReport(
        "functional_lp_minkowski",
        lhs,
        rhs,
        margin,
        tolerance,
        verdict,
        digest_inputs(f, g, p=p, s=s, epsilons=list(epsilons), lambda_resolution=lambda_resolution),
        meta,
    )
