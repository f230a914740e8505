"""Function-level calculus for s-concave functions on uniform grids.

A ``GridFunction`` stores nonnegative node values; off-node values come
from multilinear interpolation.  Wherever s-th roots matter (concavity
checks, sup-convolutions, lifts) the *root* ``f^(1/s)`` is interpolated,
so for s-concave inputs every interpolated value is a lower bound of the
underlying function.  Discrete sup-convolutions are therefore pointwise
lower bounds of the exact ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigurationError, DomainError
from .numerics import (
    BOX_RTOL,
    Box,
    Grid,
    RandomSource,
    integrate_grid,
    interpolate,
    mc_volume,
    nearest_node_index,
)
from .sets import CoefficientSet

_BATCH_ELEMENTS = 1 << 21


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nonnegative function sampled at the nodes of a uniform grid."""

    grid: Grid
    values: np.ndarray
    s: float | None = None
    _roots: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size != self.grid.size:
            raise ConfigurationError(f"{values.size} values do not fit grid of shape {self.grid.shape}")
        values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise DomainError("grid function values must be finite")
        if np.any(values < 0):
            raise DomainError("grid function values must be nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, func: Callable[[np.ndarray], np.ndarray], box: Box, points) -> "GridFunction":
        grid = Grid(box, points)
        return cls(grid, np.asarray(func(grid.nodes()), dtype=float).reshape(grid.shape))

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def box(self) -> Box:
        return self.grid.box

    def integral(self) -> float:
        return integrate_grid(self)

    def root(self, s: float) -> np.ndarray:
        """Node values of ``f^(1/s)``."""
        s = float(s)
        if s not in self._roots:
            self._roots[s] = self.values ** (1.0 / s)
        return self._roots[s]

    def __call__(self, points) -> np.ndarray:
        """Interpolated values, zero outside the box."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return np.where(self.box.contains(pts), interpolate(self.grid, self.values, pts), 0.0)

    def root_at(self, points, s: float) -> tuple[np.ndarray, np.ndarray]:
        """Interpolated root ``f^(1/s)`` and support membership at ``points``.

        A point is in the support if it lies in the box and either the
        interpolated root is positive or its nearest node is positive
        (a half-spacing dilation standing in for the closure).
        """
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        root = self.root(s)
        r = interpolate(self.grid, root, pts)
        inside = self.box.contains(pts)
        near = root[nearest_node_index(self.grid, pts)] > 0
        support = inside & ((r > 0) | near)
        return np.where(inside, r, 0.0), support

    def in_support(self, points) -> np.ndarray:
        return self.root_at(points, 1.0)[1]

    @property
    def positive(self) -> np.ndarray:
        return self.values > 0

    def support_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates of nodes with positive value, and the flat mask."""
        mask = self.positive.ravel()
        return self.grid.nodes()[mask], mask

    def support_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounding box ``(lo, hi)`` of the positive nodes."""
        nodes, _ = self.support_nodes()
        if len(nodes) == 0:
            raise DomainError("function has empty support")
        return nodes.min(axis=0), nodes.max(axis=0)

    def resampled(self, grid: Grid) -> "GridFunction":
        return GridFunction(grid, self(grid.nodes()).reshape(grid.shape), self.s)


@dataclass(frozen=True)
class Profile:
    """A continuous function together with a box enclosing its support.

    Profiles are sampled onto grids of any resolution, which is what
    refinement sweeps need.
    """

    func: Callable[[np.ndarray], np.ndarray]
    box: Box
    name: str = ""

    def sample(self, points) -> GridFunction:
        return GridFunction.sample(self.func, self.box, points)


# -- alpha-means ----------------------------------------------------------------


def alpha_mean(a, b, lam: float, alpha: float):
    """Weighted power mean ``M_alpha(a, b, lam)`` with the zero rule.

    ``alpha`` may be ``0`` (geometric), ``math.inf`` (max) or ``-math.inf``
    (min).  The mean is 0 whenever ``a * b == 0``.
    """
    lam = np.asarray(lam, dtype=float)
    if not np.all((lam > 0) & (lam < 1)):
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise DomainError("alpha-means are defined for nonnegative arguments")
    pos = (a > 0) & (b > 0)
    aa = np.where(pos, a, 1.0)
    bb = np.where(pos, b, 1.0)
    if alpha == math.inf:
        m = np.maximum(aa, bb)
    elif alpha == -math.inf:
        m = np.minimum(aa, bb)
    elif alpha == 0:
        m = aa ** (1.0 - lam) * bb**lam
    else:
        m = ((1.0 - lam) * aa**alpha + lam * bb**alpha) ** (1.0 / alpha)
    out = np.where(pos, m, 0.0)
    return float(out) if out.ndim == 0 else out


def holder_conjugate_inverse(p: float) -> float:
    """``1/q`` for the Hölder conjugate ``q`` of ``p`` (0 when p = 1)."""
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return 1.0 - 1.0 / p


# -- s-concavity -------------------------------------------------------------------


class ConcavityResult(NamedTuple):
    concave: bool
    worst_violation: float
    support_convex: bool


def _support_convex_along_lines(mask: np.ndarray) -> bool:
    for axis in range(mask.ndim):
        before = np.maximum.accumulate(mask, axis=axis)
        after = np.flip(np.maximum.accumulate(np.flip(mask, axis=axis), axis=axis), axis=axis)
        if np.any(~mask & before & after):
            return False
    return True


def _node_pairs(count: int, max_pairs: int, gen: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    total = count * (count - 1) // 2
    if total <= max_pairs:
        i, j = np.triu_indices(count, k=1)
        return i, j
    i = gen.integers(0, count, max_pairs)
    j = gen.integers(0, count, max_pairs)
    keep = i != j
    return i[keep], j[keep]


def is_s_concave(f: GridFunction, s: float, tol: float = 1e-9, n_lambda: int = 17, max_pairs: int = 50_000, seed: int = 0) -> ConcavityResult:
    """Check that ``supp f`` is convex and ``f^(1/s)`` is concave on it.

    Support convexity is checked along every grid line and, in two or more
    dimensions, at convex combinations of sampled support-node pairs.
    Concavity compares the interpolated root at ``t x + (1-t) y`` with
    ``t f(x)^(1/s) + (1-t) f(y)^(1/s)`` over node pairs (all of them when
    there are at most ``max_pairs``) and an interior t-grid.  The worst
    signed violation is reported; positive means the inequality failed.
    """
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    mask = f.positive
    if not mask.any():
        raise DomainError("is_s_concave needs a nonempty support")
    convex = _support_convex_along_lines(mask)

    nodes, flat = f.support_nodes()
    roots = f.root(s).ravel()[flat]
    gen = RandomSource(seed).generator(0)
    i, j = _node_pairs(len(nodes), max_pairs, gen)
    worst = 0.0
    if len(i):
        t = np.linspace(0.0, 1.0, n_lambda)[1:-1]
        pts = t[None, :, None] * nodes[i][:, None, :] + (1 - t)[None, :, None] * nodes[j][:, None, :]
        r, support = f.root_at(pts.reshape(-1, f.dim), s)
        chord = t[None, :] * roots[i][:, None] + (1 - t)[None, :] * roots[j][:, None]
        gap = chord.ravel() - r
        worst = float(np.max(gap))
        if f.dim > 1 and not np.all(support):
            convex = False
    return ConcavityResult(convex and worst <= tol, worst, convex)


# -- scaling --------------------------------------------------------------------


def scale_fn(f: GridFunction, lam: float, p: float, s: float) -> GridFunction:
    """``[lam x_{p,s} f](x) = lam^(s/p) f(lam^(-1/p) x)``.

    Realised exactly by scaling the box by ``lam^(1/p)`` and the node
    values by ``lam^(s/p)``; node ``i`` of the result corresponds to node
    ``i`` of ``f``.
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    return GridFunction(f.grid.scaled(lam ** (1.0 / p)), f.values * lam ** (s / p), f.s)


# -- sup-convolution -----------------------------------------------------------------


def sum_box(f: GridFunction, g: GridFunction, M: CoefficientSet) -> Box:
    """Bounding box of ``supp f (+)_M supp g`` built from the support boxes."""
    if f.dim != g.dim:
        raise DomainError(f"dimension mismatch: {f.dim} vs {g.dim}")
    flo, fhi = f.support_box()
    glo, ghi = g.support_box()
    a, b = M.pairs[:, 0][:, None], M.pairs[:, 1][:, None]
    lo = np.min(a * flo + b * glo, axis=0)
    hi = np.max(a * fhi + b * ghi, axis=0)
    pad = max(f.grid.max_spacing, g.grid.max_spacing)
    flat = hi - lo <= BOX_RTOL * np.maximum(1.0, np.abs(hi))
    lo = np.where(flat, lo - pad, lo)
    hi = np.where(flat, hi + pad, hi)
    return Box(lo, hi)


def sum_grid(f: GridFunction, g: GridFunction, M: CoefficientSet, points=None) -> Grid:
    """Output grid on :func:`sum_box`; defaults to the finer input resolution per axis."""
    if points is None:
        points = tuple(max(a, b) for a, b in zip(f.grid.shape, g.grid.shape))
    return Grid(sum_box(f, g, M), points)


class SupWitness(NamedTuple):
    """Maximising decomposition ``z = a x + b y`` found for each point."""

    root_value: np.ndarray
    a: np.ndarray
    b: np.ndarray
    x: np.ndarray
    y: np.ndarray


def _sup_root(f: GridFunction, g: GridFunction, M: CoefficientSet, s: float, Z: np.ndarray, witness: bool = False):
    """Best ``a f(x)^(1/s) + b g(y)^(1/s)`` over ``z = a x + b y`` for each row of Z.

    Two passes: support nodes x of f with y solved from z and g
    interpolated, then the mirror image with the roles swapped.
    Infeasible points get ``-inf``.
    """
    m, n = Z.shape
    best = np.full(m, -np.inf)
    if witness:
        wa, wb = np.zeros(m), np.zeros(m)
        wx, wy = np.full((m, n), np.nan), np.full((m, n), np.nan)

    for swap in (False, True):
        src, other = (g, f) if swap else (f, g)
        own = M.pairs[:, 1] if swap else M.pairs[:, 0]
        oth = M.pairs[:, 0] if swap else M.pairs[:, 1]
        sel = np.flatnonzero(oth > 0)
        nodes, flat = src.support_nodes()
        roots = src.root(s).ravel()[flat]
        k = len(nodes)
        if k == 0 or len(sel) == 0:
            continue
        z_chunk = max(1, min(m, _BATCH_ELEMENTS // k))
        for z0 in range(0, m, z_chunk):
            Zc = Z[z0:z0 + z_chunk]
            mc = len(Zc)
            p_chunk = max(1, _BATCH_ELEMENTS // (mc * k))
            for p0 in range(0, len(sel), p_chunk):
                idx = sel[p0:p0 + p_chunk]
                A, B = own[idx], oth[idx]
                Y = (Zc[None, :, None, :] - A[:, None, None, None] * nodes[None, None, :, :]) / B[:, None, None, None]
                r_other, ok = other.root_at(Y.reshape(-1, n), s)
                vals = A[:, None, None] * roots[None, None, :] + B[:, None, None] * r_other.reshape(len(idx), mc, k)
                vals = np.where(ok.reshape(len(idx), mc, k), vals, -np.inf)
                vals = vals.transpose(1, 0, 2).reshape(mc, -1)
                arg = np.argmax(vals, axis=1)
                top = vals[np.arange(mc), arg]
                better = top > best[z0:z0 + mc]
                if not better.any():
                    continue
                best[z0:z0 + mc] = np.where(better, top, best[z0:z0 + mc])
                if witness:
                    rows = np.flatnonzero(better)
                    pi, ni = np.divmod(arg[rows], k)
                    pair = idx[pi]
                    node = nodes[ni]
                    solved = Y[pi, rows, ni, :]
                    a_, b_ = M.pairs[pair, 0], M.pairs[pair, 1]
                    zr = z0 + rows
                    wa[zr], wb[zr] = a_, b_
                    wx[zr] = solved if swap else node
                    wy[zr] = node if swap else solved
    if witness:
        return SupWitness(best, wa, wb, wx, wy)
    return best


def _check_supports(f: GridFunction, g: GridFunction):
    if f.dim != g.dim:
        raise DomainError(f"dimension mismatch: {f.dim} vs {g.dim}")
    if not f.positive.any() or not g.positive.any():
        raise DomainError("sup-convolution needs functions with nonempty supports")


def sup_conv_m(
    f: GridFunction,
    g: GridFunction,
    M: CoefficientSet,
    s: float,
    out_grid: Grid | None = None,
) -> GridFunction:
    """Discrete ``f (+)_{M,s} g`` on ``out_grid``.

    At each output node z the value is the largest
    ``(a f(x)^(1/s) + b g(y)^(1/s))^s`` found over ``(a, b)`` in M and
    decompositions ``z = a x + b y`` with x a support node of f and y
    solved exactly (and symmetrically with the roles swapped).  Nodes
    with no decomposition stay 0.  The result never exceeds the exact
    sup-convolution of the interpolated inputs.
    """
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    _check_supports(f, g)
    if out_grid is None:
        out_grid = sum_grid(f, g, M)
    elif out_grid.dim != f.dim:
        raise ConfigurationError(f"output grid has dimension {out_grid.dim}, inputs have {f.dim}")
    elif not out_grid.box.covers(sum_box(f, g, M)):
        need = sum_box(f, g, M)
        raise ConfigurationError(f"output grid {out_grid.box} does not cover the M-sum support {need}")
    best = _sup_root(f, g, M, s, out_grid.nodes())
    values = np.where(np.isfinite(best), np.maximum(best, 0.0), 0.0) ** s
    return GridFunction(out_grid, values.reshape(out_grid.shape), s)


def sup_conv_p(
    f: GridFunction,
    g: GridFunction,
    p: float,
    s: float,
    lambda_resolution: int = 513,
    out_grid: Grid | None = None,
) -> GridFunction:
    """Discrete ``f (+)_{p,s} g``: :func:`sup_conv_m` over the L_p coefficient curve."""
    return sup_conv_m(f, g, CoefficientSet.lp_curve(p, lambda_resolution), s, out_grid)


def sup_conv_witness(f: GridFunction, g: GridFunction, M: CoefficientSet, s: float, points) -> SupWitness:
    """Best decompositions at arbitrary points (root value ``-inf`` if none)."""
    _check_supports(f, g)
    Z = np.asarray(points, dtype=float).reshape(-1, f.dim)
    return _sup_root(f, g, M, s, Z, witness=True)


def sup_conv_bruteforce(f: GridFunction, g: GridFunction, M: CoefficientSet, s: float, out_grid: Grid) -> GridFunction:
    """Double loop over support-node pairs; reference for small instances.

    Every combination ``a x + b y`` of support nodes is credited to the
    output node within half a spacing of it (per axis).
    """
    _check_supports(f, g)
    xf, mf = f.support_nodes()
    yg, mg = g.support_nodes()
    rf = f.root(s).ravel()[mf]
    rg = g.root(s).ravel()[mg]
    out = np.full(out_grid.size, -np.inf)
    h = out_grid.spacing
    lo = out_grid.box.lo_array
    shape = np.array(out_grid.shape)
    for a, b in M.pairs:
        z = a * xf[:, None, :] + b * yg[None, :, :]
        val = a * rf[:, None] + b * rg[None, :]
        t = (z.reshape(-1, f.dim) - lo) / h
        idx = np.rint(t).astype(np.intp)
        ok = np.all((np.abs(t - idx) <= 0.5 + 1e-9) & (idx >= 0) & (idx < shape), axis=1)
        flat = np.ravel_multi_index(tuple(idx[ok].T), out_grid.shape)
        np.maximum.at(out, flat, val.ravel()[ok])
    values = np.where(np.isfinite(out), out, 0.0) ** s
    return GridFunction(out_grid, values.reshape(out_grid.shape), s)


# -- lifts ----------------------------------------------------------------------------


def _integer_s(s: float) -> int:
    s = float(s)
    if not (s > 0 and s.is_integer()):
        raise DomainError(f"lifts need a positive integer s, got {s}")
    return int(s)


@dataclass(frozen=True, eq=False)
class LiftedBody:
    """``{(x, y) in R^n x R^s : x in supp f, |y| <= f(x)^(1/s)}``."""

    f: GridFunction
    s: int

    def __post_init__(self):
        object.__setattr__(self, "s", _integer_s(self.s))

    @property
    def dim(self) -> int:
        return self.f.dim + self.s

    @property
    def radius(self) -> float:
        return float(self.f.root(self.s).max())

    def bounding_box(self) -> Box:
        r = self.radius
        if r <= 0:
            raise DomainError("lift of a function with empty support")
        return self.f.box.product(Box((-r,) * self.s, (r,) * self.s))

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        """Vectorised membership.

        With ``tol > 0`` the base point may move by up to ``tol`` along
        each axis (probing ``x`` and ``x +- tol e_i``) and the fibre radius
        is relaxed by ``tol``.
        """
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.shape[1] != self.dim:
            raise DomainError(f"expected points in R^{self.dim}, got dimension {P.shape[1]}")
        n = self.f.dim
        x, y = P[:, :n], P[:, n:]
        ynorm = np.linalg.norm(y, axis=1)
        if tol == 0:
            r, ok = self.f.root_at(x, self.s)
            return ok & (ynorm <= r)
        box = self.f.box
        probes = [x, np.clip(x, box.lo_array, box.hi_array)]
        for axis in range(n):
            for sign in (-1.0, 1.0):
                shifted = x.copy()
                shifted[:, axis] += sign * tol
                probes.append(shifted)
        best = np.full(len(P), -np.inf)
        for q in probes:
            r, ok = self.f.root_at(q, self.s)
            best = np.where(ok, np.maximum(best, r), best)
        return ynorm <= best + tol

    def sample(self, count: int, gen: np.random.Generator) -> np.ndarray:
        """Uniform samples from the lift by rejection in its bounding box."""
        box = self.bounding_box()
        out = []
        have = 0
        while have < count:
            pts = box.lo_array + box.widths * gen.random((max(1024, 2 * (count - have)), self.dim))
            pts = pts[self.contains(pts)]
            out.append(pts)
            have += len(pts)
        return np.vstack(out)[:count]


def lift_membership(L: LiftedBody, point) -> bool:
    point = np.asarray(point, dtype=float).ravel()
    if point.size != L.dim:
        raise DomainError(f"expected a point in R^{L.dim}, got {point.size} coordinates")
    return bool(L.contains(point[None, :])[0])


def lift_volume(L: LiftedBody, samples: int = 10**6, rng: RandomSource | None = None, stream=()) -> tuple[float, float]:
    """Monte Carlo ``(n+s)``-volume of the lift, as ``(estimate, stderr)``."""
    return mc_volume(L.contains, L.bounding_box(), samples, rng or RandomSource(0), stream)
