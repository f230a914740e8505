"""Set-level arithmetic: M-addition, L_p sums and hull volumes.

Sets are finite point clouds (``DiscreteSet``) or vertex-represented
convex bodies (``ConvexPolytope``).  Coefficient sets ``M`` are finite
samples of nonnegative pairs ``(a, b)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import DomainError
from .numerics import Box, RandomSource, mc_volume

#: Points closer than this (per coordinate) are merged by ``m_add``.
DEDUP_DECIMALS = 12


def _as_points(points, dim=None) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(-1, 1) if dim in (None, 1) else pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise DomainError("a point set needs at least one point")
    if not np.all(np.isfinite(pts)):
        raise DomainError("point coordinates must be finite")
    return pts


def dedup(points: np.ndarray) -> np.ndarray:
    """Sort rows and merge those equal after rounding to 1e-12.

    The first representative of each group is kept unrounded.
    """
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return points
    keys = np.round(points, DEDUP_DECIMALS) + 0.0  # +0.0 folds -0.0 into 0.0
    # stable lexicographic sort (first column most significant), keep group heads
    order = np.lexsort(keys.T[::-1])
    sorted_keys = keys[order]
    head = np.ones(len(order), dtype=bool)
    head[1:] = np.any(sorted_keys[1:] != sorted_keys[:-1], axis=1)
    return points[order[head]]


@dataclass(frozen=True, eq=False)
class DiscreteSet:
    """Finite nonempty point cloud in R^n."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _as_points(self.points))

    @classmethod
    def interval(cls, lo: float, hi: float, count: int = 11) -> "DiscreteSet":
        return cls(np.linspace(lo, hi, count).reshape(-1, 1))

    @classmethod
    def box_vertices(cls, lo, hi) -> "DiscreteSet":
        lo, hi = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float)
        n = len(lo)
        corners = [[hi[i] if (c >> i) & 1 else lo[i] for i in range(n)] for c in range(1 << n)]
        return cls(np.array(corners))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def extreme_points(self) -> np.ndarray:
        return extreme_points(self.points)


def extreme_points(points: np.ndarray) -> np.ndarray:
    """Vertices of the convex hull (all unique points if the hull is flat)."""
    pts = dedup(np.asarray(points, dtype=float))
    if pts.shape[1] == 1:
        return np.unique(np.array([[pts.min()], [pts.max()]]), axis=0)
    if len(pts) <= pts.shape[1]:
        return pts
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return pts
    return pts[np.sort(hull.vertices)]


@dataclass(frozen=True, eq=False)
class ConvexPolytope:
    """Convex body given by its vertices; stored vertices are extreme points."""

    vertices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", extreme_points(_as_points(self.vertices)))

    @classmethod
    def from_set(cls, A: DiscreteSet) -> "ConvexPolytope":
        return cls(A.points)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def support(self, u) -> np.ndarray | float:
        return support_function(self, u)


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Finite set of nonnegative coefficient pairs ``(a, b)``."""

    pairs: np.ndarray
    descriptor: str = "explicit"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        pairs = np.atleast_2d(np.asarray(self.pairs, dtype=float))
        if pairs.ndim != 2 or pairs.shape[1] != 2 or len(pairs) == 0:
            raise DomainError("coefficient pairs must form a nonempty (m, 2) array")
        if not np.all(np.isfinite(pairs)) or np.any(pairs < 0):
            raise DomainError("coefficients must be finite and nonnegative")
        if np.all(pairs == 0):
            raise DomainError("M = {(0, 0)} is excluded")
        object.__setattr__(self, "pairs", dedup(pairs))

    @classmethod
    def explicit(cls, pairs) -> "CoefficientSet":
        return cls(pairs)

    @classmethod
    def classical(cls) -> "CoefficientSet":
        return cls([[1.0, 1.0]], "classical")

    @classmethod
    def minkowski(cls, lam: float) -> "CoefficientSet":
        if not 0 <= lam <= 1:
            raise DomainError(f"lambda must lie in [0, 1], got {lam}")
        return cls([[1.0 - lam, lam]], "minkowski", {"lambda": float(lam)})

    @classmethod
    def lp_curve(cls, p: float, resolution: int = 513) -> "CoefficientSet":
        """Pairs ``((1-t)^(1/q), t^(1/q))`` on a t-grid containing 0, 1/2, 1.

        ``q`` is the Hölder conjugate of ``p``.  For ``p = 1`` (``1/q = 0``)
        this is the single pair ``(1, 1)``.
        """
        p = float(p)
        if not p >= 1:
            raise DomainError(f"p must be >= 1, got {p}")
        if p == 1:
            return cls([[1.0, 1.0]], "lp_curve", {"p": 1.0, "resolution": 1})
        resolution = int(resolution)
        if resolution < 2:
            raise DomainError(f"lambda resolution must be >= 2, got {resolution}")
        t = lambda_grid(resolution)
        inv_q = 1.0 - 1.0 / p
        pairs = np.column_stack([(1.0 - t) ** inv_q, t**inv_q])
        q = 1.0 / inv_q
        # raising to the power q magnifies rounding of the pairs by about q
        err = np.max(np.abs(pairs[:, 0] ** q + pairs[:, 1] ** q - 1.0))
        assert err <= max(1e-12, 8 * q * np.finfo(float).eps), err
        return cls(pairs, "lp_curve", {"p": p, "resolution": len(t)})

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def lambda_spacing(self) -> float:
        res = self.params.get("resolution", 1)
        return 1.0 / (res - 1) if res > 1 else 0.0

    def is_symmetric(self) -> bool:
        keys = {tuple(row) for row in np.round(self.pairs, 9) + 0.0}
        return all((b, a) in keys for a, b in keys)

    def convex_hull(self, resolution: int = 64) -> "CoefficientSet":
        """Sample of ``conv(M)``: the pairs, hull edges and an interior lattice.

        Lattice spacing is ``extent / resolution``.
        """
        pts = self.pairs
        try:
            hull = ConvexHull(pts)
        except (QhullError, ValueError):
            # collinear or too few pairs: the hull is a segment
            return self._segment_hull(resolution)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        step = float(np.max(hi - lo)) / resolution
        axes = [np.arange(a, b + step / 2, step) for a, b in zip(lo, hi)]
        lattice = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
        eq = hull.equations
        inside = np.all(lattice @ eq[:, :2].T + eq[:, 2] <= 1e-12, axis=1)
        edges = []
        for i, j in hull.simplices:
            k = max(2, int(np.ceil(np.linalg.norm(pts[i] - pts[j]) / step)) + 1)
            t = np.linspace(0, 1, k)[:, None]
            edges.append((1 - t) * pts[i] + t * pts[j])
        sample = np.vstack([pts, lattice[inside]] + edges)
        return CoefficientSet(np.clip(sample, 0, None), "explicit", {"hull_of": self.descriptor, "lattice": resolution})

    def _segment_hull(self, resolution):
        pts = self.pairs
        if len(pts) == 1:
            return self
        d = pts - pts[0]
        far = np.argmax(np.linalg.norm(d, axis=1))
        direction = d[far] / np.linalg.norm(d[far])
        proj = d @ direction
        a, b = pts[np.argmin(proj)], pts[np.argmax(proj)]
        t = np.linspace(0, 1, resolution + 1)[:, None]
        return CoefficientSet(np.vstack([pts, (1 - t) * a + t * b]), "explicit", {"hull_of": self.descriptor})

    def convexity_gap(self, resolution: int = 128) -> float:
        """Largest distance from a point of ``conv(M)`` to the nearest pair."""
        dense = self.convex_hull(resolution).pairs
        dist, _ = cKDTree(self.pairs).query(dense)
        return float(np.max(dist))


def lambda_grid(resolution: int) -> np.ndarray:
    """Uniform grid on [0, 1] with the midpoint 1/2 inserted if absent."""
    t = np.linspace(0.0, 1.0, int(resolution))
    if not np.any(t == 0.5):
        t = np.sort(np.append(t, 0.5))
    return t


def support_function(K: ConvexPolytope, u):
    """``h_K(u) = max_{v in K} u . v``; accepts one direction or a stack."""
    u = np.asarray(u, dtype=float)
    if K.dim == 1 and u.ndim <= 1 and u.size != 1:
        u = u.reshape(-1, 1)
    single = u.ndim <= 1
    U = np.atleast_2d(u).reshape(-1, K.dim)
    h = np.max(U @ K.vertices.T, axis=1)
    return float(h[0]) if single else h


def m_add(A: DiscreteSet, B: DiscreteSet, M: CoefficientSet) -> DiscreteSet:
    """M-addition ``{a x + b y : (a, b) in M, x in A, y in B}``, deduplicated."""
    if A.dim != B.dim:
        raise DomainError(f"dimension mismatch: {A.dim} vs {B.dim}")
    a = M.pairs[:, 0][:, None, None, None]
    b = M.pairs[:, 1][:, None, None, None]
    out = a * A.points[None, :, None, :] + b * B.points[None, None, :, :]
    return DiscreteSet(dedup(out.reshape(-1, A.dim)))


def lp_pointwise_sum(A: DiscreteSet, B: DiscreteSet, p: float, lambda_resolution: int = 1001) -> DiscreteSet:
    """Pointwise L_p sum ``{(1-t)^(1/q) x + t^(1/q) y}``; plain Minkowski sum at p = 1."""
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return m_add(A, B, CoefficientSet.lp_curve(p, lambda_resolution))


@dataclass(frozen=True)
class SupportTable:
    directions: np.ndarray
    values: np.ndarray

    def as_rows(self) -> np.ndarray:
        return np.column_stack([self.directions, self.values])


def unit_directions(dim: int, count: int) -> np.ndarray:
    """Evenly spaced unit directions (angles in 2-D, +-1 in 1-D)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        theta = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    # Fibonacci-free fallback: normalised Gaussian directions from a fixed seed
    gen = RandomSource(0).generator(dim, count)
    u = gen.standard_normal((count, dim))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def lp_support_sum(K: ConvexPolytope, L: ConvexPolytope, p: float, directions) -> SupportTable:
    """Per-direction support values ``(h_K^p + h_L^p)^(1/p)`` of ``K +_p L``.

    Both bodies must contain the origin, so all support values are >= 0.
    """
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if K.dim != L.dim:
        raise DomainError(f"dimension mismatch: {K.dim} vs {L.dim}")
    U = np.asarray(directions, dtype=float).reshape(-1, K.dim)
    hK, hL = support_function(K, U), support_function(L, U)
    for name, h in (("K", hK), ("L", hL)):
        bad = np.flatnonzero(h < -1e-12)
        if bad.size:
            raise DomainError(
                f"{name} does not contain the origin: h_{name}(u) = {h[bad[0]]:.6g} < 0 for u = {U[bad[0]].tolist()}"
            )
    hK, hL = np.maximum(hK, 0.0), np.maximum(hL, 0.0)
    return SupportTable(U, (hK**p + hL**p) ** (1.0 / p))


def hausdorff_by_support(A: np.ndarray, table: SupportTable) -> float:
    """Hausdorff distance between conv(A) and the body of ``table``.

    Evaluated as the largest support-value gap over the table's directions.
    """
    hA = np.max(table.directions @ np.asarray(A, dtype=float).T, axis=1)
    return float(np.max(np.abs(hA - table.values)))


def _shoelace(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def volume_hull(A: DiscreteSet, samples: int = 10**6, rng: RandomSource | None = None, stream=()) -> tuple[float, float]:
    """Volume of ``conv(A)`` as ``(estimate, stderr)``.

    Exact in one and two dimensions (length, shoelace); hit-or-miss Monte
    Carlo in the bounding box above that.  Flat hulls have volume 0.
    """
    pts = dedup(A.points)
    n = pts.shape[1]
    if n == 1:
        return float(pts.max() - pts.min()), 0.0
    if len(pts) <= n:
        return 0.0, 0.0
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return 0.0, 0.0
    if n == 2:
        return _shoelace(pts[hull.vertices]), 0.0
    rng = rng or RandomSource(0)
    eq = hull.equations
    scale = float(np.max(np.abs(pts)))
    tol = 1e-12 * max(1.0, scale)

    def inside(x):
        return np.all(x @ eq[:, :-1].T + eq[:, -1] <= tol, axis=1)

    box = Box(pts.min(axis=0), pts.max(axis=0))
    return mc_volume(inside, box, samples, rng, stream)

