"""Numerical substrate shared by the set and function calculus.

Boxes and uniform grids, trapezoidal quadrature, multilinear
interpolation, unit-ball constants, seeded Monte Carlo volumes and
nested refinement sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

#: Relative slack used when deciding whether a point lies on a box face.
BOX_RTOL = 1e-12

_MC_CHUNK = 1 << 18


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]``."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(np.asarray(self.lo, dtype=float)))
        hi = tuple(float(v) for v in np.atleast_1d(np.asarray(self.hi, dtype=float)))
        if len(lo) == 0 or len(lo) != len(hi):
            raise DomainError(f"box bounds must be nonempty and of equal length, got {lo} and {hi}")
        if not all(math.isfinite(v) for v in lo + hi):
            raise DomainError("box bounds must be finite")
        if not all(a < b for a, b in zip(lo, hi)):
            raise DomainError(f"degenerate box: need lo < hi on every axis, got lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def lo_array(self) -> np.ndarray:
        return np.array(self.lo)

    @property
    def hi_array(self) -> np.ndarray:
        return np.array(self.hi)

    @property
    def widths(self) -> np.ndarray:
        return self.hi_array - self.lo_array

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def scaled(self, factor: float) -> "Box":
        """Image of the box under ``x -> factor * x`` (factor > 0)."""
        if not factor > 0:
            raise DomainError(f"scale factor must be positive, got {factor}")
        return Box(tuple(factor * v for v in self.lo), tuple(factor * v for v in self.hi))

    def product(self, other: "Box") -> "Box":
        return Box(self.lo + other.lo, self.hi + other.hi)

    def contains(self, points, tol: float | None = None) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if tol is None:
            tol = BOX_RTOL * max(1.0, float(np.max(np.abs(self.lo + self.hi))))
        return np.all((pts >= self.lo_array - tol) & (pts <= self.hi_array + tol), axis=1)

    def covers(self, other: "Box", tol: float | None = None) -> bool:
        if tol is None:
            tol = BOX_RTOL * max(1.0, float(np.max(np.abs(self.lo + self.hi + other.lo + other.hi))))
        return bool(np.all(self.lo_array <= other.lo_array + tol) and np.all(self.hi_array >= other.hi_array - tol))


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid whose nodes include the corners of ``box``."""

    box: Box
    shape: tuple

    def __post_init__(self):
        shape = tuple(int(k) for k in np.atleast_1d(self.shape))
        if len(shape) == 1 and self.box.dim > 1:
            shape = shape * self.box.dim
        if len(shape) != self.box.dim:
            raise ConfigurationError(f"grid shape {shape} does not match box dimension {self.box.dim}")
        if any(k < 2 for k in shape):
            raise ConfigurationError(f"need at least 2 points per axis, got {shape}")
        object.__setattr__(self, "shape", shape)

    @classmethod
    def uniform(cls, lo, hi, points) -> "Grid":
        return cls(Box(lo, hi), points)

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> np.ndarray:
        return self.box.widths / (np.array(self.shape) - 1)

    @property
    def max_spacing(self) -> float:
        return float(np.max(self.spacing))

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(a, b, k) for a, b, k in zip(self.box.lo, self.box.hi, self.shape)]

    def nodes(self) -> np.ndarray:
        """All nodes as an ``(size, dim)`` array in row-major order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def scaled(self, factor: float) -> "Grid":
        return Grid(self.box.scaled(factor), self.shape)

    def refined(self) -> "Grid":
        """Grid with every interval halved; the old nodes persist."""
        return Grid(self.box, tuple(2 * k - 1 for k in self.shape))

    def with_points(self, points) -> "Grid":
        return Grid(self.box, points)


@dataclass(frozen=True)
class RandomSource:
    """Seed for reproducible random streams.

    Streams use numpy's PCG64 bit generator seeded through a
    ``SeedSequence``; both algorithms are documented and produce the same
    stream on every platform.  Independent substreams are derived from
    ``(seed, *key)`` so parallel jobs stay deterministic.
    """

    seed: int = 0

    def __post_init__(self):
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "seed", seed)

    def generator(self, *key: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return np.random.Generator(np.random.PCG64(seq))

    def substream(self, *key: int) -> "RandomSource":
        """A new source whose seed is derived from ``(seed, *key)``."""
        seq = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return RandomSource(int(seq.generate_state(1, dtype=np.uint64)[0]))


def kappa(s: float) -> float:
    """Volume of the ``s``-dimensional Euclidean unit ball, ``pi^(s/2) / Gamma(s/2 + 1)``."""
    s = float(s)
    if not s > 0 or not math.isfinite(s):
        raise DomainError(f"kappa needs s > 0, got {s}")
    if s < 300:
        return math.pi ** (s / 2) / math.gamma(s / 2 + 1)
    return math.exp(s / 2 * math.log(math.pi) - math.lgamma(s / 2 + 1))


def trapezoid_weights(grid: Grid) -> list[np.ndarray]:
    weights = []
    for k, h in zip(grid.shape, grid.spacing):
        w = np.full(k, h)
        w[0] = w[-1] = h / 2
        weights.append(w)
    return weights


def integrate_grid(f) -> float:
    """Trapezoidal integral of a grid function over its box.

    ``f`` is anything with ``grid`` and ``values`` attributes.
    """
    total = np.asarray(f.values, dtype=float)
    for w in reversed(trapezoid_weights(f.grid)):
        total = total @ w
    return float(total)


def interpolate(grid: Grid, values: np.ndarray, points) -> np.ndarray:
    """Multilinear interpolation of node ``values`` at ``points``.

    Points outside the box are clamped onto it; callers mask them.
    """
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, grid.dim)
    values = np.asarray(values, dtype=float)
    if grid.dim == 1:
        out = np.interp(flat[:, 0], grid.axes()[0], values)
        return out.reshape(pts.shape[:-1])

    shape = np.array(grid.shape)
    t = (flat - grid.box.lo_array) / grid.spacing
    t = np.clip(t, 0.0, shape - 1)
    idx = np.minimum(np.floor(t).astype(np.intp), shape - 2)
    frac = t - idx
    out = np.zeros(len(flat))
    for corner in range(1 << grid.dim):
        bits = [(corner >> axis) & 1 for axis in range(grid.dim)]
        w = np.ones(len(flat))
        index = []
        for axis, bit in enumerate(bits):
            w *= frac[:, axis] if bit else 1.0 - frac[:, axis]
            index.append(idx[:, axis] + bit)
        out += w * values[tuple(index)]
    return out.reshape(pts.shape[:-1])


def nearest_node_index(grid: Grid, points) -> tuple[np.ndarray, ...]:
    pts = np.asarray(points, dtype=float).reshape(-1, grid.dim)
    t = np.rint((pts - grid.box.lo_array) / grid.spacing).astype(np.intp)
    t = np.clip(t, 0, np.array(grid.shape) - 1)
    return tuple(t[:, axis] for axis in range(grid.dim))


def mc_volume(
    membership: Callable[[np.ndarray], np.ndarray],
    box: Box,
    samples: int,
    rng: RandomSource,
    stream: Sequence[int] = (),
) -> tuple[float, float]:
    """Hit-or-miss Monte Carlo volume of ``{x in box : membership(x)}``.

    ``membership`` receives an ``(m, d)`` array and returns ``m`` booleans.
    Returns ``(estimate, stderr)`` with the binomial standard error.
    """
    if not isinstance(box, Box):
        box = Box(*box)
    samples = int(samples)
    if samples < 1:
        raise DomainError(f"need at least one sample, got {samples}")
    gen = rng.generator(*stream)
    lo, widths = box.lo_array, box.widths
    hits = 0
    remaining = samples
    while remaining:
        m = min(remaining, _MC_CHUNK)
        pts = lo + widths * gen.random((m, box.dim))
        hits += int(np.count_nonzero(membership(pts)))
        remaining -= m
    p_hat = hits / samples
    vol = box.volume
    return vol * p_hat, vol * math.sqrt(p_hat * (1.0 - p_hat) / samples)


def is_nested(resolutions: Sequence[int]) -> bool:
    res = [int(r) for r in resolutions]
    return all(b > a and a >= 2 and (b - 1) % (a - 1) == 0 for a, b in zip(res, res[1:]))


def refinement_sweep(task: Callable[[int], float], resolutions: Sequence[int], nested: bool = True):
    """Evaluate ``task`` at increasing resolutions.

    With ``nested=True`` each resolution is a node count whose node set
    contains the previous one (``(r_{k+1} - 1)`` divisible by ``(r_k - 1)``).
    Set ``nested=False`` for sample counts and other non-grid resolutions;
    they must still be strictly increasing.
    """
    res = [int(r) for r in resolutions]
    if not res:
        raise ConfigurationError("empty resolution list")
    if any(b <= a for a, b in zip(res, res[1:])):
        raise ConfigurationError(f"resolutions must be strictly increasing, got {res}")
    if nested and not is_nested(res):
        raise ConfigurationError(f"resolutions {res} are not nested refinements (use 2^k + 1 node counts)")
    return [(r, task(r)) for r in res]
