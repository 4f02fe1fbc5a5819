"""Means and mean oscillations of grid functions over (possibly rotated)
cubes, with exact cell-overlap geometry.

Conventions: a cube of side ``eps`` is normalized by its full measure
``eps^dim`` even where it overhangs the grid (the function continues with
its extension values there, zero by default).  Angles are normalized to
[0, pi/2) by the square's symmetry.  Axis-aligned cubes take an exact
separable path; rotated cubes go through the clipping kernel backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError, InvalidSpecError, OverlappingFamilyError
from .grid import GridFunction

__all__ = [
    "Cube",
    "CubeFamily",
    "cell_overlap_weights",
    "mean",
    "oscillation",
    "mean_oscillation",
    "family_score",
    "verify_disjoint",
]

_HALF_PI = math.pi / 2.0
_DISJOINT_TOL = 1e-12


@dataclass(frozen=True)
class Cube:
    """A cube of side ``eps``: an interval in 1D, a rotatable square in 2D."""

    center: tuple
    eps: float
    angle: float = 0.0

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        object.__setattr__(self, "center", center)
        if len(center) not in (1, 2):
            raise DimensionError("cube center must have 1 or 2 coordinates")
        if not (self.eps > 0):
            raise InvalidSpecError(f"cube side must be positive, got {self.eps!r}")
        a = float(self.angle)
        if len(center) == 1:
            if a != 0.0:
                raise InvalidSpecError("1D cubes cannot be rotated")
        else:
            a = a % _HALF_PI
            if a > _HALF_PI - 1e-13:
                a = 0.0
        object.__setattr__(self, "angle", a)

    @property
    def dim(self):
        return len(self.center)

    def translated(self, offset):
        return Cube(tuple(c + o for c, o in zip(self.center, offset)), self.eps, self.angle)

    def to_json(self):
        return {"center": list(self.center), "eps": self.eps, "angle": self.angle}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj["center"]), float(obj["eps"]), float(obj.get("angle", 0.0)))


@dataclass(frozen=True)
class CubeFamily:
    """A collection of equal-side cubes meant to be pairwise disjoint."""

    cubes: tuple
    eps: float
    orientation_mode: str = "axis_aligned"

    def __post_init__(self):
        cubes = tuple(self.cubes)
        object.__setattr__(self, "cubes", cubes)
        if self.orientation_mode not in ("axis_aligned", "rotated"):
            raise InvalidSpecError(f"unknown orientation mode {self.orientation_mode!r}")
        for q in cubes:
            if abs(q.eps - self.eps) > 1e-12 * self.eps:
                raise InvalidSpecError("all cubes in a family must share the side length")
            if self.orientation_mode == "axis_aligned" and q.angle != 0.0:
                raise InvalidSpecError("axis_aligned family contains a rotated cube")

    def __len__(self):
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)

    def translated(self, offset):
        return CubeFamily(tuple(q.translated(offset) for q in self.cubes),
                          self.eps, self.orientation_mode)

    def to_json(self):
        return {
            "eps": self.eps,
            "orientation_mode": self.orientation_mode,
            "cubes": [q.to_json() for q in self.cubes],
        }

    @classmethod
    def from_json(cls, obj):
        cubes = tuple(Cube.from_json(c) for c in obj["cubes"])
        return cls(cubes, float(obj["eps"]), obj.get("orientation_mode", "axis_aligned"))


# ---------------------------------------------------------------------------
# Overlap geometry
# ---------------------------------------------------------------------------

def _axis_overlaps(lo, h, n, a, b):
    """Clip [a, b] against the cell range; returns (i0, weights, below, above)
    where below/above are the lengths of [a, b] outside the cells."""
    hi = lo + n * h
    below = max(0.0, min(b, lo) - a)
    above = max(0.0, b - max(a, hi))
    i0 = max(0, int(math.floor((a - lo) / h)))
    i1 = min(n - 1, int(math.floor((b - lo) / h + 1e-12)))
    if i1 < i0:
        return 0, np.zeros(0), below, above
    edges = lo + np.arange(i0, i1 + 2) * h
    w = np.clip(np.minimum(edges[1:], b) - np.maximum(edges[:-1], a), 0.0, None)
    return i0, w, below, above


def cell_overlap_weights(cube: Cube, f: GridFunction):
    """Exact overlap measures of the grid cells with the cube.

    Returns (indices, weights): indices is (k,) in 1D or (k, 2) in 2D and
    lists only in-grid cells with positive overlap; the part of the cube
    beyond the grid carries the extension values with measure
    eps^dim - sum(weights).
    """
    if cube.dim != f.dim:
        raise DimensionError("cube and function dimensions differ")
    s = 0.5 * cube.eps
    if f.dim == 1:
        i0, w, _, _ = _axis_overlaps(f.origin[0], f.h, f.shape[0],
                                     cube.center[0] - s, cube.center[0] + s)
        nz = np.nonzero(w)[0]
        return i0 + nz, w[nz]
    if cube.angle == 0.0:
        i0, wx, _, _ = _axis_overlaps(f.origin[0], f.h, f.shape[0],
                                      cube.center[0] - s, cube.center[0] + s)
        j0, wy, _, _ = _axis_overlaps(f.origin[1], f.h, f.shape[1],
                                      cube.center[1] - s, cube.center[1] + s)
        W = np.outer(wx, wy)
    else:
        i0, j0, W = kernels.reference.weights_matrix(
            f.origin[0], f.origin[1], f.h, f.shape[0], f.shape[1],
            cube.center[0], cube.center[1], cube.eps, cube.angle)
    ii, jj = np.nonzero(W)
    idx = np.column_stack([ii + i0, jj + j0])
    return idx, W[ii, jj]


def mean_oscillation(f: GridFunction, cube: Cube):
    """(mean, oscillation) of f over the cube, both normalized by eps^dim."""
    if cube.dim != f.dim:
        raise DimensionError("cube and function dimensions differ")
    s = 0.5 * cube.eps
    if f.dim == 1:
        vol = cube.eps
        i0, w, below, above = _axis_overlaps(f.origin[0], f.h, f.shape[0],
                                             cube.center[0] - s, cube.center[0] + s)
        vals = f.values[i0: i0 + len(w)]
        m = (float(w @ vals) + below * f.ext[0] + above * f.ext[1]) / vol
        osc = (float(w @ np.abs(vals - m)) + below * abs(f.ext[0] - m)
               + above * abs(f.ext[1] - m)) / vol
        return m, osc
    if cube.angle == 0.0:
        vol = cube.eps * cube.eps
        i0, wx, _, _ = _axis_overlaps(f.origin[0], f.h, f.shape[0],
                                      cube.center[0] - s, cube.center[0] + s)
        j0, wy, _, _ = _axis_overlaps(f.origin[1], f.h, f.shape[1],
                                      cube.center[1] - s, cube.center[1] + s)
        V = f.values[i0: i0 + len(wx), j0: j0 + len(wy)]
        win = float(wx.sum() * wy.sum())
        m = float(wx @ V @ wy) / vol
        osc = (float(wx @ np.abs(V - m) @ wy) + max(vol - win, 0.0) * abs(m)) / vol
        return m, osc
    return kernels.impl.cube_mean_osc(f.values, f.origin[0], f.origin[1], f.h,
                                      cube.center[0], cube.center[1],
                                      cube.eps, cube.angle)


def mean(f: GridFunction, cube: Cube):
    """Average of f over the cube (zero/extension values beyond the grid)."""
    return mean_oscillation(f, cube)[0]


def oscillation(f: GridFunction, cube: Cube):
    """Mean oscillation of f over the cube: the average of |f - mean|."""
    return mean_oscillation(f, cube)[1]


# ---------------------------------------------------------------------------
# Disjointness
# ---------------------------------------------------------------------------

def _squares_disjoint(c1, a1, c2, a2, s, tol=_DISJOINT_TOL):
    """Separating-axis test for two squares of half-side s; boundary
    contact counts as disjoint (interiors are what matter)."""
    dx = c2[0] - c1[0]
    dy = c2[1] - c1[1]
    for ang in (a1, a1 + _HALF_PI, a2, a2 + _HALF_PI):
        ux, uy = math.cos(ang), math.sin(ang)
        ext1 = s * (abs(math.cos(a1) * ux + math.sin(a1) * uy)
                    + abs(-math.sin(a1) * ux + math.cos(a1) * uy))
        ext2 = s * (abs(math.cos(a2) * ux + math.sin(a2) * uy)
                    + abs(-math.sin(a2) * ux + math.cos(a2) * uy))
        if abs(dx * ux + dy * uy) >= ext1 + ext2 - tol:
            return True
    return False


def verify_disjoint(family: CubeFamily) -> bool:
    """True iff all cube pairs have interiors intersecting in measure zero."""
    cubes = family.cubes
    n = len(cubes)
    if n <= 1:
        return True
    eps = family.eps
    if cubes[0].dim == 1:
        centers = np.array([q.center[0] for q in cubes])
        order = np.argsort(centers, kind="stable")
        d = np.diff(centers[order])
        return bool(np.all(d >= eps - _DISJOINT_TOL))
    centers = np.array([q.center for q in cubes])
    angles = np.array([q.angle for q in cubes])
    s = 0.5 * eps
    if np.all(angles == 0.0):
        # axis-aligned: vectorized overlap test in row chunks
        for i0 in range(0, n, 256):
            i1 = min(n, i0 + 256)
            dx = np.abs(centers[i0:i1, None, 0] - centers[None, :, 0])
            dy = np.abs(centers[i0:i1, None, 1] - centers[None, :, 1])
            bad = (dx < eps - _DISJOINT_TOL) & (dy < eps - _DISJOINT_TOL)
            ii, jj = np.nonzero(bad)
            for a, b in zip(ii + i0, jj):
                if a != b:
                    return False
        return True
    # rotated: bucket by center so only nearby pairs take the full test
    diam = eps * math.sqrt(2.0)
    buckets = {}
    for k in range(n):
        key = (int(math.floor(centers[k, 0] / diam)), int(math.floor(centers[k, 1] / diam)))
        buckets.setdefault(key, []).append(k)
    for k in range(n):
        kx = int(math.floor(centers[k, 0] / diam))
        ky = int(math.floor(centers[k, 1] / diam))
        for bx in (kx - 1, kx, kx + 1):
            for by in (ky - 1, ky, ky + 1):
                for j in buckets.get((bx, by), ()):
                    if j <= k:
                        continue
                    if not _squares_disjoint(centers[k], angles[k], centers[j], angles[j], s):
                        return False
    return True


def family_score(f: GridFunction, family: CubeFamily):
    """eps^(dim-1) times the sum of the cubes' mean oscillations."""
    if not verify_disjoint(family):
        raise OverlappingFamilyError("cube family has overlapping interiors")
    total = 0.0
    for q in family.cubes:
        total += oscillation(f, q)
    pref = 1.0 if f.dim == 1 else family.eps
    return pref * total
