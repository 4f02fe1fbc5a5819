"""Grid-sampled functions on uniform 1D/2D lattices and the test catalog.

A :class:`GridFunction` is piecewise constant on the half-open cells
``[origin + i*h, origin + (i+1)*h)``.  Outside its bounding box the function
continues with per-side constants (``ext``), zero by default.  The default
therefore realises compactly supported functions; monotone truncations
(Cantor staircase, clamped ramps) carry their limit values in ``ext`` so
that total variation and oscillation see no artificial box-edge jump.
All integrals in this package are exact sums over cells.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionError,
    GridParseError,
    IncompatibleLatticeError,
    InvalidSpecError,
    ResolutionMismatchError,
)

__all__ = [
    "GridFunction",
    "FunctionSpec",
    "generate",
    "read_grid",
    "write_grid",
    "l1_distance",
    "lp_norm",
    "lattice_multiple",
]

_REL_TOL = 1e-9


def lattice_multiple(x, h, what="length"):
    """Return the integer k with x == k*h, or raise LatticeError."""
    from .errors import LatticeError

    k = int(round(x / h))
    if abs(x - k * h) > _REL_TOL * h * max(1.0, abs(k)):
        raise LatticeError(f"{what} {x!r} is not a multiple of the cell size h={h!r}")
    return k


@dataclass(frozen=True)
class GridFunction:
    """Function represented by one value per lattice cell.

    dim     -- 1 or 2
    origin  -- lower corner of the bounding box, one coordinate per axis
    h       -- cell edge length (> 0)
    shape   -- cell counts per axis
    values  -- cell values, ndarray of shape ``shape`` (row-major)
    ext     -- values continuing the function outside the box on the
               low/high side of axis 0 (1D only; must be (0, 0) in 2D)
    """

    dim: int
    origin: tuple
    h: float
    shape: tuple
    values: np.ndarray
    ext: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DimensionError(f"dim must be 1 or 2, got {self.dim}")
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "ext", tuple(float(x) for x in self.ext))
        if len(self.origin) != self.dim or len(self.shape) != self.dim:
            raise DimensionError("origin/shape length must equal dim")
        if not (self.h > 0) or not math.isfinite(self.h):
            raise InvalidSpecError(f"h must be a positive real, got {self.h!r}")
        if any(n <= 0 for n in self.shape):
            raise InvalidSpecError(f"shape must be positive, got {self.shape}")
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if vals.size != int(np.prod(self.shape)):
            raise InvalidSpecError("values length must equal the product of shape")
        vals = vals.reshape(self.shape)
        if not np.all(np.isfinite(vals)):
            raise InvalidSpecError("values must all be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.dim == 2 and self.ext != (0.0, 0.0):
            raise InvalidSpecError("extension constants are only supported in 1D")
        if len(self.ext) != 2 or not all(math.isfinite(e) for e in self.ext):
            raise InvalidSpecError("ext must be two finite reals")

    @property
    def hi(self):
        return tuple(o + n * self.h for o, n in zip(self.origin, self.shape))

    @property
    def box(self):
        return tuple((o, o + n * self.h) for o, n in zip(self.origin, self.shape))

    def centers(self, axis=0):
        return self.origin[axis] + (np.arange(self.shape[axis]) + 0.5) * self.h

    def edges(self, axis=0):
        return self.origin[axis] + np.arange(self.shape[axis] + 1) * self.h

    def cell_measure(self):
        return self.h ** self.dim

    def mass(self):
        """Integral of the values over the bounding box."""
        return float(self.values.sum()) * self.cell_measure()

    def shifted(self, c):
        """The function plus a constant c (ext shifts with it)."""
        return GridFunction(
            self.dim, self.origin, self.h, self.shape, self.values + c,
            (self.ext[0] + c, self.ext[1] + c),
        )


def _same_lattice(f: GridFunction, g: GridFunction):
    if f.dim != g.dim:
        raise IncompatibleLatticeError("dimension mismatch")
    if abs(f.h - g.h) > 1e-12 * f.h:
        raise IncompatibleLatticeError(f"cell sizes differ: {f.h} vs {g.h}")
    offs = []
    for a in range(f.dim):
        d = (g.origin[a] - f.origin[a]) / f.h
        k = int(round(d))
        if abs(d - k) > 1e-9:
            raise IncompatibleLatticeError(
                f"origins differ by a non-integer number of cells on axis {a}"
            )
        offs.append(k)
    return offs


def _union_values(f: GridFunction, g: GridFunction):
    """Materialize both functions on the union index range (fill = ext/0).

    Returns (lo_world, A, B) where A, B are arrays on the common lattice.
    """
    offs = _same_lattice(f, g)
    h = f.h
    i0 = [min(0, o) for o in offs]
    i1 = [max(f.shape[a], offs[a] + g.shape[a]) for a in range(f.dim)]
    shape = tuple(i1[a] - i0[a] for a in range(f.dim))

    def place(src, shift):
        if src.dim == 1:
            out = np.full(shape, 0.0)
            out[: shift[0]] = src.ext[0]
            out[shift[0] + src.shape[0]:] = src.ext[1]
            out[shift[0]: shift[0] + src.shape[0]] = src.values
        else:
            out = np.zeros(shape)
            out[shift[0]: shift[0] + src.shape[0], shift[1]: shift[1] + src.shape[1]] = src.values
        return out

    fshift = [-i0[a] for a in range(f.dim)]
    gshift = [offs[a] - i0[a] for a in range(f.dim)]
    lo = tuple(f.origin[a] + i0[a] * h for a in range(f.dim))
    return lo, place(f, fshift), place(g, gshift)


def _axis_region_weights(lo, h, n, bounds):
    """Cell∩region overlap lengths along one axis, plus the measure of the
    region sticking out below/above the cell range."""
    edges = lo + np.arange(n + 1) * h
    if bounds is None:
        return np.full(n, h), math.inf, math.inf
    rlo, rhi = bounds
    w = np.clip(np.minimum(edges[1:], rhi) - np.maximum(edges[:-1], rlo), 0.0, None)
    below = max(0.0, min(rhi, edges[0]) - rlo)
    above = max(0.0, rhi - max(rlo, edges[-1]))
    return w, below, above


def l1_distance(f: GridFunction, g: GridFunction, region=None):
    """Exact integral of |f - g| over ``region`` (a per-axis bounds tuple)
    or over all of space when region is None."""
    lo, A, B = _union_values(f, g)
    D = np.abs(A - B)
    ext_d = (abs(f.ext[0] - g.ext[0]), abs(f.ext[1] - g.ext[1]))
    if f.dim == 1:
        w, below, above = _axis_region_weights(lo[0], f.h, D.shape[0], None if region is None else region[0])
        if region is None and (ext_d[0] > 0 or ext_d[1] > 0):
            return math.inf
        total = float(D @ w) if region is not None else float(D.sum()) * f.h
        total += ext_d[0] * (below if math.isfinite(below) else 0.0)
        total += ext_d[1] * (above if math.isfinite(above) else 0.0)
        if region is None:
            return float(D.sum()) * f.h
        return total
    bx = None if region is None else region[0]
    by = None if region is None else region[1]
    if region is None:
        return float(D.sum()) * f.h * f.h
    wx, _, _ = _axis_region_weights(lo[0], f.h, D.shape[0], bx)
    wy, _, _ = _axis_region_weights(lo[1], f.h, D.shape[1], by)
    return float(wx @ D @ wy)


def lp_norm(f: GridFunction, p, region=None):
    """(integral of |f|^p over region)^(1/p); region None means all of space."""
    if p < 1:
        raise InvalidSpecError(f"p must be >= 1, got {p}")
    V = np.abs(f.values) ** p
    if f.dim == 1:
        w, below, above = _axis_region_weights(f.origin[0], f.h, f.shape[0], None if region is None else region[0])
        if region is None:
            if f.ext[0] != 0 or f.ext[1] != 0:
                return math.inf
            return float(V.sum() * f.h) ** (1.0 / p)
        total = float(V @ w)
        total += abs(f.ext[0]) ** p * below + abs(f.ext[1]) ** p * above
        return total ** (1.0 / p)
    if region is None:
        return float(V.sum() * f.h * f.h) ** (1.0 / p)
    wx, _, _ = _axis_region_weights(f.origin[0], f.h, f.shape[0], region[0])
    wy, _, _ = _axis_region_weights(f.origin[1], f.h, f.shape[1], region[1])
    return float(wx @ V @ wy) ** (1.0 / p)


# ---------------------------------------------------------------------------
# Function catalog
# ---------------------------------------------------------------------------

_KINDS = (
    "constant", "ramp", "step", "sbv_combo", "gaussian_smooth", "cantor",
    "indicator_interval", "indicator_square", "indicator_disk",
    "checkerboard", "scaled_profile",
)


@dataclass(frozen=True)
class FunctionSpec:
    """Parameterized description of a catalog function.

    ``box`` is a per-axis (lo, hi) tuple; its widths must be multiples of h.
    ``params`` holds kind-specific reals (see the individual builders).
    """

    kind: str
    dim: int
    h: float
    box: tuple
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidSpecError(f"unknown kind {self.kind!r}")
        if self.dim not in (1, 2):
            raise DimensionError(f"dim must be 1 or 2, got {self.dim}")
        box = tuple((float(a), float(b)) for a, b in self.box)
        if len(box) != self.dim or any(b <= a for a, b in box):
            raise InvalidSpecError(f"invalid box {self.box!r}")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "params", dict(self.params))

    def to_json(self):
        return {
            "kind": self.kind,
            "dim": self.dim,
            "h": self.h,
            "box": [list(b) for b in self.box],
            "params": dict(self.params),
        }

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj["kind"], int(obj["dim"]), float(obj["h"]),
                   tuple(tuple(b) for b in obj["box"]), obj.get("params", {}))

    def decomposition(self):
        """Declared derivative-mass split (ac, jump, cantor) or None.

        The split is declared from the construction, not computed from a
        generic decomposition algorithm; jump-type kinds declare the exact
        grid variation of the generated function.
        """
        from .meshes import total_variation
        from .gamma import DecompositionSpec

        k = self.kind
        if k == "constant":
            if self.dim == 2 and self.params.get("c", 1.0) != 0.0:
                return DecompositionSpec(0.0, total_variation(generate(self)), 0.0)
            return DecompositionSpec(0.0, 0.0, 0.0)
        if k == "sbv_combo":
            return DecompositionSpec(float(self.params.get("ac_mass", 1.0)),
                                     float(self.params.get("jump_mass", 0.0)), 0.0)
        if k == "cantor":
            return DecompositionSpec(0.0, 0.0, 1.0)
        if k in ("indicator_interval", "indicator_square", "indicator_disk",
                 "checkerboard", "step"):
            return DecompositionSpec(0.0, total_variation(generate(self)), 0.0)
        if k in ("ramp", "gaussian_smooth"):
            f = generate(self)
            jump = abs(f.values.flat[0] - f.ext[0]) + abs(f.values.flat[-1] - f.ext[1]) if self.dim == 1 else 0.0
            tv = total_variation(f)
            if k == "ramp" and self.dim == 1:
                return DecompositionSpec(tv - jump, jump, 0.0)
            return DecompositionSpec(tv, 0.0, 0.0)
        return None


def _edge_grid(spec):
    lo = [b[0] for b in spec.box]
    n = []
    for a, (a0, a1) in enumerate(spec.box):
        k = int(round((a1 - a0) / spec.h))
        if k <= 0 or abs((a1 - a0) - k * spec.h) > 1e-9 * spec.h * max(1, k):
            raise InvalidSpecError(f"box width on axis {a} is not a multiple of h")
        n.append(k)
    return lo, n


def _smoothstep_primitive(x, x0, x1, height):
    """Antiderivative of the C^1 rise height*(3u^2-2u^3), u=(x-x0)/(x1-x0)."""
    L = x1 - x0
    u = np.clip((np.asarray(x, dtype=float) - x0) / L, 0.0, 1.0)
    F = height * L * (u ** 3 - 0.5 * u ** 4)
    F = F + height * np.clip(np.asarray(x, dtype=float) - x1, 0.0, None)
    return F


def _cell_avg_from_primitive(F_edges, h):
    return np.diff(F_edges) / h


def _step_avgs(edges, pos, height):
    frac = np.clip((edges[1:] - pos) / (edges[1:] - edges[:-1]), 0.0, 1.0)
    return height * frac


def _block_avgs(edges, a, b, height):
    """Cell averages of height * 1_[a, b)."""
    h = edges[1:] - edges[:-1]
    ov = np.clip(np.minimum(edges[1:], b) - np.maximum(edges[:-1], a), 0.0, None)
    return height * ov / h


def _cantor_values(u, level):
    """Level-`level` piecewise-linear staircase iterate evaluated at points
    u in [0, 1].  Slope (3/2)^level on kept thirds, flat on removed thirds."""
    u = np.asarray(u, dtype=float)
    val = np.zeros_like(u)
    scale = np.ones_like(u)
    t = u.copy()
    for _ in range(level):
        third = np.minimum(np.floor(t * 3.0), 2.0)
        mid = third == 1
        right = third == 2
        val = val + np.where(mid | right, scale * 0.5, 0.0)
        t = np.where(right, 3.0 * t - 2.0, 3.0 * t)
        scale = np.where(mid, 0.0, scale * 0.5)
        t = np.where(mid, 0.0, t)
    return val + scale * np.clip(t, 0.0, 1.0)


def _erf_vec(x):
    return np.vectorize(math.erf)(x)


def _gauss_axis_avgs(edges, c, sigma):
    """Exact cell averages of exp(-(x-c)^2 / (2 sigma^2)) along one axis."""
    F = sigma * math.sqrt(math.pi / 2.0) * _erf_vec((edges - c) / (sigma * math.sqrt(2.0)))
    return np.diff(F) / np.diff(edges)


def _profile_axis_avgs(edges, alpha, scale):
    """Exact cell averages of (x/scale)^(-alpha) * 1_(0, scale]."""
    a = np.clip(edges[:-1], 0.0, scale)
    b = np.clip(edges[1:], 0.0, scale)
    with np.errstate(invalid="ignore"):
        prim_a = np.where(a > 0, a ** (1.0 - alpha), 0.0)
        prim_b = np.where(b > 0, b ** (1.0 - alpha), 0.0)
    integral = scale ** alpha / (1.0 - alpha) * (prim_b - prim_a)
    return integral / np.diff(edges)


def _profile_cell_integral_2d(x0, x1, y0, y1, alpha, scale, depth=0):
    """Integral of |x|^(-alpha) * 1_{|x|<=scale} over a rectangle.

    Fixed 4x4 midpoint-refined quadrature away from the origin; dyadic
    subdivision near it, with a closed-form ball bound at the deepest level.
    """
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    w, hgt = x1 - x0, y1 - y0
    rmin = math.hypot(max(abs(cx) - 0.5 * w, 0.0), max(abs(cy) - 0.5 * hgt, 0.0))
    rmax = math.hypot(abs(cx) + 0.5 * w, abs(cy) + 0.5 * hgt)
    if rmin >= scale:
        return 0.0
    diag = 0.5 * math.hypot(w, hgt)
    if rmin > 2.0 * diag and rmax <= scale:
        xs = x0 + (np.arange(4) + 0.5) * w / 4.0
        ys = y0 + (np.arange(4) + 0.5) * hgt / 4.0
        R = np.hypot(xs[:, None], ys[None, :])
        vals = (R / scale) ** (-alpha)
        return float(vals.mean()) * w * hgt
    if depth >= 24:
        # tiny square containing or touching the origin: ball closed form
        return 2.0 * math.pi * scale ** alpha * rmax ** (2.0 - alpha) / (2.0 - alpha) / 4.0
    xm, ym = cx, cy
    return sum(
        _profile_cell_integral_2d(ax0, ax1, ay0, ay1, alpha, scale, depth + 1)
        for ax0, ax1 in ((x0, xm), (xm, x1))
        for ay0, ay1 in ((y0, ym), (ym, y1))
    )


def _param(spec, name, default=None):
    if name in spec.params:
        return float(spec.params[name])
    if default is None:
        raise InvalidSpecError(f"kind {spec.kind!r} requires parameter {name!r}")
    return float(default)


def generate(spec: FunctionSpec) -> GridFunction:
    """Instantiate a catalog function as an exact cell discretization.

    Piecewise-linear/smooth kinds are cell-averaged exactly through their
    antiderivatives; indicator kinds are cell-constant (1 iff the cell
    center lies inside the indicated set).  Deterministic: identical specs
    yield bit-identical grids.
    """
    lo, n = _edge_grid(spec)
    h = spec.h
    k = spec.kind
    ext = (0.0, 0.0)

    if spec.dim == 1:
        edges = lo[0] + np.arange(n[0] + 1) * h
        centers = 0.5 * (edges[:-1] + edges[1:])
        width = spec.box[0][1] - spec.box[0][0]
        if k == "constant":
            c = _param(spec, "c", 1.0)
            vals = np.full(n[0], c)
            ext = (c, c)  # a genuine constant on the whole line
        elif k == "ramp":
            slope = _param(spec, "slope", 1.0)
            vals = slope * (centers - lo[0])
        elif k == "step":
            height = _param(spec, "height", 1.0)
            pos = _param(spec, "position", lo[0] + 0.5 * width)
            vals = _step_avgs(edges, pos, height)
            if _param(spec, "clamp", 1.0) != 0.0:
                ext = (0.0, height)
        elif k == "sbv_combo":
            A = _param(spec, "ac_mass", 1.0)
            J = _param(spec, "jump_mass", 0.0)
            if A < 0 or J < 0:
                raise InvalidSpecError("sbv_combo masses must be nonnegative")
            b = [lo[0] + i * width / 16.0 for i in range(17)]
            if _param(spec, "clamp", 0.0) != 0.0:
                F = _smoothstep_primitive(edges, b[4], b[12], A)
                vals = _cell_avg_from_primitive(F, h) + _step_avgs(edges, b[13], J)
                ext = (0.0, A + J)
            else:
                up = _smoothstep_primitive(edges, b[2], b[4], A / 2.0)
                down = _smoothstep_primitive(edges, b[5], b[7], A / 2.0)
                vals = _cell_avg_from_primitive(up - down, h)
                vals = vals + _block_avgs(edges, b[10], b[13], J / 2.0)
        elif k == "gaussian_smooth":
            amp = _param(spec, "amp", 1.0)
            sigma = _param(spec, "sigma", width / 10.0)
            c = _param(spec, "center", lo[0] + 0.5 * width)
            vals = amp * _gauss_axis_avgs(edges, c, sigma)
        elif k == "cantor":
            level = int(_param(spec, "level"))
            if level < 1:
                raise InvalidSpecError("cantor level must be >= 1")
            if n[0] % 3 ** level != 0:
                raise ResolutionMismatchError(
                    f"cantor level {level} needs a resolution divisible by 3^{level}, got {n[0]} cells"
                )
            vals = _cantor_values((centers - lo[0]) / width, level)
            ext = (0.0, 1.0)
        elif k == "indicator_interval":
            a = _param(spec, "a")
            b = _param(spec, "b")
            if not (lo[0] < a < b < spec.box[0][1]):
                raise InvalidSpecError("interval endpoints must be strictly inside the box")
            vals = ((centers > a) & (centers < b)).astype(float)
        elif k == "checkerboard":
            tile = _param(spec, "tile")
            if tile <= 0:
                raise InvalidSpecError("tile must be positive")
            vals = (np.floor((centers - lo[0]) / tile).astype(int) % 2 == 0).astype(float)
        elif k == "scaled_profile":
            alpha = _param(spec, "alpha")
            scale = _param(spec, "scale", 1.0)
            if not (0 < alpha < 1):
                raise InvalidSpecError("alpha must lie in (0, 1) in 1D")
            if scale <= 0 or scale > spec.box[0][1] or lo[0] > 0:
                raise InvalidSpecError("profile support (0, scale] must lie inside the box")
            vals = _profile_axis_avgs(edges, alpha, scale)
        else:
            raise InvalidSpecError(f"kind {k!r} is not available in 1D")
        return GridFunction(1, (lo[0],), h, (n[0],), vals, ext)

    # dim == 2
    ex = lo[0] + np.arange(n[0] + 1) * h
    ey = lo[1] + np.arange(n[1] + 1) * h
    cx = 0.5 * (ex[:-1] + ex[1:])
    cy = 0.5 * (ey[:-1] + ey[1:])
    w0 = spec.box[0][1] - spec.box[0][0]
    w1 = spec.box[1][1] - spec.box[1][0]
    if k == "constant":
        vals = np.full((n[0], n[1]), _param(spec, "c", 1.0))
    elif k == "ramp":
        slope = _param(spec, "slope", 1.0)
        vals = np.broadcast_to((slope * (cx - lo[0]))[:, None], (n[0], n[1])).copy()
    elif k == "step":
        height = _param(spec, "height", 1.0)
        pos = _param(spec, "position", lo[0] + 0.5 * w0)
        vals = np.broadcast_to(_step_avgs(ex, pos, height)[:, None], (n[0], n[1])).copy()
    elif k == "gaussian_smooth":
        amp = _param(spec, "amp", 1.0)
        sigma = _param(spec, "sigma", min(w0, w1) / 10.0)
        c0 = _param(spec, "center_x", lo[0] + 0.5 * w0)
        c1 = _param(spec, "center_y", lo[1] + 0.5 * w1)
        vals = amp * np.outer(_gauss_axis_avgs(ex, c0, sigma), _gauss_axis_avgs(ey, c1, sigma))
    elif k == "indicator_square":
        c0 = _param(spec, "center_x", lo[0] + 0.5 * w0)
        c1 = _param(spec, "center_y", lo[1] + 0.5 * w1)
        side = _param(spec, "side")
        if side <= 0 or c0 - side / 2 <= lo[0] or c0 + side / 2 >= spec.box[0][1] \
                or c1 - side / 2 <= lo[1] or c1 + side / 2 >= spec.box[1][1]:
            raise InvalidSpecError("square must lie strictly inside the box")
        inx = np.abs(cx - c0) < side / 2
        iny = np.abs(cy - c1) < side / 2
        vals = (inx[:, None] & iny[None, :]).astype(float)
    elif k == "indicator_disk":
        c0 = _param(spec, "center_x", lo[0] + 0.5 * w0)
        c1 = _param(spec, "center_y", lo[1] + 0.5 * w1)
        r = _param(spec, "radius")
        if r <= 0 or c0 - r <= lo[0] or c0 + r >= spec.box[0][1] \
                or c1 - r <= lo[1] or c1 + r >= spec.box[1][1]:
            raise InvalidSpecError("disk must lie strictly inside the box")
        vals = ((cx[:, None] - c0) ** 2 + (cy[None, :] - c1) ** 2 < r * r).astype(float)
    elif k == "checkerboard":
        tile = _param(spec, "tile")
        if tile <= 0:
            raise InvalidSpecError("tile must be positive")
        px = np.floor((cx - lo[0]) / tile).astype(int)
        py = np.floor((cy - lo[1]) / tile).astype(int)
        vals = ((px[:, None] + py[None, :]) % 2 == 0).astype(float)
    elif k == "scaled_profile":
        alpha = _param(spec, "alpha")
        scale = _param(spec, "scale", 1.0)
        if not (0 < alpha < 2):
            raise InvalidSpecError("alpha must lie in (0, 2) in 2D")
        vals = np.zeros((n[0], n[1]))
        for i in range(n[0]):
            for j in range(n[1]):
                if math.hypot(max(abs(cx[i]) - h, 0), max(abs(cy[j]) - h, 0)) > scale:
                    continue
                vals[i, j] = _profile_cell_integral_2d(ex[i], ex[i + 1], ey[j], ey[j + 1], alpha, scale) / (h * h)
    else:
        raise InvalidSpecError(f"kind {k!r} is not available in 2D")
    return GridFunction(2, (lo[0], lo[1]), h, (n[0], n[1]), vals)


# ---------------------------------------------------------------------------
# Grid file I/O (self-describing text format, bit-exact round trip)
# ---------------------------------------------------------------------------

_MAGIC = "bmotv-grid v1"


def _fmt(x):
    return format(float(x), ".17g")


def write_grid(f: GridFunction, path):
    lines = [_MAGIC,
             f"dim {f.dim}",
             "origin " + " ".join(_fmt(x) for x in f.origin),
             f"h {_fmt(f.h)}",
             "shape " + " ".join(str(n) for n in f.shape)]
    if f.ext != (0.0, 0.0):
        lines.append("ext " + " ".join(_fmt(x) for x in f.ext))
    flat = f.values.reshape(-1)
    for i in range(0, flat.size, 8):
        lines.append(" ".join(_fmt(v) for v in flat[i: i + 8]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_floats(tokens, lineno):
    out = []
    for k, t in enumerate(tokens):
        try:
            out.append(float(t))
        except ValueError:
            raise GridParseError(f"expected a number, got {t!r}", line=lineno, field=k + 1)
    return out


def read_grid(path) -> GridFunction:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != _MAGIC:
        raise GridParseError(f"missing {_MAGIC!r} header", line=1)
    header = {}
    ext = (0.0, 0.0)
    i = 1
    order = ["dim", "origin", "h", "shape"]
    for key in order:
        if i >= len(lines):
            raise GridParseError(f"missing {key!r} line", line=i + 1)
        parts = lines[i].split()
        if not parts or parts[0] != key:
            raise GridParseError(f"expected {key!r} line", line=i + 1, field=1)
        header[key] = parts[1:]
        i += 1
    if i < len(lines) and lines[i].split()[:1] == ["ext"]:
        vals = _parse_floats(lines[i].split()[1:], i + 1)
        if len(vals) != 2:
            raise GridParseError("ext needs two values", line=i + 1)
        ext = (vals[0], vals[1])
        i += 1
    try:
        dim = int(header["dim"][0])
    except (IndexError, ValueError):
        raise GridParseError("bad dim value", line=2, field=2)
    if dim not in (1, 2):
        raise DimensionError(f"dimension-unsupported: {dim}")
    origin = _parse_floats(header["origin"], 3)
    hvals = _parse_floats(header["h"], 4)
    try:
        shape = [int(s) for s in header["shape"]]
    except ValueError:
        raise GridParseError("bad shape value", line=5)
    if len(origin) != dim or len(hvals) != 1 or len(shape) != dim:
        raise GridParseError("header lengths inconsistent with dim", line=2)
    values = []
    for lineno in range(i, len(lines)):
        toks = lines[lineno].split()
        values.extend(_parse_floats(toks, lineno + 1))
    need = int(np.prod(shape))
    if len(values) != need:
        raise GridParseError(f"expected {need} values, got {len(values)}", line=len(lines))
    return GridFunction(dim, tuple(origin), hvals[0], tuple(shape),
                        np.array(values).reshape(shape), ext)
