"""Certified lower-bound maximization over disjoint cube families.

All solvers score explicit feasible families, so every returned value is a
certified lower bound of the corresponding supremum; exactness claims are
always "over the candidate set".  Candidates are quantized to the cell
lattice (positions) and to finite angle sets (orientations); tie-breaking
is lexicographic in (center, angle) for bit-reproducibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cubes import Cube, CubeFamily, _squares_disjoint, family_score
from .errors import (
    BudgetExceededError,
    DimensionError,
    LatticeError,
    SupportError,
)
from .grid import GridFunction, lattice_multiple
from .meshes import mesh_cell_oscillations

__all__ = [
    "PackingSolution",
    "keps_1d_dp",
    "keps_lattice",
    "keps_greedy",
    "keps_oracle",
    "ieps",
    "bbm_seminorm",
    "solve_keps",
    "window_oscillations_1d",
]

_PRUNE_REL = 1e-14


@dataclass(frozen=True)
class PackingSolution:
    """A feasible disjoint family together with its score and provenance."""

    family: CubeFamily
    score: float
    solver: str
    candidate_step: float
    certified_exact_over_candidates: bool
    metadata: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "family": self.family.to_json(),
            "score": self.score,
            "solver": self.solver,
            "candidate_step": self.candidate_step,
            "certified_exact_over_candidates": self.certified_exact_over_candidates,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(CubeFamily.from_json(obj["family"]), float(obj["score"]),
                   obj["solver"], float(obj["candidate_step"]),
                   bool(obj["certified_exact_over_candidates"]),
                   dict(obj.get("metadata", {})))


# ---------------------------------------------------------------------------
# 1D window scoring and dynamic programming
# ---------------------------------------------------------------------------

def window_oscillations_1d(f: GridFunction, eps):
    """Oscillation of every lattice-start interval [a, a+eps) with a ranging
    over the bounding box inflated by eps.  Returns (starts, osc)."""
    if f.dim != 1:
        raise DimensionError("window oscillations are 1D only")
    m = lattice_multiple(eps, f.h, "eps")
    u = np.concatenate([np.full(m, f.ext[0]), f.values, np.full(m, f.ext[1])])
    n_win = u.size - m + 1
    starts = f.origin[0] - eps + np.arange(n_win) * f.h
    W = np.lib.stride_tricks.sliding_window_view(u, m)
    means = W.mean(axis=1)
    osc = np.empty(n_win)
    slab = max(1, 4_000_000 // m)
    for a in range(0, n_win, slab):
        b = min(n_win, a + slab)
        osc[a:b] = np.abs(W[a:b] - means[a:b, None]).mean(axis=1)
    return starts, osc


def _dp_max_weight(w, m):
    """Max-weight selection of pairwise-disjoint length-m windows.

    Returns (score, selected start indices); ties prefer taking the earlier
    window (lexicographically smallest centers), zero-weight windows are
    never taken.
    """
    n = len(w)
    dp = np.zeros(n + m)
    take = np.zeros(n, dtype=bool)
    for i in range(n - 1, -1, -1):
        t = w[i] + dp[i + m]
        s = dp[i + 1]
        if t > s or (t == s and w[i] > 0.0):
            dp[i] = t
            take[i] = True
        else:
            dp[i] = s
    chosen = []
    i = 0
    while i < n:
        if take[i]:
            chosen.append(i)
            i += m
        else:
            i += 1
    return float(dp[0]), chosen


def _dp_max_weight_capped(w, m, cap):
    """Cardinality-capped variant of the disjoint-window DP."""
    n = len(w)
    dp = np.zeros((cap + 1, n + m))
    take = np.zeros((cap + 1, n), dtype=bool)
    for c in range(1, cap + 1):
        dpc = dp[c]
        dpp = dp[c - 1]
        tkc = take[c]
        for i in range(n - 1, -1, -1):
            t = w[i] + dpp[i + m]
            s = dpc[i + 1]
            if t > s or (t == s and w[i] > 0.0):
                dpc[i] = t
                tkc[i] = True
            else:
                dpc[i] = s
    chosen = []
    i, c = 0, cap
    while i < n and c > 0:
        if take[c, i]:
            chosen.append(i)
            i += m
            c -= 1
        else:
            i += 1
    return float(dp[cap, 0]), chosen


def _family_1d(starts, indices, eps):
    cubes = tuple(Cube((starts[i] + 0.5 * eps,), eps) for i in sorted(indices))
    return CubeFamily(cubes, eps, "axis_aligned")


def keps_1d_dp(f: GridFunction, eps, cap=None, start_range=None) -> PackingSolution:
    """Exact maximum (over lattice-start intervals) of the summed interval
    oscillations of disjoint eps-intervals, by dynamic programming."""
    if f.dim != 1:
        raise DimensionError("keps_1d_dp requires a 1D function")
    m = lattice_multiple(eps, f.h, "eps")
    starts, w = window_oscillations_1d(f, eps)
    if start_range is not None:
        tol = 1e-9 * f.h
        keep = (starts >= start_range[0] - tol) & (starts <= start_range[1] + tol)
        first = int(np.argmax(keep)) if keep.any() else 0
        count = int(keep.sum())
        starts = starts[first: first + count]
        w = w[first: first + count]
    if cap is None:
        score, chosen = _dp_max_weight(w, m)
    else:
        score, chosen = _dp_max_weight_capped(w, m, cap)
    meta = {} if cap is None else {"cap": cap}
    return PackingSolution(_family_1d(starts, chosen, eps), score,
                           "dp1d", f.h, True, meta)


# ---------------------------------------------------------------------------
# Lattice partition families
# ---------------------------------------------------------------------------

def _as_tau(offset, dim):
    if np.isscalar(offset):
        return (float(offset),) * dim
    t = tuple(float(x) for x in offset)
    if len(t) != dim:
        raise LatticeError(f"offset {offset!r} has wrong dimension")
    return t


def keps_lattice(f: GridFunction, eps, offsets=None, pitch=None) -> PackingSolution:
    """Score the full eps-mesh partition for each offset and return the best.

    The returned family is the mesh restricted to cells meeting the bounding
    box; the score is a lower bound of the unrestricted supremum.
    """
    lattice_multiple(eps, f.h, "eps")
    pref = 1.0 if f.dim == 1 else eps
    if offsets is None:
        offsets = [(0.0,) * f.dim]
    best = None
    per_offset = {}
    for off in offsets:
        tau = _as_tau(off, f.dim)
        osc, origin = mesh_cell_oscillations(f, eps, tau)
        score = pref * float(osc.sum())
        per_offset[str(tuple(round(t, 15) for t in tau))] = score
        if best is None or score > best[0]:
            best = (score, tau, osc, origin)
    score, tau, osc, origin = best
    if f.dim == 1:
        cubes = tuple(Cube((origin[0] + (i + 0.5) * eps,), eps)
                      for i in range(osc.shape[0]))
    else:
        cubes = tuple(Cube((origin[0] + (i + 0.5) * eps, origin[1] + (j + 0.5) * eps), eps)
                      for i in range(osc.shape[0]) for j in range(osc.shape[1]))
    family = CubeFamily(cubes, eps, "axis_aligned")
    meta = {"tau": list(tau), "offset_scores": per_offset}
    return PackingSolution(family, score, "lattice",
                           pitch if pitch is not None else eps, False, meta)


# ---------------------------------------------------------------------------
# Candidate generation for greedy / branch-and-bound
# ---------------------------------------------------------------------------

_SRC_AXIS, _SRC_FIXED, _SRC_INTERFACE = 1, 2, 4


@dataclass
class _CandidateSet:
    centers: np.ndarray   # (N, dim)
    angles: np.ndarray    # (N,)
    osc: np.ndarray       # (N,)
    lattice_idx: np.ndarray  # (N, dim) pitch-lattice indices
    source: np.ndarray    # (N,) orientation-source bitmask (merged on dedupe)
    pitch: float
    meta: dict

    def subset(self, mask):
        return _CandidateSet(self.centers[mask], self.angles[mask], self.osc[mask],
                             self.lattice_idx[mask], self.source[mask],
                             self.pitch, self.meta)


def _jump_indicator_sat(f: GridFunction):
    """Summed-area table of the cells-adjacent-to-a-jump indicator (box-edge
    jumps against the zero extension included)."""
    v = f.values if f.dim == 2 else f.values[:, None]
    d0 = np.abs(np.diff(np.pad(v, ((1, 1), (0, 0))), axis=0))
    d1 = np.abs(np.diff(np.pad(v, ((0, 0), (1, 1))), axis=1))
    J = (d0[:-1, :] + d0[1:, :] + d1[:, :-1] + d1[:, 1:]) > 0
    S = np.zeros((J.shape[0] + 1, J.shape[1] + 1), dtype=np.int64)
    S[1:, 1:] = np.cumsum(np.cumsum(J, axis=0), axis=1)
    return S


def _sat_any(S, f, x0, x1, y0, y1):
    """Vectorized: does [x0,x1]x[y0,y1] contain any jump-adjacent cell?
    Accepts scalars or equal-shaped arrays."""
    h = f.h
    i0 = np.clip(np.floor((np.asarray(x0) - f.origin[0]) / h), 0, f.shape[0]).astype(int)
    i1 = np.clip(np.ceil((np.asarray(x1) - f.origin[0]) / h), 0, f.shape[0]).astype(int)
    oy = f.origin[1] if f.dim == 2 else 0.0
    ny = f.shape[1] if f.dim == 2 else 1
    j0 = np.clip(np.floor((np.asarray(y0) - oy) / h), 0, ny).astype(int)
    j1 = np.clip(np.ceil((np.asarray(y1) - oy) / h), 0, ny).astype(int)
    count = S[i1, j1] - S[i0, j1] - S[i1, j0] + S[i0, j0]
    return (count > 0) & (i1 > i0) & (j1 > j0)


def _interface_angles(f: GridFunction, width=3):
    """Gradient-orientation estimate per cell (radians, mod pi/2), computed
    from a box-smoothed field; NaN where there is no local variation.
    ``width`` trades orientation accuracy against feature blurring."""
    v = f.values
    k = np.ones(width) / width
    p = width // 2 + 1
    sm = np.apply_along_axis(np.convolve, 0, np.pad(v, p, mode="edge"), k, "same")
    sm = np.apply_along_axis(np.convolve, 1, sm, k, "same")[p:-p, p:-p]
    gx = np.zeros_like(v)
    gy = np.zeros_like(v)
    gx[1:-1, :] = sm[2:, :] - sm[:-2, :]
    gy[:, 1:-1] = sm[:, 2:] - sm[:, :-2]
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx) % (math.pi / 2.0)
    ang[mag == 0] = np.nan
    return ang


def _axis_block_osc_2d(f: GridFunction, lows, m):
    """Oscillation of axis-aligned m*m-cell windows with lower corners at
    lattice positions ``lows`` (N, 2 ints into the padded array frame)."""
    pad = m + 2
    VP = np.pad(f.values, pad)
    S = np.zeros((VP.shape[0] + 1, VP.shape[1] + 1))
    S[1:, 1:] = np.cumsum(np.cumsum(VP, axis=0), axis=1)
    bx = lows[:, 0] + pad
    by = lows[:, 1] + pad
    sums = (S[bx + m, by + m] - S[bx, by + m] - S[bx + m, by] + S[bx, by])
    means = sums / (m * m)
    osc = np.empty(len(lows))
    win_view = np.lib.stride_tricks.sliding_window_view(VP, (m, m))
    chunk = max(1, 2_000_000 // (m * m))
    for a in range(0, len(lows), chunk):
        b = min(len(lows), a + chunk)
        Wn = win_view[bx[a:b], by[a:b]]
        osc[a:b] = np.abs(Wn - means[a:b, None, None]).mean(axis=(1, 2))
    return osc


def build_candidates(f: GridFunction, eps, pitch=None, rotations=False,
                     n_angles=8, angle_source="both") -> _CandidateSet:
    """Candidate cubes on a pitch lattice anchored at the box corner,
    restricted (exactly) to cubes that can have positive oscillation.

    Axis-aligned candidates are always generated; with ``rotations`` a fixed
    uniform angle set and/or local interface orientations are added at the
    same centers."""
    m = lattice_multiple(eps, f.h, "eps")
    if pitch is None:
        pitch = f.h
    pm = lattice_multiple(pitch, f.h, "pitch")
    meta = {"pitch": pitch, "rotations": bool(rotations),
            "angle_source": angle_source if rotations else None,
            "n_angles": n_angles if rotations else None}

    if f.dim == 1:
        starts, osc = window_oscillations_1d(f, eps)
        keep = np.arange(0, len(starts), pm)
        starts, osc = starts[keep], osc[keep]
        centers = (starts + 0.5 * eps)[:, None]
        cand = _CandidateSet(centers, np.zeros(len(starts)), osc,
                             keep[:, None] // pm,
                             np.full(len(starts), _SRC_AXIS, np.int8),
                             pitch, meta)
        return _prune(cand)

    # pitch lattice of centers covering the box inflated by eps/2
    anchor = [f.origin[a] - 0.5 * eps for a in range(2)]
    counts = [int(math.floor((f.hi[a] + 0.5 * eps - anchor[a]) / pitch + 1e-9)) + 1
              for a in range(2)]
    cx = anchor[0] + np.arange(counts[0]) * pitch
    cy = anchor[1] + np.arange(counts[1]) * pitch
    IX, IY = np.meshgrid(np.arange(counts[0]), np.arange(counts[1]), indexing="ij")
    CX, CY = np.meshgrid(cx, cy, indexing="ij")
    centers = np.column_stack([CX.ravel(), CY.ravel()])
    lattice_idx = np.column_stack([IX.ravel(), IY.ravel()])

    # keep only centers whose cube neighborhood can contain a jump
    S = _jump_indicator_sat(f)
    rad = 0.5 * eps * math.sqrt(2.0) + f.h
    keep = _sat_any(S, f, centers[:, 0] - rad, centers[:, 0] + rad,
                    centers[:, 1] - rad, centers[:, 1] + rad)
    centers = centers[keep]
    lattice_idx = lattice_idx[keep]

    all_centers = [centers]
    all_angles = [np.zeros(len(centers))]
    all_idx = [lattice_idx]
    all_src = [np.full(len(centers), _SRC_AXIS, np.int8)]
    if rotations:
        angle_lists = []
        if angle_source in ("fixed", "both"):
            angle_lists.extend(k * math.pi / (2.0 * n_angles) for k in range(1, n_angles))
        for ang in angle_lists:
            all_centers.append(centers)
            all_angles.append(np.full(len(centers), ang))
            all_idx.append(lattice_idx)
            all_src.append(np.full(len(centers), _SRC_FIXED, np.int8))
        if angle_source in ("interface", "both"):
            width = min(9, max(3, (m // 2) | 1))
            ang_map = _interface_angles(f, width)
            ii = np.clip(((centers[:, 0] - f.origin[0]) / f.h).astype(int), 0, f.shape[0] - 1)
            jj = np.clip(((centers[:, 1] - f.origin[1]) / f.h).astype(int), 0, f.shape[1] - 1)
            a = ang_map[ii, jj]
            # quantize to pi/512 (well under the estimator noise) so equal
            # angles share one overlap stencil in the batched scorers
            a = (np.round(a * (512.0 / math.pi)) * (math.pi / 512.0)) % (math.pi / 2.0)
            ok = ~np.isnan(a)
            if ok.any():
                all_centers.append(centers[ok])
                all_angles.append(a[ok])
                all_idx.append(lattice_idx[ok])
                all_src.append(np.full(ok.sum(), _SRC_INTERFACE, np.int8))

    centers = np.concatenate(all_centers)
    angles = np.concatenate(all_angles)
    lattice_idx = np.concatenate(all_idx)
    source = np.concatenate(all_src)

    # dedupe exact (center, angle) duplicates, merging their source flags so
    # orientation-pure subsets stay gap-free where sources coincide
    order = np.lexsort((angles, centers[:, 1], centers[:, 0]))
    centers, angles = centers[order], angles[order]
    lattice_idx, source = lattice_idx[order], source[order]
    if len(centers):
        new = np.ones(len(centers), bool)
        new[1:] = np.any(np.diff(centers, axis=0) != 0, axis=1) | (np.diff(angles) != 0)
        starts = np.nonzero(new)[0]
        source = np.bitwise_or.reduceat(source, starts)
        centers, angles, lattice_idx = centers[new], angles[new], lattice_idx[new]

    osc = np.empty(len(centers))
    ax = angles == 0.0
    if ax.any():
        lows = np.column_stack([
            np.round((centers[ax, 0] - 0.5 * eps - f.origin[0]) / f.h).astype(int),
            np.round((centers[ax, 1] - 0.5 * eps - f.origin[1]) / f.h).astype(int)])
        osc[ax] = _axis_block_osc_2d(f, lows, m)
    if (~ax).any():
        osc[~ax] = kernels.impl.batch_osc(
            f.values, f.origin[0], f.origin[1], f.h,
            np.ascontiguousarray(centers[~ax]), eps,
            np.ascontiguousarray(angles[~ax]))
    return _prune(_CandidateSet(centers, angles, osc, lattice_idx, source, pitch, meta))


def _prune(cand: _CandidateSet) -> _CandidateSet:
    if len(cand.osc) == 0:
        return cand
    thr = _PRUNE_REL * float(cand.osc.max())
    return cand.subset(cand.osc > max(thr, 0.0))


def _decimated(cand: _CandidateSet, level):
    step = 1 << level
    keep = np.all(cand.lattice_idx % step == 0, axis=1)
    return keep


def _selection_order(centers, angles, osc, dim, mode="osc", sweep_center=None, h=None):
    """Candidate processing order.  "osc": highest oscillation first, ties
    by lexicographic center then smaller angle (the core greedy rule).
    "sweep": two angular walks around ``sweep_center`` (well-centered cubes
    first, then gap fillers), best oscillation within a bin first; packs
    curved interfaces without the fragmentation that oscillation-noise
    ordering causes."""
    if mode == "sweep" and dim == 2:
        d = centers - np.asarray(sweep_center)
        th = np.arctan2(d[:, 1], d[:, 0])
        rmax = float(np.hypot(d[:, 0], d[:, 1]).max())
        binw = 2.0 * h / rmax if rmax > 0 else 1.0
        bins = np.floor(th / binw).astype(np.int64)
        low_tier = (osc < 0.95 * float(osc.max())).astype(np.int8)
        return np.lexsort((angles, centers[:, 1], centers[:, 0], -osc, bins, low_tier))
    if dim == 1:
        return np.lexsort((angles, centers[:, 0], -osc))
    return np.lexsort((angles, centers[:, 1], centers[:, 0], -osc))


def _greedy_select(centers, angles, osc, eps, dim, order=None):
    """Accept candidates in ``order`` (default: highest oscillation first)
    whenever disjoint from everything already accepted."""
    if order is None:
        order = _selection_order(centers, angles, osc, dim)
    s = 0.5 * eps
    diam = eps * math.sqrt(2.0)
    buckets = {}
    chosen = []
    for k in order:
        c = centers[k]
        if dim == 1:
            key = (int(math.floor(c[0] / diam)),)
            neigh = [(key[0] + d,) for d in (-1, 0, 1)]
        else:
            key = (int(math.floor(c[0] / diam)), int(math.floor(c[1] / diam)))
            neigh = [(key[0] + dx, key[1] + dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)]
        ok = True
        for nk in neigh:
            for j in buckets.get(nk, ()):
                if dim == 1:
                    if abs(centers[j][0] - c[0]) < eps - 1e-12:
                        ok = False
                        break
                elif not _squares_disjoint(c, angles[k], centers[j], angles[j], s):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            buckets.setdefault(key, []).append(k)
            chosen.append(k)
    return chosen


def _family_from(centers, angles, eps, indices, dim):
    idx = sorted(indices, key=lambda k: (tuple(centers[k]), angles[k]))
    cubes = tuple(Cube(tuple(centers[k]), eps, angles[k]) for k in idx)
    mode = "axis_aligned" if all(angles[k] == 0.0 for k in idx) else "rotated"
    return CubeFamily(cubes, eps, mode)


def keps_greedy(f: GridFunction, eps, pitch=None, rotations=False,
                n_angles=8, angle_source="both", cap=None,
                candidates=None) -> PackingSolution:
    """Greedy lower bound over the candidate set.

    The highest-oscillation-first selection runs on a deterministic
    portfolio of candidate subsets (all candidates, per orientation source,
    and nested pitch decimations of each) and the best feasible family
    wins.  Oscillation alone cannot see packing efficiency (every interface
    straddle scores about the same), so orientation-pure subsets let
    aligned cubes tile the interface; the decimation cascade makes halving
    the pitch (a candidate superset) never decrease the score.
    """
    cand = candidates if candidates is not None else build_candidates(
        f, eps, pitch, rotations, n_angles, angle_source)
    pref = 1.0 if f.dim == 1 else eps
    groups = [("all", np.ones(len(cand.osc), bool), "osc")]
    if rotations and f.dim == 2:
        for flag, name in ((_SRC_AXIS, "axis"), (_SRC_FIXED, "fixed"),
                           (_SRC_INTERFACE, "interface")):
            mask = (cand.source & flag) > 0
            if mask.any():
                groups.append((name, mask, "osc"))
                if flag == _SRC_INTERFACE:
                    groups.append((name + "-sweep", mask, "sweep"))
    sweep_center = None
    if f.dim == 2 and len(cand.osc):
        im = (cand.source & _SRC_INTERFACE) > 0
        base = cand.centers[im] if im.any() else cand.centers
        sweep_center = base.mean(axis=0)
    best_idx, best_score, best_run = [], 0.0, None
    levels = [0]
    lvl = 1
    while len(cand.osc) >> (f.dim * lvl) > 64 and lvl <= 8:
        levels.append(lvl)
        lvl += 1
    for name, gmask, mode in groups:
        for level in reversed(levels):  # coarse first; finer wins ties
            mask = gmask & _decimated(cand, level) if level else gmask
            if not mask.any():
                continue
            sub = np.nonzero(mask)[0]
            order = _selection_order(cand.centers[sub], cand.angles[sub],
                                     cand.osc[sub], f.dim, mode, sweep_center, f.h)
            chosen = _greedy_select(cand.centers[sub], cand.angles[sub],
                                    cand.osc[sub], eps, f.dim, order)
            if cap is not None:
                chosen = chosen[:cap]
            score = pref * float(cand.osc[sub[chosen]].sum())
            if score >= best_score:
                best_idx, best_score = list(sub[chosen]), score
                best_run = (name, level)
    family = _family_from(cand.centers, cand.angles, eps, best_idx, f.dim)
    meta = dict(cand.meta)
    meta["candidates"] = len(cand.osc)
    meta["cascade_levels"] = levels
    meta["winning_subset"] = list(best_run) if best_run else None
    if cap is not None:
        meta["cap"] = cap
    return PackingSolution(family, best_score, "greedy", cand.pitch, False, meta)


def _conflict_masks(centers, angles, eps, dim):
    n = len(centers)
    masks = [0] * n
    s = 0.5 * eps
    for i in range(n):
        for j in range(i + 1, n):
            if dim == 1:
                clash = abs(centers[i][0] - centers[j][0]) < eps - 1e-12
            else:
                clash = not _squares_disjoint(centers[i], angles[i],
                                              centers[j], angles[j], s)
            if clash:
                masks[i] |= 1 << j
                masks[j] |= 1 << i
    return masks


def _clique_suffix_bound(centers, w, eps, dim):
    """Admissible tail bound: candidates whose centers share a tile of
    diameter < eps pairwise overlap (their inscribed disks do), so each tile
    contributes at most its maximum remaining weight."""
    side = (eps if dim == 1 else eps / math.sqrt(2.0)) * (1 - 1e-12)
    keys = {}
    ids = np.empty(len(w), dtype=np.int64)
    for k in range(len(w)):
        key = tuple(int(math.floor(c / side)) for c in centers[k])
        ids[k] = keys.setdefault(key, len(keys))
    best = np.zeros(len(keys))
    out = np.empty(len(w) + 1)
    out[len(w)] = 0.0
    total = 0.0
    for i in range(len(w) - 1, -1, -1):
        c = ids[i]
        if w[i] > best[c]:
            total += w[i] - best[c]
            best[c] = w[i]
        out[i] = total
    return out


def keps_oracle(f: GridFunction, eps, pitch=None, rotations=False,
                n_angles=8, angle_source="both", budget=1 << 20,
                cap=None, candidates=None) -> PackingSolution:
    """Exact maximum over the candidate set by depth-first branch-and-bound.

    Pruning uses the remaining-candidate-sum bound tightened by a clique
    cover (tiles of diameter below eps are pairwise conflicting)."""
    cand = candidates if candidates is not None else build_candidates(
        f, eps, pitch, rotations, n_angles, angle_source)
    pref = 1.0 if f.dim == 1 else eps
    n = len(cand.osc)
    if n == 0:
        return PackingSolution(CubeFamily((), eps), 0.0, "oracle",
                               cand.pitch, True, dict(cand.meta))
    if f.dim == 1:
        order = np.lexsort((cand.centers[:, 0], -cand.osc))
    else:
        order = np.lexsort((cand.centers[:, 1], cand.centers[:, 0], -cand.osc))
    centers = cand.centers[order]
    angles = cand.angles[order]
    w = cand.osc[order]
    suffix = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    suffix = np.minimum(suffix, _clique_suffix_bound(centers, w, eps, f.dim))
    conflict = _conflict_masks(centers, angles, eps, f.dim)

    full = (1 << n) - 1
    # warm start: the greedy family seeds the incumbent
    seed = _greedy_select(centers, angles, w, eps, f.dim)
    if cap is not None:
        seed = seed[:cap]
    best_score = float(w[seed].sum())
    best_mask = 0
    for i in seed:
        best_mask |= 1 << int(i)
    nodes = 0
    stack = [(full, 0.0, 0, 0)]  # avail, score, chosen mask, chosen count
    while stack:
        avail, score, chosen, count = stack.pop()
        nodes += 1
        if nodes > budget:
            raise BudgetExceededError(f"search exceeded {budget} nodes")
        if score > best_score:
            best_score, best_mask = score, chosen
        if not avail or (cap is not None and count >= cap):
            continue
        i = (avail & -avail).bit_length() - 1
        bound = suffix[i]
        if cap is not None:
            bound = min(bound, (cap - count) * w[i])
        if score + bound <= best_score * (1 + 1e-15):
            continue
        bit = 1 << i
        stack.append((avail & ~bit, score, chosen, count))
        stack.append((avail & ~conflict[i] & ~bit, score + w[i], chosen | bit, count + 1))
    idx = [i for i in range(n) if best_mask >> i & 1]
    family = _family_from(centers, angles, eps, idx, f.dim)
    meta = dict(cand.meta)
    meta.update(candidates=n, nodes=nodes)
    if cap is not None:
        meta["cap"] = cap
    return PackingSolution(family, pref * best_score, "oracle",
                           cand.pitch, True, meta)


def _cardinality_cap(eps, dim):
    return max(1, int(math.floor(eps ** (1 - dim) + 1e-9)))


def ieps(f: GridFunction, eps, solver="dp1d", **opts):
    """The cardinality-capped score: cap = floor(eps^(1-dim)), at least 1."""
    cap = _cardinality_cap(eps, f.dim)
    if solver == "dp1d":
        sol = keps_1d_dp(f, eps, cap=cap)
    elif solver == "greedy":
        sol = keps_greedy(f, eps, cap=cap, **opts)
    elif solver == "oracle":
        sol = keps_oracle(f, eps, cap=cap, **opts)
    else:
        raise ValueError(f"unknown capped solver {solver!r}")
    return sol.score


def bbm_seminorm(f: GridFunction, eps, solver=None, pitch=None, **opts):
    """Capped, axis-aligned-only maximization over cubes contained in the
    unit box (0,1)^dim; the function must be supported there."""
    if f.ext != (0.0, 0.0):
        raise SupportError("function must be compactly supported in the unit box")
    nz = np.nonzero(f.values)
    tol = 1e-9 * f.h
    for a in range(f.dim):
        if nz[0].size == 0:
            break
        lo_edge = f.origin[a] + nz[a].min() * f.h
        hi_edge = f.origin[a] + (nz[a].max() + 1) * f.h
        if lo_edge < -tol or hi_edge > 1.0 + tol:
            raise SupportError("support-outside-Q0")
    k = round(1.0 / eps)
    if abs(1.0 / eps - k) > 1e-9:
        raise LatticeError(f"1/eps must be an integer, got eps={eps!r}")
    lattice_multiple(eps, f.h, "eps")
    cap = _cardinality_cap(eps, f.dim)
    if f.dim == 1:
        sol = keps_1d_dp(f, eps, cap=cap, start_range=(0.0, 1.0 - eps))
        return PackingSolution(sol.family, sol.score, "bbm-dp1d", f.h, True,
                               {"cap": cap})
    cand = build_candidates(f, eps, pitch=pitch, rotations=False)
    s = 0.5 * eps
    inside = np.all((cand.centers - s >= -tol) & (cand.centers + s <= 1.0 + tol), axis=1)
    cand = _CandidateSet(cand.centers[inside], cand.angles[inside], cand.osc[inside],
                         cand.lattice_idx[inside], cand.pitch, cand.meta)
    if solver == "oracle":
        sol = keps_oracle(f, eps, cap=cap, candidates=cand)
        name = "bbm-oracle"
    else:
        sol = keps_greedy(f, eps, cap=cap, candidates=cand)
        name = "bbm-greedy"
    return PackingSolution(sol.family, sol.score, name, sol.candidate_step,
                           sol.certified_exact_over_candidates, sol.metadata)


def solve_keps(f: GridFunction, eps, solver="dp1d", **opts) -> PackingSolution:
    """Dispatch to one of the lower-bound solvers by name."""
    if solver == "dp1d":
        return keps_1d_dp(f, eps)
    if solver == "lattice":
        offsets = opts.pop("offsets", None)
        if offsets is None:
            p = opts.pop("pitch", None) or eps / 2.0
            k = max(1, int(round(eps / p)))
            if f.dim == 1:
                offsets = [(i * eps / k,) for i in range(k)]
            else:
                offsets = [(i * eps / k, j * eps / k) for i in range(k) for j in range(k)]
            return keps_lattice(f, eps, offsets, pitch=p)
        return keps_lattice(f, eps, offsets, pitch=opts.pop("pitch", None))
    if solver == "greedy":
        return keps_greedy(f, eps, **opts)
    if solver == "oracle":
        return keps_oracle(f, eps, **opts)
    raise ValueError(f"unknown solver {solver!r}")
