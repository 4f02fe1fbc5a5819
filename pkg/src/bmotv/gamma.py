"""Convergence sweeps, inequality verifiers, recovery construction, and the
compactness / non-compactness demonstrations.

Every check is one-sided in the safe direction: solver scores are certified
lower bounds realized by explicit families, so upper-bound inequalities use
explicit partition families and lower-bound inequalities use achieved
scores.  Randomized suites are seeded and deterministic.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cubes import Cube, CubeFamily, family_score
from .errors import DimensionError, InvalidSpecError, LatticeError
from .grid import FunctionSpec, GridFunction, generate, l1_distance, lp_norm, lattice_multiple
from .meshes import mesh_cell_oscillations, mollify, project, total_variation
from .packing import keps_1d_dp, keps_greedy, solve_keps

__all__ = [
    "DecompositionSpec",
    "CheckReport",
    "SweepRow",
    "SweepReport",
    "sweep_keps",
    "verify_lemma_1d",
    "verify_lemma_nd",
    "verify_eps_close",
    "verify_halving",
    "verify_convolution_monotonicity",
    "recovery_sequence",
    "run_lemma_suite",
    "compactness_demo",
    "remark_counterexample",
    "random_piecewise_constant",
    "random_disjoint_family",
]

_REL = 1e-9


@dataclass(frozen=True)
class DecompositionSpec:
    """Declared split of the derivative mass into absolutely continuous,
    jump, and staircase (Cantor-type) parts."""

    ac: float
    jump: float
    cantor: float

    def __post_init__(self):
        if min(self.ac, self.jump, self.cantor) < 0:
            raise InvalidSpecError("derivative masses must be nonnegative")

    @property
    def total(self):
        return self.ac + self.jump + self.cantor

    def pointwise_limit(self):
        """Quarter of the absolutely continuous mass plus half the jump mass."""
        return 0.25 * self.ac + 0.5 * self.jump


@dataclass
class CheckReport:
    name: str
    quantities: dict
    passed: bool
    worst_slack: float


def _leq(lhs, rhs, rel=_REL):
    """lhs <= rhs up to a relative tolerance (with a unit floor so that
    roundoff on O(1) sums cannot trip near-zero comparisons)."""
    tol = rel * max(abs(lhs), abs(rhs), 1.0)
    return lhs <= rhs + tol, lhs - rhs


def _combine(name, pairs):
    passed = all(ok for ok, _ in pairs.values())
    worst = max(sl for _, sl in pairs.values())
    return passed, worst


# ---------------------------------------------------------------------------
# Inequality verifiers
# ---------------------------------------------------------------------------

def _pairing_quantities(w: GridFunction, delta):
    """Projection variation and the two shifted coarse-partition oscillation
    sums that bound it (S1: aligned, S2: shifted by delta per axis)."""
    n = w.dim
    two = 2.0 * delta
    proj = project(w, delta)
    tv_proj = total_variation(proj)
    pref = two ** (n - 1)
    osc1, _ = mesh_cell_oscillations(w, two, (0.0,) * n)
    osc2, _ = mesh_cell_oscillations(w, two, (delta,) * n)
    s1 = pref * float(osc1.sum())
    s2 = pref * float(osc2.sum())
    return tv_proj, s1, s2


def verify_lemma_1d(w: GridFunction, delta) -> CheckReport:
    """1D: the variation of the delta-average projection is at most 4 times
    the best of the two paired-interval oscillation sums at scale 2*delta
    (each pairing is itself a feasible disjoint family)."""
    if w.dim != 1:
        raise DimensionError("verify_lemma_1d requires a 1D function")
    lattice_multiple(delta, w.h, "delta")
    tv_proj, s1, s2 = _pairing_quantities(w, delta)
    khat = max(s1, s2)
    checks = {
        "tv_le_2_sum": _leq(tv_proj, 2.0 * (s1 + s2)),
        "2_sum_le_4_max": _leq(2.0 * (s1 + s2), 4.0 * 2.0 * khat),
        "tv_le_4_khat": _leq(tv_proj, 4.0 * khat),
    }
    passed, worst = _combine("lemma_1d", checks)
    return CheckReport("lemma_1d", {
        "delta": delta, "tv_projection": tv_proj, "s1": s1, "s2": s2,
        "khat_2delta": khat,
    }, passed, worst)


def verify_lemma_nd(w: GridFunction, delta) -> CheckReport:
    """Any dimension: variation of the delta projection is at most
    2n*(S1+S2) <= 4n * max(S1, S2), the latter a feasible-family bound."""
    lattice_multiple(delta, w.h, "delta")
    n = w.dim
    tv_proj, s1, s2 = _pairing_quantities(w, delta)
    khat = max(s1, s2)
    checks = {
        "tv_le_2n_sum": _leq(tv_proj, 2.0 * n * (s1 + s2)),
        "tv_le_4n_khat": _leq(tv_proj, 4.0 * n * khat),
    }
    passed, worst = _combine("lemma_nd", checks)
    return CheckReport("lemma_nd", {
        "delta": delta, "dim": n, "tv_projection": tv_proj, "s1": s1, "s2": s2,
        "khat_2delta": khat,
    }, passed, worst)


def verify_eps_close(w: GridFunction, delta) -> CheckReport:
    """Projection error bound: the L1 distance to the delta projection is at
    most delta times the aligned-partition oscillation sum at scale delta."""
    lattice_multiple(delta, w.h, "delta")
    n = w.dim
    proj = project(w, delta)
    lhs = l1_distance(w, proj)
    osc, _ = mesh_cell_oscillations(w, delta, (0.0,) * n)
    s = delta ** (n - 1) * float(osc.sum())
    ok, slack = _leq(lhs, delta * s)
    return CheckReport("eps_close", {
        "delta": delta, "l1_error": lhs, "partition_score": s, "rhs": delta * s,
        "gap": delta * s - lhs,
    }, ok, slack)


def verify_halving(w: GridFunction, delta) -> CheckReport:
    """Halving stability: the L1 projection error at delta/2 is at most
    (1 + 2^dim) times the error at delta."""
    lattice_multiple(delta, w.h, "delta")
    half = delta / 2.0
    lattice_multiple(half, w.h, "delta/2")
    lhs = l1_distance(w, project(w, half))
    base = l1_distance(w, project(w, delta))
    rhs = (1.0 + 2.0 ** w.dim) * base
    ok, slack = _leq(lhs, rhs)
    return CheckReport("halving", {
        "delta": delta, "err_half": lhs, "err_delta": base, "rhs": rhs,
    }, ok, slack)


def _kernel_shifts(width, h, dim):
    m = lattice_multiple(width, h, "width")
    offs = np.arange(-(m - 1), m) * h
    if dim == 1:
        return [(float(o),) for o in offs]
    return [(float(a), float(b)) for a in offs for b in offs]


def verify_convolution_monotonicity(f: GridFunction, kernel_width,
                                    family: CubeFamily, shift_set=None) -> CheckReport:
    """Per-family smoothing monotonicity: the smoothed function scores no
    more on the family than the original scores on the best kernel-support
    translate of that family."""
    if shift_set is None:
        shift_set = _kernel_shifts(kernel_width, f.h, f.dim)
    else:
        for sh in shift_set:
            for c in (sh if not np.isscalar(sh) else (sh,)):
                lattice_multiple(abs(float(c)), f.h, "shift") if c else None
    smooth = mollify(f, kernel_width)
    lhs = family_score(smooth, family)
    rhs = 0.0
    for sh in shift_set:
        off = tuple(-float(c) for c in (sh if not np.isscalar(sh) else (sh,)))
        rhs = max(rhs, family_score(f, family.translated(off)))
    ok, slack = _leq(lhs, rhs)
    return CheckReport("convolution_monotonicity", {
        "width": kernel_width, "smoothed_score": lhs, "best_shifted_score": rhs,
        "shifts": len(shift_set),
    }, ok, slack)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    eps: float
    keps: float
    solver: str
    runtime: float


@dataclass
class SweepReport:
    function_id: str
    rows: list
    quarter_tv: float
    half_tv: float
    dfp_limit: float | None
    verdicts: dict = field(default_factory=dict)

    def to_json_obj(self):
        return {
            "function_id": self.function_id,
            "rows": [{"eps": r.eps, "keps": r.keps, "solver": r.solver} for r in self.rows],
            "quarter_tv": self.quarter_tv,
            "half_tv": self.half_tv,
            "dfp_limit": self.dfp_limit,
            "verdicts": self.verdicts,
        }

    def csv_lines(self):
        g = lambda x: format(float(x), ".17g")
        head = "eps,keps,solver,quarter_tv,half_tv,dfp_limit,abs_err_dfp"
        out = [head]
        for r in self.rows:
            err = "" if self.dfp_limit is None else g(abs(r.keps - self.dfp_limit))
            dfp = "" if self.dfp_limit is None else g(self.dfp_limit)
            out.append(",".join([g(r.eps), g(r.keps), r.solver,
                                 g(self.quarter_tv), g(self.half_tv), dfp, err]))
        return out


def sweep_keps(f: GridFunction, eps_list, solver="dp1d", solver_opts=None,
               decomposition: DecompositionSpec | None = None,
               smooth=False, function_id="f") -> SweepReport:
    """Run the chosen solver for each eps (decreasing) and mark verdicts:
    every score below half the variation (with 5% slack), the smallest-eps
    score above a quarter of it for smooth functions, and a monotone
    approach to the declared pointwise limit when a split is given."""
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidSpecError("eps_list must be strictly decreasing")
    opts = dict(solver_opts or {})
    tv = total_variation(f)
    rows = []
    for eps in eps_list:
        t0 = time.perf_counter()
        sol = solve_keps(f, eps, solver=solver, **dict(opts))
        rows.append(SweepRow(eps, sol.score, sol.solver, time.perf_counter() - t0))
    dfp = decomposition.pointwise_limit() if decomposition is not None else None
    verdicts = {}
    upper = 0.5 * tv * (1.0 + 5e-2)
    verdicts["upper_bound"] = all(_leq(r.keps, upper)[0] for r in rows)
    if smooth:
        verdicts["lower_bound_smooth"] = rows[-1].keps >= 0.25 * tv * (1.0 - 5e-2)
    if dfp is not None:
        errs = [abs(r.keps - dfp) for r in rows]
        bad = sum(1 for a, b in zip(errs[1:], errs[2:])
                  if b > a * (1 + _REL) + 1e-12)
        verdicts["dfp_trend"] = bad <= 1
    return SweepReport(function_id, rows, 0.25 * tv, 0.5 * tv, dfp, verdicts)


def recovery_sequence(f: GridFunction, eps, schedule=None, is_smooth=False) -> GridFunction:
    """Family element at scale eps for the upper-bound construction: the
    function itself when already smooth, otherwise a mollification whose
    width (default sqrt(eps), lattice-rounded) dominates eps."""
    if is_smooth:
        return f
    width = schedule(eps) if schedule is not None else math.sqrt(eps)
    m = max(1, int(round(width / f.h)))
    return mollify(f, m * f.h)


# ---------------------------------------------------------------------------
# Randomized suites
# ---------------------------------------------------------------------------

def random_piecewise_constant(rng, dim=1, h=1.0 / 64.0):
    """Seeded random block-constant function for the verification suites."""
    if dim == 1:
        n = int(rng.integers(24, 97))
        k = int(rng.integers(1, 9))
        cuts = np.sort(rng.choice(np.arange(1, n), size=min(k, n - 1), replace=False))
        vals = np.repeat(rng.uniform(-1.0, 1.0, size=len(cuts) + 1),
                         np.diff(np.concatenate([[0], cuts, [n]])))
        return GridFunction(1, (0.0,), h, (n,), vals)
    n0 = int(rng.integers(12, 25))
    n1 = int(rng.integers(12, 25))
    b = int(rng.choice([1, 2, 4]))
    coarse = rng.uniform(-1.0, 1.0, size=((n0 + b - 1) // b, (n1 + b - 1) // b))
    vals = np.kron(coarse, np.ones((b, b)))[:n0, :n1]
    return GridFunction(2, (0.0, 0.0), h, (n0, n1), vals)


def random_disjoint_family(rng, f: GridFunction, eps, max_cubes=4) -> CubeFamily:
    """A few disjoint axis-aligned eps-cubes at lattice positions in the box."""
    cubes = []
    tries = 0
    while len(cubes) < max_cubes and tries < 40:
        tries += 1
        c = tuple(float(f.origin[a] + rng.integers(0, f.shape[a]) * f.h + eps / 2.0)
                  for a in range(f.dim))
        cand = Cube(c, eps)
        if all(_axis_disjoint(cand, q, eps) for q in cubes):
            cubes.append(cand)
    return CubeFamily(tuple(cubes), eps, "axis_aligned")


def _axis_disjoint(a: Cube, b: Cube, eps):
    return any(abs(x - y) >= eps - 1e-12 for x, y in zip(a.center, b.center))


@dataclass
class SuiteReport:
    seed: int
    checks: int
    violations: list
    max_slack: float

    @property
    def passed(self):
        return not self.violations

    def to_json_obj(self):
        return {
            "suite": "lemmas",
            "seed": self.seed,
            "checks": self.checks,
            "violations": self.violations,
            "max_slack": self.max_slack,
            "passed": self.passed,
        }


def run_lemma_suite(seed=7, n_1d=200, n_2d=50, delta_factors=(2, 4, 8),
                    include_convolution=True) -> SuiteReport:
    """Seeded randomized verification of the projection/oscillation
    inequalities and the smoothing monotonicity, 1D and 2D."""
    rng = np.random.default_rng(seed)
    violations = []
    checks = 0
    max_slack = -math.inf

    def record(rep: CheckReport, tag):
        nonlocal checks, max_slack
        checks += 1
        max_slack = max(max_slack, rep.worst_slack)
        if not rep.passed:
            violations.append({"check": rep.name, "case": tag,
                               "slack": rep.worst_slack,
                               "quantities": {k: float(v) for k, v in rep.quantities.items()
                                              if np.isscalar(v)}})

    for dim, count in ((1, n_1d), (2, n_2d)):
        for case in range(count):
            w = random_piecewise_constant(rng, dim=dim)
            for fac in delta_factors:
                d = fac * w.h
                tag = f"{dim}d-{case}-delta{fac}h"
                if dim == 1:
                    record(verify_lemma_1d(w, d), tag)
                record(verify_lemma_nd(w, d), tag)
                record(verify_eps_close(w, d), tag)
                record(verify_halving(w, d), tag)
            if include_convolution:
                eps = 4 * w.h
                fam = random_disjoint_family(rng, w, eps)
                if len(fam):
                    width = float(rng.choice([2, 4])) * w.h
                    record(verify_convolution_monotonicity(w, width, fam),
                           f"{dim}d-{case}-conv")
    return SuiteReport(seed, checks, violations, max_slack)


# ---------------------------------------------------------------------------
# Compactness and non-compactness demonstrations
# ---------------------------------------------------------------------------

def _values_on_window(f: GridFunction, window):
    """Materialize f on the window's cells (window bounds on f's lattice)."""
    idx = []
    for a, (lo, hi) in enumerate(window):
        i0 = round((lo - f.origin[a]) / f.h)
        i1 = round((hi - f.origin[a]) / f.h)
        if abs((lo - f.origin[a]) / f.h - i0) > 1e-9 or i1 <= i0:
            raise LatticeError("window bounds must be on the cell lattice")
        idx.append((int(i0), int(i1)))
    if f.dim == 1:
        i0, i1 = idx[0]
        out = np.empty(i1 - i0)
        cells = np.arange(i0, i1)
        out[:] = np.where(cells < 0, f.ext[0],
                          np.where(cells >= f.shape[0], f.ext[1],
                                   f.values[np.clip(cells, 0, f.shape[0] - 1)]))
        return out
    (i0, i1), (j0, j1) = idx
    out = np.zeros((i1 - i0, j1 - j0))
    a0, a1 = max(i0, 0), min(i1, f.shape[0])
    b0, b1 = max(j0, 0), min(j1, f.shape[1])
    if a1 > a0 and b1 > b0:
        out[a0 - i0: a1 - i0, b0 - j0: b1 - j0] = f.values[a0:a1, b0:b1]
    return out


@dataclass
class CompactnessReport:
    rows: list
    windows: list
    pairwise: list      # one distance matrix per window
    dist_to_limit: list
    verdicts: dict

    def to_json_obj(self):
        return {
            "rows": self.rows,
            "windows": [[list(b) for b in w] for w in self.windows],
            "pairwise": [[[float(x) for x in row] for row in M] for M in self.pairwise],
            "dist_to_limit": self.dist_to_limit,
            "verdicts": self.verdicts,
        }


def compactness_demo(entries, window=None, n_windows=2, solver=None,
                     solver_opts=None) -> CompactnessReport:
    """For a family of functions indexed by decreasing eps: score each,
    bound the projected variation through the paired-partition sums,
    recenter by the window median, and tabulate L1 distances on nested
    windows (Cauchy behavior) plus the distance to the finest projection."""
    entries = list(entries)
    if not entries:
        raise InvalidSpecError("empty family")
    dim = entries[0][1].dim
    h = entries[0][1].h
    if window is None:
        window = tuple((-1.0, 1.0) for _ in range(dim))
    windows = []
    for k in range(n_windows):
        shrink = 2.0 ** k
        windows.append(tuple((lo / shrink, hi / shrink) for lo, hi in window))
    rows = []
    projections = []
    centers = []
    for eps, f in entries:
        if abs(f.h - h) > 1e-12 * h:
            raise LatticeError("family members must share the fine lattice")
        lattice_multiple(eps / 2.0, f.h, "eps/2")
        if solver is None:
            sol = keps_1d_dp(f, eps) if dim == 1 else keps_greedy(f, eps, **(solver_opts or {}))
        else:
            sol = solve_keps(f, eps, solver=solver, **(solver_opts or {}))
        tv_proj, s1, s2 = _pairing_quantities(f, eps / 2.0)
        chain_bound = 4.0 * dim * max(s1, s2)
        norm1 = lp_norm(f, 1)
        remark_bound = 2.0 * norm1 / eps
        vals = _values_on_window(f, windows[0])
        c = float(np.median(vals))
        centers.append(c)
        proj = project(f, eps / 2.0)
        projections.append(proj)
        dist_zero = float(np.abs(vals - c).sum()) * f.h ** dim
        rows.append({
            "eps": eps, "keps": sol.score, "remark_bound": remark_bound,
            "tv_projection": tv_proj, "chain_bound": chain_bound,
            "tv_bound_ok": bool(_leq(tv_proj, chain_bound)[0]),
            "median": c, "dist_to_zero": dist_zero, "l1_norm": norm1,
        })
    pairwise = []
    for wbox in windows:
        mats = [_values_on_window(f, wbox) - c for (eps, f), c in zip(entries, centers)]
        n = len(mats)
        M = [[float(np.abs(mats[i] - mats[j]).sum()) * h ** dim for j in range(n)]
             for i in range(n)]
        pairwise.append(M)
    limit = projections[-1]
    dist_to_limit = []
    for (eps, f), c in zip(entries, centers):
        d = l1_distance(f.shifted(-c), limit.shifted(-centers[-1]), region=windows[0])
        dist_to_limit.append(float(d))
    bounds = [r["remark_bound"] for r in rows]
    dz = [r["dist_to_zero"] for r in rows]
    verdicts = {
        "tv_bounds_ok": all(r["tv_bound_ok"] for r in rows),
        "keps_le_remark_bound": all(_leq(r["keps"], r["remark_bound"])[0] for r in rows),
        "bound_ratio": (max(bounds) / min(bounds)) if min(bounds) > 0 else math.inf,
        "bound_ratio_finite": math.isfinite(max(bounds) / min(bounds)) if min(bounds) > 0 else False,
        "dist_to_zero_monotone": all(b <= a * (1 + _REL) for a, b in zip(dz, dz[1:])),
    }
    return CompactnessReport(rows, windows, pairwise, dist_to_limit, verdicts)


@dataclass
class CounterexampleReport:
    rows: list
    lp_rows: list
    l1_slope: float
    lp_slope: float
    lp_exponent: float
    verdicts: dict

    def to_json_obj(self):
        return {
            "rows": self.rows, "lp_rows": self.lp_rows,
            "l1_slope": self.l1_slope, "lp_slope": self.lp_slope,
            "lp_exponent": self.lp_exponent, "verdicts": self.verdicts,
        }


def _profile_spec(alpha, scale, dim, resolution):
    h = scale / resolution
    if dim == 1:
        box = ((0.0, scale),)
    else:
        box = ((-scale, scale), (-scale, scale))
    return FunctionSpec("scaled_profile", dim, h, box,
                        {"alpha": alpha, "scale": scale})


def remark_counterexample(alpha, p, eps_list, dim=1, resolution=512,
                          h_halvings=6) -> CounterexampleReport:
    """Concentrating-profile family: bounded scores, vanishing L1 norm, and
    (for alpha*p >= dim) unbounded Lp norm under grid refinement at fixed
    scale, with the measured log-log slope checked against the power-law
    exponent (dim - alpha*p)/p."""
    if dim not in (1, 2):
        raise DimensionError("dim must be 1 or 2")
    if not (alpha < dim):
        raise InvalidSpecError("need alpha < dim so the profile is integrable")
    if p < 1:
        raise InvalidSpecError("p must be >= 1")
    rows = []
    for eps in eps_list:
        f = generate(_profile_spec(alpha, eps, dim, resolution))
        if dim == 1:
            khat = keps_1d_dp(f, eps).score
        else:
            khat = keps_greedy(f, eps, pitch=4 * f.h).score
        norm1 = lp_norm(f, 1)
        bound = 2.0 * norm1 / eps
        rows.append({"eps": float(eps), "keps": khat, "l1": norm1,
                     "remark_bound": bound,
                     "bounded_ok": bool(_leq(khat, bound)[0])})
    le = np.log([r["eps"] for r in rows])
    l1 = np.log([r["l1"] for r in rows])
    l1_slope = float(np.polyfit(le, l1, 1)[0])

    eps0 = float(eps_list[0])
    lp_rows = []
    for k in range(h_halvings):
        res = resolution * 2 ** k
        f = generate(_profile_spec(alpha, eps0, dim, res))
        lp_rows.append({"h": eps0 / res, "lp": lp_norm(f, p)})
    lh = np.log([r["h"] for r in lp_rows])
    ln = np.log([r["lp"] for r in lp_rows])
    lp_slope = float(np.polyfit(lh, ln, 1)[0])
    exponent = (dim - alpha * p) / p

    norms = [r["lp"] for r in lp_rows]
    increasing = all(b > a for a, b in zip(norms, norms[1:]))
    if alpha * p > dim:
        lp_ok = increasing and abs(lp_slope - exponent) <= 0.2 * abs(exponent)
    elif alpha * p == dim:
        # critical case: logarithmic growth, power-law exponent zero
        lp_ok = increasing and abs(lp_slope - exponent) <= 0.2
    else:
        lp_ok = abs(lp_slope) <= 0.05
    verdicts = {
        "keps_bounded": all(r["bounded_ok"] for r in rows),
        "bound_ratio": max(r["remark_bound"] for r in rows) / min(r["remark_bound"] for r in rows),
        "l1_vanishes": abs(l1_slope - dim) <= 0.25 * dim,
        "lp_trend_ok": bool(lp_ok),
        "lp_diverges": bool(increasing) if alpha * p >= dim else False,
    }
    return CounterexampleReport(rows, lp_rows, l1_slope, lp_slope, exponent, verdicts)
