"""Command-line front end.

Numeric flags accept exact rationals ("1/16", "3/729") or decimals so that
lattice-multiplicity preconditions are not lost to decimal drift.  All
artifact files are deterministic: re-running a command with identical flags
and inputs yields byte-identical output.  Exit codes: 0 success, 1 a
verification suite recorded violations, 2 usage/parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import gamma, packing
from .cubes import Cube, CubeFamily, family_score, oscillation
from .errors import BmotvError
from .grid import FunctionSpec, generate, read_grid, write_grid
from .meshes import mollify, project, total_variation

_G = lambda x: format(float(x), ".17g")


def _rat(text):
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _rat_list(text):
    return [_rat(t) for t in text.split(",") if t]


def _vector(text):
    return tuple(_rat(t) for t in text.split(","))


def _box(text, dim):
    vals = [_rat(t) for t in text.split(",")]
    if len(vals) != 2 * dim:
        raise argparse.ArgumentTypeError(
            f"box needs {2 * dim} numbers (lo,hi per axis), got {len(vals)}")
    return tuple((vals[2 * a], vals[2 * a + 1]) for a in range(dim))


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_lines(path, lines):
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


_KIND_PARAMS = ("c", "slope", "height", "position", "clamp", "ac_mass",
                "jump_mass", "amp", "sigma", "center", "center_x", "center_y",
                "a", "b", "side", "radius", "tile", "alpha", "scale", "level")


def _cmd_gen(args):
    if args.spec:
        with open(args.spec) as fh:
            spec = FunctionSpec.from_json(json.load(fh))
    else:
        if args.kind is None or args.h is None or args.box is None:
            raise BmotvError("gen needs either --spec or --kind/--h/--box")
        params = {}
        for name in _KIND_PARAMS:
            val = getattr(args, name.replace("-", "_"), None)
            if val is not None:
                params[name] = val
        spec = FunctionSpec(args.kind, args.dim, args.h, _box(args.box, args.dim), params)
    f = generate(spec)
    write_grid(f, args.output)
    print(f"wrote {args.output} ({'x'.join(str(n) for n in f.shape)} cells)")
    return 0


def _cmd_tv(args):
    print(_G(total_variation(read_grid(args.input))))
    return 0


def _cmd_osc(args):
    f = read_grid(args.input)
    if args.family:
        with open(args.family) as fh:
            obj = json.load(fh)
        fam = CubeFamily.from_json(obj.get("family", obj))
        print(_G(family_score(f, fam)))
        return 0
    if args.center is None or args.eps is None:
        raise BmotvError("osc needs --center and --eps (or --family)")
    cube = Cube(_vector(args.center), args.eps, args.angle)
    print(_G(oscillation(f, cube)))
    return 0


def _cmd_project(args):
    f = read_grid(args.input)
    tau = _vector(args.tau) if args.tau else None
    out = project(f, args.delta, tau)
    write_grid(out, args.output)
    print(f"wrote {args.output}")
    return 0


def _solver_opts(args, f):
    opts = {}
    if args.solver in ("greedy", "oracle"):
        if args.pitch is not None:
            opts["pitch"] = args.pitch
        opts["rotations"] = args.rotations != "none"
        if args.rotations in ("fixed", "interface", "both"):
            opts["angle_source"] = args.rotations
        if args.angles is not None:
            opts["n_angles"] = args.angles
    elif args.solver == "lattice":
        if args.pitch is not None:
            opts["pitch"] = args.pitch
        if args.offsets:
            opts["offsets"] = [_vector(t) for t in args.offsets.split(";") if t]
    return opts


def _cmd_keps(args):
    f = read_grid(args.input)
    sol = packing.solve_keps(f, args.eps, solver=args.solver, **_solver_opts(args, f))
    if args.output:
        _write_json(args.output, sol.to_json())
    print(_G(sol.score))
    return 0


def _cmd_ieps(args):
    f = read_grid(args.input)
    score = packing.ieps(f, args.eps, solver=args.solver, **_solver_opts(args, f))
    print(_G(score))
    return 0


def _cmd_bbm(args):
    f = read_grid(args.input)
    sol = packing.bbm_seminorm(f, args.eps, solver=args.solver,
                               pitch=args.pitch)
    if args.output:
        _write_json(args.output, sol.to_json())
    print(_G(sol.score))
    return 0


def _cmd_sweep(args):
    f = read_grid(args.input)
    dec = None
    if args.ac is not None or args.jump is not None or args.cantor is not None:
        dec = gamma.DecompositionSpec(args.ac or 0.0, args.jump or 0.0, args.cantor or 0.0)
    rep = gamma.sweep_keps(f, _rat_list(args.eps_list), solver=args.solver,
                           solver_opts=_solver_opts(args, f), decomposition=dec,
                           smooth=args.smooth, function_id=args.fid)
    stem = args.output or f"{args.fid}__{args.solver}"
    _write_lines(stem + ".csv", rep.csv_lines())
    _write_json(stem + ".json", rep.to_json_obj())
    for r in rep.rows:
        print(f"eps={_G(r.eps)} keps={_G(r.keps)} ({r.runtime:.2f}s)", file=sys.stderr)
    print(f"wrote {stem}.csv {stem}.json")
    return 0 if all(rep.verdicts.values()) else 1


def _cmd_verify(args):
    if args.suite != "lemmas":
        raise BmotvError(f"unknown suite {args.suite!r}")
    rep = gamma.run_lemma_suite(seed=args.seed, n_1d=args.n1d, n_2d=args.n2d)
    if args.output:
        _write_json(args.output, rep.to_json_obj())
    print(f"{rep.checks} checks, {len(rep.violations)} violations")
    return 0 if rep.passed else 1


def _cmd_compactness(args):
    entries = []
    base = 2.0 ** (-args.jmax - 6)
    for j in range(args.jmin, args.jmax + 1):
        eps = 2.0 ** (-j)
        spec = FunctionSpec("scaled_profile", 1, base, ((0.0, eps),),
                            {"alpha": args.alpha, "scale": eps})
        entries.append((eps, generate(spec)))
    rep = gamma.compactness_demo(entries, window=((-1.0, 1.0),))
    if args.output:
        _write_json(args.output, rep.to_json_obj())
    ok = rep.verdicts["tv_bounds_ok"] and rep.verdicts["bound_ratio_finite"] \
        and rep.verdicts["dist_to_zero_monotone"]
    for r in rep.rows:
        print(f"eps={_G(r['eps'])} keps={_G(r['keps'])} "
              f"tv_proj={_G(r['tv_projection'])} dist0={_G(r['dist_to_zero'])}",
              file=sys.stderr)
    print("compactness verdicts: " + json.dumps(rep.verdicts, sort_keys=True))
    return 0 if ok else 1


def _cmd_counterexample(args):
    rep = gamma.remark_counterexample(args.alpha, args.p, _rat_list(args.eps_list),
                                      dim=args.dim)
    if args.output:
        _write_json(args.output, rep.to_json_obj())
    print("counterexample verdicts: " + json.dumps(rep.verdicts, sort_keys=True))
    ok = rep.verdicts["keps_bounded"] and rep.verdicts["l1_vanishes"] \
        and rep.verdicts["lp_trend_ok"]
    return 0 if ok else 1


def _build_parser():
    ap = argparse.ArgumentParser(prog="bmotv", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a catalog function grid file")
    g.add_argument("--spec", help="JSON function spec file")
    g.add_argument("--kind", choices=[
        "constant", "ramp", "step", "sbv_combo", "gaussian_smooth", "cantor",
        "indicator_interval", "indicator_square", "indicator_disk",
        "checkerboard", "scaled_profile"])
    g.add_argument("--dim", type=int, default=1)
    g.add_argument("--h", type=_rat)
    g.add_argument("--box", help="lo,hi per axis, comma separated")
    for name in _KIND_PARAMS:
        if name == "level":
            g.add_argument("--level", type=int)
        elif name == "center":
            g.add_argument("--center", type=_rat)
        else:
            g.add_argument("--" + name.replace("_", "-"), type=_rat, dest=name)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=_cmd_gen)

    t = sub.add_parser("tv", help="total variation of a grid file")
    t.add_argument("input")
    t.set_defaults(func=_cmd_tv)

    o = sub.add_parser("osc", help="oscillation of one cube or a family file")
    o.add_argument("input")
    o.add_argument("--center", help="cube center, comma separated")
    o.add_argument("--eps", type=_rat)
    o.add_argument("--angle", type=_rat, default=0.0)
    o.add_argument("--family", help="family/solution JSON to rescore")
    o.set_defaults(func=_cmd_osc)

    p = sub.add_parser("project", help="piecewise-constant mesh projection")
    p.add_argument("input")
    p.add_argument("--delta", type=_rat, required=True)
    p.add_argument("--tau", help="mesh translation, comma separated")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_project)

    def add_solver_flags(sp, solvers, default):
        sp.add_argument("--solver", choices=solvers, default=default)
        sp.add_argument("--pitch", type=_rat)
        sp.add_argument("--rotations", choices=["none", "fixed", "interface", "both"],
                        default="none")
        sp.add_argument("--angles", type=int)
        sp.add_argument("--offsets", help="lattice offsets 'x,y;x,y;...'")

    k = sub.add_parser("keps", help="disjoint-cube oscillation maximization")
    k.add_argument("input")
    k.add_argument("--eps", type=_rat, required=True)
    add_solver_flags(k, ["dp1d", "lattice", "greedy", "oracle"], "dp1d")
    k.add_argument("-o", "--output")
    k.set_defaults(func=_cmd_keps)

    i = sub.add_parser("ieps", help="cardinality-capped maximization")
    i.add_argument("input")
    i.add_argument("--eps", type=_rat, required=True)
    add_solver_flags(i, ["dp1d", "greedy", "oracle"], "dp1d")
    i.set_defaults(func=_cmd_ieps)

    b = sub.add_parser("bbm", help="axis-aligned capped score inside the unit box")
    b.add_argument("input")
    b.add_argument("--eps", type=_rat, required=True)
    b.add_argument("--solver", choices=["greedy", "oracle"], default="greedy")
    b.add_argument("--pitch", type=_rat)
    b.add_argument("-o", "--output")
    b.set_defaults(func=_cmd_bbm)

    s = sub.add_parser("sweep", help="scores across a decreasing eps list")
    s.add_argument("input")
    s.add_argument("--eps-list", required=True)
    add_solver_flags(s, ["dp1d", "lattice", "greedy", "oracle"], "dp1d")
    s.add_argument("--ac", type=_rat, help="declared absolutely continuous mass")
    s.add_argument("--jump", type=_rat, help="declared jump mass")
    s.add_argument("--cantor", type=_rat, help="declared staircase mass")
    s.add_argument("--smooth", action="store_true")
    s.add_argument("--fid", default="f")
    s.add_argument("-o", "--output", help="artifact stem (.csv/.json appended)")
    s.set_defaults(func=_cmd_sweep)

    v = sub.add_parser("verify", help="seeded randomized inequality suites")
    v.add_argument("--suite", default="lemmas")
    v.add_argument("--seed", type=int, default=7)
    v.add_argument("--n1d", type=int, default=200)
    v.add_argument("--n2d", type=int, default=50)
    v.add_argument("-o", "--output")
    v.set_defaults(func=_cmd_verify)

    c = sub.add_parser("compactness", help="concentrating-family demonstration")
    c.add_argument("--alpha", type=_rat, default=0.5)
    c.add_argument("--jmin", type=int, default=3)
    c.add_argument("--jmax", type=int, default=8)
    c.add_argument("-o", "--output")
    c.set_defaults(func=_cmd_compactness)

    x = sub.add_parser("counterexample", help="norm-growth trends of the profile family")
    x.add_argument("--alpha", type=_rat, required=True)
    x.add_argument("--p", type=_rat, required=True)
    x.add_argument("--eps-list", required=True)
    x.add_argument("--dim", type=int, default=1)
    x.add_argument("-o", "--output")
    x.set_defaults(func=_cmd_counterexample)
    return ap


def main(argv=None):
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except BmotvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
