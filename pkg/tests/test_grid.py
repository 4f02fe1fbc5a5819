import math

import numpy as np
import pytest

from bmotv import (
    DimensionError,
    FunctionSpec,
    GridParseError,
    GridFunction,
    InvalidSpecError,
    ResolutionMismatchError,
    generate,
    l1_distance,
    lp_norm,
    project,
    read_grid,
    write_grid,
)


def spec1d(kind, h, box=(0.0, 1.0), **params):
    return FunctionSpec(kind, 1, h, (box,), params)


def test_constant_fills_grid():
    f = generate(spec1d("constant", 0.125, c=5.0))
    assert np.all(f.values == 5.0)


def test_generate_is_deterministic():
    s = FunctionSpec("indicator_disk", 2, 2.0 **-6, ((-1.0, 1.0), (-1.0, 1.0)),
                     {"center_x": 0.0, "center_y": 0.0, "radius": 0.3})
    a, b = generate(s), generate(s)
    assert np.array_equal(a.values, b.values)


def test_cantor_level1_profile():
    f = generate(spec1d("cantor", 1.0 / 27.0, level=1))
    assert np.all(np.diff(f.values) >= 0)
    # flat at 1/2 on the middle third
    mid = f.values[(f.centers() > 1.0 / 3.0) & (f.centers() < 2.0 / 3.0)]
    assert np.all(mid == 0.5)
    assert f.values[0] < 0.06 and f.values[-1] > 0.94
    assert f.ext == (0.0, 1.0)


def test_cantor_monotone_any_level():
    for level in (2, 4):
        f = generate(spec1d("cantor", 3.0 ** -(level + 1), level=level))
        assert np.all(np.diff(f.values) >= -1e-15)
        assert f.values.min() == f.values[0] and f.values.max() == f.values[-1]


def test_cantor_resolution_mismatch():
    with pytest.raises(ResolutionMismatchError):
        generate(spec1d("cantor", 1.0 / 100.0, level=2))


def test_invalid_spec_parameter():
    with pytest.raises(InvalidSpecError):
        generate(FunctionSpec("indicator_disk", 2, 0.25, ((-1, 1), (-1, 1)),
                              {"center_x": 0.0, "center_y": 0.0, "radius": 1.5}))


def test_indicator_disk_mass_against_monte_carlo():
    h = 2.0 ** -8
    r = 0.3
    f = generate(FunctionSpec("indicator_disk", 2, h, ((-1.0, 1.0), (-1.0, 1.0)),
                              {"center_x": 0.0, "center_y": 0.0, "radius": r}))
    assert set(np.unique(f.values)) <= {0.0, 1.0}
    mass = f.mass()
    # independent Monte-Carlo area oracle
    rng = np.random.default_rng(123)
    pts = rng.uniform(-1.0, 1.0, size=(1_000_000, 2))
    hits = (pts[:, 0] ** 2 + pts[:, 1] ** 2 < r * r).mean()
    mc_area = hits * 4.0
    sigma = 4.0 * math.sqrt(hits * (1 - hits) / len(pts))
    assert abs(mass - mc_area) < 3 * sigma + 2 * h * 2 * math.pi * r
    assert abs(mass - math.pi * r * r) < 2 * h * 2 * math.pi * r


def test_indicator_values_binary():
    f = generate(spec1d("indicator_interval", 2.0 ** -6, box=(-1.0, 2.0), a=0.0, b=1.0))
    assert set(np.unique(f.values)) <= {0.0, 1.0}


def test_grid_roundtrip_1d(tmp_path):
    f = GridFunction(1, (0.0,), 1.0 / 3.0, (3,), np.array([0.0, 1.0, 0.0]))
    p = tmp_path / "f.grid"
    write_grid(f, p)
    g = read_grid(p)
    assert np.array_equal(f.values, g.values)
    assert g.origin == f.origin and g.h == f.h and g.shape == f.shape


def test_grid_roundtrip_metadata_2d(tmp_path):
    f = GridFunction(2, (-1.0, -1.0), 1.0, (2, 2), np.arange(4.0))
    p = tmp_path / "f.grid"
    write_grid(f, p)
    g = read_grid(p)
    assert g.origin == (-1.0, -1.0) and g.h == 1.0 and g.shape == (2, 2)
    assert np.array_equal(f.values, g.values)


def test_grid_roundtrip_bit_exact_random(tmp_path):
    rng = np.random.default_rng(5)
    f = GridFunction(1, (rng.uniform(-2, 0),), 2.0 ** float(rng.integers(-12, -2)),
                     (37,), rng.standard_normal(37) * 1e3, (0.0, rng.uniform()))
    p = tmp_path / "r.grid"
    write_grid(f, p)
    g = read_grid(p)
    assert np.array_equal(f.values, g.values)
    assert g.h == f.h and g.origin == f.origin and g.ext == f.ext


def test_grid_parse_errors(tmp_path):
    p = tmp_path / "bad.grid"
    p.write_text("not-a-grid\n")
    with pytest.raises(GridParseError):
        read_grid(p)
    p.write_text("bmotv-grid v1\ndim 3\norigin 0 0 0\nh 1\nshape 2 2 2\n" + "0 " * 8)
    with pytest.raises(DimensionError):
        read_grid(p)
    p.write_text("bmotv-grid v1\ndim 1\norigin 0\nh 1\nshape 4\n1 2 oops 4\n")
    with pytest.raises(GridParseError) as err:
        read_grid(p)
    assert err.value.line == 6


def test_l1_distance_identity_and_unit_box():
    h = 2.0 ** -6
    f = generate(spec1d("constant", h, c=1.0))
    g = generate(spec1d("constant", h, c=0.0))
    assert l1_distance(f, f) == 0.0
    assert abs(l1_distance(f, g, region=((0.0, 1.0),)) - 1.0) < 1e-12
    assert l1_distance(f, g) == math.inf  # clamp extensions differ


def test_l1_distance_ramp_vs_projection():
    h = 2.0 ** -8
    f = generate(spec1d("ramp", h, slope=1.0))
    p = project(f, 0.5)
    # direct summation oracle over the union lattice
    per_cell = np.abs(f.values - np.where(f.centers() < 0.5, 0.25, 0.75))
    oracle = float(per_cell.sum()) * h
    d = l1_distance(f, p)
    assert abs(d - oracle) < 1e-12
    assert abs(d - 0.125) < h  # analytic: 2 * integral over a half of |x - mean|


def test_l1_metric_properties():
    rng = np.random.default_rng(11)
    h = 1.0 / 32
    fs = [GridFunction(1, (0.0,), h, (32,), rng.uniform(-1, 1, 32)) for _ in range(3)]
    a, b, c = fs
    assert abs(l1_distance(a, b) - l1_distance(b, a)) < 1e-15
    assert l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12


def test_lp_norm_constant():
    f = generate(spec1d("constant", 1.0 / 16, c=1.0))
    assert abs(lp_norm(f, 2.0, region=((0.0, 1.0),)) - 1.0) < 1e-12
    assert lp_norm(f, 2.0) == math.inf  # a true constant has no global norm


def test_lp_norm_rejects_p_below_one():
    f = generate(spec1d("constant", 0.25))
    with pytest.raises(InvalidSpecError):
        lp_norm(f, 0.5)


def test_profile_l1_scaling():
    # closed form: integral of (x/s)^(-1/2) over (0, s] equals 2s
    for s in (0.25, 0.125):
        f = generate(FunctionSpec("scaled_profile", 1, s / 512, ((0.0, s),),
                                  {"alpha": 0.5, "scale": s}))
        assert abs(lp_norm(f, 1.0) - 2.0 * s) < 1e-10 * s


def test_profile_l2_grows_under_refinement():
    s = 0.25
    norms = []
    for k in range(5):
        f = generate(FunctionSpec("scaled_profile", 1, s / (256 * 2 ** k), ((0.0, s),),
                                  {"alpha": 0.5, "scale": s}))
        norms.append(lp_norm(f, 2.0))
    assert all(b > a for a, b in zip(norms, norms[1:]))
    # alpha*p = dim: critical case, log growth, power-law exponent ~ 0
    slope = np.polyfit(np.log([s / (256 * 2 ** k) for k in range(5)]), np.log(norms), 1)[0]
    assert abs(slope) < 0.2


def test_sbv_decomposition_matches_variation():
    from bmotv import total_variation

    for params in ({"ac_mass": 1.0, "jump_mass": 0.0, "clamp": 1},
                   {"ac_mass": 1.0, "jump_mass": 1.0},
                   {"ac_mass": 0.5, "jump_mass": 2.0}):
        s = spec1d("sbv_combo", 2.0 ** -10, **params)
        dec = s.decomposition()
        tv = total_variation(generate(s))
        assert abs(dec.total - tv) < 1e-6 * max(tv, 1.0)


def test_values_immutable():
    f = generate(spec1d("constant", 0.25))
    with pytest.raises(ValueError):
        f.values[0] = 3.0
