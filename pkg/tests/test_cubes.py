import math

import numpy as np
import pytest

from bmotv import (
    Cube,
    CubeFamily,
    FunctionSpec,
    GridFunction,
    OverlappingFamilyError,
    cell_overlap_weights,
    directional_tv,
    family_score,
    generate,
    mean,
    mean_oscillation,
    oscillation,
    verify_disjoint,
)
from bmotv.kernels import reference


def grid1d(values, h=0.25, origin=0.0, ext=(0.0, 0.0)):
    values = np.asarray(values, dtype=float)
    return GridFunction(1, (origin,), h, (len(values),), values, ext)


def grid2d(values, h=0.25, origin=(0.0, 0.0)):
    values = np.asarray(values, dtype=float)
    return GridFunction(2, origin, h, values.shape, values)


def test_cube_angle_normalization():
    q = Cube((0.0, 0.0), 1.0, math.pi / 2 + 0.3)
    assert abs(q.angle - 0.3) < 1e-12
    assert Cube((0.0, 0.0), 1.0, -0.2).angle == pytest.approx(math.pi / 2 - 0.2)


def test_overlap_weights_exact_tiling():
    f = grid2d(np.ones((4, 4)), h=0.5)
    idx, w = cell_overlap_weights(Cube((1.0, 1.0), 1.0), f)
    assert len(w) == 4
    assert np.allclose(w, 0.25)


def test_overlap_weights_rotated_on_node():
    h = 0.5
    f = grid2d(np.ones((4, 4)), h=h)
    idx, w = cell_overlap_weights(Cube((1.0, 1.0), h, math.pi / 4), f)
    assert abs(w.sum() - h * h) < 1e-12 * h * h
    assert len(w) == 4 and np.allclose(w, w[0])  # 4-fold symmetry


def test_overlap_weights_random_rotated_sum():
    rng = np.random.default_rng(42)
    h = 2.0 ** -5
    f = grid2d(np.ones((64, 64)), h=h, origin=(-1.0, -1.0))
    for _ in range(12):
        eps = float(rng.uniform(3 * h, 10 * h))
        c = tuple(rng.uniform(-0.5, 0.5, 2))
        ang = float(rng.uniform(0, math.pi / 2))
        idx, w = cell_overlap_weights(Cube(c, eps, ang), f)
        assert abs(w.sum() - eps * eps) < 1e-10 * eps * eps


def test_overlap_weights_monte_carlo_oracle():
    rng = np.random.default_rng(7)
    h = 2.0 ** -4
    f = grid2d(np.ones((16, 16)), h=h, origin=(-0.5, -0.5))
    eps, c, ang = 0.21, (0.03, -0.07), 0.5
    idx, w = cell_overlap_weights(Cube(c, eps, ang), f)
    # Monte-Carlo oracle for one specific cell's overlap area
    k = int(np.argmax(w))
    i, j = idx[k]
    n = 1_000_000
    pts = np.column_stack([rng.uniform(-0.5 + i * h, -0.5 + (i + 1) * h, n),
                           rng.uniform(-0.5 + j * h, -0.5 + (j + 1) * h, n)])
    ca, sa = math.cos(ang), math.sin(ang)
    u = ca * (pts[:, 0] - c[0]) + sa * (pts[:, 1] - c[1])
    v = -sa * (pts[:, 0] - c[0]) + ca * (pts[:, 1] - c[1])
    hit = (np.abs(u) <= eps / 2) & (np.abs(v) <= eps / 2)
    frac = hit.mean()
    sigma = math.sqrt(frac * (1 - frac) / n) * h * h
    assert abs(w[k] - frac * h * h) < 3 * sigma + 1e-12


def test_mean_trivial_cases():
    f = grid1d([3.0, 3.0, 3.0, 3.0])
    assert mean(f, Cube((0.5,), 0.5)) == pytest.approx(3.0)
    # ramp cell averages over (0, eps): mean is eps/2
    h = 2.0 ** -8
    ramp = generate(FunctionSpec("ramp", 1, h, ((0.0, 1.0),), {"slope": 1.0}))
    eps = 0.25
    assert mean(ramp, Cube((eps / 2,), eps)) == pytest.approx(eps / 2, abs=1e-12)
    step = grid1d([0.0, 0.0, 1.0, 1.0])
    assert mean(step, Cube((0.5,), 1.0)) == pytest.approx(0.5)


def test_oscillation_trivial_and_ramp():
    f = grid1d([2.0, 2.0, 2.0, 2.0])
    assert oscillation(f, Cube((0.5,), 0.5)) == 0.0
    step = grid1d([0.0, 0.0, 1.0, 1.0])
    assert oscillation(step, Cube((0.5,), 1.0)) == pytest.approx(0.5)
    # slope-1 ramp over an eps interval: quadrature oracle for mean |x - eps/2| / eps
    h = 2.0 ** -10
    ramp = generate(FunctionSpec("ramp", 1, h, ((0.0, 1.0),), {"slope": 1.0}))
    eps = 2.0 ** -4
    xs = (np.arange(int(eps / h)) + 0.5) * h
    oracle = float(np.abs(xs - eps / 2).mean())
    val = oscillation(ramp, Cube((eps / 2,), eps))
    assert val == pytest.approx(oracle, rel=1e-12)
    assert val == pytest.approx(eps / 4, rel=1e-3)


def test_oscillation_outside_support_uses_zero_extension():
    f = grid1d([1.0, 1.0])  # constant 1 on [0, 0.5]
    # cube straddling the right box edge sees half ones, half zero extension
    assert oscillation(f, Cube((0.5,), 0.5)) == pytest.approx(0.5)
    assert oscillation(f, Cube((5.0,), 0.5)) == 0.0


def test_oscillation_mean_minimizer_factor_two():
    rng = np.random.default_rng(3)
    h = 1.0 / 32
    f = GridFunction(1, (0.0,), h, (32,), rng.uniform(-1, 1, 32))
    for _ in range(20):
        eps = float(rng.integers(2, 10)) * h
        c = float(rng.uniform(0, 1))
        q = Cube((c,), eps)
        m = float(rng.uniform(-2, 2))
        osc = oscillation(f, q)
        idx, w = cell_overlap_weights(q, f)
        dev_m = (float(w @ np.abs(f.values[idx] - m))
                 + (eps - w.sum()) * abs(0.0 - m)) / eps
        assert osc <= 2.0 * dev_m + 1e-12


def test_poincare_bound_on_lattice_cubes():
    rng = np.random.default_rng(9)
    h = 1.0 / 16
    for dim in (1, 2):
        for _ in range(10):
            if dim == 1:
                f = GridFunction(1, (0.0,), h, (16,), rng.uniform(-1, 1, 16))
            else:
                f = GridFunction(2, (0.0, 0.0), h, (12, 12), rng.uniform(-1, 1, (12, 12)))
            k = int(rng.integers(1, 5))
            eps = 2 * k * h
            c = tuple(float(h * rng.integers(k, 10 - k)) for _ in range(dim))
            q = Cube(c, eps)
            region = tuple((x - eps / 2, x + eps / 2) for x in c)
            e = (1.0,) if dim == 1 else (1.0, 0.0)
            _, tv_closed = directional_tv(f, e, region)
            bound = 0.5 * tv_closed / eps ** (dim - 1)
            assert oscillation(f, q) <= bound * (1 + 1e-9) + 1e-12


def test_family_score_basics():
    h = 2.0 ** -6
    f = generate(FunctionSpec("indicator_interval", 1, h, ((-1.0, 2.0),),
                              {"a": 0.0, "b": 1.0}))
    assert family_score(f, CubeFamily((), 0.25)) == 0.0
    eps = 0.25
    fam = CubeFamily((Cube((0.0,), eps), Cube((1.0,), eps)), eps)
    assert family_score(f, fam) == pytest.approx(1.0, abs=1e-12)
    const = grid1d([4.0] * 8)
    assert family_score(const, CubeFamily((Cube((0.7,), 0.5),), 0.5)) == pytest.approx(0.0)


def test_family_score_additive_and_rejects_overlap():
    h = 2.0 ** -6
    f = generate(FunctionSpec("indicator_interval", 1, h, ((-1.0, 2.0),),
                              {"a": 0.0, "b": 1.0}))
    eps = 0.25
    f1 = CubeFamily((Cube((0.0,), eps),), eps)
    f2 = CubeFamily((Cube((1.0,), eps),), eps)
    both = CubeFamily(f1.cubes + f2.cubes, eps)
    assert family_score(f, both) == pytest.approx(
        family_score(f, f1) + family_score(f, f2), rel=1e-14)
    with pytest.raises(OverlappingFamilyError):
        family_score(f, CubeFamily((Cube((0.0,), eps), Cube((0.1,), eps)), eps))


def test_verify_disjoint_cases():
    eps = 0.5
    fam = CubeFamily((Cube((0.0, 0.0), eps), Cube((0.5, 0.0), eps)), eps)
    assert verify_disjoint(fam)  # face contact allowed
    dup = CubeFamily((Cube((0.0, 0.0), eps), Cube((0.0, 0.0), eps)), eps)
    assert not verify_disjoint(dup)


def test_verify_disjoint_rotated_diagonal_oracle():
    # two pi/4-rotated squares approaching along the diagonal: the boundary
    # distance is eps*sqrt(2)/2; check SAT against a dense membership oracle
    eps = 1.0
    ang = math.pi / 4

    def point_overlap(d):
        # dense sampling oracle: any point in both squares' interiors?
        xs = np.linspace(-1.2, 1.2 + d, 481)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        ca, sa = math.cos(ang), math.sin(ang)

        def inside(cx, cy):
            u = ca * (X - cx) + sa * (Y - cy)
            v = -sa * (X - cx) + ca * (Y - cy)
            return (np.abs(u) < eps / 2 - 1e-9) & (np.abs(v) < eps / 2 - 1e-9)

        return bool(np.any(inside(0, 0) & inside(d / math.sqrt(2), d / math.sqrt(2))))

    crit = eps * math.sqrt(2) / 2
    for d in (0.9 * crit * math.sqrt(2), 1.1 * crit * math.sqrt(2)):
        # centers at distance d along the 45-degree line
        fam = CubeFamily((Cube((0.0, 0.0), eps, ang),
                          Cube((d / math.sqrt(2), d / math.sqrt(2)), eps, ang)), eps,
                         "rotated")
        assert verify_disjoint(fam) == (not point_overlap(d))


def test_axis_path_agrees_with_clipping_path():
    rng = np.random.default_rng(21)
    h = 2.0 ** -5
    vals = rng.uniform(-1, 1, (32, 32))
    f = grid2d(vals, h=h, origin=(-0.5, -0.5))
    for _ in range(15):
        eps = float(rng.uniform(2 * h, 8 * h))
        c = tuple(rng.uniform(-0.4, 0.4, 2))
        m_sep, o_sep = mean_oscillation(f, Cube(c, eps, 0.0))
        m_clip, o_clip = reference.cube_mean_osc(vals, -0.5, -0.5, h, c[0], c[1], eps, 0.0)
        assert m_sep == pytest.approx(m_clip, rel=1e-10, abs=1e-13)
        assert o_sep == pytest.approx(o_clip, rel=1e-10, abs=1e-13)


def test_family_json_roundtrip():
    eps = 0.25
    fam = CubeFamily((Cube((0.0, 0.5), eps, 0.3), Cube((1.0, 0.5), eps)), eps, "rotated")
    again = CubeFamily.from_json(fam.to_json())
    assert again == fam
