import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlfront.front_init import Disk, Rectangle, rasterize
from nlfront.grid import MIRROR, ScalarField, make_grid
from nlfront.linesets import RowMeasureIndex, WeightTable, naive_row_measure
from nlfront.velocity import (VelocityParams, check_h3_monotone, curvature_term, rhs, rhs_at,
                              rhs_reference, stencil, tomo_rhs_at, upwind_grad1, volume_rhs_at)


def test_params_validation():
    with pytest.raises(ValueError):
        VelocityParams(model="nope")
    with pytest.raises(ValueError):
        VelocityParams(curvature_coef=-1)
    with pytest.raises(ValueError):
        VelocityParams(grad_reg_delta=0.0)
    with pytest.raises(ValueError):
        VelocityParams(amplitude=-1.0)


def test_stencil_central_is_average_of_one_sided(grid_small):
    rng = np.random.default_rng(0)
    f = ScalarField(grid_small, rng.normal(size=grid_small.shape))
    for i, j in [(0, 0), (5, 7), (80, 3)]:
        s = stencil(f, i, j)
        assert abs(s.p1 - 0.5 * (s.d1m + s.d1p)) <= 1e-14 * max(1, abs(s.p1))
        assert abs(s.p2 - 0.5 * (s.d2m + s.d2p)) <= 1e-14 * max(1, abs(s.p2))


def test_upwind_rejects_negative_speed(grid_small):
    f = ScalarField(grid_small, np.zeros(grid_small.shape))
    with pytest.raises(ValueError):
        upwind_grad1(stencil(f, 3, 3), -1.0)


def _upwind_err(h):
    g = make_grid((-1, -1), h, int(round(2 / h)) + 1, 5)
    X1, _ = g.mesh()
    f = ScalarField(g, np.sin(2 * X1) + 0.3 * X1 ** 2, MIRROR)
    err = []
    for i in range(2, g.nx - 2):
        exact = abs(2 * np.cos(2 * X1[i, 2]) + 0.6 * X1[i, 2])
        err.append(abs(upwind_grad1(stencil(f, i, 2)) - exact))
    return max(err)


def test_upwind_first_order_consistency():
    e1, e2 = _upwind_err(0.02), _upwind_err(0.01)
    assert e2 <= 4.0 * 0.01
    assert e2 / e1 < 0.6


def _curv_err(h):
    g = make_grid((-2, -2), h, int(round(4 / h)) + 1, int(round(4 / h)) + 1)
    X1, X2 = g.mesh()
    r = np.hypot(X1, X2)
    f = ScalarField(g, r, MIRROR)
    err = 0.0
    for ang in np.linspace(0, 2 * np.pi, 17)[:-1]:
        x1, x2 = 1.2 * np.cos(ang), 1.2 * np.sin(ang)
        i, j = int(round((x1 + 2) / h)), int(round((x2 + 2) / h))
        rr = np.hypot(*g.coordinate(i, j))
        err = max(err, abs(curvature_term(stencil(f, i, j), 1e-9) - 1.0 / rr))
    return err


def test_curvature_second_order_consistency():
    e1, e2 = _curv_err(0.04), _curv_err(0.02)
    assert e2 <= 0.5 * 0.02 ** 2 * 10
    assert e2 / e1 < 0.35


def test_curvature_delta_limit_isotropic():
    g = make_grid((-1, -1), 0.1, 21, 21)
    X1, X2 = g.mesh()
    f = ScalarField(g, X1 ** 2 + X2 ** 2)
    s = stencil(f, 10, 10)  # p = 0 at the origin
    assert curvature_term(s, 1e-8) == pytest.approx(2.0, abs=1e-12)


def test_rectangle_figure_values():
    g = make_grid((-2, -2), 0.01, 401, 401)
    shape = Rectangle((0, 0), 0.5, 0.25)
    f = rasterize(shape, g, class_c=False)  # plain signed distance, |d1 u| = 1 at the side
    p = VelocityParams()
    idx = RowMeasureIndex(f, p.weight)
    side = tomo_rhs_at(f, idx, 250, 200, p)
    assert abs(side - 2 * 0.5) <= 2 * g.h + 1e-12
    assert tomo_rhs_at(f, idx, 200, 225, p) == 0.0


def test_constant_field_zero_rhs(grid_small):
    f = ScalarField(grid_small, np.full(grid_small.shape, 0.3))
    for p in [VelocityParams(), VelocityParams(model="volume_power"),
              VelocityParams(model="general_k1")]:
        assert np.all(rhs(f, p) == 0.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["tomographic", "general_k1", "volume_power"]),
       st.sampled_from([0.0, 1.0]))
def test_kernel_matches_reference_and_pointwise(seed, model, kappa):
    rng = np.random.default_rng(seed)
    g = make_grid((-1, -1), 0.1, 17, 13)
    f = ScalarField(g, np.tanh(rng.normal(size=g.shape)))
    w = WeightTable(np.array([-1.0, 0.0, 0.7]), np.array([0.5, 2.0, 1.0]))
    amp = rng.uniform(0.5, 2.0, size=g.shape)
    p = VelocityParams(model=model, amplitude=amp, weight=w, curvature_coef=kappa,
                       grad_reg_delta=1e-3)
    fast = rhs(f, p)
    ref = rhs_reference(f, p)
    idx = RowMeasureIndex(f, w)
    scale = max(1.0, np.max(np.abs(ref)))
    assert np.max(np.abs(fast - ref)) <= 1e-11 * scale
    for _ in range(10):
        i, j = int(rng.integers(g.nx)), int(rng.integers(g.ny))
        assert rhs_at(f, idx, i, j, p) == pytest.approx(ref[i, j], rel=1e-11, abs=1e-11)


def test_fast_index_equals_naive_scan_in_rhs():
    rng = np.random.default_rng(5)
    g = make_grid((-1, -1), 0.05, 41, 9)
    f = ScalarField(g, np.round(rng.normal(size=g.shape), 1))
    p = VelocityParams()
    idx = RowMeasureIndex(f, p.weight)
    for i in range(g.nx):
        for j in range(g.ny):
            s = stencil(f, i, j)
            naive = naive_row_measure(f, p.weight, j, f.values[i, j]) * upwind_grad1(s)
            assert tomo_rhs_at(f, idx, i, j, p) == pytest.approx(naive, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("lam", [2.0, 10.0])
def test_geometric_scaling(lam):
    rng = np.random.default_rng(2)
    g = make_grid((-1, -1), 0.1, 21, 21)
    u = ScalarField(g, rng.normal(size=g.shape))
    v = u.with_values(lam * u.values)
    pu = VelocityParams(curvature_coef=1.0, grad_reg_delta=1e-3)
    pv = VelocityParams(curvature_coef=1.0, grad_reg_delta=lam * 1e-3)
    iu, iv = RowMeasureIndex(u, pu.weight), RowMeasureIndex(v, pv.weight)
    for i in range(1, 20):
        for j in range(1, 20):
            a = tomo_rhs_at(v, iv, i, j, pv)
            b = lam * tomo_rhs_at(u, iu, i, j, pu)
            assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_h3_monotone_in_set_argument():
    rng = np.random.default_rng(3)
    g = make_grid((-1, -1), 0.05, 41, 41)
    f = ScalarField(g, np.tanh(rng.normal(size=g.shape)))
    for p in [VelocityParams(weight=WeightTable(np.array([-2.0, 2.0]), np.array([0.2, 3.0]))),
              VelocityParams(model="volume_power")]:
        rep = check_h3_monotone(p, f, 1000, seed=1)
        assert rep["violations"] == 0


def test_identical_set_gives_equal_rhs(grid_small):
    f = rasterize(Disk((0, 0), 0.8), grid_small)
    p = VelocityParams(model="volume_power")
    th = f.values[30, 40]
    assert volume_rhs_at(f, 30, 40, p, th) == volume_rhs_at(f, 30, 40, p, th)


def test_callable_amplitude(grid_small):
    f = rasterize(Disk((0, 0), 0.8), grid_small)
    p = VelocityParams(amplitude=lambda x1, x2, t: 1.0 + 0 * x1)
    q = VelocityParams(amplitude=1.0)
    assert np.array_equal(rhs(f, p), rhs(f, q))
