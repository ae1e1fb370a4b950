import json

import numpy as np
import pytest

from nlfront.front_init import Disk, Rectangle, rasterize
from nlfront.properties import (SubsolutionParams, audit_h2_envelope, check_comparison,
                                check_relabel, lemma51_lattice, lemma51_residual,
                                mollified_sequence, random_ordered_pair, stability_check,
                                tie_demo, write_report)
from nlfront.velocity import VelocityParams


def test_comparison_identical_fields_is_exactly_zero(grid_small):
    u = rasterize(Disk((0, 0), 0.5), grid_small)
    rep = check_comparison(u, u, VelocityParams(curvature_coef=1.0), 0.05)
    assert rep.sup_violation == 0.0 and rep.first_violation_time is None


def test_comparison_shifted_pair(grid_small):
    v = rasterize(Disk((0, 0), 0.5), grid_small)
    u = v.with_values(v.values - 0.1)
    for p in [VelocityParams(), VelocityParams(model="volume_power")]:
        assert check_comparison(u, v, p, 0.1).sup_violation <= 1e-10


def test_comparison_rejects_unordered(grid_small):
    v = rasterize(Disk((0, 0), 0.5), grid_small)
    u = v.with_values(v.values + np.where(np.arange(81)[:, None] == 40, 0.2, 0.0))
    with pytest.raises(ValueError, match="violated"):
        check_comparison(u, v, VelocityParams(), 0.1)


@pytest.mark.parametrize("kind", ["nested", "offset"])
def test_random_pairs_are_ordered(grid_small, kind):
    for s in range(5):
        u, v = random_ordered_pair(grid_small, s, kind)
        assert np.all(u.values <= v.values)
        assert v.values.max() <= 1


def test_relabel_identity_is_zero(grid_small):
    u = rasterize(Disk((0, 0), 0.6), grid_small)
    d = check_relabel(u, lambda s: s, VelocityParams(), 0.1, (0.05, 0.1))
    assert d == [0.0, 0.0]


def test_relabel_rejects_nonmonotone_and_sign_change(grid_small):
    u = rasterize(Disk((0, 0), 0.6), grid_small)
    with pytest.raises(ValueError):
        check_relabel(u, lambda s: s ** 2, VelocityParams(), 0.1, (0.1,))
    with pytest.raises(ValueError):
        check_relabel(u, lambda s: s + 0.1, VelocityParams(), 0.1, (0.1,))


def test_subsolution_constants():
    sp = SubsolutionParams()
    assert sp.bound == -35.0 and sp.admissible
    assert SubsolutionParams.ball_constant(1) == pytest.approx(2.0)
    assert not SubsolutionParams(A=0.0).admissible
    with pytest.raises(ValueError):
        SubsolutionParams(L1=0.0)


def test_residual_at_origin_is_A():
    assert lemma51_residual([0.0, 0.0], 0.0) == -35.0
    assert lemma51_residual([0.0, 0.0], 0.0, exact_hessian=True) == -35.0


def test_residual_closed_form_point():
    # x = (1, 0), t = 0: dg/dt = -35/2, (1+|x|)|Dg| = 2 * 1/2, the x2 part of Dg
    # vanishes, and (L2+1)|x|^2 * 2*7/4 = 7
    assert lemma51_residual([1.0, 0.0], 0.0) == pytest.approx(-17.5 + 1.0 + 7.0, rel=1e-14)
    # at x = (0, 1) the x2 part enters: + C_ball * |x| * 1/2 = 1
    assert lemma51_residual([0.0, 1.0], 0.0) == pytest.approx(-17.5 + 1.0 + 1.0 + 7.0, rel=1e-14)


def test_residual_nonpositive_on_lattice():
    assert lemma51_lattice().max() <= 1e-12
    exact = lemma51_lattice(exact_hessian=True)
    assert exact.max() <= 1e-12
    assert np.all(exact <= lemma51_lattice() + 1e-15)


def test_residual_without_bound_on_A():
    sp = SubsolutionParams(A=0.0)
    assert lemma51_residual([0.0, 0.0], 0.0, sp) == 0.0
    assert lemma51_residual([0.1, 0.0], 0.0, sp) > -1


def test_h2_zero_gradient_zero_hessian_is_zero(grid_small):
    for p in [VelocityParams(curvature_coef=1.0), VelocityParams(model="volume_power")]:
        rep = audit_h2_envelope(p, grid_small, 200, eps_p=0.0)
        assert rep["spread"] == 0.0 and rep["max"] == 0.0


def test_h2_spread_vanishes_jointly(grid_small):
    p = VelocityParams(curvature_coef=1.0)
    spreads = [audit_h2_envelope(p, grid_small, 300, e, e)["spread"] for e in (1e-2, 1e-5, 1e-8)]
    assert spreads[0] > spreads[1] > spreads[2]
    assert spreads[-1] < 1e-3
    iso = audit_h2_envelope(p, grid_small, 300, 1e-8, 1e-8, hessian=(2.0, 2.0, 0.0))
    assert iso["spread"] < 1e-3


def test_mollified_sequence_converges(grid_small):
    f = rasterize(Disk((0, 0), 0.5), grid_small)
    seq = mollified_sequence(f, 30)
    gaps = [np.max(np.abs(s.values - f.values)) for s in seq]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-6


def test_stability_and_tie_demo(grid_mid):
    f = rasterize(Rectangle((0, 0), 0.5, 0.25), grid_mid)
    rep = stability_check(f, 100, 110)
    assert rep.ok and rep.ties and not rep.tie_violations
    z = next(z for z in rep.ties if z != 100)
    demo = tie_demo(f, 100, 110, z)
    assert demo["weak_tie_violations"] == []
    assert demo["strict_tie_violations"] == [z]
    with pytest.raises(ValueError):
        tie_demo(f, 100, 110, 0)


def test_report_is_plain_json(tmp_path):
    doc = write_report(tmp_path / "r.json", "x", True, {"a": 1}, arr=np.arange(3),
                       val=np.float64(2.5))
    back = json.loads((tmp_path / "r.json").read_text())
    assert back == doc and back["observed"]["arr"] == [0, 1, 2]
