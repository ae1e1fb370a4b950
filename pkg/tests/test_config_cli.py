import json
import os

import pytest
from hypothesis import given, settings, strategies as st

from nlfront.cli import main, run
from nlfront.config import (CHECKS, ConfigError, GridConfig, InitConfig, RunConfig, TimeConfig,
                            VelocityConfig, format_config, parse_config)

MINIMAL = "[grid]\nh = 0.05\ndims = 81, 81\n"


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.grid.h == 0.05 and cfg.grid.dims == (81, 81)
    assert cfg.init == InitConfig()
    assert cfg.velocity.weight == "constant" and cfg.velocity.weight_value == 1.0
    assert cfg.command == "run"


def test_missing_weight_logs_notice(caplog):
    with caplog.at_level("INFO"):
        parse_config(MINIMAL + "[velocity]\nmodel = tomographic\n")
    assert "constant g" in caplog.text


def test_all_errors_reported_with_lines():
    text = "[grid]\nh = -1\ndims = 3, x\nwho = 1\n[time]\nT = 0\ncfl_safety = 2\n[nope]\n"
    with pytest.raises(ConfigError) as e:
        parse_config(text)
    errs = e.value.errors
    assert any(m.startswith("line 2:") and "grid.h > 0" in m for m in errs)
    assert any(m.startswith("line 3:") and "type mismatch" in m for m in errs)
    assert any(m.startswith("line 4:") and "unknown key" in m for m in errs)
    assert any(m.startswith("line 6:") for m in errs)
    assert any(m.startswith("line 7:") for m in errs)
    assert any(m.startswith("line 8:") and "unknown section" in m for m in errs)


def test_cross_field_and_fit_errors():
    with pytest.raises(ConfigError, match="r_inner < init.r_outer"):
        parse_config(MINIMAL + "[init]\nshape = annulus\nr_inner = 0.7\nr_outer = 0.5\n")
    with pytest.raises(ConfigError, match="margin"):
        parse_config(MINIMAL + "[init]\nshape = disk\nradius = 1.99\n")
    with pytest.raises(ConfigError, match="weight file not found"):
        parse_config(MINIMAL + "[velocity]\nweight = /nonexistent/g.csv\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(MINIMAL + "h = 0.1\n")
    with pytest.raises(ConfigError, match="finite"):
        parse_config("[grid]\nh = inf\n")


finite = st.floats(0.01, 10, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(h=st.sampled_from([0.01, 0.02, 0.05]), T=finite, amp=st.floats(0, 5),
       kappa=st.floats(0, 2), model=st.sampled_from(["tomographic", "volume_power", "general_k1"]),
       delta=st.one_of(st.none(), st.floats(1e-9, 1e-2)),
       times=st.lists(st.floats(0.001, 1.0), max_size=3),
       shape=st.sampled_from(["disk", "rectangle", "annulus"]),
       cmd=st.sampled_from(["run", "check", "demo-tomo", "demo-rectangle"]))
def test_round_trip(h, T, amp, kappa, model, delta, times, shape, cmd):
    n = int(round(4 / h)) + 1
    cfg = RunConfig(command=cmd, grid=GridConfig(h=h, dims=(n, n)),
                    init=InitConfig(shape=shape),
                    velocity=VelocityConfig(model=model, amplitude=amp, curvature_coef=kappa,
                                            delta=delta),
                    time=TimeConfig(T=T, snapshot_times=tuple(times)))
    assert parse_config(format_config(cfg)) == cfg


def _write(tmp_path, text):
    p = tmp_path / "c.cfg"
    p.write_text(text)
    return str(p)


SMALL = ("[grid]\nh = 0.05\ndims = 81, 81\n[init]\nshape = disk\nradius = 0.6\n"
         "[time]\nT = 0.05\nsnapshot_times = 0.025\n")


def test_cli_config_error_writes_nothing(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", _write(tmp_path, "[grid]\nh = -1\n"), "--out", str(out)]) == 2
    assert not out.exists()
    assert main(["run", "--config", str(tmp_path / "missing.cfg"), "--out", str(out)]) == 2
    cfg = _write(tmp_path, SMALL.replace("disk", "rectangle"))
    assert main(["demo-tomo", "--config", cfg, "--out", str(out)]) == 2
    assert main(["check", "--config", cfg, "--out", str(out)]) == 2
    assert not out.exists()


def test_cli_run_outputs_deterministic(tmp_path):
    cfg = _write(tmp_path, SMALL)
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["run", "--config", cfg, "--out", str(o)]) == 0
    files = sorted(os.path.relpath(os.path.join(d, f), outs[0])
                   for d, _, fs in os.walk(outs[0]) for f in fs)
    assert "metrics.jsonl" in files and "summary.json" in files
    assert "snapshots/u_0001.csv" in files and "contours/contour_0002.csv" in files
    for f in files:
        if f != "summary.json":
            assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    s = json.loads((outs[0] / "summary.json").read_text())
    assert s["reason"] == "reached_T" and s["exit_status"] == 0


def test_cli_demo_rectangle_side_speeds(tmp_path):
    cfg = _write(tmp_path, "[grid]\nh = 0.02\ndims = 201, 201\n[init]\nshape = rectangle\n"
                           "[time]\nT = 0.05\n")
    assert main(["demo-rectangle", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    s = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert abs(s["vertical_side_speed"] - 1.0) <= 2 * 0.02
    assert s["horizontal_side_rhs"] == 0.0
    assert (tmp_path / "o" / "extent.csv").exists()


@pytest.mark.parametrize("name", ["lemma51", "h2", "h3", "stability"])
def test_cli_fast_checks_pass(tmp_path, name):
    cfg = _write(tmp_path, SMALL)
    assert main(["check", name, "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / f"check_{name}.json").read_text())
    assert rep["passed"] is True and rep["check"] == name


def test_cli_check_comparison_exit_status(tmp_path, monkeypatch):
    cfg = _write(tmp_path, SMALL + "[check]\npairs = 2\n")
    assert main(["check", "comparison", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    import nlfront.cli as cli
    from nlfront.properties import ComparisonReport
    monkeypatch.setattr(cli, "check_comparison",
                        lambda *a, **k: ComparisonReport(2e-10, 0.01, 3, 1e-10))
    assert main(["check", "comparison", "--config", cfg, "--out", str(tmp_path / "p")]) == 1
    rep = json.loads((tmp_path / "p" / "check_comparison.json").read_text())
    assert rep["passed"] is False and rep["observed"]["sup_violation"] > 1e-10


def test_run_rejects_unknown_check(tmp_path):
    cfg = parse_config(SMALL)
    assert run(RunConfig(command="check", grid=cfg.grid, init=cfg.init, time=cfg.time),
               str(tmp_path / "o"), "bogus") == 2
    assert set(CHECKS) >= {"comparison", "relabel"}
