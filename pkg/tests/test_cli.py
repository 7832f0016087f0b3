"""Config loading, pipeline orchestration, exit codes, comparisons."""

import json

import numpy as np
import pytest

from phmor.cli import (
    RunConfig,
    MorConfig,
    _feedback,
    _input_fn,
    _rom_storage,
    compare,
    load_config,
    main,
    run_pipeline,
)
from phmor.errors import ConfigError, GridMismatch
from phmor.simulate import simulate


def write_config(path, **overrides):
    doc = {
        "model": {"preset": "wave_mixed"},
        "mesh": {"N1": 24},
        "simulation": {
            "dt": 0.005,
            "T": 0.5,
            "input": {"kind": "sine", "amplitude": 1.0, "omega": 1.6, "channel": 2},
            "x0": {"kind": "zero"},
        },
        "mor": {
            "freq_band": [0.9, 8.5],
            "n_points": 8,
            "spacing": "linear",
            "k": 8,
            "dr_scale": 1e-9,
            "left_eval": "mirror",
        },
        "outputs": {"directory": str(path.parent / "artifacts")},
    }
    for key, val in overrides.items():
        if val is None:
            doc.pop(key, None)
        else:
            doc[key] = val
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture(scope="module")
def wave_pipeline(tmp_path_factory):
    """One production-size run shared by the slower checks."""
    tmp = tmp_path_factory.mktemp("pipe")
    cfg_path = write_config(
        tmp / "cfg.json",
        mesh={"N1": 100},
        mor={
            "freq_band": [0.9, 8.5],
            "n_points": 16,
            "spacing": "linear",
            "k": 16,
            "dr_scale": 1e-9,
            "left_eval": "mirror",
        },
    )
    cfg = load_config(cfg_path)
    return run_pipeline(cfg, need_sim=False)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        load_config(tmp_path / "nope.json")
    assert "[config]" in str(excinfo.value)


def test_load_config_rejects_bad_dt(tmp_path):
    p = write_config(tmp_path / "c.json")
    doc = json.loads(p.read_text())
    doc["simulation"]["dt"] = 0.0
    p.write_text(json.dumps(doc))
    with pytest.raises(ConfigError) as excinfo:
        load_config(p)
    assert "[config]" in str(excinfo.value)


def test_load_config_rejects_unknown_input_kind(tmp_path):
    p = write_config(tmp_path / "c.json")
    doc = json.loads(p.read_text())
    doc["simulation"]["input"] = {"kind": "chirp"}
    p.write_text(json.dumps(doc))
    with pytest.raises(ConfigError):
        load_config(p)


def test_input_fn_ramp_and_cutoff():
    u = _input_fn(
        [
            {"kind": "sine", "amplitude": 2.0, "omega": 1.6, "channel": 1,
             "ramp": 2.0, "t_end": 5.0},
            {"kind": "step", "amplitude": 0.5, "channel": 2},
        ],
        2,
    )
    early = u(0.01)
    assert abs(early[0]) < 1e-3  # smooth start
    assert early[1] == 0.5
    mid = u(3.0)
    assert mid[0] == pytest.approx(2.0 * np.sin(1.6 * 3.0))
    assert u(6.0)[0] == 0.0  # past t_end
    assert u(6.0)[1] == 0.5


def test_input_fn_bad_channel_and_ramp():
    with pytest.raises(ConfigError):
        _input_fn([{"kind": "sine", "channel": 3}], 2)
    with pytest.raises(ConfigError):
        _input_fn([{"kind": "sine", "channel": 1, "ramp": -1.0}], 2)


def test_input_fn_zero_only_is_none():
    assert _input_fn([{"kind": "zero"}], 2) is None


def test_feedback_parsing():
    fb = _feedback({"K": {"diag": [0.0, 0.0, 0.1, 0.1]}, "r": [0, 0, 1, -2]}, 4)
    assert np.allclose(fb.K, np.diag([0.0, 0.0, 0.1, 0.1]))
    assert np.allclose(fb.r, [0.0, 0.0, 1.0, -2.0])
    fb2 = _feedback({"K": 0.2}, 2)
    assert np.allclose(fb2.K, 0.2 * np.eye(2))
    with pytest.raises(ConfigError):
        _feedback({"K": {"diag": [1.0]}}, 2)
    with pytest.raises(ConfigError):
        _feedback({"K": 0.1, "r": [1.0, 2.0, 3.0]}, 2)


def test_main_validate_ok(tmp_path, capsys):
    p = write_config(tmp_path / "c.json")
    assert main(["validate", "--config", str(p)]) == 0
    assert "model ok" in capsys.readouterr().out


def test_main_config_error_exit_2(tmp_path, capsys):
    p = write_config(tmp_path / "c.json")
    doc = json.loads(p.read_text())
    doc["simulation"]["dt"] = -1.0
    p.write_text(json.dumps(doc))
    assert main(["run", "--config", str(p)]) == 2
    assert "[config]" in capsys.readouterr().err


def test_main_certificate_failure_exit_3(tmp_path, capsys):
    p = write_config(tmp_path / "c.json")
    doc = json.loads(p.read_text())
    doc["mor"]["dr_scale"] = 1e-4
    doc["mor"]["force_passivate"] = True
    p.write_text(json.dumps(doc))
    assert main(["run", "--config", str(p)]) == 3
    assert "certification" in capsys.readouterr().err.lower()


def test_main_run_artifacts_and_determinism(tmp_path, capsys):
    p = write_config(tmp_path / "c.json")
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert main(["run", "--config", str(p), "--out", str(out1)]) == 0
    assert main(["run", "--config", str(p), "--out", str(out2)]) == 0
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m1["files"] == m2["files"]
    for name in (
        "trajectory_fom.csv",
        "trajectory_rom.csv",
        "bode_fom.csv",
        "compare.csv",
        "certificate_prelim.csv",
    ):
        assert name in m1["files"]
        assert (out1 / name).exists()
    assert m1["final_verdict"] == "passive"


def test_rom_storage_selection(wave_pipeline):
    res = wave_pipeline
    S = _rom_storage(res.final)
    assert S is not None
    assert np.array_equal(S, S.T)
    lam = np.linalg.eigvalsh(S)
    assert lam[0] > -1e-12 * lam[-1]
    assert lam[-1] > 0.0
    assert _rom_storage(res.prelim) is None


def test_compare_identical_is_zero(wave_pipeline):
    res = wave_pipeline
    sys = res.fom_sys
    traj = simulate(sys, dt=1e-2, n_steps=50, u=lambda t: np.array([0.0, np.sin(t)]))
    rep = compare(traj, traj)
    assert np.max(rep.output_error) == 0.0
    assert rep.state_error is None


def test_compare_grid_mismatch(wave_pipeline):
    res = wave_pipeline
    sys = res.fom_sys
    t1 = simulate(sys, dt=1e-2, n_steps=50)
    t2 = simulate(sys, dt=2e-2, n_steps=50)
    with pytest.raises(GridMismatch):
        compare(t1, t2)


def drive_and_compare(res, omega, ramp):
    signal = [{"kind": "sine", "amplitude": 1.0, "omega": omega, "channel": 2,
               "ramp": ramp}]
    u = _input_fn(signal, 2)
    dt, n = 1e-3, 10000
    ft = simulate(res.fom_sys, dt=dt, n_steps=n, u=u, store_every=10)
    rt = simulate(res.final.to_descriptor(), dt=dt, n_steps=n, u=u, store_every=10)
    return compare(ft, rt, T=res.final.T, weight=res.fom.E)


def test_in_band_drive_small_error(wave_pipeline):
    rep = drive_and_compare(wave_pipeline, omega=1.6, ramp=2.0)
    assert rep.max_output_error <= 1e-2 * rep.output_scale
    assert rep.max_state_error <= 5e-2 * rep.state_scale


def test_out_of_band_drive_large_error(wave_pipeline):
    # sampling stops at 8.5 rad/s; a 50 rad/s drive is not represented
    rep = drive_and_compare(wave_pipeline, omega=50.0, ramp=2.0)
    assert rep.max_output_error > 0.1 * rep.output_scale
