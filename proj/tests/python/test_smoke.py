import json
import math

import pytest

import oucl


def test_svc_set_exactness():
    assert oucl.svc_length(10, "1/4") == pytest.approx(3073 / 4096, abs=1e-15)
    assert oucl.svc_overlap(10, "1/4", 0.0) == pytest.approx(3073 / 4096, abs=1e-15)
    assert oucl.svc_overlap(10, "1/4", 0.05) >= 0.25


def test_phi_inverse_closed_form():
    for alpha in (0.5, 1.0, 1.5):
        m = oucl.scalar_model(-1.0, 1.0, oucl.stable_measure(alpha))
        for t in (0.1, 1.0, 10.0):
            expected = (alpha / (1.0 - math.exp(-alpha * t))) ** (1.0 / alpha)
            assert oucl.phi_inverse(m, t, 1.0) == pytest.approx(expected, rel=1e-6)


def test_sampling_and_tv():
    m = oucl.scalar_model(-1.0, 1.0, oucl.uniform_measure(0.0, 1.0))
    xs = oucl.sample_endpoints(m, 1.0, [0.0], 4000, seed=7)
    ys = oucl.sample_endpoints(m, 1.0, [0.0], 4000, seed=7)
    tv, _ = oucl.tv_histogram(xs, ys, bins=32)
    assert tv == 0.0
    zs = oucl.sample_endpoints(m, 1.0, [25.0], 4000, seed=8)
    tv2, _ = oucl.tv_histogram(xs, zs, bins=32)
    assert tv2 > 1.5


def test_coupled_walk_couples():
    m = oucl.scalar_model(-1.0, 1.0, oucl.svc_measure(10, "1/4"))
    coupled = 0
    for i in range(40):
        run = oucl.coupled_walk(m, 0.1, 50.0, [0.05], [0.0], seed=11, stream=i)
        coupled += bool(run["coupled"])
    assert coupled >= 25


def test_reflection_sweep():
    assert oucl.reflection_sweep_ok(10)


def test_run_experiment_and_errors(tmp_path):
    cfg = {
        "schema_version": 1,
        "experiment": "cantor_demo",
        "model": {"A": -1.0, "B": 1.0, "triplet": {"nu": {"type": "svc"}}},
        "svc_level": 8,
        "delta": 0.1,
        "grid_points": 41,
        "seed": 3,
        "output_dir": str(tmp_path / "out"),
    }
    summary = json.loads(oucl.run_experiment(json.dumps(cfg)))
    assert summary["verdict"] == "pass"
    assert (tmp_path / "out" / "manifest.json").exists()

    with pytest.raises(oucl.ConfigError):
        oucl.run_experiment(json.dumps({**cfg, "experiment": "unknown"}))

    report = json.loads(oucl.check_model(json.dumps(cfg)))
    assert report["gates_pass"] is True
