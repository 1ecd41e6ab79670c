import dataclasses

import numpy as np
import pytest
import yaml

import onlinetopo.harness as harness
from onlinetopo.estimators import StepSizeSchedule
from onlinetopo.harness import (
    PRESETS,
    ExperimentConfig,
    compute_metrics,
    load_result,
    preset,
    resolve_schedule,
    run_experiment,
    run_seeds,
)
from onlinetopo.io import file_digest, read_json
from onlinetopo.model import generate_er_graph, sample_var_coefficients, simulate_var


def _tiny(**kw):
    base = dict(n_nodes=4, order=2, edge_prob=0.4, innovation_std=0.1, length=200, runs=3,
                window=(100, 200), stride=5, lambdas=(1e-3,), graph_runs=1)
    base.update(kw)
    return ExperimentConfig(**base)


def test_presets_match_captions():
    f2 = preset("fig2")
    assert (f2.n_nodes, f2.order, f2.edge_prob, f2.innovation_std) == (12, 2, 0.2, 0.005)
    assert f2.gammas == (0.99,) and f2.length == 3000 and f2.window == (500, 3000)
    assert f2.runs == 300 and set(f2.lambdas) == {1e-2, 1e-6, 1e-12}
    f3 = preset("fig3_stepsize")
    assert (f3.n_nodes, f3.order, f3.innovation_std, f3.lambdas, f3.length, f3.runs) == (
        10, 3, 0.1, (8e-4,), 2000, 50)
    f4 = preset("fig4_baselines")
    assert (f4.n_nodes, f4.order, f4.innovation_std, f4.length, f4.pgd_iters, f4.runs) == (
        10, 2, 0.01, 3000, 5, 200)
    assert f4.schedules == ("constant_over_L:0.1",)
    assert set(f4.algorithms) == {"TISO", "TIRSO", "OSGD", "PGD_TIRSO"}
    f6 = preset("fig6_7_transition")
    assert (f6.kappa, f6.t_break, f6.gammas) == (0.99, 1000, (0.9, 0.95, 0.98, 0.99))
    real = preset("real_forecast")
    assert (real.order, real.gammas, real.sampling_interval) == (8, (0.9,), 10.0)
    for name in PRESETS:
        preset(name).validate() if name != "real_forecast" else None


def test_unknown_preset_lists_available():
    with pytest.raises(ValueError, match="fig2"):
        preset("fig9")


def test_desk_scale_caps():
    cfg = preset("fig2", desk_scale=True)
    assert cfg.runs == 30 and cfg.length == 3000 and cfg.n_nodes == 12 and cfg.desk_scale
    big = dataclasses.replace(cfg, length=9000, n_nodes=40, runs=500, window=(100, 9000))
    capped = big.with_desk_scale()
    assert (capped.length, capped.n_nodes, capped.runs, capped.window) == (3000, 12, 30, (100, 3000))


def test_validation_errors():
    for bad in (dict(scenario="x"), dict(algorithms=("NOPE",)), dict(gammas=(1.0,)),
                dict(schedules=("constant",)), dict(schedules=("weird:1",)), dict(window=(5, 1)),
                dict(length=2), dict(scenario="real_csv")):
        with pytest.raises(ValueError):
            _tiny(**bad).validate()


def test_yaml_round_trip_and_sections(tmp_path):
    cfg = _tiny(schedules=("adaptive:0.5", "diminishing"))
    p = tmp_path / "c.yaml"
    p.write_text(yaml.safe_dump(cfg.to_dict()))
    assert ExperimentConfig.from_yaml(p) == cfg
    p.write_text(yaml.safe_dump({"preset": "fig2", "model": {"n_nodes": 5},
                                 "runs": {"runs": 2}}))
    got = ExperimentConfig.from_yaml(p)
    assert got.n_nodes == 5 and got.runs == 2 and got.lambdas == preset("fig2").lambdas
    p.write_text("bogus: 1\n")
    with pytest.raises(ValueError):
        ExperimentConfig.from_yaml(p)


def test_variants_skip_gamma_for_instantaneous_algorithms():
    cfg = _tiny(algorithms=("TISO", "TIRSO"), gammas=(0.9, 0.99), lambdas=(1e-3, 1e-2))
    labels = [v.label for v in cfg.variants()]
    assert len(labels) == 2 + 4
    assert "TISO|lambda=0.001|step=adaptive:0.25" in labels
    assert "TIRSO|lambda=0.01|gamma=0.9|step=adaptive:0.25" in labels


def test_run_seeds_deterministic_and_distinct():
    a = run_seeds(7, 5)
    assert a == run_seeds(7, 5) and len(set(a)) == 5
    assert run_seeds(7, 3) == a[:3]


def test_resolve_schedule():
    params = sample_var_coefficients(generate_er_graph(3, 0.5, seed=0), 2, seed=0)
    y = simulate_var(params, 300, 1.0, seed=0).samples
    cache = {}
    tirso = resolve_schedule("constant_over_L:0.5", "TIRSO", y, 2, 0.99, 0.01, 64, cache)
    cert = cache[(0.99, 0.01)]
    assert tirso.value == pytest.approx(0.5 / cert.l_max)
    tiso = resolve_schedule("constant_over_L:0.5", "TISO", y, 2, 0.99, 0.01, 64, cache)
    assert tiso.value == pytest.approx(min(0.5 / cert.l_max, 2.0 / cache["l_inst"]))
    dim = resolve_schedule("diminishing", "TIRSO", y, 2, 0.99, 0.01, 64, cache)
    assert dim.kind == "diminishing" and dim.beta_tilde == cert.beta_tilde
    assert dim.cap == pytest.approx(1 / cert.l_max)
    assert resolve_schedule("doubling:2", "TISO", y, 2, 0.99, 0.01, 16, cache) == \
        StepSizeSchedule.doubling(16, 2.0)
    assert resolve_schedule("adaptive", "TIRSO", y, 2, 0.99, 0.01, 16).kind == "adaptive"


def test_tiny_experiment_is_deterministic(tmp_path):
    cfg = _tiny(algorithms=("TISO", "TIRSO", "OSGD", "PGD_TIRSO"))
    a = run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for name in ("metrics.csv", "summary.json", "trajectories.npz"):
        assert file_digest(tmp_path / "a" / name) == file_digest(tmp_path / "b" / name)
    assert a.summary["runs_completed"] == 3
    for info in a.summary["variants"].values():
        assert 0 <= info["nmsd_window_mean"] < 2
        assert 0 <= info["eier_window_mean"] <= 1


def test_manifest_lists_every_artifact(tmp_path):
    run_experiment(_tiny(), tmp_path)
    man = read_json(tmp_path / "manifest.json")
    assert man["run_seeds"] == run_seeds(0, 3) and man["master_seed"] == 0
    for entry in man["files"].values():
        assert file_digest(tmp_path / entry["path"]) == entry["sha256"]
    assert "metrics" in man["files"] and "trajectories" in man["files"]
    assert (tmp_path / "graphs" / "truth_run0.json").exists()


def test_metrics_recomputed_from_artifacts(tmp_path):
    res = run_experiment(_tiny(), tmp_path)
    again = load_result(tmp_path)
    rows, summary = compute_metrics(again)
    assert summary == res.summary
    assert len(rows) == len(res.rows)


def test_failed_runs_are_reported_not_fatal(tmp_path, monkeypatch):
    real_run = harness.run_online
    bad_seed = run_seeds(0, 3)[1]

    def flaky(alg, samples, cfg, **kw):
        if np.array_equal(samples, harness._make_data(_tiny(), bad_seed)[0]):
            raise FloatingPointError("boom")
        return real_run(alg, samples, cfg, **kw)

    monkeypatch.setattr(harness, "run_online", flaky)
    res = run_experiment(_tiny(), tmp_path)
    assert res.ok_runs == [0, 2] and 1 in res.errors
    assert res.summary["attrition"] == 1 and "boom" in res.summary["errors"]["1"]


def test_real_csv_scenario(tmp_path):
    params = sample_var_coefficients(generate_er_graph(3, 0.5, seed=1), 2, seed=1)
    y = simulate_var(params, 150, 1.0, seed=1).samples
    lines = ["timestamp,a,b,c"] + [f"{10 * t},{r[0]},{r[1]},{r[2]}" for t, r in enumerate(y)]
    path = tmp_path / "d.csv"
    path.write_text("\n".join(lines) + "\n")
    cfg = dataclasses.replace(preset("real_forecast"), data_path=str(path), order=2,
                              horizons=(1, 3), lambdas=(1e-3, 1e-1))
    res = run_experiment(cfg)
    assert res.truth is None and res.samples.shape == (1, 150, 3)
    best = res.summary["best_lambda"]["TIRSO|gamma=0.9|step=adaptive:1"]
    assert best["lambda"] in (1e-3, 1e-1)
    for info in res.summary["variants"].values():
        assert info["nmse_1_pooled"] < info["nmse_3_pooled"] + 1.0


def test_default_output_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(harness.OUTPUT_ENV, str(tmp_path))
    assert harness.default_output_dir() == tmp_path
