"""Experiment configuration, presets, Monte Carlo orchestration and artifacts.

An experiment is a list of *variants* (algorithm, lambda, gamma, step rule)
run on every Monte Carlo realization. Each run gets its own seed, derived
from the master seed with :class:`numpy.random.SeedSequence`, so the
ensemble is reproducible and runs are independent of execution order.
"""

from __future__ import annotations

import dataclasses
import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .estimators import EstimatorConfig, StepSizeSchedule, graph_snapshot
from .ingest import ingest_csv
from .io import file_digest, load_arrays, read_json, save_arrays, write_json, write_metric_rows
from .metrics import (
    bounds_certificate,
    calibrate_threshold,
    detection_rates,
    eier,
    nmsd,
    nmsd_per_run,
    nmse_h,
    nmse_scalar,
    offdiag_norms,
    predict_from_run,
    standard_error,
)
from .model import (
    SmoothTransitionConfig,
    generate_er_graph,
    sample_var_coefficients,
    simulate_smooth_transition,
    simulate_var,
)
from .oracle import lagged_design
from .runner import ALGORITHMS, run_online, tirso_statistics

__all__ = [
    "OUTPUT_ENV",
    "SCENARIOS",
    "STEP_RULES",
    "ExperimentConfig",
    "Variant",
    "PRESETS",
    "preset",
    "run_seeds",
    "resolve_schedule",
    "ExperimentResult",
    "run_experiment",
    "compute_metrics",
    "load_result",
    "default_output_dir",
]

log = logging.getLogger(__name__)

OUTPUT_ENV = "ONLINETOPO_OUTPUT_DIR"
SCENARIOS = ("stationary", "smooth_transition", "real_csv")
STEP_RULES = ("adaptive", "constant", "constant_over_L", "diminishing", "doubling")
DESK_RUNS = 30
DESK_LENGTH = 3000
DESK_NODES = 12
# alpha ||g||^2 < 2 keeps an LMS-type update from diverging
LMS_STABILITY = 2.0


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "runs"))


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``schedules`` entries read ``kind`` or ``kind:c``, e.g. ``adaptive:0.25``
    (c / lambda_max), ``constant_over_L:0.1`` (c / L, see
    :func:`resolve_schedule` for L), ``diminishing`` (1 / (beta t)),
    ``doubling:c`` (window constant c / sqrt(t0 2^(m-1))) or ``constant:alpha``.
    """

    name: str = "custom"
    scenario: str = "stationary"
    # model
    n_nodes: int = 12
    order: int = 2
    edge_prob: float = 0.2
    innovation_std: float = 0.005
    target_radius: float = 0.9
    kappa: float = 0.99
    t_break: int = 1000
    burn_in: int = 200
    # estimators
    algorithms: tuple = ("TISO", "TIRSO")
    lambdas: tuple = (1e-6,)
    gammas: tuple = (0.99,)
    schedules: tuple = ("adaptive:0.25",)
    init_phi_scale: float = 0.01
    t0: int = 64
    pgd_iters: int = 5
    # runs
    length: int = 3000
    runs: int = 30
    seed: int = 0
    window: tuple = (500, 3000)
    stride: int = 10
    horizons: tuple = (1,)
    workers: int = 1
    # outputs
    output_dir: str | None = None
    save_trajectories: bool = True
    graph_runs: int = 3
    # real data
    data_path: str | None = None
    sampling_interval: float = 10.0
    columns: tuple | None = None
    timestamp_col: str = "timestamp"
    desk_scale: bool = False

    def __post_init__(self):
        for name in ("algorithms", "lambdas", "gammas", "schedules", "window", "horizons"):
            val = getattr(self, name)
            if isinstance(val, (str, int, float)):
                val = (val,)
            setattr(self, name, tuple(val))
        if self.columns is not None:
            self.columns = tuple(self.columns)

    def validate(self) -> "ExperimentConfig":
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")
        if self.n_nodes < 1 or self.order < 1:
            raise ValueError("n_nodes and order must be positive")
        if not 0 <= self.edge_prob <= 1:
            raise ValueError("edge_prob must lie in [0, 1]")
        if self.innovation_std < 0:
            raise ValueError("innovation_std must be nonnegative")
        if not 0 < self.target_radius < 1:
            raise ValueError("target_radius must lie in (0, 1)")
        if self.kappa < 0 or self.t_break < 0 or self.burn_in < 0:
            raise ValueError("kappa, t_break and burn_in must be nonnegative")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad or not self.algorithms:
            raise ValueError(f"unknown algorithms {bad}; choose from {ALGORITHMS}")
        if not self.lambdas or any(lam < 0 for lam in self.lambdas):
            raise ValueError("lambdas must be a nonempty list of nonnegative values")
        if not self.gammas or any(not 0 < g < 1 for g in self.gammas):
            raise ValueError("gammas must lie in (0, 1)")
        for s in self.schedules:
            _parse_schedule(s)
        if self.init_phi_scale < 0 or self.t0 < 1 or self.pgd_iters < 1:
            raise ValueError("init_phi_scale >= 0, t0 >= 1 and pgd_iters >= 1 required")
        if self.length <= self.order + 1:
            raise ValueError("length must exceed order + 1")
        if self.runs < 1 or self.stride < 1 or self.workers < 1:
            raise ValueError("runs, stride and workers must be positive")
        if len(self.window) != 2 or self.window[0] > self.window[1]:
            raise ValueError("window must be (T1, T2) with T1 <= T2")
        if any(h < 1 for h in self.horizons):
            raise ValueError("prediction horizons must be >= 1")
        if self.scenario == "real_csv" and not self.data_path:
            raise ValueError("scenario real_csv needs data_path")
        if self.sampling_interval <= 0:
            raise ValueError("sampling_interval must be positive")
        return self

    def with_desk_scale(self) -> "ExperimentConfig":
        """Cap runs at 30, T at 3000 and N at 12; the window is clipped to T."""
        length = min(self.length, DESK_LENGTH)
        return dataclasses.replace(
            self, runs=min(self.runs, DESK_RUNS), length=length,
            n_nodes=min(self.n_nodes, DESK_NODES),
            window=(min(self.window[0], length), min(self.window[1], length)),
            desk_scale=True)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        """Build from a flat or sectioned mapping (sections are merged)."""
        flat = {}
        for key, val in data.items():
            if isinstance(val, dict):
                flat.update(val)
            else:
                flat[key] = val
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(flat) - names - {"preset"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        base = preset(flat.pop("preset")) if "preset" in flat else cls()
        return dataclasses.replace(base, **flat)

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        return cls.from_dict(yaml.safe_load(Path(path).read_text()) or {})

    def variants(self) -> list:
        """All (algorithm, lambda, gamma, schedule) combinations in a fixed order.

        TISO and OSGD ignore the forgetting factor, so they get one gamma.
        """
        out = []
        for alg, lam, sched in itertools.product(self.algorithms, self.lambdas, self.schedules):
            gammas = self.gammas if alg in ("TIRSO", "PGD_TIRSO") else self.gammas[:1]
            for g in gammas:
                out.append(Variant(alg, float(lam), float(g), sched))
        return out


@dataclass(frozen=True)
class Variant:
    algorithm: str
    reg_lambda: float
    gamma: float
    schedule: str

    @property
    def label(self) -> str:
        label = f"{self.algorithm}|lambda={self.reg_lambda:g}"
        if self.algorithm in ("TIRSO", "PGD_TIRSO"):
            label += f"|gamma={self.gamma:g}"
        return label + f"|step={self.schedule}"


def _parse_schedule(spec: str):
    kind, _, c = str(spec).partition(":")
    if kind not in STEP_RULES:
        raise ValueError(f"unknown step rule {kind!r}; choose from {STEP_RULES}")
    value = float(c) if c else {"adaptive": 0.25, "constant_over_L": 1.0, "doubling": 1.0}.get(kind)
    if kind == "constant" and value is None:
        raise ValueError("constant step needs a value, e.g. constant:0.01")
    if value is not None and value <= 0:
        raise ValueError("step constant must be positive")
    return kind, value


# Presets follow the published captions; parameters the captions leave open
# are marked "assumed".
PRESETS = {
    "fig2": dict(
        scenario="stationary", n_nodes=12, order=2, edge_prob=0.2, innovation_std=0.005,
        gammas=(0.99,), length=3000, window=(500, 3000), runs=300,
        algorithms=("TISO", "TIRSO"), lambdas=(1e-2, 1e-6, 1e-12),
        schedules=("adaptive:0.25",),
        init_phi_scale=0.005 ** 2,  # assumed: sigma^2 on the data scale
        horizons=(1,)),
    "fig3_stepsize": dict(
        scenario="stationary", n_nodes=10, order=3, edge_prob=0.2, innovation_std=0.1,
        gammas=(0.99,), lambdas=(8e-4,), length=2000, window=(500, 2000), runs=50,
        algorithms=("TISO", "TIRSO"),
        schedules=("adaptive:0.25", "constant_over_L:1", "diminishing"),
        init_phi_scale=0.1 ** 2),
    "fig4_baselines": dict(
        scenario="stationary", n_nodes=10, order=2, edge_prob=0.2, innovation_std=0.01,
        gammas=(0.99,), length=3000, window=(2400, 3000), runs=200, pgd_iters=5,
        algorithms=("TISO", "TIRSO", "OSGD", "PGD_TIRSO"),
        lambdas=(1e-6, 3e-6, 1e-5, 3e-5),  # assumed grid; best per algorithm is reported
        schedules=("constant_over_L:0.1",),
        init_phi_scale=0.01 ** 2),
    "fig6_7_transition": dict(
        scenario="smooth_transition", n_nodes=12, order=2, edge_prob=0.2, kappa=0.99,
        t_break=1000, innovation_std=0.005,  # assumed, as in the stationary figure
        length=3000, window=(2500, 3000), runs=300, algorithms=("TISO", "TIRSO"),
        lambdas=(1e-6,), gammas=(0.9, 0.95, 0.98, 0.99), schedules=("adaptive:0.25",),
        init_phi_scale=0.005 ** 2, horizons=(1,)),
    "real_forecast": dict(
        scenario="real_csv", order=8, gammas=(0.9,), algorithms=("TIRSO",),
        lambdas=(1e-4, 1e-3, 1e-2, 1e-1), schedules=("adaptive:1",), sampling_interval=10.0,
        runs=1, stride=1, window=(0, 10 ** 9), horizons=(1, 2, 5, 10, 20), init_phi_scale=0.01),
}


def preset(name: str, desk_scale: bool = False) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    cfg = ExperimentConfig(name=name, **PRESETS[name])
    return cfg.with_desk_scale() if desk_scale else cfg


def run_seeds(master_seed: int, runs: int) -> list:
    """Per-run integer seeds spawned from the master seed."""
    children = np.random.SeedSequence(master_seed).spawn(runs)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def resolve_schedule(spec: str, algorithm: str, samples, order: int, gamma: float,
                     init_phi_scale: float, t0: int, cache: dict | None = None) -> StepSizeSchedule:
    """Turn a step rule into a concrete schedule for one run.

    Data-dependent constants are measured on the run's own series. L is
    max_t lambda_max(Phi[t]) and is shared by every algorithm. TISO and
    OSGD linearize the instantaneous loss, whose Hessian is g g^T, so
    their steps are additionally capped at the LMS stability limit
    2 / max_t ||g[t]||^2, which alpha = 1/L can exceed. Diminishing steps
    1 / (beta t) use beta~ for the recursive pair and the covariance
    constant beta for the instantaneous pair, and are capped at 1/L as
    well, since beta is a minimum over the whole run and the uncapped
    early steps exceed the stability limit.
    """
    kind, value = _parse_schedule(spec)
    if kind == "adaptive":
        return StepSizeSchedule.adaptive(value)
    if kind == "constant":
        return StepSizeSchedule.constant(value)
    if kind == "doubling":
        return StepSizeSchedule.doubling(t0, value)
    cache = {} if cache is None else cache
    key = (gamma, init_phi_scale)
    if key not in cache:
        stats = tirso_statistics(samples, order, gamma, init_phi_scale)
        cache[key] = bounds_certificate(samples, order, stats.phi)
    cert = cache[key]
    instantaneous = algorithm in ("TISO", "OSGD")
    cap = math.inf if kind == "constant_over_L" else 1.0 / cert.l_max
    if instantaneous:
        if "l_inst" not in cache:
            cache["l_inst"] = float(np.max(np.sum(lagged_design(samples, order)[0] ** 2, axis=1)))
        cap = min(cap, LMS_STABILITY / cache["l_inst"])
    if kind == "constant_over_L":
        return StepSizeSchedule.constant(min(value / cert.l_max, cap))
    if instantaneous:
        beta = cert.beta if cert.beta == cert.beta and cert.beta > 0 else cert.beta_tilde
        return StepSizeSchedule.diminishing(beta, cap=cap)
    return StepSizeSchedule.diminishing(cert.beta_tilde, cap=cap)


def _make_data(cfg: ExperimentConfig, seed: int, real=None):
    """(samples, truth_fn, mask) for one run; truth_fn(times) -> (K, N, NP)."""
    if cfg.scenario == "real_csv":
        return real, None, None
    s_graph, s_coef, s_coef_b, s_noise = np.random.SeedSequence(seed).spawn(4)
    mask = generate_er_graph(cfg.n_nodes, cfg.edge_prob, seed=s_graph)
    params = sample_var_coefficients(mask, cfg.order, seed=s_coef, target_radius=cfg.target_radius)
    if cfg.scenario == "stationary":
        ts = simulate_var(params, cfg.length, cfg.innovation_std, seed=s_noise, burn_in=cfg.burn_in)
        flat = params.flat
        return ts.samples, lambda times: np.broadcast_to(flat, (len(times),) + flat.shape), mask
    params_b = sample_var_coefficients(mask, cfg.order, seed=s_coef_b,
                                       target_radius=cfg.target_radius)
    st = SmoothTransitionConfig(cfg.kappa, cfg.t_break, params, params_b)
    ts, path = simulate_smooth_transition(st, cfg.length, cfg.innovation_std, seed=s_noise,
                                          burn_in=cfg.burn_in)
    flat_path = path.reshape(cfg.length, cfg.n_nodes, -1)
    return ts.samples, lambda times: flat_path[np.asarray(times)], mask


def _run_one(cfg: ExperimentConfig, index: int, seed: int, real=None) -> dict:
    out = {"index": index, "seed": seed, "error": None}
    try:
        samples, truth_fn, mask = _make_data(cfg, seed, real)
        n = samples.shape[1]
        cache = {}
        est, final, steps, times = {}, {}, {}, None
        for v in cfg.variants():
            sched = resolve_schedule(v.schedule, v.algorithm, samples, cfg.order, v.gamma,
                                     cfg.init_phi_scale, cfg.t0, cache)
            ecfg = EstimatorConfig(n, cfg.order, v.reg_lambda, schedule=sched, forgetting=v.gamma,
                                   init_phi_scale=cfg.init_phi_scale)
            run = run_online(v.algorithm, samples, ecfg, stride=cfg.stride,
                             inner_iters=cfg.pgd_iters)
            est[v.label], final[v.label], steps[v.label] = run.estimates, run.final, run.steps
            times = run.times
        out.update(samples=samples, times=times, estimates=est, final=final, steps=steps,
                   truth=None if truth_fn is None else np.ascontiguousarray(truth_fn(times)),
                   mask=mask)
    except Exception as exc:  # one bad run must not sink the ensemble
        log.exception("run %d (seed %d) failed", index, seed)
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    seeds: list
    labels: list
    times: np.ndarray
    estimates: dict  # label -> (R, K, N, NP) over successful runs
    final: dict  # label -> (R, N, NP)
    samples: np.ndarray  # (R, T, N)
    truth: np.ndarray | None  # (R, K, N, NP)
    mask: np.ndarray | None  # (R, N, N)
    ok_runs: list
    errors: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    output_dir: Path | None = None


def _window_sel(times, window):
    sel = (times >= window[0]) & (times <= window[1])
    if not sel.any():
        sel = np.zeros_like(times, dtype=bool)
        sel[-1] = True
    return sel


def _first_below(times, curve, frac):
    idx = np.flatnonzero(curve <= frac * curve[0])
    return int(times[idx[0]]) if idx.size else None


def _mean(x):
    x = np.asarray(x, dtype=float)
    return float(np.nanmean(x)) if np.any(np.isfinite(x)) else math.nan


def compute_metrics(res: ExperimentResult) -> tuple[list, dict]:
    """Long-format metric rows and the JSON summary for an ensemble."""
    cfg, times = res.config, res.times
    sel = _window_sel(times, cfg.window)
    rows, per_variant = [], {}
    synthetic = res.truth is not None
    for label in res.labels:
        est = res.estimates[label]
        info = {}
        if synthetic:
            curve = nmsd(est, res.truth)
            per_run = nmsd_per_run(est, res.truth)
            se = standard_error(per_run)
            for k, t in enumerate(times):
                rows.append((f"{label}/nmsd", "mean", int(t), curve[k]))
                rows.append((f"{label}/nmsd", "se", int(t), se[k]))
            for r, run_id in enumerate(res.ok_runs):
                rows.extend((f"{label}/nmsd", str(run_id), int(t), per_run[r, k])
                            for k, t in enumerate(times))
            cal = calibrate_threshold(est[:, sel], res.mask, cfg.order)
            md, fa = detection_rates(est, res.mask, cal.delta, cfg.order)
            err = eier(est, res.mask, cal.delta, cfg.order)
            for name, series in (("p_md", md), ("p_fa", fa), ("eier", err)):
                rows.extend((f"{label}/{name}", "mean", int(t), series[k])
                            for k, t in enumerate(times))
            zeros = (offdiag_norms(est[:, sel], cfg.order) == 0).sum(axis=-1)
            final_zero = (offdiag_norms(res.final[label], cfg.order) == 0).sum(axis=-1)
            info.update(
                nmsd_window_mean=_mean(curve[sel]), nmsd_final=float(curve[-1]),
                nmsd_initial=float(curve[0]), half_time=_first_below(times, curve, 0.5),
                delta=cal.delta, calibration_feasible=cal.feasible,
                p_md_window_mean=_mean(md[sel]), p_fa_window_mean=_mean(fa[sel]),
                eier_window_mean=_mean(err[sel]), eier_final=float(err[-1]),
                zero_groups_window_total=int(zeros.sum()),
                zero_groups_window_mean=float(zeros.mean()),
                zero_groups_final_mean=float(final_zero.mean()))
        for h in cfg.horizons:
            tg, pr = [], []
            for r in range(est.shape[0]):
                targets, preds, used = predict_from_run(est[r], times, res.samples[r], h)
                tg.append(targets)
                pr.append(preds)
            tg, pr = np.array(tg), np.array(pr)
            used_times = times[times - 1 + h < res.samples.shape[1]]
            curve = nmse_h(tg, pr)
            rows.extend((f"{label}/nmse_{h}", "mean", int(t), curve[k])
                        for k, t in enumerate(used_times))
            wsel = _window_sel(used_times, cfg.window)
            info[f"nmse_{h}_window_mean"] = _mean(curve[wsel])
            info[f"nmse_{h}_pooled"] = nmse_scalar(tg[:, wsel], pr[:, wsel])
        per_variant[label] = info
    if synthetic:
        for h in cfg.horizons:
            tg, pr = [], []
            for r in range(res.truth.shape[0]):
                targets, preds, _ = predict_from_run(res.truth[r], times, res.samples[r], h)
                tg.append(targets)
                pr.append(preds)
            curve = nmse_h(np.array(tg), np.array(pr))
            used_times = times[times - 1 + h < res.samples.shape[1]]
            rows.extend((f"genie/nmse_{h}", "mean", int(t), curve[k])
                        for k, t in enumerate(used_times))
    summary = {
        "name": cfg.name,
        "scenario": cfg.scenario,
        "runs_requested": cfg.runs,
        "runs_completed": len(res.ok_runs),
        "attrition": len(res.errors),
        "errors": {str(k): v for k, v in res.errors.items()},
        "variants": per_variant,
        "best_lambda": _best_lambda(per_variant, synthetic, cfg.horizons),
    }
    return rows, summary


def _best_lambda(per_variant, synthetic, horizons):
    """Per algorithm (and gamma/step), the lambda minimizing the window NMSD
    (synthetic) or the pooled NMSE at the first horizon (real data)."""
    key = "nmsd_window_mean" if synthetic else f"nmse_{horizons[0]}_pooled"
    groups = {}
    for label, info in per_variant.items():
        parts = label.split("|")
        group = "|".join(p for p in parts if not p.startswith("lambda="))
        lam = next(p for p in parts if p.startswith("lambda=")).split("=", 1)[1]
        val = info.get(key, math.nan)
        if val == val and (group not in groups or val < groups[group][1]):
            groups[group] = (lam, val)
    return {g: {"lambda": float(lam), key: v} for g, (lam, v) in groups.items()}


def _bundle(res: ExperimentResult) -> dict:
    arrays = {"times": res.times, "samples": res.samples, "ok_runs": np.array(res.ok_runs)}
    if res.truth is not None:
        arrays.update(truth=res.truth, mask=res.mask)
    for i, label in enumerate(res.labels):
        arrays[f"est_{i}"] = res.estimates[label]
        arrays[f"final_{i}"] = res.final[label]
    return arrays


def _write_artifacts(res: ExperimentResult, out: Path) -> dict:
    cfg = res.config
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    files["metrics"] = write_metric_rows(out / "metrics.csv", res.rows)
    files["summary"] = write_json(out / "summary.json", res.summary)
    (out / "config.yaml").write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
    files["config"] = out / "config.yaml"
    if cfg.save_trajectories:
        files["trajectories"] = save_arrays(out / "trajectories.npz", _bundle(res))
    if res.truth is not None:
        for i, label in enumerate(res.labels):
            delta = res.summary["variants"][label]["delta"]
            for r, run_id in enumerate(res.ok_runs[: cfg.graph_runs]):
                key = f"graph_{i}_run{run_id}"
                files[key] = write_json(out / "graphs" / f"variant{i}_run{run_id}.json",
                                        dict(graph_snapshot(res.final[label][r], cfg.order, delta),
                                             variant=label, run=run_id))
        for r, run_id in enumerate(res.ok_runs[: cfg.graph_runs]):
            files[f"truth_run{run_id}"] = write_json(
                out / "graphs" / f"truth_run{run_id}.json",
                dict(graph_snapshot(res.truth[r, -1], cfg.order, 1e-300), run=run_id))
    manifest = {
        "package_version": __version__,
        "config": cfg.to_dict(),
        "master_seed": cfg.seed,
        "run_seeds": res.seeds,
        "variants": res.labels,
        "ok_runs": res.ok_runs,
        "files": {k: {"path": str(Path(p).relative_to(out)), "sha256": file_digest(p)}
                  for k, p in sorted(files.items())},
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def run_experiment(cfg: ExperimentConfig, output_dir=None) -> ExperimentResult:
    """Run every variant on every Monte Carlo realization and aggregate.

    Artifacts are written when ``output_dir`` (or ``cfg.output_dir``) is set.
    """
    cfg.validate()
    real = None
    if cfg.scenario == "real_csv":
        ing = ingest_csv(cfg.data_path, cfg.sampling_interval, cfg.columns, cfg.timestamp_col)
        real = ing.series.samples
        cfg = dataclasses.replace(cfg, runs=1, n_nodes=real.shape[1], length=real.shape[0])
    seeds = run_seeds(cfg.seed, cfg.runs)
    if cfg.workers > 1 and cfg.runs > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outs = list(pool.map(_run_one, [cfg] * cfg.runs, range(cfg.runs), seeds,
                                 [real] * cfg.runs))
    else:
        outs = [_run_one(cfg, i, s, real) for i, s in enumerate(seeds)]
    ok = [o for o in outs if o["error"] is None]
    errors = {o["index"]: o["error"] for o in outs if o["error"] is not None}
    if not ok:
        raise RuntimeError(f"all {cfg.runs} runs failed; first error: {next(iter(errors.values()))}")
    labels = [v.label for v in cfg.variants()]
    res = ExperimentResult(
        config=cfg, seeds=seeds, labels=labels, times=ok[0]["times"],
        estimates={lb: np.stack([o["estimates"][lb] for o in ok]) for lb in labels},
        final={lb: np.stack([o["final"][lb] for o in ok]) for lb in labels},
        samples=np.stack([o["samples"] for o in ok]),
        truth=None if ok[0]["truth"] is None else np.stack([o["truth"] for o in ok]),
        mask=None if ok[0]["mask"] is None else np.stack([o["mask"] for o in ok]),
        ok_runs=[o["index"] for o in ok], errors=errors)
    res.rows, res.summary = compute_metrics(res)
    out = output_dir or cfg.output_dir
    if out is not None:
        res.output_dir = Path(out)
        _write_artifacts(res, res.output_dir)
    return res


def load_result(directory) -> ExperimentResult:
    """Rebuild an :class:`ExperimentResult` from stored artifacts."""
    directory = Path(directory)
    manifest = read_json(directory / "manifest.json")
    cfg = ExperimentConfig.from_dict(manifest["config"])
    arrays = load_arrays(directory / "trajectories.npz")
    labels = manifest["variants"]
    return ExperimentResult(
        config=cfg, seeds=manifest["run_seeds"], labels=labels, times=arrays["times"],
        estimates={lb: arrays[f"est_{i}"] for i, lb in enumerate(labels)},
        final={lb: arrays[f"final_{i}"] for i, lb in enumerate(labels)},
        samples=arrays["samples"], truth=arrays.get("truth"), mask=arrays.get("mask"),
        ok_runs=[int(r) for r in arrays["ok_runs"]], output_dir=directory)

