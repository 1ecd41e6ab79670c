"""Command-line entry point: ``python -m onlinetopo <subcommand>``.

Subcommands: simulate, run, ingest, metrics, check-bounds. Experiment flags
mirror :class:`ExperimentConfig` fields (``--n-nodes``, ``--lambdas`` ...).
The default output directory comes from ``$ONLINETOPO_OUTPUT_DIR``.

Exit codes: 0 success, 1 a requested check failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import typing
from pathlib import Path

import numpy as np

from .certify import doubling_regret_study, hindsight_gap_study, log_regret_study, tracking_study
from .harness import (
    PRESETS,
    ExperimentConfig,
    _make_data,
    compute_metrics,
    default_output_dir,
    load_result,
    preset,
    run_experiment,
    run_seeds,
)
from .ingest import IngestError, ingest_csv
from .io import write_ground_truth, write_json, write_metric_rows, write_series_csv
from .model import TimeSeriesMatrix, VarParameters

log = logging.getLogger("onlinetopo")

_SKIP = {"name", "output_dir", "desk_scale"}


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--preset", choices=sorted(PRESETS), help="start from a named preset")
    p.add_argument("--config", type=Path, help="YAML config file (applied before flags)")
    p.add_argument("--desk-scale", action="store_true", help="cap runs, T and N for a laptop")
    hints = typing.get_type_hints(ExperimentConfig)
    for f in dataclasses.fields(ExperimentConfig):
        if f.name in _SKIP:
            continue
        flag = "--" + f.name.replace("_", "-")
        default = f.default
        if isinstance(default, tuple) or f.name == "columns":
            kind = type(default[0]) if default else str
            p.add_argument(flag, nargs="+", type=kind if kind in (int, float) else str)
        elif isinstance(default, bool):
            p.add_argument(flag, type=lambda s: s.lower() in ("1", "true", "yes"))
        elif hints[f.name] in (int, float, str):
            p.add_argument(flag, type=hints[f.name])
        else:
            p.add_argument(flag, type=str)


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_yaml(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        cfg = ExperimentConfig()
    if args.preset and args.config:
        cfg = dataclasses.replace(cfg, name=args.preset)
    overrides = {}
    for f in dataclasses.fields(ExperimentConfig):
        if f.name in _SKIP:
            continue
        val = getattr(args, f.name, None)
        if val is not None:
            overrides[f.name] = tuple(val) if isinstance(val, list) else val
    cfg = dataclasses.replace(cfg, **overrides)
    if args.desk_scale:
        cfg = cfg.with_desk_scale()
    return cfg.validate()


def _out_dir(args, cfg) -> Path:
    return Path(args.output) if args.output else default_output_dir() / cfg.name


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    if cfg.scenario == "real_csv":
        raise ValueError("simulate needs a synthetic scenario")
    out = _out_dir(args, cfg)
    for r, seed in enumerate(run_seeds(cfg.seed, cfg.runs)):
        samples, truth_fn, mask = _make_data(cfg, seed)
        write_series_csv(out / f"run{r}_series.csv", TimeSeriesMatrix(samples))
        first = truth_fn(np.array([0]))[0]
        last = truth_fn(np.array([cfg.length - 1]))[0]
        extra = {"scenario": cfg.scenario}
        if cfg.scenario == "smooth_transition":
            extra.update(kappa=cfg.kappa, t_break=cfg.t_break,
                         coeffs_after=VarParameters.from_flat(last, cfg.order).coeffs)
        write_ground_truth(out / f"run{r}_truth.json", VarParameters.from_flat(first, cfg.order),
                           mask, cfg.innovation_std, seed, extra)
    print(f"wrote {cfg.runs} series to {out}")
    return 0


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    out = _out_dir(args, cfg)
    res = run_experiment(cfg, out)
    print(f"{cfg.name}: {len(res.ok_runs)}/{cfg.runs} runs, artifacts in {out}")
    for label, info in res.summary["variants"].items():
        key = "nmsd_window_mean" if "nmsd_window_mean" in info else f"nmse_{cfg.horizons[0]}_pooled"
        print(f"  {label}: {key}={info[key]:.4g}")
    status = 0 if not res.errors else 1
    if args.check_bounds:
        status = max(status, _check_bounds(out, args.theorems, args.check_runs))
    return status


def cmd_ingest(args) -> int:
    ing = ingest_csv(args.input, args.interval, args.columns, args.timestamp_col)
    out = Path(args.output) if args.output else default_output_dir() / (Path(args.input).stem + "_resampled.csv")
    write_series_csv(out, ing.series)
    write_json(out.with_suffix(".json"), {
        "source": ing.source, "names": ing.names, "sampling_interval": ing.sampling_interval,
        "start": float(ing.grid[0]), "n_samples": int(ing.grid.size),
        "mean": ing.mean, "std": ing.std})
    print(f"{len(ing.names)} series x {ing.grid.size} samples -> {out}")
    return 0


def cmd_metrics(args) -> int:
    res = load_result(args.directory)
    out = Path(args.output) if args.output else Path(args.directory)
    rows, summary = compute_metrics(res)
    write_metric_rows(out / "metrics.csv", rows)
    write_json(out / "summary.json", summary)
    print(f"recomputed {len(rows)} metric rows -> {out}")
    return 0


def _check_bounds(directory, theorems, n_runs) -> int:
    res = load_result(directory)
    cfg = res.config
    lam = float(cfg.lambdas[0])
    gamma = float(cfg.gammas[0])
    sigma2 = cfg.init_phi_scale if cfg.init_phi_scale > 0 else 0.01
    verdicts = []
    for r, run_id in enumerate(res.ok_runs[:n_runs]):
        y = res.samples[r]
        T = y.shape[0]
        for th in theorems:
            if th == 1:
                grid = sorted({max(cfg.order + 2, T // k) for k in (8, 4, 2, 1)})
                out = hindsight_gap_study(y, cfg.order, lam, gamma, grid)
                ok = out["trend_ok"] and out["envelope_ok"]
                detail = {k: out[k] for k in ("horizons", "objective_gap", "minimizer_gap", "envelope")}
            elif th in (2, 3):
                st = doubling_regret_study(y, "TISO" if th == 2 else "TIRSO", cfg.order, cfg.t0,
                                           reg_lambda=lam, gamma=gamma, init_phi_scale=sigma2)
                ok, detail = st.passed, {"boundaries": st.report.boundaries,
                                         "regret": st.report.boundary_regret}
            elif th == 4:
                st = log_regret_study(y, cfg.order, gamma, sigma2, lam)
                ok = st.passed
                detail = {"regret": st.report.static_regret, "bound": st.checks[0].bound,
                          "certificate": st.certificate.to_dict()}
            elif th in (5, 6):
                st = tracking_study(y, cfg.order, gamma, sigma2, lam)
                wanted = [c for c in st.checks if c.theorem in (th, 0)]
                ok = bool(wanted) and all(c.passed for c in wanted)
                detail = {"checks": [dataclasses.asdict(c) for c in wanted]}
            else:
                raise ValueError(f"no check for theorem {th}")
            verdicts.append({"run": run_id, "theorem": th, "passed": bool(ok), "detail": detail})
            print(f"run {run_id} theorem {th}: {'PASS' if ok else 'FAIL'}")
    write_json(Path(directory) / "bounds.json", {"verdicts": verdicts})
    return 0 if all(v["passed"] for v in verdicts) else 1


def cmd_check_bounds(args) -> int:
    return _check_bounds(args.directory, args.theorems, args.runs)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="onlinetopo", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write synthetic series and ground truth")
    _add_config_flags(s)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("run", help="run an experiment config or preset")
    _add_config_flags(s)
    s.add_argument("-o", "--output")
    s.add_argument("--check-bounds", action="store_true", help="certify bounds afterwards")
    s.add_argument("--theorems", type=int, nargs="+", default=[1, 2, 3, 4])
    s.add_argument("--check-runs", type=int, default=1)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("ingest", help="resample and normalize a CSV file")
    s.add_argument("input")
    s.add_argument("--interval", type=float, required=True, help="sampling interval, seconds")
    s.add_argument("--columns", nargs="+")
    s.add_argument("--timestamp-col", default="timestamp")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("metrics", help="recompute metrics from stored trajectories")
    s.add_argument("directory")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("check-bounds", help="check regret bounds on stored series")
    s.add_argument("directory")
    s.add_argument("--theorems", type=int, nargs="+", default=[1, 2, 3, 4, 5, 6])
    s.add_argument("--runs", type=int, default=1, help="number of stored runs to certify")
    s.set_defaults(func=cmd_check_bounds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, IngestError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
