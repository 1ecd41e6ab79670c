"""Compare step-size rules through the experiment harness.

Runs a reduced copy of the step-size preset (10 nodes, VAR(3)) with the
adaptive, constant 1/L and diminishing rules for both estimators and
prints the window-averaged NMSD of each variant. Artifacts land in
``$ONLINETOPO_OUTPUT_DIR/demo_step_sizes`` (default ``runs/``).

Run with ``python demos/step_sizes.py``.
"""

import dataclasses

from onlinetopo.harness import default_output_dir, preset, run_experiment

cfg = dataclasses.replace(preset("fig3_stepsize"), name="demo_step_sizes", runs=5)
res = run_experiment(cfg, default_output_dir() / cfg.name)

print(f"{len(res.ok_runs)} runs, T={cfg.length}, window {cfg.window}")
for label, info in sorted(res.summary["variants"].items(),
                          key=lambda kv: kv[1]["nmsd_window_mean"]):
    print(f"  {info['nmsd_window_mean']:.4f}  {label}")
print(f"artifacts: {res.output_dir}")
