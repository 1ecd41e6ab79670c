"""File formats: series CSV, ground-truth JSON, checkpoints, graphs, metrics.

Floats are written with 17 significant digits so that a rerun producing
the same numbers produces the same bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import io as _io
import math
import zipfile
from pathlib import Path

import numpy as np
import pandas as pd

from .estimators import EstimatorConfig, TirsoState, TisoState
from .model import TimeSeriesMatrix, VarParameters

__all__ = [
    "to_jsonable",
    "write_json",
    "read_json",
    "write_series_csv",
    "read_series_csv",
    "write_ground_truth",
    "read_ground_truth",
    "save_checkpoint",
    "load_checkpoint",
    "write_graph",
    "write_metric_rows",
    "read_metric_rows",
    "file_digest",
    "save_arrays",
    "load_arrays",
]

FLOAT_FMT = "{:.17g}"


def to_jsonable(obj):
    """Numpy-aware conversion; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def _fmt(x) -> str:
    x = float(x)
    return FLOAT_FMT.format(x) if math.isfinite(x) else "nan"


def write_series_csv(path, series: TimeSeriesMatrix) -> Path:
    """Header ``t,y1,...,yN``; one row per sample."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    y = series.samples
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"y{i + 1}" for i in range(y.shape[1])])
        for t, row in enumerate(y):
            w.writerow([t] + [_fmt(v) for v in row])
    return path


def read_series_csv(path) -> TimeSeriesMatrix:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[0] != "t" or not all(h.startswith("y") for h in header[1:]):
        raise ValueError(f"{path}: expected header t,y1,...,yN")
    data = np.array([[float(v) for v in r[1:]] for r in body], dtype=float)
    return TimeSeriesMatrix(data.reshape(len(body), len(header) - 1))


def write_ground_truth(path, params: VarParameters, mask=None, innovation_std=None,
                       seed=None, extra: dict | None = None) -> Path:
    """JSON sidecar with N, P, sigma_u, seed, mask and the coefficient tensor."""
    mask = params.support if mask is None else np.asarray(mask, dtype=bool)
    doc = {
        "n_nodes": params.n_nodes,
        "order": params.order,
        "innovation_std": innovation_std,
        "seed": seed,
        "mask": mask.astype(int),
        "coeffs": params.coeffs,
        "layout": "coeffs[n][n'][p-1]: weight of y_n'[t-p] in y_n[t]",
    }
    if extra:
        doc.update(extra)
    return write_json(path, doc)


def read_ground_truth(path):
    doc = read_json(path)
    return VarParameters(np.array(doc["coeffs"], dtype=float)), doc


def save_checkpoint(stem, state, cfg: EstimatorConfig) -> tuple[Path, Path]:
    """Write ``stem.json`` (metadata) and ``stem.npz`` (matrices)."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    kind = "TIRSO" if isinstance(state, TirsoState) else "TISO"
    arrays = {"estimates": state.estimates, "lag_buffer": state.lag_buffer}
    if kind == "TIRSO":
        arrays.update(phi=state.phi, r=state.r)
    if getattr(state, "eigvec", None) is not None:
        arrays["eigvec"] = state.eigvec
    npz = save_arrays(stem.with_suffix(".npz"), arrays)
    meta = {
        "kind": kind,
        "n_nodes": cfg.n_nodes,
        "order": cfg.order,
        "forgetting": cfg.forgetting,
        "reg_lambda": cfg.reg_lambda,
        "init_phi_scale": cfg.init_phi_scale,
        "t": state.t,
        "last_step": state.last_step,
        "payload": npz.name,
    }
    return write_json(stem.with_suffix(".json"), meta), npz


def load_checkpoint(stem):
    """Inverse of :func:`save_checkpoint`; returns (state, metadata)."""
    stem = Path(stem)
    meta = read_json(stem.with_suffix(".json"))
    with np.load(stem.parent / meta["payload"]) as z:
        arrays = {k: z[k] for k in z.files}
    last = meta.get("last_step")
    last = float("nan") if last is None else last
    if meta["kind"] == "TIRSO":
        state = TirsoState(arrays["phi"], arrays["r"], arrays["estimates"], arrays["lag_buffer"],
                           meta["t"], eigvec=arrays.get("eigvec"), last_step=last)
    else:
        state = TisoState(arrays["estimates"], arrays["lag_buffer"], meta["t"], last_step=last)
    return state, meta


def write_graph(path, snapshot: dict) -> Path:
    return write_json(path, snapshot)


def write_metric_rows(path, rows) -> Path:
    """Long-format CSV ``metric,run,t,value``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "run", "t", "value"])
        for metric, run, t, value in rows:
            w.writerow([metric, run, t, _fmt(value)])
    return path


def read_metric_rows(path):
    return pd.read_csv(path, dtype={"metric": str, "run": str})


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def save_arrays(path, arrays: dict) -> Path:
    """``.npz`` archive with fixed member timestamps, so equal arrays give
    equal bytes (``numpy.savez`` stamps the current time)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name in sorted(arrays):
            buf = _io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arrays[name]), allow_pickle=False)
            info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
            zf.writestr(info, buf.getvalue())
    return path


def load_arrays(path) -> dict:
    with np.load(path, allow_pickle=False) as z:
        return {k: z[k] for k in z.files}
