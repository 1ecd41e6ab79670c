"""Performance metrics, regret bookkeeping and bound certificates.

Trajectories of estimates are arrays shaped ``(R, K, N, N*P)`` (R Monte
Carlo runs, K time instants) or ``(K, N, N*P)`` for a single run. Truth
arrays broadcast against them. Undefined ratios come back as NaN.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .estimators import StepSizeSchedule, build_regressor, group_norms
from .oracle import (
    CompositeProblem,
    assemble_hindsight_tirso,
    assemble_hindsight_tiso,
    lagged_design,
    prox_grad_solve,
)

__all__ = [
    "nmsd",
    "nmsd_per_run",
    "standard_error",
    "offdiag_norms",
    "detection_rates",
    "eier",
    "ThresholdCalibration",
    "calibrate_threshold",
    "best_operating_point",
    "roc_curve",
    "h_step_predict",
    "predict_from_run",
    "nmse_h",
    "nmse_scalar",
    "tiso_losses",
    "static_regret",
    "hindsight_tirso_from_stats",
    "tirso_static_regret_at",
    "tiso_static_regret_at",
    "dynamic_regret_and_path",
    "BoundsCertificate",
    "bounds_certificate",
    "RegretReport",
    "BoundCheck",
    "theorem4_bound",
    "theorem5_bound",
    "regret_bound_check",
    "tracking_error_check",
    "loss_envelope",
    "asymptotic_gap",
]


def _ensemble(x):
    x = np.asarray(x, dtype=float)
    return x if x.ndim == 4 else x[None]


def _safe_ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.full(np.broadcast(num, den).shape, np.nan)
    np.divide(num, den, out=out, where=den > 0)
    return out


def nmsd(estimates, truth) -> np.ndarray:
    """E[sum_n ||a_hat_n[t] - a_n[t]||^2] / E[sum_n ||a_n[t]||^2] per instant.

    ``truth`` may be (N, D) (constant), (R, N, D) (constant per run, when
    estimates carry R > 1 runs), (K, N, D) (single run) or (R, K, N, D).
    """
    est = _ensemble(estimates)
    tru = np.asarray(truth, dtype=float)
    if tru.ndim == 2:
        tru = tru[None, None]
    elif tru.ndim == 3:
        per_run = est.shape[0] > 1 and tru.shape[0] == est.shape[0]
        tru = tru[:, None] if per_run else tru[None]
    err = np.sum((est - tru) ** 2, axis=(2, 3)).mean(axis=0)
    energy = np.broadcast_to(np.sum(tru ** 2, axis=(2, 3)), est.shape[:2]).mean(axis=0)
    return _safe_ratio(err, energy)


def nmsd_per_run(estimates, truth) -> np.ndarray:
    """Per-run NMSD trajectories, shape (R, K)."""
    est = _ensemble(estimates)
    tru = np.asarray(truth, dtype=float)
    if tru.ndim == 2:
        tru = tru[None, None]
    elif tru.ndim == 3:
        tru = tru[:, None] if tru.shape[0] == est.shape[0] else tru[None]
    tru = np.broadcast_to(tru, est.shape)
    return np.stack([nmsd(e[None], t[None]) for e, t in zip(est, tru)])


def standard_error(per_run) -> np.ndarray:
    """Standard error of the ensemble mean along axis 0."""
    x = np.asarray(per_run, dtype=float)
    if x.shape[0] < 2:
        return np.full(x.shape[1:], np.nan)
    return x.std(axis=0, ddof=1) / math.sqrt(x.shape[0])


def offdiag_norms(estimates, order: int) -> np.ndarray:
    """Group norms with self-loops dropped: (..., N, N) -> (..., N*(N-1))."""
    w = group_norms(estimates, order)
    n = w.shape[-1]
    off = ~np.eye(n, dtype=bool)
    return w[..., off]


def _truth_offdiag(truth_mask, n_runs):
    m = np.asarray(truth_mask, dtype=bool)
    if m.ndim == 2:
        m = np.broadcast_to(m, (n_runs,) + m.shape)
    n = m.shape[-1]
    return m[:, ~np.eye(n, dtype=bool)]  # (R, E)


def detection_rates(estimates, truth_mask, delta: float, order: int):
    """(P_MD[t], P_FA[t]) over off-diagonal edges, pooled across runs."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    est = _ensemble(estimates)
    norms = offdiag_norms(est, order)  # (R, K, E)
    true = _truth_offdiag(truth_mask, est.shape[0])[:, None, :]
    detected = norms >= delta
    n_true = np.broadcast_to(true, norms.shape).sum(axis=(0, 2))
    n_absent = np.broadcast_to(~true, norms.shape).sum(axis=(0, 2))
    misses = (~detected & true).sum(axis=(0, 2))
    false_alarms = (detected & ~true).sum(axis=(0, 2))
    return _safe_ratio(misses, n_true), _safe_ratio(false_alarms, n_absent)


def eier(estimates, truth_mask, delta: float, order: int) -> np.ndarray:
    """Fraction of the N(N-1) possible edges misidentified, per instant."""
    est = _ensemble(estimates)
    n = est.shape[2]
    if n < 2:
        raise ValueError("EIER needs at least two nodes")
    norms = offdiag_norms(est, order)
    true = _truth_offdiag(truth_mask, est.shape[0])[:, None, :]
    wrong = (norms >= delta) != true
    return wrong.mean(axis=(0, 2))


@dataclass
class ThresholdCalibration:
    delta: float
    p_md: float
    p_fa: float
    feasible: bool
    mode: str


def _pooled_rates(norms, true):
    """Sorted candidate thresholds with time-averaged rate curves.

    Entry weights are 1 / (K * denominator at that instant), so the pooled
    fractions equal time averages of P_MD[t] and P_FA[t].
    """
    R, K, E = norms.shape
    true = np.broadcast_to(true, norms.shape)
    n_true = true.sum(axis=(0, 2))
    n_abs = (~true).sum(axis=(0, 2))
    wt = np.where(true, 1.0 / np.maximum(n_true, 1)[None, :, None], 0.0) / K
    wa = np.where(~true, 1.0 / np.maximum(n_abs, 1)[None, :, None], 0.0) / K
    v = norms.ravel()
    order_ = np.argsort(v, kind="stable")
    v = v[order_]
    ct = np.concatenate([[0.0], np.cumsum(wt.ravel()[order_])])
    ca = np.concatenate([[0.0], np.cumsum(wa.ravel()[order_])])
    return v, ct, ca, ct[-1], ca[-1]


def calibrate_threshold(estimates, truth_mask=None, order: int = 1, mode: str = "equal_rates",
                        edge_prob: float | None = None, n_edges: int | None = None,
                        tol: float = 1e-3) -> ThresholdCalibration:
    """Pick the detection threshold delta.

    ``equal_rates``: over the supplied window, choose delta where the
    time-averaged P_FA and P_MD coincide. Both curves are piecewise constant
    between consecutive observed norms, so every interval is scanned and
    the midpoint of the one minimizing |P_FA - P_MD| is returned;
    ``feasible`` is False if that gap exceeds ``tol``.

    ``edge_count``: delta is the k-th largest off-diagonal norm of a single
    (N, N*P) snapshot, k = round(edge_prob * (N^2 - N)) unless ``n_edges``.
    """
    if mode == "edge_count":
        snap = np.asarray(estimates, dtype=float)
        norms = np.sort(offdiag_norms(snap, order).ravel())[::-1]
        n = snap.shape[-2]
        k = n_edges if n_edges is not None else int(round(edge_prob * (n * n - n)))
        if not 1 <= k <= norms.size:
            raise ValueError(f"edge count {k} out of range")
        return ThresholdCalibration(float(norms[k - 1]), math.nan, math.nan, True, mode)
    if mode != "equal_rates":
        raise ValueError(f"unknown calibration mode {mode!r}")
    deltas, p_md, p_fa = _rate_scan(estimates, truth_mask, order)
    gap = np.abs(p_fa - p_md)
    best = int(np.nanargmin(gap))
    return ThresholdCalibration(float(deltas[best]), float(p_md[best]), float(p_fa[best]),
                                bool(gap[best] < tol), mode)


def _rate_scan(estimates, truth_mask, order):
    """Every distinct value of the time-averaged (P_MD, P_FA) pair.

    Both rates are piecewise constant in delta between consecutive observed
    norms; returns one representative delta (interval midpoint) per piece.
    """
    est = _ensemble(estimates)
    norms = offdiag_norms(est, order)
    true = _truth_offdiag(truth_mask, est.shape[0])[:, None, :]
    v, ct, ca, tot_t, tot_a = _pooled_rates(norms, true)
    cuts = np.flatnonzero(np.diff(v) > 0) + 1
    lo = np.concatenate([[0.0], v[cuts - 1], [v[-1]]])
    hi = np.concatenate([[v[0]], v[cuts], [v[-1] * 2 + 1.0]])
    idx = np.concatenate([[0], cuts, [v.size]])
    p_md = ct[idx] / tot_t if tot_t > 0 else np.full(idx.size, np.nan)
    p_fa = (tot_a - ca[idx]) / tot_a if tot_a > 0 else np.full(idx.size, np.nan)
    deltas = 0.5 * (lo + hi)
    deltas[0] = 0.5 * hi[0]
    return deltas, p_md, p_fa


def best_operating_point(estimates, truth_mask, order: int):
    """Threshold minimizing max(P_MD, P_FA) of the time-averaged rates.

    Returns (delta, p_md, p_fa). Some delta gives both rates below a level
    q exactly when the returned max is below q.
    """
    deltas, p_md, p_fa = _rate_scan(estimates, truth_mask, order)
    worst = np.fmax(p_md, p_fa)
    best = int(np.nanargmin(worst))
    return float(deltas[best]), float(p_md[best]), float(p_fa[best])


def roc_curve(estimates, truth_mask, order: int, deltas):
    """Time-averaged (P_FA, P_MD) pairs over a sweep of thresholds."""
    pairs = []
    for d in deltas:
        md, fa = detection_rates(estimates, truth_mask, d, order)
        pairs.append((float(np.nanmean(fa)), float(np.nanmean(md))))
    return np.array(pairs)


def h_step_predict(coeffs, history, horizon: int) -> np.ndarray:
    """Recursive forecast y_hat[t+h|t] from the last P rows of ``history``.

    ``coeffs`` is (N, N, P) or the flat (N, N*P) form.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    hist = np.asarray(history, dtype=float)
    c = np.asarray(coeffs, dtype=float)
    n = hist.shape[1]
    flat = c.reshape(n, -1)
    p = flat.shape[1] // n
    if hist.shape[0] < p:
        raise ValueError("history shorter than the model order")
    buf = hist[-p:][::-1].copy()
    pred = None
    for _ in range(horizon):
        pred = flat @ build_regressor(buf)
        buf[1:] = buf[:-1]
        buf[0] = pred
    return pred


def predict_from_run(estimates, times, samples, horizon: int):
    """Forecasts made with the estimate a[t] (built from y up to t-1).

    Returns (targets, predictions) for y[t - 1 + h], dropping instants whose
    target falls outside the series.
    """
    y = np.asarray(getattr(samples, "samples", samples), dtype=float)
    preds, targets, used = [], [], []
    for a, t in zip(estimates, times):
        tgt = t - 1 + horizon
        if tgt >= y.shape[0]:
            continue
        preds.append(h_step_predict(a, y[:t], horizon))
        targets.append(y[tgt])
        used.append(t)
    return np.array(targets), np.array(preds), np.array(used)


def nmse_h(targets, predictions) -> np.ndarray:
    """Ensemble NMSE_h[t] = E||y - y_hat||^2 / E||y||^2; inputs (R, K, N) or (K, N)."""
    tg = np.asarray(targets, dtype=float)
    pr = np.asarray(predictions, dtype=float)
    if tg.ndim == 2:
        tg, pr = tg[None], pr[None]
    num = np.sum((tg - pr) ** 2, axis=2).mean(axis=0)
    den = np.sum(tg ** 2, axis=2).mean(axis=0)
    return _safe_ratio(num, den)


def nmse_scalar(targets, predictions) -> float:
    """sum_t ||y[t+h] - y_hat[t+h|t]||^2 / sum_t ||y[t+h]||^2."""
    tg = np.asarray(targets, dtype=float)
    pr = np.asarray(predictions, dtype=float)
    return float(_safe_ratio(np.sum((tg - pr) ** 2), np.sum(tg ** 2)))


def _regularizer(estimates, weights, order):
    return np.sum(np.asarray(weights) * group_norms(estimates, order), axis=-1)


def tiso_losses(samples, order: int, estimates, weights, start: int | None = None) -> np.ndarray:
    """h_t(a_n[t]) = 0.5 (y_n[t] - g[t]^T a_n[t])^2 + Omega(a_n[t]).

    ``estimates`` is (K, N, NP) with row k holding a[start + k], start
    defaulting to P. ``weights`` is the N x N group-weight matrix.
    """
    y = np.asarray(getattr(samples, "samples", samples), dtype=float)
    start = order if start is None else start
    G, Y = lagged_design(y, order)
    est = np.asarray(estimates, dtype=float)
    k = est.shape[0]
    G, Y = G[start - order:start - order + k], Y[start - order:start - order + k]
    resid = Y - np.einsum("kni,ki->kn", est, G)
    return 0.5 * resid ** 2 + _regularizer(est, weights, order)


def static_regret(online_losses, comparator_losses) -> np.ndarray:
    """Cumulative sum_t [h_t(a[t]) - h_t(a*)] along axis 0."""
    return np.cumsum(np.asarray(online_losses) - np.asarray(comparator_losses), axis=0)


def hindsight_tirso_from_stats(stats, weights, order: int, upto: int | None = None) -> CompositeProblem:
    """Problem whose minimizer is argmin sum_{k <= upto} h~_k (averaged)."""
    k = stats.phi.shape[0] if upto is None else upto + 1
    return CompositeProblem(stats.phi[:k].mean(axis=0), stats.r[:k].mean(axis=0),
                            weights, order, stats.const[:k].mean(axis=0))


def tirso_static_regret_at(stats, estimates, weights, order: int, horizons,
                           tol: float = 1e-10) -> np.ndarray:
    """R~_s^{(n)}[T] for every horizon index (into ``stats.times``), shape (H, N).

    The comparator is the exact minimizer of the summed running losses
    (including the Phi initialization), so every regret value is the
    largest possible over fixed comparators.
    """
    est = np.asarray(estimates, dtype=float)
    online = stats.loss(est) + _regularizer(est, weights, order)
    out = []
    for h in horizons:
        prob = hindsight_tirso_from_stats(stats, weights, order, h)
        a_star = prox_grad_solve(prob, tol=tol, max_iter=200_000).solution
        comp = _stats_loss_prefix(stats, a_star, h) + _regularizer(a_star, weights, order)
        out.append(np.sum(online[: h + 1] - comp, axis=0))
    return np.array(out)


def _stats_loss_prefix(stats, a, h):
    phi, r, c = stats.phi[: h + 1], stats.r[: h + 1], stats.const[: h + 1]
    quad = 0.5 * np.einsum("ni,kij,nj->kn", a, phi, a)
    return quad - np.einsum("kni,ni->kn", r, a) + c


def tiso_static_regret_at(samples, estimates, weights, order: int, reg_lambda: float,
                          horizons, tol: float = 1e-10) -> np.ndarray:
    """R_s^{(n)}[T] against the batch hindsight minimizer, shape (H, N).

    ``horizons`` index into the per-sample losses (index k is t = P + k).
    """
    y = np.asarray(getattr(samples, "samples", samples), dtype=float)
    online = tiso_losses(y, order, estimates, weights)
    out = []
    for h in horizons:
        prob = assemble_hindsight_tiso(y[: order + h + 1], order, reg_lambda)
        a_star = prox_grad_solve(prob, tol=tol, max_iter=200_000).solution
        comp = tiso_losses(y, order, np.repeat(a_star[None], h + 1, axis=0), weights)
        out.append(np.sum(online[: h + 1] - comp, axis=0))
    return np.array(out)


def dynamic_regret_and_path(online_losses, minimizer_losses, minimizers):
    """Cumulative dynamic regret, cumulative path length and max step sigma.

    ``minimizers`` is (K, N, D); path length starts at 0 for the first
    instant.
    """
    dyn = np.cumsum(np.asarray(online_losses) - np.asarray(minimizer_losses), axis=0)
    mins = np.asarray(minimizers, dtype=float)
    jumps = np.linalg.norm(np.diff(mins, axis=0), axis=-1)
    path = np.concatenate([np.zeros((1,) + jumps.shape[1:]), np.cumsum(jumps, axis=0)])
    sigma = jumps.max(axis=0) if jumps.size else np.zeros(mins.shape[1:-1])
    return dyn, path, sigma


@dataclass
class BoundsCertificate:
    b_y: float
    l_max: float
    l_cap: float
    beta_tilde: float
    beta: float
    kappa_phi: float
    b_a: float
    b_a_tilde: float
    g_tilde: float
    n_nodes: int
    order: int
    a2_holds: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _bound_a(b_y, beta, dim):
    if beta <= 0:
        return math.inf
    return (b_y * math.sqrt(dim) + math.sqrt(b_y ** 2 * dim + beta * b_y)) / beta


def bounds_certificate(samples, order: int, phi_history, t_m: int | None = None) -> BoundsCertificate:
    """Data-driven constants B_y, L, beta~, beta, kappa, B_a, B_a~, G~.

    ``phi_history`` holds Phi[t] for t = P..T-1. beta is the minimum of
    lambda_min of (1/(t-P)) sum_{tau=P}^{t} g g^T over t >= t_m
    (default P + 5 N P).
    """
    y = np.asarray(getattr(samples, "samples", samples), dtype=float)
    n = y.shape[1]
    dim = n * order
    b_y = float(np.max(y ** 2))
    eig = np.linalg.eigvalsh(np.asarray(phi_history))
    l_max = float(eig[:, -1].max())
    beta_tilde = float(eig[:, 0].min())
    G, _ = lagged_design(y, order)
    t_m = order + 5 * dim if t_m is None else t_m
    acc = np.zeros((dim, dim))
    beta = math.inf
    for k, g in enumerate(G):
        acc += np.outer(g, g)
        t = order + k
        if t >= t_m and t > order:
            beta = min(beta, float(np.linalg.eigvalsh(acc / (t - order))[0]))
    if not math.isfinite(beta):
        beta = math.nan
    notes = []
    a2 = beta_tilde > 0
    if not a2:
        notes.append("lambda_min(Phi) reached 0: A2 violated, bound checks skipped")
    kappa = l_max / beta_tilde if a2 else math.inf
    return BoundsCertificate(
        b_y=b_y, l_max=l_max, l_cap=dim * b_y, beta_tilde=beta_tilde, beta=beta,
        kappa_phi=kappa, b_a=_bound_a(b_y, beta, dim) if beta == beta else math.nan,
        b_a_tilde=_bound_a(b_y, beta_tilde, dim),
        g_tilde=(1.0 + kappa) * math.sqrt(dim) * b_y, n_nodes=n, order=order,
        a2_holds=a2, notes=notes)


@dataclass
class RegretReport:
    """Regret trajectories for one run, columns are nodes."""

    horizon: int
    static_regret: np.ndarray | None = None
    dynamic_regret: np.ndarray | None = None
    path_length: np.ndarray | None = None
    sigma: np.ndarray | None = None
    initial_minimizer_norm: np.ndarray | None = None
    boundary_regret: np.ndarray | None = None  # (H, N) at doubling boundaries
    boundaries: np.ndarray | None = None
    bound_values: dict = field(default_factory=dict)


@dataclass
class BoundCheck:
    theorem: int
    passed: bool
    margin: np.ndarray | float
    bound: np.ndarray | float | None
    detail: str = ""


def theorem4_bound(cert: BoundsCertificate, horizon: int) -> float:
    """(G~^2 / 2 beta~)(log(T-P+1) + 1) + B_a~^2 / (2 alpha_{P-1}), alpha_t = 1/(beta~ t)."""
    p = cert.order
    inv_alpha = cert.beta_tilde * (p - 1)
    return (cert.g_tilde ** 2 / (2 * cert.beta_tilde) * (math.log(horizon - p + 1) + 1)
            + 0.5 * inv_alpha * cert.b_a_tilde ** 2)


def theorem5_bound(cert: BoundsCertificate, alpha: float, reg_lambda: float,
                   initial_norm, path_length):
    """Dynamic-regret bound for constant alpha in (0, 1/L]."""
    dim = cert.n_nodes * cert.order
    lead = ((1 + cert.kappa_phi) * math.sqrt(dim) * cert.b_y + reg_lambda * cert.n_nodes)
    return lead / (alpha * cert.beta_tilde) * (np.asarray(initial_norm) + np.asarray(path_length))


def regret_bound_check(report: RegretReport, cert: BoundsCertificate, theorem: int,
                       schedule: StepSizeSchedule, reg_lambda: float = 0.0) -> BoundCheck:
    """Check a regret report against the matching theorem.

    Theorems 4 and 5 are explicit inequalities; 2 and 3 are order bounds,
    checked as R_s[T] / sqrt(T) non-increasing over the last three doubling
    boundaries. A schedule that does not match the theorem is refused.
    """
    if theorem in (2, 3):
        if schedule.kind != "doubling":
            raise ValueError(f"theorem {theorem} needs a doubling schedule")
        if report.boundary_regret is None or len(report.boundaries) < 3:
            raise ValueError("need regret at three or more doubling boundaries")
        ratio = np.asarray(report.boundary_regret)[-3:] / np.sqrt(report.boundaries[-3:])[:, None]
        steps = np.diff(ratio, axis=0)
        margin = -steps.max(axis=0)
        return BoundCheck(theorem, bool(np.all(steps <= 0)), margin, None,
                          "R_s/sqrt(T) at the last three boundaries")
    if not cert.a2_holds:
        return BoundCheck(theorem, False, math.nan, None, "A2 violated; not certified")
    if theorem == 4:
        if schedule.kind != "diminishing" or not math.isclose(schedule.beta_tilde, cert.beta_tilde,
                                                              rel_tol=1e-9):
            raise ValueError("theorem 4 needs alpha_t = 1/(beta~ t) with the certificate's beta~")
        bound = theorem4_bound(cert, report.horizon)
        margin = bound - np.asarray(report.static_regret)
        return BoundCheck(4, bool(np.all(margin > 0)), margin, bound, "static regret, diminishing step")
    if theorem == 5:
        if schedule.kind != "constant" or not 0 < schedule.value <= 1.0 / cert.l_max * (1 + 1e-12):
            raise ValueError("theorem 5 needs a constant step in (0, 1/L]")
        bound = theorem5_bound(cert, schedule.value, reg_lambda,
                               report.initial_minimizer_norm, report.path_length)
        margin = bound - np.asarray(report.dynamic_regret)
        return BoundCheck(5, bool(np.all(margin > 0)), margin, bound, "dynamic regret, constant step")
    raise ValueError(f"no check implemented for theorem {theorem}")


def tracking_error_check(estimates, minimizers, sigma, alpha: float, beta_tilde: float,
                         tail: float = 0.2) -> BoundCheck:
    """Tail mean of ||a[t] - a°[t]|| against sigma / (alpha beta~), per node."""
    err = np.linalg.norm(np.asarray(estimates) - np.asarray(minimizers), axis=-1)
    k0 = int(math.floor((1 - tail) * err.shape[0]))
    tail_mean = err[k0:].mean(axis=0)
    bound = np.asarray(sigma) / (alpha * beta_tilde)
    margin = bound - tail_mean
    return BoundCheck(6, bool(np.all(margin >= 0)), margin, bound, "steady-state tracking error")


def loss_envelope(a, b_y: float, n_nodes: int, order: int, horizon: int, gamma: float):
    """G(a)(1 - gamma^(T-P)) / ((T-P)(1/gamma - 1)) with
    G(a) = 0.5 NP B_y ||a||^2 + 0.5 B_y + sqrt(NP) B_y ||a||."""
    dim = n_nodes * order
    na = float(np.linalg.norm(a))
    g_a = 0.5 * dim * b_y * na ** 2 + 0.5 * b_y + math.sqrt(dim) * b_y * na
    m = horizon - order
    return g_a * (1 - gamma ** m) / (m * (1 / gamma - 1))


def asymptotic_gap(samples, node: int, order: int, reg_lambda: float, gamma: float,
                   horizons, tol: float = 1e-12) -> dict:
    """Gaps between the hindsight objectives' minima and minimizers over T.

    For each T, uses the first T samples. Also returns the envelope bound
    evaluated at the weighted minimizer and B_y of the prefix.
    """
    y = np.asarray(getattr(samples, "samples", samples), dtype=float)
    n = y.shape[1]
    obj_gap, arg_gap, env, conv = [], [], [], []
    for T in horizons:
        prefix = y[:T]
        c = prox_grad_solve(assemble_hindsight_tiso(prefix, order, reg_lambda, node),
                            tol=tol, max_iter=500_000)
        ct = prox_grad_solve(assemble_hindsight_tirso(prefix, order, reg_lambda, gamma, node),
                             tol=tol, max_iter=500_000)
        obj_gap.append(abs(float(c.final_objective) - float(ct.final_objective)))
        arg_gap.append(float(np.linalg.norm(c.solution - ct.solution)))
        env.append(loss_envelope(ct.solution, float(np.max(prefix ** 2)), n, order, T, gamma))
        conv.append(c.converged and ct.converged)
    return {"horizons": np.asarray(horizons), "objective_gap": np.array(obj_gap),
            "minimizer_gap": np.array(arg_gap), "envelope": np.array(env),
            "converged": np.array(conv)}
