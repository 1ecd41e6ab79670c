"""Online topology trackers: TISO and TIRSO.

All nodes are updated together. Estimates live in an ``(N, N * P)`` matrix
whose row n is a_n; inside a row, group n' occupies ``[n' P, (n' + 1) P)``
and lag p sits at offset ``p - 1``, matching the regressor layout built by
:func:`build_regressor`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "StepSizeSchedule",
    "EstimatorConfig",
    "TisoState",
    "TirsoState",
    "DegenerateStatisticsWarning",
    "build_regressor",
    "group_norms",
    "group_shrink",
    "tiso_gradient",
    "tirso_gradient",
    "tiso_init",
    "tirso_init",
    "tiso_step",
    "tiso_step_size",
    "tirso_update_stats",
    "tirso_step",
    "step_size_at",
    "lambda_max_power_iteration",
    "graph_snapshot",
    "edge_weights",
]

ADAPTIVE_FLOOR = 1e-12


class DegenerateStatisticsWarning(UserWarning):
    """lambda_max(Phi) vanished while an adaptive step was requested."""


@dataclass(frozen=True)
class StepSizeSchedule:
    """Step-size rule.

    kind:
      ``constant``    alpha_t = value
      ``diminishing`` alpha_t = min(1 / (beta_tilde * t), cap)
      ``doubling``    alpha_t = c / sqrt(t0 * 2**(m-1)) for t0 2^(m-1) < t <= t0 2^m,
                      and c / sqrt(t0) for t <= t0
      ``adaptive``    alpha_t = c / lambda_max(Phi[t])
    """

    kind: str = "adaptive"
    value: float = 0.25
    beta_tilde: float = 1.0
    t0: int = 1
    cap: float = math.inf

    def __post_init__(self):
        if self.kind not in ("constant", "diminishing", "doubling", "adaptive"):
            raise ValueError(f"unknown step-size kind {self.kind!r}")
        if self.kind == "diminishing" and self.beta_tilde <= 0:
            raise ValueError("beta_tilde must be positive")
        if self.kind != "diminishing" and self.value <= 0:
            raise ValueError("step-size constant must be positive")
        if self.kind == "doubling" and self.t0 < 1:
            raise ValueError("t0 must be >= 1")
        if not self.cap > 0:
            raise ValueError("cap must be positive")

    @classmethod
    def constant(cls, alpha: float):
        return cls("constant", value=alpha)

    @classmethod
    def diminishing(cls, beta_tilde: float, cap: float = math.inf):
        return cls("diminishing", beta_tilde=beta_tilde, cap=cap)

    @classmethod
    def doubling(cls, t0: int, c: float = 1.0):
        return cls("doubling", value=c, t0=t0)

    @classmethod
    def adaptive(cls, c: float = 0.25):
        return cls("adaptive", value=c)

    def window(self, t: int) -> int:
        """Doubling-trick window index m (0 for the pre-window t <= t0)."""
        if t <= self.t0:
            return 0
        return math.ceil(math.log2(t / self.t0))

    def boundaries(self, horizon: int) -> list[int]:
        """Window ends t0 2^m not exceeding ``horizon`` (doubling only)."""
        out, b = [], self.t0
        while b <= horizon:
            out.append(b)
            b *= 2
        return out


def step_size_at(schedule: StepSizeSchedule, t: int, lam_max: float | None = None) -> float:
    """alpha_t for ``schedule``; adaptive steps need ``lam_max`` = lambda_max(Phi[t])."""
    kind = schedule.kind
    if kind == "constant":
        return schedule.value
    if kind == "diminishing":
        return min(1.0 / (schedule.beta_tilde * t), schedule.cap)
    if kind == "doubling":
        m = schedule.window(t)
        width = schedule.t0 * 2 ** (m - 1) if m >= 1 else schedule.t0
        return schedule.value / math.sqrt(width)
    if lam_max is None:
        raise ValueError("adaptive step size requires lambda_max(Phi)")
    if lam_max <= 0.0:
        warnings.warn("lambda_max(Phi) = 0; adaptive step falls back to c / 1e-12",
                      DegenerateStatisticsWarning, stacklevel=2)
        lam_max = ADAPTIVE_FLOOR
    return schedule.value / lam_max


@dataclass
class EstimatorConfig:
    n_nodes: int
    order: int
    reg_lambda: float = 0.0
    per_edge_lambda: np.ndarray | None = None
    schedule: StepSizeSchedule = field(default_factory=StepSizeSchedule)
    forgetting: float = 0.99
    init_phi_scale: float = 0.01

    def __post_init__(self):
        if self.n_nodes < 1 or self.order < 1:
            raise ValueError("n_nodes and order must be positive")
        if self.reg_lambda < 0:
            raise ValueError("reg_lambda must be nonnegative")
        if not 0.0 < self.forgetting < 1.0:
            raise ValueError("forgetting factor must lie in (0, 1)")
        if self.init_phi_scale < 0:
            raise ValueError("init_phi_scale must be nonnegative")
        if self.per_edge_lambda is not None:
            lam = np.array(self.per_edge_lambda, dtype=float)
            if lam.shape != (self.n_nodes, self.n_nodes) or np.any(lam < 0):
                raise ValueError("per_edge_lambda must be a nonnegative N x N matrix")
            self.per_edge_lambda = lam

    @property
    def mu(self) -> float:
        return 1.0 - self.forgetting

    @property
    def weights(self) -> np.ndarray:
        """N x N group weights; the diagonal (self-loops) is always zero."""
        if self.per_edge_lambda is not None:
            w = self.per_edge_lambda.copy()
        else:
            w = np.full((self.n_nodes, self.n_nodes), float(self.reg_lambda))
        np.fill_diagonal(w, 0.0)
        return w


def build_regressor(lag_buffer) -> np.ndarray:
    """Stack lags as [y_1[t-1..t-P], ..., y_N[t-1..t-P]].

    ``lag_buffer`` is P x N with the most recent sample first.
    """
    buf = np.asarray(lag_buffer, dtype=float)
    if buf.ndim != 2:
        raise ValueError("lag buffer must be a P x N array")
    return buf.T.reshape(-1)


def group_norms(a, order: int) -> np.ndarray:
    """Euclidean norm of each length-P group along the last axis."""
    a = np.asarray(a, dtype=float)
    return np.linalg.norm(a.reshape(*a.shape[:-1], -1, order), axis=-1)


def group_shrink(a_f, shrink, order: int, self_index=None) -> np.ndarray:
    """Multidimensional shrinkage-thresholding, group by group.

    Each group is scaled by [1 - shrink / ||group||]_+ and set to zero when
    ``||group|| <= shrink``. ``shrink`` broadcasts against the group axis
    (scalar, (N,) or (M, N) for stacked rows). The group at ``self_index``
    passes through untouched.
    """
    a_f = np.asarray(a_f, dtype=float)
    groups = a_f.reshape(*a_f.shape[:-1], -1, order)
    shrink = np.broadcast_to(np.asarray(shrink, dtype=float), groups.shape[:-1])
    if np.any(shrink < 0):
        raise ValueError("shrink amounts must be nonnegative")
    if self_index is not None:
        shrink = shrink.copy()
        shrink[..., self_index] = 0.0
    norms = np.linalg.norm(groups, axis=-1)
    keep = norms > shrink
    factor = np.zeros_like(norms)
    factor[keep] = 1.0 - shrink[keep] / norms[keep]
    if self_index is not None:
        factor[..., self_index] = 1.0
    return (groups * factor[..., None]).reshape(a_f.shape)


def tiso_gradient(a, g, y_n):
    """Gradient of 0.5 (y_n - g^T a)^2; rows of ``a`` may stack several nodes."""
    a = np.asarray(a, dtype=float)
    resid = a @ g - y_n
    return np.multiply.outer(resid, g)


def tirso_gradient(phi, r_n, a):
    """Phi a - r_n (row-wise when ``a`` and ``r_n`` stack several nodes)."""
    a = np.asarray(a, dtype=float)
    return a @ phi - r_n if a.ndim == 2 else phi @ a - r_n


def lambda_max_power_iteration(phi, warm_start=None, tol: float = 1e-10,
                               max_iter: int = 200):
    """Dominant eigenvalue of a symmetric PSD matrix by power iteration.

    Returns ``(estimate, vector, converged)``. The Rayleigh quotient is
    tracked; iteration stops once its relative change drops below ``tol``.
    """
    phi = np.asarray(phi, dtype=float)
    n = phi.shape[0]
    v = np.ones(n) if warm_start is None else np.asarray(warm_start, dtype=float)
    nv = np.linalg.norm(v)
    if nv == 0 or not np.isfinite(nv):
        v, nv = np.ones(n), math.sqrt(n)
    v = v / nv
    lam = float(v @ phi @ v)
    for _ in range(max_iter):
        w = phi @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, v, True
        v = w / nw
        new = float(v @ phi @ v)
        if abs(new - lam) <= tol * abs(new):
            return new, v, True
        lam = new
    return lam, v, False


@dataclass
class TisoState:
    """TISO memory: estimates, the last P samples and the sample index."""

    estimates: np.ndarray
    lag_buffer: np.ndarray
    t: int
    last_step: float = float("nan")

    def copy(self) -> "TisoState":
        return replace(self, estimates=self.estimates.copy(), lag_buffer=self.lag_buffer.copy())


@dataclass
class TirsoState:
    """TIRSO memory: Phi[t], r_n[t] (rows of ``r``), estimates, lags, index."""

    phi: np.ndarray
    r: np.ndarray
    estimates: np.ndarray
    lag_buffer: np.ndarray
    t: int
    eigvec: np.ndarray | None = None
    last_step: float = float("nan")

    def copy(self) -> "TirsoState":
        return replace(self, phi=self.phi.copy(), r=self.r.copy(),
                       estimates=self.estimates.copy(), lag_buffer=self.lag_buffer.copy(),
                       eigvec=None if self.eigvec is None else self.eigvec.copy())


def _initial_buffer(first_samples, cfg: EstimatorConfig) -> np.ndarray:
    first = np.asarray(first_samples, dtype=float).reshape(-1, cfg.n_nodes)
    if first.shape[0] != cfg.order:
        raise ValueError(f"need exactly P={cfg.order} initial samples, got {first.shape[0]}")
    return first[::-1].copy()


def tiso_init(first_samples, cfg: EstimatorConfig) -> TisoState:
    """State at t = P from y[0..P-1] with zero estimates."""
    dim = cfg.n_nodes * cfg.order
    return TisoState(np.zeros((cfg.n_nodes, dim)), _initial_buffer(first_samples, cfg),
                     cfg.order)


def tirso_init(first_samples, cfg: EstimatorConfig) -> TirsoState:
    """State at t = P: zero estimates, Phi[P-1] = sigma^2 I, r_n = 0."""
    dim = cfg.n_nodes * cfg.order
    return TirsoState(cfg.init_phi_scale * np.eye(dim), np.zeros((cfg.n_nodes, dim)),
                      np.zeros((cfg.n_nodes, dim)), _initial_buffer(first_samples, cfg),
                      cfg.order)


def _rotate(buf, sample):
    buf[1:] = buf[:-1]
    buf[0] = sample


def _phi_update(phi, g, gamma, mu):
    phi = gamma * phi + mu * np.outer(g, g)
    return 0.5 * (phi + phi.T)


def _adaptive_step(state, cfg):
    lam, state.eigvec, _ = lambda_max_power_iteration(state.phi, state.eigvec)
    return step_size_at(cfg.schedule, state.t, lam)


def tiso_step_size(g, t: int, cfg: EstimatorConfig) -> float:
    """alpha_t for TISO. The instantaneous loss has Hessian g g^T, so the
    adaptive rule uses lambda_max = ||g||^2 (a normalized-LMS step)."""
    if cfg.schedule.kind == "adaptive":
        return step_size_at(cfg.schedule, t, float(g @ g))
    return step_size_at(cfg.schedule, t)


def tiso_step(state: TisoState, sample, cfg: EstimatorConfig) -> TisoState:
    """Process y[t]: a_n[t+1] = shrink(a_n[t] - alpha_t v_n[t]) for every n."""
    y = np.asarray(sample, dtype=float)
    g = build_regressor(state.lag_buffer)
    alpha = tiso_step_size(g, state.t, cfg)
    a_f = state.estimates - alpha * tiso_gradient(state.estimates, g, y)
    state.estimates = group_shrink(a_f, alpha * cfg.weights, cfg.order)
    state.last_step = alpha
    _rotate(state.lag_buffer, y)
    state.t += 1
    return state


def tirso_update_stats(phi, r, g, sample, gamma: float, mu: float):
    """Phi <- gamma Phi + mu g g^T (symmetrized); r_n <- gamma r_n + mu y_n g."""
    phi = _phi_update(phi, g, gamma, mu)
    r = gamma * r + mu * np.multiply.outer(np.asarray(sample, dtype=float), g)
    return phi, r


def tirso_step(state: TirsoState, sample, cfg: EstimatorConfig) -> TirsoState:
    """Process y[t]: refresh (Phi, r), then one shrunk gradient step per node."""
    y = np.asarray(sample, dtype=float)
    g = build_regressor(state.lag_buffer)
    state.phi, state.r = tirso_update_stats(state.phi, state.r, g, y,
                                            cfg.forgetting, cfg.mu)
    if cfg.schedule.kind == "adaptive":
        alpha = _adaptive_step(state, cfg)
    else:
        alpha = step_size_at(cfg.schedule, state.t)
    a_f = state.estimates - alpha * tirso_gradient(state.phi, state.r, state.estimates)
    state.estimates = group_shrink(a_f, alpha * cfg.weights, cfg.order)
    state.last_step = alpha
    _rotate(state.lag_buffer, y)
    state.t += 1
    return state


def edge_weights(estimates, order: int) -> np.ndarray:
    """N x N matrix of group norms ||a_{n,n'}||."""
    return group_norms(estimates, order)


def graph_snapshot(estimates, order: int, threshold: float = 0.0) -> dict:
    """Directed graph from estimates: edge n' -> n iff ||a_{n,n'}|| >= threshold.

    Nodes are 1-based. Self-loop weights are reported apart from the edges.
    """
    w = edge_weights(estimates, order)
    n = w.shape[0]
    edges = [
        {"source": j + 1, "target": i + 1, "weight": float(w[i, j])}
        for i in range(n) for j in range(n)
        if i != j and w[i, j] >= threshold
    ]
    return {
        "nodes": list(range(1, n + 1)),
        "edges": edges,
        "self_loops": {str(i + 1): float(w[i, i]) for i in range(n)},
        "threshold": float(threshold),
    }
