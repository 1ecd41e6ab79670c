"""Batch reference solvers and online baselines.

Every objective here is reduced to ``0.5 a^T H a - b^T a + const`` plus a
weighted sum of group norms, and minimized by plain proximal gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import (
    EstimatorConfig,
    TirsoState,
    TisoState,
    _adaptive_step,
    _rotate,
    build_regressor,
    group_norms,
    group_shrink,
    lambda_max_power_iteration,
    step_size_at,
    tirso_gradient,
    tirso_update_stats,
    tiso_gradient,
    tiso_step_size,
)

__all__ = [
    "CompositeProblem",
    "SolveReport",
    "composite_objective",
    "prox_grad_solve",
    "subgradient_residual",
    "lagged_design",
    "assemble_hindsight_tiso",
    "assemble_hindsight_tirso",
    "instantaneous_minimizer",
    "osgd_step",
    "pgd_tirso_step",
]


@dataclass
class CompositeProblem:
    """min_a 0.5 a^T H a - b^T a + const + sum_g w_g ||a_g||.

    ``b``, ``weights`` and ``const`` may carry a leading axis, one row per
    independent problem sharing the same H.
    """

    H: np.ndarray
    b: np.ndarray
    weights: np.ndarray
    order: int
    const: np.ndarray | float = 0.0

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.H.shape != (self.b.shape[-1],) * 2:
            raise ValueError("H must be square and match b")
        if np.any(self.weights < 0):
            raise ValueError("group weights must be nonnegative")

    def objective(self, a) -> np.ndarray:
        return composite_objective(self, a)

    def smooth_gradient(self, a) -> np.ndarray:
        return a @ self.H - self.b


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    final_objective: np.ndarray | float
    kkt_residual: float
    converged: bool
    objective_trace: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "solution": np.asarray(self.solution).tolist(),
            "iterations": int(self.iterations),
            "final_objective": np.asarray(self.final_objective).tolist(),
            "kkt_residual": float(self.kkt_residual),
            "converged": bool(self.converged),
        }


def composite_objective(problem: CompositeProblem, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    quad = 0.5 * np.einsum("...i,ij,...j->...", a, problem.H, a)
    lin = np.einsum("...i,...i->...", problem.b, a)
    reg = np.sum(problem.weights * group_norms(a, problem.order), axis=-1)
    return quad - lin + problem.const + reg


def prox_grad_solve(problem: CompositeProblem, init=None, step: float | None = None,
                    tol: float = 1e-8, max_iter: int = 50_000,
                    track_objective: bool = False) -> SolveReport:
    """Proximal gradient with fixed step (default 1 / lambda_max(H)).

    Stops when ``max ||a - prox_step(a)||_2 <= tol`` over all stacked rows.
    On hitting ``max_iter`` the last iterate is returned with
    ``converged=False``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if step is None:
        lam, _, ok = lambda_max_power_iteration(problem.H, tol=1e-13, max_iter=2000)
        if not ok:
            lam = float(np.linalg.eigvalsh(problem.H)[-1])
        # the Rayleigh quotient approaches lambda_max from below
        lam *= 1.0 + 1e-9
        step = 1.0 / lam if lam > 0 else 1.0
    a = np.zeros_like(problem.b) if init is None else np.array(init, dtype=float)
    shrink = step * problem.weights
    trace = [composite_objective(problem, a)] if track_objective else None
    residual = np.inf
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        nxt = group_shrink(a - step * problem.smooth_gradient(a), shrink, problem.order)
        diff = nxt - a
        residual = float(np.max(np.linalg.norm(np.atleast_2d(diff), axis=-1)))
        a = nxt
        if track_objective:
            trace.append(composite_objective(problem, a))
        if residual <= tol:
            converged = True
            break
    return SolveReport(a, it, composite_objective(problem, a), residual, converged,
                       None if trace is None else np.array(trace))


def subgradient_residual(problem: CompositeProblem, a) -> float:
    """Distance of 0 from the subdifferential at ``a`` (max over groups/rows).

    Nonzero groups must satisfy grad_g + w a_g / ||a_g|| = 0; zero groups
    need ||grad_g|| <= w.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    grad = np.atleast_2d(problem.smooth_gradient(a))
    p = problem.order
    ga = grad.reshape(grad.shape[0], -1, p)
    aa = a.reshape(a.shape[0], -1, p)
    w = np.broadcast_to(np.atleast_2d(problem.weights), ga.shape[:2])
    norms = np.linalg.norm(aa, axis=-1)
    worst = 0.0
    for i in range(ga.shape[0]):
        for j in range(ga.shape[1]):
            if norms[i, j] > 0:
                r = np.linalg.norm(ga[i, j] + w[i, j] * aa[i, j] / norms[i, j])
            else:
                r = max(0.0, np.linalg.norm(ga[i, j]) - w[i, j])
            worst = max(worst, r)
    return worst


def lagged_design(samples, order: int):
    """Regressors g[t] and targets y[t] for t = P..T-1 (rows)."""
    y = np.asarray(samples, dtype=float)
    T, n = y.shape
    if T <= order:
        raise ValueError("series shorter than the model order")
    # column block n' holds y_{n'}[t-1], ..., y_{n'}[t-P]
    lags = np.stack([y[order - p:T - p] for p in range(1, order + 1)], axis=2)
    G = lags.reshape(T - order, n * order)
    return G, y[order:]


def _edge_weights(n_nodes, reg_lambda, node):
    w = np.full(n_nodes, float(reg_lambda))
    if node is None:
        w = np.tile(w, (n_nodes, 1))
        np.fill_diagonal(w, 0.0)
    else:
        w[node] = 0.0
    return w


def _weighted_problem(samples, order, reg_lambda, node, sample_weights):
    G, Y = lagged_design(samples, order)
    m = G.shape[0]
    sw = sample_weights / m
    H = (G * sw[:, None]).T @ G
    B = (Y * sw[:, None]).T @ G  # row n: b_n
    C = 0.5 * (sw @ Y ** 2)
    n_nodes = Y.shape[1]
    w = _edge_weights(n_nodes, reg_lambda, node)
    if node is None:
        return CompositeProblem(H, B, w, order, C)
    return CompositeProblem(H, B[node], w, order, float(C[node]))


def assemble_hindsight_tiso(samples, order: int, reg_lambda: float, node=None) -> CompositeProblem:
    """C_T(a_n) = 1/(T-P) sum_{t=P}^{T-1} l_t(a_n) + lambda sum_{n' != n} ||a_{n,n'}||.

    ``node=None`` stacks all N per-node problems.
    """
    samples = np.asarray(getattr(samples, "samples", samples), dtype=float)
    m = samples.shape[0] - order
    return _weighted_problem(samples, order, reg_lambda, node, np.ones(m))


def assemble_hindsight_tirso(samples, order: int, reg_lambda: float, gamma: float,
                             node=None) -> CompositeProblem:
    """Exponentially weighted hindsight objective in collapsed form.

    Sample tau carries weight (1 - gamma^(T - tau)) / (T - P).
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    samples = np.asarray(getattr(samples, "samples", samples), dtype=float)
    T = samples.shape[0]
    taus = np.arange(order, T)
    return _weighted_problem(samples, order, reg_lambda, node, 1.0 - gamma ** (T - taus))


def instantaneous_minimizer(phi, r, weights, order: int, init=None, tol: float = 1e-10,
                            max_iter: int = 50_000) -> SolveReport:
    """argmin 0.5 a^T Phi a - r^T a + sum_g w_g ||a_g|| (rows of r = nodes)."""
    return prox_grad_solve(CompositeProblem(phi, r, weights, order), init=init,
                           tol=tol, max_iter=max_iter)


def osgd_step(state: TisoState, sample, cfg: EstimatorConfig) -> TisoState:
    """Online subgradient step on l_t + Omega; the group-norm subgradient is 0 at 0."""
    y = np.asarray(sample, dtype=float)
    g = build_regressor(state.lag_buffer)
    alpha = tiso_step_size(g, state.t, cfg)
    a = state.estimates
    p = cfg.order
    groups = a.reshape(a.shape[0], -1, p)
    norms = np.linalg.norm(groups, axis=-1)
    unit = np.divide(groups, norms[..., None], out=np.zeros_like(groups),
                     where=norms[..., None] > 0)
    sub = (cfg.weights[..., None] * unit).reshape(a.shape)
    state.estimates = a - alpha * (tiso_gradient(a, g, y) + sub)
    state.last_step = alpha
    _rotate(state.lag_buffer, y)
    state.t += 1
    return state


def pgd_tirso_step(state: TirsoState, sample, cfg: EstimatorConfig, inner_iters: int = 5,
                   inner_step: float | None = None) -> TirsoState:
    """Stats update, then ``inner_iters`` proximal-gradient passes on (Phi[t], r[t]).

    The inner step defaults to the TIRSO step alpha_t, so one pass
    reproduces :func:`tirso_step`.
    """
    if inner_iters < 1:
        raise ValueError("inner_iters must be >= 1")
    y = np.asarray(sample, dtype=float)
    g = build_regressor(state.lag_buffer)
    state.phi, state.r = tirso_update_stats(state.phi, state.r, g, y, cfg.forgetting, cfg.mu)
    if cfg.schedule.kind == "adaptive":
        alpha = _adaptive_step(state, cfg)
    else:
        alpha = step_size_at(cfg.schedule, state.t)
    step = alpha if inner_step is None else inner_step
    a = state.estimates
    shrink = step * cfg.weights
    for _ in range(inner_iters):
        a = group_shrink(a - step * tirso_gradient(state.phi, state.r, a), shrink, cfg.order)
    state.estimates = a
    state.last_step = step
    _rotate(state.lag_buffer, y)
    state.t += 1
    return state
