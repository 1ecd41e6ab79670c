"""Stream a series through an online estimator and keep its trajectory."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimators import (
    EstimatorConfig,
    build_regressor,
    tirso_init,
    tirso_step,
    tirso_update_stats,
    tiso_init,
    tiso_step,
)
from .oracle import osgd_step, pgd_tirso_step

__all__ = ["ALGORITHMS", "OnlineRun", "run_online", "tirso_statistics", "TirsoStatistics"]

ALGORITHMS = ("TISO", "TIRSO", "OSGD", "PGD_TIRSO")


@dataclass
class OnlineRun:
    """Estimates a[t] (the one used to predict y[t]) at the recorded t."""

    algorithm: str
    times: np.ndarray
    estimates: np.ndarray  # (K, N, N*P)
    steps: np.ndarray  # alpha_t at recorded t
    order: int
    final: np.ndarray = field(default=None)


def run_online(algorithm: str, samples, cfg: EstimatorConfig, stride: int = 1,
               inner_iters: int = 5, inner_step: float | None = None) -> OnlineRun:
    """Run ``algorithm`` over samples y[0..T-1].

    Records a[t] for t = P, P + stride, ... (always including T - 1) and
    the final a[T] separately.
    """
    y = np.asarray(getattr(samples, "samples", samples), dtype=float)
    T = y.shape[0]
    p = cfg.order
    if T <= p:
        raise ValueError("series shorter than the model order")
    if algorithm in ("TISO", "OSGD"):
        state = tiso_init(y[:p], cfg)
        step = tiso_step if algorithm == "TISO" else osgd_step
    elif algorithm == "TIRSO":
        state = tirso_init(y[:p], cfg)
        step = tirso_step
    elif algorithm == "PGD_TIRSO":
        state = tirso_init(y[:p], cfg)

        def step(s, x, c):
            return pgd_tirso_step(s, x, c, inner_iters, inner_step)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    stride = max(1, int(stride))
    record = set(range(p, T, stride)) | {T - 1}
    times, est, steps = [], [], []
    for t in range(p, T):
        keep = t in record
        if keep:
            times.append(t)
            est.append(state.estimates.copy())
        step(state, y[t], cfg)
        if keep:
            steps.append(state.last_step)
    return OnlineRun(algorithm, np.array(times), np.array(est), np.array(steps), p,
                     final=state.estimates.copy())


@dataclass
class TirsoStatistics:
    """Phi[t], r_n[t] and the data constant of the running loss, t = P..T-1."""

    times: np.ndarray
    phi: np.ndarray  # (K, NP, NP)
    r: np.ndarray  # (K, N, NP)
    const: np.ndarray  # (K, N): 0.5 mu sum gamma^(t-tau) y_n[tau]^2

    def loss(self, estimates) -> np.ndarray:
        """Running loss 0.5 a^T Phi a - r^T a + const at each t, shape (K, N)."""
        a = np.asarray(estimates, dtype=float)
        quad = 0.5 * np.einsum("kni,kij,knj->kn", a, self.phi, a)
        return quad - np.einsum("kni,kni->kn", self.r, a) + self.const


def tirso_statistics(samples, order: int, gamma: float, init_phi_scale: float = 0.0) -> TirsoStatistics:
    """Replay the TIRSO recursions (they do not depend on the estimates)."""
    y = np.asarray(getattr(samples, "samples", samples), dtype=float)
    T, n = y.shape
    mu = 1.0 - gamma
    dim = n * order
    phi = init_phi_scale * np.eye(dim)
    r = np.zeros((n, dim))
    c = np.zeros(n)
    buf = y[:order][::-1].copy()
    K = T - order
    phis = np.empty((K, dim, dim))
    rs = np.empty((K, n, dim))
    cs = np.empty((K, n))
    for k, t in enumerate(range(order, T)):
        g = build_regressor(buf)
        phi, r = tirso_update_stats(phi, r, g, y[t], gamma, mu)
        c = gamma * c + 0.5 * mu * y[t] ** 2
        phis[k], rs[k], cs[k] = phi, r, c
        buf[1:] = buf[:-1]
        buf[0] = y[t]
    return TirsoStatistics(np.arange(order, T), phis, rs, cs)
