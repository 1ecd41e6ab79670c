"""Random causality graphs, stable VAR coefficients and synthetic series.

Coefficient tensors use the layout ``coeffs[n, n', p - 1]``: the weight with
which ``y_{n'}[t - p]`` enters ``y_n[t]``. Reshaping to ``(N, N * P)`` yields
the per-node flat vectors consumed by the estimators.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "VarParameters",
    "TimeSeriesMatrix",
    "SmoothTransitionConfig",
    "StabilityWarning",
    "generate_er_graph",
    "sample_var_coefficients",
    "companion_matrix",
    "companion_spectral_radius",
    "stabilize",
    "simulate_var",
    "transition_profile",
    "simulate_smooth_transition",
    "simulate_drifting_var",
]


class StabilityWarning(UserWarning):
    """Raised (as a warning) when a VAR process is not stable."""


@dataclass
class VarParameters:
    """Coefficient tensor of an order-P VAR process on N nodes."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 3 or self.coeffs.shape[0] != self.coeffs.shape[1]:
            raise ValueError("coeffs must have shape (N, N, P)")
        if self.coeffs.shape[2] < 1:
            raise ValueError("order must be at least 1")

    @property
    def n_nodes(self) -> int:
        return self.coeffs.shape[0]

    @property
    def order(self) -> int:
        return self.coeffs.shape[2]

    @property
    def lag_matrices(self) -> np.ndarray:
        """Matrices A_1..A_P stacked along the first axis, shape (P, N, N)."""
        return np.moveaxis(self.coeffs, 2, 0)

    @property
    def flat(self) -> np.ndarray:
        """Per-node coefficient vectors, shape (N, N * P)."""
        return self.coeffs.reshape(self.n_nodes, -1)

    @property
    def support(self) -> np.ndarray:
        """Boolean N x N matrix, True where the group a_{n,n'} is nonzero."""
        return np.any(self.coeffs != 0, axis=2)

    @classmethod
    def from_flat(cls, flat, order: int) -> "VarParameters":
        flat = np.asarray(flat, dtype=float)
        n = flat.shape[0]
        return cls(flat.reshape(n, n, order))

    @classmethod
    def from_lag_matrices(cls, mats) -> "VarParameters":
        return cls(np.moveaxis(np.asarray(mats, dtype=float), 0, 2))


@dataclass
class TimeSeriesMatrix:
    """T x N samples; row t holds y[t]."""

    samples: np.ndarray
    innovation_std: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2:
            raise ValueError("samples must be a T x N matrix")

    @property
    def length(self) -> int:
        return self.samples.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.samples.shape[1]


@dataclass
class SmoothTransitionConfig:
    """Transition from ``params_a`` to ``params_b`` starting at ``t_break``."""

    kappa: float
    t_break: int
    params_a: VarParameters
    params_b: VarParameters

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if self.t_break < 0:
            raise ValueError("t_break must be nonnegative")
        if self.params_a.coeffs.shape != self.params_b.coeffs.shape:
            raise ValueError("params_a and params_b must share N and P")


def generate_er_graph(n_nodes: int, edge_prob: float, seed=None) -> np.ndarray:
    """Erdős-Rényi support mask with all self-loops present.

    Entry ``(n, n')`` is True iff the edge n' -> n may carry coefficients.
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    mask = rng.random((n_nodes, n_nodes)) < edge_prob
    np.fill_diagonal(mask, True)
    return mask


def companion_matrix(params: VarParameters) -> np.ndarray:
    n, p = params.n_nodes, params.order
    comp = np.zeros((n * p, n * p))
    comp[:n, :] = np.hstack(list(params.lag_matrices))
    if p > 1:
        comp[n:, :-n] = np.eye(n * (p - 1))
    return comp


def companion_spectral_radius(params: VarParameters) -> float:
    """Spectral radius of the NP x NP companion matrix."""
    eig = np.linalg.eigvals(companion_matrix(params))
    return float(np.max(np.abs(eig))) if eig.size else 0.0


def stabilize(params: VarParameters, target_radius: float = 0.9) -> VarParameters:
    """Rescale A_p by c**p, c = target / radius, which scales every root by c.

    An all-zero process (radius 0) is returned unchanged with a warning.
    """
    if not 0.0 < target_radius:
        raise ValueError("target_radius must be positive")
    rho = companion_spectral_radius(params)
    if rho == 0.0:
        warnings.warn("degenerate input: spectral radius is 0; returned unchanged",
                      StabilityWarning, stacklevel=2)
        return VarParameters(params.coeffs.copy())
    c = target_radius / rho
    scale = c ** np.arange(1, params.order + 1)
    return VarParameters(params.coeffs * scale)


def sample_var_coefficients(mask, order: int, seed=None,
                            target_radius: float = 0.9) -> VarParameters:
    """Standard-normal coefficients on the mask support, then stabilized."""
    mask = np.asarray(mask, dtype=bool)
    if order < 1:
        raise ValueError("order must be >= 1")
    if not 0.0 < target_radius < 1.0:
        raise ValueError("target_radius must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    n = mask.shape[0]
    coeffs = rng.standard_normal((n, n, order)) * mask[:, :, None]
    return stabilize(VarParameters(coeffs), target_radius)


def _run_recursion(coeff_at, n_nodes, order, length, innovation_std, rng,
                   burn_in, initial):
    """Shared simulation loop; ``coeff_at(k)`` gives the (N, NP) flat matrix
    used for output sample index k (negative during burn-in)."""
    total = burn_in + length
    noise = rng.standard_normal((total, n_nodes)) * innovation_std
    y = np.zeros((total, n_nodes))
    start = 0
    if initial is not None:
        initial = np.asarray(initial, dtype=float).reshape(-1, n_nodes)
        if initial.shape[0] != order:
            raise ValueError("initial must hold exactly P samples")
        y[burn_in:burn_in + order] = initial
        start = burn_in + order
    # lag buffer, most recent first
    buf = np.zeros((order, n_nodes))
    if start:
        buf[:] = y[start - order:start][::-1]
    for k in range(start, total):
        g = buf.T.reshape(-1)
        y[k] = coeff_at(k - burn_in) @ g + noise[k]
        buf[1:] = buf[:-1]
        buf[0] = y[k]
    return y[burn_in:]


def simulate_var(params: VarParameters, length: int, innovation_std: float = 1.0,
                 seed=None, burn_in: int = 200, initial=None,
                 check_stability: bool = True) -> TimeSeriesMatrix:
    """Simulate y[t] = sum_p A_p y[t-p] + u[t] with Gaussian innovations.

    The recursion starts from a zero state and ``burn_in`` samples are
    discarded. ``initial`` (P x N) instead pins the first P returned samples.
    """
    p = params.order
    if length <= p:
        raise ValueError(f"length must exceed the order ({length} <= {p})")
    if innovation_std < 0:
        raise ValueError("innovation_std must be nonnegative")
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    meta = {"spectral_radius": companion_spectral_radius(params), "unstable": False}
    if check_stability and meta["spectral_radius"] >= 1.0:
        meta["unstable"] = True
        warnings.warn(f"VAR process is not stable (radius {meta['spectral_radius']:.4f})",
                      StabilityWarning, stacklevel=2)
    flat = params.flat
    rng = np.random.default_rng(seed)
    y = _run_recursion(lambda k: flat, params.n_nodes, p, length, innovation_std,
                       rng, burn_in, initial)
    meta.update(seed=seed, burn_in=burn_in, order=p)
    return TimeSeriesMatrix(y, innovation_std=innovation_std, meta=meta)


def transition_profile(t, cfg: SmoothTransitionConfig):
    """s_f[t] = 1 - exp(-kappa * ([t - T_B]_+)^2); accepts scalars or arrays."""
    excess = np.maximum(np.asarray(t, dtype=float) - cfg.t_break, 0.0)
    out = -np.expm1(-cfg.kappa * excess ** 2)
    return float(out) if np.ndim(out) == 0 else out


def simulate_smooth_transition(cfg: SmoothTransitionConfig, length: int,
                               innovation_std: float = 1.0, seed=None,
                               burn_in: int = 200):
    """Simulate the smooth-transition VAR process.

    Returns the series and the (T, N, N, P) array of instantaneous
    coefficient tensors (A + s_f[t] (B - A)) used at each output sample.
    Burn-in samples use ``params_a``.
    """
    a, b = cfg.params_a, cfg.params_b
    p, n = a.order, a.n_nodes
    if length <= p:
        raise ValueError(f"length must exceed the order ({length} <= {p})")
    if innovation_std < 0:
        raise ValueError("innovation_std must be nonnegative")
    s = transition_profile(np.arange(length), cfg)
    diff = b.flat - a.flat
    flat_a = a.flat

    def coeff_at(k):
        if k < 0:
            return flat_a
        return flat_a + s[k] * diff

    # coarse stability audit of the interpolated path
    unstable = False
    for sk in np.unique(np.concatenate([np.linspace(0, 1, 11), s[:: max(1, length // 50)]])):
        if companion_spectral_radius(VarParameters.from_flat(flat_a + sk * diff, p)) >= 1.0:
            unstable = True
            break
    if unstable:
        warnings.warn("interpolated VAR coefficients leave the stable region",
                      StabilityWarning, stacklevel=2)

    rng = np.random.default_rng(seed)
    y = _run_recursion(coeff_at, n, p, length, innovation_std, rng, burn_in, None)
    path = (flat_a[None] + s[:, None, None] * diff[None]).reshape(length, n, n, p)
    meta = {"seed": seed, "burn_in": burn_in, "order": p, "unstable": unstable,
            "kappa": cfg.kappa, "t_break": cfg.t_break}
    return TimeSeriesMatrix(y, innovation_std=innovation_std, meta=meta), path


def simulate_drifting_var(params: VarParameters, length: int, drift_std: float,
                          innovation_std: float = 1.0, seed=None, burn_in: int = 200,
                          max_radius: float = 0.95):
    """VAR process whose nonzero coefficients follow a Gaussian random walk.

    Zero coefficients stay zero, so the support of ``params`` is kept. A
    step that would push the companion radius above ``max_radius`` is
    rescaled back onto that radius. Returns the series and the (T, N, N, P)
    coefficient path; burn-in uses ``params``.
    """
    p, n = params.order, params.n_nodes
    if length <= p:
        raise ValueError(f"length must exceed the order ({length} <= {p})")
    if drift_std < 0 or innovation_std < 0:
        raise ValueError("standard deviations must be nonnegative")
    rng = np.random.default_rng(seed)
    support = params.coeffs != 0
    path = np.empty((length, n, n, p))
    cur = params.coeffs.copy()
    for k in range(length):
        cur = cur + drift_std * rng.standard_normal(cur.shape) * support
        cand = VarParameters(cur)
        if companion_spectral_radius(cand) > max_radius:
            cur = stabilize(cand, max_radius).coeffs
        path[k] = cur
    flat_path = path.reshape(length, n, n * p)
    flat0 = params.flat
    y = _run_recursion(lambda k: flat0 if k < 0 else flat_path[k], n, p, length,
                       innovation_std, rng, burn_in, None)
    meta = {"seed": seed, "burn_in": burn_in, "order": p, "drift_std": drift_std}
    return TimeSeriesMatrix(y, innovation_std=innovation_std, meta=meta), path
