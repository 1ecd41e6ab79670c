import numpy as np
import pytest

from onlinetopo.estimators import (
    EstimatorConfig,
    StepSizeSchedule,
    group_norms,
    tirso_init,
    tirso_step,
    tiso_init,
    tiso_step,
)
from onlinetopo.metrics import asymptotic_gap, loss_envelope
from onlinetopo.model import generate_er_graph, sample_var_coefficients, simulate_var
from onlinetopo.oracle import (
    CompositeProblem,
    assemble_hindsight_tirso,
    assemble_hindsight_tiso,
    instantaneous_minimizer,
    lagged_design,
    osgd_step,
    pgd_tirso_step,
    prox_grad_solve,
    subgradient_residual,
)
from onlinetopo.runner import run_online


def _series(seed=0, n=4, order=2, T=400, std=1.0):
    mask = generate_er_graph(n, 0.3, seed=seed)
    params = sample_var_coefficients(mask, order, seed=100 + seed)
    return simulate_var(params, T, std, seed=200 + seed).samples


def _loss_loop(samples, order, a, node):
    """Per-sample squared losses l_tau(a) built with explicit index loops."""
    T, n = samples.shape
    out = []
    for t in range(order, T):
        pred = sum(a[m * order + p] * samples[t - 1 - p, m]
                   for m in range(n) for p in range(order))
        out.append(0.5 * (samples[t, node] - pred) ** 2)
    return np.array(out)


# --- solver -------------------------------------------------------------------


def test_unregularized_identity_problem_returns_b():
    b = np.array([1.0, -2.0, 0.5, 3.0])
    rep = prox_grad_solve(CompositeProblem(np.eye(4), b, np.zeros(2), 2))
    assert rep.converged
    np.testing.assert_allclose(rep.solution, b, atol=1e-10)


def test_identity_problem_is_group_shrinkage():
    b = np.array([3.0, 4.0, 0.3, 0.4])
    rep = prox_grad_solve(CompositeProblem(np.eye(4), b, np.array([1.0, 1.0]), 2))
    np.testing.assert_allclose(rep.solution, [2.4, 3.2, 0.0, 0.0], atol=1e-10)


def test_solution_satisfies_optimality_conditions():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(6, 6))
    H = m @ m.T + 0.1 * np.eye(6)
    prob = CompositeProblem(H, rng.normal(size=6), np.array([0.0, 0.8, 2.0]), 2)
    rep = prox_grad_solve(prob, tol=1e-12, max_iter=200_000)
    assert rep.converged
    assert subgradient_residual(prob, rep.solution) < 1e-8
    # a nearby perturbation should not beat the reported minimum
    for _ in range(20):
        assert prob.objective(rep.solution + 1e-3 * rng.normal(size=6)) >= rep.final_objective


def test_objective_trace_is_nonincreasing():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(8, 8))
    prob = CompositeProblem(m @ m.T, rng.normal(size=8), np.full(4, 0.5), 2)
    rep = prox_grad_solve(prob, track_objective=True)
    assert np.all(np.diff(rep.objective_trace) <= 1e-12)
    assert rep.objective_trace[-1] == pytest.approx(float(rep.final_objective))


def test_nonconvergence_is_reported():
    rng = np.random.default_rng(2)
    m = rng.normal(size=(4, 4))
    rep = prox_grad_solve(CompositeProblem(m @ m.T, np.ones(4), np.zeros(2), 2), max_iter=2)
    assert not rep.converged and rep.iterations == 2
    assert rep.to_dict()["converged"] is False


def test_stacked_rows_solved_independently():
    rng = np.random.default_rng(4)
    m = rng.normal(size=(4, 4))
    H = m @ m.T + np.eye(4)
    B = rng.normal(size=(3, 4))
    W = rng.uniform(0, 1, size=(3, 2))
    joint = prox_grad_solve(CompositeProblem(H, B, W, 2), tol=1e-12).solution
    for i in range(3):
        single = prox_grad_solve(CompositeProblem(H, B[i], W[i], 2), tol=1e-12).solution
        np.testing.assert_allclose(joint[i], single, atol=1e-10)


def test_problem_validation():
    with pytest.raises(ValueError):
        CompositeProblem(np.eye(3), np.ones(4), np.zeros(2), 2)
    with pytest.raises(ValueError):
        CompositeProblem(np.eye(4), np.ones(4), np.array([-1.0, 0.0]), 2)
    with pytest.raises(ValueError):
        prox_grad_solve(CompositeProblem(np.eye(2), np.ones(2), np.zeros(2), 1), tol=0)


# --- hindsight objectives -----------------------------------------------------


def test_lagged_design_rows():
    y = np.arange(12, dtype=float).reshape(6, 2)
    G, Y = lagged_design(y, 2)
    assert G.shape == (4, 4)
    # t = 2: [y_0[1], y_0[0], y_1[1], y_1[0]]
    np.testing.assert_array_equal(G[0], [2, 0, 3, 1])
    np.testing.assert_array_equal(Y[0], y[2])
    with pytest.raises(ValueError):
        lagged_design(y[:2], 2)


@pytest.mark.parametrize("node", [0, 2])
def test_tiso_objective_matches_brute_force(node):
    y = _series(T=60)
    rng = np.random.default_rng(node)
    a = rng.normal(size=8)
    lam = 0.3
    prob = assemble_hindsight_tiso(y, 2, lam, node=node)
    losses = _loss_loop(y, 2, a, node)
    reg = sum(lam * np.linalg.norm(a[2 * m:2 * m + 2]) for m in range(4) if m != node)
    assert float(prob.objective(a)) == pytest.approx(losses.mean() + reg, abs=1e-10)


def test_tirso_objective_matches_brute_force():
    y = _series(T=60)
    a = np.random.default_rng(7).normal(size=8)
    gamma, lam, node = 0.9, 0.2, 1
    T = y.shape[0]
    losses = _loss_loop(y, 2, a, node)
    w = np.array([1 - gamma ** (T - tau) for tau in range(2, T)])
    reg = sum(lam * np.linalg.norm(a[2 * m:2 * m + 2]) for m in range(4) if m != node)
    expected = (w * losses).sum() / (T - 2) + reg
    prob = assemble_hindsight_tirso(y, 2, lam, gamma, node=node)
    assert float(prob.objective(a)) == pytest.approx(expected, abs=1e-10)


def test_tirso_single_sample_weight():
    y = _series(T=3)
    a = np.random.default_rng(0).normal(size=8)
    gamma = 0.8
    tiso = assemble_hindsight_tiso(y, 2, 0.0, node=0)
    tirso = assemble_hindsight_tirso(y, 2, 0.0, gamma, node=0)
    assert float(tirso.objective(a)) == pytest.approx((1 - gamma) * float(tiso.objective(a)),
                                                      rel=1e-12)
    with pytest.raises(ValueError):
        assemble_hindsight_tirso(y, 2, 0.0, 1.0)


def test_stacked_problem_rows_match_single_node():
    y = _series(T=80)
    full = assemble_hindsight_tiso(y, 2, 0.1)
    for node in range(4):
        one = assemble_hindsight_tiso(y, 2, 0.1, node=node)
        np.testing.assert_allclose(full.b[node], one.b)
        np.testing.assert_allclose(full.weights[node], one.weights)
        assert full.weights[node, node] == 0.0


def test_hindsight_gap_shrinks_with_horizon():
    y = _series(T=1600)
    out = asymptotic_gap(y, 0, 2, 1e-3, 0.98, [100, 400, 1600], tol=1e-11)
    assert out["converged"].all()
    assert np.all(np.diff(out["objective_gap"]) < 0)
    assert np.all(np.diff(out["minimizer_gap"]) < 0)
    assert np.all(out["objective_gap"] <= out["envelope"])


@pytest.mark.parametrize("T", [20, 100, 500])
def test_objective_gap_under_envelope_for_arbitrary_points(T):
    y = _series(T=T, seed=1)
    gamma = 0.95
    b_y = float(np.max(y ** 2))
    tiso = assemble_hindsight_tiso(y, 2, 0.5)
    tirso = assemble_hindsight_tirso(y, 2, 0.5, gamma)
    rng = np.random.default_rng(T)
    for _ in range(25):
        a = rng.normal(scale=rng.uniform(0.1, 3), size=(4, 8))
        gap = np.abs(tiso.objective(a) - tirso.objective(a))
        env = [loss_envelope(a[n], b_y, 4, 2, T, gamma) for n in range(4)]
        assert np.all(gap <= np.array(env))


# --- instantaneous minimizer and baselines ------------------------------------


def _config(lam=0.05, alpha=0.01, n=4, order=2):
    return EstimatorConfig(n, order, reg_lambda=lam, schedule=StepSizeSchedule.constant(alpha),
                           forgetting=0.98)


def test_osgd_without_regularization_equals_tiso():
    y = _series(T=200)
    cfg = _config(lam=0.0)
    a = run_online("TISO", y, cfg).estimates
    b = run_online("OSGD", y, cfg).estimates
    np.testing.assert_array_equal(a, b)


def test_osgd_never_sets_groups_to_zero():
    y = _series(T=600)
    cfg = _config(lam=1.0, alpha=0.01)
    tiso = run_online("TISO", y, cfg).final
    osgd = run_online("OSGD", y, cfg).final
    zeros_tiso = int((group_norms(tiso, 2) == 0).sum())
    zeros_osgd = int((group_norms(osgd, 2) == 0).sum())
    assert zeros_tiso > zeros_osgd


def test_osgd_single_step_by_hand():
    cfg = _config(lam=0.5, alpha=0.1, n=2, order=1)
    state = tiso_init([[1.0, 2.0]], cfg)
    state.estimates = np.array([[0.0, 3.0], [1.0, 0.0]])
    osgd_step(state, [1.0, -1.0], cfg)
    g = np.array([1.0, 2.0])
    # node 0: prediction error 6 - 1 = 5, edge group (0, 1) has unit sign +1
    # node 1: prediction error 1 + 1 = 2, edge group (1, 0) has unit sign +1
    expected = np.array([[0.0 - 0.1 * 5 * g[0], 3.0 - 0.1 * 5 * g[1] - 0.1 * 0.5],
                         [1.0 - 0.1 * 2 * g[0] - 0.1 * 0.5, 0.0 - 0.1 * 2 * g[1]]])
    np.testing.assert_allclose(state.estimates, expected, rtol=1e-14)


def test_pgd_single_inner_pass_equals_tirso():
    y = _series(T=150)
    cfg = _config()
    s1 = tirso_init(y[:2], cfg)
    s2 = tirso_init(y[:2], cfg)
    for t in range(2, 150):
        tirso_step(s1, y[t], cfg)
        pgd_tirso_step(s2, y[t], cfg, inner_iters=1)
    assert s1.estimates.tobytes() == s2.estimates.tobytes()


def test_pgd_many_passes_reach_instantaneous_minimizer():
    y = _series(T=60)
    cfg = EstimatorConfig(4, 2, reg_lambda=0.05, forgetting=0.98,
                          schedule=StepSizeSchedule.adaptive(1.0), init_phi_scale=0.01)
    state = tirso_init(y[:2], cfg)
    for t in range(2, 59):
        pgd_tirso_step(state, y[t], cfg)
    pgd_tirso_step(state, y[59], cfg, inner_iters=50_000)
    ref = instantaneous_minimizer(state.phi, state.r, cfg.weights, 2, tol=1e-13,
                                  max_iter=500_000)
    assert ref.converged
    assert np.max(np.abs(state.estimates - ref.solution)) < 1e-8


def test_pgd_rejects_zero_inner_iterations():
    cfg = _config()
    state = tirso_init(np.zeros((2, 4)), cfg)
    with pytest.raises(ValueError):
        pgd_tirso_step(state, np.zeros(4), cfg, inner_iters=0)


def test_tiso_step_is_a_prox_step_on_the_instantaneous_loss():
    y = _series(T=5)
    cfg = _config(lam=0.3, alpha=0.05)
    state = tiso_init(y[:2], cfg)
    state.estimates = np.random.default_rng(0).normal(size=(4, 8))
    prev = state.estimates.copy()
    G, _ = lagged_design(y[:3], 2)
    tiso_step(state, y[2], cfg)
    # prox of the linearized loss: argmin <v, a> + ||a - prev||^2/(2 alpha) + Omega(a)
    v = (prev @ G[0] - y[2])[:, None] * G[0][None, :]
    prob = CompositeProblem(np.eye(8) / 0.05, prev / 0.05 - v, cfg.weights, 2)
    ref = prox_grad_solve(prob, tol=1e-13).solution
    np.testing.assert_allclose(state.estimates, ref, atol=1e-10)
