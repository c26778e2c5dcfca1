import itertools
import unittest

import numpy as np
import pytest

from attnet.clustering import (
    accuracy,
    AdmmState,
    build_affinity,
    choose_reshape_dims,
    MscConfig,
    MscProblem,
    nmi,
    residuals,
    solve,
    spectral_cluster,
    update_e,
    update_multipliers,
    update_s,
    update_z,
)
from attnet.data import gen_planted_network, gen_synthetic_multiview
from attnet.decompositions import AttnConfig
from attnet.errors import ShapeError
from attnet.network import TopologyGraph


def _random_state(seed, n_samples=4, view_dims=(3, 5), config=None):
    rng = np.random.default_rng(seed)
    problem = MscProblem([rng.standard_normal((c, n_samples)) for c in view_dims], 2)
    state = AdmmState(problem, config or MscConfig(s_solver="identity"))
    state.mu, state.rho = 0.7, 0.3
    state.Z = [rng.standard_normal((n_samples, n_samples)) for _ in view_dims]
    state.E = rng.standard_normal(state.E.shape)
    state.Y = [rng.standard_normal((c, n_samples)) for c in view_dims]
    state.S = rng.standard_normal(state.S.shape)
    state.W = rng.standard_normal(state.W.shape)
    return problem, state


class ReshapeDimsTests(unittest.TestCase):
    def test_cluster_count_divides(self):
        self.assertEqual(choose_reshape_dims(165, 15), (11, 15, 11, 15))
        self.assertEqual(choose_reshape_dims(40, 2), (20, 2, 20, 2))

    def test_nearest_square(self):
        self.assertEqual(choose_reshape_dims(1474, 7), (22, 67, 22, 67))
        self.assertEqual(choose_reshape_dims(36, 1), (6, 6, 6, 6))
        self.assertEqual(choose_reshape_dims(13, 5), (1, 13, 1, 13))


class MscConfigTests(unittest.TestCase):
    def test_defaults(self):
        config = MscConfig()
        self.assertEqual(config.mu0, 1e-5)
        self.assertEqual(config.rho0, 1e-4)
        self.assertEqual(config.eta, 2.0)
        self.assertEqual(config.tol, 1e-7)
        self.assertEqual(config.mu_max, 1e10)
        self.assertEqual(config.topology_refresh_interval, 5)
        self.assertEqual(config.attn.epsilon, 0.1)
        self.assertEqual(config.attn.n_starts, 1)

    def test_aliases_and_nesting(self):
        config = MscConfig.from_dict({"lambda": 0.5, "attn": {"epsilon": 0.2, "r_init": 3}})
        self.assertEqual(config.lambda_, 0.5)
        self.assertEqual(config.attn, AttnConfig(epsilon=0.2, r_init=3))
        dumped = config.to_dict()
        self.assertEqual(dumped["lambda"], 0.5)
        self.assertNotIn("lambda_", dumped)
        self.assertEqual(dumped["attn"]["r_init"], 3)
        self.assertEqual(MscConfig.from_dict(dumped), config)

    def test_validation(self):
        self.assertRaises(ValueError, MscConfig, eta=1.0)
        self.assertRaises(ValueError, MscConfig, mu0=0)
        self.assertRaises(ValueError, MscConfig, s_solver="svd")
        self.assertRaises(ValueError, MscConfig, reshape_dims=(2, 2, 2))
        self.assertRaises(ValueError, MscConfig, attn=3)


class MscProblemTests(unittest.TestCase):
    def test_shapes(self):
        problem = MscProblem([np.ones((3, 6)), np.ones((2, 6))], 3)
        self.assertEqual(problem.reshape_dims, (2, 3, 2, 3))
        self.assertEqual(problem.tensor_shape, (2, 3, 2, 3, 2))
        self.assertEqual(problem.view_dims, [3, 2])

    def test_errors(self):
        self.assertRaises(ShapeError, MscProblem, [np.ones((3, 6)), np.ones((3, 5))], 2)
        self.assertRaises(ShapeError, MscProblem, [], 2)
        self.assertRaises(ShapeError, MscProblem, [np.ones((3, 6))], 2, reshape_dims=(2, 3, 3, 3))
        self.assertRaises(ValueError, MscProblem, [np.ones((3, 6))], 0)


def test_update_z_satisfies_stationarity():
    problem, state = _random_state(0)
    for v in range(problem.n_views):
        x = problem.views[v]
        z = update_z(state, problem, v)
        n = problem.n_samples
        system = state.rho * np.eye(n) + state.mu * x.T @ x
        rhs = (
            x.T @ state.Y[v]
            + state.mu * x.T @ x
            - state.mu * x.T @ state.E_view(v)
            - state.W[:, :, v]
            + state.rho * state.S[:, :, v]
        )
        np.testing.assert_allclose(z, np.linalg.solve(system, rhs), atol=1e-10)
        gradient = (
            -state.mu * x.T @ (x - x @ z - state.E_view(v) + state.Y[v] / state.mu)
            + state.rho * (z - state.S[:, :, v] + state.W[:, :, v] / state.rho)
        )
        assert np.linalg.norm(gradient) <= 1e-8 * (1 + np.linalg.norm(rhs))


def test_update_z_without_data():
    rng = np.random.default_rng(1)
    problem = MscProblem([np.zeros((3, 4))], 2)
    state = AdmmState(problem, MscConfig(s_solver="identity"))
    state.mu, state.rho = 0.7, 0.3
    state.S = rng.standard_normal(state.S.shape)
    state.W = rng.standard_normal(state.W.shape)
    z = update_z(state, problem, 0)
    np.testing.assert_allclose(z, state.S[:, :, 0] - state.W[:, :, 0] / state.rho, atol=1e-12)


def test_update_e_closed_form():
    problem = MscProblem([np.array([[3.0, 0.3], [4.0, 0.4]])], 1)
    state = AdmmState(problem, MscConfig(lambda_=1.0))
    state.mu = 1.0
    e = update_e(state, problem)
    np.testing.assert_allclose(e[:, 0], [2.4, 3.2])
    np.testing.assert_array_equal(e[:, 1], [0, 0])


def test_update_e_prox_optimality():
    problem, state = _random_state(2, config=MscConfig(lambda_=2.0))
    e = update_e(state, problem)
    d = np.vstack(
        [x - x @ z + y / state.mu for x, z, y in zip(problem.views, state.Z, state.Y)]
    )
    threshold = 2.0 / state.mu
    for j in range(d.shape[1]):
        if np.linalg.norm(d[:, j]) <= threshold:
            assert np.all(e[:, j] == 0)
        else:
            subgradient = e[:, j] - d[:, j] + threshold * e[:, j] / np.linalg.norm(e[:, j])
            assert np.linalg.norm(subgradient) <= 1e-10


def test_multipliers_unchanged_when_feasible():
    problem, state = _random_state(3)
    for v, x in enumerate(problem.views):
        state.E[state._offsets[v] : state._offsets[v + 1]] = x - x @ state.Z[v]
    state.S = state.Z_tensor
    y, w = [np.array(m) for m in state.Y], np.array(state.W)
    update_multipliers(state, problem)
    for before, after in zip(y, state.Y):
        np.testing.assert_allclose(after, before, atol=1e-12)
    np.testing.assert_array_equal(state.W, w)
    assert residuals(state, problem)[0] <= 1e-12
    assert residuals(state, problem)[1] == 0


def test_multiplier_step():
    problem, state = _random_state(4)
    mu, rho = state.mu, state.rho
    expected_y = [
        y + mu * (x - x @ z - state.E_view(v))
        for v, (x, z, y) in enumerate(zip(problem.views, state.Z, state.Y))
    ]
    expected_w = state.W + rho * (np.stack(state.Z, axis=2) - state.S)
    update_multipliers(state, problem)
    for a, b in zip(state.Y, expected_y):
        np.testing.assert_allclose(a, b, atol=1e-12)
    np.testing.assert_allclose(state.W, expected_w, atol=1e-12)
    assert state.mu == 2 * mu
    assert state.rho == 2 * rho


def test_penalty_schedule():
    problem, state = _random_state(5, config=MscConfig(mu0=1e-5, mu_max=1e-3, rho_max=1e-1))
    state.mu, state.rho = 1e-5, 1e-4
    for t in range(1, 12):
        update_multipliers(state, problem)
        assert state.mu == min(1e-5 * 2**t, 1e-3)
        assert state.rho == min(1e-4 * 2**t, 1e-1)


def test_residuals():
    problem, state = _random_state(6)
    state.S = state.Z_tensor - 0.25
    reconstruction, match = residuals(state, problem)
    assert match == pytest.approx(0.25, abs=1e-15)
    expected = 0.0
    for v, (x, z) in enumerate(zip(problem.views, state.Z)):
        r = x - x @ z - state.E_view(v)
        for i, j in itertools.product(*map(range, r.shape)):
            expected = max(expected, abs(r[i, j]))
    assert reconstruction == expected


class TestUpdateS:
    def _exact_state(self, refresh_interval):
        problem = MscProblem([np.ones((3, 4)), np.ones((2, 4))], 2, reshape_dims=(2, 2, 2, 2))
        topology = TopologyGraph.uniform(problem.tensor_shape, 2)
        tensor, factors = gen_planted_network(problem.tensor_shape, topology, seed=0)
        config = MscConfig(
            topology_refresh_interval=refresh_interval,
            attn=AttnConfig(epsilon=0.1, iter_max_als=50, max_increments=2),
        )
        state = AdmmState(problem, config)
        z = np.reshape(tensor.data, (4, 4, 2), order="F")
        state.Z = [z[:, :, v] for v in range(2)]
        state.cached_factors = factors
        return problem, state, z

    def test_warm_refit_is_exact(self):
        problem, state, z = self._exact_state(5)
        state.t = 1
        s = update_s(state, problem)
        assert s.shape == (4, 4, 2)
        assert np.linalg.norm(s - z) / np.linalg.norm(z) <= 1e-6
        assert state.attn_reports == []

    def test_refresh_keeps_better_fit(self):
        problem, state, z = self._exact_state(5)
        state.t = 5
        s = update_s(state, problem)
        assert np.linalg.norm(s - z) / np.linalg.norm(z) <= 1e-6
        assert len(state.attn_reports) == 1
        assert state.attn_reports[0]["kept"] in ("search", "refit")
        assert state.attn_reports[0]["iteration"] == 6

    def test_first_iteration_searches(self):
        problem, state, z = self._exact_state(5)
        state.cached_factors = None
        update_s(state, problem)
        assert state.attn_reports[0]["kept"] == "search"
        assert state.cached_factors is not None
        assert state.s_rse == pytest.approx(
            np.linalg.norm(state.S - z) / np.linalg.norm(z), abs=1e-10
        )

    def test_released_at_rho_cap(self):
        problem, state, _ = self._exact_state(5)
        factors = state.cached_factors
        state.t, state.rho = 3, state.config.rho_max
        state.W = np.random.default_rng(2).standard_normal(state.W.shape)
        assert not state.s_settled
        s = update_s(state, problem)
        np.testing.assert_allclose(s, state.Z_tensor + state.W / state.rho)
        assert state.s_settled
        assert state.cached_factors is factors
        assert state.attn_reports == []

    def test_identity_and_zero(self):

        problem, state = _random_state(7)
        f = state.Z_tensor + state.W / state.rho
        np.testing.assert_allclose(update_s(state, problem), f)

        problem = MscProblem([np.ones((3, 4))], 2, reshape_dims=(2, 2, 2, 2))
        state = AdmmState(problem, MscConfig())
        assert not np.any(update_s(state, problem))
        assert state.cached_factors is None


def test_build_affinity():
    np.testing.assert_array_equal(build_affinity([np.eye(3)]), 2 * np.eye(3))
    rng = np.random.default_rng(8)
    z = [rng.standard_normal((5, 5)) for _ in range(3)]
    m = build_affinity(z)
    assert np.array_equal(m, m.T)
    for i, j in itertools.product(range(5), repeat=2):
        expected = sum(abs(zv[i, j]) + abs(zv[j, i]) for zv in z) / 3
        assert m[i, j] == pytest.approx(expected, abs=1e-14)
    with pytest.raises(ShapeError):
        build_affinity([np.eye(3), np.eye(4)])
    with pytest.raises(ShapeError):
        build_affinity([])


def _synthetic_problem(seed, k=2, per_cluster=20, views=2):
    dataset = gen_synthetic_multiview(
        k=k, per_cluster=per_cluster, views=views, subspace_dim=3, noise_sigma=0.01, seed=seed
    )
    return dataset, dataset.to_problem()


def test_identity_solver_converges():
    accuracies, scores, converged = [], [], 0
    for seed in range(10):
        dataset, problem = _synthetic_problem(seed, k=4, per_cluster=10, views=3)
        assert problem.reshape_dims == (10, 4, 10, 4)
        solution = solve(problem, MscConfig(s_solver="identity"))
        last = solution.trace.iloc[-1]
        assert np.all(np.isfinite(solution.trace[["reconstruction_error", "match_error"]].values))
        converged += (
            solution.converged
            and solution.iterations <= 150
            and max(last["reconstruction_error"], last["match_error"]) <= 1e-7
        )
        labels = spectral_cluster(build_affinity(solution.Z), 4, seed=seed)
        accuracies.append(accuracy(dataset.labels, labels))
        scores.append(nmi(dataset.labels, labels))
    assert converged >= 8
    assert np.mean(accuracies) >= 0.99
    assert np.mean(scores) >= 0.99


@pytest.mark.slow
def test_tensor_network_solver_clusters():
    accuracies, scores, converged = [], [], 0
    for seed in range(10):
        dataset, problem = _synthetic_problem(seed, k=4, per_cluster=10, views=3)
        solution = solve(problem, MscConfig())
        last = solution.trace.iloc[-1]
        converged += (
            solution.converged
            and 40 <= solution.iterations <= 150
            and max(last["reconstruction_error"], last["match_error"]) <= 1e-7
        )
        labels = spectral_cluster(build_affinity(solution.Z), 4, seed=seed)
        accuracies.append(accuracy(dataset.labels, labels))
        scores.append(nmi(dataset.labels, labels))
    assert converged >= 8
    assert np.mean(accuracies) >= 0.99
    assert np.mean(scores) >= 0.99


def test_schedule_in_trace():

    _, problem = _synthetic_problem(0)
    solution = solve(problem, MscConfig(s_solver="identity", iter_max=10))
    mu = solution.trace["mu"].values
    np.testing.assert_allclose(mu, 1e-5 * 2.0 ** np.arange(len(mu)))
    assert set(solution.timings) == {"z", "e", "s", "multipliers"}


def test_zero_lambda_terminates():
    _, problem = _synthetic_problem(1)
    solution = solve(problem, MscConfig(s_solver="identity", lambda_=0.0, iter_max=60))
    assert solution.iterations <= 60
    assert np.all(np.isfinite(solution.trace["reconstruction_error"]))


def test_reshape_override():
    _, problem = _synthetic_problem(2)
    solution = solve(
        problem, MscConfig(s_solver="identity", iter_max=2, reshape_dims=(4, 10, 8, 5))
    )
    assert solution.state.S.shape == (40, 40, 2)


@pytest.mark.slow
def test_tensor_network_prior():
    _, problem = _synthetic_problem(0)
    config = MscConfig(
        topology_refresh_interval=1000,
        iter_max=60,
        attn=AttnConfig(epsilon=0.1, iter_max_als=20, max_increments=3),
    )
    solution = solve(problem, config)
    assert solution.iterations <= 60
    assert len(solution.state.attn_reports) == 1
    assert solution.trace["s_rse"].notna().all()
    assert np.all(np.isfinite(build_affinity(solution.Z)))
