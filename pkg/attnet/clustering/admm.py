"""
Multi-view subspace clustering by ADMM with a tensor network prior.

The solver learns one self-representation matrix `Z_v` per view
(`X_v ~= X_v Z_v + E_v`) while coupling the stacked tensor `Z` to a
low-complexity tensor `S` whose topology is learned by
`attn_decompose`. Frontal slices `S[:, :, v]` and `W[:, :, v]` belong to
view `v`.
"""
import logging
import time
from collections import defaultdict, namedtuple

import numpy as np
import pandas as pd
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from attnet.decompositions import als_fit, attn_decompose, AttnConfig
from attnet.errors import ShapeError
from attnet.network import contract_network
from attnet.utils import at_least, Config, one_of, optional, positive

__all__ = [
    "MscConfig",
    "MscProblem",
    "AdmmState",
    "MscSolution",
    "build_affinity",
    "choose_reshape_dims",
    "residuals",
    "solve",
    "update_e",
    "update_multipliers",
    "update_s",
    "update_z",
]


def choose_reshape_dims(n_samples, n_clusters):
    """
    Split the sample count into `(I1, I2, I3, I4)` with `I1 * I2 == I3 * I4
    == n_samples`.

    When `n_clusters` divides `n_samples` the cluster count becomes the
    second factor, e.g. 165 samples in 15 clusters give (11, 15, 11, 15).
    Otherwise the most square divisor pair is used, e.g. 1474 samples give
    (22, 67, 22, 67).
    """
    n_samples, n_clusters = int(n_samples), int(n_clusters)
    if n_clusters > 1 and n_samples % n_clusters == 0:
        pair = (n_samples // n_clusters, n_clusters)
    else:
        small = max(d for d in range(1, int(np.sqrt(n_samples)) + 1) if n_samples % d == 0)
        pair = (small, n_samples // small)
    return pair + pair


def _reshape_dims(value):
    dims = tuple(int(d) for d in value)
    if len(dims) != 4 or any(d < 1 for d in dims):
        raise ValueError("expected four positive sizes, got {}".format(value))
    return dims


def _attn_config(value):
    if isinstance(value, AttnConfig):
        return value
    if isinstance(value, dict):
        return AttnConfig.from_dict(value)
    raise ValueError("expected an `AttnConfig` or a dictionary, got {!r}".format(value))


def _growth_factor(value):
    value = float(value)
    if not value > 1:
        raise ValueError("must exceed 1, got {}".format(value))
    return value


class MscConfig(Config):
    """
    Settings of the ADMM solver.

    Options:
        lambda: Weight of the column-sparse error term.
        mu0, rho0: Initial penalties.
        eta: Penalty growth factor per iteration.
        tol: Stop when both residuals are at most this value.
        mu_max, rho_max: Penalty caps.
        iter_max: Maximum number of iterations.
        topology_refresh_interval: Re-learn the topology of `S` every this
            many iterations (starting with the first).
        s_solver: 'attn' for the tensor network prior, or 'identity' to set
            `S = Z + W / rho` (no prior).
        reshape_dims: Optional override of the problem's reshape sizes.
        attn: Settings of the decompositions solved inside the S-step.
    """

    ALIASES = {"lambda": "lambda_"}

    def _init_options(self, options):
        options.add_option("lambda_", "error term weight", default=0.1, parser=at_least(0, float))
        options.add_option("mu0", "initial mu", default=1e-5, parser=positive())
        options.add_option("rho0", "initial rho", default=1e-4, parser=positive())
        options.add_option("eta", "penalty growth factor", default=2.0, parser=_growth_factor)
        options.add_option("tol", "residual tolerance", default=1e-7, parser=positive())
        options.add_option("mu_max", "cap on mu", default=1e10, parser=positive())
        options.add_option("rho_max", "cap on rho", default=1e10, parser=positive())
        options.add_option("iter_max", "maximum iterations", default=150, parser=at_least(1))
        options.add_option(
            "topology_refresh_interval", "iterations between topology searches", default=5, parser=at_least(1)
        )
        options.add_option("s_solver", "S-step solver", default="attn", parser=one_of("attn", "identity"))
        options.add_option("reshape_dims", "reshape sizes of Z", default=None, parser=optional(_reshape_dims))
        options.add_option(
            "attn",
            "settings of the S-step decomposition",
            default=AttnConfig(epsilon=0.1, iter_max_als=100, max_increments=10, n_starts=1),
            parser=_attn_config,
        )


class MscProblem(object):
    """
    A multi-view clustering problem.

    Args:
        views (list): `V` feature matrices of shape `(C_v, I)`, one column
            per sample.
        n_clusters (int): The number of clusters `k`.
        reshape_dims (tuple): `(I1, I2, I3, I4)` with `I1 * I2 == I3 * I4 ==
            I`; chosen by `choose_reshape_dims` when omitted.
    """

    def __init__(self, views, n_clusters, reshape_dims=None):
        views = tuple(np.asarray(v, dtype=np.float64) for v in views)
        if not views:
            raise ShapeError("At least one view is required.")
        if any(v.ndim != 2 for v in views):
            raise ShapeError("Views must be matrices of shape (features, samples).")
        n_samples = views[0].shape[1]
        if any(v.shape[1] != n_samples for v in views):
            raise ShapeError(
                "All views must share the sample count; got {}.".format(
                    [v.shape[1] for v in views]
                )
            )
        if int(n_clusters) < 1:
            raise ValueError("The number of clusters must be positive.")
        reshape_dims = (
            choose_reshape_dims(n_samples, n_clusters)
            if reshape_dims is None
            else _reshape_dims(reshape_dims)
        )
        i1, i2, i3, i4 = reshape_dims
        if i1 * i2 != n_samples or i3 * i4 != n_samples:
            raise ShapeError(
                "Reshape sizes {} do not factor the sample count {}.".format(
                    reshape_dims, n_samples
                )
            )
        self.views = views
        self.n_clusters = int(n_clusters)
        self.reshape_dims = reshape_dims
        self.grams = tuple(v.T @ v for v in views)

    @property
    def n_samples(self):
        return self.views[0].shape[1]

    @property
    def n_views(self):
        return len(self.views)

    @property
    def view_dims(self):
        return [v.shape[0] for v in self.views]

    @property
    def tensor_shape(self):
        return self.reshape_dims + (self.n_views,)


class AdmmState(object):
    """
    The mutable state of one ADMM run.

    Attributes:
        Z (list): Self-representation matrices, one `I x I` matrix per view.
        E (numpy.ndarray): The stacked error matrix `[E_1; ...; E_V]`.
        Y (list): Multipliers of the reconstruction constraints.
        S (numpy.ndarray): The `I x I x V` low-complexity tensor.
        W (numpy.ndarray): The `I x I x V` multiplier of `Z = S`.
        mu, rho (float): The penalties.
        t (int): Zero-based iteration counter.
        cached_factors (FactorSet): Network of the last S-step.
        s_settled (bool): Whether `rho` has reached its cap and `S` tracks
            `Z + W / rho`.
    """

    def __init__(self, problem, config):
        n = problem.n_samples
        self.config = config
        self.Z = [np.zeros((n, n)) for _ in problem.views]
        self.E = np.zeros((sum(problem.view_dims), n))
        self.Y = [np.zeros_like(v) for v in problem.views]
        self.S = np.zeros((n, n, problem.n_views))
        self.W = np.zeros((n, n, problem.n_views))
        self.mu = config.mu0
        self.rho = config.rho0
        self.t = 0
        self.cached_factors = None
        self.s_settled = False
        self.s_rse = None
        self.attn_reports = []
        self.attn_nonconverged = 0
        self._offsets = np.cumsum([0] + problem.view_dims)
        self._factorizations = {}

    def E_view(self, v):
        return self.E[self._offsets[v] : self._offsets[v + 1]]

    @property
    def Z_tensor(self):
        return np.stack(self.Z, axis=2)


def update_z(state, problem, v):
    """
    Solve the `Z_v` subproblem in closed form:
    `(I + (mu/rho) X^T X) Z_v = (X^T Y_v + mu X^T X - mu X^T E_v - W_v) / rho + S_v`.
    """
    x = problem.views[v]
    gram = problem.grams[v]
    ratio = state.mu / state.rho
    key = (v, ratio)
    if key not in state._factorizations:
        state._factorizations = {
            k: c for k, c in state._factorizations.items() if k[1] == ratio
        }
        try:
            state._factorizations[key] = cho_factor(
                np.eye(problem.n_samples) + ratio * gram, check_finite=False
            )
        except LinAlgError as e:
            raise RuntimeError("Failed to factorize the Z-step system of view {}: {}".format(v, e))
    rhs = (
        x.T @ state.Y[v] + state.mu * gram - state.mu * (x.T @ state.E_view(v)) - state.W[:, :, v]
    ) / state.rho + state.S[:, :, v]
    state.Z[v] = cho_solve(state._factorizations[key], rhs, check_finite=False)
    return state.Z[v]


def update_e(state, problem):
    """
    Column-wise l2,1 shrinkage of `D = [X_v - X_v Z_v + Y_v / mu]_v` with
    threshold `lambda / mu`.
    """
    d = np.vstack(
        [x - x @ z + y / state.mu for x, z, y in zip(problem.views, state.Z, state.Y)]
    )
    threshold = state.config.lambda_ / state.mu
    norms = np.linalg.norm(d, axis=0)
    keep = norms > threshold
    scale = np.zeros_like(norms)
    scale[keep] = (norms[keep] - threshold) / norms[keep]
    state.E = d * scale
    return state.E


def update_s(state, problem):
    """
    Update the low-complexity tensor `S` from `F = Z + W / rho`.

    With the 'attn' solver, `F` is reshaped to `(I1, I2, I3, I4, V)` and
    approximated by a tensor network. On refresh iterations the topology is
    searched afresh and kept only if it fits `F` better than a warm refit
    of the current network; other iterations refit the values of the
    current network. Once `rho` has reached `rho_max`, `S` is set to `F`
    and the network is no longer refit.
    """
    config = state.config
    f = state.Z_tensor + state.W / state.rho
    if config.s_solver == "identity" or not np.any(f):
        state.S = f
        return state.S

    if state.cached_factors is not None and state.rho >= config.rho_max:
        if not state.s_settled:
            logging.info(
                "Penalty rho reached its cap at iteration {}; releasing S from the network.".format(
                    state.t + 1
                )
            )
            state.s_settled = True
        state.S = f
        return state.S

    target = np.reshape(f, problem.tensor_shape, order="F")
    refresh = (
        state.cached_factors is None
        or state.t % config.topology_refresh_interval == 0
    )
    if refresh:
        result = attn_decompose(target, config.attn)
        factors, fit_rse = result.factors, result.final_rse
        if not result.converged:
            state.attn_nonconverged += 1
            logging.warning(
                "Topology search at iteration {} stopped at RSE {:.3e}; using best-effort factors.".format(
                    state.t + 1, result.final_rse
                )
            )
        source = "search"
        if state.cached_factors is not None:
            warm = als_fit(target, state.cached_factors, config.attn)
            if warm.rse_trace[-1] < fit_rse:
                factors, fit_rse, source = warm.factors, warm.rse_trace[-1], "refit"
        report = result.to_dict()
        report.update(iteration=state.t + 1, kept=source)
        state.attn_reports.append(report)
    else:
        warm = als_fit(target, state.cached_factors, config.attn)
        factors, fit_rse = warm.factors, warm.rse_trace[-1]

    state.cached_factors = factors
    state.s_rse = fit_rse
    state.S = np.reshape(contract_network(factors).data, f.shape, order="F")
    return state.S


def update_multipliers(state, problem):
    """Ascent on `Y_v` and `W`, then the penalty schedule."""
    config = state.config
    for v, x in enumerate(problem.views):
        state.Y[v] = state.Y[v] + state.mu * (x - x @ state.Z[v] - state.E_view(v))
    state.W = state.W + state.rho * (state.Z_tensor - state.S)
    state.mu = min(config.eta * state.mu, config.mu_max)
    state.rho = min(config.eta * state.rho, config.rho_max)
    return state.Y, state.W, state.mu, state.rho


def residuals(state, problem):
    """
    Returns:
        tuple: `(reconstruction_error, match_error)`, the largest absolute
            entries of `X_v - X_v Z_v - E_v` and `Z_v - S_v` over all views.
    """
    reconstruction = max(
        float(np.max(np.abs(x - x @ z - state.E_view(v))))
        for v, (x, z) in enumerate(zip(problem.views, state.Z))
    )
    match = max(
        float(np.max(np.abs(z - state.S[:, :, v]))) for v, z in enumerate(state.Z)
    )
    return reconstruction, match


MscSolution = namedtuple(
    "MscSolution", ["Z", "state", "converged", "iterations", "trace", "timings"]
)
MscSolution.__doc__ = """
The outcome of `solve`.

Attributes:
    Z (list): The learned self-representation matrices.
    state (AdmmState): The final solver state.
    converged (bool): Whether both residuals reached `tol`.
    iterations (int): Number of iterations run.
    trace (pandas.DataFrame): Per-iteration residuals, penalties and S-step
        fit.
    timings (dict): Accumulated wall time per update.
"""


def solve(problem, config=None):
    """
    Run the ADMM solver from `Z = E = S = W = 0` until both residuals are at
    most `tol` or `iter_max` iterations have been run.

    Returns:
        MscSolution
    """
    config = config or MscConfig()
    if config.reshape_dims is not None and config.reshape_dims != problem.reshape_dims:
        problem = MscProblem(problem.views, problem.n_clusters, config.reshape_dims)
    state = AdmmState(problem, config)
    timings = defaultdict(float)
    records = []
    converged = False

    def timed(stage, func, *args):
        start = time.perf_counter()
        out = func(*args)
        timings[stage] += time.perf_counter() - start
        return out

    for t in range(config.iter_max):
        state.t = t
        mu, rho = state.mu, state.rho
        for v in range(problem.n_views):
            timed("z", update_z, state, problem, v)
        timed("e", update_e, state, problem)
        timed("s", update_s, state, problem)
        timed("multipliers", update_multipliers, state, problem)

        reconstruction_error, match_error = residuals(state, problem)
        records.append(
            {
                "iteration": t + 1,
                "reconstruction_error": reconstruction_error,
                "match_error": match_error,
                "mu": mu,
                "rho": rho,
                "s_rse": state.s_rse,
            }
        )
        logging.debug(
            "Iteration {}: reconstruction error {:.3e}, match error {:.3e}.".format(
                t + 1, reconstruction_error, match_error
            )
        )
        if max(reconstruction_error, match_error) <= config.tol:
            converged = True
            break

    if converged:
        logging.info("ADMM converged after {} iterations.".format(len(records)))
    else:
        logging.warning(
            "ADMM stopped after {} iterations without reaching tol={}.".format(
                len(records), config.tol
            )
        )
    trace = pd.DataFrame(
        records,
        columns=["iteration", "reconstruction_error", "match_error", "mu", "rho", "s_rse"],
    )
    return MscSolution(list(state.Z), state, converged, len(records), trace, dict(timings))


def build_affinity(Z):
    """`M = (1 / V) * sum_v (|Z_v| + |Z_v^T|)`."""
    Z = [np.asarray(z, dtype=np.float64) for z in Z]
    if not Z:
        raise ShapeError("At least one representation matrix is required.")
    n = Z[0].shape[0]
    if any(z.shape != (n, n) for z in Z):
        raise ShapeError("Representation matrices must all be {0}x{0}.".format(n))
    affinity = np.zeros((n, n))
    for z in Z:
        affinity += np.abs(z) + np.abs(z.T)
    return affinity / len(Z)
