"""Alternating least squares for tensor networks of arbitrary topology."""
import logging
from collections import namedtuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError, lstsq

from attnet.errors import ShapeError
from attnet.network import contract_except_matrix, contract_network, FactorSet
from attnet.tensor import as_array, frobenius_norm, mode_n_unfold

from .config import AttnConfig

__all__ = [
    "AlsFit",
    "als_fit",
    "initial_factor_set",
    "multistart_fit",
    "ridge_schedule",
    "solve_normal_equations",
]


AlsFit = namedtuple("AlsFit", ["factors", "rse_trace", "sweeps", "converged"])
AlsFit.__doc__ = """
The outcome of `als_fit`.

Attributes:
    factors (FactorSet): The fitted network.
    rse_trace (list): RSE against the input after every sweep.
    sweeps (int): Number of sweeps run.
    converged (bool): Whether the relative change tolerance was met.
"""


def solve_normal_equations(xn, a, ridge):
    """
    Solve `min_G ||xn - G a||_F` through `G (a a^T + shift I) = xn a^T`.

    The ridge `shift` is `ridge` times the mean diagonal of `a a^T`, which
    keeps rank-deficient systems (after pruning or padding) solvable.
    """
    gram = a @ a.T
    rhs = xn @ a.T
    scale = np.trace(gram) / gram.shape[0]
    system = gram + ridge * (scale if scale > 0 else 1.0) * np.eye(gram.shape[0])
    try:
        factor = cho_factor(system, check_finite=False)
        return cho_solve(factor, rhs.T, check_finite=False).T
    except LinAlgError:
        logging.warning(
            "Normal equations of size {} are not positive definite; falling back to least squares.".format(
                system.shape[0]
            )
        )
        return lstsq(system, rhs.T)[0].T


def initial_factor_set(x, topology, rng=None):
    """
    Random factors for `topology`, rescaled so that the network has the same
    Frobenius norm as `x`.
    """
    factors = FactorSet.random(topology, rng)
    norm_x = frobenius_norm(x)
    norm_tc = frobenius_norm(contract_network(factors))
    if norm_x > 0 and norm_tc > 0:
        factors = factors.scaled((norm_x / norm_tc) ** (1.0 / topology.n_factors))
    return factors


def ridge_schedule(config, iter_max):
    """
    Per-sweep ridges of a fit that starts from random factors.

    The ridge decays geometrically from `ridge_start` to `ridge_switch`
    over the first `anneal_fraction` of the `iter_max` sweeps; the
    remaining sweeps use `ridge`.

    Returns:
        numpy.ndarray: `iter_max` ridges.
    """
    iter_max = int(iter_max)
    ridges = np.full(iter_max, config.ridge)
    annealed = int(config.anneal_fraction * iter_max)
    if annealed > 0 and config.ridge_start > config.ridge_switch:
        ratio = (config.ridge_switch / config.ridge_start) ** (1.0 / annealed)
        ridges[:annealed] = config.ridge_start * ratio ** np.arange(annealed)
    return np.maximum(ridges, config.ridge)


def als_fit(x, factors, config=None, iter_max=None, tol=None, ridges=None):
    """
    Refine `factors` towards `x` by alternating least squares.

    Each sweep visits the factors in order and replaces factor `n` with the
    solution of `mode_n_unfold(x, n) ~= G_(1) A`, where `A` is the
    matricized network without factor `n`. Sweeps stop once the relative
    change between successive reconstructions is at most `tol`.

    Args:
        x (DenseTensor, array): The tensor to approximate.
        factors (FactorSet): The starting point; its topology is kept.
        config (AttnConfig): Supplies `ridge` and the default `tol_als` and
            `iter_max_als`.
        iter_max (int): Overrides `config.iter_max_als`.
        tol (float): Overrides `config.tol_als`.
        ridges (array): Optional per-sweep ridges (see `ridge_schedule`).
            A sweep run with a ridge above `config.ridge` is discarded if it
            raises the RSE.

    Returns:
        AlsFit: The fitted factors and their per-sweep RSE trace.
    """
    config = config or AttnConfig()
    iter_max = config.iter_max_als if iter_max is None else int(iter_max)
    tol = config.tol_als if tol is None else float(tol)
    if ridges is not None and len(ridges) < iter_max:
        raise ValueError(
            "Expected at least {} ridges, got {}.".format(iter_max, len(ridges))
        )

    x = as_array(x)
    if tuple(x.shape) != factors.mode_sizes:
        raise ShapeError(
            "Tensor of shape {} cannot be fit by a network over modes {}.".format(
                x.shape, factors.mode_sizes
            )
        )
    norm_x = frobenius_norm(x)
    if norm_x == 0:
        raise ValueError("Cannot fit a tensor network to a zero tensor.")

    topology = factors.topology
    last = topology.n_factors - 1
    unfoldings = [mode_n_unfold(x, n) for n in range(topology.n_factors)]
    previous = mode_n_unfold(contract_network(factors), last)
    previous_rse = np.linalg.norm(unfoldings[last] - previous) / norm_x

    trace = []
    rejected = 0
    converged = False
    for sweep in range(iter_max):
        ridge = config.ridge if ridges is None else float(ridges[sweep])
        start = factors
        for n in range(topology.n_factors):
            a = contract_except_matrix(factors, n)
            g = solve_normal_equations(unfoldings[n], a, ridge)
            factors = factors.replace(
                n, np.reshape(g, topology.factor_shape(n), order="F")
            )
        # The last solve already yields the new reconstruction.
        reconstruction = g @ a
        current_rse = float(np.linalg.norm(unfoldings[last] - reconstruction) / norm_x)
        if ridge > config.ridge and current_rse > previous_rse:
            factors = start
            rejected += 1
            trace.append(float(previous_rse))
            continue
        trace.append(current_rse)
        previous_rse = current_rse

        previous_norm = np.linalg.norm(previous)
        change = (
            np.linalg.norm(previous - reconstruction) / previous_norm
            if previous_norm > 0
            else np.inf
        )
        previous = reconstruction
        if change <= tol:
            converged = True
            break

    logging.debug(
        "ALS stopped after {} sweeps ({} discarded) with RSE {:.3e} ({}).".format(
            len(trace),
            rejected,
            trace[-1] if trace else np.nan,
            "converged" if converged else "cap reached",
        )
    )
    return AlsFit(factors, trace, len(trace), converged)


def multistart_fit(x, topology, config=None, rng=None, iter_max=None, tol=None):
    """
    Fit a network of the given topology to `x` from random factors.

    `n_starts` seeded starts each run the first `screen_sweeps` sweeps of the
    `ridge_schedule`; the start with the lowest RSE then runs the remaining
    sweeps. The returned trace covers every sweep of the kept start.

    Args:
        x (DenseTensor, array): The tensor to approximate.
        topology (TopologyGraph): The network to fit.
        config (AttnConfig): Solver settings.
        rng (Generator, int): Source of the starting factors.
        iter_max (int): Overrides `config.iter_max_als`.
        tol (float): Overrides `config.tol_als`.

    Returns:
        AlsFit
    """
    config = config or AttnConfig()
    iter_max = config.iter_max_als if iter_max is None else int(iter_max)
    rng = np.random.default_rng(rng)
    ridges = ridge_schedule(config, iter_max)
    screen = iter_max if config.n_starts == 1 else min(config.screen_sweeps, iter_max)

    fits = [
        als_fit(x, initial_factor_set(x, topology, rng), config, screen, tol, ridges)
        for _ in range(config.n_starts)
    ]
    best = min(range(len(fits)), key=lambda k: fits[k].rse_trace[-1])
    fit = fits[best]
    if config.n_starts > 1:
        logging.debug(
            "Kept start {} of {} after {} sweeps: {}.".format(
                best,
                len(fits),
                screen,
                ", ".join("{:.3e}".format(f.rse_trace[-1]) for f in fits),
            )
        )
    if fit.converged or fit.sweeps >= iter_max:
        return fit

    rest = als_fit(x, fit.factors, config, iter_max - fit.sweeps, tol, ridges[fit.sweeps :])
    return AlsFit(
        rest.factors, fit.rse_trace + rest.rse_trace, fit.sweeps + rest.sweeps, rest.converged
    )
