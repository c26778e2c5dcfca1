"""
Reference decompositions for reconstruction benchmarks.

Tensor train, tensor ring and fully connected networks are all expressed as
`TopologyGraph`s (chain, ring and complete graph) and fit by the shared ALS
solver, so that their contraction and storage accounting match exactly.
Tucker is fit by higher-order orthogonal iteration.
"""
import numpy as np
import pandas as pd
import tensorly as tl
from tensorly.decomposition import tensor_train, tucker

from attnet.network import contract_network, FactorSet, TopologyGraph

from .als import als_fit, multistart_fit
from .attn import attn_decompose
from .base import Decomposition
from .config import AttnConfig

__all__ = ["comparison_table"]


def _als_config(spec):
    return AttnConfig(tol_als=spec.tol, iter_max_als=spec.iter_max)


def _network_result(fit, details=None):
    return (
        contract_network(fit.factors).data,
        fit.factors.factors,
        fit.sweeps,
        fit.converged,
        fit.factors,
        dict(details or {}, rse_trace=fit.rse_trace),
    )


def _network_fit(x, factors, spec, details=None):
    return _network_result(als_fit(x, factors, _als_config(spec)), details)


def _random_start_fit(x, topology, spec, details=None):
    return _network_result(
        multistart_fit(x, topology, _als_config(spec), rng=spec.seed), details
    )


class TuckerDecomposition(Decomposition):

    REGISTRY_KEYS = ["tucker"]

    def arity(self, order):
        return order

    def _fit(self, x, spec):
        if isinstance(spec.ranks, str) and spec.ranks == "full":
            ranks = [min(x.shape[n], x.size // x.shape[n]) for n in range(x.ndim)]
        else:
            ranks = spec.expand_ranks(self.arity(x.ndim))
        (core, factors), errors = tucker(
            tl.tensor(x),
            rank=ranks,
            n_iter_max=spec.iter_max,
            tol=spec.tol,
            init="svd",
            random_state=spec.seed,
            return_errors=True,
        )
        core = tl.to_numpy(core)
        factors = [tl.to_numpy(u) for u in factors]
        reconstruction = tl.to_numpy(tl.tucker_to_tensor((core, factors)))
        return (
            reconstruction,
            [core] + factors,
            len(errors),
            len(errors) < spec.iter_max,
            None,
            {"ranks": ranks, "rse_trace": [float(e) for e in errors]},
        )


class TensorTrainDecomposition(Decomposition):
    """
    Tensor train as a chain network, initialised by TT-SVD and refined by
    ALS. Edge `(n, n + 1)` carries the `n`-th rank.
    """

    REGISTRY_KEYS = ["tt"]

    def arity(self, order):
        return order - 1

    def _fit(self, x, spec):
        ranks = spec.expand_ranks(self.arity(x.ndim))
        cores = tensor_train(tl.tensor(x), rank=[1] + ranks + [1])
        cores = [tl.to_numpy(core) for core in cores]
        achieved = [core.shape[2] for core in cores[:-1]]

        topology = TopologyGraph.chain(x.shape, achieved)
        factors = FactorSet(
            topology,
            [
                np.reshape(np.transpose(core, (1, 0, 2)), topology.factor_shape(n), order="F")
                for n, core in enumerate(cores)
            ],
        )
        # TT-SVD truncates ranks that exceed the unfolding ranks; pad back up.
        for n, (target, actual) in enumerate(zip(ranks, achieved)):
            if target > actual:
                factors = factors.grow_edge(
                    n, n + 1, step=target - actual, rng=[spec.seed, n]
                )
        return _network_fit(x, factors, spec, {"ranks": ranks, "svd_ranks": achieved})


class TensorRingDecomposition(Decomposition):
    """
    Tensor ring as a cyclic network fit by ALS. Edge `(n, n + 1)` carries
    the `n`-th rank and the closing edge `(0, N - 1)` the last.
    """

    REGISTRY_KEYS = ["tr"]

    def arity(self, order):
        return order

    def _fit(self, x, spec):
        ranks = spec.expand_ranks(self.arity(x.ndim))
        topology = TopologyGraph.ring(x.shape, ranks)
        return _random_start_fit(x, topology, spec, {"ranks": ranks})


class FullyConnectedDecomposition(Decomposition):
    """Fully connected network fit by ALS; ranks are given per edge in lexicographic order."""

    REGISTRY_KEYS = ["fctn"]

    def arity(self, order):
        return order * (order - 1) // 2

    def _fit(self, x, spec):
        ranks = spec.expand_ranks(self.arity(x.ndim))
        topology = TopologyGraph.from_edge_ranks(x.shape, ranks)
        return _random_start_fit(x, topology, spec, {"ranks": ranks})


class AdaptiveDecomposition(Decomposition):
    """
    Adaptive topology search. `ranks` (if given) sets the initial uniform
    rank; `options` override the remaining `AttnConfig` settings.
    """

    REGISTRY_KEYS = ["attn"]

    def arity(self, order):
        return 1

    def _fit(self, x, spec):
        options = {"tol_als": spec.tol, "iter_max_als": spec.iter_max, "rng_seed": spec.seed}
        if spec.ranks is not None:
            options["r_init"] = spec.expand_ranks(1)[0]
        options.update(spec.options)
        result = attn_decompose(x, AttnConfig(**options))
        return (
            contract_network(result.factors).data,
            result.factors.factors,
            result.sweeps_used,
            result.converged,
            result.factors,
            dict(result.to_dict()),
        )


def comparison_table(results, input_size=None):
    """
    Summarize decompositions in the layout of a reconstruction benchmark.

    Args:
        results (iterable): `DecompositionResult`s.
        input_size (int): Number of entries of the decomposed tensor; adds a
            `CompressionRatio` column when given.

    Returns:
        pandas.DataFrame: Columns Method, RSE, Time, StorageCost and
            Iterations (plus CompressionRatio), one row per result.
    """
    df = pd.DataFrame(
        [
            {
                "Method": r.method.upper(),
                "RSE": r.rse,
                "Time": r.elapsed,
                "StorageCost": r.storage_cost,
                "Iterations": r.iterations,
            }
            for r in results
        ],
        columns=["Method", "RSE", "Time", "StorageCost", "Iterations"],
    )
    if input_size is not None:
        df["CompressionRatio"] = input_size / df["StorageCost"]
    return df
