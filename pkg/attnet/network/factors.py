import logging

import numpy as np

from attnet.errors import ShapeError

from .topology import TopologyGraph

__all__ = ["FactorSet", "storage_cost"]


def _readonly(arr):
    arr = np.asarray(arr, dtype=np.float64)
    view = arr.view()
    view.setflags(write=False)
    return view


class FactorSet(object):
    """
    The core tensors of a tensor network together with its topology.

    Factor `n` has shape `topology.factor_shape(n)`: the physical mode first,
    then one rank mode per other factor in ascending order. Rank-1 edges stay
    in place as singleton modes so that the factor layout is the same
    whichever edges are present.

    Factors are exposed as read-only arrays; derive new sets with `replace`,
    `collapse_edge` or `grow_edge`.

    Attributes:
        disconnected (bool): Whether the edges of rank greater than one
            split the factors into more than one component. Such networks
            contract to an outer product of their components.
    """

    def __init__(self, topology, factors):
        if not isinstance(topology, TopologyGraph):
            raise TypeError("`topology` must be a `TopologyGraph`.")
        factors = tuple(_readonly(f) for f in factors)
        if len(factors) != topology.n_factors:
            raise ShapeError(
                "Expected {} factors, got {}.".format(topology.n_factors, len(factors))
            )
        for n, factor in enumerate(factors):
            if factor.shape != topology.factor_shape(n):
                raise ShapeError(
                    "Factor {} has shape {} but the topology requires {}.".format(
                        n, factor.shape, topology.factor_shape(n)
                    )
                )
        self._topology = topology
        self._factors = factors
        self.disconnected = not topology.is_connected

    @classmethod
    def random(cls, topology, rng=None, scale=1.0):
        """Factors with i.i.d. normal entries of standard deviation `scale`."""
        rng = np.random.default_rng(rng)
        return cls(
            topology,
            [
                scale * rng.standard_normal(topology.factor_shape(n))
                for n in range(topology.n_factors)
            ],
        )

    @property
    def topology(self):
        return self._topology

    @property
    def factors(self):
        return self._factors

    @property
    def n_factors(self):
        return self._topology.n_factors

    @property
    def mode_sizes(self):
        return self._topology.mode_sizes

    @property
    def ranks(self):
        return self._topology.ranks

    @property
    def storage_cost(self):
        return storage_cost(self)

    def __getitem__(self, n):
        return self._factors[n]

    def __iter__(self):
        return iter(self._factors)

    def __len__(self):
        return len(self._factors)

    def replace(self, n, factor):
        factors = list(self._factors)
        factors[n] = factor
        return FactorSet(self._topology, factors)

    def scaled(self, factor):
        """Multiply every core by `factor`, scaling the network by `factor ** N`."""
        return FactorSet(self._topology, [factor * f for f in self._factors])

    def collapse_edge(self, i, j):
        """
        Reduce edge `(i, j)` to rank 1 by replacing the rank mode of both
        factors with its mean slice.
        """
        factors = list(self._factors)
        for n, m in ((i, j), (j, i)):
            axis = self._topology.rank_axis(n, m)
            factors[n] = factors[n].mean(axis=axis, keepdims=True)
        return FactorSet(self._topology.with_rank(i, j, 1), factors)

    def grow_edge(self, i, j, step=1, rng=None, scale=1e-2):
        """
        Increase the rank of edge `(i, j)` by `step`.

        Both factors are padded with `step` new slices along the edge, filled
        with normal noise at `scale` times the RMS of the existing entries.
        """
        rng = np.random.default_rng(rng)
        factors = list(self._factors)
        for n, m in ((i, j), (j, i)):
            factor = factors[n]
            axis = self._topology.rank_axis(n, m)
            rms = float(np.sqrt(np.mean(factor**2))) or 1.0
            pad_shape = list(factor.shape)
            pad_shape[axis] = step
            padding = scale * rms * rng.standard_normal(pad_shape)
            factors[n] = np.concatenate([factor, padding], axis=axis)
        return FactorSet(
            self._topology.with_rank(i, j, self._topology.rank(i, j) + step), factors
        )

    def __repr__(self):
        return "<FactorSet mode_sizes={} edge_ranks={}{}>".format(
            self.mode_sizes,
            self._topology.edge_ranks(),
            " (disconnected)" if self.disconnected else "",
        )


def storage_cost(factors):
    """
    Total number of stored entries.

    Args:
        factors (FactorSet, iterable): A factor set, or any collection of
            arrays (for example a Tucker core and its factor matrices).

    Returns:
        int: The summed element counts; singleton modes count as 1.
    """
    total = sum(int(np.prod(np.shape(f))) for f in factors)
    if total == 0:
        logging.warning("Computed a storage cost of zero; were any factors passed?")
    return total
