"""
Contraction of complete and leave-one-out tensor networks.

Every factor's physical mode and every edge gets its own einsum symbol;
`opt_einsum` then plans the pairwise contraction order. Expressions are
cached per (topology, excluded factor, strategy).
"""
import functools

import numpy as np
import opt_einsum as oe

from attnet.errors import ShapeError
from attnet.tensor import DenseTensor

from .factors import FactorSet

__all__ = [
    "STRATEGIES",
    "contract_network",
    "contract_except",
    "contract_except_matrix",
    "sequential_path",
]

STRATEGIES = ("greedy", "sequential")


def sequential_path(n_operands):
    """
    The `opt_einsum` path contracting operands left to right:
    `((0, 1), 2), 3)...`. Intermediates are appended at the end of the
    operand list, so operand `s + 2` sits at position 0 at step `s`.
    """
    if n_operands < 2:
        return [tuple(range(n_operands))]
    return [(0, 1)] + [(0, n_operands - 2 - s) for s in range(n_operands - 2)]


def _subscripts(topology, n):
    symbols = [oe.get_symbol(n)]
    for m in range(topology.n_factors):
        if m != n:
            symbols.append(
                oe.get_symbol(topology.n_factors + topology.edge_index(n, m))
            )
    return "".join(symbols)


@functools.lru_cache(maxsize=256)
def _expression(topology, exclude, strategy):
    n_factors = topology.n_factors
    operands = [n for n in range(n_factors) if n != exclude]
    inputs = ",".join(_subscripts(topology, n) for n in operands)
    if exclude is None:
        output = "".join(oe.get_symbol(n) for n in range(n_factors))
    else:
        output = "".join(
            oe.get_symbol(n_factors + topology.edge_index(exclude, m))
            for m in range(n_factors)
            if m != exclude
        ) + "".join(oe.get_symbol(m) for m in operands)

    if strategy == "sequential":
        optimize = sequential_path(len(operands))
    elif strategy == "greedy":
        optimize = "greedy"
    else:
        raise ValueError(
            "Unknown contraction strategy '{}'; expected one of {}.".format(
                strategy, ", ".join(STRATEGIES)
            )
        )
    shapes = [topology.factor_shape(n) for n in operands]
    return oe.contract_expression("{}->{}".format(inputs, output), *shapes, optimize=optimize)


def _check(f):
    if not isinstance(f, FactorSet):
        raise ShapeError("Expected a `FactorSet`, got `{}`.".format(type(f).__name__))


def contract_network(f, strategy="greedy"):
    """
    Contract all factors of `f` into the full tensor.

    Args:
        f (FactorSet): The tensor network.
        strategy (str): 'greedy' (cheapest intermediate first) or
            'sequential' (factor 0 with 1, then with 2, and so on).

    Returns:
        DenseTensor: A tensor with shape `f.mode_sizes`.
    """
    _check(f)
    return DenseTensor(_expression(f.topology, None, strategy)(*f.factors))


def contract_except(f, n, strategy="greedy"):
    """
    Contract every factor of `f` except factor `n`.

    The dangling modes of the result are, in order: the rank modes that
    connect to factor `n` (ascending partner index), then the physical modes
    of the remaining factors (ascending). The rank modes follow the same
    order as factor `n`'s own rank modes.
    """
    _check(f)
    if not 0 <= n < f.n_factors:
        raise ShapeError(
            "Factor index {} is out of range for {} factors.".format(n, f.n_factors)
        )
    operands = [g for m, g in enumerate(f.factors) if m != n]
    return DenseTensor(_expression(f.topology, n, strategy)(*operands))


def contract_except_matrix(f, n, strategy="greedy"):
    """
    The leave-one-out network matricized so that
    `mode_n_unfold(X, n) ~= mode_n_unfold(G_n, 0) @ A`.

    Returns:
        numpy.ndarray: A matrix with `prod(R[n, m])` rows and
            `prod(I_m for m != n)` columns.
    """
    a = contract_except(f, n, strategy=strategy).data
    rows = int(np.prod(f.topology.factor_shape(n)[1:]))
    return np.reshape(a, (rows, -1), order="F")
