"""Base implementation of `Decomposition`."""
import logging
import time
from abc import abstractmethod
from collections import namedtuple

from interface_meta import InterfaceMeta

from attnet.errors import ShapeError
from attnet.network import storage_cost
from attnet.tensor import as_array, rse

__all__ = ["BaselineSpec", "Decomposition", "DecompositionResult", "decompose"]


class BaselineSpec(
    namedtuple("BaselineSpec", ["method", "ranks", "iter_max", "tol", "seed", "options"])
):
    """
    What to fit and how.

    Attributes:
        method (str): A registered decomposition ('tucker', 'tt', 'tr',
            'fctn' or 'attn').
        ranks: A rank vector of the method's arity, a single rank shared by
            every position, or 'full' (Tucker only).
        iter_max (int): Maximum number of iterations (default 300).
        tol (float): Convergence tolerance (default 1e-6).
        seed (int): Seed of the random initialization.
        options (dict): Additional method specific options (for 'attn',
            overrides of `AttnConfig`).
    """

    def __new__(cls, method, ranks=None, iter_max=300, tol=1e-6, seed=0, options=None):
        return super(BaselineSpec, cls).__new__(
            cls, method, ranks, int(iter_max), float(tol), int(seed), dict(options or {})
        )

    def expand_ranks(self, arity):
        """The rank vector for a method with `arity` rank positions."""
        if self.ranks is None:
            raise ValueError("Method '{}' requires ranks.".format(self.method))
        if isinstance(self.ranks, str) and self.ranks == "full":
            raise ValueError("Method '{}' does not support full ranks.".format(self.method))
        if isinstance(self.ranks, (int, float, str)):
            return [int(self.ranks)] * arity
        ranks = [int(r) for r in self.ranks]
        if len(ranks) != arity:
            raise ShapeError(
                "Method '{}' expects {} ranks for this tensor, got {}.".format(
                    self.method, arity, len(ranks)
                )
            )
        if any(r < 1 for r in ranks):
            raise ValueError("Ranks must be positive; got {}.".format(ranks))
        return ranks


DecompositionResult = namedtuple(
    "DecompositionResult",
    [
        "method",
        "reconstruction",
        "rse",
        "storage_cost",
        "iterations",
        "converged",
        "elapsed",
        "factors",
        "components",
        "details",
    ],
)
DecompositionResult.__doc__ = """
A fitted decomposition.

Attributes:
    method (str): The method name.
    reconstruction (numpy.ndarray): The approximated tensor.
    rse (float): RSE of the reconstruction against the input.
    storage_cost (int): Total number of stored entries.
    iterations (int): Iterations (ALS sweeps or HOOI steps) used.
    converged (bool): Whether the stopping criterion was met.
    elapsed (float): Wall time in seconds.
    factors (FactorSet): The network for network-based methods, else None.
    components (tuple): The stored arrays (core and factor matrices for
        Tucker, the network cores otherwise).
    details (dict): Method specific diagnostics.
"""


class Decomposition(metaclass=InterfaceMeta):
    """
    The abstract parent of all decompositions compared by the benchmark
    harness. Implementations register themselves under the names listed in
    `REGISTRY_KEYS`.
    """

    INTERFACE_EXPLICIT_OVERRIDES = False

    REGISTRY_KEYS = None

    @classmethod
    def __register_implementation__(cls):
        if not hasattr(cls, "_registry"):
            cls._registry = {}

        for key in cls.REGISTRY_KEYS or []:
            if key in cls._registry and cls.__name__ != cls._registry[key].__name__:
                logging.info(
                    "Ignoring attempt by class `{}` to register key '{}', which is already registered for class `{}`.".format(
                        cls.__name__, key, cls._registry[key].__name__
                    )
                )
            else:
                cls._registry[key] = cls

    @classmethod
    def for_method(cls, method):
        registry = getattr(cls, "_registry", {})
        if method not in registry:
            raise ValueError(
                "Unknown decomposition method '{}'. Available methods: {}.".format(
                    method, ", ".join(sorted(registry))
                )
            )
        return registry[method]()

    @classmethod
    def methods(cls):
        return sorted(getattr(cls, "_registry", {}))

    @abstractmethod
    def arity(self, order):
        """Number of rank positions for a tensor of the given order."""
        raise NotImplementedError

    @abstractmethod
    def _fit(self, x, spec):
        """
        Fit `x` according to `spec`.

        Returns:
            tuple: `(reconstruction, components, iterations, converged,
                factors, details)`.
        """
        raise NotImplementedError

    def fit(self, x, spec):
        x = as_array(x)
        start = time.perf_counter()
        reconstruction, components, iterations, converged, factors, details = self._fit(
            x, spec
        )
        elapsed = time.perf_counter() - start
        result = DecompositionResult(
            method=spec.method,
            reconstruction=reconstruction,
            rse=rse(reconstruction, x),
            storage_cost=storage_cost(components),
            iterations=iterations,
            converged=converged,
            elapsed=elapsed,
            factors=factors,
            components=tuple(components),
            details=details,
        )
        logging.info(
            "{}: RSE {:.4e}, storage {}, {} iterations, {:.2f}s.".format(
                spec.method, result.rse, result.storage_cost, iterations, elapsed
            )
        )
        return result


def decompose(x, spec):
    """
    Fit `x` with the method named by `spec.method`.

    Returns:
        DecompositionResult
    """
    if isinstance(spec, str):
        spec = BaselineSpec(spec)
    return Decomposition.for_method(spec.method).fit(x, spec)
