import itertools

import numpy as np
from scipy.sparse.csgraph import connected_components

from attnet.errors import ShapeError

__all__ = ["TopologyGraph"]


class TopologyGraph(object):
    """
    The edge-rank matrix of a tensor network with one factor per mode.

    `ranks[i, j] == ranks[j, i]` is the dimension of the index shared by
    factors `i` and `j`; a rank of 1 means the edge is absent. The diagonal
    is unused and held at zero. Factor and edge indices are zero-based, and
    edges are always reported as `(i, j)` pairs with `i < j` in lexicographic
    order.

    Instances are immutable; methods such as `with_rank` return new
    topologies.
    """

    def __init__(self, ranks, mode_sizes):
        ranks = np.array(ranks, dtype=np.int64)
        mode_sizes = tuple(int(s) for s in mode_sizes)
        n = len(mode_sizes)

        if n < 2:
            raise ShapeError("A tensor network needs at least two factors.")
        if any(s < 1 for s in mode_sizes):
            raise ShapeError("Mode sizes must be positive; got {}.".format(mode_sizes))
        if ranks.shape != (n, n):
            raise ShapeError(
                "Rank matrix must be {0}x{0} for {0} factors; got shape {1}.".format(
                    n, ranks.shape
                )
            )
        np.fill_diagonal(ranks, 0)
        if not np.array_equal(ranks, ranks.T):
            raise ShapeError("Rank matrix must be symmetric.")
        if np.any(ranks + np.eye(n, dtype=np.int64) < 1):
            raise ShapeError("Edge ranks must be at least 1.")

        ranks.setflags(write=False)
        self._ranks = ranks
        self._mode_sizes = mode_sizes

    # Constructors for the standard topologies

    @classmethod
    def uniform(cls, mode_sizes, rank):
        n = len(mode_sizes)
        return cls(np.full((n, n), int(rank)), mode_sizes)

    @classmethod
    def from_edge_ranks(cls, mode_sizes, edge_ranks):
        """
        Build a topology from per-edge ranks.

        Args:
            mode_sizes (tuple): The physical dimension of each factor.
            edge_ranks (dict, list): Either a mapping from `(i, j)` edges to
                ranks (absent edges have rank 1) or a sequence of ranks for
                every edge in lexicographic order.
        """
        n = len(mode_sizes)
        ranks = np.ones((n, n), dtype=np.int64)
        if isinstance(edge_ranks, dict):
            items = edge_ranks.items()
        else:
            edge_ranks = list(edge_ranks)
            edges = list(itertools.combinations(range(n), 2))
            if len(edge_ranks) != len(edges):
                raise ShapeError(
                    "Expected {} edge ranks for {} factors, got {}.".format(
                        len(edges), n, len(edge_ranks)
                    )
                )
            items = zip(edges, edge_ranks)
        for (i, j), rank in items:
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ShapeError("Invalid edge ({}, {}).".format(i, j))
            ranks[i, j] = ranks[j, i] = rank
        return cls(ranks, mode_sizes)

    @classmethod
    def chain(cls, mode_sizes, ranks):
        """Tensor-train topology: edge `(n, n + 1)` carries `ranks[n]`."""
        ranks = list(ranks)
        if len(ranks) != len(mode_sizes) - 1:
            raise ShapeError(
                "A chain over {} factors needs {} ranks, got {}.".format(
                    len(mode_sizes), len(mode_sizes) - 1, len(ranks)
                )
            )
        return cls.from_edge_ranks(
            mode_sizes, {(n, n + 1): r for n, r in enumerate(ranks)}
        )

    @classmethod
    def ring(cls, mode_sizes, ranks):
        """
        Tensor-ring topology: edge `(n, n + 1)` carries `ranks[n]` and the
        closing edge `(0, N - 1)` carries `ranks[N - 1]`.
        """
        n = len(mode_sizes)
        ranks = list(ranks)
        if n < 3:
            raise ShapeError("A ring needs at least three factors.")
        if len(ranks) != n:
            raise ShapeError(
                "A ring over {} factors needs {} ranks, got {}.".format(n, n, len(ranks))
            )
        edges = {(k, k + 1): r for k, r in enumerate(ranks[:-1])}
        edges[(0, n - 1)] = ranks[-1]
        return cls.from_edge_ranks(mode_sizes, edges)

    # Accessors

    @property
    def n_factors(self):
        return len(self._mode_sizes)

    @property
    def mode_sizes(self):
        return self._mode_sizes

    @property
    def ranks(self):
        return self._ranks

    @property
    def n_edges(self):
        n = self.n_factors
        return n * (n - 1) // 2

    @property
    def edges(self):
        return list(itertools.combinations(range(self.n_factors), 2))

    @property
    def active_edges(self):
        """Edges with rank greater than one."""
        return [(i, j) for i, j in self.edges if self._ranks[i, j] > 1]

    def rank(self, i, j):
        return int(self._ranks[i, j])

    def edge_index(self, i, j):
        """Position of edge `(i, j)` in the lexicographic edge enumeration."""
        i, j = min(i, j), max(i, j)
        n = self.n_factors
        return i * (2 * n - i - 1) // 2 + (j - i - 1)

    def edge_ranks(self):
        return [self.rank(i, j) for i, j in self.edges]

    def factor_shape(self, n):
        """
        Shape of factor `n`: its physical dimension followed by the ranks of
        its edges to every other factor, in ascending partner order.
        """
        return (self._mode_sizes[n],) + tuple(
            int(self._ranks[n, m]) for m in range(self.n_factors) if m != n
        )

    def rank_axis(self, n, m):
        """Axis of factor `n` that carries the edge to factor `m`."""
        if n == m:
            raise ValueError("A factor has no edge to itself.")
        return 1 + (m if m < n else m - 1)

    def with_rank(self, i, j, rank):
        ranks = np.array(self._ranks)
        ranks[i, j] = ranks[j, i] = rank
        return self.__class__(ranks, self._mode_sizes)

    @property
    def n_components(self):
        adjacency = (self._ranks > 1).astype(np.int8)
        n, _ = connected_components(adjacency, directed=False)
        return int(n)

    @property
    def is_connected(self):
        return self.n_components == 1

    # Serialization

    def to_dict(self):
        return {
            "n_factors": self.n_factors,
            "mode_sizes": list(self._mode_sizes),
            "ranks": self._ranks.tolist(),
        }

    @classmethod
    def from_dict(cls, dct):
        topology = cls(dct["ranks"], dct["mode_sizes"])
        if "n_factors" in dct and int(dct["n_factors"]) != topology.n_factors:
            raise ShapeError(
                "Declared factor count {} does not match the rank matrix.".format(
                    dct["n_factors"]
                )
            )
        return topology

    def __eq__(self, other):
        return (
            isinstance(other, TopologyGraph)
            and self._mode_sizes == other._mode_sizes
            and np.array_equal(self._ranks, other._ranks)
        )

    def __hash__(self):
        return hash((self._mode_sizes, self._ranks.tobytes()))

    def __repr__(self):
        return "TopologyGraph(mode_sizes={}, edge_ranks={})".format(
            self._mode_sizes, self.edge_ranks()
        )
