"""Seeded generators of planted problems."""
import numpy as np

from attnet.network import contract_network, FactorSet, TopologyGraph

from .datasets import MultiViewDataset

__all__ = ["gen_planted_network", "gen_smooth_image", "gen_synthetic_multiview"]


def gen_synthetic_multiview(
    k, per_cluster, views, subspace_dim, noise_sigma, seed=0, feature_dim=None
):
    """
    Samples drawn from `k` random linear subspaces per view.

    For every view and cluster a random orthonormal basis of `subspace_dim`
    columns is drawn, and the cluster's samples are `basis @ coefficients`
    with standard normal coefficients, plus Gaussian noise of standard
    deviation `noise_sigma`. Samples are ordered by cluster.

    Args:
        k (int): Number of clusters.
        per_cluster (int): Samples per cluster.
        views (int): Number of views.
        subspace_dim (int): Dimension of every subspace.
        noise_sigma (float): Noise level.
        seed (int): Seed of every draw.
        feature_dim (int): Features per view; defaults to
            `2 * k * subspace_dim`.

    Returns:
        MultiViewDataset: With labels `0..k-1`.
    """
    k, per_cluster, views, subspace_dim = int(k), int(per_cluster), int(views), int(subspace_dim)
    if min(k, per_cluster, views, subspace_dim) < 1:
        raise ValueError("All sizes must be positive.")
    if noise_sigma < 0:
        raise ValueError("The noise level must be nonnegative.")
    feature_dim = 2 * k * subspace_dim if feature_dim is None else int(feature_dim)
    if subspace_dim > feature_dim:
        raise ValueError(
            "Subspaces of dimension {} do not fit in {} features.".format(
                subspace_dim, feature_dim
            )
        )

    rng = np.random.default_rng(seed)
    matrices = []
    for _ in range(views):
        blocks = []
        for _ in range(k):
            basis, _ = np.linalg.qr(rng.standard_normal((feature_dim, subspace_dim)))
            blocks.append(basis @ rng.standard_normal((subspace_dim, per_cluster)))
        data = np.hstack(blocks)
        if noise_sigma > 0:
            data = data + noise_sigma * rng.standard_normal(data.shape)
        matrices.append(data)
    labels = np.repeat(np.arange(k), per_cluster)
    return MultiViewDataset(matrices, k, labels=labels, name="synthetic")


def gen_planted_network(mode_sizes, rank_matrix, seed=0):
    """
    A random tensor network and the tensor it contracts to.

    Args:
        mode_sizes (tuple): The physical dimensions.
        rank_matrix (array, TopologyGraph): The symmetric edge-rank matrix.
        seed (int): Seed of the standard normal factor entries.

    Returns:
        tuple: `(DenseTensor, FactorSet)`.
    """
    topology = (
        rank_matrix
        if isinstance(rank_matrix, TopologyGraph)
        else TopologyGraph(rank_matrix, mode_sizes)
    )
    factors = FactorSet.random(topology, np.random.default_rng(seed))
    return contract_network(factors), factors


def gen_smooth_image(height, width, channels=3, components=8, max_frequency=4, seed=0):
    """
    A synthetic image built from low-frequency 2D cosines.

    Every component is a separable cosine pattern with integer frequencies
    up to `max_frequency` along each axis and random phases. Its amplitude
    falls off with frequency, and the channels mix the components with
    correlated random weights. Values are scaled to `[0, 1]`.

    Returns:
        numpy.ndarray: The `height x width x channels` pixel array.
    """
    height, width, channels = int(height), int(width), int(channels)
    if min(height, width, channels, int(components)) < 1:
        raise ValueError("All sizes must be positive.")
    if max_frequency < 0:
        raise ValueError("The maximum frequency must be nonnegative.")

    rng = np.random.default_rng(seed)
    rows = np.arange(height)[:, None] / height
    cols = np.arange(width)[None, :] / width
    image = np.zeros((height, width, channels))
    for _ in range(int(components)):
        fy, fx = rng.integers(0, max_frequency + 1, size=2)
        py, px = rng.uniform(0, 2 * np.pi, size=2)
        pattern = np.cos(2 * np.pi * fy * rows + py) * np.cos(2 * np.pi * fx * cols + px)
        weights = rng.uniform(0.5, 1.0) * (1 + 0.3 * rng.standard_normal(channels))
        image += pattern[:, :, None] * weights / (1 + fy + fx)

    image -= image.min()
    span = image.max()
    return image / span if span > 0 else image
