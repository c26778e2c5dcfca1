import logging

import numpy as np
from scipy.linalg import eigh
from sklearn.cluster import KMeans
from sklearn.preprocessing import normalize

from attnet.errors import ShapeError

__all__ = ["spectral_cluster", "spectral_embedding"]

DEGREE_FLOOR = 1e-12


def spectral_embedding(affinity, k):
    """
    Row-normalized eigenvectors of the `k` smallest eigenvalues of
    `L = I - D^{-1/2} M D^{-1/2}`.
    """
    m = np.asarray(affinity, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError("The affinity matrix must be square; got shape {}.".format(m.shape))
    if not np.allclose(m, m.T):
        raise ValueError("The affinity matrix must be symmetric.")
    if np.any(m < 0):
        raise ValueError("The affinity matrix must be nonnegative.")
    if not 1 <= k <= m.shape[0]:
        raise ValueError("Cannot embed {} samples into {} clusters.".format(m.shape[0], k))

    degree = m.sum(axis=1)
    isolated = degree <= 0
    if np.any(isolated):
        logging.warning(
            "{} vertices have zero degree; flooring their degree at {}.".format(
                int(isolated.sum()), DEGREE_FLOOR
            )
        )
        degree = np.maximum(degree, DEGREE_FLOOR)
    scale = 1.0 / np.sqrt(degree)
    laplacian = np.eye(m.shape[0]) - scale[:, None] * m * scale[None, :]
    _, vectors = eigh(laplacian, subset_by_index=[0, k - 1])
    return normalize(vectors, norm="l2", axis=1)


def spectral_cluster(affinity, k, seed=0, n_init=20, max_iter=300):
    """
    Normalized spectral clustering (symmetric Laplacian, row-normalized
    embedding) followed by k-means with k-means++ seeding.

    Args:
        affinity (array): Symmetric nonnegative `I x I` affinity matrix.
        k (int): Number of clusters.
        seed (int): Seed of the k-means restarts.
        n_init (int): Number of k-means restarts; the lowest inertia wins.
        max_iter (int): Lloyd iterations per restart.

    Returns:
        numpy.ndarray: Integer labels in `[0, k)`.
    """
    k = int(k)
    n = np.shape(affinity)[0]
    if k == 1:
        return np.zeros(n, dtype=np.int64)
    embedding = spectral_embedding(affinity, k)
    kmeans = KMeans(
        n_clusters=k, init="k-means++", n_init=n_init, max_iter=max_iter, random_state=seed
    )
    return kmeans.fit_predict(embedding).astype(np.int64)
