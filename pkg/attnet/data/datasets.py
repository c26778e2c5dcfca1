"""
Multi-view dataset containers.

A dataset directory holds a `manifest.json`::

    {
        "name": "yale",
        "k": 15,
        "I": 165,
        "V": 3,
        "views": [{"file": "view_0.bin", "rows": 4096, "cols": 165, "encoding": "f64le"}, ...]
    }

one file per view (see `ViewEncoding`) and, optionally, `labels.txt` with
one integer label per line.
"""
import json
import os

import numpy as np

from attnet.errors import (
    DatasetError,
    LabelRangeError,
    ManifestError,
    ShapeInconsistencyError,
)

from .encodings import ViewEncoding

__all__ = ["MultiViewDataset", "load_dataset", "save_dataset", "read_labels", "write_labels"]

MANIFEST = "manifest.json"
LABELS = "labels.txt"


class MultiViewDataset(object):
    """
    Feature matrices of `V` views over the same `I` samples.

    Args:
        views (list): Matrices of shape `(C_v, I)`, one column per sample.
        k (int): Number of clusters.
        labels (array): Optional ground-truth labels in `[0, k)`.
        name (str): A display name.
    """

    def __init__(self, views, k, labels=None, name="dataset"):
        views = tuple(np.array(v, dtype=np.float64) for v in views)
        if not views:
            raise ShapeInconsistencyError("A dataset needs at least one view.")
        for v, view in enumerate(views):
            if view.ndim != 2:
                raise ShapeInconsistencyError(
                    "View {} is not a matrix (shape {}).".format(v, view.shape)
                )
        n_samples = views[0].shape[1]
        if any(view.shape[1] != n_samples for view in views):
            raise ShapeInconsistencyError(
                "Views disagree on the number of samples: {}.".format(
                    [view.shape[1] for view in views]
                )
            )
        k = int(k)
        if k < 1:
            raise ManifestError("The number of clusters must be positive; got {}.".format(k))
        if labels is not None:
            labels = np.asarray(labels)
            if labels.ndim != 1 or labels.size != n_samples:
                raise ShapeInconsistencyError(
                    "Expected {} labels, got {}.".format(n_samples, labels.size)
                )
            if not np.issubdtype(labels.dtype, np.integer):
                raise LabelRangeError("Labels must be integers.")
            if labels.size and (labels.min() < 0 or labels.max() >= k):
                raise LabelRangeError(
                    "Labels must lie in [0, {}); found range [{}, {}].".format(
                        k, labels.min(), labels.max()
                    )
                )
            labels = labels.astype(np.int64)
        self.views = views
        self.k = k
        self.labels = labels
        self.name = name

    @property
    def n_samples(self):
        return self.views[0].shape[1]

    @property
    def n_views(self):
        return len(self.views)

    def to_problem(self, reshape_dims=None):
        from attnet.clustering import MscProblem

        return MscProblem(self.views, self.k, reshape_dims=reshape_dims)

    def __repr__(self):
        return "<MultiViewDataset '{}': I={}, V={}, k={}>".format(
            self.name, self.n_samples, self.n_views, self.k
        )


def read_labels(path):
    try:
        with open(path) as f:
            return np.array([int(line) for line in f if line.strip()], dtype=np.int64)
    except ValueError as e:
        raise LabelRangeError("Cannot parse labels in '{}': {}".format(path, e))


def write_labels(path, labels):
    with open(path, "w") as f:
        f.writelines("{}\n".format(int(label)) for label in labels)


def _manifest_field(manifest, key, kind=int):
    try:
        return kind(manifest[key])
    except KeyError:
        raise ManifestError("Manifest is missing the field '{}'.".format(key))
    except (TypeError, ValueError):
        raise ManifestError("Manifest field '{}' is invalid: {!r}.".format(key, manifest[key]))


def load_dataset(path):
    """
    Load and validate a dataset directory.

    Raises:
        ManifestError: The manifest is missing, unparsable or incomplete.
        ShapeInconsistencyError: View files disagree with the manifest or
            with each other.
        LabelRangeError: Labels fall outside `[0, k)`.
    """
    manifest_path = os.path.join(path, MANIFEST)
    try:
        with open(manifest_path) as f:
            manifest = json.load(f)
    except OSError as e:
        raise ManifestError("Cannot read '{}': {}".format(manifest_path, e))
    except ValueError as e:
        raise ManifestError("Cannot parse '{}': {}".format(manifest_path, e))
    if not isinstance(manifest, dict):
        raise ManifestError("The manifest must be a JSON object.")

    k = _manifest_field(manifest, "k")
    n_samples = _manifest_field(manifest, "I")
    views_spec = manifest.get("views")
    if not isinstance(views_spec, list) or not views_spec:
        raise ManifestError("Manifest field 'views' must be a non-empty list.")
    if "V" in manifest and _manifest_field(manifest, "V") != len(views_spec):
        raise ManifestError(
            "Manifest declares V={} but lists {} views.".format(manifest["V"], len(views_spec))
        )

    views = []
    for v, spec in enumerate(views_spec):
        if not isinstance(spec, dict):
            raise ManifestError("View entry {} must be a JSON object.".format(v))
        rows = _manifest_field(spec, "rows")
        cols = _manifest_field(spec, "cols")
        filename = _manifest_field(spec, "file", str)
        if cols != n_samples:
            raise ShapeInconsistencyError(
                "View {} has {} columns but the manifest declares I={}.".format(
                    v, cols, n_samples
                )
            )
        try:
            encoding = ViewEncoding.for_kind(spec.get("encoding", "f64le"))()
        except KeyError as e:
            raise ManifestError(str(e))
        try:
            views.append(encoding.read(os.path.join(path, filename), rows, cols))
        except DatasetError:
            raise
        except (OSError, ValueError) as e:
            raise ManifestError("Cannot read view {} from '{}': {}".format(v, filename, e))

    labels_path = os.path.join(path, LABELS)
    labels = read_labels(labels_path) if os.path.exists(labels_path) else None
    return MultiViewDataset(views, k, labels=labels, name=manifest.get("name", os.path.basename(path)))


def save_dataset(dataset, path, encoding="f64le"):
    """Write `dataset` to the directory `path` in the manifest layout."""
    os.makedirs(path, exist_ok=True)
    codec = ViewEncoding.for_kind(encoding)()
    views = []
    for v, view in enumerate(dataset.views):
        filename = "view_{}.{}".format(v, codec.EXTENSION)
        codec.write(os.path.join(path, filename), view)
        views.append({"file": filename, "rows": view.shape[0], "cols": view.shape[1], "encoding": encoding})
    manifest = {
        "name": dataset.name,
        "k": dataset.k,
        "I": dataset.n_samples,
        "V": dataset.n_views,
        "views": views,
    }
    with open(os.path.join(path, MANIFEST), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    if dataset.labels is not None:
        write_labels(os.path.join(path, LABELS), dataset.labels)
    return path
