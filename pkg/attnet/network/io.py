import json
import os

from attnet.errors import TensorFormatError
from attnet.tensor import read_tensor, write_tensor

from .factors import FactorSet
from .topology import TopologyGraph

__all__ = ["save_factor_set", "load_factor_set"]

MANIFEST = "manifest.json"


def save_factor_set(f, directory):
    """
    Write `f` to `directory` as a JSON manifest plus one raw tensor file per
    factor.

    Returns:
        str: The path of the manifest.
    """
    os.makedirs(directory, exist_ok=True)
    manifest = dict(f.topology.to_dict())
    manifest["factors"] = []
    for n, factor in enumerate(f.factors):
        name = "factor_{}.attn".format(n)
        write_tensor(os.path.join(directory, name), factor)
        manifest["factors"].append(name)
    path = os.path.join(directory, MANIFEST)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return path


def load_factor_set(directory):
    path = os.path.join(directory, MANIFEST)
    try:
        with open(path) as fh:
            manifest = json.load(fh)
        topology = TopologyGraph.from_dict(manifest)
        names = manifest["factors"]
    except (OSError, ValueError, KeyError) as e:
        raise TensorFormatError("Invalid factor set manifest at '{}': {}".format(path, e))
    return FactorSet(
        topology, [read_tensor(os.path.join(directory, name)).data for name in names]
    )
