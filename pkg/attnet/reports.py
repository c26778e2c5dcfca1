"""
JSON reports and run manifests.

Reports are serialized with sorted keys and a `schema_version`; wall-clock
timings are kept under a separate `timings` key so that reruns with the same
inputs and seeds produce identical documents apart from that key.
"""
import contextlib
import hashlib
import json
import os
import time
from collections import OrderedDict

import numpy as np

__all__ = ["SCHEMA_VERSION", "RunManifest", "dumps", "path_sha256", "write_report"]

SCHEMA_VERSION = 1


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in obj]
        return sorted(items) if isinstance(obj, (set, frozenset)) else items
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    return obj


def dumps(payload):
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2)


def write_report(path, payload, timings=None):
    """Write `payload` as a versioned JSON report, with `timings` kept apart."""
    document = dict(payload)
    document["schema_version"] = SCHEMA_VERSION
    if timings is not None:
        document["timings"] = timings
    with open(path, "w") as f:
        f.write(dumps(document))
        f.write("\n")
    return path


def path_sha256(path):
    """SHA-256 of a file, or of every file (and relative name) below a directory."""
    digest = hashlib.sha256()
    if os.path.isdir(path):
        for root, dirs, files in os.walk(path):
            dirs.sort()
            for name in sorted(files):
                full = os.path.join(root, name)
                digest.update(os.path.relpath(full, path).encode("utf-8"))
                with open(full, "rb") as f:
                    digest.update(f.read())
    else:
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(1 << 20), b""):
                digest.update(chunk)
    return digest.hexdigest()


class RunManifest(object):
    """
    Provenance of one command-line run: the command echo, the effective
    configuration, seeds, input hashes, the outputs written and stage
    timings.
    """

    FILENAME = "run_manifest.json"

    def __init__(self, command, config=None, seeds=None):
        self.command = list(command)
        self.config = config or {}
        self.seeds = list(seeds or [])
        self.inputs = OrderedDict()
        self.outputs = []
        self.timings = OrderedDict()

    def add_input(self, path):
        self.inputs[path] = path_sha256(path)
        return self

    def add_output(self, path):
        if path not in self.outputs:
            self.outputs.append(path)
        return path

    @contextlib.contextmanager
    def timed(self, stage):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[stage] = self.timings.get(stage, 0.0) + time.perf_counter() - start

    def to_dict(self):
        return {
            "command": self.command,
            "config": self.config,
            "seeds": self.seeds,
            "inputs": dict(self.inputs),
            "outputs": sorted(self.outputs),
        }

    def write(self, directory):
        path = os.path.join(directory, self.FILENAME)
        return write_report(path, self.to_dict(), timings=dict(self.timings))
