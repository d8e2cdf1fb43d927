"""Weight file IO: a binary tensor list with a version header and a
layer-shape manifest. Snapshots reload bit-exactly."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .network import DenseNet

FORMAT_VERSION = 1


def save_net(net: DenseNet, path: str | Path, meta: dict | None = None) -> None:
    manifest = {
        "format_version": FORMAT_VERSION,
        "layer_sizes": net.layer_sizes,
        "meta": meta or {},
    }
    arrays = {"__manifest__": np.frombuffer(json.dumps(manifest).encode(), dtype=np.uint8)}
    for i, w in enumerate(net.weights):
        arrays[f"w{i}"] = w
    for i, b in enumerate(net.biases):
        arrays[f"b{i}"] = b
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_net(path: str | Path) -> tuple[DenseNet, dict]:
    with np.load(path) as data:
        manifest = json.loads(bytes(data["__manifest__"]).decode())
        if manifest["format_version"] != FORMAT_VERSION:
            raise ValueError(
                f"unsupported weight file version {manifest['format_version']}"
            )
        net = DenseNet(manifest["layer_sizes"], seed=0)
        net.weights = [data[f"w{i}"].copy() for i in range(len(net.weights))]
        net.biases = [data[f"b{i}"].copy() for i in range(len(net.biases))]
    return net, manifest.get("meta", {})
