"""Resumable checkpoint files.

Layout: one JSON header line (model config, epoch/update counters, RNG
states, tensor directory), a newline, then the raw little-endian tensor
bytes in directory order. Tensors cover parameters, normalization
buffers, and (when training state is saved) the optimizer velocity, so a
run can continue exactly where it stopped.
"""

import json
from pathlib import Path

import numpy as np

from ..errors import DataFormatError

MAGIC = "specshift-checkpoint-v1"


def _state_to_json(state):
    if isinstance(state, dict):
        return {k: _state_to_json(v) for k, v in state.items()}
    if isinstance(state, np.ndarray):
        return {"__ndarray__": state.tolist(), "dtype": str(state.dtype)}
    if isinstance(state, (np.integer,)):
        return int(state)
    return state


def _state_from_json(state):
    if isinstance(state, dict):
        if "__ndarray__" in state:
            return np.array(state["__ndarray__"], dtype=state["dtype"])
        return {k: _state_from_json(v) for k, v in state.items()}
    return state


def save_checkpoint(
    net,
    path,
    epoch: int = 0,
    update_count: int = 0,
    velocity: list | None = None,
    rng_states: dict | None = None,
) -> None:
    tensors = []
    blobs = []

    def add(name, kind, arr):
        arr = np.ascontiguousarray(arr)
        le = arr.dtype.newbyteorder("<")
        tensors.append(
            {"name": name, "kind": kind, "shape": list(arr.shape), "dtype": le.str}
        )
        blobs.append(arr.astype(le, copy=False).tobytes())

    for name, arr in net.named_params():
        add(name, "param", arr)
    for name, arr in net.named_buffers():
        add(name, "buffer", arr)
    if velocity is not None:
        for (name, _), v in zip(net.named_params(), velocity):
            add(name, "velocity", v)

    header = {
        "format": MAGIC,
        "model_config": net.config.to_dict(),
        "epoch": epoch,
        "update_count": update_count,
        "rng_states": _state_to_json(rng_states) if rng_states else None,
        "tensors": tensors,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode())
        f.write(b"\n")
        for blob in blobs:
            f.write(blob)


def load_checkpoint(path):
    """Rebuild (net, info); info has epoch, update_count, velocity, rng_states."""
    from .net import ConvNetConfig, Network

    path = Path(path)
    with path.open("rb") as f:
        header_line = f.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as e:
            raise DataFormatError(f"{path}: bad checkpoint header: {e}") from e
        if header.get("format") != MAGIC:
            raise DataFormatError(f"{path}: not a {MAGIC} file")
        arrays = {}
        for entry in header["tensors"]:
            count = int(np.prod(entry["shape"])) if entry["shape"] else 1
            dt = np.dtype(entry["dtype"])
            raw = f.read(count * dt.itemsize)
            if len(raw) != count * dt.itemsize:
                raise DataFormatError(f"{path}: truncated tensor {entry['name']}")
            arrays[(entry["kind"], entry["name"])] = np.frombuffer(raw, dtype=dt).reshape(
                entry["shape"]
            )
        if f.read(1):
            raise DataFormatError(f"{path}: trailing bytes after tensor payload")

    net = Network(ConvNetConfig.from_dict(header["model_config"]))
    for name, arr in net.named_params():
        arr[...] = arrays[("param", name)]
    for name, arr in net.named_buffers():
        arr[...] = arrays[("buffer", name)]
    velocity = None
    if any(kind == "velocity" for kind, _ in arrays):
        velocity = [
            arrays[("velocity", name)].astype(arr.dtype)
            for name, arr in net.named_params()
        ]
    info = {
        "epoch": header["epoch"],
        "update_count": header["update_count"],
        "velocity": velocity,
        "rng_states": _state_from_json(header["rng_states"]),
    }
    return net, info
