"""Binary parameter checkpoints.

Layout: 8-byte magic, little-endian uint32 format version, uint32 length of a
UTF-8 JSON config block, the block itself, then every tensor in declaration
order as little-endian float64 values.
"""

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from .transformer import ModelConfig, ModelParameters, parameter_layout

MAGIC = b"BLNKCKPT"
VERSION = 1


def save_checkpoint(params: ModelParameters, path) -> None:
    block = json.dumps(params.config.to_dict(), sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(block)))
        fh.write(block)
        for name, shape in parameter_layout(params.config):
            w = params.weights[name]
            if w.shape != shape:
                raise CheckpointError(f"tensor {name} has shape {w.shape}, expected {shape}")
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())


def load_checkpoint(path) -> ModelParameters:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    version, n = struct.unpack_from("<II", data, 8)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    offset = 16 + n
    config = ModelConfig(**json.loads(data[16:offset].decode("utf-8")))
    weights = {}
    for name, shape in parameter_layout(config):
        count = int(np.prod(shape))
        end = offset + 8 * count
        if end > len(data):
            raise CheckpointError(f"{path}: truncated at tensor {name}")
        weights[name] = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(shape).astype(np.float64)
        offset = end
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes")
    return ModelParameters(config, weights)
