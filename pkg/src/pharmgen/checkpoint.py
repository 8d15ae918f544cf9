"""Versioned binary checkpoint container.

Layout: magic "PHDF", little-endian u32 format version, u32 JSON header
length, UTF-8 JSON header, then a float64 little-endian parameter blob.
The header carries hyperparameters, schedule/transition settings, dataset
statistics, and the per-tensor name/shape index into the blob.
"""

import json
import struct

import numpy as np

from . import autodiff as ad
from .denoiser import DenoiserConfig, DenoiserParams
from .errors import CheckpointMismatch

MAGIC = b"PHDF"
FORMAT_VERSION = 1


def save_checkpoint(path, params: DenoiserParams, header_extra: dict):
    names = sorted(params.tensors)
    index = [{"name": nm, "shape": list(params.tensors[nm].shape)} for nm in names]
    header = dict(header_extra)
    header["model"] = params.config.to_dict()
    header["tensors"] = index
    blob = b"".join(np.ascontiguousarray(params.tensors[nm].value, dtype="<f8").tobytes()
                    for nm in names)
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(blob)


def load_checkpoint(path):
    """Returns (DenoiserParams, header dict)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise CheckpointMismatch(f"{path}: bad magic {data[:4]!r}")
    version, header_len = struct.unpack("<II", data[4:12])
    if version != FORMAT_VERSION:
        raise CheckpointMismatch(f"{path}: unsupported format version {version}")
    header = json.loads(data[12:12 + header_len].decode("utf-8"))
    config = DenoiserConfig.from_dict(header["model"])
    tensors = {}
    offset = 12 + header_len
    for rec in header["tensors"]:
        shape = tuple(rec["shape"])
        size = int(np.prod(shape)) if shape else 1
        raw = data[offset:offset + 8 * size]
        if len(raw) != 8 * size:
            raise CheckpointMismatch(f"{path}: truncated parameter blob at {rec['name']}")
        tensors[rec["name"]] = ad.parameter(
            np.frombuffer(raw, dtype="<f8").reshape(shape).copy())
        offset += 8 * size
    return DenoiserParams(config, tensors), header
