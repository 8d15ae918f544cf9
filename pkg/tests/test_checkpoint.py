"""Tests for the binary checkpoint container."""
import struct

import numpy as np
import pytest

from pharmgen.checkpoint import FORMAT_VERSION, MAGIC, load_checkpoint, save_checkpoint
from pharmgen.denoiser import DenoiserConfig, init_params
from pharmgen.errors import CheckpointMismatch


def _params():
    return init_params(DenoiserConfig(layers=1, width=16, heads=2, edge_width=8), seed=0)


def test_roundtrip_exact(tmp_path):
    p = _params()
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, p, {"schedule": {"T": 10, "nu": {}}, "note": 1})
    q, header = load_checkpoint(path)
    assert header["note"] == 1
    assert header["model"] == p.config.to_dict()
    assert q.config == p.config
    assert set(q.tensors) == set(p.tensors)
    for k in p.tensors:
        assert np.array_equal(q.tensors[k].value, p.tensors[k].value)


def test_magic_and_version_checked(tmp_path):
    p = _params()
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, p, {})
    data = bytearray(path.read_bytes())

    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"XXXX" + bytes(data[4:]))
    with pytest.raises(CheckpointMismatch):
        load_checkpoint(bad)

    data[4:8] = struct.pack("<I", FORMAT_VERSION + 1)
    bad.write_bytes(bytes(data))
    with pytest.raises(CheckpointMismatch):
        load_checkpoint(bad)


def test_truncated_blob_detected(tmp_path):
    p = _params()
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, p, {})
    data = path.read_bytes()
    bad = tmp_path / "cut.ckpt"
    bad.write_bytes(data[:-16])
    with pytest.raises(CheckpointMismatch):
        load_checkpoint(bad)


def test_file_starts_with_magic(tmp_path):
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, _params(), {})
    assert path.read_bytes()[:4] == MAGIC
