"""GGT1 binary tensor container.

Layout: 4 magic bytes ``GGT1``, uint32-LE rank, ``rank`` uint32-LE dims,
then row-major IEEE-754 float32-LE payload. Used for depth grids
(rank 2: H, W) and feature maps (rank 3: H, W, D).
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import CorruptTensor, MagicMismatch, MissingTensorFile

MAGIC = b"GGT1"
_MAX_RANK = 8


def write_tensor(path, array) -> None:
    arr = np.ascontiguousarray(array, dtype="<f4")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.tobytes())


def read_header(path) -> tuple[int, ...]:
    """Tensor dims without reading the payload."""
    path = Path(path)
    if not path.is_file():
        raise MissingTensorFile(str(path))
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise MagicMismatch(f"{path}: expected {MAGIC!r}, got {magic!r}")
        raw = fh.read(4)
        if len(raw) < 4:
            raise CorruptTensor(f"{path}: truncated rank field")
        (rank,) = struct.unpack("<I", raw)
        if not 1 <= rank <= _MAX_RANK:
            raise CorruptTensor(f"{path}: implausible rank {rank}")
        raw = fh.read(4 * rank)
        if len(raw) < 4 * rank:
            raise CorruptTensor(f"{path}: truncated dims field")
        return struct.unpack(f"<{rank}I", raw)


def read_tensor(path, expected_rank: int | None = None) -> np.ndarray:
    path = Path(path)
    dims = read_header(path)
    if expected_rank is not None and len(dims) != expected_rank:
        raise CorruptTensor(f"{path}: expected rank {expected_rank}, got {len(dims)}")
    count = int(np.prod(dims)) if dims else 0
    offset = 4 + 4 + 4 * len(dims)
    data = np.fromfile(path, dtype="<f4", count=count, offset=offset)
    if data.size != count:
        raise CorruptTensor(f"{path}: payload has {data.size} floats, expected {count}")
    return data.reshape(dims)
