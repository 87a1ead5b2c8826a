"""Binary checkpoint format for trained networks.

Layout (all integers little-endian):

    magic   4 bytes  b"SPKL"
    u32     version (currently 1)
    u32     input_side
    u32     class_count
    u32     tensor_count
    tensor_count times:
        u16  name length, then UTF-8 name
        u8   rank
        u32  dims[rank]
        f32  data, row-major
    u32     metadata JSON length, then UTF-8 JSON

The metadata JSON always carries class_names, laser, seed and epoch;
training adds its full configuration. Weights are stored as float32, so
save/load round-trips are bit-exact for float32 networks.
"""

import json
import struct

import numpy as np

from .errors import (CorruptCheckpointError, NotACheckpointError,
                     ShapeError, TruncatedCheckpointError,
                     UnsupportedVersionError)
from .model import TENSOR_NAMES, NetworkParams, layer_shapes

MAGIC = b"SPKL"
VERSION = 1


def save_checkpoint(params, metadata, path):
    """Write params and a JSON-serializable metadata dict to `path`."""
    parts = [MAGIC,
             struct.pack("<IIII", VERSION, params.input_side,
                         params.class_count, len(TENSOR_NAMES))]
    for name in TENSOR_NAMES:
        tensor = np.ascontiguousarray(params.tensors[name],
                                      dtype=np.float32)
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", tensor.ndim))
        parts.append(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        parts.append(tensor.tobytes())
    blob = json.dumps(metadata, sort_keys=True).encode("utf-8")
    parts.append(struct.pack("<I", len(blob)))
    parts.append(blob)
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0
        self.context = "header"

    def take(self, n):
        if self.pos + n > len(self.data):
            raise TruncatedCheckpointError(
                f"checkpoint truncated while reading {self.context}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_checkpoint(path):
    """Read a checkpoint; returns (NetworkParams, metadata dict)."""
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data)

    if r.take(len(MAGIC)) != MAGIC:
        raise NotACheckpointError(f"{path}: not a checkpoint (bad magic)")
    version, input_side, class_count, tensor_count = r.unpack("<IIII")
    if version != VERSION:
        raise UnsupportedVersionError(
            f"{path}: checkpoint version {version} not supported "
            f"(expected {VERSION})")

    tensors = {}
    for i in range(tensor_count):
        r.context = f"name of tensor {i}"
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode("utf-8")
        r.context = f"tensor '{name}'"
        (rank,) = r.unpack("<B")
        dims = r.unpack(f"<{rank}I")
        count = int(np.prod(dims, dtype=np.int64)) if rank else 1
        raw = r.take(4 * count)
        tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(dims).copy()

    r.context = "metadata"
    (json_len,) = r.unpack("<I")
    metadata = json.loads(r.take(json_len).decode("utf-8"))

    if set(tensors) != set(TENSOR_NAMES):
        raise CorruptCheckpointError(
            f"{path}: tensor names {sorted(tensors)} do not match the "
            f"expected network layout")
    try:
        expected = layer_shapes(input_side, class_count)
    except ShapeError as exc:
        raise CorruptCheckpointError(
            f"{path}: header input_side={input_side} is not a valid "
            f"network size ({exc})") from None
    for name in TENSOR_NAMES:
        if tensors[name].shape != expected[name]:
            raise CorruptCheckpointError(
                f"{path}: tensor '{name}' has shape {tensors[name].shape} "
                f"but input_side={input_side}, class_count={class_count} "
                f"require {expected[name]}")

    params = NetworkParams(input_side=input_side, class_count=class_count,
                           tensors={n: tensors[n] for n in TENSOR_NAMES})
    return params, metadata
