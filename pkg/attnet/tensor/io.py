"""
Raw tensor file format.

A file holds the magic bytes ``ATTN``, a little-endian u32 format version,
a u32 order `N`, `N` u64 mode sizes and finally the values as little-endian
IEEE-754 doubles in first-index-fastest order.
"""
import numpy as np

from attnet.errors import TensorFormatError

from .dense import as_array, DenseTensor

__all__ = ["MAGIC", "FORMAT_VERSION", "encode_tensor", "decode_tensor", "read_tensor", "write_tensor"]

MAGIC = b"ATTN"
FORMAT_VERSION = 1


def encode_tensor(t):
    arr = as_array(t)
    return b"".join(
        [
            MAGIC,
            np.array([FORMAT_VERSION, arr.ndim], dtype="<u4").tobytes(),
            np.array(arr.shape, dtype="<u8").tobytes(),
            np.asarray(arr, dtype="<f8").tobytes(order="F"),
        ]
    )


def decode_tensor(buf):
    if len(buf) < 12 or buf[:4] != MAGIC:
        raise TensorFormatError("Not a raw tensor: missing 'ATTN' header.")
    version, order = (int(v) for v in np.frombuffer(buf, dtype="<u4", count=2, offset=4))
    if version != FORMAT_VERSION:
        raise TensorFormatError(
            "Unsupported tensor format version {} (expected {}).".format(
                version, FORMAT_VERSION
            )
        )
    if order < 1 or len(buf) < 12 + 8 * order:
        raise TensorFormatError("Truncated or invalid tensor header (order {}).".format(order))
    shape = tuple(int(s) for s in np.frombuffer(buf, dtype="<u8", count=order, offset=12))
    if any(s < 1 for s in shape):
        raise TensorFormatError("Invalid mode sizes {} in tensor header.".format(shape))
    offset = 12 + 8 * order
    size = int(np.prod(shape))
    if len(buf) - offset != 8 * size:
        raise TensorFormatError(
            "Tensor of shape {} needs {} data bytes, found {}.".format(
                shape, 8 * size, len(buf) - offset
            )
        )
    values = np.frombuffer(buf, dtype="<f8", count=size, offset=offset)
    return DenseTensor.from_flat(values, shape)


def write_tensor(path, t):
    with open(path, "wb") as f:
        f.write(encode_tensor(t))


def read_tensor(path):
    with open(path, "rb") as f:
        return decode_tensor(f.read())
