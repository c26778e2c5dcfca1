import re

import numpy as np

from attnet.errors import TensorFormatError
from attnet.tensor import decode_tensor, DenseTensor, MAGIC, reshape

__all__ = ["load_image_tensor", "read_ppm", "write_ppm"]

_PPM_HEADER = re.compile(rb"\AP6(?:\s+|#[^\n]*\n)*?(\d+)(?:\s+|#[^\n]*\n)+?(\d+)(?:\s+|#[^\n]*\n)+?(\d+)\s")


def read_ppm(buf):
    """
    Decode a binary (P6) PPM image with at most 8 bits per channel.

    Returns:
        numpy.ndarray: `(height, width, 3)` values scaled to `[0, 1]`.
    """
    match = _PPM_HEADER.match(buf)
    if not match:
        raise TensorFormatError("Not a binary (P6) PPM image.")
    width, height, maxval = (int(g) for g in match.groups())
    if not 0 < maxval < 256:
        raise TensorFormatError(
            "Only 8-bit PPM images are supported; maxval is {}.".format(maxval)
        )
    pixels = np.frombuffer(buf, dtype=np.uint8, offset=match.end())
    if pixels.size < width * height * 3:
        raise TensorFormatError(
            "PPM image of {}x{} is truncated ({} of {} bytes).".format(
                width, height, pixels.size, width * height * 3
            )
        )
    pixels = pixels[: width * height * 3].reshape(height, width, 3)
    return pixels.astype(np.float64) / maxval


def write_ppm(path, pixels):
    """Write a `(height, width, 3)` array of 8-bit values as a binary PPM."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError("Expected a (height, width, 3) array; got shape {}.".format(pixels.shape))
    height, width, _ = pixels.shape
    with open(path, "wb") as f:
        f.write("P6\n{} {}\n255\n".format(width, height).encode("ascii"))
        f.write(np.clip(pixels, 0, 255).astype(np.uint8).tobytes())


def load_image_tensor(path, reshape_to=None):
    """
    Load an image or raw tensor file as a tensor.

    PPM images become `(height, width, 3)` tensors scaled to `[0, 1]`; raw
    tensor files are returned with their stored values. When `reshape_to`
    is given the result is reshaped (column-major), for example a 256x256
    RGB image into `(16, 16, 16, 16, 3)`.
    """
    with open(path, "rb") as f:
        buf = f.read()
    if buf[:4] == MAGIC:
        tensor = decode_tensor(buf)
    elif buf[:2] == b"P6":
        tensor = DenseTensor(read_ppm(buf))
    else:
        raise TensorFormatError(
            "Unsupported file format for '{}'; expected a raw tensor or a P6 PPM image.".format(path)
        )
    if reshape_to is not None:
        tensor = reshape(tensor, reshape_to)
    return tensor
