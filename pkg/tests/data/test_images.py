import numpy as np
import pytest

from attnet.data import load_image_tensor, read_ppm, write_ppm
from attnet.errors import ShapeError, TensorFormatError
from attnet.tensor import DenseTensor, write_tensor


def test_ppm_reshape(tmp_path, rng):
    pixels = rng.integers(0, 256, size=(256, 256, 3))
    path = str(tmp_path / "image.ppm")
    write_ppm(path, pixels)
    tensor = load_image_tensor(path, reshape_to=(16, 16, 16, 16, 3))
    assert tensor.shape == (16, 16, 16, 16, 3)
    assert tensor.size == 196608
    np.testing.assert_allclose(
        np.reshape(tensor.data, (256, 256, 3), order="F"), pixels / 255.0
    )


def test_black_image(tmp_path):
    path = str(tmp_path / "black.ppm")
    write_ppm(path, np.zeros((4, 6, 3)))
    tensor = load_image_tensor(path)
    assert tensor.shape == (4, 6, 3)
    assert not np.any(tensor.data)


def test_header_comments_and_maxval():
    buf = b"P6\n# a comment\n2 1\n# another\n15\n" + bytes([15, 0, 5, 0, 15, 3])
    pixels = read_ppm(buf)
    assert pixels.shape == (1, 2, 3)
    np.testing.assert_allclose(pixels[0, 0], [1.0, 0.0, 1 / 3])
    np.testing.assert_allclose(pixels[0, 1], [0.0, 1.0, 0.2])


def test_raw_tensor(tmp_path, rng):
    tensor = DenseTensor(rng.standard_normal((4, 4, 3)))
    path = str(tmp_path / "x.attn")
    write_tensor(path, tensor)
    loaded = load_image_tensor(path)
    assert np.array_equal(loaded.data, tensor.data)
    assert load_image_tensor(path, reshape_to=(2, 2, 4, 3)).shape == (2, 2, 4, 3)


def test_errors(tmp_path):
    path = str(tmp_path / "image.png")
    with open(path, "wb") as f:
        f.write(b"\x89PNG\r\n")
    with pytest.raises(TensorFormatError):
        load_image_tensor(path)

    with pytest.raises(TensorFormatError):
        read_ppm(b"P6\n2 2\n65535\n" + bytes(24))
    with pytest.raises(TensorFormatError):
        read_ppm(b"P6\n2 2\n255\n" + bytes(5))
    with pytest.raises(TensorFormatError):
        read_ppm(b"P3\n1 1\n255\n0 0 0\n")

    ppm = str(tmp_path / "small.ppm")
    write_ppm(ppm, np.zeros((2, 2, 3)))
    with pytest.raises(ShapeError):
        load_image_tensor(ppm, reshape_to=(5, 5))
    with pytest.raises(ValueError):
        write_ppm(ppm, np.zeros((2, 2)))
