"""
Dense N-way tensors and the elementary operations on them.

All linearizations are first-index-fastest (column-major); `reshape`,
unfoldings and file I/O all share this convention.
"""
import numpy as np

from attnet.errors import ShapeError

__all__ = [
    "DenseTensor",
    "as_array",
    "mode_n_unfold",
    "fold_n",
    "reshape",
    "frobenius_norm",
    "rse",
    "contract_pair",
]


def _check_shape(shape):
    shape = tuple(int(s) for s in shape)
    if len(shape) < 1 or any(s < 1 for s in shape):
        raise ShapeError(
            "Tensor shapes must have at least one mode and positive sizes; got {}.".format(
                shape
            )
        )
    return shape


class DenseTensor(object):
    """
    An immutable, double precision, N-way dense tensor.

    The values are held in a read-only Fortran-ordered `numpy` array, so that
    `flat` (and the raw file format) enumerate entries first-index-fastest.
    Instances can be passed anywhere an array is expected.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        data = np.array(data, dtype=np.float64, order="F", copy=True)
        _check_shape(data.shape)
        data.setflags(write=False)
        self._data = data

    @classmethod
    def from_flat(cls, values, shape):
        shape = _check_shape(shape)
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size != int(np.prod(shape)):
            raise ShapeError(
                "Cannot build a tensor of shape {} from {} values.".format(
                    shape, values.size
                )
            )
        return cls(np.reshape(values, shape, order="F"))

    @property
    def data(self):
        return self._data

    @property
    def shape(self):
        return self._data.shape

    @property
    def order(self):
        return self._data.ndim

    @property
    def size(self):
        return self._data.size

    @property
    def flat(self):
        return self._data.ravel(order="F")

    def __array__(self, dtype=None, copy=None):
        if dtype is not None and dtype != self._data.dtype:
            return self._data.astype(dtype)
        return self._data

    def __repr__(self):
        return "<DenseTensor shape={}>".format(self.shape)


def as_array(t):
    """Return the values of `t` (tensor or array-like) as a float64 ndarray."""
    if isinstance(t, DenseTensor):
        return t.data
    return np.asarray(t, dtype=np.float64)


def _check_mode(n, order):
    if not 0 <= n < order:
        raise ShapeError(
            "Mode index {} is out of range for a tensor of order {}.".format(n, order)
        )


def mode_n_unfold(t, n):
    """
    Matricize `t` along mode `n` (zero-based).

    Column `j` of the result is the mode-`n` fibre whose remaining indices,
    taken over the other modes in ascending order, linearize to `j`
    first-index-fastest.

    Returns:
        numpy.ndarray: A matrix of shape `(I_n, prod(I_m for m != n))`.
    """
    arr = as_array(t)
    _check_mode(n, arr.ndim)
    return np.reshape(np.moveaxis(arr, n, 0), (arr.shape[n], -1), order="F")


def fold_n(m, n, shape):
    """Inverse of `mode_n_unfold`."""
    shape = _check_shape(shape)
    _check_mode(n, len(shape))
    m = np.asarray(m, dtype=np.float64)
    rest = shape[:n] + shape[n + 1 :]
    if m.ndim != 2 or m.shape != (shape[n], int(np.prod(rest))):
        raise ShapeError(
            "Matrix of shape {} cannot be folded along mode {} into shape {}.".format(
                m.shape, n, shape
            )
        )
    return DenseTensor(
        np.moveaxis(np.reshape(m, (shape[n],) + rest, order="F"), 0, n)
    )


def reshape(t, new_shape):
    """Replace the shape of `t`, keeping its column-major value sequence."""
    arr = as_array(t)
    new_shape = _check_shape(new_shape)
    if int(np.prod(new_shape)) != arr.size:
        raise ShapeError(
            "Cannot reshape a tensor with {} elements into shape {}.".format(
                arr.size, new_shape
            )
        )
    return DenseTensor(np.reshape(arr, new_shape, order="F"))


def frobenius_norm(t):
    return float(np.linalg.norm(as_array(t).ravel()))


def rse(reconstruction, reference):
    """
    Relative standard error of `reconstruction` with respect to `reference`,
    `||reconstruction - reference||_F / ||reference||_F`.
    """
    rec, ref = as_array(reconstruction), as_array(reference)
    if rec.shape != ref.shape:
        raise ShapeError(
            "Cannot compare tensors of shapes {} and {}.".format(rec.shape, ref.shape)
        )
    norm = frobenius_norm(ref)
    if norm == 0:
        raise ValueError("The reference tensor has zero norm.")
    return frobenius_norm(rec - ref) / norm


def contract_pair(a, b, pairs):
    """
    Contract tensors `a` and `b` over the paired modes in `pairs`.

    Args:
        a, b: The tensors (or arrays) to contract.
        pairs (list): `(mode_of_a, mode_of_b)` tuples of modes to sum over.
            An empty list yields the outer product.

    Returns:
        DenseTensor: The unpaired modes of `a` (in order) followed by the
            unpaired modes of `b` (in order).
    """
    a, b = as_array(a), as_array(b)
    pairs = [(int(i), int(j)) for i, j in pairs]
    modes_a = [i for i, _ in pairs]
    modes_b = [j for _, j in pairs]
    if len(set(modes_a)) != len(modes_a) or len(set(modes_b)) != len(modes_b):
        raise ShapeError("A mode may be paired at most once; got {}.".format(pairs))
    for i, j in pairs:
        _check_mode(i, a.ndim)
        _check_mode(j, b.ndim)
        if a.shape[i] != b.shape[j]:
            raise ShapeError(
                "Cannot contract mode {} (size {}) with mode {} (size {}).".format(
                    i, a.shape[i], j, b.shape[j]
                )
            )
    out = np.tensordot(a, b, axes=(modes_a, modes_b))
    if out.ndim == 0:
        out = np.reshape(out, (1,))
    return DenseTensor(out)
