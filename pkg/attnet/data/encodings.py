"""On-disk encodings of view matrices, looked up by name from dataset manifests."""
from abc import abstractmethod

import numpy as np
import pandas as pd

from attnet.errors import ShapeInconsistencyError
from attnet.utils.registry import SubclassRegisteringABCMeta

__all__ = ["ViewEncoding"]


class ViewEncoding(metaclass=SubclassRegisteringABCMeta):
    """
    Reads and writes a `rows x cols` matrix. Subclasses register under the
    names in `REGISTRY_KEYS`, which is what manifests refer to.
    """

    REGISTRY_KEYS = None
    EXTENSION = None

    @abstractmethod
    def read(self, path, rows, cols):
        pass

    @abstractmethod
    def write(self, path, matrix):
        pass


class F64LEEncoding(ViewEncoding):
    """Raw little-endian doubles in column-major order, without a header."""

    REGISTRY_KEYS = ["f64le"]
    EXTENSION = "bin"

    def read(self, path, rows, cols):
        values = np.fromfile(path, dtype="<f8")
        if values.size != rows * cols:
            raise ShapeInconsistencyError(
                "'{}' holds {} values but the manifest declares {}x{}.".format(
                    path, values.size, rows, cols
                )
            )
        return np.reshape(values.astype(np.float64), (rows, cols), order="F")

    def write(self, path, matrix):
        with open(path, "wb") as f:
            f.write(np.asarray(matrix, dtype="<f8").tobytes(order="F"))


class CsvEncoding(ViewEncoding):
    """Comma separated values without a header, one row per feature."""

    REGISTRY_KEYS = ["csv"]
    EXTENSION = "csv"

    def read(self, path, rows, cols):
        matrix = pd.read_csv(
            path, header=None, dtype=np.float64, float_precision="round_trip"
        ).to_numpy()
        if matrix.shape != (rows, cols):
            raise ShapeInconsistencyError(
                "'{}' holds a {}x{} matrix but the manifest declares {}x{}.".format(
                    path, matrix.shape[0], matrix.shape[1], rows, cols
                )
            )
        return matrix

    def write(self, path, matrix):
        pd.DataFrame(np.asarray(matrix, dtype=np.float64)).to_csv(
            path, header=False, index=False, float_format="%.17g"
        )
