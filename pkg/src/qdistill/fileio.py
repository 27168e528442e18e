"""Density-matrix file format.

A state file is a text document holding a 4x4 array of [re, im] number
pairs, row-major, in the fixed |HH>, |HV>, |VH>, |VV> basis order.  The
parser rejects non-Hermitian content beyond 1e-9.
"""

import json

import numpy as np

from .states import validate_density


def matrix_to_pairs(m: np.ndarray) -> list:
    """Nested [re, im] pair representation of a complex matrix."""
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def pairs_to_complex(pairs) -> np.ndarray:
    """Inverse of :func:`matrix_to_pairs` for a matrix of any shape."""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValueError(f"expected an array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def pairs_to_matrix(pairs) -> np.ndarray:
    arr = pairs_to_complex(pairs)
    if arr.shape != (4, 4):
        raise ValueError(f"expected a 4x4 array of [re, im] pairs, got shape {arr.shape}")
    return arr


def save_state(path, rho: np.ndarray) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_pairs(rho), fh, indent=1)
        fh.write("\n")


def load_state(path) -> np.ndarray:
    with open(path) as fh:
        rho = pairs_to_matrix(json.load(fh))
    return validate_density(rho, tol=1e-9)
