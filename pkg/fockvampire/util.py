#  Copyright 2024 The fockvampire Contributors
#
#  This file is part of fockvampire.
#
#  fockvampire is free software: you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation, either version 3 of the License, or
#  (at your option) any later version.
#
#  fockvampire is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with fockvampire.  If not, see <https://www.gnu.org/licenses/>.
from __future__ import annotations

import numpy as np
import numpy.typing as npt

from fockvampire.errors import ArgumentError

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]
Occupation = tuple[int, ...]

HERMITICITY_TOL = 1e-10
NORM_TOL = 1e-12


def frozen_array(values, dtype=np.complex128) -> np.ndarray:
    """Copy into a read-only array, so dataclass values stay immutable."""
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


def complex_to_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def matrix_to_pairs(matrix: np.ndarray) -> list[list[list[float]]]:
    """Complex matrix as nested [re, im] pairs for JSON."""
    return [[complex_to_pair(z) for z in row] for row in np.asarray(matrix)]


def pairs_to_matrix(pairs) -> ComplexArray:
    arr = np.asarray(pairs, dtype=np.float64)
    return arr[..., 0] + 1j * arr[..., 1]


def check_probability(value: float, name: str, *, open_low=False, open_high=False) -> float:
    value = float(value)
    low_ok = value > 0 if open_low else value >= 0
    high_ok = value < 1 if open_high else value <= 1
    if not (low_ok and high_ok and np.isfinite(value)):
        lo = "(" if open_low else "["
        hi = ")" if open_high else "]"
        raise ArgumentError(f"must be in {lo}0, 1{hi}, got {value}", field=name)
    return value


def psd_sqrt(matrix: np.ndarray) -> ComplexArray:
    """Square root of a Hermitian PSD matrix, tiny negative eigenvalues clipped."""
    eigvals, eigvecs = np.linalg.eigh((matrix + matrix.conj().T) / 2)
    root = np.sqrt(np.clip(eigvals, 0.0, None))
    return (eigvecs * root) @ eigvecs.conj().T
