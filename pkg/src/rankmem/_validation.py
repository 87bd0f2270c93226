"""Input validation helpers shared by the public operations."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import ConfigError, DimensionError, EmptyInputError, NumericError


def check_vector(x, name: str = "x", dim: int | None = None) -> np.ndarray:
    """Return ``x`` as a finite 1-D float64 array, optionally of length ``dim``."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"{name} must have length {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr


def check_matrix(
    x,
    name: str = "X",
    width: int | None = None,
    allow_empty: bool = False,
) -> np.ndarray:
    """Return ``x`` as a finite 2-D float64 array.

    A 1-D input of length zero is accepted as an empty ``(0, width)`` matrix
    when ``allow_empty`` is set, which keeps ``np.empty(0)`` usable as "no rows".
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.size == 0 and allow_empty and width is not None:
        if arr.ndim == 2 and arr.shape[1] not in (0, width):
            raise DimensionError(f"{name} must have width {width}, got {arr.shape[1]}")
        return arr.reshape(0, width)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0 and not allow_empty:
        raise EmptyInputError(f"{name} has no rows")
    if width is not None and arr.shape[1] != width:
        raise DimensionError(f"{name} must have width {width}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_uint64(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if not 0 <= value < 2**64:
        raise ConfigError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return int(value)


def check_real(value, name: str, low: float | None = None, high: float | None = None,
               low_open: bool = False, high_open: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value}")
    if low is not None and (value < low or (low_open and value == low)):
        raise ConfigError(f"{name} out of range: {value}")
    if high is not None and (value > high or (high_open and value == high)):
        raise ConfigError(f"{name} out of range: {value}")
    return value
