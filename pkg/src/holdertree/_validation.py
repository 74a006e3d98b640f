import numpy as np

from .exceptions import InvalidInputError


def as_float_array(values, name, ndim=None):
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name}: not numeric ({exc})") from None
    if ndim is not None and arr.ndim != ndim:
        raise InvalidInputError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name}: contains non-finite values")
    return arr


def check_times(times, name="times"):
    t = as_float_array(times, name, ndim=1)
    if t.size < 2:
        raise InvalidInputError(f"{name}: need at least 2 samples, got {t.size}")
    if np.any(np.diff(t) <= 0):
        raise InvalidInputError(f"{name}: must be strictly increasing")
    return t


def check_positive(value, name):
    value = float(value)
    if not value > 0 or not np.isfinite(value):
        raise InvalidInputError(f"{name} must be a positive finite number, got {value}")
    return value


def check_exponent(alpha, name="alpha"):
    alpha = float(alpha)
    if not 0 < alpha <= 1:
        raise InvalidInputError(f"{name} must lie in (0, 1], got {alpha}")
    return alpha
