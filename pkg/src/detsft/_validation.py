"""Input validation helpers shared by the estimators and the free functions."""

import numbers

import numpy as np


def is_power_of_two(value):
    return isinstance(value, numbers.Integral) and value >= 1 and (value & (value - 1)) == 0


def check_power_of_two(value, name):
    if not is_power_of_two(value):
        raise ValueError(f"{name} must be a power of two, got {value!r}")
    return int(value)


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_sharpness(F):
    F = check_positive_int(F, "F", minimum=2)
    if F % 2:
        raise ValueError(f"F must be even, got {F}")
    return F


def check_signal(x, n=None, name="x"):
    """Return ``x`` as a 1-d complex128 array, optionally checking its length."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr = arr.astype(np.complex128, copy=False)
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    return arr


def check_signals(X, n=None):
    """2-d variant of :func:`check_signal`; a single vector is promoted to one row."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 1-d or 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("input contains non-finite values")
    arr = arr.astype(np.complex128, copy=False)
    if n is not None and arr.shape[1] != n:
        raise ValueError(f"signals have length {arr.shape[1]}, expected {n}")
    return arr


def check_prime(p):
    p = check_positive_int(p, "p", minimum=2)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return p


def is_prime(p):
    """Deterministic trial division."""
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    q = 3
    while q * q <= p:
        if p % q == 0:
            return False
        q += 2
    return True
