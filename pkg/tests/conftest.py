import functools

import numpy as np
import pytest

from detsft.estimators import design_schedule


@functools.lru_cache(maxsize=None)
def designed(n, k, mode="sample-verify", F=4, bucket_factor=2, seed=0):
    """Filter and certified schedule, cached across the session."""
    return design_schedule(n, k, F=F, bucket_factor=bucket_factor, mode=mode, seed=seed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spectrum(rng, n, k, tail_l1=0.0, scale=10.0):
    """``k`` large coordinates plus an optional dense tail of the given l1 mass."""
    x_hat = np.zeros(n, dtype=np.complex128)
    support = rng.choice(n, k, replace=False)
    x_hat[support] = scale * (rng.normal(size=k) + 1j * rng.normal(size=k))
    if tail_l1:
        tail = rng.normal(size=n) + 1j * rng.normal(size=n)
        tail[support] = 0
        x_hat += tail * (tail_l1 / np.abs(tail).sum())
    return x_hat


def to_time(x_hat):
    """Inverse of the unitary transform used throughout (numpy fast path, test helper only)."""
    return np.fft.fft(x_hat) / np.sqrt(x_hat.size)
