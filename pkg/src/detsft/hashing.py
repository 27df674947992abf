"""Frequency-domain hashing primitives: permutations, buckets, offsets.

All arithmetic on frequencies is exact integer arithmetic modulo ``n``.
Functions accept scalars or integer numpy arrays for the frequency argument.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_power_of_two, check_signal


@dataclass(frozen=True)
class HashingTriple:
    """Parameters ``(sigma, a, b)`` of one pseudorandom spectral permutation."""

    sigma: int
    a: int
    b: int
    n: int

    def __post_init__(self):
        check_power_of_two(self.n, "n")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        object.__setattr__(self, "sigma", int(self.sigma) % self.n)
        object.__setattr__(self, "a", int(self.a) % self.n)
        object.__setattr__(self, "b", int(self.b) % self.n)
        if self.sigma % 2 == 0:
            raise ValueError(f"sigma must be odd, got {self.sigma}")

    @property
    def sigma_inv(self):
        return pow(self.sigma, -1, self.n)

    def with_modulation(self, a):
        return HashingTriple(self.sigma, a, self.b, self.n)


@dataclass(frozen=True)
class HashingSchedule:
    """A sequence of ``d`` hashings sharing ``n``, bucket count ``B`` and sharpness ``F``."""

    triples: tuple
    B: int
    F: int
    lam: float = float("nan")

    def __post_init__(self):
        object.__setattr__(self, "triples", tuple(self.triples))
        if not self.triples:
            raise ValueError("a schedule needs at least one triple")
        ns = {t.n for t in self.triples}
        if len(ns) != 1:
            raise ValueError(f"triples disagree on n: {sorted(ns)}")
        check_power_of_two(self.B, "B")
        if self.B >= self.n:
            raise ValueError(f"B={self.B} must be smaller than n={self.n}")

    @property
    def n(self):
        return self.triples[0].n

    @property
    def d(self):
        return len(self.triples)

    @property
    def sigmas(self):
        return np.array([t.sigma for t in self.triples], dtype=np.int64)

    @property
    def bs(self):
        return np.array([t.b for t in self.triples], dtype=np.int64)

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def __getitem__(self, r):
        return self.triples[r]


def centered(value, n):
    """Reduce ``value`` modulo ``n`` into ``[-n/2, n/2)``."""
    half = n // 2
    if np.ndim(value):
        return (np.asarray(value, dtype=np.int64) + half) % n - half
    return (int(value) + half) % n - half


def permute_freq(t, f):
    """``sigma (f - b) mod n``."""
    if np.ndim(f):
        return (t.sigma * (np.asarray(f, dtype=np.int64) - t.b)) % t.n
    return (t.sigma * (int(f) - t.b)) % t.n


def _round_half_up_bucket(pi, n, B):
    width = n // B
    return ((pi + width // 2) // width) % B


def bucket_of(t, B, f):
    """Bucket index ``round(B/n * pi(f)) mod B`` with ties rounded up."""
    return _round_half_up_bucket(permute_freq(t, f), t.n, B)


def offset(t, B, f, f2):
    """Signed distance of ``pi(f2)`` from the centre of ``f``'s bucket, as a centred residue."""
    width = t.n // B
    return centered(permute_freq(t, f2) - width * bucket_of(t, B, f), t.n)


def omega_power(e, n):
    """``exp(2 pi i e / n)`` with the exponent reduced modulo ``n`` before the trig call."""
    e = np.asarray(e, dtype=np.int64) % n
    return np.exp(2j * np.pi * e / n)


def permute_time(t, x):
    """Apply ``(P x)_s = x[sigma (s - a)] * omega^(s sigma b)``."""
    x = check_signal(x, t.n)
    s = np.arange(t.n, dtype=np.int64)
    return x[(t.sigma * (s - t.a)) % t.n] * omega_power(s * t.sigma * t.b, t.n)


def median_complex(values):
    """Component-wise median; even counts take the lower middle order statistic."""
    v = np.asarray(values, dtype=np.complex128).ravel()
    if v.size == 0:
        raise ValueError("median of an empty sequence")
    mid = (v.size - 1) // 2
    re = np.partition(v.real, mid)[mid]
    im = np.partition(v.imag, mid)[mid]
    return complex(re, im)


def median_complex_rows(values):
    """Row-wise :func:`median_complex` for a 2-d array (one median per row)."""
    v = np.asarray(values, dtype=np.complex128)
    mid = (v.shape[1] - 1) // 2
    re = np.partition(v.real, mid, axis=1)[:, mid]
    im = np.partition(v.imag, mid, axis=1)[:, mid]
    return re + 1j * im


def circular_distance(x, y):
    """Distance between two angles on the circle, in ``[0, pi]``."""
    d = math.fmod(x - y, 2 * math.pi)
    d = abs(d)
    return 2 * math.pi - d if d > math.pi else d


def two_adic_valuation(v, n):
    """Largest ``s`` with ``2**s | v`` for ``v`` nonzero modulo ``n`` (array friendly)."""
    v = np.asarray(v, dtype=np.int64) % n
    if np.any(v == 0):
        raise ValueError("valuation undefined for residues divisible by n")
    return np.log2(v & -v).astype(np.int64)
