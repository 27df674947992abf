"""Bucket measurements: the exact formula, the sample-based HashToBins and sample accounting."""

from dataclasses import dataclass, field
import math

import numpy as np

from ._validation import check_signal
from .artifacts import read_artifact, write_artifact
from .hashing import bucket_of, centered, offset, omega_power, permute_freq

DEFAULT_C_DELTA = 6
ROUNDING_ALLOWANCE = 1e-10


class SampleAccessError(LookupError):
    """A pipeline asked for a time-domain sample it is not allowed to read."""


class SampleAccess:
    """Read-only view of ``x`` restricted to a fixed index set.

    Indexing with positions outside ``allowed`` raises :class:`SampleAccessError`.
    """

    def __init__(self, n, values):
        self.n = int(n)
        self._values = {int(i): complex(v) for i, v in values.items()}
        self.requested = set()

    @classmethod
    def from_signal(cls, x, indices):
        x = check_signal(x)
        return cls(x.size, {int(i): x[i] for i in indices})

    def __len__(self):
        return self.n

    def __getitem__(self, idx):
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64)) % self.n
        try:
            out = np.array([self._values[i] for i in idx.tolist()], dtype=np.complex128)
        except KeyError as exc:
            raise SampleAccessError(f"sample {exc.args[0]} is outside the permitted sample set") from None
        self.requested.update(idx.tolist())
        return out


def _read(x, idx):
    return x[idx] if isinstance(x, SampleAccess) else np.asarray(x)[idx]


@dataclass(frozen=True, eq=False)
class BucketVector:
    values: np.ndarray = field(repr=False)
    triple: object
    delta_bound: float


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Sorted distinct sample positions plus every ``(position, r, a)`` use."""

    n: int
    indices: np.ndarray = field(repr=False)
    uses: np.ndarray = field(repr=False)

    def __len__(self):
        return int(self.indices.size)

    def provenance(self, i):
        rows = self.uses[self.uses[:, 0] == i]
        return [(int(r), int(a)) for _, r, a in rows]

    def save(self, path, **fields):
        """Sorted index list, one per line."""
        write_artifact(path, "samples", {"n": self.n, "count": len(self), **fields}, map(str, self.indices.tolist()))

    @staticmethod
    def load_indices(path):
        """``(n, indices)`` from a file written by :meth:`save`."""
        fields, lines = read_artifact(path, "samples")
        return int(fields["n"]), np.array([int(v) for v in lines], dtype=np.int64)


def window_positions(filt):
    """Centred time indices ``t`` where the window is non-zero, ascending."""
    return np.sort(centered(filt.support, filt.n))


def sample_indices(triple, filt):
    """Positions ``sigma (t - a) mod n`` read by one HashToBins call."""
    t = window_positions(filt)
    return (triple.sigma * (t - triple.a)) % triple.n


def sample_positions(schedule, filt, modulations=(0,)):
    t = window_positions(filt)
    n = schedule.n
    uses = []
    for r, trip in enumerate(schedule):
        for a in modulations:
            pos = (trip.sigma * (t - a)) % n
            uses.append(np.column_stack([pos, np.full(pos.size, r), np.full(pos.size, a % n)]))
    uses = np.concatenate(uses).astype(np.int64)
    return SampleSet(n, np.unique(uses[:, 0]), uses)


def modulation_set(n):
    """``{0, 1, 2, 4, ..., n/2}``."""
    return (0,) + tuple(1 << j for j in range(int(math.log2(n))))


def measure_exact(x_hat, triple, filt, a=None):
    """``m_s = sum_f G[pi(f) - (n/B) s] omega^(a sigma f) x_hat[f]`` by direct summation."""
    n, B = filt.n, filt.B
    x_hat = check_signal(x_hat, n, "x_hat")
    a = triple.a if a is None else a
    f = np.arange(n)
    pi = permute_freq(triple, f)
    s = np.arange(B)
    G = filt.freq_response[(pi[None, :] - (n // B) * s[:, None]) % n]
    values = G @ (omega_power(a * triple.sigma * f, n) * x_hat)
    return BucketVector(values, triple.with_modulation(a), 0.0)


def _tail_masses(filt):
    """``tail[R]``: worst-case response mass on buckets more than ``R`` away from a frequency's own."""
    n, B = filt.n, filt.B
    q = n // B
    z = np.arange(q)
    Z = (z + q // 2) % q - q // 2
    j = centered(np.arange(B), B)
    G = filt.freq_response[(Z[:, None] + q * j[None, :]) % n]  # (z, j)
    dist = np.abs(j)
    tails = np.array([G[:, dist > R].sum(axis=1).max() if np.any(dist > R) else 0.0 for R in range(B // 2 + 1)])
    return tails


def subtraction_radius(filt, z_l1, z_l2, c_delta=DEFAULT_C_DELTA):
    """Smallest bucket radius whose neglected mass keeps the error below ``||z||_2 n^-c``."""
    tails = _tail_masses(filt)
    budget = z_l2 * filt.n ** (-c_delta)
    for R, tail in enumerate(tails):
        if tail * z_l1 <= budget:
            return R, float(tail * z_l1)
    return filt.B // 2, 0.0


def residual_buckets(z_hat, triple, filt, c_delta=DEFAULT_C_DELTA):
    """Bucket contribution of a sparse spectrum ``{f: value}`` plus the truncation bound."""
    n, B = filt.n, filt.B
    q = n // B
    out = np.zeros(B, dtype=np.complex128)
    if not z_hat:
        return out, 0.0
    freqs = np.fromiter(z_hat.keys(), dtype=np.int64)
    vals = np.fromiter(z_hat.values(), dtype=np.complex128)
    l1 = float(np.abs(vals).sum())
    l2 = float(np.sqrt((np.abs(vals) ** 2).sum()))
    R, bound = subtraction_radius(filt, l1, l2, c_delta)
    pi = permute_freq(triple, freqs)
    home = bucket_of(triple, B, freqs)
    j = np.arange(-R, R + 1) if 2 * R + 1 < B else centered(np.arange(B), B)
    s = (home[:, None] + j[None, :]) % B
    G = filt.freq_response[(pi[:, None] - q * s) % n]
    contrib = G * (omega_power(triple.a * triple.sigma * freqs, n) * vals)[:, None]
    np.add.at(out, s.ravel(), contrib.ravel())
    return out, bound


def raw_buckets(x, triple, filt):
    """Bucket values of the full signal from ``|supp G|`` samples: window, fold mod ``B``, ``B``-point DFT."""
    n, B = filt.n, filt.B
    if triple.n != n or len(x) != n:
        raise ValueError("signal, triple and filter must share n")
    t = window_positions(filt)
    samples = _read(x, (triple.sigma * (t - triple.a)) % n)
    y = filt.time_window[t % n] * samples * omega_power(t * triple.sigma * triple.b, n)
    folded = np.zeros(B, dtype=np.complex128)
    np.add.at(folded, t % B, y)
    values = B * np.fft.ifft(folded)
    scale = float(np.abs(y).sum())
    return values, scale


def hash_to_bins(x, z_hat, triple, filt, c_delta=DEFAULT_C_DELTA):
    """Buckets of the residual ``x_hat - z_hat`` under ``triple``.

    ``x`` is the full signal or a :class:`SampleAccess`; ``z_hat`` a mapping
    ``frequency -> value``.  ``delta_bound`` covers the truncated residual
    subtraction plus a floating-point rounding allowance.
    """
    values, scale = raw_buckets(x, triple, filt)
    sub, bound = residual_buckets(z_hat or {}, triple, filt, c_delta)
    z_l1 = sum(abs(v) for v in (z_hat or {}).values())
    return BucketVector(values - sub, triple, bound + ROUNDING_ALLOWANCE * (scale + z_l1))


def estimate_from_bucket(bucket, filt, f):
    """``G[o_f(f)]^-1 u[h(f)] omega^(-a sigma f)``."""
    t = bucket.triple
    n = filt.n
    g = filt.freq_response[offset(t, filt.B, f, f) % n]
    u = bucket.values[bucket_of(t, filt.B, f)]
    return u / g * omega_power(-t.a * t.sigma * np.asarray(f), n)


def residual_buckets_batch(z_hat, schedule, filt, a=0):
    """Exact bucket contribution of ``z_hat`` for every triple of ``schedule`` at modulation ``a``.

    Returns a ``(d, B)`` array.  No window truncation, so no error term.
    """
    n, B = filt.n, filt.B
    q = n // B
    out = np.zeros((schedule.d, B), dtype=np.complex128)
    if not z_hat:
        return out
    freqs = np.fromiter(z_hat.keys(), dtype=np.int64)
    vals = np.fromiter(z_hat.values(), dtype=np.complex128, count=freqs.size)
    sig = schedule.sigmas[:, None]
    pi = (sig * (freqs[None, :] - schedule.bs[:, None])) % n  # (d, k)
    s = np.arange(B)
    G = filt.freq_response[(pi[:, :, None] - q * s[None, None, :]) % n]  # (d, k, B)
    phase = omega_power(a * sig * freqs[None, :], n) * vals[None, :]
    return np.einsum("rkb,rk->rb", G, phase)


def raw_buckets_batch(x, schedule, filt, a=0):
    """Signal buckets for every triple at modulation ``a``, shape ``(d, B)``."""
    return np.stack([raw_buckets(x, t.with_modulation(a), filt)[0] for t in schedule])
