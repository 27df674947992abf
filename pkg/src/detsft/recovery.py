"""Deterministic sparse recovery: per-frequency median estimation inside a geometric threshold loop."""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from ._validation import check_positive_int
from .artifacts import read_artifact, write_artifact
from .bucketing import raw_buckets_batch, residual_buckets_batch
from .forge import verify_condition
from .hashing import bucket_of, median_complex_rows, offset

logger = logging.getLogger(__name__)

SPARSITY_FACTOR = 33


class UncertifiedScheduleError(RuntimeError):
    """The schedule fails the pairwise collision condition for the given filter."""


_certified = {}


def ensure_certified(schedule, filt):
    """Run :func:`verify_condition` once per (schedule, filter) and raise if it fails."""
    key = (schedule, filt.n, filt.B, filt.F, filt.width, filt.core)
    report = _certified.get(key)
    if report is None:
        report = verify_condition(schedule, filt)
        _certified[key] = report
    if not report.passed:
        raise UncertifiedScheduleError(
            f"schedule fails the collision condition: pair {report.worst_pair} sums to "
            f"{report.worst_sum:.6g} > {report.threshold:.6g}"
        )
    return report


@dataclass(frozen=True)
class RecoveryParams:
    """Loop parameters.

    ``mu`` is the tail scale ``||x_hat_{-k}||_1 / k`` (an upper bound is fine,
    the guarantee degrades proportionally) and ``snr_bound`` an upper bound on
    ``||x_hat||_1 / mu``.  Internally the loop runs at sparsity ``2k``, where
    the tail scale is at most ``mu / 2``, so the final error is ``<= mu``.
    """

    k: int
    mu: float
    snr_bound: float
    C: float = 2.0
    gamma: float = 2.0
    rho: float = 32.0
    beta: float = 32.0

    def __post_init__(self):
        check_positive_int(self.k, "k")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be positive and finite, got {self.mu}")
        if not self.snr_bound >= 1:
            raise ValueError(f"snr_bound must be >= 1, got {self.snr_bound}")
        if self.C <= 0 or self.gamma <= 1 or self.rho <= 0 or self.beta <= 0:
            raise ValueError("C, rho, beta must be positive and gamma > 1")

    @property
    def inner_mu(self):
        return self.mu / 2.0

    @property
    def iterations(self):
        return max(1, math.ceil(math.log(self.snr_bound) / math.log(self.gamma) - 1e-12))

    def thresholds(self):
        """``C mu' gamma^(T - t)`` for ``t = 0..T``; the last sweep runs at ``C mu' = mu``."""
        T = self.iterations
        return [self.C * self.inner_mu * self.gamma ** (T - t) for t in range(T + 1)]


@dataclass
class SparseApproximation:
    """Sparse spectrum estimate ``{frequency: value}``."""

    n: int
    entries: dict = field(default_factory=dict)
    sparsity_bound: int = None

    def __len__(self):
        return len(self.entries)

    @property
    def support(self):
        return np.array(sorted(self.entries), dtype=np.int64)

    def to_dense(self):
        out = np.zeros(self.n, dtype=np.complex128)
        for f, v in self.entries.items():
            out[f] = v
        return out

    def add(self, other):
        entries = dict(self.entries)
        for f, v in _entries(other).items():
            entries[f] = entries.get(f, 0j) + v
        return SparseApproximation(self.n, entries, self.sparsity_bound)

    def save(self, path, **fields):
        """``frequency re im`` lines sorted by frequency."""
        lines = (f"{f} {self.entries[f].real!r} {self.entries[f].imag!r}" for f in sorted(self.entries))
        write_artifact(path, "sparse-approximation", {"n": self.n, "count": len(self), **fields}, lines)

    @classmethod
    def load(cls, path):
        fields, lines = read_artifact(path, "sparse-approximation")
        entries = {}
        for line in lines:
            f, re, im = line.split()
            entries[int(f)] = complex(float(re), float(im))
        return cls(int(fields["n"]), entries)


def _entries(z):
    if z is None:
        return {}
    if isinstance(z, SparseApproximation):
        return z.entries
    return dict(z)


class LinearMeasurements:
    """Buckets of the full signal for every triple at ``a = 0``, reused across iterations."""

    def __init__(self, x, schedule, filt):
        self.schedule = schedule
        self.filt = filt
        n = filt.n
        f = np.arange(n)
        self.raw = raw_buckets_batch(x, schedule, filt, a=0)
        self.home = np.stack([bucket_of(t, filt.B, f) for t in schedule])
        self.inv_gain = 1.0 / np.stack([filt.freq_response[offset(t, filt.B, f, f) % n] for t in schedule])

    def estimates(self, z_hat):
        """``(d, n)`` per-repetition estimates of the residual spectrum."""
        u = self.raw - residual_buckets_batch(_entries(z_hat), self.schedule, self.filt, a=0)
        return np.take_along_axis(u, self.home, axis=1) * self.inv_gain


def sub_recovery_linear(x, z_hat, nu, schedule, filt, measurements=None):
    """Heavy part of the residual ``x_hat - z_hat``: median estimates kept where above ``nu / 2``."""
    ensure_certified(schedule, filt)
    if measurements is None:
        measurements = LinearMeasurements(x, schedule, filt)
    est = median_complex_rows(measurements.estimates(z_hat).T)
    keep = np.flatnonzero(np.abs(est) > nu / 2)
    return SparseApproximation(filt.n, {int(f): complex(est[f]) for f in keep})


def run_outer_loop(sub_step, params, n, callback=None):
    """Accumulate ``z += sub_step(z, nu)`` over the decreasing thresholds."""
    z = SparseApproximation(n, {}, SPARSITY_FACTOR * params.k)
    for t, nu in enumerate(params.thresholds()):
        w = sub_step(z, nu)
        z = z.add(w)
        logger.debug("iteration %d: nu=%.3g found %d, total %d", t, nu, len(w), len(z))
        if callback is not None:
            callback(t, nu, z)
    return z


def recover_linear(x, params, schedule, filt, callback=None):
    """Sparse spectrum estimate from the samples the schedule prescribes (``a = 0`` only).

    ``callback(t, nu, z)`` is invoked after every iteration.
    """
    ensure_certified(schedule, filt)
    meas = LinearMeasurements(x, schedule, filt)

    def step(z, nu):
        return sub_recovery_linear(x, z, nu, schedule, filt, measurements=meas)

    return run_outer_loop(step, params, filt.n, callback)
