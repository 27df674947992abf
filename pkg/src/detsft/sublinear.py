"""Sublinear recovery: locate each bucket's dominant frequency from phases at power-of-two modulations."""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_power_of_two
from .bucketing import raw_buckets_batch, residual_buckets_batch
from .hashing import median_complex
from .recovery import SparseApproximation, _entries, ensure_certified, run_outer_loop

TWO_PI = 2 * math.pi
ANGLE_SLACK = 1e-9


class LocateError(ValueError):
    """The samples have no dominant frequency that sector halving can pin down."""


@dataclass(frozen=True)
class ModulationSet:
    n: int

    def __post_init__(self):
        check_power_of_two(self.n, "n")

    @property
    def values(self):
        """``(0, 1, 2, 4, ..., n/2)``."""
        return (0,) + tuple(1 << j for j in range(int(math.log2(self.n))))

    def __len__(self):
        return int(math.log2(self.n)) + 1

    def __iter__(self):
        return iter(self.values)


@dataclass(frozen=True)
class Sector:
    center: float
    half_width: float

    def __post_init__(self):
        if not 0 < self.half_width <= math.pi:
            raise ValueError(f"half_width must lie in (0, pi], got {self.half_width}")
        object.__setattr__(self, "center", self.center % TWO_PI)

    def contains(self, angle, slack=ANGLE_SLACK):
        return _circ_dist(angle, self.center) <= self.half_width + slack


def _circ_dist(x, y):
    d = np.abs(np.mod(np.asarray(x) - y, TWO_PI))
    return np.minimum(d, TWO_PI - d)


def sector_chain(samples, n):
    """Sectors ``S_0, S_1, ...`` narrowed by the measurements at ``q = 2, 4, ..., n/2``.

    ``samples[j]`` is the value at modulation ``q_j`` of :class:`ModulationSet`.
    Batched: ``samples`` may be ``(m, log n + 1)``; returns centres ``(m, log n)``,
    the half widths and a mask of rows that failed: the nearest arc misses the
    current sector (empty intersection) or two arcs are exactly tied.
    Raises :class:`LocateError` on a zero base sample.
    """
    y = np.atleast_2d(np.asarray(samples, dtype=np.complex128))
    levels = int(math.log2(n))
    if y.shape[1] != levels + 1:
        raise ValueError(f"expected {levels + 1} modulation samples, got {y.shape[1]}")
    if np.any(y[:, 0] == 0):
        raise LocateError("zero sample at modulation 0")
    phase = np.angle(y[:, 1:] / y[:, :1])  # phase[j] ~ 2^j theta
    centers = np.empty((y.shape[0], levels))
    widths = np.array([math.pi / 2 ** (j + 2) for j in range(levels)])
    failed = np.zeros(y.shape[0], dtype=bool)
    c = phase[:, 0] % TWO_PI
    centers[:, 0] = c
    for j in range(1, levels):
        q = 1 << j
        # arcs of I_q are centred at (phase + 2 pi m) / q; take the one nearest the current centre
        m = np.round((q * c - phase[:, j]) / TWO_PI)
        cands = (phase[:, j][:, None] + TWO_PI * (m[:, None] + np.array([-1.0, 0.0, 1.0]))) / q
        dist = _circ_dist(cands, c[:, None])
        order = np.sort(dist, axis=1)
        failed |= (order[:, 0] == order[:, 1]) | (order[:, 0] > widths[j - 1] + widths[j] + ANGLE_SLACK)
        c = cands[np.arange(y.shape[0]), np.argmin(dist, axis=1)] % TWO_PI
        centers[:, j] = c
    return centers, widths, failed


def locate_many(samples, n):
    """Vectorised :func:`one_sparse_locate`; entries that cannot be resolved come back as ``-1``."""
    y = np.atleast_2d(np.asarray(samples, dtype=np.complex128))
    out = np.full(y.shape[0], -1, dtype=np.int64)
    ok = y[:, 0] != 0
    if not ok.any():
        return out
    centers, widths, failed = sector_chain(y[ok], n)
    final = centers[:, -1]
    v = np.round(final * n / TWO_PI).astype(np.int64)
    inside = (_circ_dist(TWO_PI * v / n, final) <= widths[-1] + ANGLE_SLACK) & ~failed
    out[np.flatnonzero(ok)[inside]] = v[inside] % n
    return out


def one_sparse_locate(samples, n):
    """Frequency ``f`` of a dominant tone from samples ``x_q`` at ``q`` in ``{0, 1, 2, ..., n/2}``.

    The phase convention is ``x_q ~ c * exp(2 pi i q f / n)``.  Each ratio
    ``x_q / x_0`` pins ``q * theta`` to within ``pi/4`` and the sector around
    ``theta = 2 pi f / n`` halves at every power of two.
    """
    centers, widths, failed = sector_chain(np.asarray(samples)[None, :], n)
    if failed[0]:
        raise LocateError("sector intersection is empty or ambiguous")
    final = centers[0, -1]
    v = int(round(final * n / TWO_PI))
    if _circ_dist(TWO_PI * v / n, final) > widths[-1] + ANGLE_SLACK:
        raise LocateError("final sector contains no grid frequency")
    return v % n


class SublinearMeasurements:
    """Buckets at every modulation in ``Q``, reused across iterations."""

    def __init__(self, x, schedule, filt):
        self.schedule = schedule
        self.filt = filt
        self.Q = ModulationSet(filt.n).values
        self.sigma_inv = np.array([t.sigma_inv for t in schedule], dtype=np.int64)
        self.raw = np.stack([raw_buckets_batch(x, schedule, filt, a=a) for a in self.Q])  # (|Q|, d, B)

    def buckets(self, z_hat):
        z = _entries(z_hat)
        return self.raw - np.stack([residual_buckets_batch(z, self.schedule, self.filt, a=a) for a in self.Q])


def sub_recovery_sublinear(x, z_hat, nu, schedule, filt, measurements=None):
    """Sublinear counterpart of :func:`~detsft.recovery.sub_recovery_linear`.

    Every bucket of every repetition proposes one frequency; a proposal counts
    only if it hashes back to the bucket it came from.  Each candidate's value
    is the median over the repetitions that proposed it.
    """
    ensure_certified(schedule, filt)
    if measurements is None:
        measurements = SublinearMeasurements(x, schedule, filt)
    n, B = filt.n, filt.B
    u = measurements.buckets(z_hat)  # (|Q|, d, B)
    d = schedule.d
    located = locate_many(u.reshape(u.shape[0], -1).T, n).reshape(d, B)
    r_idx, s_idx = np.nonzero(located >= 0)
    sig, b = schedule.sigmas[r_idx], schedule.bs[r_idx]
    f = (measurements.sigma_inv[r_idx] * located[r_idx, s_idx]) % n
    q = n // B
    pi = (sig * (f - b)) % n
    home = ((pi + q // 2) // q) % B
    agree = home == s_idx
    r_idx, s_idx, f, pi = r_idx[agree], s_idx[agree], f[agree], pi[agree]
    gain = filt.freq_response[(pi - q * s_idx) % n]
    vals = u[0, r_idx, s_idx] / gain
    # group reads by frequency in ascending (f, r) order
    order = np.lexsort((r_idx, f))
    f, vals = f[order], vals[order]
    cuts = np.flatnonzero(np.diff(f)) + 1
    out = {}
    for group_f, group in zip(np.split(f, cuts), np.split(vals, cuts)):
        if group.size == 0:
            continue
        est = median_complex(group)
        if abs(est) > nu / 2:
            out[int(group_f[0])] = est
    return SparseApproximation(n, out)


def recover_sublinear(x, params, schedule, filt, callback=None):
    """Same loop as :func:`~detsft.recovery.recover_linear` with sector-halving location."""
    ensure_certified(schedule, filt)
    meas = SublinearMeasurements(x, schedule, filt)

    def step(z, nu):
        return sub_recovery_sublinear(x, z, nu, schedule, filt, measurements=meas)

    return run_outer_loop(step, params, filt.n, callback)
