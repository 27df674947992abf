"""Compactly supported flat window filters.

The frequency response is a box of half-width ``h`` (in frequency bins)
convolved with the normalised kernel ``(sin(pi w f / n) / sin(pi f / n))**F``.
In time this is the product of the ``F``-fold self-convolution of a length-``w``
boxcar (compact, about ``F*w`` samples) with the Dirichlet kernel of the box, so
the window stays compact while the response is flat on the core and decays like
``|f|**-(F-1)`` outside it.  Every build is checked exhaustively over all ``n``
frequencies; nothing about the three flatness properties is assumed.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ._validation import check_power_of_two, check_sharpness
from .artifacts import read_artifact, write_artifact
from .hashing import centered

SUPPORT_CONSTANT = 8
WIDEN_FACTOR = 1.25
WIDEN_BUDGET = 8


class FilterCertificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class FilterReport:
    passed: bool
    range_ok: bool
    core_ok: bool
    decay_ok: bool
    support_ok: bool
    range_slack: float
    core_slack: float
    decay_slack: float
    support: int
    support_limit: int

    @property
    def support_constant(self):
        return self.support / (self.support_limit / SUPPORT_CONSTANT)


@dataclass(frozen=True, eq=False)
class FlatFilter:
    """Paired time window and frequency response of an ``(n, B, F)`` flat filter.

    ``freq_response[f]`` is indexed by the residue ``f mod n``; use
    :func:`filter_value` for centred offsets.  ``time_window`` is the unitary
    inverse transform of ``freq_response`` and vanishes outside
    ``support`` (centred indices ``-(L-1)//2 .. L//2``).
    """

    n: int
    B: int
    F: int
    width: int
    core: int
    freq_response: np.ndarray = field(repr=False)
    time_window: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)

    @property
    def epsilon(self):
        return 0.25 ** (self.F - 1)

    @property
    def support_length(self):
        return int(self.support.size)


def _kernel_time(n, w, F):
    """Circular ``F``-fold self-convolution of a centred length-``w`` boxcar (``w`` odd)."""
    if w >= n:
        return np.ones(n), np.arange(n)
    box = np.ones(w)
    k = np.array([1.0])
    for _ in range(F):
        k = np.convolve(k, box)
    L = k.size
    if L >= n:
        out = np.zeros(n)
        np.add.at(out, (np.arange(L) - (L - 1) // 2) % n, k)
        return out, np.arange(n)
    start = -((L - 1) // 2)
    idx = np.arange(start, start + L) % n
    out = np.zeros(n)
    out[idx] = k
    return out, np.sort(idx)


def _box_time(n, h):
    """``sum_{|f| <= h} omega^{f t}`` evaluated at every ``t`` (real, even)."""
    t = np.arange(n)
    if 2 * h + 1 >= n:
        out = np.zeros(n)
        out[0] = n
        return out
    num = np.sin(np.pi * t * (2 * h + 1) / n)
    den = np.sin(np.pi * t / n)
    out = np.empty(n)
    out[1:] = num[1:] / den[1:]
    out[0] = 2 * h + 1
    return out


def _assemble(n, B, F, w, h):
    k, support = _kernel_time(n, w, F)
    g = np.zeros(n)
    g[support] = k[support] / k[0] * _box_time(n, h)[support]
    # freq_response[f] = (1/n) sum_t g_t omega^{-f t}; g is real and even so this is real
    response = np.real(np.fft.fft(g)) / n
    response = 0.5 * (response + response[(-np.arange(n)) % n])  # exact symmetry
    window = g / math.sqrt(n)
    return FlatFilter(n, B, F, w, h, response, window, support)


def certify_filter(filt):
    """Check the three flatness properties over all ``n`` frequencies plus the support bound."""
    n, B, F = filt.n, filt.B, filt.F
    eps = filt.epsilon
    g = filt.freq_response
    a = np.abs(centered(np.arange(n), n))
    range_slack = float(min(g.min(), 1.0 - g.max()))
    core = a * 2 * B <= n
    core_slack = float(g[core].min() - (1 - eps))
    far = a * B >= n
    if far.any():
        envelope = eps * (n / (B * a[far])) ** (F - 1)
        decay_slack = float(np.min(envelope - g[far]))
    else:
        decay_slack = math.inf
    limit = min(n, SUPPORT_CONSTANT * F * B)
    support = filt.support_length
    tol = 1e-12
    range_ok = range_slack >= -tol
    core_ok = core_slack >= 0
    decay_ok = decay_slack >= 0
    support_ok = support <= limit
    return FilterReport(
        passed=range_ok and core_ok and decay_ok and support_ok,
        range_ok=range_ok,
        core_ok=core_ok,
        decay_ok=decay_ok,
        support_ok=support_ok,
        range_slack=range_slack,
        core_slack=core_slack,
        decay_slack=decay_slack,
        support=support,
        support_limit=limit,
    )


def _odd(x):
    x = int(math.ceil(x))
    return x if x % 2 else x + 1


def build_filter(n, B, F, width=None):
    """Build a certified ``(n, B, F)`` flat filter.

    The boxcar width starts at ``width`` (default ``2B + 1``) and grows by 25%
    per retry; for each width the narrowest core half-width ``h`` that
    certifies is taken, which keeps the response's total mass, and with it the
    collision rate seen by the schedule forge, as low as that width allows.
    """
    n = check_power_of_two(n, "n")
    B = check_power_of_two(B, "B")
    F = check_sharpness(F)
    if B >= n:
        raise ValueError(f"B={B} must be smaller than n={n}")
    w = _odd(width if width is not None else 2 * B + 1)
    last = None
    for _ in range(WIDEN_BUDGET + 1):
        w_eff = min(w, n)
        for h in range(n // (2 * B), n // B):
            filt = _assemble(n, B, F, w_eff, h)
            report = certify_filter(filt)
            if report.passed:
                return filt
            last = report
        if w_eff >= n:
            break
        w = _odd(w * WIDEN_FACTOR)
    raise FilterCertificationError(
        f"no certified flat filter for n={n}, B={B}, F={F} within the widening budget "
        f"(last report: {last})"
    )


def filter_value(filt, off):
    """Response at a centred offset (scalar or array)."""
    if np.ndim(off):
        return filt.freq_response[np.asarray(off) % filt.n]
    return float(filt.freq_response[int(off) % filt.n])


def save_filter(filt, path):
    """Write the response as an ``index value`` table under a parameter header."""
    fields = {"n": filt.n, "B": filt.B, "F": filt.F, "width": filt.width, "core": filt.core}
    write_artifact(path, "flat-filter", fields, (f"{f} {v!r}" for f, v in enumerate(filt.freq_response.tolist())))


def load_filter(path):
    """Read a table written by :func:`save_filter` and rebuild the exact filter pair.

    The parameters in the header are used to reassemble the filter; the stored
    table must match the reassembled response bit for bit.
    """
    fields, lines = read_artifact(path, "flat-filter")
    table = np.array([float(line.split()[1]) for line in lines])
    filt = _assemble(*(int(fields[k]) for k in ("n", "B", "F", "width", "core")))
    if not np.array_equal(filt.freq_response, table):
        raise ValueError(f"{path}: stored response does not match its header parameters")
    return filt
