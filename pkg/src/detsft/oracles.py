"""Brute-force oracles and adversarial inputs, independent of the fast paths they check."""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_positive_int, check_signal
from .bucketing import measure_exact
from .hashing import bucket_of, offset


def exact_dft(x):
    """Unitary DFT ``x_hat[f] = n^-1/2 sum_t x[t] exp(2 pi i f t / n)`` by direct summation."""
    x = check_signal(x)
    n = x.size
    idx = np.arange(n, dtype=np.int64)
    W = np.exp(2j * np.pi * ((idx[:, None] * idx[None, :]) % n) / n)
    return (W @ x) / math.sqrt(n)


def exact_idft(x_hat):
    x_hat = check_signal(x_hat, name="x_hat")
    return np.conj(exact_dft(np.conj(x_hat)))


def head_indices(x_hat, k):
    """Indices of the ``k`` largest magnitudes; ties go to the lower index."""
    mag = np.abs(np.asarray(x_hat))
    order = np.lexsort((np.arange(mag.size), -mag))
    return np.sort(order[:k])


def tail_l1(x_hat, k):
    mag = np.abs(np.asarray(x_hat))
    mask = np.ones(mag.size, dtype=bool)
    mask[head_indices(x_hat, k)] = False
    return float(mag[mask].sum())


@dataclass(frozen=True)
class GuaranteeReport:
    linf_error: float
    linf_bound: float
    l2_error: float
    l2_bound: float
    tail_l1: float
    slack: float

    @property
    def linf_pass(self):
        return self.linf_error <= self.linf_bound + self.slack

    @property
    def l2_pass(self):
        return self.l2_error <= self.l2_bound + self.slack

    def to_text(self):
        return "\n".join(
            [
                f"linf_error {self.linf_error!r}",
                f"linf_bound {self.linf_bound!r}",
                f"linf_pass {int(self.linf_pass)}",
                f"l2_error {self.l2_error!r}",
                f"l2_bound {self.l2_bound!r}",
                f"l2_pass {int(self.l2_pass)}",
                f"tail_l1 {self.tail_l1!r}",
            ]
        )


def guarantee_report(x_hat, x_hat_prime, k, slack=1e-9):
    """Both recovery guarantees of ``x_hat_prime`` against the true spectrum ``x_hat``."""
    x_hat = check_signal(x_hat, name="x_hat")
    est = check_signal(x_hat_prime, x_hat.size, "x_hat_prime")
    k = check_positive_int(k, "k")
    tail = tail_l1(x_hat, k)
    err = x_hat - est
    return GuaranteeReport(
        float(np.abs(err).max()), tail / k, float(np.linalg.norm(err)), tail / math.sqrt(k), tail, slack
    )


def check_guarantee(x, x_hat_prime, k, slack=1e-9):
    """:func:`guarantee_report` with the spectrum computed from the time signal ``x``."""
    return guarantee_report(exact_dft(x), x_hat_prime, k, slack)


@dataclass(frozen=True, eq=False)
class AdversarialInstance:
    spectrum: np.ndarray
    interesting: np.ndarray
    companions: np.ndarray
    k: int
    gamma: float

    @property
    def signal(self):
        return exact_idft(self.spectrum)


def adversarial_spectrum(n, k, gamma=0.2, tail_mass=1.0, seed=0):
    """Spectrum where the zero vector meets the l2/l1 guarantee but misses every large coordinate.

    ``ceil(gamma k)`` interesting coordinates have magnitude ``(2/k) * tail_mass``;
    the remaining ``n - ceil(gamma k)`` coordinates share the magnitude
    ``tail_mass / (n - k)``.  Positions are drawn from ``seed``.
    """
    n = check_positive_int(n, "n", minimum=2)
    k = check_positive_int(k, "k")
    if not 0 < gamma <= 0.2:
        raise ValueError("gamma must lie in (0, 1/5]")
    if k > gamma * n / (2 * gamma + 1):
        raise ValueError(f"k={k} too large for n={n} at gamma={gamma}")
    a = math.ceil(gamma * k - 1e-12)
    perm = np.random.default_rng(seed).permutation(n)
    A, Bset = np.sort(perm[:a]), np.sort(perm[a:k])
    spec = np.full(n, tail_mass / (n - k), dtype=np.complex128)
    spec[A] = 2.0 * tail_mass / k
    inst = AdversarialInstance(spec, A, Bset, k, gamma)
    if a / k <= 0.2 + 1e-12:
        assert np.sum(np.abs(spec) ** 2) <= 5 * (a / k) / k * tail_mass**2 * (1 + 1e-12)
    return inst


def adversarial_family(n, k, gamma=0.2, tail_mass=1.0, seed=0):
    """Time-domain signal of :func:`adversarial_spectrum`."""
    return adversarial_spectrum(n, k, gamma, tail_mass, seed).signal


def _poly_values(g, xs, n):
    if callable(g):
        return np.array([int(g(int(x))) % n for x in xs], dtype=np.int64)
    return np.array([sum(int(c) * pow(int(x), j, n) for j, c in enumerate(g)) % n for x in xs], dtype=np.int64)


def max_exponential_sum(S, g, n):
    """``max_b |sum_{x in S} exp(2 pi i b g(x) / n)|`` over units ``b``; returns ``(value, smallest arg max)``.

    ``g`` is a callable or a coefficient list, lowest degree first.
    """
    vals = _poly_values(g, sorted(S), n)
    best, arg = -1.0, None
    for b in range(1, n):
        if math.gcd(b, n) != 1:
            continue
        ph = 2 * np.pi * ((b * vals) % n) / n
        v = math.hypot(math.fsum(np.cos(ph)), math.fsum(np.sin(ph)))
        if v > best + 1e-12:
            best, arg = v, b
    return best, arg


def head_counts(x_hat, schedule, filt):
    """Per frequency, the number of repetitions whose filtered bucket estimate is within
    ``(10/B) * ||x_hat without f||_1`` of ``x_hat[f]`` (direct measurement formula)."""
    x_hat = check_signal(x_hat, filt.n, "x_hat")
    n, B = filt.n, filt.B
    f = np.arange(n)
    rest = np.abs(x_hat).sum() - np.abs(x_hat)
    counts = np.zeros(n, dtype=np.int64)
    for t in schedule:
        m = measure_exact(x_hat, t, filt).values
        est = m[bucket_of(t, B, f)] / filt.freq_response[offset(t, B, f, f) % n]
        counts += np.abs(est - x_hat) <= 10.0 / B * rest
    return counts


@dataclass(frozen=True)
class InvariantReport:
    untouched: bool
    no_overshoot: bool
    residual_cap: bool
    heavy: np.ndarray

    @property
    def passed(self):
        return self.untouched and self.no_overshoot and self.residual_cap


def loop_invariants(x_hat, z_dense, nu, k, rho=32.0, slack=1e-9):
    """Outer-loop invariants after an iteration at threshold ``nu``.

    With ``I = {f : |x_hat[f]| >= ||x_hat_{-k}||_1 / (rho k)}``: ``z`` vanishes off
    ``I``; the residual never exceeds the original magnitude; and the residual
    on ``I`` is at most ``nu``.
    """
    x_hat = np.asarray(x_hat)
    r = x_hat - np.asarray(z_dense)
    heavy = np.abs(x_hat) >= tail_l1(x_hat, k) / (rho * k)
    return InvariantReport(
        bool(np.all(np.asarray(z_dense)[~heavy] == 0)),
        bool(np.all(np.abs(r) <= np.abs(x_hat) + slack)),
        bool(np.all(np.abs(r[heavy]) <= nu + slack)),
        np.flatnonzero(heavy),
    )
