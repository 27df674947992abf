"""Derandomized row subsampling of a bounded orthonormal matrix into an incoherent submatrix.

Rows are kept or dropped one at a time.  For every column pair the centred
sum ``S = sum_i (delta_i - p) a_i``, with ``a_i`` the real or imaginary part of
``conj(A[i, c1]) A[i, c2]``, carries four Bernstein-type estimators (both tails
of both parts).  Two Chernoff estimators guard the row count from above and
below.  Each decision keeps the estimator total from increasing.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import logsumexp

from ._validation import check_positive_int
from .artifacts import write_artifact


class SubsampleError(RuntimeError):
    pass


def bernstein_mgf(a, lam, p):
    """``p exp(lam (1 - p) a) + (1 - p) exp(-lam p a)``: MGF of ``(delta - p) a`` for ``delta ~ Bernoulli(p)``."""
    return p * np.exp(lam * (1 - p) * np.asarray(a)) + (1 - p) * np.exp(-lam * p * np.asarray(a))


def _log_mgf(a, lam, p):
    # log of bernstein_mgf, stable for large |lam a|
    x = lam * np.asarray(a)
    return np.logaddexp(math.log(p) + (1 - p) * x, math.log1p(-p) - p * x)


@dataclass(frozen=True)
class SubsampleParams:
    """Sizes and temperatures.  ``m = C_m k^2 ceil(log2 n)`` and ``p = m / n``."""

    n: int
    k: int
    C_m: float = 2.0
    entry_bound: float = 1.0
    kappa: float = math.log(2)

    def __post_init__(self):
        check_positive_int(self.n, "n", minimum=2)
        check_positive_int(self.k, "k")
        if self.C_m <= 0 or self.kappa <= 0 or self.entry_bound <= 0:
            raise ValueError("C_m, kappa and entry_bound must be positive")
        if not 0 < self.p < 1:
            raise ValueError(f"p = m/n = {self.p:.4g} must lie in (0, 1); lower C_m")
        if not 0 < self.lam < 3 / self.eta:
            raise ValueError("Bernstein temperature out of range")

    @property
    def m(self):
        return self.C_m * self.k**2 * math.ceil(math.log2(self.n))

    @property
    def p(self):
        return self.m / self.n

    @property
    def t(self):
        return self.m / (self.k * self.n)

    @property
    def part_threshold(self):
        """Per-part threshold ``t / sqrt 2`` on real and imaginary parts."""
        return self.t / math.sqrt(2)

    @property
    def eta(self):
        return self.entry_bound**2 / self.n

    @property
    def lam(self):
        tp, eta, p = self.part_threshold, self.eta, self.p
        return tp / (self.n * eta**2 * p * (1 - p) + tp * eta / 3)


@dataclass(frozen=True, eq=False)
class RowSelection:
    rows: np.ndarray
    n: int
    normalization: np.ndarray = field(repr=False)
    certified_bound: float
    params: SubsampleParams = None

    def __len__(self):
        return int(self.rows.size)

    def save(self, path, **fields):
        head = {"n": self.n, "count": len(self), "certified_bound": float(self.certified_bound)}
        if self.params is not None:
            head.update(k=self.params.k, m=float(self.params.m), C_m=float(self.params.C_m))
        write_artifact(path, "rows", {**head, **fields}, map(str, self.rows.tolist()))


@dataclass(frozen=True)
class IncoherenceReport:
    incoherence: float
    pair: tuple


def dft_rows(n):
    """Row generator of the unitary DFT; the full matrix is never formed."""
    cols = np.arange(n)

    def row(i):
        return np.exp(2j * np.pi * ((i * cols) % n) / n) / math.sqrt(n)

    return row


def _row_source(A, n):
    if A is None:
        return dft_rows(n)
    if callable(A):
        return A
    A = np.asarray(A, dtype=np.complex128)
    if A.shape != (n, n):
        raise ValueError(f"matrix must be {n}x{n}, got {A.shape}")
    return lambda i: A[i]


def _pair_terms(row, iu, ju):
    prod = np.conj(row[iu]) * row[ju]
    return np.stack([prod.real, -prod.real, prod.imag, -prod.imag])  # (4, pairs)


def _count_logs(params):
    """Log initial Chernoff estimators for ``sum delta > 2m`` and ``sum delta < m/2``."""
    n, p, kap, m = params.n, params.p, params.kappa, params.m
    g_hi = -kap * 2 * m + n * math.log1p(p * math.expm1(kap))
    g_lo = kap * m / 2 + n * math.log1p(p * math.expm1(-kap))
    return g_hi, g_lo


class _State:
    """Running log-estimator pieces for every pair and both count guards."""

    def __init__(self, params, row, n):
        self.params = params
        self.row = row
        self.iu, self.ju = np.triu_indices(n, 1)
        lam, p = params.lam, params.p
        suffix = np.zeros((4, self.iu.size))
        for i in range(n):
            suffix += _log_mgf(_pair_terms(row(i), self.iu, self.ju), lam, p)
        self.suffix = suffix
        self.prefix = np.full_like(suffix, -lam * params.part_threshold)
        self.count = 0
        self.remaining = n

    def pair_log(self):
        return self.prefix + self.suffix

    def count_logs(self):
        p, kap, m = self.params.p, self.params.kappa, self.params.m
        rest = self.remaining
        hi = kap * (self.count - 2 * m) + rest * math.log1p(p * math.expm1(kap))
        lo = kap * (m / 2 - self.count) + rest * math.log1p(p * math.expm1(-kap))
        return hi, lo

    def candidate_logs(self, i):
        """Log estimator totals for ``delta_i = 0`` and ``delta_i = 1``, plus the pieces."""
        lam, p, kap, m = self.params.lam, self.params.p, self.params.kappa, self.params.m
        terms = _pair_terms(self.row(i), self.iu, self.ju)
        base_suffix = self.suffix - _log_mgf(terms, lam, p)
        rest = self.remaining - 1
        out = []
        for delta in (0, 1):
            pair = self.prefix + lam * (delta - p) * terms + base_suffix
            c = self.count + delta
            hi = kap * (c - 2 * m) + rest * math.log1p(p * math.expm1(kap))
            lo = kap * (m / 2 - c) + rest * math.log1p(p * math.expm1(-kap))
            out.append((pair, hi, lo))
        return terms, base_suffix, out

    def commit(self, delta, terms, base_suffix):
        self.prefix = self.prefix + self.params.lam * (delta - self.params.p) * terms
        self.suffix = base_suffix
        self.count += delta
        self.remaining -= 1


def _total(pair, hi, lo):
    return float(logsumexp(np.concatenate([pair.ravel(), [hi, lo]])))


def initial_condition(params, A=None):
    """``(log sum pair estimators, log(g + g'))`` at the start of the walk."""
    st = _State(params, _row_source(A, params.n), params.n)
    hi, lo = st.count_logs()
    return float(logsumexp(st.pair_log())), float(np.logaddexp(hi, lo))


def _passes(params, A):
    pair, count = initial_condition(params, A)
    return pair < -math.log(params.n) and count < -math.log(2), pair, count


def minimal_oversampling(n, k, A=None, step=0.25, **kw):
    """Smallest ``C_m`` on a ``step`` grid that satisfies the initial condition, or ``None``."""
    c = step
    while True:
        try:
            params = SubsampleParams(n, k, c, **kw)
        except ValueError:
            if c * k**2 * math.ceil(math.log2(n)) >= n:
                return None
            c += step
            continue
        if _passes(params, A)[0]:
            return c
        c += step


def subsample_derandomized(A, params, trace=None, decomposition_check=None):
    """Walk ``i = 0..n-1`` fixing ``delta_i`` to the value with the smaller estimator total.

    ``A`` is ``None`` (unitary DFT), a square array, or a row callback
    ``i -> row``.  ``trace`` receives the log estimator total before each step;
    ``decomposition_check`` receives the worst relative error of
    ``f_r = p f_{r+1}(1) + (1 - p) f_{r+1}(0)`` over all pair estimators per step.
    Ties keep the row.
    """
    n = params.n
    row = _row_source(A, n)
    ok, pair0, count0 = _passes(params, A)
    if not ok:
        need = minimal_oversampling(n, params.k, A, entry_bound=params.entry_bound, kappa=params.kappa)
        hint = f"C_m >= {need}" if need is not None else "no C_m with m < n works"
        raise SubsampleError(
            f"initial condition fails: log pair sum {pair0:.3f} (need < {-math.log(n):.3f}), "
            f"log count sum {count0:.3f} (need < {-math.log(2):.3f}); {hint}"
        )
    st = _State(params, row, n)
    rows = []
    for i in range(n):
        current = st.pair_log()
        hi, lo = st.count_logs()
        if trace is not None:
            trace.append(_total(current, hi, lo))
        terms, base_suffix, (c0, c1) = st.candidate_logs(i)
        if decomposition_check is not None:
            mix = np.logaddexp(math.log(params.p) + c1[0], math.log1p(-params.p) + c0[0])
            decomposition_check.append(float(np.max(np.abs(np.expm1(mix - current)))))
        t0, t1 = _total(*c0), _total(*c1)
        delta = 1 if t1 <= t0 else 0
        st.commit(delta, terms, base_suffix)
        if delta:
            rows.append(i)
    hi, lo = st.count_logs()
    final = _total(st.pair_log(), hi, lo)
    if trace is not None:
        trace.append(final)
    if final >= 0:
        raise SubsampleError("estimator total ended >= 1; arithmetic is inconsistent")
    rows = np.array(rows, dtype=np.int64)
    norms = _column_norms(row, rows, n)
    bound = math.sqrt(2) * params.t / float(np.min(norms**2))
    return RowSelection(rows, n, 1.0 / norms, bound, params)


def _column_norms(row, rows, n):
    sub = np.stack([row(i) for i in rows]) if rows.size else np.zeros((0, n))
    return np.sqrt((np.abs(sub) ** 2).sum(axis=0))


def verify_incoherence(selection, A=None):
    """Largest ``|<c1, c2>|`` over distinct normalised columns of the selected rows, by brute force."""
    n = selection.n
    row = _row_source(A, n)
    rows = np.asarray(selection.rows)
    if rows.size == 0:
        raise ValueError("empty selection")
    sub = np.stack([row(int(i)) for i in rows])
    norms = np.sqrt((np.abs(sub) ** 2).sum(axis=0))
    cols = sub / norms
    gram = np.abs(cols.conj().T @ cols)
    np.fill_diagonal(gram, -np.inf)
    idx = np.unravel_index(np.argmax(gram), gram.shape)
    return IncoherenceReport(float(gram[idx]), (int(min(idx)), int(max(idx))))
