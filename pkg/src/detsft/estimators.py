"""Estimator-style wrappers: fit forges the measurement design, transform recovers spectra."""

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_power_of_two, check_signals
from .bucketing import SampleAccess, modulation_set, sample_positions
from .filters import build_filter
from .forge import ForgeParams, bucket_count, choose_d_lambda, forge_derandomized, forge_sample_verify
from .recovery import RecoveryParams, ensure_certified, recover_linear
from .subsample import SubsampleParams, minimal_oversampling, subsample_derandomized
from .sublinear import recover_sublinear

PIPELINES = {"linear": recover_linear, "sublinear": recover_sublinear}
FORGE_MODES = ("derandomized", "sample-verify")


def design_schedule(n, k, F=4, bucket_factor=2, mode="sample-verify", seed=0):
    """Filter plus certified schedule for length ``n`` and sparsity ``k``."""
    check_power_of_two(n, "n")
    if mode not in FORGE_MODES:
        raise ValueError(f"mode must be one of {FORGE_MODES}, got {mode!r}")
    B = bucket_count(k, bucket_factor)
    if B >= n:
        raise ValueError(f"n={n} is too small for k={k}: needs more than {B} frequencies")
    filt = build_filter(n, B, F)
    d, lam = choose_d_lambda(n, B, filt=filt)
    params = ForgeParams(n, B, F, d, lam)
    schedule = forge_derandomized(params, filt) if mode == "derandomized" else forge_sample_verify(params, filt, seed)
    ensure_certified(schedule, filt)
    return filt, schedule


class SparseFourierRecovery(TransformerMixin, BaseEstimator):
    """Recover ``k``-sparse-plus-tail spectra from a deterministic set of time samples.

    ``fit`` only looks at the signal length: it builds the flat filter and a
    certified hashing schedule.  ``transform`` maps each row of ``X`` (time
    signals) to a dense estimate of its unitary spectrum.  ``mu`` is the tail
    scale ``||x_hat_{-k}||_1 / k`` (or an upper bound) and ``snr_bound`` an
    upper bound on ``||x_hat||_1 / mu``.
    """

    def __init__(self, k=2, mu=None, snr_bound=1e6, pipeline="linear", forge="sample-verify",
                 F=4, bucket_factor=2, seed=0):
        self.k = k
        self.mu = mu
        self.snr_bound = snr_bound
        self.pipeline = pipeline
        self.forge = forge
        self.F = F
        self.bucket_factor = bucket_factor
        self.seed = seed

    def fit(self, X, y=None):
        X = check_signals(X)
        if self.pipeline not in PIPELINES:
            raise ValueError(f"pipeline must be one of {sorted(PIPELINES)}, got {self.pipeline!r}")
        self.n_features_in_ = X.shape[1]
        self.filter_, self.schedule_ = design_schedule(
            X.shape[1], self.k, self.F, self.bucket_factor, self.forge, self.seed
        )
        mods = modulation_set(self.n_features_in_) if self.pipeline == "sublinear" else (0,)
        self.sample_set_ = sample_positions(self.schedule_, self.filter_, mods)
        return self

    def _params(self):
        if self.mu is None:
            raise ValueError("mu (tail scale) must be set before recovering")
        return RecoveryParams(self.k, float(self.mu), float(self.snr_bound))

    def recover(self, x):
        """:class:`~detsft.recovery.SparseApproximation` for one signal, reading only ``sample_set_``."""
        check_is_fitted(self, "schedule_")
        x = check_signals(x, self.n_features_in_)
        if x.shape[0] != 1:
            raise ValueError("recover takes a single signal")
        access = SampleAccess.from_signal(x[0], self.sample_set_.indices)
        return PIPELINES[self.pipeline](access, self._params(), self.schedule_, self.filter_)

    def transform(self, X):
        check_is_fitted(self, "schedule_")
        X = check_signals(X, self.n_features_in_)
        return np.stack([self.recover(row).to_dense() for row in X])


class IncoherentRowSampler(TransformerMixin, BaseEstimator):
    """Deterministic row subset of the unitary DFT (or any bounded orthonormal matrix).

    ``fit(X)`` reads the dimension from ``X`` (an ``n x n`` matrix, or signals
    of length ``n`` when ``matrix`` is left as ``None`` to mean the DFT).
    ``transform`` keeps the selected coordinates of each row, rescaled so the
    selected DFT columns have unit norm.
    """

    def __init__(self, k=2, C_m=None, kappa=math.log(2), matrix=None):
        self.k = k
        self.C_m = C_m
        self.kappa = kappa
        self.matrix = matrix

    def fit(self, X, y=None):
        X = check_signals(X)
        n = X.shape[1]
        C_m = self.C_m
        if C_m is None:
            C_m = minimal_oversampling(n, self.k, self.matrix, kappa=self.kappa)
            if C_m is None:
                raise ValueError(f"no oversampling constant with m < n works for n={n}, k={self.k}")
        self.params_ = SubsampleParams(n, self.k, C_m, kappa=self.kappa)
        self.selection_ = subsample_derandomized(self.matrix, self.params_)
        self.rows_ = self.selection_.rows
        self.n_features_in_ = n
        return self

    def transform(self, X):
        check_is_fitted(self, "rows_")
        X = check_signals(X, self.n_features_in_)
        return X[:, self.rows_] * math.sqrt(self.n_features_in_ / self.rows_.size)
