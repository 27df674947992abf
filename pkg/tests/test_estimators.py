import numpy as np
import pytest
from sklearn.base import clone

from detsft.estimators import IncoherentRowSampler, SparseFourierRecovery, design_schedule
from detsft.oracles import guarantee_report

from conftest import random_spectrum, to_time


def test_get_params_and_clone():
    est = SparseFourierRecovery(k=3, mu=0.5, pipeline="sublinear")
    params = est.get_params()
    assert params["k"] == 3 and params["pipeline"] == "sublinear" and params["forge"] == "sample-verify"
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    assert clone(IncoherentRowSampler(k=2, C_m=2.0)).get_params()["C_m"] == 2.0


@pytest.mark.parametrize("pipeline", ["linear", "sublinear"])
def test_fit_transform_recovers(pipeline):
    rng = np.random.default_rng(0)
    spectra = np.stack([random_spectrum(rng, 64, 2, tail_l1=0.5) for _ in range(3)])
    X = np.stack([to_time(s) for s in spectra])
    est = SparseFourierRecovery(k=2, mu=0.25, snr_bound=1e4, pipeline=pipeline, forge="derandomized").fit(X)
    assert est.n_features_in_ == 64
    assert est.schedule_.B == 8
    out = est.transform(X)
    assert out.shape == X.shape
    for s, e in zip(spectra, out):
        assert guarantee_report(s, e, 2).linf_pass


def test_recover_reads_only_sample_set():
    est = SparseFourierRecovery(k=1, mu=1.0, forge="derandomized").fit(np.zeros((1, 32)))
    z = est.recover(np.zeros(32))
    assert len(z) == 0


def test_unfitted_and_unset_mu():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        SparseFourierRecovery().transform(np.zeros((1, 32)))
    est = SparseFourierRecovery(k=1, forge="derandomized").fit(np.zeros((1, 32)))
    with pytest.raises(ValueError, match="mu"):
        est.transform(np.zeros((1, 32)))
    with pytest.raises(ValueError):
        est.transform(np.zeros((1, 16)))


def test_bad_pipeline():
    with pytest.raises(ValueError):
        SparseFourierRecovery(pipeline="fast").fit(np.zeros((1, 32)))


def test_design_schedule_validation():
    with pytest.raises(ValueError):
        design_schedule(16, 4)
    with pytest.raises(ValueError):
        design_schedule(64, 2, mode="random")


def test_row_sampler():
    X = np.eye(64, dtype=complex)
    s = IncoherentRowSampler(k=2).fit(X)
    assert s.params_.C_m == 2.0
    out = s.transform(X[:2])
    assert out.shape == (2, len(s.rows_))
    np.testing.assert_allclose(out, X[:2][:, s.rows_] * np.sqrt(64 / len(s.rows_)))
