import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from detsft.artifacts import read_artifact
from detsft.subsample import (
    RowSelection,
    SubsampleError,
    SubsampleParams,
    bernstein_mgf,
    dft_rows,
    initial_condition,
    minimal_oversampling,
    subsample_derandomized,
    verify_incoherence,
)


def test_bernstein_examples():
    assert bernstein_mgf(0.0, 1.3, 0.2) == pytest.approx(1.0)
    assert bernstein_mgf(0.7, 0.0, 0.2) == pytest.approx(1.0)
    eta = 0.37
    assert bernstein_mgf(eta, 1.0, 0.5) == pytest.approx(math.cosh(eta / 2), rel=1e-15)


@given(st.floats(-1, 1), st.floats(0, 5), st.floats(0.01, 0.99))
def test_bernstein_is_an_mgf(a, lam, p):
    # zero-mean variable: Jensen gives M >= 1
    assert bernstein_mgf(a, lam, p) >= 1 - 1e-12


def test_params_derived_quantities():
    p = SubsampleParams(64, 2, 2.0)
    assert p.m == 48
    assert p.p == 0.75
    assert p.t == pytest.approx(48 / 128)
    assert p.eta == pytest.approx(1 / 64)
    assert 0 < p.lam < 3 / p.eta
    with pytest.raises(ValueError):
        SubsampleParams(64, 2, 3.0)  # p >= 1


@pytest.fixture(scope="module")
def small_run():
    params = SubsampleParams(64, 2, minimal_oversampling(64, 2))
    trace, decomp = [], []
    sel = subsample_derandomized(None, params, trace=trace, decomposition_check=decomp)
    return params, sel, trace, decomp


def test_minimal_oversampling_value():
    assert minimal_oversampling(64, 2) == 2.0
    params = SubsampleParams(64, 2, 1.75)
    with pytest.raises(SubsampleError, match="C_m >= 2.0"):
        subsample_derandomized(None, params)


def test_selection_is_incoherent(small_run):
    params, sel, _, _ = small_run
    report = verify_incoherence(sel)
    assert report.incoherence <= sel.certified_bound
    assert sel.certified_bound == pytest.approx(math.sqrt(2) * params.t * params.n / len(sel))


def test_row_count_bounds(small_run):
    params, sel, _, _ = small_run
    assert params.m / 2 <= len(sel) <= 2 * params.m
    assert np.all(np.diff(sel.rows) > 0)


def test_estimator_trace_monotone(small_run):
    _, _, trace, decomp = small_run
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
    assert trace[-1] < 0
    assert max(decomp) <= 1e-9


def test_dft_normalization_exact(small_run):
    _, sel, _, _ = small_run
    np.testing.assert_allclose(sel.normalization, math.sqrt(64 / len(sel)), rtol=1e-14)


def test_initial_condition_reported():
    pair, count = initial_condition(SubsampleParams(64, 2, 2.0))
    assert pair < -math.log(64) and count < -math.log(2)


def test_full_and_single_row_incoherence():
    n = 16
    full = RowSelection(np.arange(n), n, np.ones(n), 0.0)
    assert verify_incoherence(full).incoherence == pytest.approx(0, abs=1e-14)
    one = RowSelection(np.array([5]), n, np.ones(n), 1.0)
    assert verify_incoherence(one).incoherence == pytest.approx(1.0)


def test_matrix_input_matches_callback():
    n = 32
    k = 1
    c = minimal_oversampling(n, k)
    params = SubsampleParams(n, k, c)
    A = np.stack([dft_rows(n)(i) for i in range(n)])
    a = subsample_derandomized(A, params)
    b = subsample_derandomized(None, params)
    np.testing.assert_array_equal(a.rows, b.rows)


def test_pessimistic_estimator_dominates_monte_carlo():
    """Unconditional tail probabilities of the real-part sums never exceed their estimators."""
    n = 32
    params = SubsampleParams(n, 1, minimal_oversampling(n, 1))
    row = dft_rows(n)
    A = np.stack([row(i) for i in range(n)])
    rng = np.random.default_rng(0)
    delta = rng.random((20000, n)) < params.p
    lam, p, tp = params.lam, params.p, params.part_threshold
    for c1, c2 in [(0, 1), (3, 17), (5, 6)]:
        a = (np.conj(A[:, c1]) * A[:, c2]).real
        s = (delta - p) @ a
        bound = math.exp(-lam * tp) * np.prod(bernstein_mgf(a, lam, p))
        assert np.mean(s > tp) <= bound + 3 * math.sqrt(bound / 20000) + 1e-12


def test_save(tmp_path, small_run):
    _, sel, _, _ = small_run
    sel.save(tmp_path / "rows.txt")
    fields, lines = read_artifact(tmp_path / "rows.txt", "rows")
    assert [int(x) for x in lines] == sel.rows.tolist()
    assert int(fields["count"]) == len(sel)
