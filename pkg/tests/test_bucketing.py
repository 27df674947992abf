import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from detsft.bucketing import (
    SampleAccess,
    SampleAccessError,
    SampleSet,
    estimate_from_bucket,
    hash_to_bins,
    measure_exact,
    modulation_set,
    sample_indices,
    sample_positions,
)
from detsft.filters import build_filter
from detsft.forge import ForgeParams, choose_d_lambda, forge_derandomized
from detsft.hashing import HashingTriple, bucket_of
from detsft.oracles import exact_dft, exact_idft, head_counts

from conftest import designed


def _triple(rng, n, a=None):
    a = int(rng.integers(n)) if a is None else a
    return HashingTriple(int(2 * rng.integers(n // 2) + 1), a, int(rng.integers(n)), n)


def _random_signal(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def test_measure_single_tone():
    n, B = 32, 4
    filt = build_filter(n, B, 4)
    t = HashingTriple(5, 3, 7, n)
    f0 = 11
    x_hat = np.zeros(n, dtype=complex)
    x_hat[f0] = 1
    m = measure_exact(x_hat, t, filt)
    s = np.arange(B)
    pi = (5 * (f0 - 7)) % n
    expected = filt.freq_response[(pi - 8 * s) % n] * np.exp(2j * np.pi * ((3 * 5 * f0) % n) / n)
    np.testing.assert_allclose(m.values, expected, atol=1e-15)
    assert m.delta_bound == 0


def test_measure_zero():
    filt = build_filter(32, 4, 4)
    assert not measure_exact(np.zeros(32), HashingTriple(1, 0, 0, 32), filt).values.any()


@pytest.mark.parametrize("n,B", [(16, 4), (64, 8)])
def test_cross_path_agreement(n, B):
    rng = np.random.default_rng(n)
    filt = build_filter(n, B, 4)
    for _ in range(100):
        x = _random_signal(rng, n)
        x_hat = exact_dft(x)
        t = _triple(rng, n)
        supp = rng.choice(n, 3, replace=False)
        z = {int(f): complex(rng.normal(), rng.normal()) for f in supp}
        z_dense = np.zeros(n, dtype=complex)
        z_dense[supp] = list(z.values())
        got = hash_to_bins(x, z, t, filt)
        want = measure_exact(x_hat - z_dense, t, filt)
        assert np.abs(got.values - want.values).max() <= got.delta_bound


def test_full_cancellation():
    rng = np.random.default_rng(3)
    n = 64
    filt = build_filter(n, 8, 4)
    x = _random_signal(rng, n)
    z = dict(enumerate(exact_dft(x)))
    b = hash_to_bins(x, z, _triple(rng, n), filt)
    assert np.all(np.abs(b.values) <= b.delta_bound)
    l2 = np.linalg.norm(list(z.values()))
    assert b.delta_bound <= l2  # rounding allowance only; the tail term vanishes at this scale


def test_single_tone_isolation():
    n, B = 64, 8
    filt = build_filter(n, B, 4)
    rng = np.random.default_rng(4)
    for _ in range(20):
        f0 = int(rng.integers(n))
        t = _triple(rng, n, a=0)
        x_hat = np.zeros(n, dtype=complex)
        x_hat[f0] = 1
        u = hash_to_bins(exact_idft(x_hat), {}, t, filt).values
        h = bucket_of(t, B, f0)
        assert abs(u[h]) >= 1 - filt.epsilon
        far = [s for s in range(B) if min((s - h) % B, (h - s) % B) >= 2]
        assert np.all(np.abs(u[far]) <= filt.epsilon)


@given(st.integers(0, 2**31))
@settings(max_examples=20, deadline=None)
def test_linearity(seed):
    rng = np.random.default_rng(seed)
    n = 32
    filt = build_filter(n, 4, 2)
    t = _triple(rng, n)
    x, y = _random_signal(rng, n), _random_signal(rng, n)
    lhs = hash_to_bins(x + y, {}, t, filt).values
    rhs = hash_to_bins(x, {}, t, filt).values + hash_to_bins(y, {}, t, filt).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_mismatched_n():
    filt = build_filter(32, 4, 2)
    with pytest.raises(ValueError):
        hash_to_bins(np.zeros(64), {}, HashingTriple(1, 0, 0, 64), filt)


def test_missing_samples_raise():
    n = 64
    filt = build_filter(n, 8, 4)
    t = HashingTriple(3, 0, 1, n)
    x = np.arange(n, dtype=complex)
    needed = sample_indices(t, filt)
    ok = SampleAccess.from_signal(x, needed)
    np.testing.assert_allclose(hash_to_bins(ok, {}, t, filt).values, hash_to_bins(x, {}, t, filt).values)
    short = SampleAccess.from_signal(x, needed[1:])
    with pytest.raises(SampleAccessError):
        hash_to_bins(short, {}, t, filt)


def test_single_triple_positions():
    filt = build_filter(256, 8, 4)
    t = HashingTriple(7, 0, 3, 256)
    from detsft.hashing import HashingSchedule

    s = sample_positions(HashingSchedule([t], 8, 4), filt)
    assert len(s) == filt.support_length
    assert s.provenance(int(s.indices[0])) == [(0, 0)]


def test_sample_budgets_at_256():
    filt, schedule = designed(256, 2)
    lin = sample_positions(schedule, filt)
    sub = sample_positions(schedule, filt, modulation_set(256))
    L = filt.support_length
    assert len(lin) <= schedule.d * L
    assert len(sub) <= schedule.d * L * (np.log2(256) + 1)
    assert set(lin.indices.tolist()) <= set(sub.indices.tolist())
    assert len(lin.uses) == schedule.d * L


def test_sample_set_round_trip(tmp_path):
    filt, schedule = designed(256, 2)
    s = sample_positions(schedule, filt)
    path = tmp_path / "S.txt"
    s.save(path)
    n, idx = SampleSet.load_indices(path)
    assert n == 256
    np.testing.assert_array_equal(idx, s.indices)
    np.testing.assert_array_equal(sample_positions(schedule, filt).indices, idx)


def test_modulation_set():
    assert modulation_set(16) == (0, 1, 2, 4, 8)


def test_estimate_single_tone():
    n, B = 64, 8
    filt = build_filter(n, B, 4)
    rng = np.random.default_rng(5)
    for _ in range(30):
        f = int(rng.integers(n))
        c = complex(rng.normal(), rng.normal())
        x_hat = np.zeros(n, dtype=complex)
        x_hat[f] = c
        t = _triple(rng, n)
        est = estimate_from_bucket(measure_exact(x_hat, t, filt), filt, f)
        assert abs(est - c) <= 2 * filt.epsilon * abs(c)
        assert abs(est - c) <= 1e-12 * abs(c)  # with no other mass the correction is exact


def test_estimate_zero_bucket():
    filt = build_filter(32, 4, 2)
    t = HashingTriple(1, 0, 0, 32)
    assert estimate_from_bucket(measure_exact(np.zeros(32), t, filt), filt, 5) == 0


def test_head_count_on_forged_schedule():
    n, B, F = 64, 8, 4
    filt = build_filter(n, B, F)
    d, lam = choose_d_lambda(n, B, filt=filt)
    schedule = forge_derandomized(ForgeParams(n, B, F, d, lam), filt)
    rng = np.random.default_rng(6)
    for _ in range(5):
        x_hat = _random_signal(rng, n) * rng.exponential(size=n) ** 2
        assert head_counts(x_hat, schedule, filt).min() >= 0.8 * d


def test_head_count_matches_hash_to_bins_path():
    n, B = 64, 8
    filt = build_filter(n, B, 4)
    rng = np.random.default_rng(7)
    x = _random_signal(rng, n)
    x_hat = exact_dft(x)
    from detsft.hashing import HashingSchedule

    trips = [_triple(rng, n, a=0) for _ in range(10)]
    counts = head_counts(x_hat, HashingSchedule(trips, B, 4), filt)
    f = np.arange(n)
    rest = np.abs(x_hat).sum() - np.abs(x_hat)
    alt = np.zeros(n, dtype=int)
    for t in trips:
        b = hash_to_bins(x, {}, t, filt)
        est = np.array([estimate_from_bucket(b, filt, int(ff)) for ff in f])
        alt += np.abs(est - x_hat) <= 10 / B * rest
    np.testing.assert_array_equal(counts, alt)
