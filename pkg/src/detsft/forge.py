"""Forging hashing schedules that satisfy the pairwise collision condition.

For every ordered pair ``f != f2`` the schedule must satisfy

    sum_r G[o_{f,r}(f2)] / G[o_{f,r}(f)]  <=  2 d / B,

where ``G`` is the flat filter response and ``o`` the offset map.  The
derandomized forge fixes the triples one at a time by the method of
conditional expectations.  The pessimistic estimator of the bad event for a
pair is ``exp(lam * (acc - beta)) * M_c(lam) ** (d - r)`` with ``acc`` the
running ratio sum, ``beta = 2 d / B`` and ``M_c`` the exact moment generating
function of one ratio term for the pair's class ``c`` (the 2-adic valuation of
``f2 - f``; the offset law depends on nothing else).  Because ``M_c`` is exact
the estimator sum equals the average of the next round's sum over all
candidates, so the greedy minimum never increases it.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.special import logsumexp

from ._validation import check_positive_int, check_power_of_two
from .artifacts import read_artifact, write_artifact
from .filters import build_filter
from .hashing import HashingSchedule, HashingTriple, offset

logger = logging.getLogger(__name__)

LAMBDA_GRID = tuple(np.round(np.arange(0.05, 3.0, 0.05), 2))
TIE_MARGIN = 1e-12


class ForgeError(RuntimeError):
    pass


@dataclass(frozen=True)
class ForgeParams:
    n: int
    B: int
    F: int
    d: int
    lam: float

    def __post_init__(self):
        check_power_of_two(self.n, "n")
        check_power_of_two(self.B, "B")
        check_positive_int(self.d, "d", minimum=1)
        if not 0 < self.lam < 3:
            raise ValueError(f"lam must lie in (0, 3), got {self.lam}")

    @property
    def beta(self):
        """Threshold on the ratio sum, ``2 d / B``."""
        return 2.0 * self.d / self.B


@dataclass(frozen=True)
class ConditionReport:
    passed: bool
    worst_pair: tuple
    worst_sum: float
    threshold: float

    @property
    def slack(self):
        return self.threshold - self.worst_sum


def bucket_count(k, factor=2):
    """Smallest power of two ``>= factor * 2k`` (the ``2k`` absorbs the final factor-two loss)."""
    check_positive_int(k, "k")
    return 1 << max(1, math.ceil(math.log2(factor * 2 * k)))


def mgf_bound(params, filt):
    """Closed-form upper bound ``M(lam)`` on ``E exp(lam * G[o])`` over a random hashing."""
    lam, eps = params.lam, filt.epsilon
    return math.exp(lam * eps) * ((2.0 / params.B + 1.0 / params.n) * math.expm1(lam * (1 - eps)) + 1.0)


def ratio_table(filt):
    """``T[D, z] = G[D + Z_z] / G[Z_z]`` where ``Z_z`` is the centred in-bucket offset of ``f``.

    ``D`` is ``sigma (f2 - f) mod n`` and ``z`` indexes ``pi(f) mod (n/B)``.
    """
    n, q = filt.n, filt.n // filt.B
    z = np.arange(q)
    Z = (z + q // 2) % q - q // 2
    G = filt.freq_response
    D = np.arange(n)
    return G[(D[:, None] + Z[None, :]) % n] / G[Z % n][None, :]


def pair_classes(n):
    """Class (2-adic valuation of ``f2 - f``) of every ordered pair; ``-1`` on the diagonal."""
    diff = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    cls = np.full((n, n), -1, dtype=np.int64)
    off = diff != 0
    v = diff[off]
    cls[off] = np.log2(v & -v).astype(np.int64)
    return cls


def class_log_mgf(filt, lam):
    """``log E exp(lam * T)`` for each valuation class, exact over ``sigma`` odd and all shifts."""
    n = filt.n
    T = ratio_table(filt)
    out = np.empty(int(math.log2(n)))
    for s in range(out.size):
        D = np.unique((2**s * np.arange(1, n, 2)) % n)
        out[s] = logsumexp(lam * T[D].ravel()) - math.log(T[D].size)
    return out


def _class_counts(n):
    logn = int(math.log2(n))
    return np.array([n * (n >> (s + 1)) for s in range(logn)], dtype=float)


def log_initial_estimate(filt, d, lam):
    """``log sum_{f != f2} h_0(f, f2)``."""
    lm = class_log_mgf(filt, lam)
    beta = 2.0 * d / filt.B
    return float(logsumexp(np.log(_class_counts(filt.n)) + d * lm - lam * beta))


def choose_d_lambda(n, B, F=4, filt=None, lambdas=LAMBDA_GRID):
    """Smallest ``d`` (a multiple of 10) with a ``lam`` making the initial estimator sum ``< 1``."""
    filt = filt if filt is not None else build_filter(n, B, F)
    counts = np.log(_class_counts(filt.n))
    best = None
    for lam in lambdas:
        rate = class_log_mgf(filt, lam) - 2.0 * lam / filt.B
        if np.any(rate >= 0):
            continue
        # every class term decays geometrically in d, so the sum is monotone
        lo, hi = 1, 10
        while logsumexp(counts + 10 * hi * rate) >= 0:
            hi *= 2
        while lo < hi:
            mid = (lo + hi) // 2
            if logsumexp(counts + 10 * mid * rate) < 0:
                hi = mid
            else:
                lo = mid + 1
        d = 10 * lo
        if best is None or d < best[0]:
            best = (d, float(lam))
    if best is None:
        raise ForgeError(f"no lambda in the grid gives a decaying estimator for n={n}, B={B}")
    return best


def pessimistic_estimate(params, filt, accumulated, r, log_mgf=None, pair_class=None):
    """Per-pair estimator ``exp(lam (acc - beta)) M(lam)^(d - r)``.

    With ``log_mgf`` / ``pair_class`` omitted the closed-form bound
    :func:`mgf_bound` is used for every pair; otherwise ``log_mgf[pair_class]``.
    """
    if not 0 <= r <= params.d:
        raise ValueError(f"r={r} outside [0, {params.d}]")
    acc = np.asarray(accumulated, dtype=float)
    if log_mgf is None:
        lm = math.log(mgf_bound(params, filt))
    else:
        lm = np.asarray(log_mgf)[pair_class]
    return np.exp(params.lam * (acc - params.beta) + (params.d - r) * lm)


def condition_sums(schedule, filt):
    """Left side of the collision condition for all ordered pairs, straight from the offsets."""
    n = schedule.n
    if filt.n != n or filt.B != schedule.B:
        raise ValueError("schedule and filter disagree on n or B")
    f = np.arange(n)
    G = filt.freq_response
    total = np.zeros((n, n))
    for t in schedule:
        own = G[offset(t, filt.B, f, f) % n]
        cross = G[offset(t, filt.B, f[:, None], f[None, :]) % n]
        total += cross / own[:, None]
    np.fill_diagonal(total, 0.0)
    return total


def verify_condition(schedule, filt):
    total = condition_sums(schedule, filt)
    idx = np.unravel_index(np.argmax(total), total.shape)
    threshold = 2.0 * schedule.d / schedule.B
    worst = float(total[idx])
    return ConditionReport(worst <= threshold, (int(idx[0]), int(idx[1])), worst, threshold)


def forge_derandomized(params, filt, trace=None):
    """Pick ``(sigma_r, b_r)`` round by round, minimising the estimator sum.

    Only ``b`` in ``[0, n/B)`` is scanned: shifting ``pi`` by a whole bucket
    width relabels buckets without changing any offset, so every ``b`` has a
    twin below ``n/B`` with an identical score and the smallest-``b`` tie rule
    selects it anyway.  ``trace``, if a list, receives ``log sum h_r`` for
    ``r = 0 .. d``.
    """
    n, B, d, lam = params.n, params.B, params.d, params.lam
    if filt.n != n or filt.B != B:
        raise ValueError("filter and params disagree on n or B")
    q = n // B
    log_h0 = log_initial_estimate(filt, d, lam)
    if log_h0 >= 0:
        need, _ = choose_d_lambda(n, B, filt=filt, lambdas=(lam,))
        raise ForgeError(
            f"initial estimator sum exp({log_h0:.3f}) >= 1 for d={d}, lam={lam}; "
            f"d >= {need} is needed at this lam"
        )
    T = ratio_table(filt)
    E = np.exp(lam * T)  # (n, q)
    lm = class_log_mgf(filt, lam)
    cls = pair_classes(n)
    off = cls >= 0
    beta = params.beta
    acc = np.zeros((n, n))
    f = np.arange(n)
    sigmas = np.arange(1, n, 2)
    chosen = []
    if trace is not None:
        trace.append(log_h0)
    for r in range(d):
        logw = np.where(off, lam * (acc - beta) + (d - r - 1) * lm[np.maximum(cls, 0)], -np.inf)
        shift = logw[off].max()
        W = np.exp(logw - shift)
        scores = np.empty((sigmas.size, q))
        for i, sigma in enumerate(sigmas):
            Dsig = (sigma * (f[None, :] - f[:, None])) % n  # sigma (f2 - f)
            V = np.einsum("ij,ijz->iz", W, E[Dsig])  # (f, z)
            # candidate b: pi(f) mod q = (sigma f - sigma b) mod q
            z = (sigma * (f[None, :] - np.arange(q)[:, None])) % q
            scores[i] = V[f[None, :], z].sum(axis=1)
        best = scores.min()
        flat = np.flatnonzero(scores.ravel() <= best * (1 + TIE_MARGIN))[0]
        i, b = divmod(int(flat), q)
        sigma = int(sigmas[i])
        chosen.append(HashingTriple(sigma, 0, b, n))
        zf = (sigma * (f - b)) % q
        acc += T[(sigma * (f[None, :] - f[:, None])) % n, zf[:, None]]
        if trace is not None:
            trace.append(math.log(best) + shift)
        logger.debug("round %d: sigma=%d b=%d log-estimator=%.6f", r, sigma, b, math.log(best) + shift)
    np.fill_diagonal(acc, 0.0)
    schedule = HashingSchedule(chosen, B, filt.F, lam)
    if acc.max() > beta:
        raise ForgeError("derandomized forge ended above threshold; estimator arithmetic is broken")
    return schedule


def forge_sample_verify(params, filt, seed, budget=64):
    """Draw ``d`` random triples from ``seed`` until :func:`verify_condition` passes."""
    rng = np.random.default_rng(seed)
    n = params.n
    for attempt in range(budget):
        sig = 2 * rng.integers(0, n // 2, size=params.d) + 1
        bs = rng.integers(0, n, size=params.d)
        schedule = HashingSchedule(
            [HashingTriple(int(s), 0, int(b), n) for s, b in zip(sig, bs)], params.B, filt.F, params.lam
        )
        report = verify_condition(schedule, filt)
        if report.passed:
            logger.info("sample-verify forge certified on attempt %d", attempt + 1)
            return schedule
        logger.debug("attempt %d failed: worst pair %s sum %.4f", attempt + 1, report.worst_pair, report.worst_sum)
    raise ForgeError(f"no certified schedule in {budget} draws; d={params.d} is too small")


def save_schedule(schedule, path, filt=None):
    """One ``r sigma a b`` line per triple; the header records the filter width when given."""
    fields = {"n": schedule.n, "B": schedule.B, "F": schedule.F, "d": schedule.d, "lambda": float(schedule.lam)}
    if filt is not None:
        fields["width"] = filt.width
    lines = (f"{r} {t.sigma} {t.a} {t.b}" for r, t in enumerate(schedule))
    return write_artifact(path, "schedule", fields, lines)


def load_schedule(path):
    """Inverse of :func:`save_schedule`; returns ``(schedule, header_fields)``."""
    fields, lines = read_artifact(path, "schedule")
    n = int(fields["n"])
    triples = []
    for r, line in enumerate(lines):
        idx, sigma, a, b = (int(v) for v in line.split())
        if idx != r:
            raise ValueError(f"{path}: triple {r} is labelled {idx}")
        triples.append(HashingTriple(sigma, a, b, n))
    schedule = HashingSchedule(triples, int(fields["B"]), int(fields["F"]), float(fields["lambda"]))
    return schedule, fields
