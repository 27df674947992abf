"""Explicit incoherent row selections of the p-point DFT, plus the number theory they need."""

from dataclasses import dataclass, field
import math

import numpy as np

from ._validation import check_positive_int, check_prime, is_prime
from .artifacts import write_artifact


@dataclass(frozen=True)
class PrimeField:
    p: int
    factors: tuple = field(init=False)

    def __post_init__(self):
        check_prime(self.p)
        if self.p == 2:
            raise ValueError("p must be an odd prime")
        object.__setattr__(self, "factors", tuple(factor_pminus1(self.p)))

    @property
    def prime_divisors(self):
        return tuple(q for q, _ in self.factors)


def _primes_upto(limit):
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve)


def factor_pminus1(p):
    """Prime factorisation of ``p - 1`` as ``[(prime, exponent), ...]`` by sieving up to ``sqrt(p - 1)``."""
    m = check_positive_int(p, "p", minimum=3) - 1
    out = []
    for q in _primes_upto(math.isqrt(m)).tolist():
        if m % q == 0:
            e = 0
            while m % q == 0:
                m //= q
                e += 1
            out.append((q, e))
    if m > 1:
        # nothing below the square root divides the cofactor, so it is prime
        assert is_prime(m), m
        out.append((m, 1))
    return out


def generator_search_cap(p):
    return min(p - 1, max(32, math.ceil(4 * p**0.25 * math.log(p) ** 2)))


def is_generator(z, field_):
    p = field_.p
    return z % p != 0 and all(pow(z, (p - 1) // q, p) != 1 for q in field_.prime_divisors)


def find_generator(field_):
    """Smallest generator of the multiplicative group mod ``p``."""
    if isinstance(field_, int):
        field_ = PrimeField(field_)
    if field_.p == 3:
        return 2
    cap = generator_search_cap(field_.p)
    for z in range(2, cap + 1):
        if is_generator(z, field_):
            return z
    raise RuntimeError(f"no generator found below the search cap {cap} for p={field_.p}")


def character_sums(rows, p):
    """``|sum_{r in rows} exp(2 pi i r t / p)|`` for every ``t`` in ``1..p-1``.

    Phases are reduced exactly mod ``p`` in integers before the trig call.
    """
    rows = np.asarray(rows, dtype=np.int64) % p
    t = np.arange(1, p, dtype=np.int64)
    out = np.empty(t.size)
    chunk = max(1, (1 << 22) // max(rows.size, 1))
    for lo in range(0, t.size, chunk):
        ph = 2 * np.pi * ((rows[None, :] * t[lo : lo + chunk, None]) % p) / p
        out[lo : lo + chunk] = np.hypot(np.cos(ph).sum(axis=1), np.sin(ph).sum(axis=1))
    return out


def selection_incoherence(rows, p):
    """Normalised-column incoherence of DFT rows ``rows`` (a multiset) via the difference identity."""
    rows = np.asarray(rows)
    if rows.size == 0:
        raise ValueError("empty row set")
    return float(character_sums(rows, p).max() / rows.size)


def brute_force_incoherence(rows, p):
    """Same quantity by forming every pair of normalised columns (``O(p^2 |rows|)``)."""
    rows = np.asarray(rows, dtype=np.int64) % p
    cols = np.arange(p)
    sub = np.exp(2j * np.pi * ((rows[:, None] * cols[None, :]) % p) / p) / math.sqrt(rows.size)
    gram = np.abs(sub.conj().T @ sub)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


@dataclass(frozen=True, eq=False)
class ExplicitSelection:
    """DFT rows (repetitions allowed) with the normalising scale and a certified incoherence bound."""

    p: int
    row_multiset: tuple
    certified_bound: float
    measured: float
    kind: str
    envelope: float = float("nan")

    @property
    def m(self):
        return len(self.row_multiset)

    @property
    def scale(self):
        """Factor ``sqrt(p / m)`` that makes the selected unitary-DFT columns unit norm."""
        return math.sqrt(self.p / self.m)

    @property
    def rows(self):
        return sorted(set(self.row_multiset))

    def save(self, path, **fields):
        head = {
            "kind": self.kind,
            "p": self.p,
            "m": self.m,
            "certified_bound": float(self.certified_bound),
            "measured": float(self.measured),
        }
        write_artifact(path, "rows", {**head, **fields}, map(str, self.row_multiset))


def quadratic_residues(p):
    """Squares mod ``p`` including 0, ascending."""
    p = check_prime(p)
    return sorted({(x * x) % p for x in range(p)})


def quadratic_residue_rows(p):
    if check_prime(p) == 2:
        raise ValueError("p must be an odd prime")
    Q = quadratic_residues(p)
    bound = (0.5 + math.sqrt(p)) / ((p + 1) / 2)
    return ExplicitSelection(p, tuple(Q), bound, selection_incoherence(Q, p), "gauss")


def weyl_envelope(p, degree, m, eps=0.0):
    """``m^eps (1/m + p/m^degree)^(2^(1 - degree))`` with unit constant (reporting only)."""
    return m**eps * (1 / m + p / m**degree) ** (2.0 ** (1 - degree))


def weyl_polynomial_rows(p, degree, m, coeffs=None):
    """Rows ``g(x) mod p`` for ``x = 0..m-1``, ``g`` given by integer coefficients (lowest first).

    The certificate is the exhaustively computed incoherence; the asymptotic
    envelope is attached for comparison only.
    """
    p = check_prime(p)
    degree = check_positive_int(degree, "degree", minimum=2)
    m = check_positive_int(m, "m")
    if m > p:
        raise ValueError(f"m={m} exceeds p={p}")
    coeffs = [0] * degree + [1] if coeffs is None else [int(c) for c in coeffs]
    if len(coeffs) != degree + 1:
        raise ValueError(f"need {degree + 1} coefficients, got {len(coeffs)}")
    if coeffs[-1] % p == 0:
        raise ValueError("leading coefficient vanishes mod p")
    rows = tuple(sum(c * pow(x, j, p) for j, c in enumerate(coeffs)) % p for x in range(m))
    measured = selection_incoherence(rows, p)
    return ExplicitSelection(p, rows, measured, measured, "weyl", weyl_envelope(p, degree, m))


def subgroup_rows(p, d):
    """The order-``d`` multiplicative subgroup, generated by ``g^((p-1)/d)``."""
    fld = PrimeField(p)
    d = check_positive_int(d, "d")
    if (p - 1) % d:
        raise ValueError(f"d={d} does not divide p-1={p - 1}")
    if d * d <= p:
        raise ValueError(f"d={d} must exceed sqrt(p)={math.sqrt(p):.3f}")
    h = pow(find_generator(fld), (p - 1) // d, p)
    rows, a = [], 1
    for _ in range(d):
        rows.append(a)
        a = a * h % p
    return ExplicitSelection(p, tuple(rows), math.sqrt(p) / d, selection_incoherence(rows, p), "subgroup")
