"""Exact coefficient identities for the xi_N vector, field powers and normal ordering.

Coefficients are exact ``Fraction`` objects. The xi coefficients are stored
with their ``sqrt(N)`` power separated: ``xi_N^(l) = q_l * N^(-l/2)`` with
``q_l`` rational.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, TruncationRiskError


@dataclass(frozen=True)
class XiCoefficients:
    N: int
    rational: tuple  # q_l, exact

    @property
    def l_max(self) -> int:
        return len(self.rational) - 1

    def value(self, l) -> float:
        """Float rendering of ``q_l N^(-l/2)`` through logarithms (safe for large N)."""
        q = self.rational[l]
        if q == 0:
            return 0.0
        logv = math.log(abs(q.numerator)) - math.log(q.denominator) - 0.5 * l * math.log(self.N)
        return math.copysign(math.exp(logv), q)

    def values(self) -> np.ndarray:
        return np.array([self.value(l) for l in range(len(self.rational))])

    def __eq__(self, other):
        return isinstance(other, XiCoefficients) and self.N == other.N and self.rational == other.rational


def xi_direct(N: int, l_max: int) -> XiCoefficients:
    """``q_l = sum_j (-1)^j N^j binom(N, l-j) / j!``, the direct sum for the xi coefficients."""
    if N < 1:
        raise DomainError("N must be positive")
    if l_max > N:
        raise DomainError(f"l_max = {l_max} exceeds N = {N}")
    # binom(N, r) built incrementally, r = 0..l_max
    binoms = [1]
    for r in range(1, l_max + 1):
        binoms.append(binoms[-1] * (N - r + 1) // r)
    qs = []
    for l in range(l_max + 1):
        acc = Fraction(0)
        term_pow = Fraction(1)  # (-N)^j / j!
        for j in range(l + 1):
            acc += term_pow * binoms[l - j]
            term_pow = term_pow * (-N) / (j + 1)
        qs.append(acc)
    return XiCoefficients(N, tuple(qs))


def xi_recursive(N: int, l_max: int) -> XiCoefficients:
    """Three-term recursion ``q_l = ((1-l)/l) q_{l-1} - (N/l) q_{l-2}``, seeded with ``q_0 = 1, q_1 = 0``."""
    if N < 1:
        raise DomainError("N must be positive")
    if l_max < 0:
        raise DomainError("l_max must be nonnegative")
    qs = [Fraction(1), Fraction(0)]
    for l in range(2, l_max + 1):
        qs.append(Fraction(1 - l, l) * qs[l - 1] - Fraction(N, l) * qs[l - 2])
    return XiCoefficients(N, tuple(qs[: l_max + 1]))


def xi_limit(m: int, odd: bool = False) -> Fraction:
    """Large-N limit of the index-``2m`` coefficient, ``(-1)^m / (2^m m!)``; index ``2m+1`` tends to 0."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    if odd:
        return Fraction(0)
    return Fraction((-1) ** m, 2 ** m * math.factorial(m))


def field_power_coefficient(l: int, m: int) -> Fraction:
    """``(2l)! / ((2m)! (l-m)! 2^(l-m))``."""
    if not 0 <= m <= l:
        return Fraction(0)
    return Fraction(math.factorial(2 * l), math.factorial(2 * m) * math.factorial(l - m) * 2 ** (l - m))


def expand_field_power(l: int, F_norm2) -> dict:
    """Coefficients ``c_m`` in ``(a(F) + a*(F))^(2l) Omega = sum_m c_m a*(F)^(2m) Omega``.

    ``F_norm2`` is converted exactly to a ``Fraction`` so the result is exact.
    """
    if l < 0:
        raise DomainError("l must be nonnegative")
    s = Fraction(F_norm2)
    return {m: field_power_coefficient(l, m) * s ** (l - m) for m in range(l + 1)}


def field_power_step(coeffs: dict, F_norm2) -> dict:
    """One application of ``(a + a*)^2`` to ``sum_m c_m a*^(2m) Omega``, using ``[a(F), a*(F)] = |F|^2``.

    ``(a + a*)^2 a*^n Omega = a*^(n+2) + (2n+1) s a*^n + n(n-1) s^2 a*^(n-2)``.
    """
    s = Fraction(F_norm2)
    out = {}
    for m, c in coeffs.items():
        n = 2 * m
        out[m + 1] = out.get(m + 1, 0) + c
        out[m] = out.get(m, 0) + (2 * n + 1) * s * c
        if m > 0:
            out[m - 1] = out.get(m - 1, 0) + n * (n - 1) * s * s * c
    return {m: c for m, c in sorted(out.items()) if c != 0}


def wick_count(k: int) -> int:
    """Number of pair partitions of ``k`` elements: ``(k-1)!!`` for even ``k``, else 0."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k % 2:
        return 0
    out = 1
    for j in range(k - 1, 0, -2):
        out *= j
    return out


def single_mode_operators(f, n_max):
    """Dense ``a(F)``, ``a*(F)`` for ``F = f e_0`` on the single-mode space truncated at ``n_max``."""
    n = np.arange(1, n_max + 1)
    b = np.diag(np.sqrt(n), 1).astype(complex)
    return np.conj(f) * b, f * b.conj().T


def brute_force_field_power(l: int, f=1.0, n_max: int = 12) -> dict:
    """``(a + a*)^(2l) Omega`` on the truncated single-mode space, read off in the ``a*^(2m) Omega`` basis."""
    if 2 * l > n_max:
        raise TruncationRiskError(f"2l = {2 * l} exceeds the truncation {n_max}")
    a, ad = single_mode_operators(f, n_max)
    psi = np.zeros(n_max + 1, dtype=complex)
    psi[0] = 1.0
    X = a + ad
    for _ in range(2 * l):
        psi = X @ psi
    # a*(F)^n Omega = f^n sqrt(n!) |n>
    return {m: psi[2 * m] / (f ** (2 * m) * math.sqrt(math.factorial(2 * m))) for m in range(l + 1)}


def ladder_field_power(l: int, F_norm2=1, n_max: int = 12) -> dict:
    """Exact twin of :func:`brute_force_field_power` in the unnormalized ``a*^n Omega`` basis.

    There ``a* e_n = e_{n+1}`` and ``a e_n = n |F|^2 e_{n-1}``, so the
    truncated single-mode matrices are rational and no roundoff enters.
    """
    if 2 * l > n_max:
        raise TruncationRiskError(f"2l = {2 * l} exceeds the truncation {n_max}")
    s = Fraction(F_norm2)
    vec = [Fraction(0)] * (n_max + 1)
    vec[0] = Fraction(1)
    for _ in range(2 * l):
        new = [Fraction(0)] * (n_max + 1)
        for n, c in enumerate(vec):
            if c == 0:
                continue
            if n + 1 <= n_max:
                new[n + 1] += c
            if n > 0:
                new[n - 1] += n * s * c
        vec = new
    if any(vec[n] != 0 for n in range(1, n_max + 1, 2)):
        raise AssertionError("odd components in an even power")
    return {m: vec[2 * m] for m in range(l + 1)}


def normal_ordered_power(k: int, a, ad) -> np.ndarray:
    """``:(a + a*)^k:`` by expanding all words and moving creation operators to the left."""
    dim = a.shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    cache = {}
    for word in itertools.product((0, 1), repeat=k):  # 1 = creation
        nc = sum(word)
        if nc not in cache:
            cache[nc] = np.linalg.matrix_power(ad, nc) @ np.linalg.matrix_power(a, k - nc)
        out += cache[nc]
    return out


def _random_state(rng, n_support, dim):
    v = np.zeros(dim, dtype=complex)
    v[: n_support + 1] = rng.normal(size=n_support + 1) + 1j * rng.normal(size=n_support + 1)
    return v / np.linalg.norm(v)


def _normal_order_trial(l, rng, n_support, n_max):
    f = complex(rng.normal(), rng.normal())
    s = abs(f) ** 2
    a, ad = single_mode_operators(f, n_max)
    psi1 = _random_state(rng, n_support, n_max + 1)
    psi2 = _random_state(rng, n_support, n_max + 1)
    X = a + ad
    v = psi2.copy()
    for _ in range(2 * l):
        v = X @ v
        if abs(v[-1]) > 0:
            raise TruncationRiskError("trial vector reached the truncation")
    rhs = np.vdot(psi1, v)
    lhs = 0.0
    for m in range(l + 1):
        c = float(field_power_coefficient(l, m)) * s ** (l - m)
        lhs += c * np.vdot(psi1, normal_ordered_power(2 * m, a, ad) @ psi2)
    return abs(lhs - rhs) / max(abs(rhs), abs(lhs), 1e-300)


def normal_order_check(l: int, trials: int = 100, seed: int = 0, n_support: int = 4, n_max: int = 24) -> float:
    """Worst relative discrepancy of the normal-ordering sum identity over random single-mode trials.

    Trials whose vectors reach the truncation are discarded and re-drawn.
    """
    if l < 0:
        raise DomainError("l must be nonnegative")
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = redrawn = 0
    while done < trials:
        try:
            err = _normal_order_trial(l, rng, n_support, n_max)
        except TruncationRiskError:
            redrawn += 1
            if redrawn > 10 * trials:
                raise
            n_max += 2 * l
            continue
        worst = max(worst, err)
        done += 1
    return worst


def selftest(seed: int = 0) -> list:
    """Run the identity oracles; rows of ``(name, worst error, tolerance, passed)``."""
    rows = []
    worst = 0.0
    for N in (1, 2, 5, 17, 100, 1000):
        l_max = min(20, N)
        d, r = xi_direct(N, l_max), xi_recursive(N, l_max)
        worst = max(worst, max(abs(float(x - y)) for x, y in zip(d.rational, r.rational)))
    rows.append(("xi direct vs recursive", worst, 0.0, worst == 0.0))

    worst = 0.0
    for l in range(6):
        exact = expand_field_power(l, 1)
        brute = brute_force_field_power(l)
        worst = max(worst, max(abs(complex(brute[m]) - float(exact[m])) / float(exact[m]) for m in exact))
    rows.append(("field power vs single-mode oracle", worst, 1e-12, worst <= 1e-12))

    mismatch = sum(ladder_field_power(l, Fraction(3, 2)) != expand_field_power(l, Fraction(3, 2)) for l in range(6))
    rows.append(("field power vs exact ladder", float(mismatch), 0.0, mismatch == 0))

    worst = 0.0
    coeffs = {0: Fraction(1)}
    s = Fraction(3, 2)
    for l in range(1, 8):
        coeffs = field_power_step(coeffs, s)
        worst = max(worst, max(abs(float(coeffs.get(m, 0) - c)) for m, c in expand_field_power(l, s).items()))
    rows.append(("field power induction step", worst, 0.0, worst == 0.0))

    for l in (1, 2, 3):
        err = normal_order_check(l, trials=100, seed=seed + l)
        rows.append((f"normal ordering l={l}", float(err), 1e-10, bool(err <= 1e-10)))

    brute = [_count_pairings(k) for k in range(9)]
    worst = max(abs(brute[k] - wick_count(k)) for k in range(9))
    rows.append(("pair partitions k<=8", float(worst), 0.0, worst == 0))
    return rows


def _count_pairings(k) -> int:
    """Perfect matchings of ``k`` labelled elements by recursive enumeration."""
    def rec(items):
        if not items:
            return 1
        rest = items[1:]
        return sum(rec(rest[:i] + rest[i + 1:]) for i in range(len(rest)))
    if k % 2:
        return 0
    return rec(tuple(range(k)))
