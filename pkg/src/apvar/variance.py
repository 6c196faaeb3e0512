"""Variance functionals over residue classes and their exponential-sum twin.

V(q) measures the mean-square deviation of progression sums from their
gcd-class averages; H(q) does the same for the exponential sums A(a/q)
over reduced residues.  The two are linked by the exact identity
q V(q) = sum_{d|q} H(d), which is the backbone of the test suite.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import (Sequence, divisors, mobius, ramanujan_sum, totient)

# Sequences longer than this always take the float path even when
# integer-valued; the exact path is the identity tester, not the scaler.
EXACT_N_LIMIT = 10_000


def residue_sums(seq: Sequence, q: int) -> np.ndarray:
    """t_a = sum of a_n over n <= N with n = a mod q, for a = 0..q-1."""
    n = seq.n
    res = np.arange(n + 1) % q
    return np.bincount(res, weights=seq.values, minlength=q)


def _gcd_classes(q: int) -> np.ndarray:
    return np.gcd(np.arange(q), q)


def _use_exact(seq: Sequence) -> bool:
    return seq.is_integer_valued and seq.n <= EXACT_N_LIMIT


@dataclass
class VarianceReport:
    q: int
    v: object  # float or Fraction
    method: str
    per_class_terms: dict | None = None

    def to_json(self) -> str:
        v = (f"{self.v.numerator}/{self.v.denominator}"
             if isinstance(self.v, Fraction) else float(self.v))
        return json.dumps({"q": self.q, "V": v, "method": self.method},
                          sort_keys=True)


@dataclass
class ExpVarianceReport:
    q: int
    h: object  # float or Fraction


def variance_mod_q(seq: Sequence, q: int, exact: bool | None = None) -> VarianceReport:
    """V(q): double sum over h|q and classes a with (a,q)=h.

    Uses the closed form V(q) = sum_a t_a^2 - sum_{h|q} S_h^2/phi(q/h),
    which follows from each gcd class containing exactly phi(q/h)
    residues.
    """
    if q < 1:
        raise ValueError("q must be positive")
    if exact is None:
        exact = _use_exact(seq)
    t = residue_sums(seq, q)
    g = _gcd_classes(q)
    per_class = {}
    if exact:
        ti = np.round(t).astype(np.int64)
        total = Fraction(0)
        sq = int(np.dot(ti, ti))
        for h in divisors(q):
            sh = int(ti[g == h].sum())
            per_class[h] = Fraction(sh)
            total += Fraction(sh * sh, totient(q // h))
        v = Fraction(sq) - total
        return VarianceReport(q=q, v=v, method="direct", per_class_terms=per_class)
    total = 0.0
    sq = float(np.dot(t, t))
    for h in divisors(q):
        sh = float(t[g == h].sum())
        per_class[h] = sh
        total += sh * sh / totient(q // h)
    v = sq - total
    # Guard against cancellation pushing slightly below zero.
    if v < 0 and v > -1e-9 * max(sq, 1.0):
        v = 0.0
    return VarianceReport(q=q, v=v, method="direct", per_class_terms=per_class)


def variance_total(seq: Sequence, q_max: int, q_min: int = 1, threads: int = 1) -> float:
    """Sum of V(q) over q_min <= q <= q_max (float path)."""

    def one(q):
        return float(variance_mod_q(seq, q, exact=False).v)

    qs = range(q_min, q_max + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return math.fsum(pool.map(one, qs))
    return math.fsum(one(q) for q in qs)


def _ramanujan_table(q: int) -> np.ndarray:
    """c_q(j) for j = 0..q-1 (depends only on gcd(j, q))."""
    g = _gcd_classes(q)
    vals = {h: ramanujan_sum(q, h) for h in divisors(q)}
    return np.array([vals[int(h)] for h in g], dtype=np.int64)


def exp_variance_H(seq: Sequence, q: int, exact: bool | None = None) -> ExpVarianceReport:
    """H(q): variance of A(a/q) over reduced residues a.

    Evaluated through the Ramanujan-sum bilinear form
    sum_{m,n} a_m a_n c_q(m-n) - |sum_n a_n c_q(n)|^2 / phi(q),
    grouping m, n into residue classes so the cost after the class sums
    is in the modulus, not the sequence length.
    """
    if q < 1:
        raise ValueError("q must be positive")
    if exact is None:
        exact = _use_exact(seq)
    t = residue_sums(seq, q)
    c = _ramanujan_table(q)
    phi_q = totient(q)
    if exact:
        ti = np.round(t).astype(np.int64)
        if q <= 2048:
            diff = (np.arange(q)[:, None] - np.arange(q)[None, :]) % q
            bilinear = int(ti @ c[diff] @ ti)
        else:
            bilinear = 0
            for d in range(q):
                bilinear += int(c[d]) * int(np.dot(ti, np.roll(ti, -d)))
        corr = int(np.dot(c, ti))
        h = Fraction(bilinear) - Fraction(corr * corr, phi_q)
        return ExpVarianceReport(q=q, h=h)
    # Circular autocorrelation u[d] = sum_i t_i t_{i+d mod q} via FFT.
    ft = np.fft.fft(t)
    u = np.fft.ifft(ft * np.conj(ft)).real
    bilinear = float(np.dot(c, u))
    corr = float(np.dot(c, t))
    h = bilinear - corr * corr / phi_q
    if h < 0 and h > -1e-9 * max(abs(bilinear), 1.0):
        h = 0.0
    return ExpVarianceReport(q=q, h=h)


@dataclass
class IdentityCheck:
    ok: bool
    residual: object
    bad_divisors: list

    def __bool__(self):
        return self.ok


def check_identity_prop1(seq: Sequence, q: int) -> IdentityCheck:
    """Verify q V(q) = sum_{d|q} H(d).

    Exact equality on the exact path; on the float path the residual
    must stay below 1e-6 * qV.  On failure, reports the divisors d whose
    H(d) disagrees with the Moebius-inverted form sum_{e|d} e V(e) mu(d/e).
    """
    exact = _use_exact(seq)
    v = variance_mod_q(seq, q, exact=exact).v
    lhs = q * v
    hs = {d: exp_variance_H(seq, d, exact=exact).h for d in divisors(q)}
    rhs = sum(hs.values())
    residual = lhs - rhs
    if exact:
        ok = residual == 0
    else:
        ok = abs(residual) <= 1e-6 * max(abs(lhs), 1.0)
    bad = []
    if not ok:
        for d in divisors(q):
            alt = sum(e * variance_mod_q(seq, e, exact=exact).v * mobius(d // e)
                      for e in divisors(d))
            delta = hs[d] - alt
            tol = 0 if exact else 1e-6 * max(abs(float(hs[d])), 1.0)
            if abs(delta) > tol:
                bad.append(d)
    return IdentityCheck(ok=bool(ok), residual=residual, bad_divisors=bad)


def _reduced_power_sum(seq: Sequence, d: int) -> float:
    """sum over (b,d)=1 of |A(b/d)|^2 via the DFT of residue sums mod d."""
    t = residue_sums(seq, d)
    amps = np.fft.fft(t)  # amps[b] = sum_j t_j e(-jb/d); |.|^2 is what we need
    power = np.abs(amps) ** 2
    coprime = _gcd_classes(d) == 1
    if d == 1:
        coprime[:] = True
    return float(power[coprime].sum())


def cor1_lower_bound(seq: Sequence, q: int, q0: int) -> float:
    """The nonnegativity-of-H lower bound for qV(q).

    Returns sum over classes a with q/(a,q) > Q0 of |A(a/q)|^2 minus
    the Ramanujan correction over divisors d > Q0; guaranteed at most
    q V(q), which is checked here.
    """
    if q0 < 1:
        raise ValueError("Q0 must be at least 1")
    from .arith import ramanujan_correlation

    first = 0.0
    second = 0.0
    for d in divisors(q):
        if d > q0:
            first += _reduced_power_sum(seq, d)
            corr = float(ramanujan_correlation(seq, d))
            second += corr * corr / totient(d)
    bound = first - second
    qv = q * float(variance_mod_q(seq, q, exact=False).v)
    slack = 1e-6 * max(abs(qv), abs(bound), 1.0)
    if bound > qv + slack:
        raise AssertionError(
            f"corollary bound {bound} exceeds qV = {qv} for q={q}, Q0={q0}")
    return bound


@dataclass
class PsiCounts:
    q: int
    classes: np.ndarray      # reduced residues a
    psi: np.ndarray          # psi(N; q, a) per class
    psi_q: float
    restricted_variance: float


def psi_counts(table, q: int) -> PsiCounts:
    """Chebyshev psi sums in progressions from a sieve table."""
    n = table.n
    if q > n:
        raise ValueError("q must not exceed the table length")
    res = np.arange(n + 1) % q
    t = np.bincount(res, weights=table.lam, minlength=q)
    coprime = _gcd_classes(q) == 1
    if q == 1:
        coprime[:] = True
    classes = np.nonzero(coprime)[0]
    psi = t[coprime]
    psi_q = float(psi.sum())
    mean = psi_q / totient(q)
    var = float(((psi - mean) ** 2).sum())
    return PsiCounts(q=q, classes=classes, psi=psi, psi_q=psi_q,
                     restricted_variance=var)


def restricted_variance_total(table, q_max: int, q_min: int = 1) -> float:
    """Sum over q of the reduced-class prime variance, computed off the
    nonzero support of Lambda only (fast path for large scans)."""
    nz = np.nonzero(table.lam)[0]
    w = table.lam[nz]
    total = 0.0
    for q in range(q_min, q_max + 1):
        t = np.bincount(nz % q, weights=w, minlength=q)
        coprime = _gcd_classes(q) == 1
        if q == 1:
            coprime[:] = True
        psi = t[coprime]
        mean = psi.sum() / totient(q)
        total += float(((psi - mean) ** 2).sum())
    return total
