"""Euler products, contour residues, and the explicit residue polynomial.

All residues are computed by the trapezoid rule on small circles, which
is spectrally accurate for the analytic integrands appearing here; the
closed forms (the explicit double-sum polynomial, the squarefree local
factors) are separate code paths cross-validated against the contours.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import (d_k_prime_power, factorize, gen_binomial, is_squarefree,
                    totient)

EULER_GAMMA = 0.5772156649015329


class TruncationError(Exception):
    """An inner local series failed its certified tail bound."""


# ---------------------------------------------------------------------------
# Zeta near s = 1 by Euler-Maclaurin


@lru_cache(maxsize=1)
def _bernoulli_even(count: int = 25):
    """B_2, B_4, ..., B_{2*count} as floats, via the exact recurrence."""
    n_max = 2 * count
    b = [Fraction(1)]
    for m in range(1, n_max + 1):
        s = Fraction(0)
        for j in range(m):
            s += math.comb(m + 1, j) * b[j]
        b.append(-s / (m + 1))
    return np.array([float(b[2 * j]) for j in range(1, count + 1)])


def zeta_near_one(s, cutoff: int = 30, terms: int = 20):
    """zeta(s) by Euler-Maclaurin; intended for s within O(1) of 1.

    Vectorized over complex arrays.  Raises on the pole s = 1.
    """
    s = np.asarray(s, dtype=np.complex128)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    if np.any(s == 1):
        raise ZeroDivisionError("zeta has a pole at s = 1")
    m = cutoff
    n = np.arange(1, m)
    out = np.sum(n[None, :] ** (-s[:, None]), axis=1)
    out += m ** (1.0 - s) / (s - 1.0) + 0.5 * m ** (-s)
    bern = _bernoulli_even()
    poch = s.copy()          # s (s+1) ... (s+2j-2)
    fact = 1.0
    for j in range(1, terms + 1):
        fact *= (2 * j) * (2 * j - 1)
        out += bern[j - 1] / fact * poch * m ** (-s - 2 * j + 1.0)
        poch = poch * (s + 2 * j - 1.0) * (s + 2 * j)
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Local Euler factors


def _inner_series(p: int, k: int, a: int, s, terms: int):
    """sum_{b=a}^{a+terms-1} d_k(p^b) p^{-bs}, plus a geometric tail bound."""
    s = np.asarray(s, dtype=np.complex128)
    sigma = float(np.min(s.real)) if s.ndim else float(s.real)
    if sigma <= 0:
        raise ValueError("inner series needs Re(s) > 0")
    bs = np.arange(a, a + terms)
    coeffs = np.array([d_k_prime_power(k, int(b)) for b in bs], dtype=np.float64)
    if s.ndim:
        series = np.sum(coeffs[None, :] * p ** (-np.multiply.outer(s, bs)), axis=1)
    else:
        series = np.sum(coeffs * p ** (-s * bs))
    b_next = a + terms
    t_next = d_k_prime_power(k, b_next) * p ** (-sigma * b_next)
    rho = (b_next + k) / (b_next + 1) * p ** (-sigma)
    if rho >= 1.0:
        raise TruncationError(f"series ratio {rho} >= 1 at p={p}, Re(s)={sigma}")
    tail = t_next / (1.0 - rho)
    return series, tail


def _check_tail(tail: float, value) -> None:
    mag = float(np.min(np.abs(value))) if np.ndim(value) else abs(value)
    if mag > 0 and tail > 1e-14 * mag:
        raise TruncationError(f"tail {tail} too large for value of size {mag}")


def euler_F_q(q: int, k: int, s, terms: int = 60):
    """The finite Euler product F_q(s) correcting zeta(s)^k in the
    Dirichlet series of d_k(n) c_q(n).  Vectorized over s."""
    s = np.asarray(s, dtype=np.complex128)
    out = np.ones(s.shape, dtype=np.complex128) if s.ndim else complex(1.0)
    for p, a in factorize(q):
        series, tail = _inner_series(p, k, a, s, terms)
        phi_pa = totient(p**a)
        head = -d_k_prime_power(k, a - 1) * p ** (-(a - 1) * (s - 1.0))
        local = (1.0 - p ** (-s)) ** k * (head + phi_pa * series)
        _check_tail(phi_pa * tail * float(np.max(np.abs((1.0 - p ** (-s)) ** k))),
                    local)
        out = out * local
    return out


def euler_G_q(q: int, k: int, s, terms: int = 60):
    """G_q(s): the correction factor for sum over multiples of q of
    d_{k-1}(n) n^{-s}.  Vectorized over s."""
    s = np.asarray(s, dtype=np.complex128)
    out = np.ones(s.shape, dtype=np.complex128) if s.ndim else complex(1.0)
    for p, a in factorize(q):
        series, tail = _inner_series(p, k - 1, a, s, terms)
        local = (1.0 - p ** (-s)) ** (k - 1) * series
        _check_tail(tail * float(np.max(np.abs((1.0 - p ** (-s)) ** (k - 1)))),
                    local)
        out = out * local
    return out


# ---------------------------------------------------------------------------
# Contour residues


def contour_nodes(center: complex, radius: float, count: int):
    theta = 2.0 * np.pi * np.arange(count) / count
    offsets = radius * np.exp(1j * theta)
    return center + offsets, offsets


def contour_residue(f, center: complex, radius: float, count: int) -> complex:
    """Residue at `center` via the trapezoid rule on a circle.

    f must accept a complex numpy array and be analytic on the annulus
    between the pole and the contour.
    """
    s, offsets = contour_nodes(center, radius, count)
    return complex(np.mean(f(s) * offsets))


@dataclass
class ResiduePrediction:
    value: float
    radius: float
    nodes: int
    error: float


def _stable_residue(f, center, radius, nodes) -> ResiduePrediction:
    v1 = contour_residue(f, center, radius, nodes)
    v2 = contour_residue(f, center, radius, 2 * nodes)
    err = abs(v2 - v1)
    if err > max(1e-6 * abs(v2), 1e-12):
        raise TruncationError(
            f"contour unstable: {nodes} vs {2*nodes} nodes differ by {err}")
    return ResiduePrediction(value=v2.real, radius=radius, nodes=2 * nodes,
                             error=err)


def residue_dk_correlation(q: int, k: int, n: int, nodes: int = 64) -> ResiduePrediction:
    """Residue prediction for sum_{m<=N} d_k(m) c_q(m)."""
    if q > n:
        raise ValueError("need q <= N")
    radius = 1.0 / math.log(n)

    def f(s):
        return zeta_near_one(s) ** k * euler_F_q(q, k, s) * n**s / s

    return _stable_residue(f, 1.0, radius, nodes)


def residue_divisor_mean(q: int, k: int, x: int, nodes: int = 64) -> ResiduePrediction:
    """Residue prediction for sum_{m<=x, q|m} d_{k-1}(m)/m."""
    if q > x:
        raise ValueError("need q <= x")
    radius = 1.0 / math.log(x)

    def f(s):
        return zeta_near_one(s + 1.0) ** (k - 1) * euler_G_q(q, k, s + 1.0) * x**s / s

    return _stable_residue(f, 0.0, radius, nodes)


def windowed_dk_correlation_prediction(q: int, k: int, n: int, window,
                                       nodes: int = 64) -> ResiduePrediction:
    """Residue prediction for sum d_k(m) c_q(m) Phi(m/N): the Mellin
    weight of the window replaces N^s/s."""
    radius = 1.0 / math.log(n)

    def f(w):
        return (zeta_near_one(w) ** k * euler_F_q(q, k, w) * n**w
                * np.asarray(window.mellin(w)))

    return _stable_residue(f, 1.0, radius, nodes)


# ---------------------------------------------------------------------------
# The singular constant


def _primes_up_to(n: int) -> np.ndarray:
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0]


def singular_constant(k: int, p_cap: int):
    """Truncated product over p <= cap of (1-1/p)^(k^2) sum_a d_k(p^a)^2/p^a.

    Returns (product, c_k, tail_estimate) where c_k divides by (k^2-1)!.
    """
    if p_cap < 100:
        raise ValueError("prime cap must be at least 100")
    primes = _primes_up_to(p_cap).astype(np.float64)
    series = np.zeros_like(primes)
    a = 0
    while True:
        coef = d_k_prime_power(k, a) ** 2
        term = coef * primes ** (-float(a))
        series += term
        if a > 2 and float(np.max(term)) < 1e-18:
            break
        a += 1
    local = (1.0 - 1.0 / primes) ** (k * k) * series
    log_product = float(np.sum(np.log(local)))
    product = math.exp(log_product)
    # Local factor is 1 + O(k^4/p^2); integrate the tail over p > cap.
    tail = k**4 / (p_cap * math.log(p_cap))
    c_k = product / math.factorial(k * k - 1)
    return product, c_k, tail


# ---------------------------------------------------------------------------
# The explicit residue polynomial and its extremal R selection


def polynomial_69(k: int, log_n: float, log_r: float, log_kq0: float) -> float:
    """Closed-form double sum for the triple residue, as a function of
    log N, log R and log(K Q0)."""
    if not 0 < log_r <= log_n:
        raise ValueError("need 0 < log R <= log N")
    total = 0.0
    kk = k * (k - 1)
    for ell in range(k):
        b1 = float(gen_binomial(-kk, ell))
        for j in range(k):
            b2 = float(gen_binomial(-((k - 1) ** 2) - ell, j))
            m = (k - 1) ** 2 + ell + j
            bracket = log_r**m - log_kq0**m
            total += (b1 * b2
                      * log_n ** (k - 1 - ell) / math.factorial(k - 1 - ell)
                      * log_r ** (k - 1 - j) / math.factorial(k - 1 - j)
                      * bracket / math.factorial(m))
    return total


def leading_coeff_69(k: int) -> Fraction:
    """Leading coefficient in alpha = log R / log N, via exact binomials."""
    kk = k * (k - 1)
    total = Fraction(0)
    for j in range(k):
        total += gen_binomial(-kk, j) / (
            math.factorial(k - 1 - j) * math.factorial(kk + j))
    return gen_binomial(-kk, k - 1) * total


def leading_coeff_closed_form(k: int) -> Fraction:
    return (Fraction((-1) ** (k - 1))
            / (math.factorial(k - 1) * math.factorial(k * (k - 1) - 1)
               * (k * k - 1)))


def choose_R_chebyshev(k: int, n: int, q0: float, q: float, k_param: float,
                       eps: float, grid: int = 512):
    """Scan alpha = log R / log N over the admissible interval and return
    the R maximizing |polynomial|, certified against the Chebyshev
    extremal floor for its degree and leading coefficient."""
    log_n = math.log(n)
    lo = math.log(q0 * n**eps) / log_n
    hi = math.log(q * n ** (-eps)) / log_n
    if not lo < hi:
        raise ValueError(f"empty R interval: alpha in [{lo}, {hi}]")
    hi = min(hi, 1.0)
    log_kq0 = math.log(k_param * q0)
    alphas = np.linspace(lo, hi, grid)
    values = np.array([polynomial_69(k, log_n, a * log_n, log_kq0)
                       for a in alphas])
    best = int(np.argmax(np.abs(values)))
    d = k * k - 1
    floor = (((hi - lo) / 4.0) ** d * abs(float(leading_coeff_closed_form(k)))
             * log_n**d * 2.0 ** (-(d - 1)))
    if abs(values[best]) < floor:
        raise AssertionError(
            f"grid max {values[best]} below Chebyshev floor {floor}")
    return n ** alphas[best], float(values[best])


def round_to_half(r: float) -> float:
    """Nearest non-integer half-integer, as the residue bookkeeping assumes
    R is not an integer."""
    return math.floor(r) + 0.5


# ---------------------------------------------------------------------------
# Squarefree local-factor calculus


def squarefree_F_q_exact(q: int, k: int) -> Fraction:
    """F_q(1) for squarefree q as an exact rational:
    product over p|q of (p - 1 - (p-1)^k / p^(k-1))."""
    if not is_squarefree(q):
        raise ValueError("q must be squarefree")
    out = Fraction(1)
    for p, _ in factorize(q):
        out *= Fraction(p - 1) - Fraction((p - 1) ** k, p ** (k - 1))
    return out


def check_Fq1_bound(q: int, k: int) -> bool:
    """F_q(1) >= d_{k-1}(q) (phi(q)/q)^k, exactly, for squarefree q."""
    if not is_squarefree(q):
        raise ValueError("q must be squarefree")
    lhs = squarefree_F_q_exact(q, k)
    rhs = Fraction((k - 1) ** len(factorize(q))) * Fraction(totient(q), q) ** k
    return lhs >= rhs


def f_q_value(q: int, k: int) -> float:
    """f_q(1) = (log F_q)'(1) for squarefree q, by the closed form."""
    if not is_squarefree(q):
        raise ValueError("q must be squarefree")
    total = 0.0
    for p, _ in factorize(q):
        bracket = (1.0 - 1.0 / p) ** (-(k - 1)) - 1.0
        total -= k * math.log(p) / (p - 1) / bracket
    return total


def f_q_log_derivatives(q: int, k: int, order: int, radius: float = 0.05,
                        nodes: int = 64):
    """[f_q(1), f_q'(1), ..., f_q^(order)(1)] for squarefree q.

    The value itself comes from the closed form; higher derivatives from
    a Cauchy contour of log F_q on a small circle around s = 1.
    """
    if not is_squarefree(q):
        raise ValueError("q must be squarefree")
    if order > k:
        raise ValueError("order must not exceed k")
    out = [f_q_value(q, k)]
    if order == 0 or q == 1:
        return out + [0.0] * (order if q == 1 else 0)
    s, offsets = contour_nodes(1.0, radius, nodes)
    vals = euler_F_q(q, k, s)
    log_f = np.log(np.abs(vals)) + 1j * np.unwrap(np.angle(vals))
    for m in range(1, order + 1):
        # f^(m)(1) = (log F)^(m+1)(1)
        deriv = math.factorial(m + 1) * np.mean(log_f * offsets ** (-(m + 1)))
        out.append(float(deriv.real))
    return out


def derivative_bound_ratios(q: int, k: int, order: int):
    """|f_q^(m)(1)| / sum_{p|q} (log p)^(m+1): the empirical constants in
    the derivative-growth bound."""
    ders = f_q_log_derivatives(q, k, order)
    out = []
    for m, val in enumerate(ders):
        denom = sum(math.log(p) ** (m + 1) for p, _ in factorize(q)) or 1.0
        out.append(abs(val) / denom)
    return out


@dataclass
class RamdkevalResidue:
    value: float
    main_term: float
    ratio: float


def residue_ramdkeval(q: int, k: int, n: int, delta: float,
                      smooth_exp: float = 0.25, nodes: int = 64) -> RamdkevalResidue:
    """Residue of zeta^k (F_q(s)/F_q(1)) N^(s-1)/s at s = 1, for squarefree
    smooth q, cross-checked against the (log N + f_q(1))^(k-1)/(k-1)! main
    term."""
    if not is_squarefree(q):
        raise ValueError("q must be squarefree")
    if q > n ** (0.5 - delta / 2.0):
        raise ValueError(f"q={q} violates the size bound N^(1/2 - delta/2)")
    if q > 1 and max(p for p, _ in factorize(q)) > n**smooth_exp:
        raise ValueError(f"q={q} has a prime factor above N^{smooth_exp}")
    fq1 = float(squarefree_F_q_exact(q, k)) if q > 1 else 1.0
    radius = 1.0 / math.log(n)

    def f(s):
        return (zeta_near_one(s) ** k * euler_F_q(q, k, s) / fq1
                * n ** (s - 1.0) / s)

    pred = _stable_residue(f, 1.0, radius, nodes)
    main = (math.log(n) + f_q_value(q, k)) ** (k - 1) / math.factorial(k - 1)
    ratio = pred.value / main if main else math.inf
    return RamdkevalResidue(value=pred.value, main_term=main, ratio=ratio)
