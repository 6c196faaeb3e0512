"""Variance functionals, the divisor identity, and its corollary."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apvar.arith import Sequence, divisors, ramanujan_sum, totient
from apvar.variance import (check_identity_prop1, cor1_lower_bound,
                            exp_variance_H, psi_counts, residue_sums,
                            restricted_variance_total, variance_mod_q,
                            variance_total)


def brute_variance(seq, q):
    """Direct double sum over h | q and residue classes with (a,q) = h."""
    t = [Fraction(0)] * q
    iv = seq.int_values()
    for n in range(1, seq.n + 1):
        t[n % q] += int(iv[n])
    total = Fraction(0)
    for h in divisors(q):
        classes = [a for a in range(q) if math.gcd(a if a else q, q) == h]
        s_h = sum(t[a] for a in classes)
        phi = totient(q // h)
        for a in classes:
            total += (t[a] - s_h / phi) ** 2
    return total


def brute_H(seq, q):
    """H(q) via the complex exponential sums directly."""
    n = np.arange(seq.n + 1)
    total = 0.0
    corr = sum(seq.values[m] * ramanujan_sum(q, m) for m in range(1, seq.n + 1))
    for a in range(1, q + 1):
        if math.gcd(a, q) != 1:
            continue
        amp = np.sum(seq.values * np.exp(2j * np.pi * a * n / q))
        total += abs(amp) ** 2
    return total - corr**2 / totient(q)


@st.composite
def small_int_sequences(draw):
    n = draw(st.integers(10, 60))
    vals = draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
    return Sequence.from_coeffs(vals, is_integer_valued=True)


@given(small_int_sequences(), st.integers(1, 24))
@settings(max_examples=40, deadline=None)
def test_variance_matches_bruteforce(seq, q):
    assert variance_mod_q(seq, q).v == brute_variance(seq, q)


@given(small_int_sequences(), st.integers(1, 24))
@settings(max_examples=40, deadline=None)
def test_identity_exact(seq, q):
    chk = check_identity_prop1(seq, q)
    assert chk.ok and chk.residual == 0 and chk.bad_divisors == []


@given(small_int_sequences(), st.integers(1, 20))
@settings(max_examples=25, deadline=None)
def test_H_nonnegative_and_matches_oracle(seq, q):
    h = exp_variance_H(seq, q).h
    assert h >= 0
    assert float(h) == pytest.approx(brute_H(seq, q), abs=1e-6)


def test_float_path_agrees_with_exact(table_300):
    seq = Sequence(table_300.dk[2][:251].astype(float),
                   is_integer_valued=True, name="d2")
    for q in (7, 12, 36, 60):
        exact = variance_mod_q(seq, q, exact=True).v
        fl = variance_mod_q(seq, q, exact=False).v
        assert fl == pytest.approx(float(exact), rel=1e-9)
        he = exp_variance_H(seq, q, exact=True).h
        hf = exp_variance_H(seq, q, exact=False).h
        assert hf == pytest.approx(float(he), rel=1e-9)


def test_residue_sums_basic():
    seq = Sequence.from_coeffs([1.0] * 10)
    t = residue_sums(seq, 4)
    assert t.tolist() == [2, 3, 3, 2]


def test_variance_total_threads_agree(table_300):
    seq = Sequence(table_300.lam[:301].copy(), name="lambda")
    a = variance_total(seq, 40)
    b = variance_total(seq, 40, threads=4)
    assert a == pytest.approx(b, rel=1e-12)


def test_corollary_bound_below_qV(table_300, rng):
    seq = Sequence(table_300.dk[2][:301].astype(float),
                   is_integer_valued=True, name="d2")
    for q in (12, 30, 60):
        for q0 in (1, 3, 10):
            bound = cor1_lower_bound(seq, q, q0)
            qv = q * float(variance_mod_q(seq, q, exact=False).v)
            assert bound <= qv + 1e-6 * abs(qv)
    rnd = Sequence.from_coeffs(rng.choice([-1.0, 1.0], size=200),
                               is_integer_valued=True)
    assert cor1_lower_bound(rnd, 36, 2) <= 36 * float(
        variance_mod_q(rnd, 36).v) + 1e-6


def test_psi_counts_and_restricted_scan(table_300):
    pc = psi_counts(table_300, 4)
    assert pc.classes.tolist() == [1, 3]
    # psi(300; 4, 1) + psi(300; 4, 3) = psi(300) - psi over powers of 2
    assert pc.psi_q == pytest.approx(
        table_300.lam[1:].sum() - table_300.lam[2::2].sum())
    direct = sum(psi_counts(table_300, q).restricted_variance
                 for q in range(1, 31))
    fast = restricted_variance_total(table_300, 30)
    assert fast == pytest.approx(direct, rel=1e-9)


def test_zero_sequence_trivial():
    z = Sequence.from_coeffs([0.0] * 50)
    assert float(variance_mod_q(z, 12).v) == 0
    assert float(exp_variance_H(z, 12).h) == 0
    assert check_identity_prop1(z, 12).ok
