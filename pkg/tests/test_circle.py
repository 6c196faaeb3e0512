"""Spectra, arc dissection, and certified minor-arc integrals."""

import json
import math

import numpy as np
import pytest

from apvar.arith import CapacityError, Sequence
from apvar.circle import (ArcSystem, build_spectrum, default_grid_size,
                          eval_exp_sum, export_classification,
                          export_spectrum, farey_density_f,
                          import_spectrum_power, is_major, major_mask,
                          minor_arc_integral)


def small_arcs(n=1000):
    return ArcSystem(k_param=6.0, q0=2.0, q=300.0, n=n)


def test_eval_exp_sum_matches_naive(rng):
    vals = rng.standard_normal(64)
    seq = Sequence.from_coeffs(vals)
    for alpha in (0.0, 0.125, 0.3333, 0.871):
        naive = sum(vals[n - 1] * np.exp(2j * np.pi * n * alpha)
                    for n in range(1, 65))
        assert eval_exp_sum(seq, alpha) == pytest.approx(naive, abs=1e-9)


def test_spectrum_grid_matches_eval(rng):
    seq = Sequence.from_coeffs(rng.standard_normal(50))
    spec = build_spectrum(seq, 256)
    for t in (0, 1, 17, 128, 255):
        assert spec.amplitudes[t] == pytest.approx(
            eval_exp_sum(seq, t / 256), abs=1e-8)


def test_parseval(rng):
    seq = Sequence.from_coeffs(rng.standard_normal(200))
    spec = build_spectrum(seq)
    assert spec.total_mass == pytest.approx(seq.l2(), rel=1e-12)


def test_default_grid_and_budget():
    assert default_grid_size(1000) == 16384
    with pytest.raises(ValueError):
        build_spectrum(Sequence.from_coeffs(np.ones(100)), 100)  # not pow2
    with pytest.raises(CapacityError):
        build_spectrum(Sequence.from_coeffs(np.ones(10)), 1 << 25)


def test_is_major_witnesses():
    arcs = small_arcs()
    ok, witness = is_major(0.5, arcs)
    assert ok and witness == (1, 2)
    ok, witness = is_major(1 / 3 + 1e-4, arcs)
    assert ok and witness == (1, 3)
    # far from any fraction with small denominator
    ok, witness = is_major(0.381966, arcs)  # near 1/golden^2
    assert not ok and witness is None


def test_major_mask_agrees_with_pointwise():
    arcs = small_arcs()
    t = 2048
    mask = major_mask(arcs, t)
    for idx in range(0, t, 37):
        assert mask[idx] == is_major(idx / t, arcs)[0]


def test_minor_plus_major_equals_total(rng):
    seq = Sequence.from_coeffs(rng.standard_normal(500))
    spec = build_spectrum(seq)
    arcs = small_arcs(500)
    res = minor_arc_integral(spec, arcs)
    assert res.value + res.major_value == pytest.approx(spec.total_mass,
                                                        rel=1e-12)
    # certified against the exact Parseval complement
    assert abs(res.value - res.complement_value) <= res.error_bound


def test_farey_density_floor():
    # f(alpha) >= (2K/Q0)(1 - 5/K - log K / K) at sampled points
    arcs = ArcSystem(k_param=8.0, q0=5.0, q=500.0, n=2000)
    floor = (2 * arcs.k_param / arcs.q0) * (
        1 - 5 / arcs.k_param - math.log(arcs.k_param) / arcs.k_param)
    for alpha in (0.0, 0.1234, 0.5, 0.381966, 0.7071):
        assert farey_density_f(alpha, arcs) >= floor


def test_farey_enumeration_cap():
    arcs = ArcSystem(k_param=8.0, q0=5.0, q=50000.0, n=10**6)
    with pytest.raises(CapacityError):
        farey_density_f(0.5, arcs)


def test_spectrum_export_roundtrip(tmp_path, rng):
    seq = Sequence.from_coeffs(rng.standard_normal(100))
    spec = build_spectrum(seq, 2048)
    path = tmp_path / "spec.bin"
    export_spectrum(spec, path)
    t, power = import_spectrum_power(path)
    assert t == 2048
    assert np.allclose(power, spec.power)
    # header is 8-byte little-endian
    raw = path.read_bytes()
    assert int.from_bytes(raw[:8], "little") == 2048
    assert len(raw) == 8 + 2048 * 8


def test_classification_rle_roundtrip(tmp_path):
    arcs = small_arcs()
    mask = major_mask(arcs, 4096)
    path = tmp_path / "arcs.json"
    export_classification(mask, path)
    data = json.loads(path.read_text())
    assert data["grid"] == 4096
    rebuilt = np.zeros(4096, dtype=bool)
    total = 0
    for run in data["runs"]:
        rebuilt[run["start"] : run["start"] + run["length"]] = run["major"]
        total += run["length"]
    assert total == 4096
    assert np.array_equal(rebuilt, mask)


def test_arc_system_warnings():
    with pytest.warns(UserWarning):
        ArcSystem(k_param=3.0, q0=1.0, q=100.0, n=100)
