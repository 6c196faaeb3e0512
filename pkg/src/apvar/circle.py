"""Exponential sums, discretized power spectra, and arc dissection.

The unit circle is discretized on a power-of-two grid; major arcs are
the points within K/(qQ) of a reduced fraction a/q with q <= K*Q0, and
minor-arc integrals are certified trapezoid sums with an explicit error
budget for quadrature and boundary-straddling cells.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .arith import CapacityError, Sequence

SPECTRUM_BUDGET = 1 << 24
FAREY_ENUMERATION_CAP = 10_000


@dataclass
class ArcSystem:
    """Parameters (K, Q0, Q) of the major/minor arc dissection for length N."""

    k_param: float
    q0: float
    q: float
    n: int

    def __post_init__(self):
        if self.k_param < 5:
            warnings.warn(f"K={self.k_param} below 5; arc estimates assume K >= 5")
        nlogn = self.n * math.log(max(self.n, 2))
        if not (nlogn / self.q <= self.q0 <= self.q / self.k_param**2):
            warnings.warn(
                f"Q0={self.q0} outside [N log N / Q, Q/K^2] = "
                f"[{nlogn / self.q:.3g}, {self.q / self.k_param**2:.3g}]")
        if not (self.k_param * math.sqrt(nlogn) <= self.q <= self.n):
            warnings.warn(f"Q={self.q} outside [K sqrt(N log N), N]")

    @property
    def kq0(self) -> int:
        return int(self.k_param * self.q0)


def eval_exp_sum(seq: Sequence, alpha: float) -> complex:
    """A(alpha) = sum a_n e(n alpha), with compensated summation."""
    n = np.arange(seq.n + 1)
    phase = 2.0 * np.pi * ((n * alpha) % 1.0)
    re = math.fsum(seq.values * np.cos(phase))
    im = math.fsum(seq.values * np.sin(phase))
    return complex(re, im)


@dataclass
class Spectrum:
    """All values A(t/T) on the grid t = 0..T-1, with certification data."""

    t_grid: int
    amplitudes: np.ndarray       # complex A(t/T)
    l2: float                    # sum |a_n|^2
    l1: float                    # sum |a_n|
    deriv_bound: float           # 2 pi N sum|a_n| bounds |A'|
    total_mass: float = field(init=False)

    def __post_init__(self):
        self.total_mass = float(np.mean(np.abs(self.amplitudes) ** 2))

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def default_grid_size(n: int) -> int:
    t = 16
    while t < 16 * n:
        t *= 2
    return t


def build_spectrum(seq: Sequence, t_grid: int | None = None) -> Spectrum:
    """Zero-padded FFT evaluation of A on the grid t/T."""
    if t_grid is None:
        t_grid = default_grid_size(seq.n)
    if t_grid & (t_grid - 1) or t_grid < 2 * seq.n:
        raise ValueError("grid size must be a power of two >= 2N")
    if t_grid > SPECTRUM_BUDGET:
        raise CapacityError(f"grid size {t_grid} exceeds budget {SPECTRUM_BUDGET}")
    # numpy's fft uses e(-nt/T); our convention is e(+nt/T).
    amps = np.conj(np.fft.fft(seq.values, t_grid))
    return Spectrum(t_grid=t_grid, amplitudes=amps, l2=seq.l2(), l1=seq.l1(),
                    deriv_bound=2.0 * np.pi * seq.n * seq.l1())


def is_major(alpha: float, arcs: ArcSystem):
    """Membership in the major arcs, with a witness fraction.

    Exhaustive scan over q <= K*Q0 with the nearest integer numerator;
    returns (True, (a, q)) on the first reduced witness, else (False, None).
    """
    alpha = alpha % 1.0
    for q in range(1, arcs.kq0 + 1):
        a = round(alpha * q)
        g = math.gcd(a, q)
        ar, qr = a // g, q // g
        if abs(alpha - ar / qr) <= arcs.k_param / (qr * arcs.q):
            return True, (ar % max(qr, 1), qr)
    return False, None


def major_mask(arcs: ArcSystem, t_grid: int) -> np.ndarray:
    """Boolean mask over the grid: cell centers lying in a major arc."""
    mask = np.zeros(t_grid, dtype=bool)
    for q in range(1, arcs.kq0 + 1):
        half = arcs.k_param / (q * arcs.q) * t_grid
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            center = a / q * t_grid
            lo = math.ceil(center - half)
            hi = math.floor(center + half)
            if hi - lo + 1 >= t_grid:
                mask[:] = True
                return mask
            idx = np.arange(lo, hi + 1) % t_grid
            mask[idx] = True
    return mask


def farey_density_f(alpha: float, arcs: ArcSystem) -> float:
    """f(alpha): weighted count of nearby fractions a/q, Q0 < q <= Q,
    with q/(a,q) > Q0 and |alpha - a/q| <= K/(Q0 Q).  Direct enumeration."""
    q_hi = int(arcs.q)
    if q_hi > FAREY_ENUMERATION_CAP:
        raise CapacityError(f"Q={q_hi} above enumeration cap {FAREY_ENUMERATION_CAP}")
    if arcs.q0 >= arcs.q:
        raise ValueError("need Q0 < Q")
    alpha = alpha % 1.0
    w = arcs.k_param / (arcs.q0 * arcs.q)
    total = 0.0
    q_lo = int(math.floor(arcs.q0)) + 1
    for q in range(q_lo, q_hi + 1):
        lo = math.ceil(q * (alpha - w))
        hi = math.floor(q * (alpha + w))
        if hi - lo + 1 >= q:
            lo, hi = 0, q - 1
        count = 0
        for a in range(lo, hi + 1):
            if q / math.gcd(a % q, q) > arcs.q0:
                count += 1
        total += count / q
    return total


@dataclass
class MinorArcIntegral:
    value: float
    error_bound: float
    major_value: float
    complement_value: float   # l2 minus the major part


def minor_arc_integral(spec: Spectrum, arcs: ArcSystem,
                       mask: np.ndarray | None = None) -> MinorArcIntegral:
    """Trapezoid integral of |A|^2 over grid cells classified minor.

    The error bound charges each minor cell width^2/4 * |(|A|^2)'| using
    the recorded derivative bound with the local |A|, plus one full cell
    of the local maximum for every boundary-straddling cell.
    """
    t = spec.t_grid
    if mask is None:
        mask = major_mask(arcs, t)
    power = spec.power
    width = 1.0 / t
    minor = ~mask
    value = float(power[minor].sum()) * width
    major_value = float(power[mask].sum()) * width

    amp = np.abs(spec.amplitudes)
    quad_err = float((width**2 / 4.0) * 2.0 * spec.deriv_bound * amp[minor].sum())
    boundary = mask != np.roll(mask, 1)
    local_max = np.maximum(power, np.roll(power, 1))
    straddle_err = float(width * local_max[boundary].sum())
    return MinorArcIntegral(value=value, error_bound=quad_err + straddle_err,
                            major_value=major_value,
                            complement_value=spec.l2 - major_value)


# ---------------------------------------------------------------------------
# External interfaces


def export_spectrum(spec: Spectrum, path):
    """Binary dump: 8-byte little-endian uint64 T header, then float64 |A|^2."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", spec.t_grid))
        spec.power.astype("<f8").tofile(fh)


def import_spectrum_power(path):
    with open(path, "rb") as fh:
        (t,) = struct.unpack("<Q", fh.read(8))
        power = np.fromfile(fh, dtype="<f8", count=t)
    return t, power


def export_classification(mask: np.ndarray, path):
    """Run-length encoded arc classification as JSON."""
    runs = []
    start = 0
    cur = bool(mask[0])
    for i in range(1, len(mask)):
        if bool(mask[i]) != cur:
            runs.append({"start": start, "length": i - start,
                         "major": cur})
            start, cur = i, bool(mask[i])
    runs.append({"start": start, "length": len(mask) - start, "major": cur})
    with open(path, "w") as fh:
        json.dump({"grid": len(mask), "runs": runs}, fh, sort_keys=True)
