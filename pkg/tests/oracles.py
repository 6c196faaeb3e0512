"""Independent numerical oracles used by the unit and acceptance tests.

These deliberately avoid the library's own closed forms: residues are
computed as honest nested contour integrals, transforms by composite
Gauss-Legendre quadrature, and Dirichlet series by partial summation.
"""

import math

import numpy as np


def triple_contour_polynomial(k: int, log_n: float, log_r: float,
                              log_kq0: float, m_z: int = 48, m_s: int = 24,
                              m_w: int = 40) -> float:
    """The triple residue behind the explicit polynomial, as a nested
    contour integral in (z, s, w) around 0 with radii chosen so that
    s + z and s + z + w stay away from zero on the product of circles.

    Integrand: (s+z)^(k-1) / (s^k w^k (s+z+w)^(k(k-1)) z)
               x e^(s log R) e^(w log N) (e^(z log R) - e^(z log KQ0)).

    The z-pole has order up to k^2, which makes the extraction badly
    conditioned in double precision for k = 4, so the quadrature runs in
    40-digit mpmath arithmetic with cached exponentials per node.  The w
    radius is kept small relative to |s + z| >= r_z - r_s because the
    trapezoid alias picks up the coefficient of w^(m_w - 1) in the
    binomial expansion of (s + z + w)^(-k(k-1)); with k = 4 that
    coefficient grows like C(m_w + 10, 11) |s+z|^(-12-m_w), so the node
    count must beat polynomial-times-geometric growth, not just the
    geometric ratio r_w / |s+z|.
    """
    import mpmath as mp

    with mp.workdps(40):
        r_z, r_s, r_w = mp.mpf("0.5"), mp.mpf("0.04"), mp.mpf("0.08")
        kk = k * (k - 1)
        zs = [r_z * mp.expjpi(2 * mp.mpf(i) / m_z) for i in range(m_z)]
        ss = [r_s * mp.expjpi(2 * mp.mpf(i) / m_s) for i in range(m_s)]
        ws = [r_w * mp.expjpi(2 * mp.mpf(i) / m_w) for i in range(m_w)]
        ez = [mp.exp(z * log_r) - mp.exp(z * log_kq0) for z in zs]
        es = [mp.exp(s * log_r) for s in ss]
        ew = [mp.exp(w * log_n) for w in ws]
        total = mp.mpc(0)
        for iz, z in enumerate(zs):
            for i_s, s in enumerate(ss):
                sz = s + z
                pref = sz ** (k - 1) / s ** (k - 1) * es[i_s] * ez[iz]
                inner = mp.mpc(0)
                for iw, w in enumerate(ws):
                    inner += ew[iw] / (w ** (k - 1) * (sz + w) ** kk)
                total += pref * inner
        total /= m_z * m_s * m_w
        return float(mp.re(total))


def partial_dirichlet_sum(coeffs: np.ndarray, s: float) -> float:
    """sum coeffs[n] n^(-s) over the array (slot 0 ignored)."""
    n = np.arange(coeffs.size, dtype=np.float64)
    n[0] = 1.0
    return float(np.sum(coeffs[1:] * n[1:] ** (-s)))


def zeta_mpmath(s):
    import mpmath
    return complex(mpmath.zeta(complex(s)))


def euler_maclaurin_harmonic(x: int) -> float:
    return math.log(x) + 0.5772156649015329
