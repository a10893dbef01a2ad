"""Reference values computed independently of the package.

Nothing here imports ``semifinite``.  Closed forms come from classical
identities; finite quantities are brute-forced with plain loops or mpmath.
"""

from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np

# Dixmier trace of |D|^-1 on the circle: N(lam) = #{n : |n| <= lam} ~ 2 lam.
CIRCLE_TRACE = 2.0
# (1+Delta)^-1 on T^2: N(lam) ~ pi lam (area of the disc of radius lam^(1/2)).
TORUS_LAPLACIAN_TRACE = math.pi
# |D|^-2 for the spinor Dirac operator on T^2: two spinor components.
TORUS_DIRAC_TRACE = 2.0 * math.pi


def harmonic_sigma(t):
    """sigma_t for mu_s = 1/(1+s): the integral is log(1+t)."""
    return np.log1p(t)


def power_sigma(t, exponent):
    """sigma_t for mu_s = (1+s)^-exponent."""
    if exponent == 1:
        return np.log1p(t)
    return ((1 + np.asarray(t, dtype=float)) ** (1 - exponent) - 1) / (1 - exponent)


def gauss_circle_count(radius: float) -> int:
    """Lattice points of Z^2 in the closed disc, by direct enumeration."""
    r = int(math.floor(radius))
    count = 0
    for a in range(-r, r + 1):
        count += 2 * int(math.isqrt(int(math.floor(radius * radius)) - a * a)) + 1
    return count


def circle_counting(lam: float) -> int:
    """#{n in Z : |n| <= lam}."""
    return 2 * int(math.floor(lam)) + 1 if lam >= 0 else 0


def circle_zeta_dropped(s: float) -> float:
    """sum_{n != 0} |n|^s = 2 zeta(-s)."""
    return float(2 * mpmath.zeta(-s))


def epstein_z2(s: float) -> float:
    """sum_{k in Z^2, k != 0} |k|^-2s = 4 zeta(s) beta(s) (Dirichlet beta)."""
    beta = mpmath.nsum(lambda n: (-1) ** n / (2 * n + 1) ** s, [0, mpmath.inf])
    return float(4 * mpmath.zeta(s) * beta)


def brute_mu(values, weights, t):
    """mu_t by expanding each atom into a run of length ``weight`` and scanning."""
    pairs = sorted(zip(values, weights), key=lambda p: -p[0])
    pos = 0.0
    for v, w in pairs:
        pos += w
        if t < pos:
            return float(v)
    return 0.0


def brute_sigma(values, weights, t):
    pairs = sorted(zip(values, weights), key=lambda p: -p[0])
    left, acc = t, 0.0
    for v, w in pairs:
        take = min(w, left)
        acc += take * v
        left -= take
        if left <= 0:
            break
    return acc


def wedge_integral(a0, a1, a2):
    """int_{T^2} a0 da1 ^ da2 for Fourier dictionaries {(m1, m2): coefficient}.

    With a = sum c_m e^{i m.x}, the integrand's mean picks triples with
    m0 + m1 + m2 = 0 and the wedge gives (i m1_1)(i m2_2) - (i m1_2)(i m2_1).
    """
    total = 0j
    for (m0, c0), (m1, c1), (m2, c2) in itertools.product(a0.items(), a1.items(), a2.items()):
        if m0[0] + m1[0] + m2[0] or m0[1] + m1[1] + m2[1]:
            continue
        total += c0 * c1 * c2 * -(m1[0] * m2[1] - m1[1] * m2[0])
    return (2 * math.pi) ** 2 * total


def mellin_power_integral(p: float, q: float) -> float:
    """p * int_0^inf t^(p-1) / (1 + t^q) dt = p * pi / (q sin(p pi / q))."""
    return p * math.pi / (q * math.sin(p * math.pi / q))


def gaussian_cp(p: float) -> float:
    """p * int_0^inf e^(-t^2) t^(p-1) dt = Gamma(p/2 + 1)."""
    return math.gamma(p / 2 + 1)


def winding_number(coeffs: dict) -> int:
    """Winding of theta -> sum c_m e^{i m theta} by summing phase increments."""
    theta = np.linspace(0, 2 * np.pi, 20001)
    z = sum(c * np.exp(1j * m * theta) for m, c in coeffs.items())
    return int(round(np.sum(np.angle(z[1:] / z[:-1])) / (2 * np.pi)))


def toeplitz_index_of_monomial(m: int) -> int:
    """T_{z^m} on the Hardy space: a shift by m, index -m."""
    return -m


# Unit sphere S^{p-1} volumes from the classical table.
SPHERE_VOLUMES = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi, 4: 2 * math.pi ** 2}


def hochschild_wedge_constant() -> complex:
    """Factor turning int a0 da1 ^ da2 into the raw chart-and-cosphere integral on T^2.

    The symbol is chi a0 (-i c(da1)) (-i c(da2)) with c(v) = v1 sx + v2 sy and
    chi = sz.  Its matrix trace is (-i)^2 tr(sz c(u) c(v)) a0, and the
    antisymmetric part of tr(sz c(u) c(v)) is read off the Pauli products
    below.  The cosphere contributes the circumference 2 pi.
    """
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0 + 0j, -1.0])
    wedge_coefficient = np.trace(sz @ sx @ sy)  # coefficient of u1 v2 - u2 v1
    return complex((-1j) ** 2 * wedge_coefficient * 2 * math.pi)
