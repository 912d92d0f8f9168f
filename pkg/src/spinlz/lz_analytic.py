"""Exact noiseless Landau-Zener theory for arbitrary spin.

The two-level sweep from t = -inf to +inf is encoded in the SU(2) element

    u = [[a, b], [-conj(b), conj(a)]],      |a|^2 + |b|^2 = 1,

with a = exp(-pi gamma^2) real and b fixed by the complex Gamma function.
For spin S the evolution matrix is the spin-S representation of u; its
elements are products of powers of (a, b) with Jacobi polynomials.

``rotation_matrix_element(spin, m, m')`` returns <m|U_S|m'> with rows the
final and columns the initial projection, so that populations after the sweep
starting from |m'> are |<m|U_S|m'>|^2.  In this convention the spin-3/2 matrix
reads, top row first, (a^3, sqrt3 a^2 b, sqrt3 a b^2, b^3), and the central
spin-2 element is 6|a|^4 - 6|a|^2 + 1.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from math import factorial, pi, sqrt

import numpy as np

from .errors import DomainError
from .spin_algebra import SpinValue

__all__ = [
    "LZParams", "SU2Amplitudes", "lanczos_gamma", "lz_amplitudes",
    "jacobi_polynomial", "rotation_matrix_element", "rotation_matrix",
    "node_count", "compose_amplitudes",
]


@dataclass(frozen=True)
class LZParams:
    """Dimensionless Landau-Zener parameter gamma >= 0."""

    gamma: float

    def __post_init__(self):
        g = self.gamma
        if not np.isfinite(g) or g < 0:
            raise DomainError(f"gamma must be finite and >= 0, got {g}")

    @classmethod
    def from_fields(cls, b_x: float, sweep_rate: float) -> "LZParams":
        """gamma = b_x / (2 sqrt(sweep_rate)) in hbar = 1 units."""
        if sweep_rate <= 0:
            raise DomainError(f"sweep_rate must be > 0, got {sweep_rate}")
        return cls(abs(b_x) / (2.0 * sqrt(sweep_rate)))


@dataclass(frozen=True)
class SU2Amplitudes:
    """Survival and transition amplitudes of the two-level sweep."""

    a: complex
    b: complex

    def __post_init__(self):
        n = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(n - 1.0) > 1e-9:
            raise DomainError(f"|a|^2 + |b|^2 = {n} != 1")

    def as_matrix(self) -> np.ndarray:
        a, b = self.a, self.b
        return np.array([[a, b], [-np.conj(b), np.conj(a)]])


# Lanczos approximation, g = 7, 9 coefficients.  Relative accuracy is a few
# 1e-15 over the region used here (arguments with real part >= 1/2).
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def lanczos_gamma(z: complex) -> complex:
    """Complex Gamma function via the Lanczos approximation (with reflection)."""
    z = complex(z)
    if z.real < 0.5:
        # reflection formula Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return pi / (cmath.sin(pi * z) * lanczos_gamma(1.0 - z))
    z -= 1.0
    x = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        x += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return sqrt(2.0 * pi) * t ** (z + 0.5) * cmath.exp(-t) * x


def lz_amplitudes(params: LZParams) -> SU2Amplitudes:
    """Asymptotic sweep amplitudes: a = exp(-pi gamma^2), b from Gamma(-i gamma^2).

    Evaluated through Gamma(1 - i gamma^2) = -i gamma^2 Gamma(-i gamma^2),
    which removes the pole at gamma = 0 so the b -> 0 limit needs no special
    case.
    """
    g = params.gamma
    a = np.exp(-pi * g * g)
    # b = -sqrt(2 pi) exp(-pi g^2/2 + i pi/4) / (g Gamma(-i g^2))
    #   = -sqrt(2 pi) exp(...) * g / (i Gamma(1 - i g^2))
    b = (-sqrt(2.0 * pi) * cmath.exp(-pi * g * g / 2.0 + 0.25j * pi) * g
         / (1j * lanczos_gamma(1.0 - 1j * g * g)))
    return SU2Amplitudes(a=complex(a), b=b)


def jacobi_polynomial(n: int, alpha: int, beta: int, x: float) -> float:
    """P_n^(alpha, beta)(x) by the forward three-term recurrence.

    Stable on |x| <= 1 for the non-negative integer parameters used by the
    rotation matrices (degrees up to 2S = 102).
    """
    if n < 0:
        raise DomainError(f"polynomial degree must be >= 0, got {n}")
    if n == 0:
        return 1.0
    p_prev = 1.0
    p = (alpha + 1) + (alpha + beta + 2) * (x - 1.0) / 2.0
    for k in range(1, n):
        c1 = 2.0 * (k + 1) * (k + alpha + beta + 1) * (2 * k + alpha + beta)
        c2 = (2 * k + alpha + beta + 1) * (alpha * alpha - beta * beta)
        c3 = ((2 * k + alpha + beta) * (2 * k + alpha + beta + 1)
              * (2 * k + alpha + beta + 2))
        c4 = 2.0 * (k + alpha) * (k + beta) * (2 * k + alpha + beta + 2)
        p_prev, p = p, ((c2 + c3 * x) * p - c4 * p_prev) / c1
    return p


def _two_m(spin: SpinValue, m, name: str) -> int:
    two_m = round(2 * m)
    if abs(2 * m - two_m) > 1e-12:
        raise DomainError(f"{name}={m} is not integer or half-integer")
    if (spin.two_s - two_m) % 2 != 0:
        raise DomainError(f"{name}={m} has wrong integrality for S={spin}")
    if abs(two_m) > spin.two_s:
        raise DomainError(f"|{name}|={abs(m)} exceeds S={spin}")
    return int(two_m)


def _element(two_s: int, two_m: int, two_mp: int, a: complex, b: complex) -> complex:
    # Reduce to the sector m >= |m'| where both amplitude exponents are
    # non-negative, using the exact symmetries of the representation:
    #   <-m|U|-m'> = (-1)^(m-m') conj(<m|U|m'>)
    #   <m'|U|m>(a, b) = <m|U|m'>(a, -conj(b))        (transpose)
    if two_m + two_mp < 0:
        sign = -1.0 if ((two_m - two_mp) // 2) % 2 else 1.0
        return sign * np.conj(_element(two_s, -two_m, -two_mp, a, b))
    if two_m < two_mp:
        return _element(two_s, two_mp, two_m, a, -np.conj(b))
    mu = (two_m - two_mp) // 2          # exponent of b
    nu = (two_m + two_mp) // 2          # exponent of a
    n = (two_s - two_m) // 2            # Jacobi degree
    num = factorial((two_s + two_m) // 2) * factorial((two_s - two_m) // 2)
    den = factorial((two_s + two_mp) // 2) * factorial((two_s - two_mp) // 2)
    coeff = sqrt(num / den)
    x = 2.0 * abs(a) ** 2 - 1.0
    return coeff * a ** nu * b ** mu * jacobi_polynomial(n, mu, nu, x)


def rotation_matrix_element(spin: SpinValue, m, m_prime, amps: SU2Amplitudes) -> complex:
    """<m|U_S|m'>: amplitude to end in |m> starting from |m'>."""
    two_m = _two_m(spin, m, "m")
    two_mp = _two_m(spin, m_prime, "m_prime")
    return complex(_element(spin.two_s, two_m, two_mp, complex(amps.a), complex(amps.b)))


def rotation_matrix(spin: SpinValue, amps: SU2Amplitudes) -> np.ndarray:
    """Full spin-S sweep matrix in the descending-m basis."""
    d = spin.dimension
    a, b = complex(amps.a), complex(amps.b)
    out = np.empty((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            out[i, j] = _element(spin.two_s, spin.two_s - 2 * i, spin.two_s - 2 * j, a, b)
    return out


def node_count(spin: SpinValue, m, m_prime) -> int:
    """Number of zeros of <m|U_S|m'> as gamma runs over (0, inf)."""
    two_m = abs(_two_m(spin, m, "m"))
    two_mp = abs(_two_m(spin, m_prime, "m_prime"))
    return (spin.two_s - max(two_m, two_mp)) // 2


def compose_amplitudes(u1: SU2Amplitudes, u2: SU2Amplitudes) -> SU2Amplitudes:
    """Group product u1 * u2 of two SU(2) elements in (a, b) form."""
    a = u1.a * u2.a - u1.b * np.conj(u2.b)
    b = u1.a * u2.b + u1.b * np.conj(u2.a)
    return SU2Amplitudes(a=a, b=b)
