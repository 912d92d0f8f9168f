"""Closed-form noise-averaged results for the fast-noise Landau-Zener problem.

Everything here follows from two matched building blocks:

* noise-only decay of the tensor coefficients g[s, m] with instantaneous rate
  (s(s+1) - m^2)/4 * (F_hat + G_hat) evaluated at Omega = sweep_rate * t, and
* the sudden spin-S sweep at the crossing, which multiplies the surviving
  m = 0 coefficients by the Legendre factor P_s(2 exp(-2 pi gamma^2) - 1).

Integrated over the full sweep the decay collapses to the single parameter
theta, giving the rank factors E_s = exp(-s(s+1) theta / 2).  The transition
probabilities for a decohered start are then

    P(j -> j') = 1/(2S+1) + sum_s E_s P_s(x) T_s[j] T_s[j'] / Tr(T_s^2)

with T_s the diagonal of the rank-s tensor operator; columns sum to one
exactly and the theta = 0 limit reproduces the squared sweep amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import atan, exp, pi, sqrt

import numpy as np

from .errors import DomainError, NumericError, ValidationError
from .lz_analytic import LZParams, jacobi_polynomial, lz_amplitudes
from .noise import NoiseSpec, TimeGrid
from .spin_algebra import SpinValue, diagonal_tensor_rational, tensor_operator

__all__ = [
    "AveragedProfile", "TransitionMatrix", "rank_decay", "accumulated_exponent",
    "gz_profile", "coherence_profile", "coherence_asymptote",
    "average_bloch_vector_full", "transition_probability_matrix",
    "fluctuation_spin_half", "fluctuation_tensor", "rational_table",
]


@dataclass
class AveragedProfile:
    """Time profile of an ensemble-averaged quantity, relative to t = -inf."""

    times: np.ndarray
    values: np.ndarray

    def final(self) -> float:
        return float(self.values[-1])


def rank_decay(s: int, theta: float) -> float:
    """Rank-s decay factor E_s = exp(-s(s+1) theta / 2)."""
    if s < 1:
        raise DomainError(f"rank must be >= 1, got {s}")
    if theta < 0:
        raise DomainError(f"theta must be >= 0, got {theta}")
    return exp(-0.5 * s * (s + 1) * theta)


def _integral_F(spec: NoiseSpec, sweep_rate: float, t: float) -> float:
    """int_{-inf}^{t} F_hat(sweep_rate t') dt' in closed form (arctangents)."""
    omega_t = sweep_rate * t
    if spec.xy_locked:
        j = spec.j_x
        lam = 1.0 / spec.tau_x
        om = spec.rotation_rate
        return (2.0 * j * j / sweep_rate) * (
            atan((omega_t - om) / lam) + atan((omega_t + om) / lam) + pi)
    total = 0.0
    for j, tau in ((spec.j_x, spec.tau_x), (spec.j_y, spec.tau_y)):
        if j > 0:
            total += (2.0 * j * j / sweep_rate) * (atan(omega_t * tau) + pi / 2.0)
    return total


def _integral_G(spec: NoiseSpec, sweep_rate: float, t: float) -> float:
    """int_{-inf}^{t} G_hat(sweep_rate t') dt'; vanishes at t -> +inf."""
    if not spec.xy_locked:
        return 0.0
    omega_t = sweep_rate * t
    j = spec.j_x
    lam = 1.0 / spec.tau_x
    om = spec.rotation_rate
    return (2.0 * j * j / sweep_rate) * (
        atan((omega_t - om) / lam) - atan((omega_t + om) / lam))


def accumulated_exponent(spec: NoiseSpec, sweep_rate: float, s: int, m: int,
                         t: float) -> float:
    """Decay exponent of <g[s, m]> accumulated from -inf to t."""
    weight = 0.25 * (s * (s + 1) - m * m)
    return weight * (_integral_F(spec, sweep_rate, t) + _integral_G(spec, sweep_rate, t))


def coherence_profile(spin: SpinValue, s: int, m: int, spec: NoiseSpec,
                      sweep_rate: float, grid: TimeGrid) -> AveragedProfile:
    """|<g[s, m](t)>| / |g[s, m](-inf)| for the noise-only (b_x = 0) problem.

    The profile multiplies the slow (tilde) variable; the removed fast phase
    does not affect the modulus.  Asymptote: exp(-(s(s+1) - m^2) theta / 2).
    """
    if not (1 <= s <= spin.two_s):
        raise DomainError(f"rank s={s} outside 1..{spin.two_s}")
    if not (-s <= m <= s):
        raise DomainError(f"projection m={m} outside -{s}..{s}")
    if sweep_rate <= 0:
        raise DomainError(f"sweep_rate must be > 0, got {sweep_rate}")
    times = grid.times()
    vals = np.array([exp(-accumulated_exponent(spec, sweep_rate, s, m, t))
                     for t in times])
    return AveragedProfile(times=times, values=vals)


def gz_profile(spec: NoiseSpec, sweep_rate: float, grid: TimeGrid) -> AveragedProfile:
    """<g_z(t)> / g_z(-inf) for a two-level system under transverse noise.

    Rank-1, m = 0 case of :func:`coherence_profile`: starts at 1, passes
    exp(-theta/2) at the crossing and saturates at exp(-theta).
    """
    return coherence_profile(SpinValue(1), 1, 0, spec, sweep_rate, grid)


def coherence_asymptote(s: int, m: int, theta: float) -> float:
    """t -> +inf limit exp(-(s(s+1) - m^2) theta / 2); G_hat drops out."""
    if s < 1 or abs(m) > s:
        raise DomainError(f"invalid (s, m) = ({s}, {m})")
    return exp(-0.5 * (s * (s + 1) - m * m) * theta)


def average_bloch_vector_full(g_init, gamma: float, theta: float):
    """Spin-1/2 averaged Bloch components after the full sweep with noise.

    ``g_init`` holds the asymptotic coefficients (g_plus, g_z, g_minus) of the
    oscillating exponents at t -> -inf, with g_minus = conj(g_plus) and g_z
    real.  The three-stage composition (noise, sweep rotation, noise) gives

        <g_z(+inf)>  = sqrt2 e^(-3 theta/4) (a b* g_+ + a* b g_-)
                       + e^(-theta) (2|a|^2 - 1) g_z
        <g_+(+inf)>  = e^(-theta/2) (a^2 g_+ - b^2 g_-)
                       - sqrt2 e^(-3 theta/4) a b g_z
        <g_-(+inf)>  = e^(-theta/2) (-b*^2 g_+ + a*^2 g_-)
                       - sqrt2 e^(-3 theta/4) a* b* g_z

    Returns (g_plus, g_z, g_minus) at t -> +inf.
    """
    gp, gz, gm = (complex(g_init[0]), complex(g_init[1]), complex(g_init[2]))
    if abs(gm - np.conj(gp)) > 1e-9 or abs(gz.imag) > 1e-9:
        raise ValidationError("g_init must satisfy g_minus = conj(g_plus), g_z real")
    if theta < 0:
        raise DomainError(f"theta must be >= 0, got {theta}")
    amps = lz_amplitudes(LZParams(gamma))
    a, b = amps.a, amps.b
    ac, bc = np.conj(a), np.conj(b)
    e_half = exp(-theta / 2.0)
    e_34 = exp(-0.75 * theta)
    e_full = exp(-theta)
    gz_out = (sqrt(2.0) * e_34 * (a * bc * gp + ac * b * gm)
              + e_full * (2.0 * abs(a) ** 2 - 1.0) * gz)
    gp_out = e_half * (a * a * gp - b * b * gm) - e_34 * sqrt(2.0) * a * b * gz
    gm_out = e_half * (-bc * bc * gp + ac * ac * gm) - e_34 * sqrt(2.0) * ac * bc * gz
    return gp_out, gz_out, gm_out


@dataclass
class TransitionMatrix:
    """P[j' <- j] for a decohered start; rows final, columns initial.

    Row/column index 0 corresponds to m = S, descending.
    """

    spin: SpinValue
    P: np.ndarray

    def probability(self, m_from, m_to) -> float:
        two_s = self.spin.two_s
        i = (two_s - round(2 * m_to)) // 2
        j = (two_s - round(2 * m_from)) // 2
        return float(self.P[i, j])


def _initial_diagonal_coefficients(spin: SpinValue, j_index: int) -> np.ndarray:
    """Solve the linear system fixing g[s, 0](-inf) for a basis initial state."""
    d = spin.dimension
    two_s = spin.two_s
    A = np.empty((d, two_s))
    for s in range(1, two_s + 1):
        A[:, s - 1] = np.real(np.diag(tensor_operator(spin, s, 0)))
    rhs = -np.full(d, 1.0 / d)
    rhs[j_index] += 1.0
    g, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    residual = np.abs(A @ g - rhs).max()
    if residual > 1e-10:
        raise NumericError(
            f"initial-condition solve residual {residual:.2e} exceeds 1e-10")
    return g


def transition_probability_matrix(spin: SpinValue, gamma: float,
                                  theta: float) -> TransitionMatrix:
    """Noise-averaged transition probabilities between diabatic states.

    The rank decay E_s is applied exactly once, which reproduces the closed
    spin-1/2 formula P(1->2) = (1 + e^-theta - 2 e^(-theta - 2 pi gamma^2))/2.
    """
    if theta < 0:
        raise DomainError(f"theta must be >= 0, got {theta}")
    d = spin.dimension
    two_s = spin.two_s
    x = 2.0 * exp(-2.0 * pi * gamma * gamma) - 1.0  # 2|a|^2 - 1
    diag = np.empty((two_s, d))
    for s in range(1, two_s + 1):
        diag[s - 1] = np.real(np.diag(tensor_operator(spin, s, 0)))
    P = np.full((d, d), 1.0 / d)
    for j in range(d):
        g0 = _initial_diagonal_coefficients(spin, j)
        for s in range(1, two_s + 1):
            factor = g0[s - 1] * rank_decay(s, theta) * jacobi_polynomial(s, 0, 0, x)
            P[:, j] += factor * diag[s - 1]
    return TransitionMatrix(spin=spin, P=P)


def fluctuation_spin_half(g_init, gamma: float, theta: float) -> float:
    """Asymptotic Bloch-vector variance <g^2> - <g>^2 for spin 1/2.

    gamma = 0 admits arbitrary initial coherence; gamma > 0 uses the matched
    full-sweep result, which is available for a decohered start only.
    """
    gp, gz, gm = (complex(g_init[0]), complex(g_init[1]), complex(g_init[2]))
    if abs(gm - np.conj(gp)) > 1e-9 or abs(gz.imag) > 1e-9:
        raise ValidationError("g_init must satisfy g_minus = conj(g_plus), g_z real")
    if theta < 0:
        raise DomainError(f"theta must be >= 0, got {theta}")
    if gamma == 0.0:
        trans_sq = 2.0 * abs(gp) ** 2      # g_x^2 + g_y^2
        return (gz.real ** 2 * (1.0 - exp(-2.0 * theta))
                + trans_sq * (1.0 - exp(-theta)))
    if abs(gp) > 1e-12:
        raise DomainError(
            "the full-sweep fluctuation formula requires complete initial "
            "decoherence (g_plus = 0) when gamma > 0")
    p = exp(-2.0 * pi * gamma * gamma)     # |a|^2
    return abs(gz) ** 2 * (1.0 - exp(-2.0 * theta)
                           - 4.0 * (p - p * p)
                           * (exp(-1.5 * theta) - exp(-2.0 * theta)))


def fluctuation_tensor(spin: SpinValue, s: int, gamma: float, theta: float,
                       g_init_s0: float) -> float:
    """Asymptotic fluctuation of the conserved rank-s norm, decohered start.

    [g_s0]^2 (1 - E_s^2 P_s(x)^2); neglects the averaged m != 0 coherences
    regenerated by the sweep, hence exact at gamma = 0.
    """
    if not (1 <= s <= spin.two_s):
        raise DomainError(f"rank s={s} outside 1..{spin.two_s}")
    x = 2.0 * exp(-2.0 * pi * gamma * gamma) - 1.0
    e_s = rank_decay(s, theta)
    leg = jacobi_polynomial(s, 0, 0, x)
    return g_init_s0 ** 2 * (1.0 - e_s ** 2 * leg ** 2)


def rational_table(spin: SpinValue):
    """Exact-rational transition table at gamma = 0.

    Returns an array of Fractions with shape (d, d, 2S+1):
    entry [j', j, 0] is the constant 1/(2S+1) and [j', j, s] the coefficient
    of E_s in P(j -> j'), indices ordered by descending m.
    """
    d = spin.dimension
    vs = diagonal_tensor_rational(spin)
    out = np.empty((d, d, spin.two_s + 1), dtype=object)
    for i in range(d):
        for j in range(d):
            out[i, j, 0] = Fraction(1, d)
    for s, v in enumerate(vs, start=1):
        norm = sum(x * x for x in v)
        for i in range(d):
            for j in range(d):
                out[i, j, s] = v[i] * v[j] / norm
    return out
