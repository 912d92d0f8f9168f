"""Closed-form averaged results: tables, profiles, fluctuations."""

import numpy as np
import pytest
from fractions import Fraction as F
from math import exp, pi, sqrt

from scipy.integrate import quad

from spinlz import (DomainError, LZParams, SpinValue, ValidationError,
                    TimeGrid, NoiseSpec, average_bloch_vector_full,
                    coherence_asymptote, coherence_profile, fluctuation_spin_half,
                    fluctuation_tensor, gz_profile, lz_amplitudes, rank_decay,
                    rational_table, rotation_matrix, spectral_density_F,
                    spectral_density_G, transition_probability_matrix)
from spinlz.averaged import _integral_F, _integral_G

# Transition tables at gamma = 0 keyed (m_from, m_to): constant followed by
# the coefficients of E_1..E_2S.  Three entries correct obvious misprints:
# both (1/2 -> +-1/2) E_2 coefficients must be 1/4 (not 1/20) and
# P(2 -> -2) follows from the j -> -j symmetry; otherwise columns would not
# sum to one and the theta = 0 limit would not reproduce the sweep matrix.
TABLE_S1 = {
    (1, 1): (F(1, 3), F(1, 2), F(1, 6)),
    (1, 0): (F(1, 3), F(0), F(-1, 3)),
    (1, -1): (F(1, 3), F(-1, 2), F(1, 6)),
    (0, 0): (F(1, 3), F(0), F(2, 3)),
}
TABLE_S32 = {
    (F(3, 2), F(3, 2)): (F(1, 4), F(9, 20), F(1, 4), F(1, 20)),
    (F(3, 2), F(1, 2)): (F(1, 4), F(3, 20), F(-1, 4), F(-3, 20)),
    (F(3, 2), F(-1, 2)): (F(1, 4), F(-3, 20), F(-1, 4), F(3, 20)),
    (F(3, 2), F(-3, 2)): (F(1, 4), F(-9, 20), F(1, 4), F(-1, 20)),
    (F(1, 2), F(1, 2)): (F(1, 4), F(1, 20), F(1, 4), F(9, 20)),
    (F(1, 2), F(-1, 2)): (F(1, 4), F(-1, 20), F(1, 4), F(-9, 20)),
}
TABLE_S2 = {
    (2, 2): (F(1, 5), F(2, 5), F(2, 7), F(1, 10), F(1, 70)),
    (2, 1): (F(1, 5), F(1, 5), F(-1, 7), F(-1, 5), F(-2, 35)),
    (2, 0): (F(1, 5), F(0), F(-2, 7), F(0), F(3, 35)),
    (2, -1): (F(1, 5), F(-1, 5), F(-1, 7), F(1, 5), F(-2, 35)),
    (2, -2): (F(1, 5), F(-2, 5), F(2, 7), F(-1, 10), F(1, 70)),
    (1, 1): (F(1, 5), F(1, 10), F(1, 14), F(2, 5), F(8, 35)),
    (1, 0): (F(1, 5), F(0), F(1, 7), F(0), F(-12, 35)),
    (1, -1): (F(1, 5), F(-1, 10), F(1, 14), F(-2, 5), F(8, 35)),
    (0, 0): (F(1, 5), F(0), F(2, 7), F(0), F(18, 35)),
}


def _table_entry(spin, table, m_from, m_to):
    i = (spin.two_s - round(2 * m_to)) // 2
    j = (spin.two_s - round(2 * m_from)) // 2
    return tuple(table[i, j, k] for k in range(spin.two_s + 1))


@pytest.mark.parametrize("two_s,ref", [(2, TABLE_S1), (3, TABLE_S32), (4, TABLE_S2)])
def test_rational_tables_match_paper(two_s, ref):
    spin = SpinValue(two_s)
    table = rational_table(spin)
    for (m_from, m_to), coeffs in ref.items():
        assert _table_entry(spin, table, m_from, m_to) == coeffs, (m_from, m_to)


def test_rational_table_columns_sum_to_one():
    for two_s in (1, 2, 3, 4, 5, 8):
        spin = SpinValue(two_s)
        table = rational_table(spin)
        d = spin.dimension
        for j in range(d):
            total = sum(table[i, j, 0] for i in range(d))
            assert total == F(1)
            for s in range(1, two_s + 1):
                assert sum(table[i, j, s] for i in range(d)) == F(0)


def test_rational_table_specific_coefficients():
    # E_4 coefficient of P(0 -> 0) at S = 2 and E_1 of P(3/2 -> 1/2)
    t2 = rational_table(SpinValue(4))
    assert _table_entry(SpinValue(4), t2, 0, 0)[4] == F(18, 35)
    t32 = rational_table(SpinValue(3))
    assert _table_entry(SpinValue(3), t32, F(3, 2), F(1, 2))[1] == F(3, 20)


# -------------------------------------------------------- transition matrix

def test_spin_half_closed_form_exact():
    """E_s enters exactly once: reproduces the spin-1/2 formula to 1e-14."""
    spin = SpinValue(1)
    for gamma in (0.0, 0.3, 0.5, 1.0, 2.0):
        for th in (0.0, 0.5, 1.0, 3.0):
            tm = transition_probability_matrix(spin, gamma, th)
            ref = 0.5 * (1.0 + exp(-th) - 2.0 * exp(-th - 2 * pi * gamma ** 2))
            assert abs(tm.probability(0.5, -0.5) - ref) < 1e-14
            assert abs(tm.probability(0.5, 0.5) - (1.0 - ref)) < 1e-14


@pytest.mark.parametrize("two_s", [1, 2, 3, 4, 5, 8])
def test_columns_sum_to_one(two_s):
    spin = SpinValue(two_s)
    for gamma in np.linspace(0.0, 2.0, 20):
        for th in np.linspace(0.0, 5.0, 20):
            tm = transition_probability_matrix(spin, gamma, th)
            assert np.abs(tm.P.sum(axis=0) - 1.0).max() < 1e-12


@pytest.mark.parametrize("two_s", [1, 2, 3, 4])
def test_theta_zero_matches_sweep_matrix(two_s):
    spin = SpinValue(two_s)
    for gamma in (0.1, 0.35, 0.8, 1.5):
        U = rotation_matrix(spin, lz_amplitudes(LZParams(gamma)))
        tm = transition_probability_matrix(spin, gamma, 0.0)
        assert np.abs(tm.P - np.abs(U) ** 2).max() < 1e-12


def test_strong_noise_equalizes():
    for two_s in (1, 2, 3, 4):
        spin = SpinValue(two_s)
        tm = transition_probability_matrix(spin, 0.7, 80.0)
        assert np.abs(tm.P - 1.0 / spin.dimension).max() < 1e-12


@pytest.mark.parametrize("two_s", [1, 2, 3, 4])
def test_transition_symmetries(two_s):
    spin = SpinValue(two_s)
    d = spin.dimension
    tm = transition_probability_matrix(spin, 0.45, 0.8)
    assert np.abs(tm.P - tm.P.T).max() < 1e-12
    assert np.abs(tm.P - tm.P[::-1, ::-1]).max() < 1e-12
    assert tm.P.min() >= -1e-15 and tm.P.max() <= 1.0 + 1e-15


def test_monotone_decoherence():
    thetas = np.linspace(0.0, 4.0, 30)
    for s in (1, 2, 3):
        x = 2.0 * exp(-2 * pi * 0.4 ** 2) - 1.0
        from spinlz import jacobi_polynomial
        vals = [rank_decay(s, th) * abs(jacobi_polynomial(s, 0, 0, x)) for th in thetas]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


def test_rank_decay_values():
    assert rank_decay(1, 1.0) == pytest.approx(exp(-1.0))
    assert rank_decay(2, 1.0) == pytest.approx(exp(-3.0))
    assert rank_decay(4, 0.5) == pytest.approx(exp(-5.0))
    with pytest.raises(DomainError):
        rank_decay(0, 1.0)


# ----------------------------------------------------------------- profiles

def _grid(t0, t1, n):
    return TimeGrid(t0, (t1 - t0) / (n - 1), n)


def test_gz_profile_landmarks():
    th = 1.3
    spec = NoiseSpec(j_x=sqrt(th / pi), tau_x=0.05)
    # window of 4000 accumulation times so the missed tails are < 1e-3
    prof = gz_profile(spec, 1.0, _grid(-8e4, 8e4, 2001))
    assert prof.values[0] == pytest.approx(1.0, abs=1e-3)
    mid = np.argmin(np.abs(prof.times))
    assert prof.values[mid] == pytest.approx(exp(-th / 2.0), rel=1e-6)
    assert prof.final() == pytest.approx(exp(-th), rel=1e-3)
    assert np.all(np.diff(prof.values) <= 1e-15)


def test_gz_profile_tau_only_shapes_transient():
    # asymptote independent of tau, mid-profile not
    th = 1.0
    finals = []
    mids = []
    for tau in (0.02, 0.1):
        spec = NoiseSpec(j_x=sqrt(th / pi), tau_x=tau)
        finals.append(gz_profile(spec, 1.0, _grid(-8e4, 8e4, 801)).final())
        fine = gz_profile(spec, 1.0, _grid(-50.0, 50.0, 501))
        mids.append(np.interp(3.0, fine.times, fine.values))
    assert finals[0] == pytest.approx(finals[1], rel=1e-3)
    assert abs(mids[0] - mids[1]) > 1e-3


def test_coherence_profile_asymptotes():
    th = 0.9
    spec = NoiseSpec(j_x=sqrt(th / (2 * pi)), j_y=sqrt(th / (2 * pi)),
                     tau_x=0.05, tau_y=0.05)
    grid = _grid(-8e4, 8e4, 801)
    spin = SpinValue(4)
    # s=1, m=+-1 -> e^(-theta/2)
    for m in (1, -1):
        prof = coherence_profile(spin, 1, m, spec, 1.0, grid)
        assert prof.final() == pytest.approx(exp(-th / 2.0), rel=1e-3)
    # s=2, m=0 -> e^(-3 theta)
    prof = coherence_profile(spin, 2, 0, spec, 1.0, grid)
    assert prof.final() == pytest.approx(exp(-3.0 * th), rel=3e-3)
    assert coherence_asymptote(2, 0, th) == pytest.approx(exp(-3.0 * th))
    assert coherence_asymptote(1, 1, th) == pytest.approx(exp(-th / 2.0))


def test_coherence_m0_reduces_to_gz_profile():
    spec = NoiseSpec(j_x=0.4, tau_x=0.05)
    grid = _grid(-100.0, 100.0, 201)
    a = gz_profile(spec, 1.0, grid)
    b = coherence_profile(SpinValue(2), 1, 0, spec, 1.0, grid)
    assert np.abs(a.values - b.values).max() < 1e-15


def test_coherence_profile_domain_errors():
    spec = NoiseSpec(j_x=0.4, tau_x=0.05)
    grid = _grid(-10.0, 10.0, 21)
    with pytest.raises(DomainError):
        coherence_profile(SpinValue(2), 3, 0, spec, 1.0, grid)
    with pytest.raises(DomainError):
        coherence_profile(SpinValue(2), 1, 2, spec, 1.0, grid)


def test_decay_integrals_against_quadrature():
    """Closed arctangent forms vs direct quadrature of the spectral density."""
    for spec in (NoiseSpec(j_x=0.5, tau_x=0.3, j_y=0.3, tau_y=0.15),
                 NoiseSpec(j_x=0.5, j_y=0.5, tau_x=0.2, tau_y=0.2, c_xy=0.7)):
        for t in (-3.0, 0.0, 2.0):
            ref_f = quad(lambda u: spectral_density_F(spec, u), -np.inf, t,
                         limit=400)[0]
            assert _integral_F(spec, 1.0, t) == pytest.approx(ref_f, abs=1e-8)
            ref_g = quad(lambda u: spectral_density_G(spec, u), -np.inf, t,
                         limit=400)[0]
            assert _integral_G(spec, 1.0, t) == pytest.approx(ref_g, abs=1e-8)


# ----------------------------------------------------- spin-1/2 full sweep

U1_PRINTED = None


def _u1_printed(a, b):
    """The coefficient-transformation matrix acting on (g_+, g_z, g_-)."""
    ac, bc = np.conj(a), np.conj(b)
    return np.array([
        [a * a, -sqrt(2) * a * b, -b * b],
        [sqrt(2) * a * bc, 2 * abs(a) ** 2 - 1, sqrt(2) * ac * b],
        [-bc * bc, -sqrt(2) * ac * bc, ac * ac]])


def test_average_bloch_decohered_start():
    gamma, th = 0.6, 0.8
    amps = lz_amplitudes(LZParams(gamma))
    gp, gz, gm = average_bloch_vector_full((0.0, 1.0, 0.0), gamma, th)
    assert gz == pytest.approx(exp(-th) * (2 * abs(amps.a) ** 2 - 1) * 1.0)
    ref_gp = -exp(-0.75 * th) * sqrt(2) * amps.a * amps.b
    assert gp == pytest.approx(ref_gp)
    assert gm == pytest.approx(np.conj(ref_gp))


def test_average_bloch_noiseless_is_sweep_rotation():
    gamma = 0.4
    amps = lz_amplitudes(LZParams(gamma))
    rng = np.random.default_rng(8)
    gp0 = rng.normal() + 1j * rng.normal()
    gz0 = rng.normal()
    g0 = np.array([gp0, gz0, np.conj(gp0)])
    out = np.array(average_bloch_vector_full(g0, gamma, 0.0))
    ref = _u1_printed(amps.a, amps.b) @ g0
    assert np.abs(out - ref).max() < 1e-12


def test_average_bloch_validates_pairing():
    with pytest.raises(ValidationError):
        average_bloch_vector_full((0.3, 1.0, 0.1), 0.3, 0.5)
    with pytest.raises(ValidationError):
        average_bloch_vector_full((0.0, 1.0j, 0.0), 0.3, 0.5)


def test_coefficient_transform_matches_conjugation():
    """The printed 3x3 action equals the dual-basis transform of rho -> u rho u^dag."""
    from spinlz import SU2Amplitudes, build_spin_operators
    rng = np.random.default_rng(9)
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    amps = SU2Amplitudes(v[0] + 1j * v[1], v[2] + 1j * v[3])
    u = amps.as_matrix()
    ops = build_spin_operators(SpinValue(1))
    # paper basis: T_+ = S_+/sqrt2, T_0 = S_z, T_- = S_-/sqrt2
    basis = [ops.s_plus / sqrt(2), ops.sz, ops.s_minus / sqrt(2)]
    M = np.empty((3, 3), dtype=complex)
    for i, ti in enumerate(basis):
        ni = np.trace(ti.conj().T @ ti).real
        for j, tj in enumerate(basis):
            M[i, j] = np.trace(ti.conj().T @ u @ tj @ u.conj().T) / ni
    assert np.abs(M - _u1_printed(amps.a, amps.b)).max() < 1e-12


# -------------------------------------------------------------- fluctuations

def test_fluctuation_spin_half_limits():
    assert fluctuation_spin_half((0.0, 1.0, 0.0), 0.5, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert fluctuation_spin_half((0.0, 1.0, 0.0), 0.5, 60.0) == pytest.approx(1.0)
    # gamma = 0 closed form with coherent start
    th = 0.7
    gp = 0.2 + 0.1j
    val = fluctuation_spin_half((gp, 0.5, np.conj(gp)), 0.0, th)
    ref = 0.25 * (1 - exp(-2 * th)) + 2 * abs(gp) ** 2 * (1 - exp(-th))
    assert val == pytest.approx(ref)


def test_fluctuation_gamma_zero_decohered():
    th = 1.1
    val = fluctuation_spin_half((0.0, 1.0, 0.0), 0.0, th)
    assert val == pytest.approx(1.0 - exp(-2 * th))


def test_fluctuation_full_formula():
    gamma, th = 0.5, 1.0
    p = exp(-2 * pi * gamma ** 2)
    ref = 1.0 - exp(-2 * th) - 4 * (p - p * p) * (exp(-1.5 * th) - exp(-2 * th))
    assert fluctuation_spin_half((0.0, 1.0, 0.0), gamma, th) == pytest.approx(ref)
    with pytest.raises(DomainError):
        fluctuation_spin_half((0.2, 1.0, 0.2), gamma, th)


def test_fluctuation_consistent_with_mean_vector():
    """1 - |<g>|^2 from the averaged components equals the closed form."""
    gamma, th = 0.7, 0.9
    gp, gz, gm = average_bloch_vector_full((0.0, 1.0, 0.0), gamma, th)
    direct = 1.0 - (abs(gz) ** 2 + 2 * abs(gp) ** 2)
    assert fluctuation_spin_half((0.0, 1.0, 0.0), gamma, th) == pytest.approx(direct)


def test_fluctuation_tensor():
    spin = SpinValue(4)
    assert fluctuation_tensor(spin, 2, 0.0, 0.0, 0.7) == pytest.approx(0.0, abs=1e-15)
    assert fluctuation_tensor(spin, 2, 0.3, 50.0, 0.7) == pytest.approx(0.49)
    # spin-1/2 agreement at gamma = 0
    th = 0.8
    a = fluctuation_tensor(SpinValue(1), 1, 0.0, th, 1.0)
    b = fluctuation_spin_half((0.0, 1.0, 0.0), 0.0, th)
    assert a == pytest.approx(b)
    with pytest.raises(DomainError):
        fluctuation_tensor(spin, 5, 0.0, 0.0, 1.0)
