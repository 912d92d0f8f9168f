"""Spin operators, irreducible tensor operators and Bloch-tensor decompositions.

Basis convention used everywhere in this package: row/column index ``k`` of a
(2S+1)-dimensional matrix corresponds to the magnetic quantum number
``m = S - k`` (m descending from +S to -S).

The tensor operators ``T[s, m]`` are generated from the senior operator
``T[s, s] = 2**(-s/2) * S_plus**s`` by repeated lowering,

    T[s, m] = -[S_minus, T[s, m+1]] / sqrt((s+m+1)*(s-m)),

which fixes their normalisation completely.  In this basis the Hermitian
adjoint rule reads ``T[s, m]^dag = (-1)**m T[s, -m]`` and the matrices are not
unit-normalised: coefficients are extracted with the dual basis
``T[s, m] / Tr(T^dag T)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import sqrt

import numpy as np

from .errors import DomainError, ValidationError

#: Largest supported doubled spin (spin 51, covers the spin-51/2 molecules
#: that motivate the theory).  Dense algebra stays trivial at d <= 103.
MAX_TWO_S = 102

#: Tolerance for Hermiticity / trace validation of user-supplied matrices.
EPS_TOL = 1e-9


@dataclass(frozen=True, order=True)
class SpinValue:
    """Half-integer spin encoded as the doubled integer 2S."""

    two_s: int

    def __post_init__(self):
        if not isinstance(self.two_s, (int, np.integer)) or isinstance(self.two_s, bool):
            raise DomainError(f"two_s must be an integer, got {self.two_s!r}")
        if self.two_s < 1:
            raise DomainError(f"two_s must be >= 1, got {self.two_s}")
        if self.two_s > MAX_TWO_S:
            raise DomainError(f"two_s = {self.two_s} exceeds supported maximum {MAX_TWO_S}")

    @classmethod
    def from_spin(cls, s: float) -> "SpinValue":
        """Build from a spin value like 0.5, 1, 1.5; must be half-integer."""
        two_s = round(2 * s)
        if abs(2 * s - two_s) > 1e-12:
            raise DomainError(f"spin must be integer or half-integer, got {s}")
        return cls(int(two_s))

    @property
    def spin(self) -> float:
        return self.two_s / 2.0

    @property
    def dimension(self) -> int:
        return self.two_s + 1

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order (S, S-1, ..., -S)."""
        return (self.two_s - 2 * np.arange(self.dimension)) / 2.0

    def __str__(self):
        return f"{self.two_s // 2}" if self.two_s % 2 == 0 else f"{self.two_s}/2"


@dataclass(frozen=True)
class SpinOperators:
    """Dense spin matrices for one multiplet (hbar = 1)."""

    spin: SpinValue
    sz: np.ndarray = field(repr=False)
    s_plus: np.ndarray = field(repr=False)
    s_minus: np.ndarray = field(repr=False)
    sx: np.ndarray = field(repr=False)
    sy: np.ndarray = field(repr=False)


def build_spin_operators(spin: SpinValue) -> SpinOperators:
    """Standard angular-momentum matrices in the descending-m basis."""
    d = spin.dimension
    s = spin.spin
    m = spin.m_values()
    sz = np.diag(m).astype(complex)
    s_plus = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        # couples |s, m_k> -> |s, m_k + 1>, i.e. column k to row k-1
        s_plus[k - 1, k] = sqrt((s - m[k]) * (s + m[k] + 1))
    s_minus = s_plus.conj().T.copy()
    sx = (s_plus + s_minus) / 2.0
    sy = (s_plus - s_minus) / 2.0j
    return SpinOperators(spin=spin, sz=sz, s_plus=s_plus, s_minus=s_minus, sx=sx, sy=sy)


@lru_cache(maxsize=64)
def _ops(two_s: int) -> SpinOperators:
    return build_spin_operators(SpinValue(two_s))


@lru_cache(maxsize=512)
def _tensor_block(two_s: int, s: int) -> tuple:
    """All T[s, m] for m = s..-s (descending), built once by lowering."""
    ops = _ops(two_s)
    top = np.linalg.matrix_power(ops.s_plus, s) / 2.0 ** (s / 2.0)
    block = [top]
    t = top
    sm = ops.s_minus
    for m in range(s, -s, -1):
        # T[s, m-1] from T[s, m]
        t = -(sm @ t - t @ sm) / sqrt((s + m) * (s - m + 1))
        block.append(t)
    for t in block:
        t.setflags(write=False)
    return tuple(block)


def tensor_operator(spin: SpinValue, s: int, m: int) -> np.ndarray:
    """Operator spherical harmonic T[s, m] for the given multiplet.

    Raises DomainError unless 1 <= s <= 2S and -s <= m <= s.
    """
    if not (1 <= s <= spin.two_s):
        raise DomainError(f"tensor rank s={s} outside 1..{spin.two_s}")
    if not (-s <= m <= s):
        raise DomainError(f"projection m={m} outside -{s}..{s}")
    return _tensor_block(spin.two_s, s)[s - m]


@lru_cache(maxsize=2048)
def tensor_norm(two_s: int, s: int, m: int = 0) -> float:
    """Tr(T[s,m]^dag T[s,m]); independent of m at fixed (S, s)."""
    t = _tensor_block(two_s, s)[s - m]
    return float(np.trace(t.conj().T @ t).real)


def _index_table(two_s: int) -> list:
    """Packed ordering of (s, m): s ascending, m descending within each block."""
    return [(s, m) for s in range(1, two_s + 1) for m in range(s, -s - 1, -1)]


@dataclass
class BlochTensorSet:
    """Coefficients g[s, m] of the density-matrix expansion over T[s, m].

    The scalar part is fixed at 1/(2S+1) and not stored.  ``values`` is the
    packed complex vector with s ascending and m descending inside each rank,
    matching :func:`pack_index`.
    """

    spin: SpinValue
    values: np.ndarray

    def __post_init__(self):
        n = self.spin.dimension ** 2 - 1
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (n,):
            raise ValidationError(
                f"expected {n} packed coefficients for 2S={self.spin.two_s}, "
                f"got shape {self.values.shape}")

    @classmethod
    def zeros(cls, spin: SpinValue) -> "BlochTensorSet":
        return cls(spin, np.zeros(spin.dimension ** 2 - 1, dtype=complex))

    def g(self, s: int, m: int) -> complex:
        return complex(self.values[pack_index(self.spin.two_s, s, m)])

    def set_g(self, s: int, m: int, value: complex) -> None:
        self.values[pack_index(self.spin.two_s, s, m)] = value

    def items(self):
        for i, (s, m) in enumerate(_index_table(self.spin.two_s)):
            yield (s, m), self.values[i]

    def check_pairing(self, tol: float = EPS_TOL) -> None:
        """Hermiticity requires g[s,-m] = (-1)**m conj(g[s,m])."""
        for s in range(1, self.spin.two_s + 1):
            for m in range(0, s + 1):
                a = self.g(s, m)
                b = self.g(s, -m)
                if abs(b - (-1) ** m * np.conj(a)) > tol:
                    raise ValidationError(
                        f"broken Hermiticity pairing at (s={s}, m={m}): "
                        f"g(s,-m)={b}, (-1)^m conj(g(s,m))={(-1) ** m * np.conj(a)}")


def pack_index(two_s: int, s: int, m: int) -> int:
    """Position of (s, m) in the packed coefficient vector."""
    if not (1 <= s <= two_s):
        raise DomainError(f"tensor rank s={s} outside 1..{two_s}")
    if not (-s <= m <= s):
        raise DomainError(f"projection m={m} outside -{s}..{s}")
    # block s starts after ranks 1..s-1, i.e. offset sum(2r+1) = s^2 - 1
    return s * s - 1 + (s - m)


def validate_density(rho: np.ndarray, tol: float = EPS_TOL) -> np.ndarray:
    """Check Hermiticity and unit trace; returns the matrix as complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValidationError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > tol or abs(np.trace(rho).imag) > tol:
        raise ValidationError(f"density matrix trace {np.trace(rho)} != 1")
    return rho


def decompose_density(rho: np.ndarray, spin: SpinValue | None = None) -> BlochTensorSet:
    """Expand a trace-1 Hermitian matrix over the tensor-operator basis.

    Coefficients are trace projections against the dual basis,
    g[s, m] = Tr(T^dag rho) / Tr(T^dag T).
    """
    rho = validate_density(rho)
    d = rho.shape[0]
    if spin is None:
        spin = SpinValue(d - 1)
    elif spin.dimension != d:
        raise ValidationError(f"matrix dimension {d} does not match 2S={spin.two_s}")
    out = BlochTensorSet.zeros(spin)
    for s in range(1, spin.two_s + 1):
        block = _tensor_block(spin.two_s, s)
        n = tensor_norm(spin.two_s, s)
        for m in range(s, -s - 1, -1):
            t = block[s - m]
            out.set_g(s, m, np.trace(t.conj().T @ rho) / n)
    return out


def reconstruct_density(bloch: BlochTensorSet) -> np.ndarray:
    """Inverse of :func:`decompose_density`; validates the pairing invariant."""
    bloch.check_pairing()
    spin = bloch.spin
    d = spin.dimension
    rho = np.eye(d, dtype=complex) / d
    for (s, m), g in bloch.items():
        if g != 0:
            rho = rho + g * tensor_operator(spin, s, m)
    return rho


def invariant_norms(bloch: BlochTensorSet) -> np.ndarray:
    """Per-rank conserved norms sum_m |g[s, m]|**2, for s = 1..2S."""
    two_s = bloch.spin.two_s
    out = np.empty(two_s)
    for s in range(1, two_s + 1):
        i0 = s * s - 1
        out[s - 1] = float(np.sum(np.abs(bloch.values[i0:i0 + 2 * s + 1]) ** 2))
    return out


def basis_state_density(spin: SpinValue, m) -> np.ndarray:
    """Density matrix |S, m><S, m| (complete decoherence initial condition)."""
    two_m = round(2 * m)
    if abs(2 * m - two_m) > 1e-12 or (spin.two_s - two_m) % 2 != 0 or abs(two_m) > spin.two_s:
        raise DomainError(f"m={m} is not a valid projection for S={spin}")
    k = (spin.two_s - two_m) // 2
    rho = np.zeros((spin.dimension, spin.dimension), dtype=complex)
    rho[k, k] = 1.0
    return rho


def diagonal_tensor_rational(spin: SpinValue) -> list:
    """Exact rational vectors proportional to diag(T[s, 0]) for s = 1..2S.

    Gram-Schmidt over the powers m**k with Fraction arithmetic; used for the
    exact-rational transition tables.  The overall scale of each vector is
    irrelevant to any quantity of the form v[i] v[j] / sum(v**2).
    """
    two_s = spin.two_s
    d = spin.dimension
    ms = [Fraction(two_s - 2 * k, 2) for k in range(d)]
    basis = []
    for k in range(d):
        v = [m ** k for m in ms]
        for u in basis:
            uu = sum(x * x for x in u)
            uv = sum(x * y for x, y in zip(u, v))
            v = [y - Fraction(uv, uu) * x for x, y in zip(u, v)]
        basis.append(v)
    return basis[1:]
