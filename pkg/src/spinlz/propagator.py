"""Monte Carlo oracle: stochastic Schroedinger / Bloch-tensor propagation.

Realizations are integrated by fixed-step RK4 with noise sampled exactly on
the half-step grid, so every stage time has a matching sample.  Ensemble
members draw from per-(realization, axis) Philox counter streams split off
the master seed, making results bit-identical for any execution order,
thread count or chunking.

The default window, t_end = -t_start = C max(1/(sweep tau_min), b_x/sweep,
1/sqrt(sweep)) with C = 10, covers the noise accumulation time; the residual
decay exponent missed outside the window is reported as ``tail_bound``.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from math import ceil, exp, sqrt

import numpy as np

from . import _kernels
from .averaged import _integral_F
from .errors import ConfigError, DomainError, ValidationError
from .noise import NoisePath, NoiseSpec, TimeGrid, philox_stream
from .spin_algebra import (BlochTensorSet, SpinValue, _index_table,
                           basis_state_density, decompose_density,
                           tensor_norm, tensor_operator, validate_density)

__all__ = [
    "ExperimentConfig", "Trajectory", "EnsembleResult", "EnsembleSummary",
    "evolve_state", "evolve_bloch", "run_ensemble", "ensemble_statistics",
]

#: Window factor C of the default time-window rule.
WINDOW_FACTOR = 10.0
#: Phase-resolution constant of the step rule h (|b|_max + 3 J_max) <= 0.05.
STEP_PHASE_BUDGET = 0.05
#: Fixed chunk length (full steps) for noise generation; results do not
#: depend on it because every (realization, axis) stream is consumed
#: contiguously.
CHUNK_STEPS = 16384
#: Realization block width tuned for cache-resident state arrays.
BLOCK = 128


def _auto_window(sweep_rate, b_x, spec, factor):
    scales = [b_x / sweep_rate, 1.0 / sqrt(sweep_rate)]
    if spec.tau_min is not None:
        scales.append(1.0 / (sweep_rate * spec.tau_min))
    return factor * max(scales)


def _auto_step(sweep_rate, b_x, spec, t_max):
    h = STEP_PHASE_BUDGET / (sweep_rate * t_max + b_x + 3.0 * spec.j_max)
    if spec.tau_min is not None:
        h = min(h, spec.tau_min / 10.0)
    return h


@dataclass
class ExperimentConfig:
    """Complete description of one Monte Carlo experiment.

    ``initial_state`` is a diabatic projection m (complete decoherence), a
    state vector, or a density matrix.  Leave ``t_start``/``t_end``/``step``
    as None to apply the window and step rules.
    """

    spin: SpinValue
    sweep_rate: float
    b_x: float = 0.0
    spec: NoiseSpec = field(default_factory=NoiseSpec)
    t_start: float | None = None
    t_end: float | None = None
    step: float | None = None
    ensemble_size: int = 1
    master_seed: int = 0
    initial_state: object = None
    representation: str = "state-vector"
    window_factor: float = WINDOW_FACTOR
    store_points: int = 401
    renorm_every: int = 64

    def __post_init__(self):
        if self.sweep_rate <= 0:
            raise ConfigError("sweep_rate must be > 0", path="sweep_rate")
        if self.b_x < 0:
            raise ConfigError("b_x must be >= 0", path="b_x")
        if self.ensemble_size < 1:
            raise ConfigError("ensemble_size must be >= 1", path="ensemble")
        if self.representation not in ("state-vector", "bloch-tensor"):
            raise ConfigError(
                f"unknown representation {self.representation!r}", path="representation")
        if self.initial_state is None:
            self.initial_state = self.spin.spin  # topmost diabatic state
        if (self.t_start is None) != (self.t_end is None):
            raise ConfigError("t_start and t_end must be given together", path="t_start")
        if self.t_start is None:
            t_max = _auto_window(self.sweep_rate, self.b_x, self.spec, self.window_factor)
            self.t_start = -t_max
            self.t_end = t_max
        if not (self.t_start < 0.0 < self.t_end):
            raise ConfigError("window must satisfy t_start < 0 < t_end", path="t_start")
        if self.step is None:
            self.step = _auto_step(self.sweep_rate, self.b_x, self.spec,
                                   max(-self.t_start, self.t_end))
        if self.step <= 0:
            raise ConfigError("step must be > 0", path="step")
        # snap the step so the window is an integer number of steps
        span = self.t_end - self.t_start
        self.n_steps = int(ceil(span / self.step - 1e-9))
        self.step = span / self.n_steps
        self._validate_step()
        if self.store_points < 2:
            raise ConfigError("store_points must be >= 2", path="store_points")

    def _validate_step(self):
        t_max = max(-self.t_start, self.t_end)
        b_max = self.sweep_rate * t_max + self.b_x
        if self.step * (b_max + 3.0 * self.spec.j_max) > STEP_PHASE_BUDGET * (1 + 1e-9):
            raise ConfigError(
                f"step {self.step:.3g} violates h*(|b|_max + 3 J_max) <= "
                f"{STEP_PHASE_BUDGET}; need h <= "
                f"{STEP_PHASE_BUDGET / (b_max + 3.0 * self.spec.j_max):.3g}",
                path="step")
        tau_min = self.spec.tau_min
        if tau_min is not None and self.step > tau_min / 10.0 * (1 + 1e-9):
            raise ConfigError(
                f"step {self.step:.3g} must be <= tau_min/10 = {tau_min / 10.0:.3g}",
                path="step")

    @property
    def time_grid(self) -> TimeGrid:
        return TimeGrid(self.t_start, self.step, self.n_steps + 1)

    @property
    def noise_grid(self) -> TimeGrid:
        return self.time_grid.half_step()

    @property
    def tail_bound(self) -> float:
        """Decay exponent missed outside the finite window (rank-1 scale)."""
        if self.spec.tau_min is None:
            return 0.0
        full = _integral_F(self.spec, self.sweep_rate, np.inf)
        inside = (_integral_F(self.spec, self.sweep_rate, self.t_end)
                  - _integral_F(self.spec, self.sweep_rate, self.t_start))
        return 0.5 * (full - inside)

    def store_steps(self) -> np.ndarray:
        """Global step numbers (0..n_steps) at which the state is recorded."""
        pts = min(self.store_points, self.n_steps + 1)
        return np.unique(np.round(np.linspace(0, self.n_steps, pts)).astype(np.int64))

    def initial_vector(self) -> np.ndarray:
        """Initial pure state as a vector; rejects mixed density matrices."""
        init = self.initial_state
        d = self.spin.dimension
        if np.isscalar(init):
            rho = basis_state_density(self.spin, init)
            k = int(np.argmax(np.real(np.diag(rho))))
            psi = np.zeros(d, dtype=complex)
            psi[k] = 1.0
            return psi
        arr = np.asarray(init, dtype=complex)
        if arr.ndim == 1:
            if arr.shape != (d,):
                raise ConfigError(f"state vector must have length {d}", path="initial_state")
            n = np.linalg.norm(arr)
            if abs(n - 1.0) > 1e-9:
                raise ConfigError("state vector must be normalized", path="initial_state")
            return arr
        rho = validate_density(arr)
        w, v = np.linalg.eigh(rho)
        if w[-1] < 1.0 - 1e-9:
            raise ConfigError(
                "state-vector representation needs a pure initial state; "
                "use representation = bloch-tensor for mixed states",
                path="initial_state")
        return v[:, -1]

    def initial_bloch(self) -> BlochTensorSet:
        init = self.initial_state
        if np.isscalar(init):
            rho = basis_state_density(self.spin, init)
        else:
            arr = np.asarray(init, dtype=complex)
            rho = np.outer(arr, arr.conj()) if arr.ndim == 1 else arr
        return decompose_density(rho, self.spin)


@dataclass
class Trajectory:
    """Time-resolved record of one realization."""

    times: np.ndarray
    populations: np.ndarray          # (n_t, d)
    bloch: np.ndarray                # (n_t, d^2 - 1) complex, packed (s, m)
    norm_drift: float
    bloch_norm_drift: float
    final_state: np.ndarray          # state vector or packed g, per representation
    representation: str = "state-vector"


@dataclass
class EnsembleSummary:
    """Unbiased statistics of final population vectors."""

    mean: np.ndarray
    variance: np.ndarray
    std_error: np.ndarray
    n: int
    histograms: list

    def bootstrap_se(self, n_boot: int = 1000, seed: int = 0) -> np.ndarray:
        """Bootstrap standard error of the mean (cross-check of std_error)."""
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, self.n, size=(n_boot, self.n))
        means = self._finals[idx].mean(axis=1)
        return means.std(axis=0, ddof=1)


@dataclass
class EnsembleResult:
    """Ensemble means, variances and standard errors on the stored grid."""

    times: np.ndarray
    pop_mean: np.ndarray             # (n_t, d)
    pop_var: np.ndarray
    pop_se: np.ndarray
    bloch_mean: np.ndarray           # (n_t, d^2-1) complex
    bloch_sq_mean: np.ndarray        # (n_t, 2S): mean of per-rank norms
    final_populations: np.ndarray    # (N, d) raw finals
    final_bloch: np.ndarray          # (N, d^2-1) complex raw finals
    n_realizations: int
    norm_drift_max: float
    tail_bound: float

    @property
    def final_mean(self) -> np.ndarray:
        return self.pop_mean[-1]

    @property
    def final_se(self) -> np.ndarray:
        return self.pop_se[-1]


def _ladder_arrays(spin: SpinValue):
    d = spin.dimension
    s = spin.spin
    m = spin.m_values()
    mz = m.copy()
    c2 = np.zeros(d + 1)
    for k in range(1, d):
        c2[k] = 0.5 * sqrt((s - m[k]) * (s + m[k] + 1))
    return mz, c2


def _bloch_arrays(spin: SpinValue):
    table = _index_table(spin.two_s)
    ng = len(table)
    mg = np.empty(ng)
    lp = np.zeros(ng)
    lm = np.zeros(ng)
    iup = np.full(ng, -1, dtype=np.int64)
    idn = np.full(ng, -1, dtype=np.int64)
    for i, (s, m) in enumerate(table):
        mg[i] = m
        if m < s:
            lp[i] = sqrt((s - m) * (s + m + 1))
            iup[i] = i - 1
        if m > -s:
            lm[i] = sqrt((s + m) * (s - m + 1))
            idn[i] = i + 1
    return mg, lp, lm, iup, idn


def _dual_basis_tensor(spin: SpinValue) -> np.ndarray:
    """M[i] = T[s,m]^dag / Tr(T^dag T) so that g_i = psi^dag M_i psi."""
    table = _index_table(spin.two_s)
    d = spin.dimension
    M = np.empty((len(table), d, d), dtype=complex)
    for i, (s, m) in enumerate(table):
        t = tensor_operator(spin, s, m)
        M[i] = t.conj().T / tensor_norm(spin.two_s, s)
    return M


def _m0_diagonals(spin: SpinValue):
    """Rows: diag(T[s,0]) for s = 1..2S;维 populations from g coefficients."""
    d = spin.dimension
    rows = np.empty((spin.two_s, d))
    idx = np.empty(spin.two_s, dtype=np.int64)
    table = _index_table(spin.two_s)
    for s in range(1, spin.two_s + 1):
        rows[s - 1] = np.real(np.diag(tensor_operator(spin, s, 0)))
        idx[s - 1] = table.index((s, 0))
    return rows, idx


def _rank_slices(spin: SpinValue):
    return [(s, s * s - 1, s * s + 2 * s) for s in range(1, spin.two_s + 1)]


class _NoiseFeeder:
    """Chunked exact-OU noise for a block of realizations.

    Keeps one Philox generator per (realization, axis); innovations are drawn
    contiguously per stream so values are independent of the chunk layout.
    """

    def __init__(self, spec: NoiseSpec, h_half: float, master_seed: int,
                 realizations, n_half_total: int):
        self.spec = spec
        self.nb = len(realizations)
        self.h = h_half
        self._dummy = np.zeros((1, 1))
        self._rot = None
        self._single = {}
        if spec.xy_locked:
            lam = 1.0 / spec.tau_x
            phi_c = np.exp(-(lam + 1j * spec.rotation_rate) * h_half)
            self._rot = (phi_c.real, phi_c.imag,
                         spec.j_x * sqrt(1.0 - abs(phi_c) ** 2))
            self._gen_x = [philox_stream(master_seed, r, 0) for r in realizations]
            z = np.array([[g.standard_normal(), g.standard_normal()]
                          for g in self._gen_x])
            self._carry_x = spec.j_x * z[:, 0]
            self._carry_y = spec.j_x * z[:, 1]
        axes = [] if spec.xy_locked else [("x", spec.j_x, spec.tau_x, 0),
                                          ("y", spec.j_y, spec.tau_y, 1)]
        axes.append(("z", spec.j_z, spec.tau_z, 2))
        for axis, j, tau, stream in axes:
            if j <= 0:
                continue
            gens = [philox_stream(master_seed, r, stream) for r in realizations]
            carry = np.array([j * g.standard_normal() for g in gens])
            phi = exp(-h_half / tau)
            sig = j * sqrt(1.0 - phi * phi)
            self._single[axis] = (gens, carry, phi, sig)

    def next_chunk(self, n_half: int):
        """Noise arrays (n_half+1, nb) for the next chunk, (ex, ey, ez)."""
        out = {}
        L = n_half + 1
        if self._rot is not None:
            phr, phi_, sig = self._rot
            xi = np.empty((self.nb, 2 * n_half))
            for r, g in enumerate(self._gen_x):
                xi[r] = g.standard_normal(2 * n_half)
            ex = np.empty((L, self.nb))
            ey = np.empty((L, self.nb))
            _kernels.ou_fill_transposed_rotating(ex, ey, xi, self._carry_x,
                                                 self._carry_y, phr, phi_, sig)
            out["x"], out["y"] = ex, ey
        for axis, (gens, carry, phi, sig) in self._single.items():
            xi = np.empty((self.nb, n_half))
            for r, g in enumerate(gens):
                xi[r] = g.standard_normal(n_half)
            arr = np.empty((L, self.nb))
            _kernels.ou_fill_transposed(arr, xi, carry, phi, sig)
            out[axis] = arr
        ex = out.get("x", self._dummy)
        ey = out.get("y", self._dummy)
        ez = out.get("z", self._dummy)
        return ex, ey, ez, "x" in out, "y" in out, "z" in out


def _run_block(cfg: ExperimentConfig, realizations, snap_steps) -> tuple:
    """Integrate one block of realizations; returns snapshots and drift."""
    nb = len(realizations)
    state_mode = cfg.representation == "state-vector"
    if state_mode:
        mz, c2 = _ladder_arrays(cfg.spin)
        psi0 = cfg.initial_vector()
        wr = np.repeat(psi0.real[:, None], nb, axis=1)
        wi = np.repeat(psi0.imag[:, None], nb, axis=1)
    else:
        mg, lp, lm, iup, idn = _bloch_arrays(cfg.spin)
        g0 = cfg.initial_bloch().values
        wr = np.repeat(g0.real[:, None], nb, axis=1)
        wi = np.repeat(g0.imag[:, None], nb, axis=1)
    nc = wr.shape[0]
    feeder = _NoiseFeeder(cfg.spec, cfg.step / 2.0, cfg.master_seed,
                          realizations, 2 * cfg.n_steps + 1)
    n_snap = len(snap_steps)
    snap_r = np.empty((n_snap, nc, nb))
    snap_i = np.empty((n_snap, nc, nb))
    ptr = 0
    if snap_steps[0] == 0:
        snap_r[0] = wr
        snap_i[0] = wi
        ptr = 1
    drift = 0.0
    done = 0
    while done < cfg.n_steps:
        cs = min(CHUNK_STEPS, cfg.n_steps - done)
        ex, ey, ez, hx, hy, hz = feeder.next_chunk(2 * cs)
        local = []
        while ptr + len(local) < n_snap and snap_steps[ptr + len(local)] <= done + cs:
            local.append(snap_steps[ptr + len(local)] - done)
        local_arr = np.asarray(local, dtype=np.int64)
        sl = slice(ptr, ptr + len(local))
        t0 = cfg.t_start + done * cfg.step
        if state_mode:
            drift = _kernels.rk4_state_chunk(
                wr, wi, ex, ey, ez, hx, hy, hz, cfg.b_x, cfg.sweep_rate,
                t0, cfg.step, cs, mz, c2, cfg.renorm_every, drift,
                local_arr, snap_r[sl], snap_i[sl])
        else:
            _kernels.rk4_bloch_chunk(
                wr, wi, ex, ey, ez, hx, hy, hz, cfg.b_x, cfg.sweep_rate,
                t0, cfg.step, cs, mg, lp, lm, iup, idn,
                local_arr, snap_r[sl], snap_i[sl])
        ptr += len(local)
        done += cs
    return snap_r, snap_i, drift


def run_ensemble(cfg: ExperimentConfig, threads: int = 1) -> EnsembleResult:
    """Propagate the full ensemble and aggregate deterministic statistics.

    Results are bit-identical for any ``threads`` because blocks are
    independent and the reduction runs in fixed block order.
    """
    n = cfg.ensemble_size
    snap_steps = cfg.store_steps()
    times = cfg.t_start + cfg.step * snap_steps
    blocks = [list(range(b, min(b + BLOCK, n))) for b in range(0, n, BLOCK)]
    if threads > 1 and len(blocks) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda blk: _run_block(cfg, blk, snap_steps), blocks))
    else:
        results = [_run_block(cfg, blk, snap_steps) for blk in blocks]
    state_mode = cfg.representation == "state-vector"
    spin = cfg.spin
    d = spin.dimension
    ng = d * d - 1
    n_t = len(snap_steps)
    pop_sum = np.zeros((n_t, d))
    pop_sq = np.zeros((n_t, d))
    bloch_sum = np.zeros((n_t, ng), dtype=complex)
    rank_sq_sum = np.zeros((n_t, spin.two_s))
    finals_pop = np.empty((n, d))
    finals_bloch = np.empty((n, ng), dtype=complex)
    drift_max = 0.0
    if state_mode:
        M = _dual_basis_tensor(spin)
    else:
        diag_rows, m0_idx = _m0_diagonals(spin)
    slices = _rank_slices(spin)
    at = 0
    for (snap_r, snap_i), drift in ((  (res[0], res[1]), res[2]) for res in results):
        nb = snap_r.shape[2]
        drift_max = max(drift_max, drift)
        if state_mode:
            psi = snap_r + 1j * snap_i          # (n_t, d, nb)
            pops = snap_r ** 2 + snap_i ** 2
            g = np.einsum("tkr,nkl,tlr->tnr", psi.conj(), M, psi, optimize=True)
        else:
            g = snap_r + 1j * snap_i            # (n_t, ng, nb)
            gm0 = np.real(g[:, m0_idx, :])      # (n_t, 2S, nb)
            pops = 1.0 / d + np.einsum("sk,tsr->tkr", diag_rows, gm0)
        pop_sum += pops.sum(axis=2)
        pop_sq += (pops ** 2).sum(axis=2)
        bloch_sum += g.sum(axis=2)
        for s, i0, i1 in slices:
            rank_sq_sum[:, s - 1] += (np.abs(g[:, i0:i1, :]) ** 2).sum(axis=(1, 2))
        finals_pop[at:at + nb] = pops[-1].T
        finals_bloch[at:at + nb] = g[-1].T
        at += nb
    pop_mean = pop_sum / n
    pop_var = np.maximum(pop_sq / n - pop_mean ** 2, 0.0) * (n / max(n - 1, 1))
    pop_se = np.sqrt(pop_var / n)
    return EnsembleResult(
        times=times, pop_mean=pop_mean, pop_var=pop_var, pop_se=pop_se,
        bloch_mean=bloch_sum / n, bloch_sq_mean=rank_sq_sum / n,
        final_populations=finals_pop, final_bloch=finals_bloch,
        n_realizations=n, norm_drift_max=drift_max, tail_bound=cfg.tail_bound)


def _path_to_transposed(cfg: ExperimentConfig, path: NoisePath):
    grid = cfg.noise_grid
    pg = path.grid
    if (abs(pg.t_start - grid.t_start) > 1e-12 or pg.num_points != grid.num_points
            or abs(pg.step - grid.step) > 1e-12 * max(1.0, grid.step)):
        raise ValidationError(
            "noise path grid does not match the config half-step grid "
            f"(need start={grid.t_start}, step={grid.step}, n={grid.num_points})")
    dummy = np.zeros((1, 1))
    hx = np.any(path.eta_x != 0.0)
    hy = np.any(path.eta_y != 0.0)
    hz = np.any(path.eta_z != 0.0)
    ex = np.ascontiguousarray(path.eta_x[:, None]) if hx else dummy
    ey = np.ascontiguousarray(path.eta_y[:, None]) if hy else dummy
    ez = np.ascontiguousarray(path.eta_z[:, None]) if hz else dummy
    return ex, ey, ez, bool(hx), bool(hy), bool(hz)


def evolve_state(cfg: ExperimentConfig, path: NoisePath,
                 psi0: np.ndarray | None = None) -> Trajectory:
    """Single-realization Schroedinger trajectory on an explicit noise path."""
    ex, ey, ez, hx, hy, hz = _path_to_transposed(cfg, path)
    psi0 = cfg.initial_vector() if psi0 is None else np.asarray(psi0, dtype=complex)
    d = cfg.spin.dimension
    if psi0.shape != (d,):
        raise ValidationError(f"psi0 must have shape ({d},)")
    mz, c2 = _ladder_arrays(cfg.spin)
    wr = np.ascontiguousarray(psi0.real[:, None])
    wi = np.ascontiguousarray(psi0.imag[:, None])
    snap_steps = cfg.store_steps()
    n_snap = len(snap_steps)
    snap_r = np.empty((n_snap, d, 1))
    snap_i = np.empty((n_snap, d, 1))
    ptr = 0
    if snap_steps[0] == 0:
        snap_r[0] = wr; snap_i[0] = wi; ptr = 1
    local = snap_steps[ptr:]
    drift = _kernels.rk4_state_chunk(
        wr, wi, ex, ey, ez, hx, hy, hz, cfg.b_x, cfg.sweep_rate,
        cfg.t_start, cfg.step, cfg.n_steps, mz, c2, cfg.renorm_every, 0.0,
        np.asarray(local, dtype=np.int64), snap_r[ptr:], snap_i[ptr:])
    psi_t = (snap_r + 1j * snap_i)[:, :, 0]
    pops = np.abs(psi_t) ** 2
    M = _dual_basis_tensor(cfg.spin)
    g_t = np.einsum("tk,nkl,tl->tn", psi_t.conj(), M, psi_t, optimize=True)
    if cfg.renorm_every == 0:
        norms = np.sqrt(pops.sum(axis=1))
        drift = float(np.abs(1.0 - norms).max())
    rank_norms = _per_rank_norms(cfg.spin, g_t)
    bdrift = float(np.abs(rank_norms - rank_norms[0]).max())
    times = cfg.t_start + cfg.step * snap_steps
    return Trajectory(times=times, populations=pops, bloch=g_t,
                      norm_drift=drift, bloch_norm_drift=bdrift,
                      final_state=psi_t[-1], representation="state-vector")


def evolve_bloch(cfg: ExperimentConfig, path: NoisePath,
                 g0: BlochTensorSet | None = None) -> Trajectory:
    """Single-realization integration of the tensor-coefficient equations."""
    ex, ey, ez, hx, hy, hz = _path_to_transposed(cfg, path)
    if g0 is None:
        g0 = cfg.initial_bloch()
    elif g0.spin != cfg.spin:
        raise ValidationError("g0 spin does not match the configuration")
    mg, lp, lm, iup, idn = _bloch_arrays(cfg.spin)
    ng = len(mg)
    wr = np.ascontiguousarray(g0.values.real[:, None])
    wi = np.ascontiguousarray(g0.values.imag[:, None])
    snap_steps = cfg.store_steps()
    n_snap = len(snap_steps)
    snap_r = np.empty((n_snap, ng, 1))
    snap_i = np.empty((n_snap, ng, 1))
    ptr = 0
    if snap_steps[0] == 0:
        snap_r[0] = wr; snap_i[0] = wi; ptr = 1
    _kernels.rk4_bloch_chunk(
        wr, wi, ex, ey, ez, hx, hy, hz, cfg.b_x, cfg.sweep_rate,
        cfg.t_start, cfg.step, cfg.n_steps, mg, lp, lm, iup, idn,
        np.asarray(snap_steps[ptr:], dtype=np.int64), snap_r[ptr:], snap_i[ptr:])
    g_t = (snap_r + 1j * snap_i)[:, :, 0]
    d = cfg.spin.dimension
    diag_rows, m0_idx = _m0_diagonals(cfg.spin)
    pops = 1.0 / d + np.real(g_t[:, m0_idx]) @ diag_rows
    rank_norms = _per_rank_norms(cfg.spin, g_t)
    bdrift = float(np.abs(rank_norms - rank_norms[0]).max())
    times = cfg.t_start + cfg.step * snap_steps
    return Trajectory(times=times, populations=pops, bloch=g_t,
                      norm_drift=0.0, bloch_norm_drift=bdrift,
                      final_state=g_t[-1], representation="bloch-tensor")


def _per_rank_norms(spin: SpinValue, g_t: np.ndarray) -> np.ndarray:
    out = np.empty((g_t.shape[0], spin.two_s))
    for s, i0, i1 in _rank_slices(spin):
        out[:, s - 1] = (np.abs(g_t[:, i0:i1]) ** 2).sum(axis=1)
    return out


def ensemble_statistics(finals, histogram_bins: int = 20) -> EnsembleSummary:
    """Unbiased mean/variance/SE and per-state histograms of final populations."""
    arr = np.atleast_2d(np.asarray(finals, dtype=float))
    if arr.size == 0:
        raise DomainError("ensemble_statistics needs a non-empty sample")
    n = arr.shape[0]
    mean = arr.mean(axis=0)
    if n > 1:
        var = arr.var(axis=0, ddof=1)
    else:
        var = np.zeros(arr.shape[1])
    se = np.sqrt(var / n)
    hists = [np.histogram(arr[:, k], bins=histogram_bins, range=(0.0, 1.0))
             for k in range(arr.shape[1])]
    summary = EnsembleSummary(mean=mean, variance=var, std_error=se, n=n,
                              histograms=hists)
    summary._finals = arr
    return summary
