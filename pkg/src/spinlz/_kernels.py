"""Compiled integration kernels.

State is held in structure-of-arrays layout (component, realization) with
separate real and imaginary parts; noise arrays are transposed to
(half-step index, realization) so the innermost realization loops vectorize.
All kernels are deterministic: no reductions across realizations happen
inside them.
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True, nogil=True)
def ou_fill_transposed(out, xi, carry, phi, sig):
    """Exact OU recursion along axis 0 of ``out`` (shape (L, nr)).

    ``xi`` has shape (nr, L-1) with innovations in row-major order; ``carry``
    holds the value at the first grid point on entry and the last on exit.
    Row tiles keep the strided writes cache resident.
    """
    L, nr = out.shape
    for r in range(nr):
        out[0, r] = carry[r]
    tile = 512
    k0 = 1
    while k0 < L:
        k1 = min(k0 + tile, L)
        for r in range(nr):
            prev = out[k0 - 1, r]
            for k in range(k0, k1):
                prev = phi * prev + sig * xi[r, k - 1]
                out[k, r] = prev
        k0 = k1
    for r in range(nr):
        carry[r] = out[L - 1, r]


@njit(cache=True, fastmath=True, nogil=True)
def ou_fill_transposed_rotating(outx, outy, xi, carry_x, carry_y,
                                phi_r, phi_i, sig):
    """Rotating 2-D OU pair: complex factor (phi_r + i phi_i) acting on x + iy.

    ``xi`` has shape (nr, 2(L-1)) with x and y innovations interleaved.
    """
    L, nr = outx.shape
    for r in range(nr):
        outx[0, r] = carry_x[r]
        outy[0, r] = carry_y[r]
    tile = 512
    k0 = 1
    while k0 < L:
        k1 = min(k0 + tile, L)
        for r in range(nr):
            px = outx[k0 - 1, r]
            py = outy[k0 - 1, r]
            for k in range(k0, k1):
                nx = phi_r * px - phi_i * py + sig * xi[r, 2 * (k - 1)]
                ny = phi_r * py + phi_i * px + sig * xi[r, 2 * (k - 1) + 1]
                px = nx
                py = ny
                outx[k, r] = px
                outy[k, r] = py
        k0 = k1
    for r in range(nr):
        carry_x[r] = outx[L - 1, r]
        carry_y[r] = outy[L - 1, r]


@njit(cache=True, fastmath=True, nogil=True)
def rk4_state_chunk(pr, pi_, ex, ey, ez, has_x, has_y, has_z,
                    b_x, sweep, t0, h, nsteps, mz, c2,
                    renorm_every, drift0, snap_steps, snap_r, snap_i):
    """RK4 sweep of one chunk for the Schroedinger state.

    pr/pi_: (d, nr) real/imaginary state, updated in place.
    ex/ey/ez: (2*nsteps+1, nr) noise on the half-step grid (dummies when the
    matching has_* flag is false).
    snap_steps: chunk-local step numbers (1-based, ascending) after which the
    state is copied into snap_r/snap_i of shape (len(snap_steps), d, nr).
    Returns the largest |1 - norm| observed at renormalization points.
    """
    d, nr = pr.shape
    k1r = np.empty((d, nr)); k1i = np.empty((d, nr))
    k2r = np.empty((d, nr)); k2i = np.empty((d, nr))
    k3r = np.empty((d, nr)); k3i = np.empty((d, nr))
    k4r = np.empty((d, nr)); k4i = np.empty((d, nr))
    yr = np.empty((d, nr)); yi = np.empty((d, nr))
    bzv = np.empty(nr); bxv = np.empty(nr); byv = np.empty(nr)
    drift = drift0
    snap_ptr = 0
    n_snap = snap_steps.shape[0]
    for step in range(nsteps):
        t = t0 + step * h
        for stage in range(4):
            if stage == 0:
                ts = t; idx = 2 * step
                sr = pr; si = pi_
                outr, outi = k1r, k1i
            elif stage == 1:
                ts = t + 0.5 * h; idx = 2 * step + 1
                for k in range(d):
                    for r in range(nr):
                        yr[k, r] = pr[k, r] + 0.5 * h * k1r[k, r]
                        yi[k, r] = pi_[k, r] + 0.5 * h * k1i[k, r]
                sr = yr; si = yi
                outr, outi = k2r, k2i
            elif stage == 2:
                ts = t + 0.5 * h; idx = 2 * step + 1
                for k in range(d):
                    for r in range(nr):
                        yr[k, r] = pr[k, r] + 0.5 * h * k2r[k, r]
                        yi[k, r] = pi_[k, r] + 0.5 * h * k2i[k, r]
                sr = yr; si = yi
                outr, outi = k3r, k3i
            else:
                ts = t + h; idx = 2 * step + 2
                for k in range(d):
                    for r in range(nr):
                        yr[k, r] = pr[k, r] + h * k3r[k, r]
                        yi[k, r] = pi_[k, r] + h * k3i[k, r]
                sr = yr; si = yi
                outr, outi = k4r, k4i
            base = sweep * ts
            if has_z:
                for r in range(nr):
                    bzv[r] = base + ez[idx, r]
            else:
                for r in range(nr):
                    bzv[r] = base
            if has_x:
                for r in range(nr):
                    bxv[r] = b_x + ex[idx, r]
            else:
                for r in range(nr):
                    bxv[r] = b_x
            if has_y:
                for r in range(nr):
                    byv[r] = ey[idx, r]
            else:
                for r in range(nr):
                    byv[r] = 0.0
            # d psi/dt = i (b_z m psi + c2[k] b_plus psi_{k-1}
            #                        + c2[k+1] b_minus psi_{k+1})
            for k in range(d):
                ck = c2[k]
                ckp = c2[k + 1]
                mk = mz[k]
                if 0 < k < d - 1:
                    for r in range(nr):
                        ar = (bzv[r] * mk * sr[k, r]
                              + ck * (bxv[r] * sr[k - 1, r] - byv[r] * si[k - 1, r])
                              + ckp * (bxv[r] * sr[k + 1, r] + byv[r] * si[k + 1, r]))
                        ai = (bzv[r] * mk * si[k, r]
                              + ck * (bxv[r] * si[k - 1, r] + byv[r] * sr[k - 1, r])
                              + ckp * (bxv[r] * si[k + 1, r] - byv[r] * sr[k + 1, r]))
                        outr[k, r] = -ai
                        outi[k, r] = ar
                elif k > 0:
                    for r in range(nr):
                        ar = (bzv[r] * mk * sr[k, r]
                              + ck * (bxv[r] * sr[k - 1, r] - byv[r] * si[k - 1, r]))
                        ai = (bzv[r] * mk * si[k, r]
                              + ck * (bxv[r] * si[k - 1, r] + byv[r] * sr[k - 1, r]))
                        outr[k, r] = -ai
                        outi[k, r] = ar
                else:
                    for r in range(nr):
                        ar = (bzv[r] * mk * sr[k, r]
                              + ckp * (bxv[r] * sr[k + 1, r] + byv[r] * si[k + 1, r]))
                        ai = (bzv[r] * mk * si[k, r]
                              + ckp * (bxv[r] * si[k + 1, r] - byv[r] * sr[k + 1, r]))
                        outr[k, r] = -ai
                        outi[k, r] = ar
        h6 = h / 6.0
        for k in range(d):
            for r in range(nr):
                pr[k, r] += h6 * (k1r[k, r] + 2.0 * k2r[k, r] + 2.0 * k3r[k, r] + k4r[k, r])
                pi_[k, r] += h6 * (k1i[k, r] + 2.0 * k2i[k, r] + 2.0 * k3i[k, r] + k4i[k, r])
        if renorm_every > 0 and (step + 1) % renorm_every == 0:
            for r in range(nr):
                nn = 0.0
                for k in range(d):
                    nn += pr[k, r] * pr[k, r] + pi_[k, r] * pi_[k, r]
                root = np.sqrt(nn)
                dd = abs(1.0 - root)
                if dd > drift:
                    drift = dd
                inv = 1.0 / root
                for k in range(d):
                    pr[k, r] *= inv
                    pi_[k, r] *= inv
        if snap_ptr < n_snap and step + 1 == snap_steps[snap_ptr]:
            for k in range(d):
                for r in range(nr):
                    snap_r[snap_ptr, k, r] = pr[k, r]
                    snap_i[snap_ptr, k, r] = pi_[k, r]
            snap_ptr += 1
    return drift


@njit(cache=True, fastmath=True, nogil=True)
def rk4_bloch_chunk(gr, gi, ex, ey, ez, has_x, has_y, has_z,
                    b_x, sweep, t0, h, nsteps, mg, lp, lm, iup, idn,
                    snap_steps, snap_r, snap_i):
    """RK4 sweep for the packed tensor coefficients.

    dg[i]/dt = i m_i b_z g[i] - (i/2) lp[i] b_plus g[iup[i]]
                              - (i/2) lm[i] b_minus g[idn[i]]
    with iup/idn = -1 at block edges.  Layout mirrors rk4_state_chunk.
    """
    ng, nr = gr.shape
    k1r = np.empty((ng, nr)); k1i = np.empty((ng, nr))
    k2r = np.empty((ng, nr)); k2i = np.empty((ng, nr))
    k3r = np.empty((ng, nr)); k3i = np.empty((ng, nr))
    k4r = np.empty((ng, nr)); k4i = np.empty((ng, nr))
    yr = np.empty((ng, nr)); yi = np.empty((ng, nr))
    bzv = np.empty(nr); bxv = np.empty(nr); byv = np.empty(nr)
    snap_ptr = 0
    n_snap = snap_steps.shape[0]
    for step in range(nsteps):
        t = t0 + step * h
        for stage in range(4):
            if stage == 0:
                ts = t; idx = 2 * step
                sr = gr; si = gi
                outr, outi = k1r, k1i
            elif stage == 1:
                ts = t + 0.5 * h; idx = 2 * step + 1
                for k in range(ng):
                    for r in range(nr):
                        yr[k, r] = gr[k, r] + 0.5 * h * k1r[k, r]
                        yi[k, r] = gi[k, r] + 0.5 * h * k1i[k, r]
                sr = yr; si = yi
                outr, outi = k2r, k2i
            elif stage == 2:
                ts = t + 0.5 * h; idx = 2 * step + 1
                for k in range(ng):
                    for r in range(nr):
                        yr[k, r] = gr[k, r] + 0.5 * h * k2r[k, r]
                        yi[k, r] = gi[k, r] + 0.5 * h * k2i[k, r]
                sr = yr; si = yi
                outr, outi = k3r, k3i
            else:
                ts = t + h; idx = 2 * step + 2
                for k in range(ng):
                    for r in range(nr):
                        yr[k, r] = gr[k, r] + h * k3r[k, r]
                        yi[k, r] = gi[k, r] + h * k3i[k, r]
                sr = yr; si = yi
                outr, outi = k4r, k4i
            base = sweep * ts
            if has_z:
                for r in range(nr):
                    bzv[r] = base + ez[idx, r]
            else:
                for r in range(nr):
                    bzv[r] = base
            if has_x:
                for r in range(nr):
                    bxv[r] = b_x + ex[idx, r]
            else:
                for r in range(nr):
                    bxv[r] = b_x
            if has_y:
                for r in range(nr):
                    byv[r] = ey[idx, r]
            else:
                for r in range(nr):
                    byv[r] = 0.0
            for k in range(ng):
                mk = mg[k]
                cu = 0.5 * lp[k]
                cd = 0.5 * lm[k]
                ku = iup[k]
                kd = idn[k]
                if ku >= 0 and kd >= 0:
                    for r in range(nr):
                        dgr = (-mk * bzv[r] * si[k, r]
                               + cu * (bxv[r] * si[ku, r] + byv[r] * sr[ku, r])
                               + cd * (bxv[r] * si[kd, r] - byv[r] * sr[kd, r]))
                        dgi = (mk * bzv[r] * sr[k, r]
                               - cu * (bxv[r] * sr[ku, r] - byv[r] * si[ku, r])
                               - cd * (bxv[r] * sr[kd, r] + byv[r] * si[kd, r]))
                        outr[k, r] = dgr
                        outi[k, r] = dgi
                elif ku >= 0:
                    for r in range(nr):
                        dgr = (-mk * bzv[r] * si[k, r]
                               + cu * (bxv[r] * si[ku, r] + byv[r] * sr[ku, r]))
                        dgi = (mk * bzv[r] * sr[k, r]
                               - cu * (bxv[r] * sr[ku, r] - byv[r] * si[ku, r]))
                        outr[k, r] = dgr
                        outi[k, r] = dgi
                elif kd >= 0:
                    for r in range(nr):
                        dgr = (-mk * bzv[r] * si[k, r]
                               + cd * (bxv[r] * si[kd, r] - byv[r] * sr[kd, r]))
                        dgi = (mk * bzv[r] * sr[k, r]
                               - cd * (bxv[r] * sr[kd, r] + byv[r] * si[kd, r]))
                        outr[k, r] = dgr
                        outi[k, r] = dgi
                else:
                    for r in range(nr):
                        outr[k, r] = -mk * bzv[r] * si[k, r]
                        outi[k, r] = mk * bzv[r] * sr[k, r]
        h6 = h / 6.0
        for k in range(ng):
            for r in range(nr):
                gr[k, r] += h6 * (k1r[k, r] + 2.0 * k2r[k, r] + 2.0 * k3r[k, r] + k4r[k, r])
                gi[k, r] += h6 * (k1i[k, r] + 2.0 * k2i[k, r] + 2.0 * k3i[k, r] + k4i[k, r])
        if snap_ptr < n_snap and step + 1 == snap_steps[snap_ptr]:
            for k in range(ng):
                for r in range(nr):
                    snap_r[snap_ptr, k, r] = gr[k, r]
                    snap_i[snap_ptr, k, r] = gi[k, r]
            snap_ptr += 1
    return 0.0
