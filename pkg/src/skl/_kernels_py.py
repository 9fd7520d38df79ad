"""Pure numpy implementation of the path loop (fallback backend).

Mirrors ``_kernels.pyx`` operation for operation. It also accepts
user-supplied flux and noise callables (codes == -1), which the compiled
kernel does not.
"""
from __future__ import annotations

import numpy as np

from .flux import numerical_flux_array


def face_fluxes(w, gl, gr, flux_code, flux_param, scheme, alpha, flux_model=None):
    wl = np.empty(w.size + 1)
    wr = np.empty(w.size + 1)
    wl[0] = gl
    wl[1:] = w
    wr[:-1] = w
    wr[-1] = gr
    return numerical_flux_array(flux_model, wl, wr, scheme, alpha)


def noise_term(w, z, noise_code, noise_shift, r_clip, x=None, dbeta=None, noise_model=None):
    if noise_model is not None and noise_code < 0:
        return noise_model.increment_array(x, w, dbeta)
    wc = np.minimum(np.maximum(w, -r_clip), r_clip)
    if noise_code == 0:
        return z.copy()
    if noise_code == 1:
        return wc * z
    return (noise_shift + wc) * z


def accumulate_gradient(hist, over, u, eps, dt, dx, hist_N, n_bins):
    """Bin ``eps |u_x|^2 dx dt`` by the local value of ``u``."""
    n = u.size
    g = np.empty(n)
    g[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
    g[0] = (u[1] - u[0]) / dx
    g[-1] = (u[-1] - u[-2]) / dx
    mass = eps * g * g * dx * dt
    h = 2.0 * hist_N / n_bins
    lo = u < -hist_N
    hi = u > hist_N
    inside = ~(lo | hi)
    idx = np.minimum(((u[inside] + hist_N) / h).astype(np.int64), n_bins - 1)
    np.add.at(hist, idx, mass[inside])
    over[0] += mass[lo].sum()
    over[1] += mass[hi].sum()


def advance_path(*args, **kw):
    # overflow is expected on blow-up and reported through ``status``
    with np.errstate(over="ignore", invalid="ignore"):
        return _advance_path(*args, **kw)


def _advance_path(v0, lift, ghost_v, ghost_w, incr, modes, x,
                  flux_code, flux_param, scheme, alpha,
                  noise_code, noise_shift, r_clip,
                  eps, dt, dx, rec_steps, hist_N, n_bins,
                  flux_model=None, noise_model=None):
    n = v0.size
    n_steps = lift.shape[0] - 1
    K = incr.shape[1]
    n_rec = rec_steps.size
    v = np.array(v0, dtype=float)
    v_snap = np.zeros((n_rec, n))
    u_snap = np.zeros((n_rec, n))
    hist = np.zeros(n_bins)
    over = np.zeros(2)
    grad_acc = np.zeros((n_rec, 2))
    bflux = np.zeros(n_rec)
    nmass = np.zeros(n_rec)
    acc2 = acc4 = bf = nm = 0.0
    sup2 = dx * np.sum(v * v)
    sup4 = dx * np.sum(v * v * v * v)
    c_adv = dt / dx
    c_dif = eps * dt / (dx * dx)
    r = 0
    status = -1
    if rec_steps[0] == 0:
        v_snap[0] = v
        u_snap[0] = v + lift[0]
        r = 1
    for step in range(n_steps):
        w = v + lift[step]
        gvl, gvr = ghost_v[step]
        gwl, gwr = ghost_w[step]
        if eps > 0.0:
            accumulate_gradient(hist, over, w, eps, dt, dx, hist_N, n_bins)
            dv = (v[1:] - v[:-1]) / dx
            acc2 += np.sum(dv * dv) * dx * dt
            acc4 += np.sum(v[:-1] * v[:-1] * dv * dv) * dx * dt
        F = face_fluxes(w, gwl, gwr, flux_code, flux_param, scheme, alpha, flux_model)
        vp = np.empty(n + 2)
        vp[0] = gvl
        vp[1:-1] = v
        vp[-1] = gvr
        vnew = v - c_adv * (F[1:] - F[:-1]) + c_dif * (vp[2:] - 2.0 * v + vp[:-2])
        bf += dt * (F[0] - F[-1]) + eps * dt / dx * ((gvr - v[-1]) - (v[0] - gvl))
        if K > 0:
            z = modes @ incr[step]
            nz = noise_term(w, z, noise_code, noise_shift, r_clip, x, incr[step], noise_model)
            vnew = vnew + nz
            nm += dx * np.sum(nz)
        if not np.all(np.isfinite(vnew)):
            status = step
            break
        v = vnew
        s2 = dx * np.sum(v * v)
        s4 = dx * np.sum(v * v * v * v)
        sup2 = max(sup2, s2)
        sup4 = max(sup4, s4)
        if r < n_rec and rec_steps[r] == step + 1:
            v_snap[r] = v
            u_snap[r] = v + lift[step + 1]
            grad_acc[r, 0] = acc2
            grad_acc[r, 1] = acc4
            bflux[r] = bf
            nmass[r] = nm
            r += 1
    return (status, v_snap, u_snap, hist, over[0], over[1],
            np.array([sup2, sup4]), grad_acc, bflux, nmass)
