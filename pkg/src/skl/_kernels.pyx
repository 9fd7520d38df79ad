# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path loop: monotone flux + explicit diffusion + Euler-Maruyama.

Built-in laws only (flux codes 0 burgers, 1 linear, 2 cubic; noise codes
0 additive, 1 linear, 2 affine). See ``_kernels_py.advance_path`` for the
reference implementation.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite, fmin, fmax

cnp.import_array()


cdef inline double _A(int code, double c, double u) noexcept nogil:
    if code == 0:
        return 0.5 * u * u
    if code == 1:
        return c * u
    return u * u * u / 3.0


cdef inline double _flux(int code, double c, int scheme, double alpha,
                         double ul, double ur) noexcept nogil:
    cdef double lo, hi, up, dn
    if scheme == 2:
        return 0.5 * (_A(code, c, ul) + _A(code, c, ur)) - 0.5 * alpha * (ur - ul)
    if code == 0:
        if scheme == 0:
            if ul <= ur:
                if ul <= 0.0 and ur >= 0.0:
                    return 0.0
                return fmin(0.5 * ul * ul, 0.5 * ur * ur)
            return fmax(0.5 * ul * ul, 0.5 * ur * ur)
        up = fmax(ul, 0.0)
        dn = fmin(ur, 0.0)
        return 0.5 * up * up + 0.5 * dn * dn
    if code == 1:
        if c >= 0.0:
            return c * ul
        return c * ur
    return ul * ul * ul / 3.0


def advance_path(const double[::1] v0, const double[:, ::1] lift, const double[:, ::1] ghost_v,
                 const double[:, ::1] ghost_w, const double[:, ::1] incr,
                 const double[:, ::1] modes, x,
                 int flux_code, double flux_param, int scheme, double alpha,
                 int noise_code, double noise_shift, double r_clip,
                 double eps, double dt, double dx, const long[::1] rec_steps,
                 double hist_N, int n_bins, flux_model=None, noise_model=None):
    cdef Py_ssize_t n = v0.shape[0]
    cdef Py_ssize_t n_steps = lift.shape[0] - 1
    cdef Py_ssize_t K = incr.shape[1]
    cdef Py_ssize_t n_rec = rec_steps.shape[0]
    cdef Py_ssize_t i, k, step, r = 0, j
    cdef long status = -1
    cdef double c_adv = dt / dx
    cdef double c_dif = eps * dt / (dx * dx)
    cdef double h = 2.0 * hist_N / n_bins
    cdef double acc2 = 0.0, acc4 = 0.0, bf = 0.0, nm = 0.0
    cdef double s2, s4, sup2 = 0.0, sup4 = 0.0, g, m, dv, z, wc, nz, vl, vr, total
    cdef double gvl, gvr, gwl, gwr, over_lo = 0.0, over_hi = 0.0

    v_arr = np.array(v0, dtype=np.float64)
    w_arr = np.empty(n, dtype=np.float64)
    vn_arr = np.empty(n, dtype=np.float64)
    F_arr = np.empty(n + 1, dtype=np.float64)
    v_snap_arr = np.zeros((n_rec, n), dtype=np.float64)
    u_snap_arr = np.zeros((n_rec, n), dtype=np.float64)
    hist_arr = np.zeros(n_bins, dtype=np.float64)
    grad_arr = np.zeros((n_rec, 2), dtype=np.float64)
    bflux_arr = np.zeros(n_rec, dtype=np.float64)
    nmass_arr = np.zeros(n_rec, dtype=np.float64)
    cdef double[::1] v = v_arr
    cdef double[::1] w = w_arr
    cdef double[::1] vn = vn_arr
    cdef double[::1] F = F_arr
    cdef double[:, ::1] v_snap = v_snap_arr
    cdef double[:, ::1] u_snap = u_snap_arr
    cdef double[::1] hist = hist_arr
    cdef double[:, ::1] grad_acc = grad_arr
    cdef double[::1] bflux = bflux_arr
    cdef double[::1] nmass = nmass_arr

    with nogil:
        for i in range(n):
            sup2 += v[i] * v[i]
            sup4 += v[i] * v[i] * v[i] * v[i]
        sup2 *= dx
        sup4 *= dx
        if n_rec > 0 and rec_steps[0] == 0:
            for i in range(n):
                v_snap[0, i] = v[i]
                u_snap[0, i] = v[i] + lift[0, i]
            r = 1

        for step in range(n_steps):
            for i in range(n):
                w[i] = v[i] + lift[step, i]
            gvl = ghost_v[step, 0]
            gvr = ghost_v[step, 1]
            gwl = ghost_w[step, 0]
            gwr = ghost_w[step, 1]

            if eps > 0.0:
                for i in range(n):
                    if i == 0:
                        g = (w[1] - w[0]) / dx
                    elif i == n - 1:
                        g = (w[n - 1] - w[n - 2]) / dx
                    else:
                        g = (w[i + 1] - w[i - 1]) / (2.0 * dx)
                    m = eps * g * g * dx * dt
                    if w[i] < -hist_N:
                        over_lo += m
                    elif w[i] > hist_N:
                        over_hi += m
                    else:
                        j = <Py_ssize_t>((w[i] + hist_N) / h)
                        if j > n_bins - 1:
                            j = n_bins - 1
                        hist[j] += m
                s2 = 0.0
                s4 = 0.0
                for i in range(n - 1):
                    dv = (v[i + 1] - v[i]) / dx
                    s2 += dv * dv
                    s4 += v[i] * v[i] * dv * dv
                acc2 += s2 * dx * dt
                acc4 += s4 * dx * dt

            F[0] = _flux(flux_code, flux_param, scheme, alpha, gwl, w[0])
            for i in range(1, n):
                F[i] = _flux(flux_code, flux_param, scheme, alpha, w[i - 1], w[i])
            F[n] = _flux(flux_code, flux_param, scheme, alpha, w[n - 1], gwr)

            for i in range(n):
                vl = gvl if i == 0 else v[i - 1]
                vr = gvr if i == n - 1 else v[i + 1]
                vn[i] = v[i] - c_adv * (F[i + 1] - F[i]) + c_dif * (vr - 2.0 * v[i] + vl)
            bf += dt * (F[0] - F[n]) + eps * dt / dx * ((gvr - v[n - 1]) - (v[0] - gvl))

            if K > 0:
                total = 0.0
                for i in range(n):
                    z = 0.0
                    for k in range(K):
                        z = z + modes[i, k] * incr[step, k]
                    if noise_code == 0:
                        nz = z
                    else:
                        wc = fmin(fmax(w[i], -r_clip), r_clip)
                        if noise_code == 1:
                            nz = wc * z
                        else:
                            nz = (noise_shift + wc) * z
                    vn[i] = vn[i] + nz
                    total += nz
                nm += dx * total

            s2 = 0.0
            for i in range(n):
                s2 += vn[i]
            if not isfinite(s2):
                status = step
                break
            s2 = 0.0
            s4 = 0.0
            for i in range(n):
                v[i] = vn[i]
                s2 += v[i] * v[i]
                s4 += v[i] * v[i] * v[i] * v[i]
            s2 *= dx
            s4 *= dx
            if s2 > sup2:
                sup2 = s2
            if s4 > sup4:
                sup4 = s4
            if r < n_rec and rec_steps[r] == step + 1:
                for i in range(n):
                    v_snap[r, i] = v[i]
                    u_snap[r, i] = v[i] + lift[step + 1, i]
                grad_acc[r, 0] = acc2
                grad_acc[r, 1] = acc4
                bflux[r] = bf
                nmass[r] = nm
                r += 1

    return (int(status), v_snap_arr, u_snap_arr, hist_arr, over_lo, over_hi,
            np.array([sup2, sup4]), grad_arr, bflux_arr, nmass_arr)
