# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled stepping kernels.

Same algorithms as `_fallback.py`, loop for loop: grid minimization with a
single parabolic refinement, then the projection step.  Keep the two files
in sync; the benchmark compares them for speed and agreement.
"""
from libc.math cimport acos, atan2, cos, sin, sqrt

import numpy as np


cdef inline double _clip(double v) noexcept nogil:
    if v > 1.0:
        return 1.0
    if v < -1.0:
        return -1.0
    return v


def euclidean_tractrix(gamma, p0, double r):
    cdef const double[:, ::1] g = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0], d = g.shape[1], i, k
    traj_arr = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] traj = traj_arr
    x_arr = np.array(p0, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double dist, scale, diff
    with nogil:
        for i in range(n):
            dist = 0.0
            for k in range(d):
                diff = x[k] - g[i, k]
                dist += diff * diff
            dist = sqrt(dist)
            if dist > r:
                scale = r / dist
                for k in range(d):
                    x[k] = g[i, k] + (x[k] - g[i, k]) * scale
            for k in range(d):
                traj[i, k] = x[k]
    return traj_arr


def sphere_tractrix(gamma, p0, double r, double radius):
    cdef const double[:, ::1] g = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0], d = g.shape[1], i, k
    traj_arr = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] traj = traj_arr
    x_arr = np.array(p0, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double r2 = radius * radius
    cdef double theta_r = r / radius
    cdef double c, th, s, w0, w1, nrm
    with nogil:
        for i in range(n):
            c = 0.0
            for k in range(d):
                c += x[k] * g[i, k]
            th = acos(_clip(c / r2))
            if th > theta_r:
                s = sin(th)
                w0 = sin(th - theta_r) / s
                w1 = sin(theta_r) / s
                nrm = 0.0
                for k in range(d):
                    x[k] = w0 * g[i, k] + w1 * x[k]
                    nrm += x[k] * x[k]
                nrm = radius / sqrt(nrm)
                for k in range(d):
                    x[k] *= nrm
            for k in range(d):
                traj[i, k] = x[k]
    return traj_arr


cdef inline double _arc_total(double sig, const double[::1] x, const double[::1] a0,
                              const double[::1] b0, Py_ssize_t d, double radius,
                              double r2, double sigma_p, double ct) noexcept nogil:
    cdef double cs = cos(sig / radius)
    cdef double sn = sin(sig / radius)
    cdef double dot = 0.0
    cdef Py_ssize_t k
    for k in range(d):
        dot += (cs * a0[k] + sn * b0[k]) * x[k]
    return radius * acos(_clip(dot / r2)) + acos(_clip(ct * cos(sig - sigma_p)))


def arc_glued_tractrix(p0, arc_start, arc_tan, double radius, double arc_len,
                       double sigma_p, double r, ts, Py_ssize_t n_gates,
                       Py_ssize_t refine_pts=33):
    x_arr = np.array(p0, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef const double[::1] a0 = np.ascontiguousarray(arc_start, dtype=np.float64)
    cdef const double[::1] b0 = np.ascontiguousarray(arc_tan, dtype=np.float64)
    cdef const double[::1] tsv = np.ascontiguousarray(ts, dtype=np.float64)
    cdef Py_ssize_t n = tsv.shape[0], d = x.shape[0]
    cdef double r2 = radius * radius

    traj_arr = np.empty((n, d), dtype=np.float64)
    sigma_arr = np.empty(n, dtype=np.float64)
    ell_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] traj = traj_arr
    cdef double[::1] sigma = sigma_arr
    cdef double[::1] ell = ell_arr

    cdef double h1 = arc_len / (n_gates - 1) if n_gates > 1 else arc_len
    # precomputed gate positions and their base-distance cosines
    sig_g_arr = np.linspace(0.0, arc_len, n_gates) if n_gates > 1 \
        else np.zeros(1, dtype=np.float64)
    gates_arr = (np.cos(sig_g_arr / radius)[:, None] * np.asarray(arc_start)
                 + np.sin(sig_g_arr / radius)[:, None] * np.asarray(arc_tan))
    cosdk_arr = np.cos(sig_g_arr - sigma_p)
    cdef const double[:, ::1] gates = np.ascontiguousarray(gates_arr, dtype=np.float64)
    cdef const double[::1] cos_dk = np.ascontiguousarray(cosdk_arr, dtype=np.float64)

    cdef Py_ssize_t i, j, k, jbest, stopped = n
    cdef double ct, fval, fbest, sjbest, lo, hi, step, dot
    cdef double fa, fb, fc, denom, xv, vv, sig_star, f_star
    cdef double b_j, th_tot, a, s, w0, w1, nrm, gk
    cdef double xa, xb, s_foot, f_foot

    with nogil:
        for i in range(n):
            ct = cos(tsv[i])
            # stage 1: coarse minimum over the gate grid
            fbest = 1e300
            jbest = 0
            for j in range(n_gates):
                dot = 0.0
                for k in range(d):
                    dot += gates[j, k] * x[k]
                fval = radius * acos(_clip(dot / r2)) + acos(_clip(ct * cos_dk[j]))
                if fval < fbest:
                    fbest = fval
                    jbest = j
            sjbest = jbest * h1 if n_gates > 1 else 0.0
            lo = sjbest - h1
            if lo < 0.0:
                lo = 0.0
            hi = sjbest + h1
            if hi > arc_len:
                hi = arc_len
            # stage 2: refined grid + parabolic vertex
            if hi <= lo:
                sig_star = lo
                f_star = _arc_total(lo, x, a0, b0, d, radius, r2, sigma_p, ct)
            else:
                step = (hi - lo) / (refine_pts - 1)
                fbest = 1e300
                jbest = 0
                for j in range(refine_pts):
                    fval = _arc_total(lo + j * step, x, a0, b0, d, radius, r2, sigma_p, ct)
                    if fval < fbest:
                        fbest = fval
                        jbest = j
                sig_star = lo + jbest * step
                f_star = fbest
                if 0 < jbest < refine_pts - 1:
                    fa = _arc_total(lo + (jbest - 1) * step, x, a0, b0, d, radius, r2, sigma_p, ct)
                    fb = f_star
                    fc = _arc_total(lo + (jbest + 1) * step, x, a0, b0, d, radius, r2, sigma_p, ct)
                    denom = fa - 2.0 * fb + fc
                    if denom > 0.0:
                        xv = sig_star + 0.5 * step * (fa - fc) / denom
                        if xv < lo + (jbest - 1) * step:
                            xv = lo + (jbest - 1) * step
                        if xv > lo + (jbest + 1) * step:
                            xv = lo + (jbest + 1) * step
                        vv = _arc_total(xv, x, a0, b0, d, radius, r2, sigma_p, ct)
                        if vv < f_star:
                            sig_star = xv
                            f_star = vv
            # the foot of x on the arc is a kink the grid can miss
            xa = 0.0
            xb = 0.0
            for k in range(d):
                xa += x[k] * a0[k]
                xb += x[k] * b0[k]
            s_foot = radius * atan2(xb, xa)
            if s_foot < 0.0:
                s_foot = 0.0
            if s_foot > arc_len:
                s_foot = arc_len
            f_foot = _arc_total(s_foot, x, a0, b0, d, radius, r2, sigma_p, ct)
            if f_foot < f_star:
                sig_star = s_foot
                f_star = f_foot
            # projection step
            if f_star > r:
                b_j = acos(_clip(ct * cos(sig_star - sigma_p)))
                if b_j > r + 1e-12:
                    stopped = i
                    break
                th_tot = (f_star - b_j) / radius
                a = (r - b_j) / radius
                if th_tot < 1e-15:
                    for k in range(d):
                        x[k] = (cos(sig_star / radius) * a0[k]
                                + sin(sig_star / radius) * b0[k])
                else:
                    s = sin(th_tot)
                    w0 = sin(th_tot - a) / s
                    w1 = sin(a) / s
                    nrm = 0.0
                    for k in range(d):
                        gk = (cos(sig_star / radius) * a0[k]
                              + sin(sig_star / radius) * b0[k])
                        x[k] = w0 * gk + w1 * x[k]
                        nrm += x[k] * x[k]
                    nrm = radius / sqrt(nrm)
                    for k in range(d):
                        x[k] *= nrm
                ell[i] = r
            else:
                ell[i] = f_star
            for k in range(d):
                traj[i, k] = x[k]
            sigma[i] = sig_star
    return traj_arr, sigma_arr, ell_arr, stopped


cdef inline double _psi_total(double theta, double mn, double phi,
                              double ct) noexcept nogil:
    return acos(_clip(mn * cos(phi - theta))) + acos(_clip(ct * cos(theta)))


def psi_glued_tractrix(x0, pole_in, double r, ts, Py_ssize_t grid1=49,
                       Py_ssize_t refine_pts=33):
    x_arr = np.array(x0, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef const double[::1] pole = np.ascontiguousarray(pole_in, dtype=np.float64)
    cdef const double[::1] tsv = np.ascontiguousarray(ts, dtype=np.float64)
    cdef Py_ssize_t n = tsv.shape[0]

    traj_arr = np.empty((n, 6), dtype=np.float64)
    zs_arr = np.empty((n, 3), dtype=np.float64)
    ell_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] traj = traj_arr
    cdef double[:, ::1] zs = zs_arr
    cdef double[::1] ell = ell_arr

    cdef double sqrt2 = sqrt(2.0)
    cdef Py_ssize_t i, j, k, jbest
    cdef double ct, mn, cphi, phi, ne
    cdef double m[3]
    cdef double mhat[3]
    cdef double e[3]
    cdef double z[3]
    cdef double k6[6]
    cdef double fval, fbest, lo, hi, step, theta_star, f_star
    cdef double fa, fb, fc, denom, xv, vv
    cdef double b_j, th_tot, a, s, w0, w1, nrm

    with nogil:
        for i in range(n):
            ct = cos(tsv[i])
            mn = 0.0
            for k in range(3):
                m[k] = (x[k] + x[k + 3]) / sqrt2
                mn += m[k] * m[k]
            mn = sqrt(mn)
            if mn < 1e-14:
                for k in range(3):
                    mhat[k] = pole[k]
                mn = 0.0
            else:
                for k in range(3):
                    mhat[k] = m[k] / mn
            cphi = 0.0
            for k in range(3):
                cphi += mhat[k] * pole[k]
            cphi = _clip(cphi)
            phi = acos(cphi)
            ne = 0.0
            for k in range(3):
                e[k] = mhat[k] - cphi * pole[k]
                ne += e[k] * e[k]
            ne = sqrt(ne)
            if ne > 1e-14:
                for k in range(3):
                    e[k] /= ne
            else:
                for k in range(3):
                    e[k] = 0.0

            if phi <= 1e-15:
                theta_star = 0.0
                f_star = _psi_total(0.0, mn, phi, ct)
            else:
                step = phi / (grid1 - 1)
                fbest = 1e300
                jbest = 0
                for j in range(grid1):
                    fval = _psi_total(j * step, mn, phi, ct)
                    if fval < fbest:
                        fbest = fval
                        jbest = j
                lo = jbest * step - step
                if lo < 0.0:
                    lo = 0.0
                hi = jbest * step + step
                if hi > phi:
                    hi = phi
                step = (hi - lo) / (refine_pts - 1)
                fbest = 1e300
                jbest = 0
                for j in range(refine_pts):
                    fval = _psi_total(lo + j * step, mn, phi, ct)
                    if fval < fbest:
                        fbest = fval
                        jbest = j
                theta_star = lo + jbest * step
                f_star = fbest
                if 0 < jbest < refine_pts - 1:
                    fa = _psi_total(lo + (jbest - 1) * step, mn, phi, ct)
                    fb = f_star
                    fc = _psi_total(lo + (jbest + 1) * step, mn, phi, ct)
                    denom = fa - 2.0 * fb + fc
                    if denom > 0.0:
                        xv = theta_star + 0.5 * step * (fa - fc) / denom
                        if xv < lo + (jbest - 1) * step:
                            xv = lo + (jbest - 1) * step
                        if xv > lo + (jbest + 1) * step:
                            xv = lo + (jbest + 1) * step
                        vv = _psi_total(xv, mn, phi, ct)
                        if vv < f_star:
                            theta_star = xv
                            f_star = vv

            for k in range(3):
                z[k] = cos(theta_star) * pole[k] + sin(theta_star) * e[k]
            if f_star > r:
                b_j = acos(_clip(ct * cos(theta_star)))
                for k in range(3):
                    k6[k] = z[k] / sqrt2
                    k6[k + 3] = z[k] / sqrt2
                th_tot = f_star - b_j
                a = r - b_j
                if th_tot < 1e-15:
                    for k in range(6):
                        x[k] = k6[k]
                else:
                    s = sin(th_tot)
                    w0 = sin(th_tot - a) / s
                    w1 = sin(a) / s
                    nrm = 0.0
                    for k in range(6):
                        x[k] = w0 * k6[k] + w1 * x[k]
                        nrm += x[k] * x[k]
                    nrm = 1.0 / sqrt(nrm)
                    for k in range(6):
                        x[k] *= nrm
                ell[i] = r
            else:
                ell[i] = f_star
            for k in range(6):
                traj[i, k] = x[k]
            for k in range(3):
                zs[i, k] = z[k]
    return traj_arr, zs_arr, ell_arr
