"""Pure numpy implementations of the stepping kernels.

These mirror the compiled versions in `_core.pyx` step for step: each
function advances a tractrix trajectory through a whole partition.  The
inner minimizations use fixed-size grids plus one parabolic refinement so
that results are deterministic and backend-independent up to rounding.

arccos arguments are clamped here without the policy slack check; the
contract-level operations in the main modules perform the strict check.
"""
from __future__ import annotations

import math

import numpy as np

SQRT2 = math.sqrt(2.0)


def _clip(a):
    return np.minimum(1.0, np.maximum(-1.0, a))


def euclidean_tractrix(gamma, p0, r):
    """Projection-composition steps in R^d; returns the trajectory."""
    gamma = np.asarray(gamma, dtype=float)
    n, d = gamma.shape
    traj = np.empty((n, d))
    x = np.array(p0, dtype=float)
    for i in range(n):
        g = gamma[i]
        diff = x - g
        dist = math.sqrt(float(diff @ diff))
        if dist > r:
            x = g + diff * (r / dist)
        traj[i] = x
    return traj


def sphere_tractrix(gamma, p0, r, radius):
    """Projection-composition steps on the sphere of the given radius."""
    gamma = np.asarray(gamma, dtype=float)
    n, d = gamma.shape
    traj = np.empty((n, d))
    x = np.array(p0, dtype=float)
    r2 = radius * radius
    theta_r = r / radius
    for i in range(n):
        g = gamma[i]
        c = min(1.0, max(-1.0, float(x @ g) / r2))
        th = math.acos(c)
        if th > theta_r:
            s = math.sin(th)
            x = (math.sin(th - theta_r) * g + math.sin(theta_r) * x) / s
            x *= radius / math.sqrt(float(x @ x))
        traj[i] = x
    return traj


def _refine_1d(evaluate, lo, hi, npts):
    """Grid minimization with one parabolic refinement of the best triple."""
    if hi <= lo:
        v = float(evaluate(np.array([lo]))[0])
        return lo, v
    xs = np.linspace(lo, hi, npts)
    vals = evaluate(xs)
    k = int(np.argmin(vals))
    best_x = float(xs[k])
    best_v = float(vals[k])
    if 0 < k < npts - 1:
        fa, fb, fc = float(vals[k - 1]), best_v, float(vals[k + 1])
        denom = fa - 2.0 * fb + fc
        if denom > 0.0:
            h = float(xs[1] - xs[0])
            xv = best_x + 0.5 * h * (fa - fc) / denom
            xv = min(max(xv, float(xs[k - 1])), float(xs[k + 1]))
            vv = float(evaluate(np.array([xv]))[0])
            if vv < best_v:
                return xv, vv
    return best_x, best_v


def arc_glued_tractrix(p0, arc_start, arc_tan, radius, arc_len, sigma_p, r, ts,
                       n_gates, refine_pts=33):
    """Tractrix steps in the space glued from a sphere and the cone over an arc.

    The moving point stays on the sphere piece; the driving geodesic sits in
    the cone piece at parameter (sigma_p, pi/2 - t).  Cross-piece distances
    are minimized over the crossing position sigma on the arc, using the
    gate grid for bracketing and a refined grid + parabola for the minimum.

    Returns (traj, sigma, ell, stopped_at): stopped_at == len(ts) on full
    completion; an earlier index means the projected point left the sphere
    piece and the caller must continue generically.
    """
    p0 = np.asarray(p0, dtype=float)
    arc_start = np.asarray(arc_start, dtype=float)
    arc_tan = np.asarray(arc_tan, dtype=float)
    ts = np.asarray(ts, dtype=float)
    n = ts.shape[0]
    d = p0.shape[0]
    r2 = radius * radius

    sig_g = np.linspace(0.0, arc_len, n_gates)
    gates = (np.cos(sig_g / radius)[:, None] * arc_start
             + np.sin(sig_g / radius)[:, None] * arc_tan)
    cos_dk = np.cos(sig_g - sigma_p)
    h1 = arc_len / (n_gates - 1) if n_gates > 1 else arc_len

    traj = np.empty((n, d))
    sigma = np.empty(n)
    ell = np.empty(n)
    x = p0.copy()

    for i in range(n):
        ct = math.cos(ts[i])

        def total(sigs, x=x, ct=ct):
            g = (np.cos(sigs / radius)[:, None] * arc_start
                 + np.sin(sigs / radius)[:, None] * arc_tan)
            a_u = radius * np.arccos(_clip(g @ x / r2))
            b_j = np.arccos(_clip(ct * np.cos(sigs - sigma_p)))
            return a_u + b_j

        f_g = radius * np.arccos(_clip(gates @ x / r2)) + np.arccos(_clip(ct * cos_dk))
        j = int(np.argmin(f_g))
        lo = max(0.0, sig_g[j] - h1)
        hi = min(arc_len, sig_g[j] + h1)
        sig_star, f_star = _refine_1d(total, lo, hi, refine_pts)
        # the foot of x on the arc is a kink of the objective the grid can miss
        s_foot = radius * math.atan2(float(x @ arc_tan), float(x @ arc_start))
        s_foot = min(max(s_foot, 0.0), arc_len)
        f_foot = float(total(np.array([s_foot]))[0])
        if f_foot < f_star:
            sig_star, f_star = s_foot, f_foot

        if f_star > r:
            b_j = math.acos(min(1.0, max(-1.0, ct * math.cos(sig_star - sigma_p))))
            if b_j > r + 1e-12:
                return traj, sigma, ell, i
            g = (math.cos(sig_star / radius) * arc_start
                 + math.sin(sig_star / radius) * arc_tan)
            th_tot = (f_star - b_j) / radius
            a = (r - b_j) / radius
            if th_tot < 1e-15:
                x = g.copy()
            else:
                x = (math.sin(th_tot - a) * g + math.sin(a) * x) / math.sin(th_tot)
                x *= radius / math.sqrt(float(x @ x))
            ell[i] = r
        else:
            ell[i] = f_star
        traj[i] = x
        sigma[i] = sig_star
    return traj, sigma, ell, n


def psi_glued_tractrix(x0, pole, r, ts, grid1=49, refine_pts=33):
    """Tractrix steps in the join-of-spheres glued over its diagonal sphere.

    The moving point x lives on S^5 written as a pair of R^3 blocks; the
    diagonal great sphere K is {(z, z)/sqrt(2)} and the driving geodesic
    runs from (p, p)/sqrt(2) to the cone tip.  The crossing position on K
    reduces to one angle theta on the arc from `pole` toward the direction
    of (x_u + x_v).

    Returns (traj, zs, ell) with zs the per-step crossing point on S^2.
    """
    x = np.array(x0, dtype=float)
    pole = np.asarray(pole, dtype=float)
    ts = np.asarray(ts, dtype=float)
    n = ts.shape[0]
    traj = np.empty((n, 6))
    zs = np.empty((n, 3))
    ell = np.empty(n)

    for i in range(n):
        ct = math.cos(ts[i])
        m = (x[:3] + x[3:]) / SQRT2
        mn = math.sqrt(float(m @ m))
        if mn < 1e-14:
            mhat = pole.copy()
            mn = 0.0
        else:
            mhat = m / mn
        cphi = min(1.0, max(-1.0, float(mhat @ pole)))
        phi = math.acos(cphi)
        e = mhat - cphi * pole
        ne = math.sqrt(float(e @ e))
        e = e / ne if ne > 1e-14 else np.zeros(3)

        def g_of(thetas, mn=mn, phi=phi, ct=ct):
            return (np.arccos(_clip(mn * np.cos(phi - thetas)))
                    + np.arccos(_clip(ct * np.cos(thetas))))

        if phi <= 1e-15:
            theta_star, f_star = 0.0, float(g_of(np.array([0.0]))[0])
        else:
            xs = np.linspace(0.0, phi, grid1)
            vals = g_of(xs)
            j = int(np.argmin(vals))
            h = phi / (grid1 - 1)
            lo = max(0.0, xs[j] - h)
            hi = min(phi, xs[j] + h)
            theta_star, f_star = _refine_1d(g_of, lo, hi, refine_pts)

        z = math.cos(theta_star) * pole + math.sin(theta_star) * e
        if f_star > r:
            b_j = math.acos(min(1.0, max(-1.0, ct * math.cos(theta_star))))
            k6 = np.concatenate([z, z]) / SQRT2
            th_tot = f_star - b_j
            a = r - b_j
            if th_tot < 1e-15:
                x = k6
            else:
                x = (math.sin(th_tot - a) * k6 + math.sin(a) * x) / math.sin(th_tot)
                x /= math.sqrt(float(x @ x))
            ell[i] = r
        else:
            ell[i] = f_star
        traj[i] = x
        zs[i] = z
    return traj, zs, ell
