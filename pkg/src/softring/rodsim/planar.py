"""Planar ring dynamics: discrete elastica, penalty contact, explicit Verlet.

The integrator is the explicit central-difference member of the Newmark
family (beta = 0, gamma = 1/2) written in velocity-Verlet form. It is
symplectic and conserves linear and angular momentum of the internal
forces exactly; it is stable for ``dt < 2 / omega_max`` and the step is
chosen with a safety factor below that bound (see :func:`stable_dt`).
Velocity-dependent forces (damping, friction) use the half-step velocity.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

HALF_PLANE = 0.0
CAPSULE = 1.0


@njit(cache=True)
def internal_forces(x, ks, l0, kb, psi0, f):
    """Add stretching and bending forces to ``f``; return the elastic energy."""
    n = x.shape[0]
    energy = 0.0
    for i in range(n):
        j = (i + 1) % n
        dx = x[j, 0] - x[i, 0]
        dy = x[j, 1] - x[i, 1]
        L = math.sqrt(dx * dx + dy * dy)
        s = ks * (L - l0)
        energy += 0.5 * s * (L - l0)
        fx = s * dx / L
        fy = s * dy / L
        f[i, 0] += fx
        f[i, 1] += fy
        f[j, 0] -= fx
        f[j, 1] -= fy
    for i in range(n):
        im = (i - 1) % n
        ip = (i + 1) % n
        ax = x[i, 0] - x[im, 0]
        ay = x[i, 1] - x[im, 1]
        bx = x[ip, 0] - x[i, 0]
        by = x[ip, 1] - x[i, 1]
        psi = math.atan2(ax * by - ay * bx, ax * bx + ay * by)
        d = psi - psi0
        energy += 0.5 * kb * d * d
        a2 = ax * ax + ay * ay
        b2 = bx * bx + by * by
        gmx = -ay / a2
        gmy = ax / a2
        gpx = -by / b2
        gpy = bx / b2
        c = -kb * d
        f[im, 0] += c * gmx
        f[im, 1] += c * gmy
        f[ip, 0] += c * gpx
        f[ip, 1] += c * gpy
        f[i, 0] -= c * (gmx + gpx)
        f[i, 1] -= c * (gmy + gpy)
    return energy


@njit(cache=True)
def bending_damping(x, v, cb, f):
    """Kelvin-Voigt hinge damping: force ``-cb * dpsi/dt * grad(psi)``."""
    n = x.shape[0]
    for i in range(n):
        im = (i - 1) % n
        ip = (i + 1) % n
        ax = x[i, 0] - x[im, 0]
        ay = x[i, 1] - x[im, 1]
        bx = x[ip, 0] - x[i, 0]
        by = x[ip, 1] - x[i, 1]
        a2 = ax * ax + ay * ay
        b2 = bx * bx + by * by
        gmx = -ay / a2
        gmy = ax / a2
        gpx = -by / b2
        gpy = bx / b2
        rate = (gmx * v[im, 0] + gmy * v[im, 1] + gpx * v[ip, 0] + gpy * v[ip, 1]
                - (gmx + gpx) * v[i, 0] - (gmy + gpy) * v[i, 1])
        c = -cb * rate
        f[im, 0] += c * gmx
        f[im, 1] += c * gmy
        f[ip, 0] += c * gpx
        f[ip, 1] += c * gpy
        f[i, 0] -= c * (gmx + gpx)
        f[i, 1] -= c * (gmy + gpy)


@njit(cache=True)
def turning_angles(x):
    n = x.shape[0]
    out = np.empty(n)
    for i in range(n):
        im = (i - 1) % n
        ip = (i + 1) % n
        ax = x[i, 0] - x[im, 0]
        ay = x[i, 1] - x[im, 1]
        bx = x[ip, 0] - x[i, 0]
        by = x[ip, 1] - x[i, 1]
        out[i] = math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    return out


@njit(cache=True)
def contact_forces(x, v, rc, kc, cc, obst, mu, vreg, pairs, pk, pc, pd, f, wall):
    """Obstacle and self-contact penalty forces; returns penalty energy.

    ``obst`` rows: ``[HALF_PLANE, px, py, nx, ny, 0]`` with ``n`` pointing
    into free space, or ``[CAPSULE, ax, ay, bx, by, radius]``.
    ``wall`` accumulates the total obstacle force acting on the ring.
    """
    n = x.shape[0]
    energy = 0.0
    for i in range(n):
        for o in range(obst.shape[0]):
            if obst[o, 0] == HALF_PLANE:
                nx = obst[o, 3]
                ny = obst[o, 4]
                gap = (x[i, 0] - obst[o, 1]) * nx + (x[i, 1] - obst[o, 2]) * ny - rc[i]
            else:
                sx = obst[o, 3] - obst[o, 1]
                sy = obst[o, 4] - obst[o, 2]
                s2 = sx * sx + sy * sy
                u = ((x[i, 0] - obst[o, 1]) * sx + (x[i, 1] - obst[o, 2]) * sy) / s2
                u = min(1.0, max(0.0, u))
                dx = x[i, 0] - (obst[o, 1] + u * sx)
                dy = x[i, 1] - (obst[o, 2] + u * sy)
                dist = math.sqrt(dx * dx + dy * dy)
                if dist == 0.0:
                    continue
                nx = dx / dist
                ny = dy / dist
                gap = dist - obst[o, 5] - rc[i]
            if gap < 0.0:
                energy += 0.5 * kc[i] * gap * gap
                vn = v[i, 0] * nx + v[i, 1] * ny
                fn = -kc[i] * gap - cc[i] * vn
                if fn > 0.0:
                    tx = -ny
                    ty = nx
                    vt = v[i, 0] * tx + v[i, 1] * ty
                    ft = -mu * fn * math.tanh(vt / vreg)
                    fx = fn * nx + ft * tx
                    fy = fn * ny + ft * ty
                    f[i, 0] += fx
                    f[i, 1] += fy
                    wall[0] += fx
                    wall[1] += fy
    for p in range(pairs.shape[0]):
        i = pairs[p, 0]
        j = pairs[p, 1]
        dx = x[i, 0] - x[j, 0]
        dy = x[i, 1] - x[j, 1]
        if abs(dx) > pd[p] or abs(dy) > pd[p]:
            continue
        dist = math.sqrt(dx * dx + dy * dy)
        gap = dist - pd[p]
        if gap < 0.0 and dist > 0.0:
            energy += 0.5 * pk[p] * gap * gap
            nx = dx / dist
            ny = dy / dist
            vn = (v[i, 0] - v[j, 0]) * nx + (v[i, 1] - v[j, 1]) * ny
            fn = -pk[p] * gap - pc[p] * vn
            if fn > 0.0:
                f[i, 0] += fn * nx
                f[i, 1] += fn * ny
                f[j, 0] -= fn * nx
                f[j, 1] -= fn * ny
    return energy


@njit(cache=True)
def _accel(x, v, m, ks, l0, kb, psi0, cb, cm, gx, gy, rc, kc, cc, obst, mu, vreg,
           pairs, pk, pc, pd, a, wall):
    n = x.shape[0]
    a[:, :] = 0.0
    e_el = internal_forces(x, ks, l0, kb, psi0, a)
    if cb > 0.0:
        bending_damping(x, v, cb, a)
    e_c = contact_forces(x, v, rc, kc, cc, obst, mu, vreg, pairs, pk, pc, pd, a, wall)
    for i in range(n):
        a[i, 0] = a[i, 0] / m[i] - cm * v[i, 0] + gx
        a[i, 1] = a[i, 1] / m[i] - cm * v[i, 1] + gy
    return e_el, e_c


@njit(cache=True)
def run_planar(x0, v0, m, ks, l0, kb, psi0, cb, cm, gx, gy, rc, kc, cc, obst, mu, vreg,
               pairs, pk, pc, pd, dt, n_out, every):
    """Integrate ``(n_out - 1) * every`` steps, recording every ``every`` steps.

    Returns positions, velocities, interval-averaged obstacle force, and
    energies (kinetic, elastic, penalty) at the recorded instants.
    """
    n = x0.shape[0]
    x = x0.copy()
    v = v0.copy()
    a = np.zeros((n, 2))
    wall = np.zeros(2)
    X = np.empty((n_out, n, 2))
    V = np.empty((n_out, n, 2))
    W = np.zeros((n_out, 2))
    E = np.empty((n_out, 3))
    e_el, e_c = _accel(x, v, m, ks, l0, kb, psi0, cb, cm, gx, gy, rc, kc, cc, obst, mu, vreg,
                       pairs, pk, pc, pd, a, wall)
    W[0, :] = wall
    wall[:] = 0.0
    vh = np.empty((n, 2))
    for k in range(n_out):
        if k > 0:
            for _ in range(every):
                for i in range(n):
                    vh[i, 0] = v[i, 0] + 0.5 * dt * a[i, 0]
                    vh[i, 1] = v[i, 1] + 0.5 * dt * a[i, 1]
                    x[i, 0] += dt * vh[i, 0]
                    x[i, 1] += dt * vh[i, 1]
                e_el, e_c = _accel(x, vh, m, ks, l0, kb, psi0, cb, cm, gx, gy, rc, kc, cc, obst, mu,
                                   vreg, pairs, pk, pc, pd, a, wall)
                for i in range(n):
                    v[i, 0] = vh[i, 0] + 0.5 * dt * a[i, 0]
                    v[i, 1] = vh[i, 1] + 0.5 * dt * a[i, 1]
            W[k, 0] = wall[0] / every
            W[k, 1] = wall[1] / every
            wall[:] = 0.0
            if not np.isfinite(x).all():
                return X[:k], V[:k], W[:k], E[:k], k
        ke = 0.0
        for i in range(n):
            ke += 0.5 * m[i] * (v[i, 0] ** 2 + v[i, 1] ** 2)
        X[k] = x
        V[k] = v
        E[k, 0] = ke
        E[k, 1] = e_el
        E[k, 2] = e_c
    return X, V, W, E, n_out


@njit(cache=True)
def elastic_gradient(x, ks, l0, kb, psi0):
    g = np.zeros_like(x)
    e = internal_forces(x, ks, l0, kb, psi0, g)
    return e, -g


@njit(cache=True)
def fd_hessian(x, ks, l0, kb, psi0, h):
    """Central-difference Hessian of the elastic energy (flattened DOFs)."""
    n = x.shape[0]
    H = np.zeros((2 * n, 2 * n))
    xp = x.copy()
    for d in range(2 * n):
        i = d // 2
        c = d % 2
        xp[i, c] = x[i, c] + h
        _, gp = elastic_gradient(xp, ks, l0, kb, psi0)
        xp[i, c] = x[i, c] - h
        _, gm = elastic_gradient(xp, ks, l0, kb, psi0)
        xp[i, c] = x[i, c]
        H[:, d] = (gp - gm).ravel() / (2 * h)
    return 0.5 * (H + H.T)
