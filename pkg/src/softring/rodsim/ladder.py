"""Out-of-plane ring model: a two-rail ladder of particles.

Each ring station carries a top and a bottom particle at ``z = +-w/2``.
Rails and rungs are stiff axial springs and a penalty keeps each rung
normal to its panel, so the strip is rigid in its own plane without
locking panel warp. The strip's soft modes are
weak-axis bending of each rail about the local rung direction and relative
twist of neighbouring rungs about the strip tangent.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _cross(a0, a1, a2, b0, b1, b2):
    return a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0


@njit(cache=True)
def spring_forces(x, sp, ks, l0, f):
    energy = 0.0
    for s in range(sp.shape[0]):
        i = sp[s, 0]
        j = sp[s, 1]
        dx = x[j, 0] - x[i, 0]
        dy = x[j, 1] - x[i, 1]
        dz = x[j, 2] - x[i, 2]
        L = math.sqrt(dx * dx + dy * dy + dz * dz)
        e = L - l0[s]
        energy += 0.5 * ks[s] * e * e
        c = ks[s] * e / L
        f[i, 0] += c * dx
        f[i, 1] += c * dy
        f[i, 2] += c * dz
        f[j, 0] -= c * dx
        f[j, 1] -= c * dy
        f[j, 2] -= c * dz
    return energy


@njit(cache=True)
def hinge_angle(x, h):
    """Signed rail turning angle about the unit rung direction."""
    im, i, ip, pt, pb = h[0], h[1], h[2], h[3], h[4]
    a0 = x[i, 0] - x[im, 0]
    a1 = x[i, 1] - x[im, 1]
    a2 = x[i, 2] - x[im, 2]
    b0 = x[ip, 0] - x[i, 0]
    b1 = x[ip, 1] - x[i, 1]
    b2 = x[ip, 2] - x[i, 2]
    d0 = x[pt, 0] - x[pb, 0]
    d1 = x[pt, 1] - x[pb, 1]
    d2 = x[pt, 2] - x[pb, 2]
    dn = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    c0, c1, c2 = _cross(a0, a1, a2, b0, b1, b2)
    s = (c0 * d0 + c1 * d1 + c2 * d2) / dn
    q = a0 * b0 + a1 * b1 + a2 * b2
    return math.atan2(s, q)


@njit(cache=True)
def hinge_forces(x, hinges, kb, psi0, f):
    energy = 0.0
    for k in range(hinges.shape[0]):
        im, i, ip, pt, pb = hinges[k, 0], hinges[k, 1], hinges[k, 2], hinges[k, 3], hinges[k, 4]
        a0 = x[i, 0] - x[im, 0]
        a1 = x[i, 1] - x[im, 1]
        a2 = x[i, 2] - x[im, 2]
        b0 = x[ip, 0] - x[i, 0]
        b1 = x[ip, 1] - x[i, 1]
        b2 = x[ip, 2] - x[i, 2]
        d0 = x[pt, 0] - x[pb, 0]
        d1 = x[pt, 1] - x[pb, 1]
        d2 = x[pt, 2] - x[pb, 2]
        dn = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
        u0, u1, u2 = d0 / dn, d1 / dn, d2 / dn
        c0, c1, c2 = _cross(a0, a1, a2, b0, b1, b2)
        cu = c0 * u0 + c1 * u1 + c2 * u2
        s = cu
        q = a0 * b0 + a1 * b1 + a2 * b2
        psi = math.atan2(s, q)
        dpsi = psi - psi0
        energy += 0.5 * kb * dpsi * dpsi
        den = s * s + q * q
        coef = -kb * dpsi / den
        # d psi / d a, d b, d d
        x0, x1, x2 = _cross(b0, b1, b2, u0, u1, u2)
        ga0 = q * x0 - s * b0
        ga1 = q * x1 - s * b1
        ga2 = q * x2 - s * b2
        y0, y1, y2 = _cross(u0, u1, u2, a0, a1, a2)
        gb0 = q * y0 - s * a0
        gb1 = q * y1 - s * a1
        gb2 = q * y2 - s * a2
        gd0 = q * (c0 - cu * u0) / dn
        gd1 = q * (c1 - cu * u1) / dn
        gd2 = q * (c2 - cu * u2) / dn
        f[im, 0] -= coef * ga0
        f[im, 1] -= coef * ga1
        f[im, 2] -= coef * ga2
        f[i, 0] += coef * (ga0 - gb0)
        f[i, 1] += coef * (ga1 - gb1)
        f[i, 2] += coef * (ga2 - gb2)
        f[ip, 0] += coef * gb0
        f[ip, 1] += coef * gb1
        f[ip, 2] += coef * gb2
        f[pt, 0] += coef * gd0
        f[pt, 1] += coef * gd1
        f[pt, 2] += coef * gd2
        f[pb, 0] -= coef * gd0
        f[pb, 1] -= coef * gd1
        f[pb, 2] -= coef * gd2
    return energy


@njit(cache=True)
def twist_forces(x, twists, kt, f):
    """Energy ``kt/2 * s^2`` with ``s`` the sine of the relative rung twist."""
    energy = 0.0
    for k in range(twists.shape[0]):
        ti, bi, tj, bj = twists[k, 0], twists[k, 1], twists[k, 2], twists[k, 3]
        p0 = x[ti, 0] - x[bi, 0]
        p1 = x[ti, 1] - x[bi, 1]
        p2 = x[ti, 2] - x[bi, 2]
        q0 = x[tj, 0] - x[bj, 0]
        q1 = x[tj, 1] - x[bj, 1]
        q2 = x[tj, 2] - x[bj, 2]
        t0 = 0.5 * (x[tj, 0] + x[bj, 0] - x[ti, 0] - x[bi, 0])
        t1 = 0.5 * (x[tj, 1] + x[bj, 1] - x[ti, 1] - x[bi, 1])
        t2 = 0.5 * (x[tj, 2] + x[bj, 2] - x[ti, 2] - x[bi, 2])
        np_ = math.sqrt(p0 * p0 + p1 * p1 + p2 * p2)
        nq = math.sqrt(q0 * q0 + q1 * q1 + q2 * q2)
        nt = math.sqrt(t0 * t0 + t1 * t1 + t2 * t2)
        u0, u1, u2 = p0 / np_, p1 / np_, p2 / np_
        v0, v1, v2 = q0 / nq, q1 / nq, q2 / nq
        w0, w1, w2 = t0 / nt, t1 / nt, t2 / nt
        c0, c1, c2 = _cross(u0, u1, u2, v0, v1, v2)
        s = c0 * w0 + c1 * w1 + c2 * w2
        energy += 0.5 * kt * s * s
        coef = -kt * s
        # gradient with respect to p
        e0, e1, e2 = _cross(v0, v1, v2, w0, w1, w2)
        pe = e0 * u0 + e1 * u1 + e2 * u2
        gp0 = (e0 - pe * u0) / np_
        gp1 = (e1 - pe * u1) / np_
        gp2 = (e2 - pe * u2) / np_
        # gradient with respect to q
        e0, e1, e2 = _cross(w0, w1, w2, u0, u1, u2)
        pe = e0 * v0 + e1 * v1 + e2 * v2
        gq0 = (e0 - pe * v0) / nq
        gq1 = (e1 - pe * v1) / nq
        gq2 = (e2 - pe * v2) / nq
        # gradient with respect to t
        pe = c0 * w0 + c1 * w1 + c2 * w2
        gt0 = 0.5 * (c0 - pe * w0) / nt
        gt1 = 0.5 * (c1 - pe * w1) / nt
        gt2 = 0.5 * (c2 - pe * w2) / nt
        f[ti, 0] += coef * (gp0 - gt0)
        f[ti, 1] += coef * (gp1 - gt1)
        f[ti, 2] += coef * (gp2 - gt2)
        f[bi, 0] += coef * (-gp0 - gt0)
        f[bi, 1] += coef * (-gp1 - gt1)
        f[bi, 2] += coef * (-gp2 - gt2)
        f[tj, 0] += coef * (gq0 + gt0)
        f[tj, 1] += coef * (gq1 + gt1)
        f[tj, 2] += coef * (gq2 + gt2)
        f[bj, 0] += coef * (-gq0 + gt0)
        f[bj, 1] += coef * (-gq1 + gt1)
        f[bj, 2] += coef * (-gq2 + gt2)
    return energy


@njit(cache=True)
def shear_forces(x, twists, ksh, f):
    """Energy ``ksh/2 * (s_i^2 + s_j^2)``, ``s`` the cosine between a rung and the panel axis.

    Keeps rungs normal to the strip centreline without constraining panel
    warp, so twist is left to the twist springs.
    """
    energy = 0.0
    for k in range(twists.shape[0]):
        ti, bi, tj, bj = twists[k, 0], twists[k, 1], twists[k, 2], twists[k, 3]
        t = 0.5 * (x[tj] + x[bj] - x[ti] - x[bi])
        nt = math.sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2])
        th = t / nt
        gt = np.zeros(3)
        for top, bot in ((ti, bi), (tj, bj)):
            p = x[top] - x[bot]
            npn = math.sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
            ph = p / npn
            s = ph[0] * th[0] + ph[1] * th[1] + ph[2] * th[2]
            energy += 0.5 * ksh * s * s
            gp = -ksh * s * (th - s * ph) / npn
            gt += -ksh * s * (ph - s * th) / nt
            for a in range(3):
                f[top, a] += gp[a]
                f[bot, a] -= gp[a]
        for a in range(3):
            f[tj, a] += 0.5 * gt[a]
            f[bj, a] += 0.5 * gt[a]
            f[ti, a] -= 0.5 * gt[a]
            f[bi, a] -= 0.5 * gt[a]
    return energy


@njit(cache=True)
def thrust_forces(x, n, st, sw, sau, thrust, yaw_ratio, spin, f):
    """Follower thrust along the rung direction at each AU station.

    ``st``/``sw``/``sau`` list station, weight and AU index. A yaw reaction
    couple ``yaw_ratio * thrust`` about the rung is applied at the
    neighbouring stations with sign ``spin[au]``.
    """
    for k in range(st.shape[0]):
        i = st[k]
        j = sau[k]
        d0 = x[i, 0] - x[n + i, 0]
        d1 = x[i, 1] - x[n + i, 1]
        d2 = x[i, 2] - x[n + i, 2]
        dn = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
        c = 0.5 * sw[k] * thrust[j] / dn
        f[i, 0] += c * d0
        f[i, 1] += c * d1
        f[i, 2] += c * d2
        f[n + i, 0] += c * d0
        f[n + i, 1] += c * d1
        f[n + i, 2] += c * d2
        tq = yaw_ratio * spin[j] * sw[k] * thrust[j]
        if tq != 0.0:
            ip = (i + 1) % n
            im = (i - 1) % n
            u0 = 0.5 * (x[ip, 0] + x[n + ip, 0] - x[im, 0] - x[n + im, 0])
            u1 = 0.5 * (x[ip, 1] + x[n + ip, 1] - x[im, 1] - x[n + im, 1])
            u2 = 0.5 * (x[ip, 2] + x[n + ip, 2] - x[im, 2] - x[n + im, 2])
            uu = u0 * u0 + u1 * u1 + u2 * u2
            g0, g1, g2 = _cross(d0 / dn, d1 / dn, d2 / dn, u0, u1, u2)
            g0 *= 0.5 * tq / uu
            g1 *= 0.5 * tq / uu
            g2 *= 0.5 * tq / uu
            f[ip, 0] += g0
            f[ip, 1] += g1
            f[ip, 2] += g2
            f[n + ip, 0] += g0
            f[n + ip, 1] += g1
            f[n + ip, 2] += g2
            f[im, 0] -= g0
            f[im, 1] -= g1
            f[im, 2] -= g2
            f[n + im, 0] -= g0
            f[n + im, 1] -= g1
            f[n + im, 2] -= g2


@njit(cache=True)
def position_forces(x, n, sp, ks, l0, hinges, kb, psi0, twists, kt, ksh,
                    st, sw, sau, thrust, yaw_ratio, spin, m, g, f):
    """All position-dependent forces; returns the elastic energy."""
    f[:, :] = 0.0
    e = spring_forces(x, sp, ks, l0, f)
    e += hinge_forces(x, hinges, kb, psi0, f)
    e += twist_forces(x, twists, kt, f)
    if ksh > 0.0:
        e += shear_forces(x, twists, ksh, f)
    thrust_forces(x, n, st, sw, sau, thrust, yaw_ratio, spin, f)
    for i in range(x.shape[0]):
        f[i, 2] -= m[i] * g
    return e


@njit(cache=True)
def rigid_velocity(x, v, m):
    """Velocity field of the best rigid motion (same momentum and angular momentum)."""
    M = 0.0
    c = np.zeros(3)
    p = np.zeros(3)
    for i in range(x.shape[0]):
        M += m[i]
        for k in range(3):
            c[k] += m[i] * x[i, k]
            p[k] += m[i] * v[i, k]
    c /= M
    vc = p / M
    L = np.zeros(3)
    J = np.zeros((3, 3))
    for i in range(x.shape[0]):
        r0 = x[i, 0] - c[0]
        r1 = x[i, 1] - c[1]
        r2 = x[i, 2] - c[2]
        w0 = v[i, 0] - vc[0]
        w1 = v[i, 1] - vc[1]
        w2 = v[i, 2] - vc[2]
        l0, l1, l2 = _cross(r0, r1, r2, w0, w1, w2)
        L[0] += m[i] * l0
        L[1] += m[i] * l1
        L[2] += m[i] * l2
        rr = r0 * r0 + r1 * r1 + r2 * r2
        J[0, 0] += m[i] * (rr - r0 * r0)
        J[1, 1] += m[i] * (rr - r1 * r1)
        J[2, 2] += m[i] * (rr - r2 * r2)
        J[0, 1] -= m[i] * r0 * r1
        J[0, 2] -= m[i] * r0 * r2
        J[1, 2] -= m[i] * r1 * r2
    J[1, 0] = J[0, 1]
    J[2, 0] = J[0, 2]
    J[2, 1] = J[1, 2]
    om = np.linalg.solve(J, L)
    out = np.empty_like(v)
    for i in range(x.shape[0]):
        r0 = x[i, 0] - c[0]
        r1 = x[i, 1] - c[1]
        r2 = x[i, 2] - c[2]
        a0, a1, a2 = _cross(om[0], om[1], om[2], r0, r1, r2)
        out[i, 0] = vc[0] + a0
        out[i, 1] = vc[1] + a1
        out[i, 2] = vc[2] + a2
    return out


@njit(cache=True)
def damping_forces(x, v, m, c, f):
    """Mass-proportional damping of the deformation velocity only."""
    if c == 0.0:
        return
    vr = rigid_velocity(x, v, m)
    for i in range(x.shape[0]):
        for k in range(3):
            f[i, k] -= c * m[i] * (v[i, k] - vr[i, k])


@njit(cache=True)
def fd_stiffness(x, n, sp, ks, l0, hinges, kb, psi0, twists, kt, ksh, st, sw, sau, thrust,
                 yaw_ratio, spin, m, g, color, ncolor, h):
    """Dense ``-dF/dx`` by coloured forward differences.

    Perturbing one station moves forces only on stations within two
    neighbours, so stations sharing a colour are perturbed together.
    """
    nd = 6 * n
    K = np.zeros((nd, nd))
    f0 = np.zeros((2 * n, 3))
    f1 = np.zeros((2 * n, 3))
    position_forces(x, n, sp, ks, l0, hinges, kb, psi0, twists, kt, ksh, st, sw, sau, thrust,
                    yaw_ratio, spin, m, g, f0)
    xp = x.copy()
    for col in range(ncolor):
        for layer in range(2):
            for ax in range(3):
                for i in range(n):
                    if color[i] == col:
                        xp[layer * n + i, ax] += h
                position_forces(xp, n, sp, ks, l0, hinges, kb, psi0, twists, kt, ksh, st, sw, sau,
                                thrust, yaw_ratio, spin, m, g, f1)
                for i in range(n):
                    if color[i] == col:
                        xp[layer * n + i, ax] = x[layer * n + i, ax]
                        src = 3 * (layer * n + i) + ax
                        for di in range(-2, 3):
                            s = (i + di) % n
                            for ly in range(2):
                                p = ly * n + s
                                for k in range(3):
                                    K[3 * p + k, src] = -(f1[p, k] - f0[p, k]) / h
    return K


@njit(cache=True)
def rail_turning(x, hinges):
    out = np.empty(hinges.shape[0])
    for k in range(hinges.shape[0]):
        out[k] = hinge_angle(x, hinges[k])
    return out
