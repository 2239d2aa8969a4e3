"""Quasi-static diametric squeeze of the discrete ring (oracle for the elastica).

Two diametrically opposite nodes are driven towards each other along the
squeeze axis and fully held; every other node is free. Each load step is a
Newton solve on the total elastic energy (finite-difference Hessian of the
analytic gradient) with backtracking, started from the previous converged
shape. The reaction at the driven nodes gives the squeeze force; the largest
discrete curvature ``psi_i / l_i`` gives the peak curvature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .model import RodModel
from .planar import elastic_gradient, fd_hessian, turning_angles


class StaticConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class StaticCurve:
    delta_tilde: np.ndarray
    force_tilde: np.ndarray
    kappa_tilde: np.ndarray
    shapes: np.ndarray

    def force_at(self, d):
        return np.interp(d, self.delta_tilde, self.force_tilde)

    def kappa_at(self, d):
        return np.interp(d, self.delta_tilde, self.kappa_tilde)


def _discrete_curvature(x):
    psi = turning_angles(x)
    seg = np.linalg.norm(np.roll(x, -1, axis=0) - x, axis=1)
    vor = 0.5 * (seg + np.roll(seg, 1))
    return psi / vor


def _newton(x, free, params, scale, tol, max_iter):
    ks, l0, kb, psi0 = params
    h = 1e-7 * scale
    prev = np.inf
    for it in range(max_iter):
        e, g = elastic_gradient(x, ks, l0, kb, psi0)
        gf = g.ravel()[free]
        res = np.linalg.norm(gf)
        # also stop on a round-off floor just above the tolerance
        if res < tol or (res < 1e2 * tol and res > 0.5 * prev):
            return x, it
        prev = res
        H = fd_hessian(x, ks, l0, kb, psi0, h)[np.ix_(free, free)]
        lam = 0.0
        while True:
            try:
                step = -cho_solve(cho_factor(H + lam * np.eye(H.shape[0])), gf)
                break
            except LinAlgError:
                lam = max(10 * lam, 1e-8 * np.abs(np.diag(H)).max())
        t = 1.0
        # near convergence energy changes fall below round-off: take full steps
        while np.linalg.norm(gf) > 1e3 * tol:
            xt = x.copy().ravel()
            xt[free] += t * step
            xt = xt.reshape(x.shape)
            et, _ = elastic_gradient(xt, ks, l0, kb, psi0)
            if et <= e + 1e-4 * t * gf @ step or t < 1e-3:
                break
            t *= 0.5
        else:
            xt = x.copy().ravel()
            xt[free] += step
            xt = xt.reshape(x.shape)
        x = xt
    raise StaticConvergenceError(f"Newton did not converge in {max_iter} iterations")


def static_squeeze(model: RodModel, delta_schedule, *, tol_rel: float = 1e-9,
                   max_iter: int = 60, substeps: int = 4) -> StaticCurve:
    """Force and curvature along an increasing squeeze schedule (non-dimensional)."""
    deltas = np.asarray(delta_schedule, dtype=float)
    if deltas.size == 0 or np.any(np.diff(deltas) <= 0) or deltas[0] < 0:
        raise ValueError("squeeze schedule must be increasing and non-negative")
    N = model.n_nodes
    R = model.radius
    EI = model.EI
    l0 = model.seg_length
    params = (model.stretch_stiffness, l0, EI / l0, 2 * math.pi / N)
    th = 2 * np.pi * np.arange(N) / N
    x = R * np.column_stack([np.cos(th), np.sin(th)])
    A, B = 0, N // 2
    fixed = [2 * A, 2 * A + 1, 2 * B, 2 * B + 1]
    free = np.setdiff1d(np.arange(2 * N), fixed)
    tol = tol_rel * EI / R**2

    F, K, S = [], [], []
    prev_d, prev_x, prev2_x, prev2_d = 0.0, x.copy(), None, None
    for d in deltas:
        # sub-steps from the last converged state to the target
        for s in range(1, substeps + 1):
            ds = prev_d + (d - prev_d) * s / substeps
            if prev2_x is not None and prev_d > prev2_d:
                x = prev_x + (prev_x - prev2_x) * (ds - prev_d) / (prev_d - prev2_d)
            x[A, :] = (R * (1 - ds), 0.0)
            x[B, :] = (-R * (1 - ds), 0.0)
            x, _ = _newton(x, free, params, R, tol, max_iter)
            prev2_x, prev2_d = prev_x, prev_d
            prev_x, prev_d = x.copy(), ds
        _, g = elastic_gradient(x, *params)
        # holding force on each driven node along the squeeze axis
        F.append(0.5 * (-g[A, 0] + g[B, 0]) * R**2 / EI)
        K.append(2 * R * np.abs(_discrete_curvature(x)).max())
        S.append(x.copy())
    return StaticCurve(deltas, np.array(F), np.array(K), np.array(S))


def ring_stiffness(model: RodModel, delta_tilde: float = 0.1) -> float:
    """Secant ring stiffness ``(F_tilde / delta_tilde) EI / R^3`` (N/m).

    Same convention as the design stiffness ``k = stiffness_constant EI / R^3``.
    """
    c = static_squeeze(model, [delta_tilde], substeps=max(1, int(round(delta_tilde / 0.02))))
    return c.force_tilde[0] / delta_tilde * model.EI / model.radius**3
