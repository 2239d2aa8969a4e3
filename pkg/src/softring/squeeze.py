"""Squeezability: stress-limited diametric compression of the ring frame."""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np

from .design import DesignPoint, DroneSpec, InfeasibleDesign, MaterialSpec, size_drone
from .elastica import default_curve
from .heatmap import ABSENT, Heatmap, run_ordered
from .statfit import FitError, PowerLawFit, loglog_fit, multivar_loglog_fit


class Limiting(str, enum.Enum):
    SELF_CONTACT = "SelfContact"
    STRESS_LIMIT = "StressLimit"


@dataclass(frozen=True)
class SqueezeResult:
    delta_R_max: float
    sqt: float
    F_C_max: float
    limiting: Limiting
    sigma_max_at_limit: float


def initial_curvature(spec: DroneSpec, mode: str | float = "flat") -> float:
    """``"flat"`` strips start straight, ``"curved"`` ones are laminated at 1/R."""
    if mode == "flat":
        return 0.0
    if mode == "curved":
        return 1.0 / spec.radius
    return float(mode)


def redimensionalize(spec: DroneSpec, delta_tilde, force_tilde, kappa_tilde):
    """(squeeze m, force N, curvature 1/m) from non-dimensional values."""
    R = spec.radius
    return (2.0 * R * np.asarray(delta_tilde), np.asarray(force_tilde) * spec.EI / R**2,
            np.asarray(kappa_tilde) / (2.0 * R))


def max_stress(spec: DroneSpec, delta_tilde, kappa0: float = 0.0):
    """Peak bending stress (Pa) in the strips at squeeze ``delta_tilde``."""
    kappa = default_curve().kappa_at(delta_tilde) / (2.0 * spec.radius)
    return np.abs(kappa - kappa0) * spec.material.flexural_modulus * spec.strip_thickness / 2.0


def squeezability(spec: DroneSpec, kappa0: float = 0.0) -> SqueezeResult:
    curve = default_curve()
    allow = spec.material.allowable_stress
    R = spec.radius
    sel = curve.delta_tilde <= 1.0 + 1e-12
    d, f, kap = curve.delta_tilde[sel], curve.force_tilde[sel], curve.kappa_tilde[sel]
    sigma = np.abs(kap / (2 * R) - kappa0) * spec.material.flexural_modulus * spec.strip_thickness / 2
    if sigma[-1] <= allow:
        d_max, lim = 1.0, Limiting.SELF_CONTACT
    elif sigma[0] > allow:
        d_max, lim = 0.0, Limiting.STRESS_LIMIT
    else:
        # stress grows monotonically with squeeze along the physical path
        d_max, lim = float(np.interp(allow, sigma, d)), Limiting.STRESS_LIMIT
    f_max = float(np.interp(d_max, d, f)) * spec.EI / R**2
    return SqueezeResult(2 * R * d_max, d_max, f_max, lim, float(max_stress(spec, d_max, kappa0)))


def _point(dp: DesignPoint, mat: MaterialSpec, kappa_mode):
    try:
        spec = size_drone(dp, mat)
    except InfeasibleDesign:
        return None
    return squeezability(spec, initial_curvature(spec, kappa_mode))


def squeeze_results(grid, mat: MaterialSpec | None = None, kappa_mode="flat", threads: int = 1):
    mat = mat or MaterialSpec()
    return run_ordered(functools.partial(_point, mat=mat, kappa_mode=kappa_mode), list(grid), threads)


def sqt_heatmap(grid, mat: MaterialSpec | None = None, kappa_mode="flat", threads: int = 1) -> Heatmap:
    grid = list(grid)
    res = squeeze_results(grid, mat, kappa_mode, threads)
    vals = [np.nan if r is None else r.sqt for r in res]
    flags = [ABSENT if r is None else r.limiting.value for r in res]
    return Heatmap.from_results("sqt", grid, vals, flags)


def boundary_points(heatmap: Heatmap):
    """Per mass column, geometric mean of the last sqt = 1 and first sqt < 1 stiffness."""
    ms, kb = [], []
    for m in heatmap.masses:
        k, v, _ = heatmap.column(m)
        ok = ~np.isnan(v)
        k, v = k[ok], v[ok]
        full = v >= 1.0 - 1e-12
        if full.all() or not full.any():
            continue
        first_partial = int(np.argmin(full))
        if first_partial == 0:
            continue
        ms.append(m)
        kb.append(np.sqrt(k[first_partial - 1] * k[first_partial]))
    return np.array(ms), np.array(kb)


def fit_sqt_boundary(heatmap: Heatmap) -> PowerLawFit:
    """Boundary stiffness law ``k_b = a M^b`` (k in N/mm, M in kg)."""
    ms, kb = boundary_points(heatmap)
    if ms.size < 3:
        raise FitError("heatmap has no usable sqt = 1 / sqt < 1 boundary")
    return loglog_fit(ms, kb, units={"x": "kg", "y": "N/mm"})


def fit_full_squeeze_force(grid, mat: MaterialSpec | None = None, threads: int = 1) -> PowerLawFit:
    """``F_C = c k^p M^q`` over fully squeezable points (F in N, k in N/mm, M in kg)."""
    grid = list(grid)
    res = squeeze_results(grid, mat, threads=threads)
    rows = [(p.stiffness_n_per_mm, p.mass, r.F_C_max) for p, r in zip(grid, res)
            if r is not None and r.limiting is Limiting.SELF_CONTACT]
    if len(rows) < 3:
        raise FitError("fewer than 3 fully squeezable points")
    a = np.array(rows)
    return multivar_loglog_fit(a[:, :2], a[:, 2], units={"x": ["N/mm", "kg"], "y": "N"})
