"""Non-dimensional elastica of a diametrically squeezed ring.

The ring is two mirror semicircular inextensible beams. Along the physical
loading path the shape has no inflexion point up to ``delta ~ 0.282`` (branch
0) and four beyond it (branch 4), where the two loaded points cross at
``delta = 1`` and keep going into self-intersection up to ``delta = 2``.

Non-dimensional variables::

    delta = delta_R / (2 R)       diametric squeeze
    force = F_C R^2 / EI          total compression force
    kappa = 2 R kappa_max         peak curvature (2 for the undeformed ring)

Every curve is parametrised by the elliptic modulus ``eta`` (see
:mod:`softring.elliptic` for the modulus convention).
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .elliptic import EllipticDomainError, carlson_rd, ellip_e, ellip_f

SQRT2 = np.sqrt(2.0)
ETA4_MIN = 1.0 / SQRT2
ETA0_MAX = SQRT2
DEFAULT_STEP = 0.002
ROOT_XTOL = 1e-13
ROOT_MAXITER = 200


class Branch(enum.IntEnum):
    ZERO_INFLEXION = 0
    FOUR_INFLEXION = 4


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class BranchPoint:
    eta: float
    delta_tilde: float
    force_tilde: float
    kappa_tilde: float
    branch: Branch


def _branch0(eta):
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0.0) or np.any(eta > ETA0_MAX * (1 + 1e-15)):
        raise EllipticDomainError("branch 0 needs eta in [0, sqrt(2)]")
    phi = 0.25 * np.pi
    s = np.sin(phi)
    f = ellip_f(phi, eta)
    y = np.maximum(1.0 - (eta * s) ** 2, 0.0)
    # (1 - E/F) * 2/eta^2 written through R_D so eta -> 0 has no cancellation
    ratio = 2.0 * s**3 * carlson_rd(s * s, y, 1.0) / (3.0 * f)
    delta = 1.0 - 0.5 * np.pi * (1.0 - ratio)
    force = 8.0 / np.pi**2 * eta**2 * f**2
    # (2/eta) sqrt(2 force) simplifies to 8 F / pi
    kappa = 8.0 * f / np.pi
    return delta, force, kappa


def _branch4(eta):
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < ETA4_MIN * (1 - 1e-15)) or np.any(eta >= 1.0):
        raise EllipticDomainError("branch 4 needs eta in [1/sqrt(2), 1)")
    a = np.arcsin(np.minimum(1.0 / (SQRT2 * eta), 1.0))
    half = 0.5 * np.pi
    den = 2.0 * ellip_f(half, eta) - ellip_f(a, eta)
    num = 2.0 * ellip_e(half, eta) - ellip_e(a, eta)
    delta = 1.0 - 0.5 * np.pi * (2.0 * num / den - 1.0)
    force = 8.0 / np.pi**2 * den**2
    kappa = 8.0 * eta * den / np.pi
    return delta, force, kappa


def _as_point(vals, eta, branch):
    d, f, k = (float(v) for v in vals)
    return BranchPoint(float(eta), d, f, k, branch)


def branch0_point(eta: float) -> BranchPoint:
    """Zero-inflexion solution, ``eta`` in [0, sqrt(2)]."""
    return _as_point(_branch0(eta), eta, Branch.ZERO_INFLEXION)


def branch4_point(eta: float) -> BranchPoint:
    """Four-inflexion solution, ``eta`` in [1/sqrt(2), 1)."""
    return _as_point(_branch4(eta), eta, Branch.FOUR_INFLEXION)


def _solve(fun, lo, hi, target):
    g = lambda e: float(fun(e)[0]) - target
    glo, ghi = g(lo), g(hi)
    if glo * ghi > 0:
        raise ValueError(f"target squeeze {target} outside branch range")
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    try:
        return brentq(g, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=ROOT_MAXITER)
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from exc


# branch 4 upper end used as a bracket; delta(1 - 1e-12) is ~2.4
_ETA4_HI = 1.0 - 1e-12


def solve_branch4(delta_target: float) -> float:
    """Modulus on branch 4 reaching ``delta_target``."""
    return _solve(_branch4, ETA4_MIN, _ETA4_HI, delta_target)


def solve_branch0(delta_target: float) -> float:
    return _solve(_branch0, 0.0, ETA0_MAX, delta_target)


def solve_eta_bar() -> float:
    """Branch-4 modulus at full squeeze (``delta = 1``)."""
    eta = solve_branch4(1.0)
    if abs(float(_branch4(eta)[0]) - 1.0) > 1e-10:
        raise ConvergenceError("eta_bar residual above 1e-10")
    return eta


def solve_eta_max(delta_max: float = 2.0) -> float:
    return solve_branch4(delta_max)


def _bisect_vec(fun, lo, hi, targets, iters=80):
    """Vectorised bisection of a monotone increasing ``fun`` for many targets."""
    a = np.full(targets.shape, lo)
    b = np.full(targets.shape, hi)
    for _ in range(iters):
        m = 0.5 * (a + b)
        below = fun(m)[0] < targets
        a = np.where(below, m, a)
        b = np.where(below, b, m)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class CharacteristicCurve:
    """Merged physical path sampled on a uniform squeeze grid.

    ``quantity`` selects what :attr:`values` returns: ``"force"`` for the
    force-compression curve, ``"kappa"`` for the curvature-compression one.
    """

    eta: np.ndarray
    delta_tilde: np.ndarray
    force_tilde: np.ndarray
    kappa_tilde: np.ndarray
    branch: np.ndarray
    resample_step: float
    quantity: str = "force"

    @property
    def values(self) -> np.ndarray:
        return self.force_tilde if self.quantity == "force" else self.kappa_tilde

    def at(self, delta_tilde):
        return np.interp(delta_tilde, self.delta_tilde, self.values)

    def force_at(self, delta_tilde):
        return np.interp(delta_tilde, self.delta_tilde, self.force_tilde)

    def kappa_at(self, delta_tilde):
        return np.interp(delta_tilde, self.delta_tilde, self.kappa_tilde)

    def points(self):
        for i in range(self.delta_tilde.size):
            yield BranchPoint(
                float(self.eta[i]), float(self.delta_tilde[i]), float(self.force_tilde[i]),
                float(self.kappa_tilde[i]), Branch(int(self.branch[i])),
            )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["branch", "eta", "delta_tilde", "force_tilde", "kappa_tilde"])
            for i in range(self.delta_tilde.size):
                w.writerow([
                    int(self.branch[i]), f"{self.eta[i]:.17g}", f"{self.delta_tilde[i]:.17g}",
                    f"{self.force_tilde[i]:.17g}", f"{self.kappa_tilde[i]:.17g}",
                ])


def _merged_samples(deltas):
    d0_max = float(_branch0(ETA0_MAX)[0])
    d4_min = float(_branch4(ETA4_MIN)[0])
    eta_hi = solve_eta_max(float(deltas.max())) if deltas.max() > d4_min else ETA4_MIN

    n = deltas.size
    best_f = np.full(n, np.inf)
    best = {k: np.zeros(n) for k in ("eta", "kappa")}
    branch = np.full(n, -1, dtype=int)

    in0 = deltas <= d0_max
    if np.any(in0):
        e = _bisect_vec(_branch0, 0.0, ETA0_MAX, deltas[in0])
        e[deltas[in0] == 0.0] = 0.0
        _, f, k = _branch0(e)
        idx = np.flatnonzero(in0)
        take = f < best_f[idx]
        best_f[idx[take]] = f[take]
        best["eta"][idx[take]] = e[take]
        best["kappa"][idx[take]] = k[take]
        branch[idx[take]] = 0
    in4 = deltas >= d4_min
    if np.any(in4):
        e = _bisect_vec(_branch4, ETA4_MIN, eta_hi, deltas[in4])
        _, f, k = _branch4(e)
        idx = np.flatnonzero(in4)
        # minimum-load rule where both branches reach the same squeeze
        take = f < best_f[idx]
        best_f[idx[take]] = f[take]
        best["eta"][idx[take]] = e[take]
        best["kappa"][idx[take]] = k[take]
        branch[idx[take]] = 4
    if np.any(branch < 0):
        raise ValueError("squeeze grid not covered by either branch")
    return best["eta"], best_f, best["kappa"], branch


@lru_cache(maxsize=8)
def _curves(step: float, delta_max: float):
    n = int(round(delta_max / step))
    deltas = np.arange(n + 1) * step
    eta, f, k, br = _merged_samples(deltas)
    for a in (deltas, eta, f, k, br):
        a.setflags(write=False)
    return deltas, eta, f, k, br


def characteristic_curves(resample_step: float = DEFAULT_STEP, delta_max: float = 2.0):
    """Force and curvature characteristics on a uniform squeeze grid ``[0, delta_max]``.

    Returns
    -------
    (CharacteristicCurve, CharacteristicCurve)
        The force-compression and curvature-compression curves.
    """
    if not 0.0 < resample_step <= 0.01:
        raise ValueError("resample step must be in (0, 0.01]")
    if abs(delta_max / resample_step - round(delta_max / resample_step)) > 1e-9:
        raise ValueError("delta_max must be a multiple of the resample step")
    deltas, eta, f, k, br = _curves(float(resample_step), float(delta_max))
    common = dict(eta=eta, delta_tilde=deltas, force_tilde=f, kappa_tilde=k, branch=br,
                  resample_step=float(resample_step))
    return CharacteristicCurve(quantity="force", **common), CharacteristicCurve(quantity="kappa", **common)


def default_curve() -> CharacteristicCurve:
    return characteristic_curves()[0]


def invert_squeeze(delta_tilde: float) -> tuple[float, float]:
    """(force, kappa) on the merged physical path at squeeze ``delta_tilde``."""
    if not 0.0 <= delta_tilde <= 2.0:
        raise ValueError("squeeze must lie in [0, 2]")
    if delta_tilde == 0.0:
        return 0.0, 2.0
    d0_max = float(_branch0(ETA0_MAX)[0])
    if delta_tilde <= d0_max:
        _, f, k = _branch0(solve_branch0(delta_tilde))
    else:
        _, f, k = _branch4(solve_branch4(delta_tilde))
    return float(f), float(k)


def ktilde_check(delta_ref: float = 0.1) -> float:
    """Secant stiffness constant ``force / delta`` at the reference squeeze."""
    return invert_squeeze(delta_ref)[0] / delta_ref


def full_squeeze_work(delta_end: float = 1.0, step: float = DEFAULT_STEP) -> float:
    """Non-dimensional work ``int_0^delta_end force d(delta)``."""
    c = default_curve() if step == DEFAULT_STEP else characteristic_curves(step)[0]
    sel = c.delta_tilde <= delta_end + 1e-12
    return float(np.trapezoid(c.force_tilde[sel], c.delta_tilde[sel]))
