"""Incomplete elliptic integrals of the first and second kind.

Convention: the second argument is the *modulus* ``eta`` (often called ``k``),
not the parameter ``m = eta**2`` that scipy and Abramowitz & Stegun use::

    ellip_f(phi, eta) = int_0^phi dtheta / sqrt(1 - eta^2 sin^2 theta)
    ellip_e(phi, eta) = int_0^phi sqrt(1 - eta^2 sin^2 theta) dtheta

Moduli above one are accepted as long as ``eta * sin(phi) <= 1``. Evaluation
goes through Carlson's symmetric forms R_F and R_D (duplication theorem),
vectorised over numpy arrays.
"""

from __future__ import annotations

import numpy as np

HALF_PI = 0.5 * np.pi

_REL_TOL = 1e-16
_MAX_ITER = 60
# slack when checking eta * sin(phi) <= 1 against round-off
_EDGE_TOL = 1e-13


class EllipticDomainError(ValueError):
    pass


def carlson_rf(x, y, z):
    """Carlson's R_F(x, y, z) for non-negative arguments, at most one zero."""
    x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, z)))
    x, y, z = x.copy(), y.copy(), z.copy()
    a0 = (x + y + z) / 3.0
    q = (3.0 * _REL_TOL) ** (-1.0 / 6.0) * np.maximum.reduce(
        [np.abs(a0 - x), np.abs(a0 - y), np.abs(a0 - z)]
    )
    a = a0.copy()
    x0, y0 = x.copy(), y.copy()
    scale = 1.0
    for _ in range(_MAX_ITER):
        if np.all(scale * q < np.abs(a)):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    with np.errstate(divide="ignore", invalid="ignore"):
        X = scale * (a0 - x0) / a
        Y = scale * (a0 - y0) / a
        Z = -(X + Y)
        e2 = X * Y - Z * Z
        e3 = X * Y * Z
        out = (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / np.sqrt(a)
    return out


def carlson_rd(x, y, z):
    """Carlson's R_D(x, y, z); x, y >= 0 (not both zero), z > 0."""
    x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, z)))
    x, y, z = x.copy(), y.copy(), z.copy()
    a0 = (x + y + 3.0 * z) / 5.0
    q = (0.25 * _REL_TOL) ** (-1.0 / 6.0) * np.maximum.reduce(
        [np.abs(a0 - x), np.abs(a0 - y), np.abs(a0 - z)]
    )
    a = a0.copy()
    x0, y0 = x.copy(), y.copy()
    total = np.zeros_like(a)
    scale = 1.0
    for _ in range(_MAX_ITER):
        if np.all(scale * q < np.abs(a)):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        total += scale / (sz * (z + lam))
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    with np.errstate(divide="ignore", invalid="ignore"):
        X = scale * (a0 - x0) / a
        Y = scale * (a0 - y0) / a
        Z = -(X + Y) / 3.0
        xy = X * Y
        z2 = Z * Z
        e2 = xy - 6.0 * z2
        e3 = (3.0 * xy - 8.0 * z2) * Z
        e4 = 3.0 * (xy - z2) * z2
        e5 = xy * z2 * Z
        series = (
            1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0
            - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0
        )
        out = scale * series / (a * np.sqrt(a)) + 3.0 * total
    return out


def _prepare(phi, eta):
    phi = np.asarray(phi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if np.any(~np.isfinite(phi)) or np.any(~np.isfinite(eta)):
        raise EllipticDomainError("non-finite argument")
    if np.any(phi < 0.0) or np.any(phi > HALF_PI + 1e-15):
        raise EllipticDomainError("amplitude must lie in [0, pi/2]")
    if np.any(eta < 0.0):
        raise EllipticDomainError("modulus must be non-negative")
    phi = np.minimum(phi, HALF_PI)
    s = np.sin(phi)
    c = np.cos(phi)
    y = 1.0 - (eta * s) ** 2
    if np.any(y < -_EDGE_TOL):
        raise EllipticDomainError("eta * sin(phi) > 1: integrand is not real")
    return s, c * c, np.maximum(y, 0.0), eta


def ellip_f(phi, eta):
    """Incomplete integral of the first kind F(phi | modulus eta).

    Raises
    ------
    EllipticDomainError
        Outside the real domain, or at ``eta = 1, phi = pi/2`` where the
        integral diverges logarithmically.
    """
    s, c2, y, eta = _prepare(phi, eta)
    if np.any((y == 0.0) & (c2 <= 1e-30)):
        raise EllipticDomainError("F diverges at eta = 1, phi = pi/2")
    out = s * carlson_rf(c2, y, 1.0)
    return out if out.ndim else float(out)


def ellip_e(phi, eta):
    """Incomplete integral of the second kind E(phi | modulus eta)."""
    s, c2, y, eta = _prepare(phi, eta)
    corner = (y == 0.0) & (c2 <= 1e-30)
    # R_F and R_D both blow up at the corner, where E(pi/2 | 1) = 1
    c2s = np.where(corner, 1.0, c2)
    rf = carlson_rf(c2s, y, 1.0)
    rd = carlson_rd(c2s, y, 1.0)
    out = s * rf - (eta * eta) * s**3 * rd / 3.0
    out = np.where(corner, s, out)
    return out if out.ndim else float(out)


def ellip_k(eta):
    """Complete integral of the first kind K(eta) = F(pi/2 | eta)."""
    return ellip_f(HALF_PI, eta)


def ellip_ek(eta):
    """Complete integral of the second kind E(eta) = E(pi/2 | eta)."""
    return ellip_e(HALF_PI, eta)
