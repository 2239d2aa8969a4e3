"""Independent reference computations used only by the tests.

None of these share code with the package: elliptic integrals come from
adaptive quadrature and the arithmetic-geometric mean, the ring squeeze
from shooting on the elastica ODE, and the out-of-plane ring stiffness
from thin-ring modal superposition.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq


def quad_f(phi: float, eta: float) -> float:
    """Incomplete first-kind integral by adaptive quadrature (modulus ``eta``)."""
    return quad(lambda t: 1.0 / math.sqrt(1.0 - (eta * math.sin(t)) ** 2), 0.0, phi,
                epsabs=1e-14, epsrel=1e-13, limit=200)[0]


def quad_e(phi: float, eta: float) -> float:
    """Incomplete second-kind integral by adaptive quadrature (modulus ``eta``)."""
    return quad(lambda t: math.sqrt(max(0.0, 1.0 - (eta * math.sin(t)) ** 2)), 0.0, phi,
                epsabs=1e-14, epsrel=1e-13, limit=200)[0]


def agm_k(eta: float) -> float:
    """Complete first-kind integral ``pi / (2 AGM(1, sqrt(1 - eta^2)))``."""
    a, b = 1.0, math.sqrt(1.0 - eta * eta)
    for _ in range(64):
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def _quarter_ring(load: float, k0: float):
    """Quarter of a unit ring from its crown, end load ``load`` (non-dimensional)."""
    def rhs(s, u):
        return [math.cos(u[2]), math.sin(u[2]), u[3], -load * math.sin(u[2])]
    return solve_ivp(rhs, (0.0, 0.5 * math.pi), [0.0, 1.0, 0.0, k0], rtol=1e-12, atol=1e-13,
                     dense_output=True)


def _crown_curvature(load: float) -> float:
    g = lambda k: _quarter_ring(load, k).y[2, -1] + 0.5 * math.pi
    ks = np.linspace(-2.0, -1.0, 11)
    v = [g(k) for k in ks]
    for i in range(ks.size - 1):
        if v[i] * v[i + 1] <= 0.0:
            return brentq(g, ks[i], ks[i + 1], xtol=1e-14)
    raise RuntimeError("no crown curvature root")


def shooting_squeeze(delta: float) -> tuple[float, float]:
    """(force, 2 R kappa_max) of the inflexion-free squeezed ring, by shooting.

    Valid on the inflexion-free range ``delta < 0.28``.
    """
    def squeeze(load):
        return 1.0 - _quarter_ring(load, _crown_curvature(load)).y[0, -1]

    load = brentq(lambda p: squeeze(p) - delta, 1e-6, 1.5, xtol=1e-13)
    sol = _quarter_ring(load, _crown_curvature(load))
    kappa = np.abs(sol.sol(np.linspace(0.0, 0.5 * math.pi, 4001))[3]).max()
    return 2.0 * load, 2.0 * kappa


def modal_kperp_tilde(gj_ratio: float, width_ratio: float, n_terms: int = 400) -> float:
    """Out-of-plane stiffness ``k_perp R^3 / EI`` of a thin ring under four-point lift.

    Alternating unit loads at 90 degrees excite only modes ``n = 2, 6, 10, ...``.
    Each mode has stiffness ``pi (n^2 - 1)^2 n^2 [GJ/EI + n^2 (w/R)^2 / 4]``
    (weak-axis bending plus twist plus warping of the strip).
    """
    n = 2.0 + 4.0 * np.arange(n_terms)
    kn = math.pi * (n * n - 1.0) ** 2 * n * n * (gj_ratio + n * n * width_ratio**2 / 4.0)
    return 1.0 / (8.0 * np.sum(1.0 / kn))


# Frozen oracle outputs (computed once with the functions above).
SHOOTING = {
    0.05: (0.6254082014794, 2.2426387694118),
    0.1: (1.1743315144003, 2.4823338500060),
    0.2: (2.1153003781206, 2.9547376201157),
}
K_HALF = 1.854074677301372
E_HALF = 1.350643881047675
