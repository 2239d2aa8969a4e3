"""3D ladder model: construction, out-of-plane stiffness calibration and flight.

Flight uses the HHT-alpha member of the Newmark family (implicit, second
order, mild high-frequency dissipation) with a modified Newton solve whose
Jacobian comes from coloured finite differences of the force kernel.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import linalg, optimize

from ..config import DEFAULTS
from .ladder import damping_forces, fd_stiffness, position_forces, rail_turning, rigid_velocity
from .model import RodModel
from .scenario import FlightScenario
from .trace import SimTrace, SimulationError

RCFG = DEFAULTS["rodsim"]
PERP_STIFFNESS_CONSTANT = DEFAULTS["sizing"]["perp_stiffness_constant"]
AU_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
SPIN = np.array([1.0, -1.0, 1.0, -1.0])
HHT_ALPHA = -0.05
# Lift used for the stiffness: small enough that the response is linear.
KPERP_DEFLECTION = 1e-4


def _colouring(n: int) -> tuple[np.ndarray, int]:
    """Station colours such that equal colours are at least 5 stations apart."""
    for nc in range(5, n + 1):
        col = np.arange(n) % nc
        ok = True
        for c in range(nc):
            idx = np.flatnonzero(col == c)
            if idx.size > 1:
                gaps = np.diff(np.concatenate([idx, [idx[0] + n]]))
                if gaps.min() < 5:
                    ok = False
                    break
        if ok:
            return col.astype(np.int64), nc
    raise ValueError("ring too short for the stiffness colouring")


@dataclass(frozen=True)
class LadderGeometry:
    """Particle layout and elastic element tables (no masses)."""

    n: int
    rest: np.ndarray
    springs: np.ndarray
    spring_k: np.ndarray
    spring_l0: np.ndarray
    hinges: np.ndarray
    kb: float
    psi0: float
    twists: np.ndarray
    kt: float
    ksh: float
    seg_length: float


def ladder_geometry(n: int, radius: float, width: float, EI: float, GJ: float, stretch_ratio: float,
                    theta: np.ndarray | None = None, shear_ratio: float | None = None) -> LadderGeometry:
    """Ladder at rest in the ``z = 0`` plane.

    Rails and rungs are axial springs with the planar model's stretch
    stiffness. In-strip shear is resisted by keeping each rung normal to the
    panel axis (``shear_ratio`` times the rail hinge stiffness) rather than by
    diagonal springs, which would also lock panel warp and hence twist.
    """
    if theta is None:
        theta = 2 * math.pi * np.arange(n) / n
    if shear_ratio is None:
        shear_ratio = stretch_ratio
    ring = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    rest = np.zeros((2 * n, 3))
    rest[:n, :2] = ring
    rest[n:, :2] = ring
    rest[:n, 2] = 0.5 * width
    rest[n:, 2] = -0.5 * width
    l = 2.0 * radius * math.sin(math.pi / n)
    k_ax = stretch_ratio * 0.5 * EI / l**3
    i = np.arange(n)
    ip = (i + 1) % n
    im = (i - 1) % n
    springs = np.concatenate([
        np.column_stack([i, ip]), np.column_stack([n + i, n + ip]), np.column_stack([i, n + i]),
    ]).astype(np.int64)
    l0 = np.concatenate([np.full(2 * n, l), np.full(n, width)])
    hinges = np.concatenate([
        np.column_stack([im, i, ip, i, n + i]),
        np.column_stack([n + im, n + i, n + ip, i, n + i]),
    ]).astype(np.int64)
    twists = np.column_stack([i, n + i, ip, n + ip]).astype(np.int64)
    return LadderGeometry(
        n=n, rest=rest, springs=springs, spring_k=np.full(len(springs), k_ax), spring_l0=l0,
        hinges=hinges, kb=0.5 * EI / l, psi0=2 * math.pi / n, twists=twists, kt=GJ / l,
        ksh=shear_ratio * EI / l, seg_length=l,
    )


_NO_THRUST = (np.zeros(0, np.int64), np.zeros(0), np.zeros(0, np.int64))


def _forces(geo: LadderGeometry, x, thrust_tab, thrust, yaw_ratio, m, g, f):
    st, sw, sau = thrust_tab
    return position_forces(x, geo.n, geo.springs, geo.spring_k, geo.spring_l0, geo.hinges, geo.kb,
                           geo.psi0, geo.twists, geo.kt, geo.ksh, st, sw, sau, thrust, yaw_ratio, SPIN, m, g, f)


def _stiffness(geo: LadderGeometry, x, thrust_tab, thrust, yaw_ratio, m, g, colour, h):
    st, sw, sau = thrust_tab
    col, nc = colour
    return fd_stiffness(x, geo.n, geo.springs, geo.spring_k, geo.spring_l0, geo.hinges, geo.kb,
                        geo.psi0, geo.twists, geo.kt, geo.ksh, st, sw, sau, thrust, yaw_ratio, SPIN, m, g,
                        col, nc, h)


def out_of_plane_stiffness(geo: LadderGeometry, au_nodes, deflection: float, steps: int = 4,
                           tol: float = 1e-9, max_iter: int = 40) -> float:
    """Static diagonal-saddle test: reaction per unit lift at the first AU.

    The first and third AUs are lifted by ``deflection``; the second and
    fourth are held in the transverse plane. One in-plane point and one
    tangential direction remove the in-plane rigid motions.
    """
    n = geo.n
    nd = 6 * n
    a0, a1, a2, a3 = au_nodes
    rows, vals = [], []

    def fix(dofs_coefs, value):
        r = np.zeros(nd)
        for d, c in dofs_coefs:
            r[d] = c
        rows.append(r)
        vals.append(value)

    lift_rows = []
    for node, lift in ((a0, 1.0), (a2, 1.0), (a1, 0.0), (a3, 0.0)):
        for layer in (0, 1):
            p = layer * n + node
            if node == a0:
                lift_rows.append(len(rows))
            fix([(3 * p + 2, 1.0)], (geo.rest[p, 2], lift))
    for ax in (0, 1):
        fix([(3 * a1 + ax, 0.5), (3 * (n + a1) + ax, 0.5)], (0.5 * (geo.rest[a1, ax] + geo.rest[n + a1, ax]), 0.0))
    chord = geo.rest[a3, :2] - geo.rest[a1, :2]
    perp = np.array([-chord[1], chord[0]]) / np.linalg.norm(chord)
    fix([(3 * a3, 0.5 * perp[0]), (3 * a3 + 1, 0.5 * perp[1]),
         (3 * (n + a3), 0.5 * perp[0]), (3 * (n + a3) + 1, 0.5 * perp[1])],
        (float(perp @ geo.rest[a3, :2]), 0.0))
    C = np.array(rows)
    base = np.array([v[0] for v in vals])
    lift = np.array([v[1] for v in vals])
    m = np.ones(2 * n)
    colour = _colouring(n)
    x = geo.rest.copy()
    lam = np.zeros(len(rows))
    f = np.zeros_like(x)
    h = 1e-7 * geo.seg_length
    scale = geo.kb / geo.seg_length
    for k in range(1, steps + 1):
        b = base + lift * deflection * k / steps
        for it in range(max_iter):
            _forces(geo, x, _NO_THRUST, np.zeros(4), 0.0, m, 0.0, f)
            r1 = f.ravel() - C.T @ lam
            r2 = b - C @ x.ravel()
            if max(np.abs(r1).max() / scale, np.abs(r2).max() / geo.seg_length) < tol:
                break
            K = _stiffness(geo, x, _NO_THRUST, np.zeros(4), 0.0, m, 0.0, colour, h)
            A = np.block([[K, C.T], [C, np.zeros((len(rows), len(rows)))]])
            sol = np.linalg.solve(A, np.concatenate([r1, r2]))
            x = x + sol[:nd].reshape(x.shape)
            lam = lam + sol[nd:]
        else:
            raise SimulationError("out-of-plane static solve did not converge", float(k))
    reaction = -sum(lam[j] for j in lift_rows)
    return float(reaction / deflection)


def _au_nodes(n: int) -> tuple[int, ...]:
    return (0, n // 4, n // 2, 3 * n // 4)


@functools.lru_cache(maxsize=None)
def perp_constant(n: int, stretch_ratio: float, width_ratio: float, gj_ratio: float) -> float:
    """Nondimensional out-of-plane stiffness ``k_perp R^3 / EI`` of the ladder."""
    geo = ladder_geometry(n, 1.0, width_ratio, 1.0, gj_ratio, stretch_ratio)
    return out_of_plane_stiffness(geo, _au_nodes(n), KPERP_DEFLECTION, steps=1)


@functools.lru_cache(maxsize=None)
def calibrate_twist(n: int, stretch_ratio: float, width_ratio: float,
                    target: float = PERP_STIFFNESS_CONSTANT, rtol: float = 1e-3) -> float:
    """Torsional stiffness ratio ``GJ/EI`` giving ``k_perp = target * EI / R^3``."""
    def resid(lg):
        return math.log(perp_constant(n, stretch_ratio, width_ratio, 10.0**lg) / target)

    lo, hi = -3.0, 2.0
    if resid(lo) > 0 or resid(hi) < 0:
        raise ValueError(f"k_perp target {target} outside the ladder's reachable range")
    lg = optimize.brentq(resid, lo, hi, xtol=1e-4, rtol=rtol)
    return 10.0**lg


@dataclass(frozen=True)
class LadderModel:
    rod: RodModel
    geo: LadderGeometry
    mass: np.ndarray
    thrust_table: tuple
    gj_ratio: float
    pu_height: float
    colour: tuple

    @property
    def n(self) -> int:
        return self.geo.n


def build_ladder(rod: RodModel, gj_ratio: float | None = None, pu_height: float | None = None) -> LadderModel:
    """3D model sharing the planar model's stations, masses and attachments."""
    spec = rod.spec
    w = spec.strip_width
    if gj_ratio is None:
        gj_ratio = calibrate_twist(rod.n_nodes, rod.stretch_ratio, round(w / spec.radius, 12))
    geo = ladder_geometry(rod.n_nodes, spec.radius, w, rod.EI, gj_ratio * rod.EI, rod.stretch_ratio,
                          theta=rod.theta)
    mass = np.concatenate([0.5 * rod.node_mass, 0.5 * rod.node_mass])
    st, sw, sau = [], [], []
    for j, a in enumerate(rod.au):
        for node, wt in zip(a.nodes, a.weights):
            st.append(node)
            sw.append(wt)
            sau.append(j)
    table = (np.array(st, np.int64), np.array(sw, float), np.array(sau, np.int64))
    return LadderModel(rod=rod, geo=geo, mass=mass, thrust_table=table, gj_ratio=float(gj_ratio),
                       pu_height=float(w if pu_height is None else pu_height), colour=_colouring(rod.n_nodes))


class _HHT:
    """HHT-alpha stepping of ``M a = F(x, v, t)`` with modified Newton."""

    def __init__(self, lad: LadderModel, g: float, damping: float, yaw_ratio: float,
                 alpha: float = HHT_ALPHA, tol: float = 1e-7, max_iter: int = 40):
        self.lad = lad
        self.g = g
        self.c = damping
        self.yaw = yaw_ratio
        self.alpha = alpha
        self.gamma = 0.5 - alpha
        self.beta = 0.25 * (1.0 - alpha) ** 2
        self.m = lad.mass
        self.m3 = np.repeat(lad.mass, 3)
        # absolute floor from the weight, relative floor from round-off in the stiff springs
        geo = lad.geo
        self.ftol = max(tol * lad.mass.sum() * max(g, 1.0),
                        64 * np.finfo(float).eps * float(np.max(geo.spring_k * geo.spring_l0)))
        self.max_iter = max_iter
        self.lu = None
        self.lu_h = None
        self.fd_h = 1e-7 * lad.geo.seg_length
        self._f = np.zeros_like(lad.geo.rest)

    def force(self, x, v, thrust):
        f = self._f
        e = _forces(self.lad.geo, x, self.lad.thrust_table, thrust, self.yaw, self.m, self.g, f)
        damping_forces(x, v, self.m, self.c, f)
        return f.ravel().copy(), e

    def _factor(self, x, thrust, h):
        K = _stiffness(self.lad.geo, x, self.lad.thrust_table, thrust, self.yaw, self.m, self.g,
                       self.lad.colour, self.fd_h)
        a = self.alpha
        A = K * (1.0 + a)
        A[np.diag_indices_from(A)] += self.m3 / (self.beta * h * h) + (1.0 + a) * self.gamma / (self.beta * h) * self.c * self.m3
        self.lu = linalg.lu_factor(A, check_finite=False)
        self.lu_h = h

    def step(self, x, v, acc, f_old, thrust_new, h):
        a, b, gm = self.alpha, self.beta, self.gamma
        shape = x.shape
        xn, vn, an = x.ravel(), v.ravel(), acc.ravel()
        pred = xn + h * vn + h * h * (0.5 - b) * an
        xk = xn + h * vn + 0.5 * h * h * an
        if self.lu is None or self.lu_h != h:
            self._factor(x, thrust_new, h)
        prev = np.inf
        for it in range(self.max_iter):
            a_new = (xk - pred) / (b * h * h)
            v_new = vn + h * ((1 - gm) * an + gm * a_new)
            f_new, e = self.force(xk.reshape(shape), v_new.reshape(shape), thrust_new)
            res = self.m3 * a_new - (1 + a) * f_new + a * f_old
            rmax = np.abs(res).max()
            if rmax < self.ftol:
                return xk.reshape(shape), v_new.reshape(shape), a_new.reshape(shape), f_new, e, it
            if rmax > 0.25 * prev:
                # stale Jacobian: contraction too slow
                self._factor(xk.reshape(shape), thrust_new, h)
            prev = rmax
            xk = xk - linalg.lu_solve(self.lu, res, check_finite=False)
            if not np.isfinite(xk).all():
                break
        raise SimulationError("HHT Newton iteration did not converge", float("nan"))


def _advance(stepper: _HHT, x, v, acc, f, thrust, h, depth: int = 6):
    """One step of size ``h``, bisected when Newton fails (deterministic)."""
    try:
        return stepper.step(x, v, acc, f, thrust, h)
    except SimulationError:
        if depth == 0:
            raise
    x, v, acc, f, e, _ = _advance(stepper, x, v, acc, f, thrust, 0.5 * h, depth - 1)
    return _advance(stepper, x, v, acc, f, thrust, 0.5 * h, depth - 1)


def _lag(thrust, cmd, h, tau):
    return cmd + (thrust - cmd) * math.exp(-h / tau) if tau > 0 else np.array(cmd, float)


def hover_thrusts(model: RodModel, g: float) -> np.ndarray:
    """Per-unit thrusts summing to the weight with zero moment about the centre of mass.

    Minimum-norm correction of the equal split, from the rest geometry.
    """
    m = model.node_mass
    P = model.rest_positions
    c = m @ P / m.sum()
    arm = np.array([P[list(a.centre)].mean(axis=0) - c for a in model.au])
    A = np.vstack([np.ones(4), arm[:, 0], arm[:, 1]])
    b = np.array([m.sum() * g, 0.0, 0.0])
    t0 = np.full(4, m.sum() * g / 4)
    return t0 + np.linalg.lstsq(A, b - A @ t0, rcond=None)[0]


def settle_hover(lad: LadderModel, g: float, hover: np.ndarray, yaw_ratio: float = 0.0,
                 max_steps: int = 400, vtol: float = 1e-7) -> np.ndarray:
    """Hover shape by damped relaxation under constant hover thrust.

    Rigid-body velocity is removed after every step, so only the
    deformation relaxes and the ring neither drifts nor rotates.
    """
    spec = lad.rod.spec
    kp = PERP_STIFFNESS_CONSTANT * lad.rod.EI / spec.radius**3
    omega = math.sqrt(kp / (0.25 * spec.mass))
    c = 2.0 * omega
    h = 0.2 / omega
    stepper = _HHT(lad, g, c, yaw_ratio)
    x = lad.geo.rest.copy()
    v = np.zeros_like(x)
    f, _ = stepper.force(x, v, hover)
    acc = (f / stepper.m3).reshape(x.shape)
    for k in range(max_steps):
        x, v, acc, f, _, _ = _advance(stepper, x, v, acc, f, hover, h)
        v = v - rigid_velocity(x, v, lad.mass)
        acc = acc - (acc * lad.mass[:, None]).sum(axis=0) / lad.mass.sum()
        if k > 20 and np.abs(v).max() < vtol:
            break
    return x


def simulate_flight(model: RodModel, sc: FlightScenario, dt: float | None = None,
                    ladder: LadderModel | None = None) -> SimTrace:
    lad = ladder or build_ladder(model)
    spec = model.spec
    h_max = dt or RCFG["dt_agility"]
    every = max(1, int(math.ceil(sc.output_dt / h_max - 1e-9)))
    h = sc.output_dt / every
    n_out = int(round(sc.duration / sc.output_dt)) + 1
    g = sc.gravity
    hover = hover_thrusts(model, g)
    x = settle_hover(lad, g, hover, sc.yaw_torque_ratio) if sc.settle else lad.geo.rest.copy()
    v = np.zeros_like(x)
    cm = model.mass_damping if sc.damping is None else sc.damping
    stepper = _HHT(lad, g, cm, sc.yaw_torque_ratio)
    thrust = hover.copy()
    f, e = stepper.force(x, v, thrust)
    acc = (f / stepper.m3).reshape(x.shape)
    X = np.empty((n_out,) + x.shape)
    V = np.empty_like(X)
    TH = np.empty((n_out, 4))
    E = np.empty(n_out)
    X[0], V[0], TH[0], E[0] = x, v, thrust, e
    t = 0.0
    for k in range(1, n_out):
        for _ in range(every):
            cmd = np.asarray(sc.thrust_command(t), float)
            thrust = _lag(thrust, cmd, h, sc.tau)
            try:
                x, v, acc, f, e, _ = _advance(stepper, x, v, acc, f, thrust, h)
            except SimulationError as err:
                raise SimulationError(str(err).split(" at ")[0], t) from None
            t += h
        X[k], V[k], TH[k], E[k] = x, v, thrust, e
    time = np.arange(n_out) * sc.output_dt
    ch = flight_probes(lad, X, V, sc.output_dt)
    ch["thrust"] = TH
    ch["E_el"] = E
    ch["E_kin"] = 0.5 * np.einsum("i,tij->t", lad.mass, V**2)
    meta = {"kind": "flight", "dt": h, "steps_per_output": every, "n_nodes": model.n_nodes,
            "damping": cm, "gj_ratio": lad.gj_ratio, "tau": sc.tau, **sc.meta}
    return SimTrace(time, ch, meta, positions=X, velocities=V)


@njit(cache=True)
def _min_station_gap(P, skip):
    """Smallest distance between stations more than ``skip`` apart along the ring."""
    T, n = P.shape[0], P.shape[1]
    out = np.empty(T)
    for t in range(T):
        best = np.inf
        for i in range(n):
            for j in range(i + skip + 1, n):
                if n - (j - i) <= skip:
                    continue
                d = 0.0
                for k in range(3):
                    d += (P[t, i, k] - P[t, j, k]) ** 2
                if d < best:
                    best = d
        out[t] = math.sqrt(best)
    return out


def _unit(a, axis=-1):
    nrm = np.linalg.norm(a, axis=axis, keepdims=True)
    if np.any(nrm == 0):
        raise ValueError("degenerate frame: zero-length director")
    return a / nrm


def body_frames(P: np.ndarray, D: np.ndarray, front: list, rear: list) -> np.ndarray:
    """Rotation matrices (columns X, Y, Z) from station midpoints.

    Z is the best-fit plane normal oriented with the mean rung direction;
    X points from the control unit to the foremost strip, projected into
    the plane; Y completes a right-handed frame.
    """
    c = P.mean(axis=1, keepdims=True)
    _, _, vt = np.linalg.svd(P - c, full_matrices=False)
    Z = vt[:, 2, :]
    flip = np.einsum("tk,tk->t", Z, D.mean(axis=1)) < 0
    Z[flip] *= -1
    Xv = P[:, front].mean(axis=1) - P[:, rear].mean(axis=1)
    Xv -= np.einsum("tk,tk->t", Xv, Z)[:, None] * Z
    Xv = _unit(Xv)
    Y = np.cross(Z, Xv)
    return np.stack([Xv, Y, Z], axis=2)


def euler_zyx(Rm: np.ndarray) -> np.ndarray:
    """(roll, pitch, yaw) with ``R = Rz(yaw) Ry(pitch) Rx(roll)``; angles unwrapped."""
    roll = np.arctan2(Rm[:, 2, 1], Rm[:, 2, 2])
    pitch = -np.arcsin(np.clip(Rm[:, 2, 0], -1.0, 1.0))
    yaw = np.arctan2(Rm[:, 1, 0], Rm[:, 0, 0])
    return np.unwrap(np.column_stack([roll, pitch, yaw]), axis=0)


def flight_probes(lad: LadderModel, X: np.ndarray, V: np.ndarray, dt: float) -> dict:
    from .planar_driver import interval_acceleration

    n = lad.n
    rod = lad.rod
    P = 0.5 * (X[:, :n] + X[:, n:])
    Pv = 0.5 * (V[:, :n] + V[:, n:])
    D = _unit(X[:, :n] - X[:, n:])
    m = lad.mass
    M = m.sum()
    com = np.einsum("i,tij->tj", m, X) / M
    vcom = np.einsum("i,tij->tj", m, V) / M
    cu = rod.cu
    wcu = np.asarray(cu.weights) / np.sum(cu.weights)
    v_cu = np.tensordot(wcu, Pv[:, list(cu.nodes)], axes=(0, 1))
    au_c = [a.centre[0] for a in rod.au]
    d_au = D[:, au_c]
    d_cu = _unit(D[:, list(cu.centre)].mean(axis=1))
    pu = P[:, au_c] + lad.pu_height * d_au
    dist = np.stack([np.linalg.norm(pu[:, i] - pu[:, j], axis=1) for i, j in AU_PAIRS], axis=1)
    Rm = body_frames(P, D, list(rod.front_nodes), list(cu.centre))
    Z = Rm[:, :, 2]
    alpha_au = np.arccos(np.clip(np.einsum("tjk,tk->tj", d_au, Z), -1.0, 1.0))
    alpha_cu = np.arccos(np.clip(np.einsum("tk,tk->t", d_cu, Z), -1.0, 1.0))
    centroid = P.mean(axis=1)
    dz = np.einsum("tjk,tk->tj", P[:, au_c] - centroid[:, None, :], Z)
    turning = np.stack([rail_turning(x, lad.geo.hinges) for x in X])
    curvature = turning / lad.geo.seg_length
    skip = max(2, int(math.ceil(1.5 * n / 20)))
    return {
        "com": com,
        "v_com": vcom,
        "a_com": interval_acceleration(vcom, dt),
        "v_CU": v_cu,
        "a_CU": interval_acceleration(v_cu, dt),
        "pu": pu,
        "pu_dist": dist,
        "director_AU": d_au,
        "director_CU": d_cu,
        "alpha_AU": alpha_au,
        "alpha_CU": alpha_cu,
        "delta_z_AU": dz,
        "euler": euler_zyx(Rm),
        "frame_det": np.linalg.det(Rm),
        "curvature_max": curvature.max(axis=1),
        "curvature_min": curvature.min(axis=1),
        "self_gap_min": _min_station_gap(P, skip),
    }
