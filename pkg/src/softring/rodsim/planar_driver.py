"""Set-up and post-processing around the planar integration kernel."""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .model import RodModel
from .planar import CAPSULE, HALF_PLANE, run_planar
from .scenario import Capsule, HalfPlane, PlanarScenario
from .trace import SimTrace, SimulationError

STABILITY_SAFETY = 0.5
AU_PAIRS = tuple(combinations(range(4), 2))


def _obstacle_array(obstacles) -> np.ndarray:
    rows = []
    for o in obstacles:
        if isinstance(o, HalfPlane):
            n = np.asarray(o.normal, float)
            n = n / np.linalg.norm(n)
            rows.append([HALF_PLANE, o.point[0], o.point[1], n[0], n[1], 0.0])
        elif isinstance(o, Capsule):
            rows.append([CAPSULE, o.a[0], o.a[1], o.b[0], o.b[1], o.radius])
        else:
            raise TypeError(f"unknown obstacle {o!r}")
    return np.array(rows, dtype=float).reshape(-1, 6)


def contact_arrays(model: RodModel, self_contact: bool = True):
    """Per-node contact radius/stiffness/damping and the self-contact pair table."""
    m = model.node_mass
    rc = model.node_contact_radius()
    kc = model.node_contact_stiffness()
    zeta = model.contact.damping_ratio
    cc = 2.0 * zeta * np.sqrt(kc * m)
    pairs, pk, pc, pd = [], [], [], []
    if self_contact:
        p = model.rest_positions
        for i in range(model.n_nodes):
            for j in range(i + 1, model.n_nodes):
                d = rc[i] + rc[j]
                if np.linalg.norm(p[i] - p[j]) < 1.5 * d:
                    continue
                k = math.sqrt(kc[i] * kc[j])
                mr = m[i] * m[j] / (m[i] + m[j])
                pairs.append((i, j))
                pk.append(k)
                pc.append(2.0 * zeta * math.sqrt(k * mr))
                pd.append(d)
    return (rc, kc, cc, np.array(pairs, dtype=np.int64).reshape(-1, 2), np.array(pk, float),
            np.array(pc, float), np.array(pd, float))


def stable_dt(model: RodModel, kc=None) -> float:
    """Step below the central-difference bound ``2 / omega_max``.

    ``omega_max^2`` is bounded per node by the row sum of the stiffness
    (stretch, bending and contact) over the node mass.
    With hinge damping ``beta`` the bound shrinks to
    ``2 / omega (sqrt(1 + zeta^2) - zeta)``, ``zeta = beta * omega_bend / 2``.
    """
    kc = model.node_contact_stiffness() if kc is None else kc
    l = model.seg_length
    k_bend = 16.0 * model.EI / l**3
    k_row = 4.0 * model.stretch_stiffness + k_bend + 2.0 * kc
    w = math.sqrt(np.max(k_row / model.node_mass))
    zeta = 0.5 * model.stiffness_damping * math.sqrt(np.max(k_bend / model.node_mass))
    return STABILITY_SAFETY * 2.0 / w * (math.sqrt(1.0 + zeta**2) - zeta)


def _steps(output_dt: float, dt_max: float, dt: float | None):
    dt = min(dt_max, dt) if dt else dt_max
    every = max(1, int(math.ceil(output_dt / dt - 1e-9)))
    return output_dt / every, every


def simulate_planar(model: RodModel, sc: PlanarScenario, dt: float | None = None) -> SimTrace:
    rc, kc, cc, pairs, pk, pc, pd = contact_arrays(model, sc.self_contact)
    h, every = _steps(sc.output_dt, stable_dt(model, kc), dt)
    n_out = int(round(sc.duration / sc.output_dt)) + 1
    x0 = model.rest_positions.copy()
    if sc.displacement is not None:
        x0 = x0 + np.asarray(sc.displacement, float)
    v0 = np.tile(np.asarray(sc.initial_velocity, float), (model.n_nodes, 1))
    if sc.initial_spin:
        c = np.average(x0, axis=0, weights=model.node_mass)
        r = x0 - c
        v0 += sc.initial_spin * np.column_stack([-r[:, 1], r[:, 0]])
    cm = model.mass_damping if sc.damping is None else sc.damping
    obst = _obstacle_array(sc.obstacles)
    l = model.seg_length
    X, V, W, E, done = run_planar(
        x0, v0, model.node_mass, model.stretch_stiffness, l, model.EI / l, 2 * math.pi / model.n_nodes,
        model.stiffness_damping * model.EI / l, cm, float(sc.gravity[0]), float(sc.gravity[1]), rc, kc, cc, obst, model.contact.friction,
        model.contact.slip_velocity, pairs, pk, pc, pd, h, n_out, every,
    )
    if done < n_out:
        raise SimulationError("non-finite state", done * sc.output_dt)
    time = np.arange(n_out) * sc.output_dt
    ch = planar_probes(model, X, V, sc.output_dt)
    ch["F_wall"] = W
    ch["E_kin"], ch["E_el"], ch["E_pen"] = E[:, 0], E[:, 1], E[:, 2]
    m = model.node_mass
    ch["p"] = np.einsum("i,tij->tj", m, V)
    ch["L"] = np.einsum("i,ti->t", m, X[:, :, 0] * V[:, :, 1] - X[:, :, 1] * V[:, :, 0])
    meta = {"kind": "planar", "dt": h, "steps_per_output": every, "n_nodes": model.n_nodes,
            "damping": cm, "stiffness_damping": model.stiffness_damping, "self_contact": sc.self_contact}
    return SimTrace(time, ch, meta, positions=X, velocities=V)


def _lump(att, arr):
    w = np.asarray(att.weights)
    return np.tensordot(w / w.sum(), arr[:, list(att.nodes)], axes=(0, 1))


def _centre(att, arr):
    return arr[:, list(att.centre)].mean(axis=1)


def interval_acceleration(v, dt):
    """Interval-average acceleration from sampled velocity (first sample repeated)."""
    a = np.empty_like(v)
    a[1:] = np.diff(v, axis=0) / dt
    a[0] = a[1] if len(v) > 1 else 0.0
    return a


def planar_probes(model: RodModel, X, V, dt) -> dict:
    cu = model.cu
    front = X[:, list(model.front_nodes)].mean(axis=1)
    rear = _centre(cu, X)
    ch = {
        "a_CU": interval_acceleration(_lump(cu, V), dt),
        "v_CU": _lump(cu, V),
        "a_AU": np.stack([interval_acceleration(_lump(a, V), dt) for a in model.au], axis=1),
        "delta_R": 1.0 - np.linalg.norm(front - rear, axis=1) / (2.0 * model.radius),
    }
    au = np.stack([_centre(a, X) for a in model.au], axis=1)
    ch["pu_dist"] = np.stack([np.linalg.norm(au[:, i] - au[:, j], axis=1) for i, j in AU_PAIRS], axis=1)
    ch["x_CU"] = rear
    return ch
