"""Agility indices from free-flight simulations against rigid-twin limits."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from . import G
from .config import DEFAULTS, tau_for_mass
from .design import DesignPoint, DroneSpec, InfeasibleDesign, MaterialSpec, size_drone
from .elastica import full_squeeze_work
from .heatmap import ABSENT, Heatmap, run_ordered
from .rodsim import FlightScenario, Layout, RodModel, SimTrace, SimulationError, build_ring, simulate
from .rodsim.ladder_driver import build_ladder, hover_thrusts
from .statfit import Spectrum, asd

ACFG = DEFAULTS["agility"]
TWR_VALUES = tuple(ACFG["twr_values"])
TWR_REFERENCE = 8.0
DODGE_ANGLE = math.radians(ACFG["dodge_angle_deg"])
STEP_DURATION = 0.1
ASD_WINDOW = (0.05, 0.3)
AU_SIDE = {"roll": np.array([1.0, 1.0, -1.0, -1.0]), "pitch": np.array([-1.0, 1.0, 1.0, -1.0])}


class Constraint(str, enum.Enum):
    NONE = "None"
    PROPELLER_CONTACT = "PropellerContact"
    SELF_CONTACT = "SelfContact"
    COLLAPSE = "Collapse"


@dataclass(frozen=True)
class ManoeuvreResult:
    peak_accel: float
    constraint_hit: Constraint
    trace: SimTrace
    twr_used: float
    rigid_peak: float


@dataclass(frozen=True)
class AgilityIndices:
    agt_z: float
    agt_roll: float
    agt_pitch: float
    peaks: dict
    limits: tuple[float, float, float]

    def to_dict(self) -> dict:
        return {"agt_z": self.agt_z, "agt_roll": self.agt_roll, "agt_pitch": self.agt_pitch,
                "admissible_peaks": self.peaks, "rigid_limits": list(self.limits)}


def model_inertia(model: RodModel) -> tuple[np.ndarray, np.ndarray]:
    """(centre of mass, principal roll and pitch inertias) of the 3D model at rest."""
    lad = build_ladder(model, gj_ratio=1.0)
    X = lad.geo.rest
    m = lad.mass
    c = m @ X / m.sum()
    r = X - c
    jx = float(np.sum(m * (r[:, 1] ** 2 + r[:, 2] ** 2)))
    jy = float(np.sum(m * (r[:, 0] ** 2 + r[:, 2] ** 2)))
    return c, np.array([jx, jy])


def _au_positions(model: RodModel) -> np.ndarray:
    P = model.rest_positions
    return np.array([P[list(a.centre)].mean(axis=0) for a in model.au])


def rigid_twin_limits(spec: DroneSpec, twr: float, model: RodModel | None = None) -> tuple[float, float, float]:
    """Peak (vertical, roll, pitch) accelerations of the rigid twin.

    Two neighbouring units at full thrust ``twr M g / 4`` give the angular
    limits. Without ``model`` the lever arm is ``R/sqrt(2)`` and the
    inertias are the sized layout's; with ``model`` both come from its mass
    distribution about its centre of mass.
    """
    tmax = twr * spec.mass * G / 4.0
    z = (twr - 1.0) * G
    if model is None:
        arm = spec.radius / math.sqrt(2.0)
        j11, j22, _ = spec.inertia
        return z, 2.0 * tmax * arm / j11, 2.0 * tmax * arm / j22
    c, (jx, jy) = model_inertia(model)
    au = _au_positions(model)
    levers = {"roll": au[:, 1] - c[1], "pitch": -(au[:, 0] - c[0])}
    tq = {}
    for ax, lev in levers.items():
        side = AU_SIDE[ax]
        # the centre of mass is off the ring centre, so the stronger pair sets the limit
        tq[ax] = tmax * max(abs(lev[side > 0].sum()), abs(lev[side < 0].sum()))
    return z, tq["roll"] / jx, tq["pitch"] / jy


def collapse_energy(spec: DroneSpec) -> float:
    """Elastic energy (J) of a full diametric squeeze."""
    return 2.0 * full_squeeze_work() * spec.EI / spec.radius


def detect_constraint(trace: SimTrace, spec: DroneSpec, seg_length: float) -> Constraint:
    """First applicable bound: propeller contact, then collapse, then self-contact.

    Propeller contact is reported whenever two units come closer than one
    propeller diameter, even if the frame also collapses. The stress check
    uses the curvature change from the assembled ring, so the bending
    pre-stress of closing the strips into a ring is excluded.
    """
    if trace["pu_dist"].min() < spec.prop_diameter:
        return Constraint.PROPELLER_CONTACT
    e_full = collapse_energy(spec)
    mat = spec.material
    k0 = 1.0 / spec.radius
    kappa = np.maximum(np.abs(trace["curvature_max"] - k0), np.abs(trace["curvature_min"] - k0))
    stress = kappa * mat.flexural_modulus * spec.strip_thickness / 2.0
    if trace["E_el"].max() > e_full or stress.max() > mat.allowable_stress:
        return Constraint.COLLAPSE
    if trace["self_gap_min"].min() < seg_length:
        return Constraint.SELF_CONTACT
    return Constraint.NONE


def _flight(model: RodModel, command, duration: float, tau: float | None, dt: float | None,
            meta: dict) -> SimTrace:
    tau = tau_for_mass(model.spec.mass) if tau is None else tau
    sc = FlightScenario(duration=duration, thrust_command=command, tau=tau,
                        yaw_torque_ratio=ACFG["yaw_torque_ratio_m"], meta=meta)
    return simulate(model, sc, dt)


def vertical_step(spec: DroneSpec, twr: float, *, n_nodes: int = DEFAULTS["rodsim"]["n_nodes"],
                  layout: Layout | str = Layout.DISTRIBUTED, duration: float = STEP_DURATION,
                  tau: float | None = None, dt: float | None = None) -> ManoeuvreResult:
    """Full-throttle step from hover; peak vertical COM acceleration (m/s^2)."""
    model = build_ring(spec, layout, n_nodes)
    hover = hover_thrusts(model, G)
    cmd = twr * hover
    tr = _flight(model, lambda t: cmd, duration, tau, dt, meta={"manoeuvre": "vertical", "twr": twr})
    peak = float(tr["a_com"][:, 2].max())
    return ManoeuvreResult(peak, detect_constraint(tr, spec, model.seg_length), tr, float(twr),
                           (twr - 1.0) * G)


def dodge_phase_time(alpha: float, angle: float = DODGE_ANGLE) -> float:
    """Phase length ``T`` of the +a (T), -a (2T), +a (T) profile peaking at ``angle``."""
    if alpha <= 0:
        raise ValueError("angular acceleration must be positive")
    return math.sqrt(angle / alpha)


def dodge_profile(t: float, T: float) -> float:
    """Sign of the commanded torque at time ``t``; zero after the manoeuvre."""
    if t < 0 or t >= 4 * T:
        return 0.0
    return 1.0 if (t < T or t >= 3 * T) else -1.0


def angular_acceleration(trace: SimTrace) -> np.ndarray:
    """(roll, pitch) second derivatives of the body-frame Euler angles."""
    e = trace["euler"][:, :2]
    dt = trace.dt
    return np.gradient(np.gradient(e, dt, axis=0), dt, axis=0)


def dodge(spec: DroneSpec, twr: float, axis: str, *, n_nodes: int = DEFAULTS["rodsim"]["n_nodes"],
          amplitude: float = 1.0, tau: float | None = None, dt: float | None = None,
          tail: float = 0.02) -> ManoeuvreResult:
    """Three-phase roll or pitch dodge sized on the rigid twin to peak at 60 degrees.

    One pair of neighbouring units runs at ``amplitude`` times full thrust
    while the opposite pair is off, then the roles swap for the reversal.
    """
    if axis not in AU_SIDE:
        raise ValueError("axis must be 'roll' or 'pitch'")
    model = build_ring(spec, Layout.DISTRIBUTED, n_nodes)
    k = 1 if axis == "roll" else 2
    rigid = rigid_twin_limits(spec, twr, model)[k]
    T = dodge_phase_time(rigid)
    tmax = amplitude * twr * spec.mass * G / 4.0
    side = AU_SIDE[axis]
    hover = hover_thrusts(model, G)

    def cmd(t):
        s = dodge_profile(t, T)
        if s == 0.0 or amplitude == 0.0:
            return hover
        return tmax * (s * side > 0)

    tr = _flight(model, cmd, 4 * T + tail, tau, dt,
                 meta={"manoeuvre": f"dodge-{axis}", "twr": twr, "phase_time": T})
    acc = angular_acceleration(tr)[:, k - 1]
    during = tr.time <= 4 * T
    peak = float(np.abs(acc[during]).max())
    return ManoeuvreResult(peak, detect_constraint(tr, spec, model.seg_length), tr, float(twr),
                           rigid * amplitude)


def deflection_metrics(trace: SimTrace) -> tuple[np.ndarray, np.ndarray]:
    """(alpha_CU(t), alpha_AU(t)): director tilts from the body Z axis, AU mean over units."""
    return trace["alpha_CU"], trace["alpha_AU"].mean(axis=1)


def agt_indices(spec: DroneSpec, twr_values=TWR_VALUES, *, n_nodes: int = DEFAULTS["rodsim"]["n_nodes"],
                dt: float | None = None) -> AgilityIndices:
    """Admissible peaks over the TWR sweep, over rigid-twin limits at TWR 8.

    The vertical limit is ``7 g``; angular limits use the model's inertia.
    A TWR whose run hits a constraint contributes nothing.
    """
    model = build_ring(spec, Layout.DISTRIBUTED, n_nodes)
    limits = rigid_twin_limits(spec, TWR_REFERENCE, model)
    peaks = {"z": 0.0, "roll": 0.0, "pitch": 0.0}
    for twr in twr_values:
        runs = (("z", lambda: vertical_step(spec, twr, n_nodes=n_nodes, dt=dt)),
                ("roll", lambda: dodge(spec, twr, "roll", n_nodes=n_nodes, dt=dt)),
                ("pitch", lambda: dodge(spec, twr, "pitch", n_nodes=n_nodes, dt=dt)))
        for key, run in runs:
            try:
                r = run()
            except SimulationError:
                continue
            if r.constraint_hit is Constraint.NONE:
                peaks[key] = max(peaks[key], r.peak_accel)
    return AgilityIndices(peaks["z"] / limits[0], peaks["roll"] / limits[1], peaks["pitch"] / limits[2],
                          peaks, limits)


def _agt_point(dp: DesignPoint, mat: MaterialSpec, which: str, kw: dict):
    try:
        spec = size_drone(dp, mat)
        ind = agt_indices(spec, **kw)
    except (InfeasibleDesign, SimulationError):
        return None
    return getattr(ind, which)


def agt_heatmap(grid, which: str = "agt_z", mat: MaterialSpec | None = None, threads: int = 1, **kw) -> Heatmap:
    grid = list(grid)
    vals = run_ordered(functools.partial(_agt_point, mat=mat or MaterialSpec(), which=which, kw=kw), grid, threads)
    flags = [ABSENT if v is None else "ok" for v in vals]
    return Heatmap.from_results(which, grid, [np.nan if v is None else v for v in vals], flags)


@dataclass(frozen=True)
class LayoutComparison:
    peak_frequency: float
    asd_centralized: float
    asd_distributed: float
    alpha_au_ratio: float
    alpha_cu_ratio: float
    spectra: dict

    @property
    def asd_ratio(self) -> float:
        return self.asd_centralized / self.asd_distributed

    def to_dict(self) -> dict:
        return {"peak_frequency_hz": self.peak_frequency, "asd_centralized": self.asd_centralized,
                "asd_distributed": self.asd_distributed, "asd_ratio": self.asd_ratio,
                "alpha_AU_peak_ratio": self.alpha_au_ratio, "alpha_CU_peak_ratio": self.alpha_cu_ratio}


def post_transient_asd(trace: SimTrace, window=ASD_WINDOW) -> Spectrum:
    """ASD of the control unit's vertical acceleration inside ``window`` (s)."""
    sel = (trace.time >= window[0]) & (trace.time < window[1])
    if sel.sum() < 64:
        raise ValueError("trace too short for the analysis window")
    a = trace["a_CU"][sel, 2]
    return asd(a - a.mean(), trace.dt)


def layout_comparison(spec: DroneSpec, twr: float = 4.0, *, n_nodes: int = DEFAULTS["rodsim"]["n_nodes"],
                      band=(5.0, 200.0), dt: float | None = None) -> LayoutComparison:
    """Vertical step with distributed and centralized batteries.

    The dominant centralized peak inside ``band`` is compared with the
    distributed spectrum at the same frequency; deflection ratios are
    centralized over distributed peaks.
    """
    out = {}
    for layout in (Layout.CENTRALIZED, Layout.DISTRIBUTED):
        r = vertical_step(spec, twr, n_nodes=n_nodes, layout=layout, duration=ASD_WINDOW[1], dt=dt)
        out[layout] = (r, post_transient_asd(r.trace))
    spec_c, spec_d = out[Layout.CENTRALIZED][1], out[Layout.DISTRIBUTED][1]
    f, a_c = spec_c.peak(*band)
    a_cu_c, a_au_c = deflection_metrics(out[Layout.CENTRALIZED][0].trace)
    a_cu_d, a_au_d = deflection_metrics(out[Layout.DISTRIBUTED][0].trace)
    return LayoutComparison(
        peak_frequency=f, asd_centralized=a_c, asd_distributed=spec_d.at(f),
        alpha_au_ratio=float(a_au_c.max() / a_au_d.max()), alpha_cu_ratio=float(a_cu_c.max() / a_cu_d.max()),
        spectra={"centralized": spec_c, "distributed": spec_d},
    )
