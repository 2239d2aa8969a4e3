"""Discretised ring with lumped attachments.

Node ``i`` sits at angle ``pi/4 + 2 pi i / N`` measured from the forward
(+x) axis, so the four actuation units land on nodes ``0, N/4, N/2, 3N/4``
(at 45, 135, 225 and 315 degrees) and the control unit on the rear strip
midpoint at 180 degrees.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..config import DEFAULTS
from ..design import DroneSpec

RCFG = DEFAULTS["rodsim"]
AU_ANGLES = (0.25 * math.pi, 0.75 * math.pi, 1.25 * math.pi, 1.75 * math.pi)
CU_ANGLE = math.pi
NODE_OFFSET = 0.25 * math.pi


class Layout(str, enum.Enum):
    DISTRIBUTED = "distributed"
    CENTRALIZED = "centralized"


@dataclass(frozen=True)
class Attachment:
    """Rigid component lumped onto a span of ring nodes.

    ``centre`` lists the node(s) closest to the mounting angle; contact and
    kinematic probes use them. ``nodes`` and ``weights`` spread the mass.
    """

    kind: str
    name: str
    angle: float
    mass: float
    nodes: tuple[int, ...]
    weights: tuple[float, ...]
    centre: tuple[int, ...]
    contact_radius: float


@dataclass(frozen=True)
class ContactParams:
    stiffness_factor: float = RCFG["contact_stiffness_factor"]
    damping_ratio: float = RCFG["contact_damping_ratio"]
    friction: float = RCFG["friction"]
    component_stiffness: float | None = RCFG["component_contact_stiffness"]
    slip_velocity: float = 1e-3


@dataclass(frozen=True)
class RodModel:
    spec: DroneSpec
    layout: Layout
    n_nodes: int
    theta: np.ndarray
    rest_positions: np.ndarray
    seg_length: float
    EI: float
    stretch_stiffness: float
    strip_node_mass: float
    node_mass: np.ndarray
    attachments: tuple[Attachment, ...]
    mass_damping: float
    stiffness_damping: float
    contact: ContactParams
    stretch_ratio: float

    @property
    def radius(self) -> float:
        return self.spec.radius

    @property
    def total_mass(self) -> float:
        return float(self.node_mass.sum())

    @property
    def rest_turning(self) -> float:
        return 2.0 * math.pi / self.n_nodes

    def by_kind(self, kind: str) -> tuple[Attachment, ...]:
        return tuple(a for a in self.attachments if a.kind == kind)

    @property
    def au(self) -> tuple[Attachment, ...]:
        return self.by_kind("AU")

    @property
    def cu(self) -> Attachment:
        return self.by_kind("CU")[0]

    @property
    def front_nodes(self) -> tuple[int, ...]:
        return _centre_nodes(0.0, self.n_nodes)

    def node_contact_radius(self) -> np.ndarray:
        r = np.full(self.n_nodes, 0.5 * self.seg_length)
        for a in self.attachments:
            for i in a.centre:
                r[i] = max(r[i], a.contact_radius)
        return r

    def node_contact_stiffness(self) -> np.ndarray:
        c = self.contact
        base = c.stiffness_factor * self.spec.stiffness
        kc = np.full(self.n_nodes, base)
        if c.component_stiffness is not None:
            for a in self.attachments:
                for i in a.centre:
                    kc[i] = max(base, c.component_stiffness)
        return kc

    def with_damping(self, mass_damping: float | None = None,
                     stiffness_damping: float | None = None) -> "RodModel":
        from dataclasses import replace
        kw = {}
        if mass_damping is not None:
            kw["mass_damping"] = float(mass_damping)
        if stiffness_damping is not None:
            kw["stiffness_damping"] = float(stiffness_damping)
        return replace(self, **kw)

    def with_contact(self, **kw) -> "RodModel":
        from dataclasses import replace
        return replace(self, contact=replace(self.contact, **kw))


def node_angle(i, n_nodes: int):
    return NODE_OFFSET + 2.0 * np.pi * np.asarray(i) / n_nodes


def _continuous_index(angle: float, n_nodes: int) -> float:
    return ((angle - NODE_OFFSET) / (2 * math.pi) * n_nodes) % n_nodes


def _centre_nodes(angle: float, n_nodes: int) -> tuple[int, ...]:
    c = _continuous_index(angle, n_nodes)
    lo = math.floor(c + 1e-9)
    if abs(c - round(c)) < 1e-9:
        return (int(round(c)) % n_nodes,)
    return (lo % n_nodes, (lo + 1) % n_nodes)


def _span(angle: float, half_arc: float, radius: float, n_nodes: int) -> tuple[int, ...]:
    c = _continuous_index(angle, n_nodes)
    step = 2 * math.pi * radius / n_nodes
    reach = half_arc / step
    lo, hi = math.ceil(c - reach - 1e-9), math.floor(c + reach + 1e-9)
    nodes = tuple(int(i) % n_nodes for i in range(lo, hi + 1))
    return nodes or _centre_nodes(angle, n_nodes)


def _attachment(kind, name, angle, mass, contact_radius, spec, n):
    nodes = _span(angle, contact_radius, spec.radius, n)
    w = tuple(1.0 / len(nodes) for _ in nodes)
    return Attachment(kind, name, angle, mass, nodes, w, _centre_nodes(angle, n), contact_radius)


def build_ring(
    spec: DroneSpec,
    layout: Layout | str = Layout.DISTRIBUTED,
    n_nodes: int = RCFG["n_nodes"],
    *,
    stretch_ratio: float = RCFG["stretch_ratio"],
    mass_damping: float = RCFG["mass_damping"],
    stiffness_damping: float = RCFG["stiffness_damping"],
    contact: ContactParams | None = None,
    au_radius_fraction: float = RCFG["au_radius_fraction"],
    cu_radius_fraction: float = RCFG["cu_radius_fraction"],
) -> RodModel:
    """Discretise a sized drone into an ``n_nodes`` ring.

    ``stretch_ratio`` sets the segment axial stiffness to
    ``stretch_ratio * EI / l^3``: large enough for the inextensible limit,
    small enough to keep the explicit step affordable.
    """
    layout = Layout(layout)
    if n_nodes < 40 or n_nodes % 4:
        raise ValueError("n_nodes must be >= 40 and a multiple of 4")
    R = spec.radius
    theta = node_angle(np.arange(n_nodes), n_nodes)
    pos = R * np.column_stack([np.cos(theta), np.sin(theta)])
    l = 2.0 * R * math.sin(math.pi / n_nodes)
    b = spec.masses
    strip_node = b.strips / n_nodes
    r_au, r_cu = au_radius_fraction * R, cu_radius_fraction * R

    atts = []
    for j, ang in enumerate(AU_ANGLES):
        au_mass = b.motor + b.propeller + (b.battery if layout is Layout.DISTRIBUTED else 0.0)
        atts.append(_attachment("AU", f"AU{j + 1}", ang, au_mass, r_au, spec, n_nodes))
    atts.append(_attachment("CU", "CU", CU_ANGLE, b.control_unit, r_cu, spec, n_nodes))
    if layout is Layout.CENTRALIZED:
        # two batteries on the roll axis, front and rear strip midpoints
        for name, ang in (("BAT_front", 0.0), ("BAT_rear", math.pi)):
            atts.append(_attachment("BAT", name, ang, 2.0 * b.battery, r_cu, spec, n_nodes))

    m = np.full(n_nodes, strip_node)
    for a in atts:
        for i, w in zip(a.nodes, a.weights):
            m[i] += a.mass * w
    if abs(m.sum() - spec.mass) > 1e-9:
        raise ValueError("mass closure failed")
    return RodModel(
        spec=spec, layout=layout, n_nodes=n_nodes, theta=theta, rest_positions=pos, seg_length=l,
        EI=spec.EI, stretch_stiffness=stretch_ratio * spec.EI / l**3, strip_node_mass=strip_node,
        node_mass=m, attachments=tuple(atts), mass_damping=float(mass_damping),
        stiffness_damping=float(stiffness_damping),
        contact=contact or ContactParams(), stretch_ratio=float(stretch_ratio),
    )
