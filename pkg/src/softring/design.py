"""Sizing of a ring-frame quadrotor from a (mass, stiffness, TWR) design point.

Propulsion scaling laws take the per-unit maximum thrust in kgf (the unit the
fitted coefficients were regressed in); the public interface accepts newtons.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import G
from .config import DEFAULTS

STIFFNESS_CONSTANT = DEFAULTS["sizing"]["stiffness_constant"]
PERP_STIFFNESS_CONSTANT = DEFAULTS["sizing"]["perp_stiffness_constant"]
# AU centres sit 1.5 propeller diameters apart along the square's side
RADIUS_PER_PROP = 1.5 / math.sqrt(2.0)
INSECT_LOAD_FRACTION = 0.7

GRID_MASSES = (0.020, 0.028, 0.039, 0.054, 0.076, 0.106, 0.148, 0.207,
               0.289, 0.404, 0.565, 0.789, 1.10, 1.54, 2.15, 3.00)
GRID_K_N_PER_MM = (0.006, 0.011, 0.022, 0.042, 0.080, 0.153, 0.293, 0.560,
                   1.07, 2.08, 3.92, 7.49, 14.3, 27.4, 52.3, 100.0)

PROTOTYPE_MASS = 0.405
PROTOTYPE_K = 100.0  # N/m
SOFT_PROTOTYPE_K = 10.0
PROTOTYPE_PROP_DIAMETER = 4 * 0.0254
RIGID_K = 1e5


class InfeasibleDesign(ValueError):
    """Fixed component masses exceed the take-off mass."""


@dataclass(frozen=True)
class DesignPoint:
    """Design-space coordinate. ``stiffness`` is in N/m."""

    mass: float
    stiffness: float
    twr: float = 4.0

    def __post_init__(self):
        if not 0.02 - 1e-12 <= self.mass <= 3.0 + 1e-12:
            raise ValueError(f"mass {self.mass} kg outside [0.02, 3]")
        if not 6.0 - 1e-9 <= self.stiffness <= 1e5 + 1e-6:
            raise ValueError(f"stiffness {self.stiffness} N/m outside [6, 1e5]")
        if not 1.0 <= self.twr <= 8.0 + 1e-12:
            raise ValueError(f"twr {self.twr} outside [1, 8]")

    @classmethod
    def from_grid_units(cls, mass_kg: float, k_n_per_mm: float, twr: float = 4.0) -> "DesignPoint":
        return cls(mass_kg, k_n_per_mm * 1e3, twr)

    @property
    def stiffness_n_per_mm(self) -> float:
        return self.stiffness * 1e-3


@dataclass(frozen=True)
class MaterialSpec:
    flexural_modulus: float = DEFAULTS["material"]["flexural_modulus_pa"]
    ultimate_strength: float = DEFAULTS["material"]["ultimate_strength_pa"]
    density: float = DEFAULTS["material"]["density_kg_m3"]
    safety_factor: float = DEFAULTS["material"]["safety_factor"]
    name: str = DEFAULTS["material"]["name"]

    def __post_init__(self):
        if min(self.flexural_modulus, self.ultimate_strength, self.density) <= 0:
            raise ValueError("material constants must be positive")
        if self.safety_factor < 1:
            raise ValueError("safety factor must be >= 1")

    @property
    def allowable_stress(self) -> float:
        return self.ultimate_strength / self.safety_factor

    @classmethod
    def from_config(cls, cfg: dict) -> "MaterialSpec":
        m = cfg["material"]
        return cls(m["flexural_modulus_pa"], m["ultimate_strength_pa"], m["density_kg_m3"],
                   m["safety_factor"], m.get("name", "custom"))


@dataclass(frozen=True)
class PUScaling:
    motor_mass: float
    prop_diameter: float
    prop_mass: float
    prop_inertia: float


@dataclass(frozen=True)
class MassBudget:
    """Per-unit masses for motors, propellers and batteries (four of each)."""

    motor: float
    propeller: float
    battery: float
    control_unit: float
    strips: float

    @property
    def total(self) -> float:
        return 4 * (self.motor + self.propeller + self.battery) + self.control_unit + self.strips

    @property
    def actuation_unit(self) -> float:
        return self.motor + self.propeller + self.battery


@dataclass(frozen=True)
class DroneSpec:
    radius: float
    strip_width: float
    strip_thickness: float
    prop_diameter: float
    EI: float
    masses: MassBudget
    inertia: tuple[float, float, float]
    prop_inertia: float
    material: MaterialSpec
    design_point: DesignPoint
    stiffness_constant: float = STIFFNESS_CONSTANT

    @property
    def mass(self) -> float:
        return self.design_point.mass

    @property
    def stiffness(self) -> float:
        return self.design_point.stiffness

    @property
    def thrust_per_unit(self) -> float:
        return self.design_point.twr * self.mass * G / 4.0

    @property
    def axis_distance(self) -> float:
        """Distance between neighbouring propeller axes."""
        return math.sqrt(2.0) * self.radius

    @property
    def nominal_width(self) -> float:
        """Lateral span including the propeller discs."""
        return math.sqrt(2.0) * self.radius + self.prop_diameter

    def to_dict(self) -> dict:
        d = asdict(self)
        d["masses"]["total"] = self.masses.total
        d["derived"] = {"nominal_width": self.nominal_width, "thrust_per_unit": self.thrust_per_unit}
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=kw.pop("indent", 2), **kw)


def pu_scaling(thrust_max: float) -> PUScaling:
    """Propulsion-unit masses and size from the maximum thrust of one unit (N)."""
    if not thrust_max > 0:
        raise ValueError("thrust must be positive")
    t_kgf = thrust_max / G
    if not 0.01 <= t_kgf <= 6.0:
        warnings.warn(f"thrust {t_kgf:.3g} kgf outside the fitted 0.01-6 kgf range", stacklevel=2)
    d_p = 0.12 * t_kgf**0.40
    return PUScaling(
        motor_mass=0.024 * t_kgf**0.81,
        prop_diameter=d_p,
        prop_mass=0.53 * d_p**2.38,
        prop_inertia=0.023 * d_p**4.33,
    )


def ei_from_stiffness(k: float, radius: float, stiffness_constant: float = STIFFNESS_CONSTANT) -> float:
    return k * radius**3 / stiffness_constant


def stiffness_from_ei(EI: float, radius: float, stiffness_constant: float = STIFFNESS_CONSTANT) -> float:
    return stiffness_constant * EI / radius**3


def strip_thickness(k: float, radius: float, modulus: float,
                    stiffness_constant: float = STIFFNESS_CONSTANT) -> float:
    """Thickness of a strip of width R/2 giving ring stiffness ``k``."""
    return 2.0 * (3.0 * k * radius**2 / (modulus * stiffness_constant)) ** (1.0 / 3.0)


def lumped_inertia(mass: float, control_unit: float, radius: float) -> tuple[float, float, float]:
    """Principal inertias of the ring layout (x forward, CU on the rear strip).

    Ring strips and AUs (at +-45 deg, +-135 deg) share the same radius so they
    lump into a mass ``mass - control_unit`` spread symmetrically on the circle.
    """
    j11 = 0.5 * (mass - control_unit) * radius**2
    j22 = j11 + control_unit * radius**2
    return j11, j22, j11 + j22


def size_drone(
    dp: DesignPoint,
    mat: MaterialSpec | None = None,
    *,
    prop_diameter: float | None = None,
    stiffness_constant: float = STIFFNESS_CONSTANT,
    control_unit_fraction: float = DEFAULTS["sizing"]["control_unit_fraction"],
) -> DroneSpec:
    """Fully sized drone for a design point.

    Parameters
    ----------
    prop_diameter
        Overrides the scaling-law propeller diameter (used for built prototypes).

    Raises
    ------
    InfeasibleDesign
        When motors, propellers, strips and control unit leave no battery mass.
    """
    mat = mat or MaterialSpec()
    pu = pu_scaling(dp.twr * dp.mass * G / 4.0)
    d_p = pu.prop_diameter if prop_diameter is None else float(prop_diameter)
    prop_mass = 0.53 * d_p**2.38
    prop_inertia = 0.023 * d_p**4.33
    radius = RADIUS_PER_PROP * d_p
    width = 0.5 * radius
    thickness = strip_thickness(dp.stiffness, radius, mat.flexural_modulus, stiffness_constant)
    EI = ei_from_stiffness(dp.stiffness, radius, stiffness_constant)
    strips = 2.0 * math.pi * radius * width * thickness * mat.density
    cu = control_unit_fraction * dp.mass
    battery = (dp.mass - 4 * (pu.motor_mass + prop_mass) - strips - cu) / 4.0
    if battery < 0.0:
        raise InfeasibleDesign(
            f"M={dp.mass} kg, k={dp.stiffness} N/m, twr={dp.twr}: fixed masses exceed take-off mass"
        )
    masses = MassBudget(pu.motor_mass, prop_mass, battery, cu, strips)
    return DroneSpec(
        radius=radius, strip_width=width, strip_thickness=thickness, prop_diameter=d_p, EI=EI,
        masses=masses, inertia=lumped_inertia(dp.mass, cu, radius), prop_inertia=prop_inertia,
        material=mat, design_point=dp, stiffness_constant=stiffness_constant,
    )


def with_stiffness(spec: DroneSpec, k: float) -> DroneSpec:
    """Same airframe geometry and propulsion with a different ring stiffness."""
    dp = replace(spec.design_point, stiffness=k)
    return size_drone(dp, spec.material, prop_diameter=spec.prop_diameter,
                      stiffness_constant=spec.stiffness_constant,
                      control_unit_fraction=spec.masses.control_unit / spec.mass)


def prototype_spec(mat: MaterialSpec | None = None, twr: float = 4.0, **kw) -> DroneSpec:
    """Built prototype: 0.405 kg, 0.1 N/mm, 4-inch propellers."""
    return size_drone(DesignPoint(PROTOTYPE_MASS, PROTOTYPE_K, twr), mat,
                      prop_diameter=PROTOTYPE_PROP_DIAMETER, **kw)


def soft_prototype_spec(mat: MaterialSpec | None = None, twr: float = 4.0, **kw) -> DroneSpec:
    """Softer twin of the prototype at 0.01 N/mm."""
    return size_drone(DesignPoint(PROTOTYPE_MASS, SOFT_PROTOTYPE_K, twr), mat,
                      prop_diameter=PROTOTYPE_PROP_DIAMETER, **kw)


def inertia_powerlaw(mass: float, twr: float = 4.0) -> tuple[float, float, float]:
    """Fitted principal inertias (kg m^2) at TWR 4."""
    if twr != 4.0:
        warnings.warn("inertia power laws were fitted at TWR 4", stacklevel=2)
    return 9.24e-3 * mass**1.77, 1.01e-2 * mass**1.71, 1.86e-2 * mass**1.74


def radius_powerlaw(mass: float) -> float:
    return 0.121 * mass**0.376


def kperp(spec: DroneSpec, perp_constant: float = PERP_STIFFNESS_CONSTANT) -> tuple[float, float]:
    """Out-of-plane stiffness (N/m) and its ratio to the in-plane stiffness."""
    k_perp = perp_constant * spec.EI / spec.radius**3
    return k_perp, k_perp / stiffness_from_ei(spec.EI, spec.radius, spec.stiffness_constant)


def flyer_k(EI: float, length: float) -> float:
    """Linearised cantilever stiffness ``3 EI / L^3``."""
    if EI <= 0 or length <= 0:
        raise ValueError("EI and length must be positive")
    return 3.0 * EI / length**3


def insect_wing_k(EI: float, wing_length: float) -> float:
    """Wing loaded at 70% of its length."""
    return flyer_k(EI, INSECT_LOAD_FRACTION * wing_length)


def standard_grid(twr: float = 4.0) -> list[DesignPoint]:
    """Full 16 x 16 product, mass-major order."""
    return [DesignPoint.from_grid_units(m, k, twr) for m in GRID_MASSES for k in GRID_K_N_PER_MM]


def loglog_grid(m_range, k_range, n_m: int, n_k: int, twr: float = 4.0) -> list[DesignPoint]:
    """Log-spaced grid; ranges in kg and N/mm."""
    ms = np.geomspace(*m_range, n_m)
    ks = np.geomspace(*k_range, n_k)
    return [DesignPoint.from_grid_units(float(m), float(k), twr) for m in ms for k in ks]
