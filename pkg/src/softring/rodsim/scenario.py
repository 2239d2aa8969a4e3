"""Scenario descriptions consumed by :func:`softring.rodsim.simulate`."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class HalfPlane:
    """Rigid wall; ``normal`` points into the free side."""

    point: tuple[float, float]
    normal: tuple[float, float]


@dataclass(frozen=True)
class Capsule:
    """Rigid segment ``a``-``b`` thickened by ``radius``."""

    a: tuple[float, float]
    b: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class PlanarScenario:
    """In-plane motion of the ring, optionally against rigid obstacles.

    ``displacement`` is an optional ``(N, 2)`` initial offset from the rest
    shape, used for free-vibration and energy audits.
    """

    duration: float
    initial_velocity: tuple[float, float] = (0.0, 0.0)
    initial_spin: float = 0.0
    obstacles: tuple = ()
    gravity: tuple[float, float] = (0.0, 0.0)
    self_contact: bool = True
    displacement: np.ndarray | None = None
    output_dt: float = 1e-5
    damping: float | None = None


@dataclass(frozen=True)
class FlightScenario:
    """Free flight of the 3D ring under follower thrust at the actuation units.

    ``thrust_command(t)`` returns the four commanded per-unit thrusts (N);
    the realised thrust follows it through a first-order lag ``tau``.
    Before ``t = 0`` the ring is settled in hover by damped relaxation.
    """

    duration: float
    thrust_command: Callable[[float], np.ndarray]
    tau: float
    gravity: float = 9.80665
    output_dt: float = 2e-4
    damping: float | None = None
    settle: bool = True
    yaw_torque_ratio: float = 0.0
    meta: dict = field(default_factory=dict)
