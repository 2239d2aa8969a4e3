"""Flexible-ring simulator: planar collisions, 3D free flight, static squeeze."""

from .model import Attachment, ContactParams, Layout, RodModel, build_ring
from .scenario import Capsule, FlightScenario, HalfPlane, PlanarScenario
from .static import StaticConvergenceError, StaticCurve, ring_stiffness, static_squeeze
from .trace import SimTrace, SimulationError


def simulate(model: RodModel, scenario, dt: float | None = None) -> SimTrace:
    """Run a scenario; ``dt`` caps the internal step (the stability bound still applies)."""
    if isinstance(scenario, PlanarScenario):
        from .planar_driver import simulate_planar
        return simulate_planar(model, scenario, dt)
    if isinstance(scenario, FlightScenario):
        from .ladder_driver import simulate_flight
        return simulate_flight(model, scenario, dt)
    raise TypeError(f"unsupported scenario {type(scenario).__name__}")


__all__ = [
    "Attachment", "Capsule", "ContactParams", "FlightScenario", "HalfPlane", "Layout",
    "PlanarScenario", "RodModel", "SimTrace", "SimulationError", "StaticConvergenceError",
    "StaticCurve", "build_ring", "ring_stiffness", "simulate", "static_squeeze",
]
