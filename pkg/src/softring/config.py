"""Layered run configuration: built-in defaults, an optional JSON file, CLI overrides."""

from __future__ import annotations

import copy
import json
import os
from pathlib import Path
from typing import Any, Mapping

CONFIG_ENV = "SOFTRING_CONFIG"

DEFAULTS: dict[str, Any] = {
    "material": {
        "name": "FR-4",
        "flexural_modulus_pa": 24.0e9,
        "ultimate_strength_pa": 480.0e6,
        "density_kg_m3": 1850.0,
        "safety_factor": 1.5,
    },
    "sizing": {
        "stiffness_constant": 11.1,
        "perp_stiffness_constant": 24.7,
        "control_unit_fraction": 0.06,
        "twr": 4.0,
    },
    "squeeze": {"initial_curvature": "flat"},
    "rodsim": {
        "n_nodes": 80,
        "stretch_ratio": 150.0,
        "contact_stiffness_factor": 100.0,
        "contact_damping_ratio": 0.5,
        "component_contact_stiffness": 1.0e6,
        "friction": 0.02,
        "mass_damping": 0.5,
        "stiffness_damping": 0.0,
        "dt_collision": 2e-5,
        "dt_agility": 2e-4,
        "au_radius_fraction": 0.12,
        "cu_radius_fraction": 0.10,
    },
    "collision": {"filter_hz": 2000.0, "duration_s": 0.06},
    "agility": {
        "tau_schedule": [[0.1, 0.001], [0.5, 0.005], [1.5, 0.01], [None, 0.02]],
        "twr_values": [2, 3, 4, 5, 6, 7, 8],
        "dodge_angle_deg": 60.0,
        "yaw_torque_ratio_m": 0.0135,
    },
}


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    out = copy.deepcopy(dict(base))
    for key, val in override.items():
        if isinstance(val, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(path: str | os.PathLike | None = None, overrides: Mapping[str, Any] | None = None) -> dict[str, Any]:
    """Defaults, then the JSON file at ``path`` (or ``$SOFTRING_CONFIG``), then ``overrides``."""
    cfg = copy.deepcopy(DEFAULTS)
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        with open(Path(path)) as fh:
            cfg = deep_merge(cfg, json.load(fh))
    if overrides:
        cfg = deep_merge(cfg, overrides)
    return cfg


def tau_for_mass(mass: float, schedule=None) -> float:
    """Thrust lag time constant from a ``[[upper_mass_or_None, tau], ...]`` schedule."""
    schedule = schedule if schedule is not None else DEFAULTS["agility"]["tau_schedule"]
    for upper, tau in schedule:
        if upper is None or mass < upper:
            return float(tau)
    raise ValueError("tau schedule needs a final open-ended entry")
