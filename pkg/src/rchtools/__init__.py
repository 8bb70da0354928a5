"""Simulation and verification of controlled Hamiltonian systems with symmetry."""

from .control import ControlLaw, matching_residual
from .errors import RCHError
from .integrate import IntegratorSpec, Method, Trajectory, integrate
from .poisson import SmoothFn, Space, bracket
from .scenario import ScenarioConfig, parse_scenario, run
from .systems import (
    FullState,
    ReducedState,
    Variant,
    heavy_top,
    heavy_top_rotors,
    rigid_body,
    rigid_body_full,
    rigid_body_rotors,
    rigid_body_torque,
)
from .verify import CheckReport, EquivalenceParams, Pairing, PortSpec

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "ControlLaw",
    "EquivalenceParams",
    "FullState",
    "IntegratorSpec",
    "Method",
    "Pairing",
    "PortSpec",
    "RCHError",
    "ReducedState",
    "ScenarioConfig",
    "SmoothFn",
    "Space",
    "Trajectory",
    "Variant",
    "bracket",
    "heavy_top",
    "heavy_top_rotors",
    "integrate",
    "matching_residual",
    "parse_scenario",
    "rigid_body",
    "rigid_body_full",
    "rigid_body_rotors",
    "rigid_body_torque",
    "run",
]
