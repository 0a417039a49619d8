"""Relative equilibria and orbital stability of two magnetically interacting symmetric tops."""

from .core_model import (
    CasimirValues,
    InvariantCoords,
    StateVector,
    SystemParams,
    casimirs,
    cylinder_inertia_alpha,
    hamiltonian,
    invariant_coords,
    kinetic_energy,
    momentum_map,
    rotate_state,
    rotation_z,
)
from .integrator import IntegratorConfig, TrajectoryRecord, integrate, orbit_distance_mod_rotation
from .magnet_potential import CylinderMagnetPotential, PotentialModel, ZeroPotential, moment_to_charge
from .relative_equilibria import (
    RelativeEquilibrium,
    build_equilibrium_point,
    make_relative_equilibrium,
    solve_force_balance,
    verify_relative_equilibrium,
)
from .stability import StabilityReport, certify_orbit

__version__ = "0.1.0"

__all__ = [
    "CasimirValues",
    "CylinderMagnetPotential",
    "IntegratorConfig",
    "InvariantCoords",
    "PotentialModel",
    "RelativeEquilibrium",
    "StabilityReport",
    "StateVector",
    "SystemParams",
    "TrajectoryRecord",
    "ZeroPotential",
    "build_equilibrium_point",
    "casimirs",
    "certify_orbit",
    "cylinder_inertia_alpha",
    "hamiltonian",
    "integrate",
    "invariant_coords",
    "kinetic_energy",
    "make_relative_equilibrium",
    "moment_to_charge",
    "momentum_map",
    "orbit_distance_mod_rotation",
    "rotate_state",
    "rotation_z",
    "solve_force_balance",
    "verify_relative_equilibrium",
]
