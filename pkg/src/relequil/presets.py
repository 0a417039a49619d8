"""Reference parameter set: two identical cylindrical magnets on a 1 cm orbit."""

from __future__ import annotations

from .core_model import SystemParams
from .magnet_potential import moment_to_charge

DIAMETER = 0.0025  # m
LENGTH = 0.02  # m
REDUCED_MASS = 3.828816e-4  # kg
ALPHA = 3.87228183489e7  # kg^-1 m^-2
MAGNETIC_MOMENT = 0.15546875  # A m^2
SPIN = 5e-5  # kg m^2 / s, both bodies
R0 = 0.01  # m

# published orbit data
P_ORB = 6.491e-4  # kg m / s
T_ORB = 0.037062129  # s


def reference_params() -> SystemParams:
    kappa = moment_to_charge(MAGNETIC_MOMENT, LENGTH)
    return SystemParams(
        reduced_mass=REDUCED_MASS,
        alpha=ALPHA,
        beta=ALPHA,
        l1=LENGTH / 2,
        l2=LENGTH / 2,
        kappa1=kappa,
        kappa2=kappa,
    )


def reference_spins() -> tuple[float, float]:
    return (SPIN, SPIN)
