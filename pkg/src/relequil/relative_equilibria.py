"""Circular-orbit relative equilibria with antiparallel axes normal to the orbit plane."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_model import BLOCK, BLOCK_NAMES, InvariantCoords, StateVector, SystemParams, characteristic_scales
from .errors import NoCircularOrbit, NonPositiveRadius
from .magnet_potential import PotentialModel
from .poisson_dynamics import generator_field, hamiltonian_vector_field

E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class RelativeEquilibrium:
    state: StateVector
    omega: float
    p0: float
    r0: float
    period: float


@dataclass(frozen=True)
class EquilibriumCheck:
    ok: bool
    residual: float
    block_residuals: dict[str, float]


def build_equilibrium_point(r0: float, p0: float, m3: float, n3: float) -> StateVector:
    """x = r0 e1, p = p0 e2, mu = e3, nu = -e3, m = m3 e3, n = n3 e3."""
    if not r0 > 0:
        raise NonPositiveRadius(f"r0 must be positive, got {r0!r}")
    return StateVector.from_blocks(
        [r0, 0.0, 0.0], [0.0, p0, 0.0], E3, [0.0, 0.0, m3], -E3, [0.0, 0.0, n3]
    )


def equilibrium_coords(r0: float) -> InvariantCoords:
    return InvariantCoords(r=r0, e=np.array([1.0, 0.0, 0.0]), c1=0.0, c2=0.0, c3=-1.0)


def solve_force_balance(r0: float, params: SystemParams, potential: PotentialModel) -> tuple[float, float]:
    """Momentum and angular velocity of the circular orbit of radius ``r0``.

    Centripetal balance p0 ω = ∂U/∂r with p0 = M ω r0.
    """
    if not r0 > 0:
        raise NonPositiveRadius(f"r0 must be positive, got {r0!r}")
    dU_dr = float(potential.gradient(equilibrium_coords(r0))[0])
    if not dU_dr > 0:
        raise NoCircularOrbit(f"dU/dr = {dU_dr!r} at r0={r0!r}: no net attraction, no circular orbit")
    p0 = math.sqrt(params.reduced_mass * r0 * dU_dr)
    return p0, p0 / (params.reduced_mass * r0)


def make_relative_equilibrium(
    r0: float, m3: float, n3: float, params: SystemParams, potential: PotentialModel
) -> RelativeEquilibrium:
    p0, omega = solve_force_balance(r0, params, potential)
    return RelativeEquilibrium(
        state=build_equilibrium_point(r0, p0, m3, n3), omega=omega, p0=p0, r0=r0, period=2 * math.pi / omega
    )


def verify_relative_equilibrium(
    re: RelativeEquilibrium, params: SystemParams, potential: PotentialModel, tol: float = 1e-9
) -> EquilibriumCheck:
    """Compare the Hamiltonian vector field with the rotation generator at one point.

    Each block residual is measured in block scales and divided by the
    largest scaled rate present, so the test is unit-free.
    """
    xh = hamiltonian_vector_field(re.state, params, potential)
    wp = generator_field(re.omega * E3, re.state)
    s = characteristic_scales(re.state)
    rate = max(abs(re.omega), float(np.max(np.abs(xh / s)))) or 1.0
    diff = (xh - wp) / s / rate
    blocks = {name: float(np.linalg.norm(diff[BLOCK[name]])) for name in BLOCK_NAMES}
    residual = max(blocks.values())
    return EquilibriumCheck(ok=residual < tol, residual=residual, block_residuals=blocks)
