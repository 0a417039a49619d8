"""Pair potentials U(r, c1, c2, c3) with analytic first and second partials.

The cylinder model places fictitious poles of strength ±kappa at the two ends
of each magnet, so U is a signed sum of four Coulomb terms.  Derivatives
are taken by hand through the squared pole distances; finite differences only
appear in the tests.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from .core_model import InvariantCoords, SystemParams
from .errors import ChargeCoincidence, ConfigError, NonPositiveInput

MIN_RADICAND = 1e-20

# sign pairs (eps1, eps2) in the order ++, +-, -+, --
_EPS1 = np.array([1.0, 1.0, -1.0, -1.0])
_EPS2 = np.array([1.0, -1.0, 1.0, -1.0])
_SIGN = _EPS1 * _EPS2


class PotentialModel(ABC):
    """Interface for potentials depending only on the invariant coordinates.

    ``gradient`` and ``hessian`` are ordered as (r, c1, c2, c3).
    """

    name: str = ""

    @abstractmethod
    def value(self, coords: InvariantCoords) -> float: ...

    @abstractmethod
    def gradient(self, coords: InvariantCoords) -> np.ndarray: ...

    @abstractmethod
    def hessian(self, coords: InvariantCoords) -> np.ndarray: ...


class ZeroPotential(PotentialModel):
    """U ≡ 0, the free system."""

    name = "zero"

    def value(self, coords):
        return 0.0

    def gradient(self, coords):
        return np.zeros(4)

    def hessian(self, coords):
        return np.zeros((4, 4))


def _q(coords) -> tuple[float, float, float, float]:
    return coords.q if isinstance(coords, InvariantCoords) else tuple(coords)


def _radicands(q, params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    r, c1, c2, c3 = q
    l1, l2 = params.l1, params.l2
    cross = _EPS2 * l2 * c2 - _EPS1 * l1 * c1
    rad = r * r + l1 * l1 + l2 * l2 + 2 * r * cross - 2 * _SIGN * l1 * l2 * c3
    if np.any(rad < MIN_RADICAND):
        raise ChargeCoincidence(f"fictitious charges overlap (radicands {rad})")
    # dQ/d(r, c1, c2, c3), one row per coordinate
    dq = np.array([
        2 * r + 2 * cross,
        -2 * r * _EPS1 * l1,
        2 * r * _EPS2 * l2,
        -2 * _SIGN * l1 * l2,
    ])
    return rad, dq


def _prefactor(params: SystemParams) -> float:
    return params.mu0 * params.kappa1 * params.kappa2 / (4 * math.pi)


def charge_separation(eps1: int, eps2: int, coords, params: SystemParams) -> float:
    """Distance between pole ``eps1`` of magnet 1 and pole ``eps2`` of magnet 2."""
    if eps1 not in (1, -1) or eps2 not in (1, -1):
        raise ValueError("eps1 and eps2 must be +1 or -1")
    r, c1, c2, c3 = _q(coords)
    l1, l2 = params.l1, params.l2
    rad = r * r + l1 * l1 + l2 * l2 + 2 * r * (eps2 * l2 * c2 - eps1 * l1 * c1) - 2 * eps1 * eps2 * l1 * l2 * c3
    if rad < MIN_RADICAND:
        raise ChargeCoincidence(f"radicand {rad!r} m^2 below {MIN_RADICAND}")
    return math.sqrt(rad)


def potential_value(coords, params: SystemParams) -> float:
    rad, _ = _radicands(_q(coords), params)
    return _prefactor(params) * float(np.sum(_SIGN / np.sqrt(rad)))


def potential_gradient(coords, params: SystemParams) -> np.ndarray:
    rad, dq = _radicands(_q(coords), params)
    w = _SIGN * rad**-1.5
    return -0.5 * _prefactor(params) * (dq @ w)


def potential_hessian(coords, params: SystemParams) -> np.ndarray:
    r, c1, c2, c3 = _q(coords)
    rad, dq = _radicands((r, c1, c2, c3), params)
    w3 = _SIGN * rad**-1.5
    w5 = _SIGN * rad**-2.5
    hess = 0.75 * (dq * w5) @ dq.T
    # second derivatives of the radicand: d2/dr2 = 2, d2/dr dc1 = -2 eps1 l1, d2/dr dc2 = 2 eps2 l2
    hess[0, 0] -= 0.5 * 2 * np.sum(w3)
    rc1 = -0.5 * np.sum(w3 * (-2 * _EPS1 * params.l1))
    rc2 = -0.5 * np.sum(w3 * (2 * _EPS2 * params.l2))
    hess[0, 1] += rc1
    hess[1, 0] += rc1
    hess[0, 2] += rc2
    hess[2, 0] += rc2
    hess *= _prefactor(params)
    return 0.5 * (hess + hess.T)


class CylinderMagnetPotential(PotentialModel):
    """Four-pole model of two long, axially magnetized cylinders."""

    name = "cylinder4charge"

    def __init__(self, params: SystemParams):
        self.params = params

    def value(self, coords):
        return potential_value(coords, self.params)

    def gradient(self, coords):
        return potential_gradient(coords, self.params)

    def hessian(self, coords):
        return potential_hessian(coords, self.params)

    def diagnostics(self, coords) -> list[str]:
        r = _q(coords)[0]
        if r < self.params.l1 + self.params.l2:
            return [f"r={r:g} m is below l1+l2; the long-magnet pole model is unreliable there"]
        return []

    def __repr__(self):
        return f"CylinderMagnetPotential({self.params!r})"


POTENTIALS = {"cylinder4charge": CylinderMagnetPotential, "zero": lambda params: ZeroPotential()}


def make_potential(name: str, params: SystemParams) -> PotentialModel:
    try:
        return POTENTIALS[name](params)
    except KeyError:
        raise ConfigError(f"unknown potential {name!r}; choose from {sorted(POTENTIALS)}") from None


def moment_to_charge(magnetic_moment: float, full_length: float) -> float:
    """Pole strength of a uniformly magnetized rod: moment / length."""
    if not full_length > 0:
        raise NonPositiveInput(f"full_length must be positive, got {full_length!r}")
    return magnetic_moment / full_length
