"""State space, physical parameters and the SO(3) action on states.

The state is a flat 18-vector with the fixed block order
``(x, p, mu, m, nu, n)``: relative position, relative momentum, body-1 axis,
body-1 angular momentum, body-2 axis, body-2 angular momentum.  Every matrix
in the package (Poisson tensor, Hessians, variation bases) indexes against
this order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import TYPE_CHECKING

import numpy as np

from .errors import InvalidState, NonPositiveInput, NotARotation, ZeroSeparation

if TYPE_CHECKING:
    from .magnet_potential import PotentialModel

MU0 = 4e-7 * math.pi

BLOCK_NAMES = ("x", "p", "mu", "m", "nu", "n")
BLOCK = {name: slice(3 * i, 3 * i + 3) for i, name in enumerate(BLOCK_NAMES)}
X, P, MU, M, NU, N = (BLOCK[name] for name in BLOCK_NAMES)

UNIT_TOL = 1e-12
MIN_SEPARATION = 1e-15
ROTATION_TOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the two-body system (SI units).

    ``alpha`` and ``beta`` are the inverse transverse moments of inertia of the
    two symmetric tops; ``l1``/``l2`` are magnet semilengths and
    ``kappa1``/``kappa2`` the fictitious pole strengths.
    """

    reduced_mass: float
    alpha: float
    beta: float
    l1: float
    l2: float
    kappa1: float
    kappa2: float
    mu0: float = MU0

    def __post_init__(self):
        for name in ("reduced_mass", "alpha", "beta", "l1", "l2", "mu0"):
            if not getattr(self, name) > 0:
                raise NonPositiveInput(f"{name} must be positive, got {getattr(self, name)!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        names = {f.name for f in fields(cls)}
        return cls(**{k: float(v) for k, v in data.items() if k in names})


def _check_units(values: np.ndarray, tol: float = UNIT_TOL) -> None:
    for name in ("mu", "nu"):
        norm = math.sqrt(float(values[BLOCK[name]] @ values[BLOCK[name]]))
        if abs(norm - 1.0) > tol:
            raise InvalidState(f"|{name}| = {norm!r} is not a unit vector (tolerance {tol})")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable 18-slot state. Axis vectors must be unit length on construction.

    Use :meth:`unchecked` for intermediate states (e.g. integrator output with
    projection disabled) whose axes are allowed to drift.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).reshape(-1)
        if arr.shape != (18,):
            raise InvalidState(f"state needs 18 components, got {arr.size}")
        _check_units(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def unchecked(cls, values) -> "StateVector":
        arr = np.array(values, dtype=float).reshape(18)
        arr.flags.writeable = False
        obj = object.__new__(cls)
        object.__setattr__(obj, "values", arr)
        return obj

    @classmethod
    def from_blocks(cls, x, p, mu, m, nu, n) -> "StateVector":
        return cls(np.concatenate([np.asarray(b, dtype=float).reshape(3) for b in (x, p, mu, m, nu, n)]))

    x = property(lambda self: self.values[X])
    p = property(lambda self: self.values[P])
    mu = property(lambda self: self.values[MU])
    m = property(lambda self: self.values[M])
    nu = property(lambda self: self.values[NU])
    n = property(lambda self: self.values[N])

    def blocks(self) -> dict[str, np.ndarray]:
        return {name: self.values[BLOCK[name]] for name in BLOCK_NAMES}

    def __repr__(self):
        inner = ", ".join(f"{k}={np.array2string(v, precision=6)}" for k, v in self.blocks().items())
        return f"StateVector({inner})"


@dataclass(frozen=True)
class InvariantCoords:
    """Rotation-invariant arguments of the potential."""

    r: float
    e: np.ndarray
    c1: float
    c2: float
    c3: float

    @property
    def q(self) -> tuple[float, float, float, float]:
        return (self.r, self.c1, self.c2, self.c3)


@dataclass(frozen=True)
class CasimirValues:
    mu_sq: float
    nu_sq: float
    M3: float
    N3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mu_sq, self.nu_sq, self.M3, self.N3])


def _values(state) -> np.ndarray:
    return state.values if isinstance(state, StateVector) else np.asarray(state, dtype=float)


def invariant_coords(state) -> InvariantCoords:
    y = _values(state)
    x, mu, nu = y[X], y[MU], y[NU]
    r = math.sqrt(float(x @ x))
    if r < MIN_SEPARATION:
        raise ZeroSeparation(f"separation {r!r} m is below {MIN_SEPARATION} m")
    e = x / r
    return InvariantCoords(r=r, e=e, c1=float(e @ mu), c2=float(e @ nu), c3=float(mu @ nu))


def casimirs(state) -> CasimirValues:
    y = _values(state)
    mu, m, nu, n = y[MU], y[M], y[NU], y[N]
    return CasimirValues(float(mu @ mu), float(nu @ nu), float(mu @ m), float(nu @ n))


def kinetic_energy(state, params: SystemParams) -> float:
    y = _values(state)
    p, m, n = y[P], y[M], y[N]
    return float(p @ p / (2 * params.reduced_mass) + 0.5 * params.alpha * (m @ m) + 0.5 * params.beta * (n @ n))


def hamiltonian(state, params: SystemParams, potential: PotentialModel) -> float:
    return kinetic_energy(state, params) + potential.value(invariant_coords(state))


def momentum_map(state) -> np.ndarray:
    """Total angular momentum ``x × p + m + n``."""
    y = _values(state)
    return np.cross(y[X], y[P]) + y[M] + y[N]


def check_rotation(rotation, tol: float = ROTATION_TOL) -> np.ndarray:
    A = np.asarray(rotation, dtype=float)
    if A.shape != (3, 3):
        raise NotARotation(f"expected a 3x3 matrix, got shape {A.shape}")
    if np.max(np.abs(A.T @ A - np.eye(3))) > tol or abs(np.linalg.det(A) - 1.0) > tol:
        raise NotARotation("matrix is not orthogonal with determinant 1")
    return A


def rotate_state(rotation, state: StateVector) -> StateVector:
    """Rotate all six vector blocks by the same proper rotation."""
    A = check_rotation(rotation)
    rotated = (A @ _values(state).reshape(6, 3).T).T.reshape(18)
    return StateVector.unchecked(rotated)


def rotation_z(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed rotation via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def project_casimirs(state, M3: float, N3: float) -> StateVector:
    """Renormalize both axes and reset the spin components along them."""
    y = np.array(_values(state), dtype=float)
    for ax, spin, value in ((MU, M, M3), (NU, N, N3)):
        y[ax] /= math.sqrt(float(y[ax] @ y[ax]))
        y[spin] += (value - float(y[ax] @ y[spin])) * y[ax]
    return StateVector.unchecked(y)


def cylinder_inertia_alpha(body_mass: float, radius: float, length: float) -> float:
    """Inverse transverse moment of inertia of a uniform solid cylinder."""
    for name, value in (("body_mass", body_mass), ("radius", radius), ("length", length)):
        if not value > 0:
            raise NonPositiveInput(f"{name} must be positive, got {value!r}")
    return 12.0 / (body_mass * (3 * radius**2 + length**2))


def characteristic_scales(state) -> np.ndarray:
    """Per-component scales (|x|, |p|, 1, |m|, 1, |n|) used to nondimensionalize.

    Zero momenta fall back to the orbital angular momentum |x × p|, then to 1.
    """
    y = _values(state)
    sx = float(np.linalg.norm(y[X])) or 1.0
    sp = float(np.linalg.norm(y[P])) or 1.0
    orbital = float(np.linalg.norm(np.cross(y[X], y[P])))
    sm = float(np.linalg.norm(y[M])) or orbital or 1.0
    sn = float(np.linalg.norm(y[N])) or orbital or 1.0
    return np.repeat([sx, sp, 1.0, sm, 1.0, sn], 3)


def energy_scale(state, params: SystemParams, potential: PotentialModel) -> float:
    scale = kinetic_energy(state, params) + abs(potential.value(invariant_coords(state)))
    return scale or 1.0
