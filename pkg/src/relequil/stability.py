"""Energy-momentum certification of the circular relative equilibrium.

The efficiency function is

    H~ = h - ω j3 + λ1 |mu|²/2 + λ2 (mu·m) + λ3 |nu|²/2 + λ4 (nu·n).

The multipliers make dH~ vanish at the equilibrium point; stability is
certified when the second variation of H~ is positive definite on a
10-dimensional subspace W of variations that conserve the Casimirs and
the momentum and are transversal to the symmetry orbit.

All bases live in nondimensional coordinates z~ = z / s, with ``s`` the
characteristic block scales of the equilibrium point, so that the
inner product, orthogonality and definiteness thresholds do not depend on units.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .core_model import (
    MU,
    NU,
    M,
    N,
    P,
    X,
    StateVector,
    SystemParams,
    _values,
    characteristic_scales,
    energy_scale,
    hamiltonian,
    invariant_coords,
    momentum_map,
)
from .errors import (
    BlockStructureViolation,
    DegenerateOrbit,
    RelequilError,
    StationarityResidual,
    UnexpectedKernelDimension,
)
from .magnet_potential import PotentialModel
from .poisson_dynamics import casimir_gradients, generator_field, hamiltonian_gradient, momentum_gradients
from .relative_equilibria import E3, make_relative_equilibrium

STATIONARITY_TOL = 1e-10
KERNEL_RTOL = 1e-10
BLOCK_TOL = 1e-9
EPS_DEF = 1e-12

VARIATION_LABELS = ("dx1", "dx2", "dmu1", "dnu1", "dm1", "dn1", "dmu2", "dnu2", "dm2", "dn2")
BLOCK_ORDER = ((0, 1), (2, 3, 4, 5), (6, 7, 8, 9))
BLOCK_NAMES = ("block_2x2", "block_4x4_a", "block_4x4_b")

STABLE = "Stable"
NOT_CERTIFIED = "NotCertified"


@dataclass(frozen=True)
class MultiplierSet:
    omega: float
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    residual: float = 0.0

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2, self.lambda3, self.lambda4])

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "lambda3": self.lambda3,
            "lambda4": self.lambda4,
        }


@dataclass(frozen=True)
class VariationBasis:
    """Columns spanning W in scaled coordinates; ``raw`` keeps the unorthonormalized explicit columns."""

    W: np.ndarray
    scales: np.ndarray
    labels: tuple[str, ...]
    raw: np.ndarray | None = None

    @property
    def directions(self) -> np.ndarray:
        """Columns of W expressed in physical coordinates."""
        return self.scales[:, None] * self.W


def casimir_values_vector(state) -> np.ndarray:
    y = _values(state)
    return np.array([0.5 * y[MU] @ y[MU], y[MU] @ y[M], 0.5 * y[NU] @ y[NU], y[NU] @ y[N]])


@dataclass(frozen=True)
class EfficiencyFunction:
    params: SystemParams
    potential: PotentialModel
    multipliers: MultiplierSet

    def __call__(self, state) -> float:
        mult = self.multipliers
        j3 = float(momentum_map(state)[2])
        return hamiltonian(state, self.params, self.potential) - mult.omega * j3 + float(mult.lambdas @ casimir_values_vector(state))

    def gradient(self, state) -> np.ndarray:
        return efficiency_gradient(state, self.multipliers, self.params, self.potential)

    def hessian(self, state) -> np.ndarray:
        return efficiency_hessian(state, self.multipliers, self.params, self.potential)


def efficiency_gradient(state, mult: MultiplierSet, params: SystemParams, potential: PotentialModel) -> np.ndarray:
    return (
        hamiltonian_gradient(state, params, potential)
        - mult.omega * momentum_gradients(state)[2]
        + mult.lambdas @ casimir_gradients(state)
    )


def _scaled_residual(grad, scales, energy) -> float:
    return float(np.max(np.abs(grad * scales))) / energy


def solve_multipliers(z_e: StateVector, params: SystemParams, potential: PotentialModel) -> MultiplierSet:
    """ω from the orbit kinematics, λ1..λ4 from dH~(z_e) = 0 by least squares."""
    y = _values(z_e)
    r0 = float(np.linalg.norm(y[X]))
    p0 = float(np.linalg.norm(y[P]))
    omega = p0 / (params.reduced_mass * r0)
    rhs = -(hamiltonian_gradient(y, params, potential) - omega * momentum_gradients(y)[2])
    A = casimir_gradients(y).T
    scales = characteristic_scales(y)
    # solve in scaled rows so every equation carries energy units
    lam, *_ = np.linalg.lstsq(scales[:, None] * A, scales * rhs, rcond=None)
    mult = MultiplierSet(omega, *(float(v) for v in lam))
    residual = _scaled_residual(efficiency_gradient(y, mult, params, potential), scales, energy_scale(y, params, potential))
    if residual > STATIONARITY_TOL:
        raise StationarityResidual(f"dH~ residual {residual:.3e} exceeds {STATIONARITY_TOL}; not an equilibrium point")
    return MultiplierSet(omega, *(float(v) for v in lam), residual=residual)


def closed_form_multipliers(z_e: StateVector, params: SystemParams, potential: PotentialModel) -> MultiplierSet:
    """Hand-solved stationarity conditions at the antiparallel point.

    Uses the axis components mu3 = +1, nu3 = -1 and the spins m3, n3 along e3.
    """
    y = _values(z_e)
    r0 = float(np.linalg.norm(y[X]))
    p0 = float(np.linalg.norm(y[P]))
    omega = p0 / (params.reduced_mass * r0)
    mu3, nu3, m3, n3 = y[MU][2], y[NU][2], y[M][2], y[N][2]
    U_c3 = float(potential.gradient(invariant_coords(y))[3])
    lambda2 = (omega - params.alpha * m3) / mu3
    lambda4 = (omega - params.beta * n3) / nu3
    lambda1 = -(nu3 * U_c3 + m3 * lambda2) / mu3
    lambda3 = -(mu3 * U_c3 + n3 * lambda4) / nu3
    return MultiplierSet(omega, lambda1, lambda2, lambda3, lambda4)


def potential_state_hessian(state, potential: PotentialModel) -> np.ndarray:
    """d²U/dz² by the chain rule through (r, c1, c2, c3)."""
    y = _values(state)
    c = invariant_coords(y)
    e, r = c.e, c.r
    mu, nu = y[MU], y[NU]
    I3 = np.eye(3)
    proj = (I3 - np.outer(e, e)) / r

    J = np.zeros((4, 18))
    J[0, X] = e
    J[1, X] = (mu - c.c1 * e) / r
    J[1, MU] = e
    J[2, X] = (nu - c.c2 * e) / r
    J[2, NU] = e
    J[3, MU] = nu
    J[3, NU] = mu

    dU = potential.gradient(c)
    H = J.T @ potential.hessian(c) @ J

    H[X, X] += dU[0] * proj
    for k, axis, ck in ((1, MU, c.c1), (2, NU, c.c2)):
        a = y[axis]
        H[X, X] += dU[k] * (-np.outer(a, e) - np.outer(e, a) - ck * I3 + 3 * ck * np.outer(e, e)) / r**2
        H[X, axis] += dU[k] * proj
        H[axis, X] += dU[k] * proj
    H[MU, NU] += dU[3] * I3
    H[NU, MU] += dU[3] * I3
    return 0.5 * (H + H.T)


def efficiency_hessian(z_e, mult: MultiplierSet, params: SystemParams, potential: PotentialModel) -> np.ndarray:
    H = potential_state_hessian(z_e, potential)
    I3 = np.eye(3)
    H[P, P] += I3 / params.reduced_mass
    H[M, M] += params.alpha * I3
    H[N, N] += params.beta * I3
    # j3 = x1 p2 - x2 p1 + m3 + n3
    w = mult.omega
    H[0, 4] -= w
    H[4, 0] -= w
    H[1, 3] += w
    H[3, 1] += w
    H[MU, MU] += mult.lambda1 * I3
    H[MU, M] += mult.lambda2 * I3
    H[M, MU] += mult.lambda2 * I3
    H[NU, NU] += mult.lambda3 * I3
    H[NU, N] += mult.lambda4 * I3
    H[N, NU] += mult.lambda4 * I3
    return H


def orbit_tangent(z_e, scales: np.ndarray) -> np.ndarray:
    """Unit tangent of the rotation orbit about e3, in scaled coordinates."""
    t = generator_field(E3, z_e) / scales
    norm = np.linalg.norm(t)
    return t / norm if norm > 0 else t


def variation_basis_explicit(z_e: StateVector, p0: float, r0: float) -> VariationBasis:
    """Independent variations with the dependent ones eliminated by hand.

    Dependent entries: δmu3 = δm3 = δnu3 = δn3 = 0, δx3 = (δm1 + δn1)/p0,
    δp1 = (p0/r0) δx2, δp2 = -(p0/r0) δx1, δp3 = (δm2 + δn2)/r0.  Each
    independent variation has the size of its block scale.  The raw columns
    are kept for the block decomposition; ``W`` has the orbit tangent
    projected out and is then orthonormalized.
    """
    if p0 == 0:
        raise DegenerateOrbit("p0 = 0: the dependent variations divide by p0")
    s = characteristic_scales(z_e)
    sm, sn = s[9], s[15]

    def column(*entries):
        v = np.zeros(18)
        for idx, val in entries:
            v[idx] += val
        return v

    cols = [
        column((0, r0), (4, -p0)),
        column((1, r0), (3, p0)),
        column((6, 1.0)),
        column((12, 1.0)),
        column((9, sm), (2, sm / p0)),
        column((15, sn), (2, sn / p0)),
        column((7, 1.0)),
        column((13, 1.0)),
        column((10, sm), (5, sm / r0)),
        column((16, sn), (5, sn / r0)),
    ]
    raw = np.array(cols).T / s[:, None]
    tau = orbit_tangent(z_e, s)
    projected = raw - np.outer(tau, tau @ raw)
    q, rr = np.linalg.qr(projected)
    q = q * np.sign(np.diag(rr))
    return VariationBasis(W=q, scales=s, labels=VARIATION_LABELS, raw=raw)


def constraint_matrix(z_e, scales: np.ndarray) -> np.ndarray:
    """Rows: scaled differentials of C1..C4 and j1..j3, each normalized."""
    G = np.vstack([casimir_gradients(z_e), momentum_gradients(z_e)]) * scales
    norms = np.linalg.norm(G, axis=1)
    return G / np.where(norms > 0, norms, 1.0)[:, None]


def variation_basis_numeric(z_e: StateVector, omega: float) -> VariationBasis:
    """Null space of the constraints, orthogonal to the orbit tangent, by SVD."""
    s = characteristic_scales(z_e)
    A = np.vstack([constraint_matrix(z_e, s), orbit_tangent(z_e, s)])
    _, sv, vt = np.linalg.svd(A)
    rank = int(np.sum(sv > KERNEL_RTOL * sv[0]))
    W = vt[rank:].T
    if W.shape[1] != 10:
        raise UnexpectedKernelDimension(f"admissible variations span {W.shape[1]} dimensions, expected 10")
    return VariationBasis(W=W, scales=s, labels=tuple(f"w{i}" for i in range(W.shape[1])))


def reduced_hessian(hess18: np.ndarray, basis: VariationBasis, orthonormal: bool = True) -> np.ndarray:
    """Restriction of the 18x18 Hessian to W (energy units)."""
    V = basis.W if orthonormal else basis.raw
    D = basis.scales[:, None] * V
    R = D.T @ hess18 @ D
    return 0.5 * (R + R.T)


def block_decompose(reduced10: np.ndarray, ordering=BLOCK_ORDER) -> tuple[np.ndarray, ...]:
    mask = np.ones_like(reduced10, dtype=bool)
    for idx in ordering:
        mask[np.ix_(idx, idx)] = False
    scale = float(np.max(np.abs(np.diag(reduced10)))) or 1.0
    off = float(np.max(np.abs(reduced10[mask]))) if mask.any() else 0.0
    if off > BLOCK_TOL * scale:
        raise BlockStructureViolation(f"off-block entry {off:.3e} exceeds {BLOCK_TOL:g} x {scale:.3e}")
    return tuple(reduced10[np.ix_(idx, idx)] for idx in ordering)


def sylvester_check(block: np.ndarray, eps: float = EPS_DEF) -> tuple[list[float], bool]:
    """Leading principal minors and whether each exceeds eps * scale**order."""
    B = np.asarray(block, dtype=float)
    k = B.shape[0]
    minors = [float(np.linalg.det(B[:i, :i])) for i in range(1, k + 1)]
    scale = float(np.max(np.abs(B))) if B.size else 0.0
    if scale == 0.0:
        return minors, False
    return minors, all(mi > eps * scale**i for i, mi in enumerate(minors, start=1))


def scaled_minors(block: np.ndarray, minors: list[float]) -> list[float]:
    scale = float(np.max(np.abs(block))) or 1.0
    return [mi / scale**i for i, mi in enumerate(minors, start=1)]


def cholesky_definite(matrix: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass
class StabilityReport:
    params: SystemParams
    potential_name: str
    r0: float
    p0: float
    omega: float
    period: float
    spins: tuple[float, float]
    multipliers: MultiplierSet
    multipliers_closed_form: MultiplierSet
    hessian18: np.ndarray
    reduced10: np.ndarray
    reduced10_numeric: np.ndarray
    blocks: tuple[np.ndarray, ...]
    leading_minors: tuple[list[float], ...]
    block_definite: tuple[bool, ...]
    margin: float
    verdict: str
    eigenvalues_explicit: np.ndarray
    eigenvalues_numeric: np.ndarray
    basis_agreement: bool
    eigen_mismatch: float
    notes: list[str] = field(default_factory=list)

    @property
    def minors_flat(self) -> list[float]:
        return [m for group in self.leading_minors for m in group]

    def to_json(self) -> dict:
        params = self.params.to_dict()
        params["potential"] = self.potential_name
        return {
            "params": params,
            "r0": self.r0,
            "p0": self.p0,
            "omega": self.omega,
            "period": self.period,
            "multipliers": self.multipliers.to_dict(),
            "minors": {name: list(group) for name, group in zip(BLOCK_NAMES, self.leading_minors)},
            "margin": self.margin,
            "verdict": self.verdict,
            "spins": {"m3": self.spins[0], "n3": self.spins[1]},
            "stationarity_residual": self.multipliers.residual,
            "basis_agreement": self.basis_agreement,
            "eigen_mismatch": self.eigen_mismatch,
        }


@contextmanager
def _stage(name: str):
    try:
        yield
    except RelequilError as err:
        if err.stage is None:
            err.stage = name
        raise


def certify_orbit(
    r0: float, spins: tuple[float, float], params: SystemParams, potential: PotentialModel
) -> StabilityReport:
    """Full pipeline: equilibrium, multipliers, both bases, blocks, Sylvester minors.

    The verdict is a sufficient condition only: ``NotCertified`` does not
    mean unstable.
    """
    m3, n3 = spins
    with _stage("force_balance"):
        re = make_relative_equilibrium(r0, m3, n3, params, potential)
    z_e = re.state
    with _stage("multipliers"):
        mult = solve_multipliers(z_e, params, potential)
    with _stage("hessian"):
        H = efficiency_hessian(z_e, mult, params, potential)
    with _stage("explicit_basis"):
        explicit = variation_basis_explicit(z_e, re.p0, re.r0)
    with _stage("numeric_basis"):
        numeric = variation_basis_numeric(z_e, re.omega)
    with _stage("blocks"):
        reduced10 = reduced_hessian(H, explicit, orthonormal=False)
        blocks = block_decompose(reduced10)

    minors, definite, margins = [], [], []
    for block in blocks:
        mins, pd = sylvester_check(block)
        minors.append(mins)
        definite.append(pd)
        margins.extend(scaled_minors(block, mins))
    verdict = STABLE if all(definite) else NOT_CERTIFIED

    reduced_explicit = reduced_hessian(H, explicit)
    reduced_numeric = reduced_hessian(H, numeric)
    ev_explicit = np.linalg.eigvalsh(reduced_explicit)
    ev_numeric = np.linalg.eigvalsh(reduced_numeric)
    ev_scale = float(np.max(np.abs(ev_numeric))) or 1.0
    mismatch = float(np.max(np.abs(ev_explicit - ev_numeric))) / ev_scale
    numeric_pd = cholesky_definite(reduced_numeric)

    notes = list(getattr(potential, "diagnostics", lambda c: [])(invariant_coords(z_e)))
    return StabilityReport(
        params=params,
        potential_name=getattr(potential, "name", type(potential).__name__),
        r0=re.r0,
        p0=re.p0,
        omega=re.omega,
        period=re.period,
        spins=(m3, n3),
        multipliers=mult,
        multipliers_closed_form=closed_form_multipliers(z_e, params, potential),
        hessian18=H,
        reduced10=reduced10,
        reduced10_numeric=reduced_numeric,
        blocks=blocks,
        leading_minors=tuple(minors),
        block_definite=tuple(definite),
        margin=float(min(margins)),
        verdict=verdict,
        eigenvalues_explicit=ev_explicit,
        eigenvalues_numeric=ev_numeric,
        basis_agreement=(numeric_pd == (verdict == STABLE)),
        eigen_mismatch=mismatch,
        notes=notes,
    )
