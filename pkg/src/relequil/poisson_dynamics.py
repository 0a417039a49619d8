"""Poisson tensor, brackets, Hamiltonian vector field and SO(3) generators."""

from __future__ import annotations

import numpy as np

from .core_model import MU, NU, M, N, P, X, StateVector, SystemParams, _values, invariant_coords
from .magnet_potential import PotentialModel


def hat(v) -> np.ndarray:
    """Matrix of ``w -> v × w``."""
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def poisson_tensor(state) -> np.ndarray:
    """18x18 matrix ``B[i, j] = {z_i, z_j}`` for the generatrices.

    Nonzero blocks: {x_i, p_j} = δ_ij, {m_i, mu_j} = ε_ijk mu_k,
    {m_i, m_j} = ε_ijk m_k and the same pair for body 2.  Every other pair of
    generatrices commutes.
    """
    y = _values(state)
    B = np.zeros((18, 18))
    B[X, P] = np.eye(3)
    B[P, X] = -np.eye(3)
    for axis, spin in ((MU, M), (NU, N)):
        # ε_ijk v_k = -hat(v)_ij
        B[spin, axis] = -hat(y[axis])
        B[axis, spin] = -hat(y[axis])
        B[spin, spin] = -hat(y[spin])
    return B


def bracket(grad_f, grad_g, state) -> float:
    """{f, g} at ``state`` from the evaluated differentials of f and g."""
    return float(np.asarray(grad_f) @ poisson_tensor(state) @ np.asarray(grad_g))


def casimir_gradients(state) -> np.ndarray:
    """Rows: d(|mu|²/2), d(mu·m), d(|nu|²/2), d(nu·n)."""
    y = _values(state)
    G = np.zeros((4, 18))
    G[0, MU] = y[MU]
    G[1, MU] = y[M]
    G[1, M] = y[MU]
    G[2, NU] = y[NU]
    G[3, NU] = y[N]
    G[3, N] = y[NU]
    return G


def momentum_gradients(state) -> np.ndarray:
    """Rows: differentials of the three components of x × p + m + n."""
    y = _values(state)
    G = np.zeros((3, 18))
    G[:, X] = -hat(y[P])
    G[:, P] = hat(y[X])
    G[:, M] = np.eye(3)
    G[:, N] = np.eye(3)
    return G


def hamiltonian_gradient(state, params: SystemParams, potential: PotentialModel) -> np.ndarray:
    y = _values(state)
    c = invariant_coords(y)
    dU = potential.gradient(c)
    g = np.zeros(18)
    mu, nu = y[MU], y[NU]
    g[X] = dU[0] * c.e + (dU[1] * (mu - c.c1 * c.e) + dU[2] * (nu - c.c2 * c.e)) / c.r
    g[P] = y[P] / params.reduced_mass
    g[MU] = dU[1] * c.e + dU[3] * nu
    g[M] = params.alpha * y[M]
    g[NU] = dU[2] * c.e + dU[3] * mu
    g[N] = params.beta * y[N]
    return g


def _cross(a, b):
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


def vector_field(y: np.ndarray, params: SystemParams, potential: PotentialModel) -> np.ndarray:
    """Equations of motion on a raw 18-array (hot path for the integrator)."""
    p, mu, m, nu, n = y[P], y[MU], y[M], y[NU], y[N]
    c = invariant_coords(y)
    e = c.e
    U_r, U_c1, U_c2, U_c3 = potential.gradient(c)
    mu_x_nu = _cross(mu, nu)
    out = np.empty(18)
    out[X] = p / params.reduced_mass
    out[P] = -U_r * e - (U_c1 * (mu - c.c1 * e) + U_c2 * (nu - c.c2 * e)) / c.r
    out[MU] = params.alpha * _cross(m, mu)
    out[M] = U_c1 * _cross(e, mu) - U_c3 * mu_x_nu
    out[NU] = params.beta * _cross(n, nu)
    out[N] = U_c2 * _cross(e, nu) + U_c3 * mu_x_nu
    return out


def hamiltonian_vector_field(state: StateVector, params: SystemParams, potential: PotentialModel) -> np.ndarray:
    return vector_field(_values(state), params, potential)


def generator_field(omega, state) -> np.ndarray:
    """Infinitesimal rotation: every block v maps to omega × v."""
    w = np.asarray(omega, dtype=float)
    blocks = _values(state).reshape(6, 3)
    return np.cross(w, blocks).reshape(18)
