"""Dormand-Prince 5(4) integration with conservation monitoring.

After every accepted step the axes can be renormalized and the spin
components along them reset to their initial values (``project_casimirs``).
Steps are shortened so that they land exactly on the recording times, which
keeps the drift diagnostics free of interpolation error.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .core_model import (
    BLOCK_NAMES,
    StateVector,
    SystemParams,
    _values,
    casimirs,
    characteristic_scales,
    hamiltonian,
    momentum_map,
    project_casimirs,
    rotation_z,
)
from .errors import NonPositiveInput, StepSizeUnderflow
from .magnet_potential import PotentialModel
from .poisson_dynamics import vector_field

# Dormand & Prince (1980) tableau; the 5th-order weights equal the last stage row (FSAL).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array(_A[6] + [0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
UNDERFLOW_FRACTION = 1e-16

CSV_HEADER = ["t"] + [f"{name}{i}" for name in BLOCK_NAMES for i in (1, 2, 3)] + ["dh", "dj", "dC"]


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    project_casimirs: bool = True
    record_every: float | None = None  # None: 200 records over the run
    fixed_step: float | None = None  # disables step-size control when set

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise NonPositiveInput("tolerances and max_step must be positive")
        if self.record_every is not None and not self.record_every > 0:
            raise NonPositiveInput("record_every must be positive")
        if self.fixed_step is not None and not self.fixed_step > 0:
            raise NonPositiveInput("fixed_step must be positive")


@dataclass(frozen=True)
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray  # (len(times), 18)
    energy_drift: np.ndarray
    momentum_drift: np.ndarray
    casimir_drift: np.ndarray
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> StateVector:
        return StateVector.unchecked(self.states[i])

    @property
    def final_state(self) -> StateVector:
        return self.state(-1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for t, y, dh, dj, dc in zip(self.times, self.states, self.energy_drift, self.momentum_drift, self.casimir_drift):
                writer.writerow([repr(float(v)) for v in (t, *y, dh, dj, dc)])


def _error_norm(err, y0, y1, cfg: IntegratorConfig) -> float:
    sc = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return math.sqrt(float(np.mean((err / sc) ** 2)))


def _initial_step(f, y, f0, cfg: IntegratorConfig, span: float) -> float:
    # Hairer, Norsett & Wanner, Solving ODEs I, II.4
    sc = cfg.abs_tol + cfg.rel_tol * np.abs(y)
    d0 = np.sqrt(np.mean((y / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = f(y + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    h1 = max(1e-6, h0 * 1e-3) if max(d1, d2) <= 1e-15 else (0.01 / max(d1, d2)) ** (1 / 5)
    h = min(100 * h0, h1, cfg.max_step, span)
    # a non-finite field leaves the controller to shrink from a finite start
    return h if math.isfinite(h) and h > 0 else 1e-3 * span


def _dopri_step(f, y, k1, h):
    k = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k) if a != 0.0)
        k.append(f(yi))
    y_new = y + h * sum(b * kj for b, kj in zip(_B, k) if b != 0.0)
    err = h * sum(e * kj for e, kj in zip(_E, k) if e != 0.0)
    return y_new, err, k[6]


class _Monitor:
    def __init__(self, y0, params, potential):
        self.params, self.potential = params, potential
        self.h0 = hamiltonian(y0, params, potential)
        self.j0 = momentum_map(y0)
        self.c0 = casimirs(y0).as_array()
        self.spin_scale = np.array([
            1.0,
            1.0,
            max(abs(self.c0[2]), float(np.linalg.norm(y0[9:12])), 1e-300),
            max(abs(self.c0[3]), float(np.linalg.norm(y0[15:18])), 1e-300),
        ])

    def __call__(self, y):
        dh = abs(hamiltonian(y, self.params, self.potential) - self.h0) / (abs(self.h0) or 1.0)
        dj = float(np.linalg.norm(momentum_map(y) - self.j0)) / (float(np.linalg.norm(self.j0)) or 1.0)
        dc = float(np.max(np.abs(casimirs(y).as_array() - self.c0) / self.spin_scale))
        return dh, dj, dc


def integrate(
    state0: StateVector,
    t_end: float,
    params: SystemParams,
    potential: PotentialModel,
    config: IntegratorConfig | None = None,
) -> TrajectoryRecord:
    """Advance ``state0`` to ``t_end`` along the Hamiltonian vector field."""
    cfg = config or IntegratorConfig()
    if not t_end > 0:
        raise NonPositiveInput(f"t_end must be positive, got {t_end!r}")
    y = np.array(_values(state0), dtype=float)
    c0 = casimirs(y)
    monitor = _Monitor(y, params, potential)

    n_evals = 0

    def f(z):
        nonlocal n_evals
        n_evals += 1
        return vector_field(z, params, potential)

    every = cfg.record_every or t_end / 200
    n_rec = int(math.floor(t_end / every * (1 + 1e-12)))
    record_times = [k * every for k in range(1, n_rec + 1) if k * every < t_end * (1 - 1e-12)] + [t_end]

    times, states, drifts = [0.0], [y.copy()], [monitor(y)]
    t = 0.0
    k1 = f(y)
    h = cfg.fixed_step or _initial_step(f, y, k1, cfg, t_end)
    h_min = UNDERFLOW_FRACTION * t_end
    n_steps = n_rejected = 0

    for target in record_times:
        while t < target:
            remaining = target - t
            landing = h >= remaining * (1 - 1e-12)
            step = remaining if landing else h
            y_new, err, k_last = _dopri_step(f, y, k1, step)
            if cfg.fixed_step is None:
                err_norm = _error_norm(err, y, y_new, cfg)
                if not np.isfinite(err_norm) or err_norm > 1.0:
                    n_rejected += 1
                    factor = MIN_FACTOR if not np.isfinite(err_norm) else max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
                    h = step * factor
                    if not h >= h_min:
                        raise StepSizeUnderflow(f"step {h!r} s fell below {h_min!r} s at t={t!r}")
                    continue
                # a step shortened to hit a record time says nothing about the next one
                if not (landing and step < h):
                    factor = MAX_FACTOR if err_norm == 0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err_norm ** -0.2))
                    h = min(step * factor, cfg.max_step)
            t = target if landing else t + step
            n_steps += 1
            if cfg.project_casimirs:
                y = np.array(project_casimirs(y_new, c0.M3, c0.N3).values)
                k1 = f(y)
            else:
                y, k1 = y_new, k_last
        times.append(t)
        states.append(y.copy())
        drifts.append(monitor(y))

    dh, dj, dc = (np.array(col) for col in zip(*drifts))
    return TrajectoryRecord(
        times=np.array(times),
        states=np.array(states),
        energy_drift=dh,
        momentum_drift=dj,
        casimir_drift=dc,
        stats={"steps": n_steps, "rejected": n_rejected, "evaluations": n_evals},
    )


def distance_scales(a, b) -> np.ndarray:
    """Symmetric per-component scales for comparing two states."""
    return np.maximum(characteristic_scales(a), characteristic_scales(b))


def state_distance(a, b, scales=None) -> float:
    """Weighted Euclidean distance without quotienting the rotation."""
    ya, yb = _values(a), _values(b)
    s = distance_scales(ya, yb) if scales is None else np.asarray(scales, dtype=float)
    return float(np.linalg.norm((ya - yb) / s))


def orbit_distance_mod_rotation(a, b, scales=None) -> float:
    """min over θ of the weighted distance between ``a`` and R_z(θ)·``b``.

    For block-wise rotations about e3 the squared distance is
    ``const - 2(P cos θ + Q sin θ)``, so the minimizer is atan2(Q, P).
    """
    ya, yb = _values(a), _values(b)
    s = distance_scales(ya, yb) if scales is None else np.asarray(scales, dtype=float)
    wa = (ya / s).reshape(6, 3)
    wb = (yb / s).reshape(6, 3)
    P = float(np.sum(wa[:, 0] * wb[:, 0] + wa[:, 1] * wb[:, 1]))
    Q = float(np.sum(wa[:, 1] * wb[:, 0] - wa[:, 0] * wb[:, 1]))
    theta = math.atan2(Q, P)
    rotated = (rotation_z(theta) @ wb.T).T
    return float(np.linalg.norm(wa - rotated))
