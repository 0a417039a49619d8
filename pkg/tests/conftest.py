import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from relequil import presets
from relequil.core_model import StateVector, characteristic_scales, random_rotation
from relequil.magnet_potential import CylinderMagnetPotential
from relequil.relative_equilibria import make_relative_equilibrium


@pytest.fixture(scope="session")
def params():
    return presets.reference_params()


@pytest.fixture(scope="session")
def potential(params):
    return CylinderMagnetPotential(params)


@pytest.fixture(scope="session")
def reference_re(params, potential):
    return make_relative_equilibrium(presets.R0, *presets.reference_spins(), params, potential)


def random_state(rng: np.random.Generator, r_scale: float = 0.05) -> StateVector:
    x = rng.standard_normal(3)
    x *= r_scale * (0.5 + rng.random()) / np.linalg.norm(x)
    mu = rng.standard_normal(3)
    nu = rng.standard_normal(3)
    return StateVector.from_blocks(
        x,
        1e-3 * rng.standard_normal(3),
        mu / np.linalg.norm(mu),
        1e-4 * rng.standard_normal(3),
        nu / np.linalg.norm(nu),
        1e-4 * rng.standard_normal(3),
    )


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def states(draw):
    return random_state(np.random.default_rng(draw(seeds)))


@st.composite
def rotations(draw):
    return random_rotation(np.random.default_rng(draw(seeds)))


vectors3 = hnp.arrays(np.float64, 3, elements=st.floats(-10, 10, allow_nan=False))


def perturbed_state(base: StateVector, eps: float, rng: np.random.Generator) -> StateVector:
    """Random relative perturbation of size ~eps per block, axes kept on the unit sphere."""
    y = base.values + eps * characteristic_scales(base) * rng.standard_normal(18)
    y[6:9] /= np.linalg.norm(y[6:9])
    y[12:15] /= np.linalg.norm(y[12:15])
    return StateVector.unchecked(y)


def unit_perturbation(base: StateVector, size: float, rng: np.random.Generator) -> StateVector:
    """Perturbation of scaled 18-norm ``size`` in a random direction, axes renormalized."""
    d = rng.standard_normal(18)
    y = base.values + size * characteristic_scales(base) * d / np.linalg.norm(d)
    y[6:9] /= np.linalg.norm(y[6:9])
    y[12:15] /= np.linalg.norm(y[12:15])
    return StateVector.unchecked(y)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props and rep.when == "call":
                lines.append((props["criterion"], outcome.upper()[:4], props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for number, status, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {number}: {status}  {detail}")
