import json
import math
import numpy as np
import pytest
from scipy.linalg import subspace_angles

from relequil import presets
from relequil.core_model import StateVector, SystemParams, characteristic_scales, energy_scale, rotate_state, rotation_z
from relequil.errors import (
    BlockStructureViolation,
    DegenerateOrbit,
    NoCircularOrbit,
    UnexpectedKernelDimension,
)
from relequil.integrator import IntegratorConfig, integrate, orbit_distance_mod_rotation
from relequil.magnet_potential import CylinderMagnetPotential, ZeroPotential, potential_value
from relequil.relative_equilibria import build_equilibrium_point, make_relative_equilibrium
from relequil.stability import (
    NOT_CERTIFIED,
    BLOCK_ORDER,
    STABLE,
    EfficiencyFunction,
    block_decompose,
    certify_orbit,
    cholesky_definite,
    closed_form_multipliers,
    constraint_matrix,
    efficiency_hessian,
    orbit_tangent,
    reduced_hessian,
    solve_multipliers,
    sylvester_check,
    variation_basis_numeric,
    variation_basis_explicit,
)

from conftest import perturbed_state

PARAMS = presets.reference_params()
POT = CylinderMagnetPotential(PARAMS)
SPINS = presets.reference_spins()


@pytest.fixture(scope="module")
def re():
    return make_relative_equilibrium(presets.R0, *SPINS, PARAMS, POT)


@pytest.fixture(scope="module")
def report():
    return certify_orbit(presets.R0, SPINS, PARAMS, POT)


def fd_gradient(f, y, s, rel=1e-6):
    g = np.zeros(18)
    for i in range(18):
        h = rel * s[i]
        yp, ym = y.copy(), y.copy()
        yp[i] += h
        ym[i] -= h
        g[i] = (f(yp) - f(ym)) / (2 * h)
    return g


def random_params(rng):
    l1, l2 = rng.uniform(0.002, 0.02, 2)
    params = SystemParams(
        reduced_mass=rng.uniform(1e-4, 1e-3),
        alpha=10 ** rng.uniform(6, 8),
        beta=10 ** rng.uniform(6, 8),
        l1=l1,
        l2=l2,
        kappa1=rng.uniform(1, 20),
        kappa2=rng.uniform(1, 20),
    )
    r0 = rng.uniform(0.5, 20) * max(l1, l2)
    spins = tuple(rng.uniform(-2e-4, 2e-4, 2))
    return params, r0, spins


class TestMultipliers:
    def test_reference_values(self, re):
        mult = solve_multipliers(re.state, PARAMS, POT)
        omega = 2 * math.pi / re.period
        # λ2 = (ω - α m3)/μ3 with μ3 = 1
        assert mult.lambda2 == pytest.approx(omega - PARAMS.alpha * SPINS[0], rel=1e-12)
        assert mult.lambda4 == pytest.approx(-(omega - PARAMS.beta * SPINS[1]), rel=1e-12)
        # λ1 = U_c3 - m3 λ2, U_c3 from a central difference of the potential in c3
        h = 1e-6
        U_c3 = (potential_value((0.01, 0, 0, -1 + h), PARAMS) - potential_value((0.01, 0, 0, -1 - h), PARAMS)) / (2 * h)
        assert mult.lambda1 == pytest.approx(U_c3 - SPINS[0] * mult.lambda2, rel=1e-8)
        assert mult.lambda3 == pytest.approx(mult.lambda1, rel=1e-12)
        assert mult.lambda1 == pytest.approx(0.0896471, rel=1e-6)
        assert mult.lambda2 == pytest.approx(-1766.61, rel=1e-6)

    def test_closed_form_agrees(self, re):
        a = solve_multipliers(re.state, PARAMS, POT)
        b = closed_form_multipliers(re.state, PARAMS, POT)
        np.testing.assert_allclose(a.lambdas, b.lambdas, rtol=1e-12)
        assert a.omega == b.omega == pytest.approx(re.omega, rel=1e-15)

    def test_residual_small(self, re):
        assert solve_multipliers(re.state, PARAMS, POT).residual < 1e-10

    def test_efficiency_stationary_by_finite_differences(self, re):
        H = EfficiencyFunction(PARAMS, POT, solve_multipliers(re.state, PARAMS, POT))
        y = re.state.values.copy()
        s = characteristic_scales(y)
        g = fd_gradient(H, y, s) * s / energy_scale(y, PARAMS, POT)
        assert np.max(np.abs(g)) < 1e-8

    def test_free_system(self):
        m3, n3 = 3e-5, -2e-5
        z = build_equilibrium_point(0.02, 0.0, m3, n3)
        pot = ZeroPotential()
        mult = solve_multipliers(z, PARAMS, pot)
        a, b = PARAMS.alpha, PARAMS.beta
        assert mult.omega == 0.0
        assert mult.lambda2 == pytest.approx(-a * m3, rel=1e-12)
        assert mult.lambda1 == pytest.approx(a * m3**2, rel=1e-12)
        # nu3 = -1 flips the sign relative to body 1: beta n3 + lambda4 nu3 = 0
        assert mult.lambda4 == pytest.approx(b * n3, rel=1e-12)
        assert mult.lambda3 == pytest.approx(b * n3**2, rel=1e-12)
        np.testing.assert_allclose(EfficiencyFunction(PARAMS, pot, mult).gradient(z), 0, atol=1e-12 * a * abs(m3))


class TestHessian:
    def test_symmetric(self, re):
        H = efficiency_hessian(re.state, solve_multipliers(re.state, PARAMS, POT), PARAMS, POT)
        np.testing.assert_array_equal(H, H.T)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_finite_differences(self, re, seed):
        # off the equilibrium too, so every chain-rule term is exercised
        z = re.state if seed == 0 else perturbed_state(re.state, 0.1, np.random.default_rng(seed))
        mult = solve_multipliers(re.state, PARAMS, POT)
        eff = EfficiencyFunction(PARAMS, POT, mult)
        y = z.values.copy()
        s = characteristic_scales(re.state)
        H = eff.hessian(y) * np.outer(s, s)
        fd = np.zeros((18, 18))
        for i in range(18):
            h = 1e-6 * s[i]
            yp, ym = y.copy(), y.copy()
            yp[i] += h
            ym[i] -= h
            fd[:, i] = (eff.gradient(yp) - eff.gradient(ym)) / (2 * h)
        fd = fd * np.outer(s, s)
        np.testing.assert_allclose(H, fd, rtol=1e-5, atol=1e-5 * np.max(np.abs(H)))

    def test_free_translational_block(self):
        z = build_equilibrium_point(0.02, 0.0, 3e-5, 2e-5)
        mult = solve_multipliers(z, PARAMS, ZeroPotential())
        H = efficiency_hessian(z, mult, PARAMS, ZeroPotential())
        np.testing.assert_array_equal(H[0:3, 0:3], np.zeros((3, 3)))
        np.testing.assert_array_equal(H[3:6, 3:6], np.eye(3) / PARAMS.reduced_mass)
        np.testing.assert_array_equal(H[0:3, 3:6], np.zeros((3, 3)))


class TestBases:
    def test_explicit_basis_constraints(self, re):
        b = variation_basis_explicit(re.state, re.p0, re.r0)
        A = constraint_matrix(re.state, b.scales)
        assert np.max(np.abs(A @ b.W)) < 1e-12
        assert np.max(np.abs(A @ b.raw)) < 1e-12

    def test_explicit_basis_orthonormal_and_transversal(self, re):
        b = variation_basis_explicit(re.state, re.p0, re.r0)
        np.testing.assert_allclose(b.W.T @ b.W, np.eye(10), atol=1e-12)
        tau = orbit_tangent(re.state, b.scales)
        assert np.max(np.abs(tau @ b.W)) < 1e-12
        assert b.labels[:2] == ("dx1", "dx2")

    def test_numeric_basis(self, re):
        b = variation_basis_numeric(re.state, re.omega)
        assert b.W.shape == (18, 10)
        np.testing.assert_allclose(b.W.T @ b.W, np.eye(10), atol=1e-12)
        assert np.max(np.abs(constraint_matrix(re.state, b.scales) @ b.W)) < 1e-12
        assert np.max(np.abs(orbit_tangent(re.state, b.scales) @ b.W)) < 1e-12

    def test_same_span(self, re):
        a = variation_basis_explicit(re.state, re.p0, re.r0)
        b = variation_basis_numeric(re.state, re.omega)
        assert np.max(subspace_angles(a.W, b.W)) < 1e-8

    def test_explicit_basis_needs_momentum(self):
        z = build_equilibrium_point(0.01, 0.0, 1e-5, 1e-5)
        with pytest.raises(DegenerateOrbit):
            variation_basis_explicit(z, 0.0, 0.01)

    def test_degenerate_kernel(self):
        # everything along e3: the rotation orbit collapses to a point
        z = StateVector.from_blocks([0, 0, 0.01], [0, 0, 0], [0, 0, 1], [0, 0, 1e-5], [0, 0, -1], [0, 0, 1e-5])
        with pytest.raises(UnexpectedKernelDimension):
            variation_basis_numeric(z, 0.0)


class TestReduction:
    def test_eigenvalues_basis_independent(self, re):
        H = efficiency_hessian(re.state, solve_multipliers(re.state, PARAMS, POT), PARAMS, POT)
        ea = np.linalg.eigvalsh(reduced_hessian(H, variation_basis_explicit(re.state, re.p0, re.r0)))
        eb = np.linalg.eigvalsh(reduced_hessian(H, variation_basis_numeric(re.state, re.omega)))
        np.testing.assert_allclose(ea, eb, rtol=1e-8, atol=1e-8 * np.max(np.abs(eb)))

    def test_block_structure(self, report):
        R = report.reduced10
        np.testing.assert_array_equal(R, R.T)
        mask = np.ones((10, 10), dtype=bool)
        for idx in BLOCK_ORDER:
            mask[np.ix_(idx, idx)] = False
        assert np.max(np.abs(R[mask])) < 1e-9 * np.max(np.abs(np.diag(R)))
        assert [b.shape for b in report.blocks] == [(2, 2), (4, 4), (4, 4)]
        np.testing.assert_array_equal(report.blocks[0], R[:2, :2])

    def test_block_spectrum_union(self, report):
        R = report.reduced10
        mask = np.zeros((10, 10), dtype=bool)
        for idx in BLOCK_ORDER:
            mask[np.ix_(idx, idx)] = True
        ev = np.sort(np.linalg.eigvalsh(np.where(mask, R, 0.0)))
        union = np.sort(np.concatenate([np.linalg.eigvalsh(b) for b in report.blocks]))
        np.testing.assert_allclose(union, ev, rtol=1e-9, atol=1e-9 * np.max(np.abs(ev)))
        np.testing.assert_allclose(union, np.sort(np.linalg.eigvalsh(R)), rtol=1e-9, atol=1e-9 * np.max(np.abs(ev)))

    def test_block_violation_surfaces(self):
        R = np.eye(10)
        R[0, 5] = R[5, 0] = 1e-6
        with pytest.raises(BlockStructureViolation):
            block_decompose(R)


class TestSylvester:
    def test_identity(self):
        assert sylvester_check(np.eye(4)) == ([1.0, 1.0, 1.0, 1.0], True)

    def test_indefinite(self):
        assert sylvester_check(np.diag([1.0, -1.0])) == ([1.0, -1.0], False)

    def test_threshold_scales(self):
        # unit-invariant: rescaling a definite matrix keeps the verdict
        B = np.array([[2.0, 1.0], [1.0, 2.0]])
        for k in (1e-12, 1.0, 1e12):
            assert sylvester_check(k * B)[1]

    def test_agrees_with_eigenvalues(self):
        rng = np.random.default_rng(61)
        for _ in range(1000):
            k = int(rng.integers(1, 6))
            A = rng.standard_normal((k, k))
            S = A + A.T + rng.uniform(-1, 4) * np.eye(k)
            _, pd = sylvester_check(S)
            assert pd == (np.linalg.eigvalsh(S)[0] > 0)
            assert pd == cholesky_definite(S)


class TestCertify:
    def test_reference_orbit_stable(self, report):
        assert report.verdict == STABLE
        assert all(report.block_definite)
        assert len(report.minors_flat) == 10 and min(report.minors_flat) > 0
        assert report.margin == pytest.approx(4.6767e-3, rel=1e-3)
        assert report.basis_agreement and report.eigen_mismatch < 1e-8

    def test_reference_numbers(self, report):
        assert report.p0 == pytest.approx(6.491e-4, rel=1e-4)
        assert report.period == pytest.approx(0.037062129, rel=1e-6)

    def test_json(self, report):
        data = report.to_json()
        for key in ("params", "r0", "p0", "omega", "period", "multipliers", "minors", "margin", "verdict"):
            assert key in data
        assert list(data["minors"]) == ["block_2x2", "block_4x4_a", "block_4x4_b"]
        assert [len(v) for v in data["minors"].values()] == [2, 4, 4]
        json.dumps(data)

    def test_spinless_not_certified(self):
        rep = certify_orbit(presets.R0, (0.0, 0.0), PARAMS, POT)
        assert rep.verdict == NOT_CERTIFIED
        assert rep.basis_agreement

    def test_spinless_perturbation_grows(self):
        re0 = make_relative_equilibrium(presets.R0, 0.0, 0.0, PARAMS, POT)
        z0 = perturbed_state(re0.state, 1e-4, np.random.default_rng(67))
        d0 = orbit_distance_mod_rotation(z0, re0.state)
        rec = integrate(z0, re0.period, PARAMS, POT, IntegratorConfig(record_every=re0.period / 20))
        growth = max(orbit_distance_mod_rotation(y, re0.state) for y in rec.states) / d0
        assert growth > 100

    def test_free_system_has_no_orbit(self):
        with pytest.raises(NoCircularOrbit) as info:
            certify_orbit(0.01, SPINS, PARAMS, ZeroPotential())
        assert info.value.stage == "force_balance"

    def test_bases_agree_on_random_parameters(self):
        rng = np.random.default_rng(71)
        verdicts = []
        for _ in range(100):
            params, r0, spins = random_params(rng)
            rep = certify_orbit(r0, spins, params, CylinderMagnetPotential(params))
            assert rep.basis_agreement, (params, r0, spins)
            assert rep.eigen_mismatch < 1e-8
            for block, pd in zip(rep.blocks, rep.block_definite):
                assert pd == cholesky_definite(block)
            verdicts.append(rep.verdict)
        # the sample should exercise both outcomes
        assert set(verdicts) == {STABLE, NOT_CERTIFIED}

    def test_rotated_equilibrium_same_verdict(self, re):
        # certification depends only on the orbit, not the chosen point on it
        z = rotate_state(rotation_z(0.7), re.state)
        mult = solve_multipliers(z, PARAMS, POT)
        np.testing.assert_allclose(mult.lambdas, solve_multipliers(re.state, PARAMS, POT).lambdas, rtol=1e-10)
