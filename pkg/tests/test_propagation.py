import math

import numpy as np
import pytest

from wgwalk.coupling import CouplingModel, build_coupling_matrix
from wgwalk.geometry import elliptical_layout, fan_in_layout
from wgwalk.propagation import (
    UNITARITY_TOL,
    Propagator,
    intensity_trace,
    propagate_z_dependent,
    single_photon_distribution,
    unitary,
)

from helpers import expm_taylor, paper_ellipse, random_hermitian, random_symmetric


def unitarity_deviation(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def splitter_5050():
    """Two-mode coupler at z c = pi/4: the closed-form 50/50 beam splitter."""
    c = np.array([[0.0, 1.0], [1.0, 0.0]])
    return unitary(c, math.pi / 4)


class TestUnitary:
    def test_zero_length_is_identity(self):
        c = random_symmetric(np.random.default_rng(0), 5)
        u = unitary(c, 0.0)
        np.testing.assert_allclose(u.matrix, np.eye(5), atol=1e-13)
        assert u.z == 0.0

    def test_diagonal_coupling_gives_diagonal_phases(self):
        beta = np.array([0.3, -1.1, 2.0])
        u = unitary(np.diag(beta), 1.7)
        np.testing.assert_allclose(u.matrix, np.diag(np.exp(1.7j * beta)), atol=1e-13)

    def test_two_mode_closed_form(self):
        c_rate, beta, z = 0.9, 0.4, 1.3
        u = unitary(np.array([[beta, c_rate], [c_rate, beta]]), z).matrix
        phase = np.exp(1j * z * beta)
        expected = phase * np.array(
            [
                [math.cos(c_rate * z), 1j * math.sin(c_rate * z)],
                [1j * math.sin(c_rate * z), math.cos(c_rate * z)],
            ]
        )
        np.testing.assert_allclose(u, expected, atol=1e-12)
        np.testing.assert_allclose(
            u, expm_taylor(1j * z * np.array([[beta, c_rate], [c_rate, beta]])), atol=1e-12
        )

    def test_5050_splitter_probabilities(self):
        u = splitter_5050().matrix
        assert abs(u[0, 0]) ** 2 == pytest.approx(0.5, abs=1e-12)
        assert abs(u[0, 1]) ** 2 == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_unitarity_random_couplings(self, n):
        rng = np.random.default_rng(n)
        for _ in range(20):
            u = unitary(random_symmetric(rng, n), rng.uniform(0.0, 4.0))
            assert unitarity_deviation(u.matrix) < UNITARITY_TOL

    def test_unitarity_complex_hermitian(self):
        rng = np.random.default_rng(17)
        u = unitary(random_hermitian(rng, 6), 2.1)
        assert unitarity_deviation(u.matrix) < UNITARITY_TOL

    def test_composition_law(self):
        rng = np.random.default_rng(23)
        c = random_symmetric(rng, 6)
        u1 = unitary(c, 0.7).matrix
        u2 = unitary(c, 1.9).matrix
        u12 = unitary(c, 2.6).matrix
        np.testing.assert_allclose(u1 @ u2, u12, atol=1e-10)

    def test_matches_power_series_oracle(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            c = random_hermitian(rng, 6)
            z = 10.0 / np.linalg.norm(c, 2)  # keep ||z C|| <= 10
            u = unitary(c, z).matrix
            np.testing.assert_allclose(u, expm_taylor(1j * z * c), atol=1e-8)

    def test_mirror_symmetric_coupling_gives_mirror_symmetric_output(self):
        c = build_coupling_matrix(paper_ellipse(), CouplingModel())
        mirror = [0, 5, 4, 3, 2, 1]
        perm = np.ix_(mirror, mirror)
        probs = np.abs(unitary(c, 1.5).matrix) ** 2
        np.testing.assert_allclose(probs, probs[perm], atol=1e-10)

    def test_uniform_beta_is_global_phase(self):
        rng = np.random.default_rng(31)
        c = random_symmetric(rng, 5)
        base = np.abs(unitary(c, 1.2).matrix) ** 2
        shifted = np.abs(unitary(c + 3.7 * np.eye(5), 1.2).matrix) ** 2
        np.testing.assert_allclose(base, shifted, atol=1e-12)

    def test_rejects_asymmetric_and_negative_z(self):
        with pytest.raises(ValueError):
            unitary(np.array([[0.0, 1.0], [0.5, 0.0]]), 1.0)
        with pytest.raises(ValueError):
            unitary(np.eye(2), -1.0)
        with pytest.raises(ValueError):
            unitary(np.zeros((2, 3)), 1.0)


class TestSinglePhotonDistribution:
    def test_identity_propagator(self):
        u = Propagator(np.eye(5, dtype=complex), 0.0)
        np.testing.assert_array_equal(
            single_photon_distribution(u, 3), [0, 0, 0, 1, 0]
        )

    def test_5050_splitter(self):
        p = single_photon_distribution(splitter_5050(), 0)
        np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-12)

    def test_normalization_random(self):
        rng = np.random.default_rng(37)
        u = unitary(random_hermitian(rng, 6), 2.3)
        for port in range(6):
            assert single_photon_distribution(u, port).sum() == pytest.approx(
                1.0, abs=1e-10
            )

    def test_port_out_of_range(self):
        with pytest.raises(IndexError):
            single_photon_distribution(splitter_5050(), 2)


class TestIntensityTrace:
    def test_zero_grid_is_one_hot(self):
        c = build_coupling_matrix(paper_ellipse(), CouplingModel())
        trace = intensity_trace(c, 2, [0.0])
        np.testing.assert_allclose(trace, np.eye(6)[2][None, :], atol=1e-12)

    def test_rows_normalized_everywhere(self):
        c = build_coupling_matrix(paper_ellipse(), CouplingModel())
        trace = intensity_trace(c, 0, np.linspace(0.0, 3.0, 50))
        np.testing.assert_allclose(trace.sum(axis=1), np.ones(50), atol=1e-10)

    def test_mirror_paired_guides_overlap(self):
        # input on the ellipse symmetry axis: traces of the mirror pairs
        # coincide at every z
        c = build_coupling_matrix(paper_ellipse(), CouplingModel())
        trace = intensity_trace(c, 0, np.linspace(0.0, 3.0, 120))
        np.testing.assert_allclose(trace[:, 1], trace[:, 5], atol=1e-10)
        np.testing.assert_allclose(trace[:, 2], trace[:, 4], atol=1e-10)

    def test_decreasing_grid_rejected(self):
        c = np.zeros((2, 2))
        with pytest.raises(ValueError):
            intensity_trace(c, 0, [1.0, 0.5])
        with pytest.raises(ValueError):
            intensity_trace(c, 0, [])


def _fan_in():
    # concentric shrinking ellipses: trajectories never cross, so coupling
    # stays bounded along the whole profile (a 2-D collision would blow up
    # the exponential law and make the ordered product needlessly stiff)
    outer = elliptical_layout(6, 40.8, 28.0)
    mid = elliptical_layout(6, 20.4, 14.0)
    return fan_in_layout(outer, mid, paper_ellipse(), 8.5, 1.0)


class TestPropagateZDependent:
    def test_constant_profile_equals_direct_exponential(self):
        same = paper_ellipse()
        layout = fan_in_layout(same, same, same, 1.0, 1.0)
        model = CouplingModel()
        direct = unitary(build_coupling_matrix(same, model), 2.0).matrix
        for steps in (1, 7):
            product = propagate_z_dependent(layout, model, 0.0, 2.0, steps).matrix
            np.testing.assert_allclose(product, direct, atol=1e-10)

    def test_unitary_along_fan_in(self):
        u = propagate_z_dependent(_fan_in(), CouplingModel(), 0.0, 9.5, 40).matrix
        assert unitarity_deviation(u) < UNITARITY_TOL

    def test_cauchy_under_step_doubling(self):
        layout = _fan_in()
        model = CouplingModel()
        results = {
            steps: propagate_z_dependent(layout, model, 0.0, 9.5, steps).matrix
            for steps in (32, 64, 128, 1024)
        }
        err_coarse = np.max(np.abs(results[32] - results[1024]))
        err_mid = np.max(np.abs(results[64] - results[1024]))
        err_fine = np.max(np.abs(results[128] - results[1024]))
        assert err_fine < err_mid < err_coarse
        # two step doublings must cut the error by at least 4x (first order)
        assert err_coarse / err_fine > 4.0
        # refinement differences shrink too (Cauchy under doubling)
        gap_coarse = np.max(np.abs(results[64] - results[32]))
        gap_fine = np.max(np.abs(results[128] - results[64]))
        assert gap_fine < gap_coarse

    def test_decoupled_guides_give_identity_up_to_phases(self):
        model = CouplingModel(c0_per_mm=0.0, beta_per_mm=0.8)
        u = propagate_z_dependent(_fan_in(), model, 0.0, 9.5, 16).matrix
        np.testing.assert_allclose(np.abs(u), np.eye(6), atol=1e-12)

    def test_invalid_steps(self):
        with pytest.raises(ValueError):
            propagate_z_dependent(_fan_in(), CouplingModel(), 0.0, 9.5, 0)
