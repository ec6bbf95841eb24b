"""Field-line tracing, sections, rotation vectors, Lyapunov estimates."""

import numpy as np
import pytest

from toruslab.field import SpectralField3, shear_x_by_z
from toruslab.flow import (
    lyapunov_max,
    poincare_hits,
    rotation_vector,
    trace,
)
from toruslab.gallery import make_hopf_steady, make_shear_field, named_profile

TAU = 2 * np.pi


@pytest.fixture(scope="module")
def uz():
    return make_shear_field(named_profile("cos-sin"), axis="z", n=32)


@pytest.fixture(scope="module")
def uz_perturbed():
    base = make_shear_field(named_profile("cos-sin"), axis="z", n=32)
    rng = np.random.default_rng(7)
    bump = SpectralField3.random_divergence_free(32, 3, rng, exact=True)
    return base + 0.3 * bump


class TestTrace:
    def test_shear_orbit_is_linear_in_the_cover(self, uz):
        z0 = 1.1
        traj = trace(uz, (0.2, 0.4, z0), 50.0, tol=1e-10)
        assert not traj.failed
        assert np.max(np.abs(traj.lifted[:, 2] - z0)) < 1e-9
        expected_x = 0.2 + np.cos(z0) * traj.t
        expected_y = 0.4 + np.sin(z0) * traj.t
        assert np.max(np.abs(traj.lifted[:, 0] - expected_x)) < 1e-8
        assert np.max(np.abs(traj.lifted[:, 1] - expected_y)) < 1e-8
        assert np.max(np.abs(traj.wrapped - np.mod(traj.lifted, TAU))) < 1e-12

    def test_zero_field_stays_put(self):
        traj = trace(SpectralField3.zero(16), (1.0, 2.0, 3.0), 10.0)
        assert np.max(np.abs(traj.lifted - np.array([1.0, 2.0, 3.0]))) == 0.0

    def test_time_stamps_strictly_increasing(self, uz):
        traj = trace(uz, (0.0, 0.0, 0.5), 5.0, n_samples=128)
        assert np.all(np.diff(traj.t) > 0)

    def test_hopf_first_integral_conserved(self):
        s = make_hopf_steady(
            lambda F: 1.0 + 0.2 * F, lambda F: 0.7 * np.ones_like(F),
            lambda F: 0.2 * np.ones_like(F), lambda F: np.zeros_like(F),
        )
        p0 = np.array([0.5, 0.5, 0.5, 0.5])
        traj = trace(s, p0, 20.0, tol=1e-10, n_samples=512)
        F = traj.lifted[:, 0] ** 2 + traj.lifted[:, 1] ** 2
        assert np.max(np.abs(F - F[0])) < 1e-8
        assert traj.stats.sphere_drift < 1e-8

    def test_liouville_volume_preservation(self, uz):
        # the flow map of a divergence-free field preserves volume: estimate
        # the Jacobian determinant over a small cell of seeds (central
        # differences keep the finite-difference truncation below 1e-4)
        base = make_shear_field(named_profile("cos-sin"), axis="z", n=32)
        rng = np.random.default_rng(7)
        bump = SpectralField3.random_divergence_free(32, 3, rng, exact=True)
        fld = base + 0.05 * bump
        h = 1e-3
        x0 = np.array([1.0, 2.0, 0.8])
        cols = []
        for e in np.eye(3):
            plus = trace(fld, x0 + h * e, 10.0, tol=1e-12, n_samples=64).lifted[-1]
            minus = trace(fld, x0 - h * e, 10.0, tol=1e-12, n_samples=64).lifted[-1]
            cols.append((plus - minus) / (2 * h))
        det = np.linalg.det(np.stack(cols, axis=1))
        assert abs(det - 1.0) < 1e-4


class TestPoincare:
    def test_shear_return_map_is_the_twist_map(self, uz):
        # section {y = 0}: x advances by 2 pi f/g per return, z frozen
        z0 = 0.9
        hits = poincare_hits(uz, ("y", 0.0), (0.3, 0.0, z0), 12, tol=1e-11)
        assert hits.complete
        good = ~hits.degenerate
        pts = hits.points[good]
        assert np.max(np.abs(pts[:, 2] - z0)) < 1e-9
        dx = np.diff(pts[:, 0])
        expected = TAU * np.cos(z0) / np.sin(z0)
        assert np.max(np.abs(dx - expected)) < 1e-8
        # rotation number of the return map, mod 2 pi
        assert abs((dx[0] - expected + np.pi) % TAU - np.pi) < 1e-8

    def test_tangential_field_flags_degenerate(self):
        # field aligned with the section normal nowhere crosses transversally
        # in y: u = sin(y) d/dy has y-velocity vanishing on the section
        fld = SpectralField3.from_modes({(0, 1, 0): (0.0, -1j, 0.0)}, 16)

        def shifted(p):
            return fld.evaluate(p)

        hits = poincare_hits(shifted, ("y", 0.0), (0.0, 1e-12, 0.0), 3, max_time=100.0)
        assert not hits.complete  # orbit creeps toward the section, never through

    def test_perturbed_orbit_z_variation_is_small(self, uz):
        eps = 1e-3
        pert = SpectralField3.from_modes({(1, 0, 0): (0.0, 0.0, eps), (0, 0, 1): (eps, 0.0, 0.0)}, 32)
        fld = uz + pert.leray()
        hits = poincare_hits(fld, ("y", 0.0), (0.3, 0.0, 0.9), 40, tol=1e-10)
        z = hits.points[~hits.degenerate, 2]
        assert hits.complete
        assert np.max(np.abs(z - z[0])) < 50 * eps  # O(eps) regression bound


class TestRotationVector:
    def test_shear_rotation_vector_closed_form(self, uz):
        z0 = 0.77
        traj = trace(uz, (0.1, 0.2, z0), 400.0, tol=1e-10, n_samples=2048)
        rd = rotation_vector(traj)
        assert rd.valid
        expected = np.array([np.cos(z0), np.sin(z0), 0.0]) / TAU
        assert np.max(np.abs(rd.rho - expected)) < 1e-9
        assert rd.convergence_index <= -8

    def test_fixed_point_has_zero_rotation(self):
        traj = trace(SpectralField3.zero(16), (0.5, 0.5, 0.5), 100.0)
        rd = rotation_vector(traj)
        assert np.all(rd.rho == 0.0)

    def test_doubling_time_leaves_rho_stable(self, uz):
        z0 = 1.37
        r1 = rotation_vector(trace(uz, (0.0, 0.0, z0), 300.0, n_samples=2048))
        r2 = rotation_vector(trace(uz, (0.0, 0.0, z0), 600.0, n_samples=4096))
        assert np.max(np.abs(r1.rho - r2.rho)) < 1e-6

    def test_chaotic_seed_fails_to_converge(self, uz_perturbed):
        # strong perturbation, seed in the resonant sea (regression values)
        traj = trace(uz_perturbed, (0.5, 0.5, 0.05), 800.0, tol=1e-8, n_samples=4096)
        rd = rotation_vector(traj)
        assert rd.convergence_index >= -2.5

    def test_short_trajectory_flagged(self, uz):
        traj = trace(uz, (0.0, 0.0, 1.0), 1.0, n_samples=16)
        rd = rotation_vector(traj)
        assert not rd.valid


class TestLyapunov:
    def test_shear_field_has_vanishing_exponent(self, uz):
        ld = lyapunov_max(uz, (0.1, 0.6, 0.9), 1000.0, tol=1e-8)
        assert ld.valid
        assert ld.estimate <= 0.01

    def test_zero_field(self):
        ld = lyapunov_max(SpectralField3.zero(16), (1.0, 1.0, 1.0), 100.0)
        assert abs(ld.estimate) < 1e-12

    def test_chaotic_seed_has_positive_exponent(self, uz_perturbed):
        ld1 = lyapunov_max(uz_perturbed, (0.5, 0.5, 0.05), 400.0, tol=1e-8)
        ld2 = lyapunov_max(uz_perturbed, (0.5, 0.5, 0.05), 800.0, tol=1e-8)
        assert ld1.estimate > 0.05
        assert ld2.estimate > 0.05
