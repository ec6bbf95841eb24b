"""Spectral calculus on T^3: operator identities and integral invariants."""

import numpy as np
import pytest

from toruslab.field import (
    ScalarField3,
    SpectralField3,
    NotExactError,
    grid_axis,
    inner,
    integral_invariants,
    shear_x_by_z,
)

from oracles import fd_curl, fd_divergence, quad_energy, quad_inner

N = 32


def shear_field(f, g, n=N, axis="z"):
    """u = f(c) d/da + g(c) d/db for the cyclic axis triple (a, b, c)."""
    x = grid_axis(n)
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    zero = np.zeros_like(X)
    if axis == "z":
        vals = np.stack([f(Z), g(Z), zero])
    elif axis == "x":
        vals = np.stack([zero, f(X), g(X)])
    else:
        vals = np.stack([g(Y), zero, f(Y)])
    return SpectralField3.from_grid(vals)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_scalar(n, kmax, rng):
    vals = rng.standard_normal((n, n, n))
    f = ScalarField3.from_grid(vals)
    from toruslab.field import _wavenumbers  # band-limit for clean derivatives

    kx, ky, kz = _wavenumbers(n)
    c = np.where(kx**2 + ky**2 + kz**2 <= kmax**2, f.coeffs, 0.0)
    return ScalarField3(c)


class TestOperatorIdentities:
    def test_curl_of_gradient_vanishes(self, rng):
        for _ in range(20):
            f = random_scalar(N, 8, rng)
            cg = f.gradient().curl()
            assert cg.sup_norm() <= 1e-10 * max(f.gradient().sup_norm(), 1.0)

    def test_divergence_of_curl_vanishes(self, rng):
        for _ in range(20):
            v = SpectralField3.random_divergence_free(N, 8, rng)
            w = SpectralField3(v.coeffs + 0.3 * rng.standard_normal((3, N, N, N)))
            assert w.curl().divergence().sup_norm() <= 1e-10 * max(w.sup_norm(), 1.0)

    def test_curl_matches_finite_differences(self):
        # u = sin(x) d/dy has curl cos(x) d/dz
        u = SpectralField3.from_modes({(1, 0, 0): (0.0, -1j, 0.0)}, N)
        x = grid_axis(N)
        assert np.allclose(u.values()[1], np.sin(x)[:, None, None] * np.ones((N, N, N)))
        w = u.curl()
        expected = np.zeros((3, N, N, N))
        expected[2] = np.cos(x)[:, None, None]
        assert np.max(np.abs(w.values() - expected)) < 1e-12
        fd = fd_curl(u.values())
        assert np.max(np.abs(fd - expected)) < 2e-3  # oracle at its own accuracy

    def test_divergence_closed_form(self):
        # div(cos(x) d/dx) = -sin(x)
        u = SpectralField3.from_modes({(1, 0, 0): (1.0, 0.0, 0.0)}, N)
        x = grid_axis(N)
        d = u.divergence().values()
        assert np.max(np.abs(d - (-np.sin(x))[:, None, None])) < 1e-12
        fd = fd_divergence(u.values())
        assert np.max(np.abs(fd - d)) < 2e-3

    def test_divergence_of_constant_field(self):
        u = SpectralField3.from_modes({(0, 0, 0): (1.0, 2.0, 3.0)}, N)
        assert u.divergence().sup_norm() == 0.0

    def test_shear_curl_closed_form(self):
        # u^z with profile (cos, sin): curl is -cos(z) d/dx - sin(z) d/dy
        u = shear_field(np.cos, np.sin)
        w = u.curl()
        assert np.max(np.abs(w.values() - (-u.values()))) < 1e-12


class TestInverseCurl:
    def test_roundtrip_on_random_fields(self, rng):
        for _ in range(10):
            v = SpectralField3.random_divergence_free(N, 8, rng, exact=False)
            c = v.coeffs.copy()
            c[:, 0, 0, 0] = rng.standard_normal(3)  # nonzero mean
            v = SpectralField3(c, divergence_free=True, _trust=True)
            w = v.curl()
            back = w.inverse_curl()
            demeaned = v.coeffs.copy()
            demeaned[:, 0, 0, 0] = 0.0
            err = np.sqrt(np.sum(np.abs(back.coeffs - demeaned) ** 2))
            assert err <= 1e-10 * v.l2_norm()
            fwd = back.curl()
            assert np.sqrt(np.sum(np.abs(fwd.coeffs - w.coeffs) ** 2)) <= 1e-10 * w.l2_norm()

    def test_inverse_of_shear_curl(self):
        # with (f, g) = (cos, sin): curl(u^z) = -u^z, so inverse_curl(-u^z) = u^z
        u = shear_field(np.cos, np.sin)
        v = (-u).inverse_curl()
        assert np.max(np.abs(v.values() - u.values())) < 1e-10

    def test_mean_mode_is_an_obstruction(self):
        u = SpectralField3.from_modes({(0, 0, 0): (1.0, 0.0, 0.0)}, N)
        with pytest.raises(NotExactError):
            u.inverse_curl()

    def test_divergent_field_rejected(self):
        u = SpectralField3.from_modes({(1, 0, 0): (1.0, 0.0, 0.0)}, N)
        with pytest.raises(NotExactError):
            u.inverse_curl()


class TestHelmholtz:
    def test_known_splitting_recovered(self):
        # V = grad(sin z) + sin(z) d/dx + (1, 0, 0)
        grad_part = SpectralField3.from_modes({(0, 0, 1): (0.0, 0.0, 1.0)}, N)  # cos z dz
        exact_part = SpectralField3.from_modes({(0, 0, 1): (-1j, 0.0, 0.0)}, N)  # sin z dx
        v = grad_part + exact_part + SpectralField3.from_modes({(0, 0, 0): (1.0, 0.0, 0.0)}, N)
        parts = v.helmholtz()
        assert np.max(np.abs(parts.gradient_part.values() - grad_part.values())) < 1e-12
        assert np.max(np.abs(parts.exact_part.values() - exact_part.values())) < 1e-12
        assert np.allclose(parts.harmonic_part, [1.0, 0.0, 0.0], atol=1e-14)

    def test_parts_orthogonal_and_reassemble(self, rng):
        for _ in range(10):
            c = rng.standard_normal((3, N, N, N)) * 0.2
            v = SpectralField3.from_grid(c)
            parts = v.helmholtz()
            norm2 = v.energy()
            assert abs(inner(parts.gradient_part, parts.exact_part)) <= 1e-10 * norm2
            harm = SpectralField3.from_modes({(0, 0, 0): tuple(parts.harmonic_part)}, N)
            assert abs(inner(parts.gradient_part, harm)) <= 1e-10 * norm2
            assert abs(inner(parts.exact_part, harm)) <= 1e-10 * norm2
            back = parts.reassemble()
            assert np.sqrt(np.sum(np.abs(back.coeffs - v.coeffs) ** 2)) <= 1e-12 * v.l2_norm()

    def test_divergence_free_field_has_no_gradient_part(self, rng):
        v = SpectralField3.random_divergence_free(N, 8, rng)
        parts = v.helmholtz()
        assert parts.gradient_part.l2_norm() <= 1e-12

    def test_constant_field_is_harmonic(self):
        v = SpectralField3.from_modes({(0, 0, 0): (2.0, -1.0, 0.5)}, N)
        parts = v.helmholtz()
        assert np.allclose(parts.harmonic_part, [2.0, -1.0, 0.5])
        assert parts.gradient_part.l2_norm() == 0.0
        assert parts.exact_part.l2_norm() == 0.0


class TestIntegralInvariants:
    def test_shear_energy_and_helicity(self):
        u = shear_field(np.cos, np.sin)
        e, h = integral_invariants(u)
        assert abs(e - 1.0) < 1e-12
        assert abs(h - (-1.0)) < 1e-12

    def test_zero_field(self):
        assert integral_invariants(SpectralField3.zero(N)) == (0.0, 0.0)

    def test_parseval_against_grid_quadrature(self, rng):
        for _ in range(5):
            v = SpectralField3.random_divergence_free(N, 8, rng)
            vals = v.values()
            assert abs(v.energy() - quad_energy(vals)) < 1e-12 * max(v.energy(), 1.0)
            h = quad_inner(vals, v.curl().values())
            assert abs(v.helicity() - h) < 1e-10 * max(abs(v.helicity()), 1.0)

    def test_helicity_flips_under_mirror(self, rng):
        for _ in range(5):
            v = SpectralField3.random_divergence_free(N, 8, rng)
            m = v.reflect_z()
            # reflected field is a genuine field: quadrature oracle agrees
            hm = quad_inner(m.values(), m.curl().values())
            assert abs(m.helicity() - hm) < 1e-10
            assert abs(m.helicity() + v.helicity()) < 1e-10
            assert abs(m.energy() - v.energy()) < 1e-12

    def test_schwartz_inequality_for_exact_fields(self, rng):
        # |H(u)| <= E(curl u) on T^3, where the smallest nonzero |k| is 1
        for _ in range(100):
            u = SpectralField3.random_divergence_free(N, 6, rng, exact=True)
            h = u.helicity()
            e_curl = u.curl().energy()
            assert abs(h) <= e_curl * (1.0 + 1e-12)

    def test_invariants_under_translation(self, rng):
        v = SpectralField3.random_divergence_free(N, 8, rng)
        shift = rng.uniform(0, 2 * np.pi, size=3)
        t = v.translate(shift)
        assert abs(t.energy() - v.energy()) < 1e-12
        assert abs(t.helicity() - v.helicity()) < 1e-12
        rep = t.exactness_check(tol=1e-10)
        assert rep.exact


class TestExactness:
    def test_curl_is_always_exact(self, rng):
        w = SpectralField3.random_divergence_free(N, 8, rng, exact=False)
        c = w.coeffs.copy()
        c[:, 0, 0, 0] = [0.3, -0.2, 0.9]
        w = SpectralField3(c, divergence_free=True, _trust=True)
        assert w.curl().exactness_check(tol=1e-10).exact

    def test_constant_field_fails_with_diagnostic(self):
        v = SpectralField3.from_modes({(0, 0, 0): (1.0, 0.0, 0.0)}, N)
        rep = v.exactness_check(tol=1e-10)
        assert not rep.exact
        assert abs(rep.mean_components[0] - 1.0) < 1e-14
        assert rep.flux[0] > 0.5  # nonzero flux through {x = const}

    def test_zero_mean_shear_is_exact(self):
        u = shear_field(np.cos, np.sin)
        assert u.exactness_check(tol=1e-10).exact


class TestEvaluate:
    def test_shear_evaluation(self, rng):
        u = shear_field(np.cos, np.sin)
        pts = rng.uniform(0, 2 * np.pi, size=(50, 3))
        vals = u.evaluate(pts)
        expected = np.stack([np.cos(pts[:, 2]), np.sin(pts[:, 2]), np.zeros(50)], axis=1)
        assert np.max(np.abs(vals - expected)) < 1e-12

    def test_zero_field(self):
        assert np.all(SpectralField3.zero(N).evaluate([1.0, 2.0, 3.0]) == 0.0)

    def test_single_mode_closed_form(self):
        u = SpectralField3.from_modes({(1, 0, 0): (0.0, -1j, 0.0)}, N)  # sin(x) d/dy
        v = u.evaluate([np.pi / 2, 0.0, 0.0])
        assert np.allclose(v, [0.0, 1.0, 0.0], atol=1e-13)

    def test_matches_grid_values(self, rng):
        v = SpectralField3.random_divergence_free(16, 5, rng)
        x = grid_axis(16)
        pts = np.array([[x[i], x[j], x[k]] for i, j, k in [(0, 1, 2), (5, 7, 3), (15, 0, 9)]])
        vals = v.evaluate(pts)
        g = v.values()
        expected = np.stack([g[:, 0, 1, 2], g[:, 5, 7, 3], g[:, 15, 0, 9]])
        assert np.max(np.abs(vals - expected)) < 1e-12


class TestConstruction:
    def test_conjugate_symmetry_enforced(self, rng):
        c = rng.standard_normal((3, N, N, N)) + 1j * rng.standard_normal((3, N, N, N))
        v = SpectralField3(c)
        vals_complex = np.fft.ifftn(v.coeffs, axes=(1, 2, 3)) * N**3
        assert np.max(np.abs(vals_complex.imag)) < 1e-10

    def test_divergence_cleaning_records_norm(self, rng):
        vals = rng.standard_normal((3, N, N, N))
        v = SpectralField3.from_grid(vals, clean=True)
        assert v.is_divergence_free
        assert v.divergence().sup_norm() < 1e-12
        assert v.cleaning_report["divergence_norm"] > 0.01

    def test_resolution_mismatch_raises(self, rng):
        a = SpectralField3.zero(16)
        b = SpectralField3.zero(32)
        with pytest.raises(Exception):
            _ = a + b

    def test_sobolev_norms_are_monotone_in_order(self, rng):
        v = SpectralField3.random_divergence_free(N, 8, rng)
        assert v.sobolev_norm(2.0) >= v.sobolev_norm(1.0) >= v.sobolev_norm(0.0)
        assert abs(v.sobolev_norm(0.0) - v.l2_norm()) < 1e-12


class TestShearPushforward:
    def test_pushforward_is_the_jacobian_action(self, rng):
        v = SpectralField3.random_divergence_free(N, 6, rng)
        amp = 0.4
        w = shear_x_by_z(v, amplitude=amp)
        assert w.is_divergence_free
        pts = rng.uniform(0, 2 * np.pi, size=(20, 3))
        vv = v.evaluate(pts)
        mapped = pts.copy()
        mapped[:, 0] += amp * np.sin(pts[:, 2])
        expected = vv.copy()
        expected[:, 0] += amp * np.cos(pts[:, 2]) * vv[:, 2]
        assert np.max(np.abs(w.evaluate(mapped) - expected)) < 1e-6

    def test_pushforward_preserves_vorticity_helicity(self, rng):
        # the helicity of a transported vorticity field, computed through the
        # inverse curl, is invariant under volume-preserving maps
        v = SpectralField3.random_divergence_free(N, 5, rng, exact=True)
        w = v.curl()
        h_before = inner(w.inverse_curl(), w)
        moved = shear_x_by_z(w, amplitude=0.3)
        h_after = inner(moved.inverse_curl(tol=1e-6), moved)
        assert abs(h_after - h_before) < 1e-5 * max(abs(h_before), 1.0)

    def test_pushforward_of_z_shear_is_identity(self):
        u = shear_field(np.cos, np.sin)
        w = shear_x_by_z(u, amplitude=0.7)
        assert np.max(np.abs(w.values() - u.values())) < 1e-10
