"""Closed-form steady states of ideal flow, with residual verifiers.

Two families are provided:

* shear fields on the flat 3-torus, u = f(c) d/da + g(c) d/db for a cyclic
  axis triple (a, b, c), which solve the steady Euler equation with
  Bernoulli function (f^2 + g^2)/2 and carry invariant tori {c = const};
* combinations u = f(F) u1 + g(F) u2 of the two curl eigenfields on the
  round 3-sphere, verified pointwise in ambient R^4 coordinates.

The module also exposes the Wronskian/twist profiling used by the KAM
experiments to certify nondegeneracy of a profile on a subinterval.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .field import (
    ScalarField3,
    SpectralField3,
    cross_product_field,
    gradient,
    grid_axis,
    lie_bracket,
)

__all__ = [
    "TubeProfile",
    "TwistData",
    "SphereField",
    "make_shear_field",
    "make_hopf_steady",
    "steady_residuals",
    "twist_profile",
    "named_profile",
    "PROFILE_NAMES",
]


class TubeProfile:
    """Pair of profile functions (f, g) with analytic derivative access.

    Profiles drive both the shear steady states (as functions of the height
    coordinate) and the annulus twist maps.  Derivatives must be consistent
    with the values; `check_derivatives` verifies them against central
    differences.
    """

    def __init__(self, f: Callable, g: Callable, fp: Callable, gp: Callable, name: str = "custom"):
        self.f = f
        self.g = g
        self.fp = fp
        self.gp = gp
        self.name = name

    @classmethod
    def from_fourier(cls, f_coeffs, g_coeffs, name: str = "fourier") -> "TubeProfile":
        """Build 2 pi periodic profiles from cosine/sine coefficient pairs.

        Each argument is a sequence [(k, a_k, b_k), ...] representing
        sum_k a_k cos(k z) + b_k sin(k z); k = 0 contributes a constant a_0.
        """

        def series(coeffs):
            terms = [(int(k), float(a), float(b)) for k, a, b in coeffs]

            def val(z):
                z = np.asarray(z, dtype=float)
                out = np.zeros_like(z)
                for k, a, b in terms:
                    out = out + a * np.cos(k * z) + b * np.sin(k * z)
                return out

            def der(z):
                z = np.asarray(z, dtype=float)
                out = np.zeros_like(z)
                for k, a, b in terms:
                    out = out + k * (-a * np.sin(k * z) + b * np.cos(k * z))
                return out

            return val, der

        f, fp = series(f_coeffs)
        g, gp = series(g_coeffs)
        return cls(f, g, fp, gp, name=name)

    def wronskian(self, z):
        """W(z) = f'(z) g(z) - f(z) g'(z), the twist density."""
        z = np.asarray(z, dtype=float)
        return self.fp(z) * self.g(z) - self.f(z) * self.gp(z)

    def check_derivatives(self, lo=-np.pi, hi=np.pi, n=100, h=1e-6, tol=1e-8) -> float:
        z = np.linspace(lo + h, hi - h, n)
        dfd = (self.f(z + h) - self.f(z - h)) / (2 * h)
        dgd = (self.g(z + h) - self.g(z - h)) / (2 * h)
        err = max(np.max(np.abs(dfd - self.fp(z))), np.max(np.abs(dgd - self.gp(z))))
        if err > tol:
            raise ValueError(f"profile derivatives inconsistent with finite differences: {err:.2e}")
        return float(err)


PROFILE_NAMES = ("cos-sin", "sin-offset")


def named_profile(name: str) -> TubeProfile:
    if name == "cos-sin":
        return TubeProfile(np.cos, np.sin, lambda z: -np.sin(z), np.cos, name=name)
    if name == "sin-offset":
        return TubeProfile(
            np.sin, lambda z: 2.0 + np.cos(z), np.cos, lambda z: -np.sin(z), name=name
        )
    raise KeyError(f"unknown profile {name!r}; known: {PROFILE_NAMES}")


@dataclass(frozen=True)
class TwistData:
    z: np.ndarray
    wronskian: np.ndarray
    tau: float


def twist_profile(profile: TubeProfile, lo: float, hi: float, n: int = 2001) -> TwistData:
    """Sample the Wronskian on [lo, hi]; tau = inf |W| certifies the twist there."""
    z = np.linspace(lo, hi, n)
    w = profile.wronskian(z)
    return TwistData(z=z, wronskian=w, tau=float(np.min(np.abs(w))))


_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


def make_shear_field(profile: TubeProfile, axis: str = "z", n: int = 64) -> SpectralField3:
    """Shear steady state u = f(c) d/da + g(c) d/db on the n^3 grid.

    The axes (a, b, c) are the cyclic rotation starting after `axis`, e.g.
    axis="z" gives f(z) d/dx + g(z) d/dy.  Invariant tori are the planes
    {c = const}, homologous to the coordinate 2-torus dual to `axis`.
    """
    c = _AXIS_INDEX[axis]
    a, b = (c + 1) % 3, (c + 2) % 3
    coord = grid_axis(n)
    vals = np.zeros((3, n, n, n))
    shape = [1, 1, 1]
    shape[c] = n
    prof_f = np.asarray(profile.f(coord)).reshape(shape)
    prof_g = np.asarray(profile.g(coord)).reshape(shape)
    vals[a] = np.broadcast_to(prof_f, (n, n, n))
    vals[b] = np.broadcast_to(prof_g, (n, n, n))
    fld = SpectralField3.from_grid(vals)
    fld._divfree = True  # components do not depend on their own coordinate
    return fld


def steady_residuals(u: SpectralField3, bernoulli: Callable | None = None) -> tuple[float, float]:
    """Residuals of the steady Euler identities for a divergence-free u.

    Returns (bernoulli_residual, commutator_norm) where the first is the L2
    norm of u x curl u - grad(alpha), with alpha either supplied as a
    callable of the grid coordinates or fitted by least squares, and the
    second is the L2 norm of the bracket [u, curl u].  Both vanish for a
    steady solution.
    """
    w = u.curl()
    p = cross_product_field(u, w)
    if bernoulli is not None:
        x = grid_axis(u.n)
        X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
        alpha = ScalarField3.from_grid(np.asarray(bernoulli(X, Y, Z), dtype=float))
    else:
        # the optimal grad(alpha) is the gradient part of u x curl u, so the
        # residual is what Helmholtz leaves over (exact plus harmonic parts)
        parts = p.helmholtz()
        residual = np.sqrt(max(p.energy() - parts.gradient_part.energy(), 0.0))
        return float(residual), lie_bracket(u, w).l2_norm()
    r = p - gradient(alpha)
    return r.l2_norm(), lie_bracket(u, w).l2_norm()


# ---------------------------------------------------------------------------
# Round 3-sphere: curl eigenfields and their steady combinations
# ---------------------------------------------------------------------------

_EPS4 = np.zeros((4, 4, 4, 4))
for _perm in itertools.permutations(range(4)):
    _inv = sum(1 for _i in range(4) for _j in range(_i + 1, 4) if _perm[_i] > _perm[_j])
    _EPS4[_perm] = -1.0 if _inv % 2 else 1.0


def hopf_u1(p: np.ndarray) -> np.ndarray:
    """First curl eigenfield (eigenvalue +2) in ambient coordinates."""
    x, y, z, w = np.moveaxis(np.asarray(p, dtype=float), -1, 0)
    return np.stack([-y, x, w, -z], axis=-1)


def hopf_u2(p: np.ndarray) -> np.ndarray:
    """Second curl eigenfield (eigenvalue -2) in ambient coordinates."""
    x, y, z, w = np.moveaxis(np.asarray(p, dtype=float), -1, 0)
    return np.stack([-y, x, -w, z], axis=-1)


def first_integral_f(p: np.ndarray) -> np.ndarray:
    """F = x^2 + y^2, a first integral of both eigenfields."""
    p = np.asarray(p, dtype=float)
    return p[..., 0] ** 2 + p[..., 1] ** 2


def sphere_gradient_f(p: np.ndarray) -> np.ndarray:
    """Intrinsic gradient of F on the unit sphere (ambient, tangent)."""
    p = np.asarray(p, dtype=float)
    amb = np.zeros_like(p)
    amb[..., 0] = 2 * p[..., 0]
    amb[..., 1] = 2 * p[..., 1]
    radial = np.sum(amb * p, axis=-1, keepdims=True)
    return amb - radial * p


def sphere_cross(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Cross product of tangent vectors at p on the unit 3-sphere.

    Computed as the 4d Levi-Civita contraction with the outward normal;
    the orientation is fixed so that u1 x u2 = -grad F.
    """
    return np.einsum("ijkl,...j,...k,...l->...i", _EPS4, p, a, b)


class SphereField:
    """Steady combination u = f(F) u1 + g(F) u2 on the round 3-sphere.

    Evaluation works at arbitrary unit 4-vectors.  The vorticity and the
    Bernoulli density are available in closed form; `vorticity_leibniz`
    recomputes the vorticity independently from the eigenfield relations
    plus the product rule, as a cross-check.
    """

    def __init__(self, f: Callable, g: Callable, fp: Callable, gp: Callable):
        self.f = f
        self.g = g
        self.fp = fp
        self.gp = gp

    @classmethod
    def constant(cls, cf: float, cg: float) -> "SphereField":
        zero = lambda F: np.zeros_like(np.asarray(F, dtype=float))
        return cls(
            lambda F: np.full_like(np.asarray(F, dtype=float), cf),
            lambda F: np.full_like(np.asarray(F, dtype=float), cg),
            zero,
            zero,
        )

    def velocity(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        F = first_integral_f(p)
        return self.f(F)[..., None] * hopf_u1(p) + self.g(F)[..., None] * hopf_u2(p)

    def vorticity(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        F = first_integral_f(p)
        cf = self.fp(F) * (2 * F - 1) + 2 * self.f(F) + self.gp(F)
        cg = self.gp(F) * (2 * F - 1) + 2 * self.g(F) + self.fp(F)
        return cf[..., None] * hopf_u1(p) - cg[..., None] * hopf_u2(p)

    def vorticity_leibniz(self, p: np.ndarray) -> np.ndarray:
        """curl(f u1 + g u2) = 2f u1 - 2g u2 + f' gradF x u1 + g' gradF x u2."""
        p = np.asarray(p, dtype=float)
        F = first_integral_f(p)
        gF = sphere_gradient_f(p)
        out = 2 * self.f(F)[..., None] * hopf_u1(p) - 2 * self.g(F)[..., None] * hopf_u2(p)
        out = out + self.fp(F)[..., None] * sphere_cross(gF, hopf_u1(p), p)
        out = out + self.gp(F)[..., None] * sphere_cross(gF, hopf_u2(p), p)
        return out

    def bernoulli_density(self, F: np.ndarray) -> np.ndarray:
        """H(F) with u x curl u = H(F) grad F."""
        F = np.asarray(F, dtype=float)
        f, g, fp, gp = self.f(F), self.g(F), self.fp(F), self.gp(F)
        return f * fp + g * gp + 4 * f * g + (2 * F - 1) * (f * gp + g * fp)

    def tangency_error(self, p: np.ndarray) -> float:
        p = np.asarray(p, dtype=float)
        return float(np.max(np.abs(np.sum(self.velocity(p) * p, axis=-1))))


def make_hopf_steady(f, g, fp=None, gp=None) -> SphereField:
    """Steady state on the 3-sphere from coefficient functions of F in [0, 1].

    f and g may be floats (constant coefficients) or callables with their
    derivatives supplied.
    """
    if np.isscalar(f) and np.isscalar(g):
        return SphereField.constant(float(f), float(g))
    if fp is None or gp is None:
        raise ValueError("callable coefficients require their derivatives")
    return SphereField(f, g, fp, gp)


def random_sphere_points(n: int, rng: np.random.Generator) -> np.ndarray:
    p = rng.standard_normal((n, 4))
    return p / np.linalg.norm(p, axis=1, keepdims=True)
