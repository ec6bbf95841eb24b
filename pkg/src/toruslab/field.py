"""Spectral vector calculus on the flat 3-torus.

Fields live on T^3 = (R / 2 pi Z)^3 and are stored as truncated Fourier
coefficient arrays in numpy fftn layout.  The volume form is normalized so
that the total volume of the torus is 1, which makes Parseval sums equal to
the corresponding integrals: for V(x) = sum_k c_k exp(i k.x),

    integral |V|^2 dmu = sum_k |c_k|^2 .

All operators (curl, divergence, Helmholtz projection, inverse curl) act
mode by mode and are exact on the retained band.  The Nyquist planes are
kept identically zero so that conjugate symmetry and the skew-adjointness
of differentiation hold without special cases.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

TAU = 2.0 * np.pi

__all__ = [
    "SpectralField3",
    "ScalarField3",
    "HelmholtzParts",
    "ExactnessReport",
    "SparseModes",
    "FieldShapeError",
    "NotExactError",
    "curl",
    "divergence",
    "gradient",
    "helmholtz",
    "inverse_curl",
    "integral_invariants",
    "exactness_check",
    "evaluate",
    "inner",
    "shear_x_by_z",
    "cross_product_field",
    "directional_derivative",
    "lie_bracket",
    "grid_axis",
]


class FieldShapeError(ValueError):
    """Internal buffers disagree on resolution or layout."""


class NotExactError(ValueError):
    """Operation requires an exact (zero-mean, divergence-free) field."""


@lru_cache(maxsize=8)
def _wavenumbers(n: int):
    """Integer wavenumber grids (kx, ky, kz), each shaped (n, n, n)."""
    k1 = sfft.fftfreq(n, d=1.0 / n)
    kx, ky, kz = np.meshgrid(k1, k1, k1, indexing="ij")
    return kx, ky, kz


@lru_cache(maxsize=8)
def _ksq_safe(n: int) -> np.ndarray:
    kx, ky, kz = _wavenumbers(n)
    k2 = kx**2 + ky**2 + kz**2
    k2s = k2.copy()
    k2s[0, 0, 0] = 1.0
    return k2s


@lru_cache(maxsize=8)
def _nyquist_mask(n: int) -> np.ndarray:
    """Boolean mask of modes retained (Nyquist planes excluded for even n)."""
    kx, ky, kz = _wavenumbers(n)
    if n % 2 == 0:
        half = n // 2
        return (np.abs(kx) < half) & (np.abs(ky) < half) & (np.abs(kz) < half)
    return np.ones((n, n, n), dtype=bool)


def _conj_reverse(c: np.ndarray) -> np.ndarray:
    """conj(c) sampled at -k, in the same fftn layout."""
    out = np.conj(c[..., ::-1, ::-1, ::-1])
    return np.roll(out, 1, axis=(-3, -2, -1))


def _hermitize(c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + _conj_reverse(c))


@dataclass(frozen=True)
class ExactnessReport:
    """Diagnostics from an exactness test.

    ``flux`` holds, per axis, the largest magnitude of the flux of the field
    through the coordinate 2-torus normal to that axis, scanned over section
    positions.  For a divergence-free field these reduce to the mean
    components, but they are measured independently here.
    """

    exact: bool
    max_divergence: float
    mean_components: np.ndarray
    flux: np.ndarray
    tol: float

    def __bool__(self) -> bool:
        return self.exact


@dataclass(frozen=True)
class SparseModes:
    """Half-spectrum mode list for fast pointwise evaluation.

    The represented field is  c0 + sum_m 2 Re[(cre_m + i cim_m) exp(i k_m.x)]
    where each k_m is taken from one half of the lattice only.
    """

    kvecs: np.ndarray  # (M, 3) float64, integer-valued
    cre: np.ndarray  # (M, 3)
    cim: np.ndarray  # (M, 3)
    c0: np.ndarray  # (3,)


class ScalarField3:
    """Scalar field on T^3 in the same spectral layout as SpectralField3."""

    def __init__(self, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim != 3 or len(set(coeffs.shape)) != 1:
            raise FieldShapeError(f"expected cubic (n,n,n) coefficients, got {coeffs.shape}")
        self._c = coeffs
        self._c.setflags(write=False)

    @classmethod
    def from_grid(cls, values: np.ndarray) -> "ScalarField3":
        values = np.asarray(values, dtype=np.float64)
        n = values.shape[0]
        c = sfft.fftn(values, workers=-1) / n**3
        c = np.where(_nyquist_mask(n), c, 0.0)
        return cls(_hermitize(c))

    @property
    def n(self) -> int:
        return self._c.shape[0]

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    def values(self) -> np.ndarray:
        v = sfft.ifftn(self._c, workers=-1) * self.n**3
        return v.real

    def mean(self) -> float:
        return float(self._c[0, 0, 0].real)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self._c) ** 2)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values())))

    def gradient(self) -> "SpectralField3":
        kx, ky, kz = _wavenumbers(self.n)
        g = np.stack([1j * kx * self._c, 1j * ky * self._c, 1j * kz * self._c])
        return SpectralField3(g, divergence_free=False, _trust=True)


class SpectralField3:
    """Band-limited vector field on the flat 3-torus.

    Coefficients are stored as a complex array of shape (3, n, n, n) in
    numpy fftn mode ordering.  Conjugate symmetry (real physical values) is
    enforced at construction, Nyquist planes are zeroed, and optionally the
    field is projected onto its divergence-free part with the discarded norm
    recorded in ``cleaning_report``.
    """

    __slots__ = ("_c", "_divfree", "tag", "cleaning_report")

    def __init__(
        self,
        coeffs: np.ndarray,
        divergence_free: bool = False,
        clean: bool = False,
        tag: str = "fourier-2pi-unitvol",
        _trust: bool = False,
    ):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim != 4 or coeffs.shape[0] != 3 or len(set(coeffs.shape[1:])) != 1:
            raise FieldShapeError(f"expected (3,n,n,n) coefficients, got {coeffs.shape}")
        n = coeffs.shape[1]
        report = {}
        if not _trust:
            raw = coeffs
            coeffs = np.where(_nyquist_mask(n), coeffs, 0.0)
            coeffs = _hermitize(coeffs)
            report["symmetrization_norm"] = float(
                np.sqrt(np.sum(np.abs(coeffs - raw) ** 2))
            )
        if clean:
            cleaned = _leray(coeffs)
            report["divergence_norm"] = float(
                np.sqrt(np.sum(np.abs(coeffs - cleaned) ** 2))
            )
            coeffs = cleaned
            divergence_free = True
        self._c = coeffs
        self._c.setflags(write=False)
        self._divfree = bool(divergence_free)
        self.tag = tag
        self.cleaning_report = report

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "SpectralField3":
        return cls(np.zeros((3, n, n, n), dtype=np.complex128), divergence_free=True, _trust=True)

    @classmethod
    def from_grid(cls, values: np.ndarray, clean: bool = False) -> "SpectralField3":
        """Build from real physical values sampled on the uniform n^3 grid."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 4 or values.shape[0] != 3:
            raise FieldShapeError(f"expected (3,n,n,n) grid values, got {values.shape}")
        n = values.shape[1]
        c = sfft.fftn(values, axes=(1, 2, 3), workers=-1) / n**3
        return cls(c, clean=clean)

    @classmethod
    def from_callable(cls, fn, n: int, clean: bool = False) -> "SpectralField3":
        """Sample a callable fn(x, y, z) -> (3, ...) on the grid and transform."""
        x = grid_axis(n)
        X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
        vals = np.asarray(fn(X, Y, Z), dtype=np.float64)
        return cls.from_grid(vals, clean=clean)

    @classmethod
    def from_modes(cls, modes: dict, n: int, divergence_free: bool | None = None) -> "SpectralField3":
        """Build from a {(kx,ky,kz): (vx,vy,vz)} dictionary.

        Each entry contributes c_k = v/2 and the conjugate at -k, so a real
        cosine mode cos(k.x) e_j is written as {k: (..,1,..)}.  An entry at
        k = 0 contributes its real part directly.
        """
        c = np.zeros((3, n, n, n), dtype=np.complex128)
        for k, v in modes.items():
            k = tuple(int(ki) for ki in k)
            v = np.asarray(v, dtype=np.complex128)
            if k == (0, 0, 0):
                c[:, 0, 0, 0] += v.real
                continue
            idx = tuple(ki % n for ki in k)
            cidx = tuple((-ki) % n for ki in k)
            c[(slice(None), *idx)] += 0.5 * v
            c[(slice(None), *cidx)] += 0.5 * np.conj(v)
        fld = cls(c)
        if divergence_free is None:
            divergence_free = fld.divergence().l2_norm() <= 1e-13 * max(fld.l2_norm(), 1e-300)
        fld._divfree = bool(divergence_free)
        return fld

    @classmethod
    def random_divergence_free(
        cls, n: int, kmax: int, rng: np.random.Generator, exact: bool = True, scale: float = 1.0
    ) -> "SpectralField3":
        """Random band-limited divergence-free field with unit L2 norm (times scale)."""
        vals = rng.standard_normal((3, n, n, n))
        c = sfft.fftn(vals, axes=(1, 2, 3), workers=-1) / n**3
        kx, ky, kz = _wavenumbers(n)
        band = (kx**2 + ky**2 + kz**2) <= kmax**2
        c = np.where(band & _nyquist_mask(n), c, 0.0)
        c = _leray(_hermitize(c))
        if exact:
            c[:, 0, 0, 0] = 0.0
        nrm = np.sqrt(np.sum(np.abs(c) ** 2))
        if nrm > 0:
            c *= scale / nrm
        return cls(c, divergence_free=True, _trust=True)

    # -- basic properties --------------------------------------------------

    @property
    def n(self) -> int:
        return self._c.shape[1]

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def is_divergence_free(self) -> bool:
        return self._divfree

    def values(self) -> np.ndarray:
        v = sfft.ifftn(self._c, axes=(1, 2, 3), workers=-1) * self.n**3
        return v.real

    def mean(self) -> np.ndarray:
        return self._c[:, 0, 0, 0].real.copy()

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self._c) ** 2)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values())))

    def sobolev_norm(self, order: float) -> float:
        kx, ky, kz = _wavenumbers(self.n)
        w = (1.0 + kx**2 + ky**2 + kz**2) ** order
        return float(np.sqrt(np.sum(w * np.abs(self._c) ** 2)))

    def max_wavenumber(self) -> int:
        kx, ky, kz = _wavenumbers(self.n)
        kk = np.maximum(np.abs(kx), np.maximum(np.abs(ky), np.abs(kz)))
        nz = np.any(self._c != 0, axis=0)
        return int(kk[nz].max()) if nz.any() else 0

    # -- arithmetic ---------------------------------------------------------

    def _like(self, coeffs: np.ndarray, divfree: bool) -> "SpectralField3":
        return SpectralField3(coeffs, divergence_free=divfree, tag=self.tag, _trust=True)

    def __add__(self, other: "SpectralField3") -> "SpectralField3":
        if self.n != other.n:
            raise FieldShapeError(f"resolution mismatch: {self.n} vs {other.n}")
        return self._like(self._c + other._c, self._divfree and other._divfree)

    def __sub__(self, other: "SpectralField3") -> "SpectralField3":
        if self.n != other.n:
            raise FieldShapeError(f"resolution mismatch: {self.n} vs {other.n}")
        return self._like(self._c - other._c, self._divfree and other._divfree)

    def __mul__(self, a: float) -> "SpectralField3":
        return self._like(self._c * float(a), self._divfree)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField3":
        return self._like(-self._c, self._divfree)

    # -- calculus ------------------------------------------------------------

    def curl(self) -> "SpectralField3":
        kx, ky, kz = _wavenumbers(self.n)
        cx, cy, cz = self._c
        out = np.stack(
            [
                1j * (ky * cz - kz * cy),
                1j * (kz * cx - kx * cz),
                1j * (kx * cy - ky * cx),
            ]
        )
        return self._like(out, True)

    def divergence(self) -> ScalarField3:
        kx, ky, kz = _wavenumbers(self.n)
        return ScalarField3(1j * (kx * self._c[0] + ky * self._c[1] + kz * self._c[2]))

    def helmholtz(self) -> "HelmholtzParts":
        kx, ky, kz = _wavenumbers(self.n)
        k2s = _ksq_safe(self.n)
        kdotc = kx * self._c[0] + ky * self._c[1] + kz * self._c[2]
        grad = np.stack([kx, ky, kz]) * (kdotc / k2s)
        grad[:, 0, 0, 0] = 0.0
        harmonic = self._c[:, 0, 0, 0].real.copy()
        exact = self._c - grad
        exact[:, 0, 0, 0] = 0.0
        return HelmholtzParts(
            gradient_part=self._like(grad, False),
            exact_part=self._like(exact, self._divfree or None or _is_divfree(exact)),
            harmonic_part=harmonic,
        )

    def inverse_curl(self, tol: float = 1e-10) -> "SpectralField3":
        """Zero-mean divergence-free V with curl V equal to this field.

        Defined only on exact fields: the mean mode and any divergence are
        obstructions, so they raise NotExactError beyond ``tol`` (relative
        to the field norm).
        """
        scale = max(self.l2_norm(), 1e-300)
        mean = np.abs(self._c[:, 0, 0, 0]).max()
        if mean > tol * scale:
            raise NotExactError(
                f"field has nonzero mean {mean:.3e} (harmonic obstruction to inversion)"
            )
        div = self.divergence().l2_norm()
        if div > tol * scale:
            raise NotExactError(f"field has nonzero divergence {div:.3e}")
        kx, ky, kz = _wavenumbers(self.n)
        k2s = _ksq_safe(self.n)
        wx, wy, wz = self._c
        out = np.stack(
            [
                1j * (ky * wz - kz * wy) / k2s,
                1j * (kz * wx - kx * wz) / k2s,
                1j * (kx * wy - ky * wx) / k2s,
            ]
        )
        out[:, 0, 0, 0] = 0.0
        return self._like(out, True)

    def leray(self) -> "SpectralField3":
        """Projection onto the divergence-free part (mean mode kept)."""
        return self._like(_leray(self._c.copy()), True)

    def energy(self) -> float:
        return float(np.sum(np.abs(self._c) ** 2))

    def helicity(self) -> float:
        w = self.curl()
        return float(np.sum(np.conj(self._c) * w._c).real)

    def exactness_check(self, tol: float = 1e-10, n_sections: int = 8) -> ExactnessReport:
        """Test exactness: divergence, mean components, and section fluxes.

        The flux of the field through the coordinate 2-torus {x_a = s} is
        scanned over ``n_sections`` positions s per axis; for an exact field
        all fluxes vanish.
        """
        max_div = self.divergence().sup_norm()
        mean = self.mean()
        flux = np.zeros(3)
        s = TAU * np.arange(n_sections) / n_sections
        for axis in range(3):
            # average of the normal component over the section = sum of
            # coefficients with zero transverse wavenumbers, as a Fourier
            # series in the section position
            line = _axis_line(self._c[axis], axis)
            n = self.n
            kline = sfft.fftfreq(n, d=1.0 / n)
            vals = line @ np.exp(1j * np.outer(kline, s))
            flux[axis] = np.max(np.abs(vals.real)) if vals.size else 0.0
        ok = (max_div <= tol) and (np.abs(mean).max() <= tol) and (flux.max() <= tol)
        return ExactnessReport(
            exact=bool(ok),
            max_divergence=float(max_div),
            mean_components=mean,
            flux=flux,
            tol=float(tol),
        )

    # -- pointwise evaluation -------------------------------------------------

    def sparse_modes(self, rel_tol: float = 0.0) -> SparseModes:
        """Half-spectrum mode list, discarding modes below rel_tol * max |c_k|."""
        n = self.n
        kx, ky, kz = _wavenumbers(n)
        half = (kz > 0) | ((kz == 0) & (ky > 0)) | ((kz == 0) & (ky == 0) & (kx > 0))
        mag = np.sqrt(np.sum(np.abs(self._c) ** 2, axis=0))
        cut = rel_tol * mag.max() if mag.max() > 0 else 0.0
        sel = half & (mag > max(cut, 0.0)) & (mag > 0)
        kv = np.stack([kx[sel], ky[sel], kz[sel]], axis=1).astype(np.float64)
        cs = self._c[:, sel].T
        return SparseModes(
            kvecs=np.ascontiguousarray(kv),
            cre=np.ascontiguousarray(cs.real),
            cim=np.ascontiguousarray(cs.imag),
            c0=self._c[:, 0, 0, 0].real.copy(),
        )

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Exact Fourier-sum evaluation at arbitrary points, shape (..., 3)."""
        pts = np.asarray(points, dtype=np.float64)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        sm = self.sparse_modes(rel_tol=0.0)
        phases = np.exp(1j * (pts @ sm.kvecs.T))
        chalf = sm.cre + 1j * sm.cim
        out = sm.c0 + 2.0 * (phases @ chalf).real
        return out[0] if single else out.reshape(*points.shape[:-1], 3)

    # -- symmetries --------------------------------------------------------------

    def translate(self, shift) -> "SpectralField3":
        """Field x -> V(x + shift); integrals are invariant under this."""
        shift = np.asarray(shift, dtype=np.float64)
        kx, ky, kz = _wavenumbers(self.n)
        phase = np.exp(1j * (kx * shift[0] + ky * shift[1] + kz * shift[2]))
        return self._like(self._c * phase, self._divfree)

    def reflect_z(self) -> "SpectralField3":
        """Mirror z -> -z with the z-component negated (helicity flips sign)."""
        flipped = np.roll(self._c[..., ::-1], 1, axis=-1)
        out = flipped.copy()
        out[2] = -out[2]
        return self._like(out, self._divfree)


@dataclass(frozen=True)
class HelmholtzParts:
    """Unique splitting V = gradient_part + exact_part + harmonic_part.

    On the flat torus the harmonic fields are the constants, carried by the
    k = 0 mode.  The three parts are pairwise L2-orthogonal.
    """

    gradient_part: SpectralField3
    exact_part: SpectralField3
    harmonic_part: np.ndarray

    def reassemble(self) -> SpectralField3:
        c = (self.gradient_part.coeffs + self.exact_part.coeffs).copy()
        c[:, 0, 0, 0] += self.harmonic_part
        return SpectralField3(c, _trust=True)


# -- module-level operation aliases -------------------------------------------


def _leray(c: np.ndarray) -> np.ndarray:
    n = c.shape[1]
    kx, ky, kz = _wavenumbers(n)
    k2s = _ksq_safe(n)
    kdotc = kx * c[0] + ky * c[1] + kz * c[2]
    out = c - np.stack([kx, ky, kz]) * (kdotc / k2s)
    return out


def _is_divfree(c: np.ndarray) -> bool:
    n = c.shape[1]
    kx, ky, kz = _wavenumbers(n)
    d = np.abs(kx * c[0] + ky * c[1] + kz * c[2])
    return bool(d.max() <= 1e-12 * max(np.abs(c).max(), 1e-300))


def _axis_line(c: np.ndarray, axis: int) -> np.ndarray:
    """Coefficients with zero wavenumber transverse to ``axis``, as a 1d line."""
    if axis == 0:
        return c[:, 0, 0]
    if axis == 1:
        return c[0, :, 0]
    return c[0, 0, :]


def grid_axis(n: int) -> np.ndarray:
    return TAU * np.arange(n) / n


def curl(v: SpectralField3) -> SpectralField3:
    return v.curl()


def divergence(v: SpectralField3) -> ScalarField3:
    return v.divergence()


def gradient(f: ScalarField3) -> SpectralField3:
    return f.gradient()


def helmholtz(v: SpectralField3) -> HelmholtzParts:
    return v.helmholtz()


def inverse_curl(w: SpectralField3, tol: float = 1e-10) -> SpectralField3:
    return w.inverse_curl(tol=tol)


def integral_invariants(v: SpectralField3) -> tuple[float, float]:
    """(energy, helicity) under the unit-volume normalization."""
    return v.energy(), v.helicity()


def exactness_check(v: SpectralField3, tol: float = 1e-10) -> ExactnessReport:
    return v.exactness_check(tol=tol)


def evaluate(v: SpectralField3, points: np.ndarray) -> np.ndarray:
    return v.evaluate(points)


def inner(u: SpectralField3, v: SpectralField3) -> float:
    """L2 inner product under the unit-volume normalization."""
    if u.n != v.n:
        raise FieldShapeError(f"resolution mismatch: {u.n} vs {v.n}")
    return float(np.sum(np.conj(u.coeffs) * v.coeffs).real)


def _pad_values(c: np.ndarray, n_to: int) -> np.ndarray:
    """Physical values of spectral data zero-padded to a finer n_to grid."""
    n = c.shape[-1]
    lead = c.shape[:-3]
    big = np.zeros(lead + (n_to, n_to, n_to), dtype=np.complex128)
    k1 = sfft.fftfreq(n, d=1.0 / n).astype(int)
    idx = k1 % n_to
    big[(..., *np.ix_(idx, idx, idx))] = c
    return sfft.ifftn(big, axes=(-3, -2, -1), workers=-1).real * n_to**3


def _depad_coeffs(values: np.ndarray, n_to: int) -> np.ndarray:
    """Spectral coefficients at resolution n_to from values on a finer grid."""
    n = values.shape[-1]
    c = sfft.fftn(values, axes=(-3, -2, -1), workers=-1) / n**3
    k1 = sfft.fftfreq(n_to, d=1.0 / n_to).astype(int)
    idx = k1 % n
    return c[(..., *np.ix_(idx, idx, idx))]


def _padded_binary(u: SpectralField3, v: SpectralField3, op) -> SpectralField3:
    """Pointwise binary operation evaluated alias-free on a padded grid."""
    if u.n != v.n:
        raise FieldShapeError(f"resolution mismatch: {u.n} vs {v.n}")
    n_to = 2 * u.n
    a = _pad_values(u.coeffs, n_to)
    b = _pad_values(v.coeffs, n_to)
    prod = op(a, b)
    return SpectralField3(_depad_coeffs(prod, u.n), _trust=True)


def cross_product_field(u: SpectralField3, v: SpectralField3) -> SpectralField3:
    """Pointwise u x v, dealiased by padded-grid evaluation."""
    return _padded_binary(u, v, lambda a, b: np.cross(a, b, axisa=0, axisb=0).transpose(3, 0, 1, 2))


def directional_derivative(u: SpectralField3, v: SpectralField3) -> SpectralField3:
    """Pointwise (u . grad) v, dealiased by padded-grid evaluation."""
    n = v.n
    kx, ky, kz = _wavenumbers(n)
    grads = [
        np.stack([1j * kx * v.coeffs[i], 1j * ky * v.coeffs[i], 1j * kz * v.coeffs[i]])
        for i in range(3)
    ]
    n_to = 2 * n
    uv = _pad_values(u.coeffs, n_to)
    out = np.empty((3, n_to, n_to, n_to))
    for i in range(3):
        gv = _pad_values(grads[i], n_to)
        out[i] = np.sum(uv * gv, axis=0)
    return SpectralField3(_depad_coeffs(out, n), _trust=True)


def lie_bracket(u: SpectralField3, v: SpectralField3) -> SpectralField3:
    """[u, v] = (u . grad) v - (v . grad) u."""
    return directional_derivative(u, v) - directional_derivative(v, u)


def shear_x_by_z(v: SpectralField3, amplitude: float, harmonic: int = 1) -> SpectralField3:
    """Pushforward under the volume-preserving shear (x, y, z) -> (x + s(z), y, z).

    Uses s(z) = amplitude * sin(harmonic * z).  The map is applied exactly in
    a mixed representation: a per-z spectral shift in x plus the Jacobian
    mixing of the z-component into the x-component.
    """
    n = v.n
    z = grid_axis(n)
    s = amplitude * np.sin(harmonic * z)
    sp = amplitude * harmonic * np.cos(harmonic * z)
    vals = v.values()
    # forward map: V'(x') = DPhi V(Phi^{-1} x'), with Phi^{-1} shifting x by -s(z)
    out = np.empty_like(vals)
    k1 = sfft.fftfreq(n, d=1.0 / n)
    vx_hat = sfft.fft(vals[0], axis=0, workers=-1)
    vy_hat = sfft.fft(vals[1], axis=0, workers=-1)
    vz_hat = sfft.fft(vals[2], axis=0, workers=-1)
    phase = np.exp(-1j * k1[:, None, None] * s[None, None, :])
    vx_s = sfft.ifft(vx_hat * phase, axis=0, workers=-1).real
    vy_s = sfft.ifft(vy_hat * phase, axis=0, workers=-1).real
    vz_s = sfft.ifft(vz_hat * phase, axis=0, workers=-1).real
    out[0] = vx_s + sp[None, None, :] * vz_s
    out[1] = vy_s
    out[2] = vz_s
    return SpectralField3.from_grid(out, clean=v.is_divergence_free)
