"""Tube coordinates around closed curves in the periodic box.

A TubeChart carries a closed core curve (an unknot circle or a (p, q) torus
knot) inside a ball of the 3-torus, an arc-length parametrization, and a
rotation-minimizing orthonormal frame closed up by distributing its holonomy
angle.  Chart coordinates are (x, y, z) in T^2 x (-1, 1): x the longitude
along the core, y the meridian angle, z an area-linear radial coordinate
between the inner and outer tube radii.  The forward map and its x/y
derivative vectors build fields that are linear on the tori {z = const};
the inverse map classifies orbit samples by their tube coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

TAU = 2.0 * np.pi

__all__ = ["TubeChart", "TubeGeometryError", "torus_knot_points", "circle_points"]


class TubeGeometryError(ValueError):
    """Requested tube thickness not realizable without self-intersection."""

    def __init__(self, msg: str, max_radius: float):
        super().__init__(msg)
        self.max_radius = max_radius


def circle_points(t: np.ndarray, center, radius: float) -> np.ndarray:
    c = np.asarray(center, dtype=float)
    return c + radius * np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=-1)


def torus_knot_points(t: np.ndarray, center, p: int, q: int, major: float, minor: float) -> np.ndarray:
    c = np.asarray(center, dtype=float)
    w = major + minor * np.cos(q * t)
    return c + np.stack([w * np.cos(p * t), w * np.sin(p * t), minor * np.sin(q * t)], axis=-1)


def _arc_length_resample(points_fn, n_dense: int = 4096):
    """Resample a closed curve so the parameter is proportional to arc length."""
    t = TAU * np.arange(4 * n_dense) / (4 * n_dense)
    pts = points_fn(t)
    seg = np.linalg.norm(np.diff(pts, axis=0, append=pts[:1]), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    targets = total * np.arange(n_dense) / n_dense
    t_ext = np.concatenate([t, [TAU]])
    t_of_s = np.interp(targets, s, t_ext)
    return points_fn(t_of_s), total


def _rotation_minimizing_frame(pts: np.ndarray):
    """Closed rotation-minimizing frame by the double-reflection method.

    Returns unit tangents, normals and binormals at the sample points; the
    holonomy of the open frame is distributed uniformly so the result is
    periodic.
    """
    j = len(pts)
    tang = np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)
    tang /= np.linalg.norm(tang, axis=1, keepdims=True)
    normals = np.empty_like(pts)
    seed = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(seed, tang[0])) > 0.9:
        seed = np.array([1.0, 0.0, 0.0])
    n0 = seed - np.dot(seed, tang[0]) * tang[0]
    normals[0] = n0 / np.linalg.norm(n0)
    for i in range(j - 1):
        # double reflection: reflect in the bisecting plane, then align tangent
        v1 = pts[i + 1] - pts[i]
        c1 = np.dot(v1, v1)
        nl = normals[i] - (2.0 / c1) * np.dot(v1, normals[i]) * v1
        tl = tang[i] - (2.0 / c1) * np.dot(v1, tang[i]) * v1
        v2 = tang[i + 1] - tl
        c2 = np.dot(v2, v2)
        if c2 > 1e-30:
            nl = nl - (2.0 / c2) * np.dot(v2, nl) * v2
        nl -= np.dot(nl, tang[i + 1]) * tang[i + 1]
        normals[i + 1] = nl / np.linalg.norm(nl)
    # closure defect: angle to rotate the propagated frame back onto the start
    v1 = pts[0] - pts[-1]
    c1 = np.dot(v1, v1)
    nl = normals[-1] - (2.0 / c1) * np.dot(v1, normals[-1]) * v1
    tl = tang[-1] - (2.0 / c1) * np.dot(v1, tang[-1]) * v1
    v2 = tang[0] - tl
    c2 = np.dot(v2, v2)
    if c2 > 1e-30:
        nl = nl - (2.0 / c2) * np.dot(v2, nl) * v2
    nl -= np.dot(nl, tang[0]) * tang[0]
    nl /= np.linalg.norm(nl)
    b0 = np.cross(tang[0], normals[0])
    defect = np.arctan2(np.dot(nl, b0), np.dot(nl, normals[0]))
    # distribute the defect so the frame closes smoothly
    phase = -defect * np.arange(j) / j
    binormals = np.cross(tang, normals)
    cn, sn = np.cos(phase)[:, None], np.sin(phase)[:, None]
    normals, binormals = cn * normals + sn * binormals, -sn * normals + cn * binormals
    return tang, normals, binormals


@dataclass
class ChartCoords:
    longitude: np.ndarray  # in [0, 2 pi)
    meridian: np.ndarray  # in [0, 2 pi)
    z: np.ndarray  # radial coordinate, (-1, 1) inside the tube
    radius: np.ndarray  # metric distance to the core
    inside: np.ndarray  # bool


class TubeChart:
    """Coordinates on a tubular neighborhood of a closed curve in T^3."""

    def __init__(self, core_pts: np.ndarray, r_in: float, r_out: float, label: str,
                 center=None):
        self.label = label
        self.r_in = float(r_in)
        self.r_out = float(r_out)
        self.center = np.asarray(center, dtype=float) if center is not None else None
        self._build(core_pts)

    def _build(self, core_pts: np.ndarray):
        self.core = core_pts
        j = len(core_pts)
        self.params = TAU * np.arange(j) / j
        tang, nor, bin_ = _rotation_minimizing_frame(core_pts)
        grid = np.concatenate([self.params, [TAU]])

        def closed(vals):
            return CubicSpline(grid, np.vstack([vals, vals[:1]]), bc_type="periodic")

        self._c = closed(core_pts)
        self._n = closed(nor)
        self._b = closed(bin_)
        self.length = float(np.sum(np.linalg.norm(np.diff(core_pts, axis=0, append=core_pts[:1]), axis=1)))
        self._centroid = core_pts.mean(axis=0)
        self._tree = cKDTree(core_pts)

    # -- radial profile ----------------------------------------------------

    def _z_of_radius(self, rho):
        return -1.0 + 2.0 * (rho**2 - self.r_in**2) / (self.r_out**2 - self.r_in**2)

    def _radius_of_z(self, z):
        return np.sqrt(self.r_in**2 + 0.5 * (np.asarray(z) + 1.0) * (self.r_out**2 - self.r_in**2))

    # -- forward map ---------------------------------------------------------

    def embed(self, longitude, meridian, z):
        """Ambient position of chart coordinates."""
        x = np.mod(np.asarray(longitude, dtype=float), TAU)
        y = np.asarray(meridian, dtype=float)
        rho = self._radius_of_z(z)
        c = self._c(x)
        n = self._n(x)
        b = self._b(x)
        return c + rho[..., None] * (np.cos(y)[..., None] * n + np.sin(y)[..., None] * b)

    def frame_vectors(self, longitude, meridian, z):
        """(dP/dx, dP/dy) of the embedding at the given chart coordinates."""
        x = np.mod(np.asarray(longitude, dtype=float), TAU)
        y = np.asarray(meridian, dtype=float)
        rho = self._radius_of_z(z)
        n, b = self._n(x), self._b(x)
        dn, db = self._n(x, 1), self._b(x, 1)
        dx = self._c(x, 1) + rho[..., None] * (np.cos(y)[..., None] * dn + np.sin(y)[..., None] * db)
        dy = rho[..., None] * (-np.sin(y)[..., None] * n + np.cos(y)[..., None] * b)
        return dx, dy

    # -- inverse map ---------------------------------------------------------

    def project(self, points: np.ndarray, newton_iters: int = 3) -> ChartCoords:
        """Chart coordinates of ambient points (vectorized).

        Points are reduced modulo the lattice toward the core before the
        nearest-parameter search, so orbit samples given in lifted
        coordinates work directly.
        """
        p = np.atleast_2d(np.asarray(points, dtype=float))
        ref = self._centroid
        p = ref + np.mod(p - ref + np.pi, TAU) - np.pi
        _, idx = self._tree.query(p)
        t = self.params[idx]
        for _ in range(newton_iters):
            c = self._c(t)
            d1 = self._c(t, 1)
            d2 = self._c(t, 2)
            diff = p - c
            num = np.sum(diff * d1, axis=-1)
            den = np.sum(d1 * d1, axis=-1) - np.sum(diff * d2, axis=-1)
            den = np.where(np.abs(den) < 1e-12, 1e-12, den)
            t = np.mod(t + num / den, TAU)
        c = self._c(t)
        tangent = self._c(t, 1)
        tangent /= np.linalg.norm(tangent, axis=-1, keepdims=True)
        diff = p - c
        diff -= np.sum(diff * tangent, axis=-1, keepdims=True) * tangent
        rho = np.linalg.norm(diff, axis=-1)
        n, b = self._n(t), self._b(t)
        meridian = np.arctan2(np.sum(diff * b, axis=-1), np.sum(diff * n, axis=-1))
        z = self._z_of_radius(np.maximum(rho, 1e-12))
        inside = (rho > self.r_in) & (rho < self.r_out)
        return ChartCoords(
            longitude=t, meridian=np.mod(meridian, TAU), z=z, radius=rho, inside=inside
        )

    # -- bookkeeping -----------------------------------------------------------

    def annulus_volume(self) -> float:
        """Normalized measure of the tube between the two radii (tube formula)."""
        return np.pi * self.length * (self.r_out**2 - self.r_in**2) / TAU**3

    def max_extent(self) -> float:
        if self.center is None:
            return np.inf
        return float(np.max(np.linalg.norm(self.core - self.center, axis=1)) + self.r_out)

    def advected(self, new_core: np.ndarray, label_suffix: str = "") -> "TubeChart":
        """Chart with the core replaced by its image under a flow map.

        The frame is rebuilt (rotation-minimizing on the advected core); the
        radial bounds are kept, so `inside` becomes a proximity gate rather
        than an exact tube membership test.
        """
        chart = TubeChart.__new__(TubeChart)
        chart.label = self.label + label_suffix
        chart.r_in = self.r_in
        chart.r_out = self.r_out
        chart.center = self.center
        chart._build(np.asarray(new_core, dtype=float))
        return chart


def max_feasible_radius(core_pts: np.ndarray) -> float:
    """Largest tube radius without local or global self-intersection."""
    j = len(core_pts)
    t = TAU * np.arange(j) / j
    grid = np.concatenate([t, [TAU]])
    spline = CubicSpline(grid, np.vstack([core_pts, core_pts[:1]]), bc_type="periodic")
    tt = np.linspace(0, TAU, 2048, endpoint=False)
    d1 = spline(tt, 1)
    d2 = spline(tt, 2)
    speed = np.linalg.norm(d1, axis=1)
    curvature = np.linalg.norm(np.cross(d1, d2), axis=1) / speed**3
    r_curv = 1.0 / max(np.max(curvature), 1e-12)
    # global strand distance: only pairs beyond the curvature-controlled arc
    # window can pinch the tube (inside it the chord is curvature-bounded)
    length = float(np.sum(np.linalg.norm(np.diff(core_pts, axis=0, append=core_pts[:1]), axis=1)))
    sub = core_pts[:: max(1, j // 512)]
    m = len(sub)
    dist = np.linalg.norm(sub[:, None, :] - sub[None, :, :], axis=-1)
    param_gap = np.abs(np.arange(m)[:, None] - np.arange(m)[None, :])
    param_gap = np.minimum(param_gap, m - param_gap)
    metric_gap = param_gap * (length / m)
    mask = metric_gap > np.pi * r_curv
    r_pair = 0.5 * np.min(dist[mask]) if mask.any() else np.inf
    return 0.95 * min(r_curv, r_pair)


def build_chart(
    knot: str | tuple,
    r_out: float,
    r_in_fraction: float = 0.15,
    center=(np.pi, np.pi, np.pi),
    major: float = 1.6,
    minor: float = 0.55,
    n_core: int = 2048,
) -> TubeChart:
    """TubeChart around an unknot circle or a (p, q) torus knot.

    Raises TubeGeometryError (with the maximal feasible radius) if the
    requested outer radius would self-intersect or leave the enclosing
    ball of radius slightly below pi.
    """
    if knot == "unknot":
        fn = lambda t: circle_points(t, center, major)
        label = "unknot"
    else:
        p, q = knot
        if np.gcd(int(p), int(q)) != 1:
            raise ValueError(f"torus knot indices must be coprime, got {knot}")
        fn = lambda t: torus_knot_points(t, center, int(p), int(q), major, minor)
        label = f"torus({int(p)},{int(q)})"
    pts, _ = _arc_length_resample(fn, n_core)
    r_max = max_feasible_radius(pts)
    extent = np.max(np.linalg.norm(pts - np.asarray(center, dtype=float), axis=1))
    r_ball = 0.97 * np.pi - extent
    r_max = min(r_max, r_ball)
    if r_out > r_max:
        raise TubeGeometryError(
            f"tube radius {r_out:.3f} self-intersects or leaves the ball; "
            f"maximum feasible is {r_max:.3f}",
            max_radius=float(r_max),
        )
    return TubeChart(pts, r_in=r_in_fraction * r_out, r_out=r_out, label=label, center=center)
