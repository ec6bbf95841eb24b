"""Numba kernels for field-line integration on the periodic box.

Two field representations share one adaptive integrator:

* a half-spectrum mode list (kvecs, cre, cim, c0), evaluated by direct
  Fourier summation, exact for the band-limited field:

      V(x) = c0 + sum_m 2 [cre_m cos(k_m.x) - cim_m sin(k_m.x)] ;

* physical values on a fine periodic grid, evaluated by separable cubic
  convolution (Catmull-Rom), whose cost is independent of the spectral
  content; used when the mode list would be large.

The integrator is an adaptive Dormand-Prince 5(4) pair whose accept test
bounds the local error estimate per unit time by `tol`.  Trajectories are
reported as lifted (unwrapped) positions at uniform sample times, together
with the cumulative log-growth of a propagated tangent vector, renormalized
at every sample time, from which finite-time Lyapunov estimates follow.
"""

import numpy as np
from numba import njit, prange

# Dormand-Prince 5(4) tableau
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    35.0 / 384.0 - 5179.0 / 57600.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
)

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAXSTEPS = 2

TAU = 2.0 * np.pi


@njit(cache=True, fastmath=True)
def eval_field(kv, cre, cim, c0, x, out):
    out[0] = c0[0]
    out[1] = c0[1]
    out[2] = c0[2]
    for m in range(kv.shape[0]):
        ph = kv[m, 0] * x[0] + kv[m, 1] * x[1] + kv[m, 2] * x[2]
        c = np.cos(ph)
        s = np.sin(ph)
        out[0] += 2.0 * (cre[m, 0] * c - cim[m, 0] * s)
        out[1] += 2.0 * (cre[m, 1] * c - cim[m, 1] * s)
        out[2] += 2.0 * (cre[m, 2] * c - cim[m, 2] * s)


@njit(cache=True, fastmath=True)
def eval_field_jac(kv, cre, cim, c0, x, out, jac):
    out[0] = c0[0]
    out[1] = c0[1]
    out[2] = c0[2]
    for i in range(3):
        for j in range(3):
            jac[i, j] = 0.0
    for m in range(kv.shape[0]):
        k0 = kv[m, 0]
        k1 = kv[m, 1]
        k2 = kv[m, 2]
        ph = k0 * x[0] + k1 * x[1] + k2 * x[2]
        c = np.cos(ph)
        s = np.sin(ph)
        for i in range(3):
            val = 2.0 * (cre[m, i] * c - cim[m, i] * s)
            der = -2.0 * (cre[m, i] * s + cim[m, i] * c)
            out[i] += val
            jac[i, 0] += der * k0
            jac[i, 1] += der * k1
            jac[i, 2] += der * k2


@njit(cache=True, fastmath=True, inline="always")
def _cubic_weights(t, w, dw):
    t2 = t * t
    t3 = t2 * t
    w[0] = -0.5 * t3 + t2 - 0.5 * t
    w[1] = 1.5 * t3 - 2.5 * t2 + 1.0
    w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t
    w[3] = 0.5 * t3 - 0.5 * t2
    dw[0] = -1.5 * t2 + 2.0 * t - 0.5
    dw[1] = 4.5 * t2 - 5.0 * t
    dw[2] = -4.5 * t2 + 4.0 * t + 0.5
    dw[3] = 1.5 * t2 - t


@njit(cache=True, fastmath=True)
def eval_grid(grid, x, out, jac, want_jac):
    """Tricubic (cubic convolution) interpolation on the periodic grid.

    grid has shape (3, G, G, G) sampling the box [0, 2 pi)^3 uniformly.
    Fills out (3,) and, when want_jac, jac (3, 3) with spatial derivatives.
    """
    g = grid.shape[1]
    scale = g / TAU
    wx = np.empty(4)
    dwx = np.empty(4)
    wy = np.empty(4)
    dwy = np.empty(4)
    wz = np.empty(4)
    dwz = np.empty(4)
    fx = x[0] * scale
    fy = x[1] * scale
    fz = x[2] * scale
    ix = int(np.floor(fx))
    iy = int(np.floor(fy))
    iz = int(np.floor(fz))
    _cubic_weights(fx - ix, wx, dwx)
    _cubic_weights(fy - iy, wy, dwy)
    _cubic_weights(fz - iz, wz, dwz)
    for c in range(3):
        out[c] = 0.0
    if want_jac:
        for i in range(3):
            for j in range(3):
                jac[i, j] = 0.0
    for a in range(4):
        ia = (ix + a - 1) % g
        for b in range(4):
            ib = (iy + b - 1) % g
            wxy = wx[a] * wy[b]
            dxy = dwx[a] * wy[b]
            xdy = wx[a] * dwy[b]
            for c4 in range(4):
                ic = (iz + c4 - 1) % g
                w = wxy * wz[c4]
                for comp in range(3):
                    p = grid[comp, ia, ib, ic]
                    out[comp] += w * p
                    if want_jac:
                        jac[comp, 0] += dxy * wz[c4] * p
                        jac[comp, 1] += xdy * wz[c4] * p
                        jac[comp, 2] += wxy * dwz[c4] * p
    if want_jac:
        for i in range(3):
            for j in range(3):
                jac[i, j] *= scale


@njit(cache=True, fastmath=True)
def _rhs(use_grid, grid, kv, cre, cim, c0, y, dy, tangent):
    # y = (x[3], w[3]); dy filled in place
    v = np.empty(3)
    jac = np.empty((3, 3))
    if use_grid:
        eval_grid(grid, y[:3], v, jac, tangent)
    elif tangent:
        eval_field_jac(kv, cre, cim, c0, y[:3], v, jac)
    else:
        eval_field(kv, cre, cim, c0, y[:3], v)
    dy[0] = v[0]
    dy[1] = v[1]
    dy[2] = v[2]
    if tangent:
        for i in range(3):
            dy[3 + i] = jac[i, 0] * y[3] + jac[i, 1] * y[4] + jac[i, 2] * y[5]
    else:
        dy[3] = 0.0
        dy[4] = 0.0
        dy[5] = 0.0


@njit(cache=True, fastmath=True)
def trace_sampled(use_grid, grid, kv, cre, cim, c0, x0, t_final, tol, n_samples,
                  tangent, max_steps):
    """Integrate dx/dt = V(x) and report uniform-time samples.

    Returns (samples, wlog, status, n_steps, n_rejected, max_err) where
    samples[i] is the lifted position at t_i = i * t_final / n_samples and
    wlog[i] the cumulative tangent log-growth at t_i.
    """
    dim = 6
    y = np.zeros(dim)
    y[0] = x0[0]
    y[1] = x0[1]
    y[2] = x0[2]
    if tangent:
        y[3] = 0.6
        y[4] = 0.64
        y[5] = 0.48

    samples = np.empty((n_samples + 1, 3))
    wlog = np.zeros(n_samples + 1)
    samples[0, 0] = y[0]
    samples[0, 1] = y[1]
    samples[0, 2] = y[2]

    dt_sample = t_final / n_samples
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    k5 = np.empty(dim)
    k6 = np.empty(dim)
    k7 = np.empty(dim)
    ytmp = np.empty(dim)
    ynew = np.empty(dim)

    _rhs(use_grid, grid, kv, cre, cim, c0, y, k1, tangent)
    vmag = max(np.sqrt(k1[0] ** 2 + k1[1] ** 2 + k1[2] ** 2), 1e-8)
    h = min(0.01 / vmag, dt_sample)
    logw = 0.0
    t = 0.0
    n_steps = 0
    n_rejected = 0
    max_err = 0.0
    status = STATUS_OK
    just_rejected = False

    for i_sample in range(1, n_samples + 1):
        t_target = i_sample * dt_sample
        while t < t_target - 1e-12 * t_final:
            if n_steps > max_steps:
                status = STATUS_MAXSTEPS
                break
            clipped = False
            if t + h >= t_target:
                h = t_target - t
                clipped = True
            # stages (k1 holds the FSAL derivative at t)
            for j in range(dim):
                ytmp[j] = y[j] + h * _A21 * k1[j]
            _rhs(use_grid, grid, kv, cre, cim, c0, ytmp, k2, tangent)
            for j in range(dim):
                ytmp[j] = y[j] + h * (_A31 * k1[j] + _A32 * k2[j])
            _rhs(use_grid, grid, kv, cre, cim, c0, ytmp, k3, tangent)
            for j in range(dim):
                ytmp[j] = y[j] + h * (_A41 * k1[j] + _A42 * k2[j] + _A43 * k3[j])
            _rhs(use_grid, grid, kv, cre, cim, c0, ytmp, k4, tangent)
            for j in range(dim):
                ytmp[j] = y[j] + h * (
                    _A51 * k1[j] + _A52 * k2[j] + _A53 * k3[j] + _A54 * k4[j]
                )
            _rhs(use_grid, grid, kv, cre, cim, c0, ytmp, k5, tangent)
            for j in range(dim):
                ytmp[j] = y[j] + h * (
                    _A61 * k1[j] + _A62 * k2[j] + _A63 * k3[j] + _A64 * k4[j] + _A65 * k5[j]
                )
            _rhs(use_grid, grid, kv, cre, cim, c0, ytmp, k6, tangent)
            for j in range(dim):
                ynew[j] = y[j] + h * (
                    _B1 * k1[j] + _B3 * k3[j] + _B4 * k4[j] + _B5 * k5[j] + _B6 * k6[j]
                )
            _rhs(use_grid, grid, kv, cre, cim, c0, ynew, k7, tangent)
            err = 0.0
            for j in range(dim):
                e = h * (
                    _E1 * k1[j]
                    + _E3 * k3[j]
                    + _E4 * k4[j]
                    + _E5 * k5[j]
                    + _E6 * k6[j]
                    + _E7 * k7[j]
                )
                err += e * e
            err = np.sqrt(err / dim)
            n_steps += 1
            accepted = err <= tol * h or h <= 1e-13
            if accepted:
                t += h
                for j in range(dim):
                    y[j] = ynew[j]
                    k1[j] = k7[j]
                if err > max_err:
                    max_err = err
                if h <= 1e-13 and err > tol * h:
                    status = STATUS_UNDERFLOW
                    break
            else:
                n_rejected += 1
                clipped = False
            # step-size update from err ~ C h^5 against the tol*h budget
            if err > 0.0:
                fac = 0.9 * (tol * h / err) ** 0.25
                if fac < 0.2:
                    fac = 0.2
                elif fac > 5.0:
                    fac = 5.0
            else:
                fac = 5.0
            if (clipped or just_rejected) and fac > 1.0:
                fac = 1.0  # no growth right after a rejection or a clipped step
            just_rejected = not accepted
            h = h * fac
            if h > dt_sample:
                h = dt_sample
            if h < 1e-13:
                h = 1e-13
        samples[i_sample, 0] = y[0]
        samples[i_sample, 1] = y[1]
        samples[i_sample, 2] = y[2]
        if tangent:
            wn = np.sqrt(y[3] ** 2 + y[4] ** 2 + y[5] ** 2)
            if wn > 0.0:
                logw += np.log(wn)
                y[3] /= wn
                y[4] /= wn
                y[5] /= wn
                # keep the FSAL derivative consistent: dw/dt is linear in w
                k1[3] /= wn
                k1[4] /= wn
                k1[5] /= wn
        wlog[i_sample] = logw
        if status != STATUS_OK:
            for rest in range(i_sample + 1, n_samples + 1):
                samples[rest, 0] = y[0]
                samples[rest, 1] = y[1]
                samples[rest, 2] = y[2]
                wlog[rest] = logw
            break
    return samples, wlog, status, n_steps, n_rejected, max_err


@njit(cache=True, parallel=True)
def trace_batch(use_grid, grid, kv, cre, cim, c0, seeds, t_final, tol, n_samples,
                tangent, max_steps):
    n_seeds = seeds.shape[0]
    samples = np.empty((n_seeds, n_samples + 1, 3))
    wlogs = np.empty((n_seeds, n_samples + 1))
    status = np.empty(n_seeds, dtype=np.int64)
    for s in prange(n_seeds):
        smp, wl, st, _, _, _ = trace_sampled(
            use_grid, grid, kv, cre, cim, c0, seeds[s], t_final, tol, n_samples,
            tangent, max_steps,
        )
        samples[s] = smp
        wlogs[s] = wl
        status[s] = st
    return samples, wlogs, status


_DUMMY_GRID = np.zeros((3, 2, 2, 2))
_DUMMY_MODES = (
    np.zeros((0, 3)),
    np.zeros((0, 3)),
    np.zeros((0, 3)),
    np.zeros(3),
)


def kernel_args(rep) -> tuple:
    """Pack a FieldRep into the positional (use_grid, grid, kv, cre, cim, c0)."""
    if rep.grid is not None:
        return (True, rep.grid) + _DUMMY_MODES
    return (False, _DUMMY_GRID, rep.kvecs, rep.cre, rep.cim, rep.c0)


class FieldRep:
    """Field representation handed to the kernels: modes or a values grid."""

    __slots__ = ("kvecs", "cre", "cim", "c0", "grid")

    def __init__(self, kvecs=None, cre=None, cim=None, c0=None, grid=None):
        self.kvecs = kvecs
        self.cre = cre
        self.cim = cim
        self.c0 = c0
        self.grid = grid
