"""Independent discrete oracles used to freeze expected values in the tests.

These deliberately avoid the spectral code paths under test: derivatives are
central finite differences on the periodic grid, integrals are uniform
Riemann sums in physical space (exact for band-limited integrands).
"""

import numpy as np

TAU = 2.0 * np.pi


def fd_derivative(values: np.ndarray, axis: int) -> np.ndarray:
    """4th-order central difference along a periodic axis."""
    n = values.shape[axis]
    h = TAU / n
    vp1 = np.roll(values, -1, axis=axis)
    vm1 = np.roll(values, 1, axis=axis)
    vp2 = np.roll(values, -2, axis=axis)
    vm2 = np.roll(values, 2, axis=axis)
    return (8.0 * (vp1 - vm1) - (vp2 - vm2)) / (12.0 * h)


def fd_curl(values: np.ndarray) -> np.ndarray:
    vx, vy, vz = values
    return np.stack(
        [
            fd_derivative(vz, 1) - fd_derivative(vy, 2),
            fd_derivative(vx, 2) - fd_derivative(vz, 0),
            fd_derivative(vy, 0) - fd_derivative(vx, 1),
        ]
    )


def fd_divergence(values: np.ndarray) -> np.ndarray:
    return (
        fd_derivative(values[0], 0)
        + fd_derivative(values[1], 1)
        + fd_derivative(values[2], 2)
    )


def riemann_mean(values: np.ndarray) -> float:
    """Integral against the unit-volume measure, as a plain grid average."""
    return float(np.mean(values))


def quad_energy(values: np.ndarray) -> float:
    return riemann_mean(np.sum(values**2, axis=0))


def quad_inner(a: np.ndarray, b: np.ndarray) -> float:
    return riemann_mean(np.sum(a * b, axis=0))
