"""Integer-lattice helpers for homology tags and resonance gates.

An orbit on an invariant 2-torus of T^3 has a winding-rate vector rho that
is orthogonal to the primitive integer vector n dual to the torus's
homology class.  Completing n to a unimodular basis turns rho into a pair
of rotation numbers on the torus, whose ratio feeds the Diophantine gate.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd

import numpy as np

__all__ = [
    "canonical_primitive",
    "primitive_vectors",
    "unimodular_completion",
    "torus_rotation_pair",
    "diophantine_margin",
]


def canonical_primitive(n) -> tuple[int, int, int]:
    """Divide out the gcd and fix the sign so the first nonzero entry is positive."""
    n = [int(v) for v in n]
    g = gcd(gcd(abs(n[0]), abs(n[1])), abs(n[2]))
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    n = [v // g for v in n]
    for v in n:
        if v != 0:
            if v < 0:
                n = [-w for w in n]
            break
    return tuple(n)


@lru_cache(maxsize=4)
def primitive_vectors(n_max: int) -> np.ndarray:
    """All canonical primitive vectors with sup-norm <= n_max, by increasing norm."""
    out = set()
    r = range(-n_max, n_max + 1)
    for a in r:
        for b in r:
            for c in r:
                if a == b == c == 0:
                    continue
                out.add(canonical_primitive((a, b, c)))
    arr = np.array(sorted(out), dtype=np.int64)
    order = np.argsort((arr**2).sum(axis=1), kind="stable")
    return arr[order]


def _gcd_rowop(a: int, b: int):
    """2x2 unimodular m with (a, b) @ m = (gcd, 0)."""
    if b == 0:
        s = 1 if a >= 0 else -1
        return abs(a), np.array([[s, 0], [0, 1]], dtype=np.int64)
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    g = old_r
    m = np.array([[old_s, -b // g], [old_t, a // g]], dtype=np.int64)
    if g < 0:
        g = -g
        m[:, 0] = -m[:, 0]
    return g, m


def unimodular_completion(n) -> np.ndarray:
    """Integer matrix with determinant +-1 whose last row is the primitive n.

    The first two rows span integer directions tangent to the tori
    {n . theta = const}, giving angle coordinates on them.
    """
    n = canonical_primitive(n)
    v = np.eye(3, dtype=np.int64)
    g12, m = _gcd_rowop(n[0], n[1])
    v[:, :2] = v[:, :2] @ m
    g, m = _gcd_rowop(g12, n[2])
    v[:, ::2] = v[:, ::2] @ m
    # now (n @ v) = (1, 0, 0); rows of v^{-1} start with n
    vinv = np.linalg.inv(v)
    m3 = np.rint(vinv).astype(np.int64)
    if not np.array_equal(m3 @ v, np.eye(3, dtype=np.int64)):
        raise ArithmeticError("unimodular inversion failed")
    out = np.vstack([m3[1], m3[2], m3[0]])
    if tuple(out[2]) != tuple(n):
        raise ArithmeticError("completion lost the input vector")
    return out


def torus_rotation_pair(n, rho: np.ndarray) -> tuple[float, float]:
    """Rotation numbers of the winding vector rho on the torus class n.

    Returned ordered so that |second| >= |first|; their ratio is the
    rotation ratio fed to the Diophantine gate.
    """
    basis = unimodular_completion(n)
    r1 = float(basis[0] @ rho)
    r2 = float(basis[1] @ rho)
    if abs(r2) < abs(r1):
        r1, r2 = r2, r1
    return r1, r2


def diophantine_margin(ratio: float, q_max: int) -> float:
    """min over 1 <= q <= q_max of q^2 |ratio - p/q| with the best integer p.

    A margin above theta certifies |ratio - p/q| > theta / q^2 for all
    denominators up to q_max, the resonance gate used for ergodicity.
    """
    best = np.inf
    for q in range(1, q_max + 1):
        p = round(ratio * q)
        d = q * q * abs(ratio - p / q)
        if d < best:
            best = d
    return float(best)
