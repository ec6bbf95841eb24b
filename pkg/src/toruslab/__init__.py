"""Numerical laboratory for invariant tori of divergence-free fields on T^3.

Subpackages:
  field     spectral vector calculus on the flat 3-torus
  gallery   closed-form steady ideal-flow states and their verifiers
  flow      field-line tracing, sections, rotation vectors, Lyapunov exponents
  spectrum  torus-coverage estimation by isotopy tag, knotted-tube builders
  euler     pseudo-spectral incompressible evolution and transport checks
  kam       annulus twist maps and torus-survival sweeps
  storage   field container format and experiment configs
  cli       command-line entry points
"""

from .field import (
    SpectralField3,
    ScalarField3,
    HelmholtzParts,
    curl,
    divergence,
    helmholtz,
    inverse_curl,
    integral_invariants,
    exactness_check,
)

__version__ = "0.1.0"
