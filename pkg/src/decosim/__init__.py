"""decosim: desk-scale open-quantum-system decoherence toolkit.

Subpackages cover environment spectral densities and correlation kernels,
quantum Brownian motion (perturbative and exact master equations, Gaussian
propagators, Wigner transforms), two-Gaussian cat-state visibility,
the predictability sieve, two-level system dynamics and spin baths,
particle-field decoherence saturation, Wigner dynamics of chaotic systems
with entropy production, and dense-simulated stabilizer error correction.

All physics defaults to natural units (hbar = k_B = 1); every type carries
hbar explicitly so dimensional variants stay testable.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    accel,
    chaos,
    cli,
    env_kernels,
    errors,
    field_coupling,
    gaussian_cats,
    qbm,
    sieve,
    stabilizer_qecc,
    two_level,
    wigner,
)
