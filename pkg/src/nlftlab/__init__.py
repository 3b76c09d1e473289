"""Numerical laboratory for the continuous nonlinear Fourier transform.

Computes transfer coefficients (a, b) of compactly supported potentials, the
associated Krein-de Branges function E(t, z) with its jets, spectral densities
and maximal-function error gauges, reproducing kernels, zero locations and
their Riccati dynamics, and a verification harness that re-checks every
quantitative identity and estimate numerically.
"""

from .engine import (
    EvolutionState,
    PairState,
    TransferCoefficients,
    evaluate_pair,
    gronwall_envelope,
    gronwall_increment,
    gronwall_increment_appendix,
    integrate_E,
    integrate_transfer,
    linearization_residual,
    magnitude_phase_flow,
    scattering,
)
from .potential import (
    Potential,
    SigmaInterval,
    box,
    chirp,
    dominant_sector,
    find_sigma_intervals,
    is_sigma_interval,
    make_potential,
    random_bandlimited,
    standard_potentials,
    truncated_gaussian,
    zero_potential,
)

__version__ = "0.1.0"
