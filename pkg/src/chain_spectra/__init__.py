"""Exact spectra of dressed linear chain graphs.

Three independent routes to the same spectrum: numeric transfer matrices,
symbolic expansion of the spectral determinant into a finite exponential
sum, and explicit periodic-orbit series for individual eigenvalues, plus
the classical stochastic-scattering picture behind the orbit amplitudes.
"""

__version__ = "0.1.0"

from .chain import (
    ChainSpec,
    ConfigError,
    VertexCoefficients,
    build_chain,
    chain_from_config,
    compress_contrast,
    load_chain_config,
    vertex_coefficients,
)
from .expansion import (
    ExponentialSum,
    PairingError,
    SpectralForm,
    SpectralPair,
    expand_determinant,
    multiply_expsum,
    regularity_margin,
)
from .montecarlo import WalkStatistics, simulate, stationary_distribution
from .orbits import (
    DirectedBond,
    PeriodicOrbit,
    RegularityError,
    density_of_states,
    eigenvalue_integral,
    eigenvalue_series,
    enumerate_orbits,
    orbit_amplitude,
    repeat_orbit,
)
from .spectrum import (
    IntervalClassification,
    RootRecord,
    SeparatorGrid,
    classify_intervals,
    find_roots,
    separator_grid,
    separators,
    spectral_function,
    staircase,
    weyl_average,
)
from .transfer import delta_numeric, total_transfer, transfer_matrix

__all__ = [
    "ChainSpec",
    "ConfigError",
    "VertexCoefficients",
    "build_chain",
    "chain_from_config",
    "compress_contrast",
    "load_chain_config",
    "vertex_coefficients",
    "ExponentialSum",
    "PairingError",
    "SpectralForm",
    "SpectralPair",
    "expand_determinant",
    "multiply_expsum",
    "regularity_margin",
    "WalkStatistics",
    "simulate",
    "stationary_distribution",
    "DirectedBond",
    "PeriodicOrbit",
    "RegularityError",
    "density_of_states",
    "eigenvalue_integral",
    "eigenvalue_series",
    "enumerate_orbits",
    "orbit_amplitude",
    "repeat_orbit",
    "IntervalClassification",
    "RootRecord",
    "SeparatorGrid",
    "classify_intervals",
    "find_roots",
    "separator_grid",
    "separators",
    "spectral_function",
    "staircase",
    "weyl_average",
    "delta_numeric",
    "total_transfer",
    "transfer_matrix",
]
