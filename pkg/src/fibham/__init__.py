"""Spectrum, density of states and fractal dimensions of the Fibonacci Hamiltonian.

Two independent routes are provided: direct eigenvalue counting for finite
restrictions of the operator, and hyperbolic dynamics of the trace map on
the invariant cubic surfaces.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ContinuationLost,
    DegenerateSpectrum,
    EmptyEnsemble,
    EmptyWindow,
    FibhamError,
    InsufficientScales,
    NegativeInvariant,
    ResolutionTooCoarse,
)
from .tracemap import (
    CAT_MATRIX,
    SINGULARITIES,
    HalfTraceSeed,
    HalfTraceSequence,
    SurfacePoint,
    TorusPoint,
    cat_map_step,
    coupling_from_point,
    fibonacci,
    fricke_vogt,
    half_trace_sequence,
    half_traces,
    line_point,
    semiconjugacy,
    trace_jacobian,
    trace_step,
    trace_step_inv,
)
from .spectrum import BandCover, EscapeVerdict, band_cover, escape_test, gaps_from_cover, spectral_cover, track_gap
from .hamiltonian import (
    IdsEstimate,
    PotentialSpec,
    ScalingExponentEstimate,
    count_eigenvalues_below,
    dos_interval,
    dos_weighted_energies,
    ids_estimate,
    ids_free,
    local_scaling_exponent,
    potential_value,
)
from .dynamics import (
    DimensionComputation,
    PeriodicOrbitRecord,
    continue_orbit,
    dv_estimate,
    entropy_estimate,
    lift_and_dedup,
    lyapunov_estimate,
    orbit_ensemble,
    orbit_multiplier,
    periodic_points_A,
)
from .dimension import DimensionReport, box_dimension, compare_report
