"""Discrete cubic NLS lattice, its continuum limit, and the diagnostics around it."""

from .spectral import (
    DEFAULT_H0,
    DEFAULT_M_REF,
    ContinuumField,
    CutoffSpec,
    LatticeField,
    SamplingError,
    SamplingSpec,
    SpectrumField,
    TorusGrid,
    dft,
    idft,
    reconstruct,
    sample_initial_data,
    sharp_cutoff,
    smooth_lowpass,
)
from .lattice import (
    DnlsParams,
    NumericalAbort,
    SnapshotSeries,
    SnapshotStream,
    energy,
    evolve,
    linear_propagate,
    mass,
    nonlinear_propagate,
    stream,
    strang_step,
    truncated_mass,
)
from .continuum import (
    CoupledState,
    coupled_energy,
    coupled_mass,
    nls_evolve,
    nls_linear_step,
    nls_nonlinear_step,
)

from .diagnostics import (
    DriftCurve,
    NormSpec,
    acl_drift_curve,
    bilinear_ratio_experiment,
    bilinear_sweep,
    frequency_tail,
    nonresonance_integral,
    spacetime_norm,
    spatial_tail,
    strichartz_report,
)

__version__ = "0.1.0"
