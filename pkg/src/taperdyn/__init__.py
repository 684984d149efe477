"""taperdyn: taper-weighted ergodic averages and weighted data-driven methods
for dynamical systems (linear propagator fits, dictionary Koopman fits,
sparse model identification, spectral-measure estimation, and nonparametric
diffusion forecasting), with built-in trajectory generators and a desk-scale
benchmark harness comparing weighted against unweighted convergence.
"""

from .averages import AverageResult, SweepRow, birkhoff_average, convergence_sweep
from .dmd import (
    DmdResult,
    ProjectionBasis,
    SnapshotPair,
    dmd,
    dmd_error_sweep,
    project,
    random_projection,
    snapshot_pair,
    spectrum_distance,
)
from .edmd import (
    Dictionary,
    DictionaryMatrices,
    KoopmanMatrix,
    MpedmdResult,
    build_dictionary_matrices,
    edmd,
    fourier_dictionary,
    identity_dictionary,
    monomial_dictionary,
    mpedmd,
)
from .errors import (
    ConditioningError,
    ConfigError,
    DegenerateWeightError,
    DomainError,
    IngestError,
    NumericalError,
    ShapeError,
    SizeError,
    TaperdynError,
)
from .forecast import (
    DelayEmbedding,
    DiffusionBasis,
    ForecastResult,
    ShiftMatrix,
    delay_embed,
    diffusion_basis,
    forecast,
    nino34_compare,
    nino34_pipeline,
    shift_matrix,
    skill,
)
from .linalg import LstsqSolution, eig, pinv_lstsq, sym_sqrt_inv, weighted_pair
from .sindy import (
    SindyModel,
    TargetData,
    harmonic_oscillator_exact,
    sindy_error_sweep,
    stlsq,
)
from .specmeas import (
    AutocorrelationSet,
    FilterFunction,
    SpectralDensity,
    autocorrelations,
    bump_smoothstep_filter,
    cosine_filter,
    cosine_sharp_filter,
    density,
    peak_report,
)
from .systems import (
    HarmonicSeries,
    RngStream,
    Trajectory,
    driven_logistic,
    harmonic_series,
    ou_sample,
    quasiperiodic_field,
    standard_map,
)
from .weights import (
    WeightFunction,
    WeightVector,
    custom_taper,
    eval_bump,
    exponential_bump,
    make_weight_vector,
    uniform_weight,
    uniform_weight_vector,
)

__version__ = "0.1.0"
