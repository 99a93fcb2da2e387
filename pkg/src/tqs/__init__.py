"""tqs: deterministic single-slit particle scattering with a discrete time
quant, plus the closed-form analytics that predict the resulting detector
pattern."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    AngleGrid,
    AngleRandom,
    BandConstant,
    ConfigurationError,
    EmissionSpec,
    FieldSpec,
    GaussianBand,
    GaussianLine,
    Geometry,
    HalfPlaneConstant,
    ParticleState,
    SimConfig,
    Vec2,
    ZeroField,
    config_violations,
    resolved_max_steps,
    validate_config,
)
from .fields import eval_field  # noqa: F401
from .emission import EmissionStream, emit, make_stream  # noqa: F401
from .dynamics import (  # noqa: F401
    ImpactRecord,
    MaxStepsExceeded,
    NonFiniteState,
    SlitAbsorbed,
    Trajectory,
    propagate_to_detector,
    record_trajectory,
    step,
)
from .analytics import (  # noqa: F401
    DeviationOrigins,
    NeverReachesDetector,
    UnsupportedField,
    classical_reference,
    compute_n0,
    deviation_origins,
    is_black_region,
    predict_minima,
)
from .histogram import (  # noqa: F401
    ContrastStats,
    DensityGrid,
    Histogram,
    accumulate,
    contrast,
    convolve_gaussian,
    density_grid,
)
from .sweep import (  # noqa: F401
    BatchResult,
    ConvergenceStudy,
    SweepAxis,
    SweepResult,
    convergence_study,
    run_batch,
    run_sweep,
)
