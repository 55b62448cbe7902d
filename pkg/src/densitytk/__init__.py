"""densitytk: exact-rational density arithmetic, d-limit verdicts, finite
measure algebras, common-point selection, and witness certificates."""

from .bergelson import (
    IdentityCheck,
    OracleResult,
    RatioCertificate,
    SelectionResult,
    SetFamily,
    admitted_checkpoints,
    averaging_identity_check,
    averaging_profile,
    default_ratio_threshold,
    density_ratio_certificate,
    fip_oracle,
    select_common_point,
)
from .density import (
    DLimVerdict,
    DensityEstimate,
    FiniteIndexSet,
    IndexSet,
    PeriodicIndexSet,
    RealSequence,
    SampledIndexSet,
    TailRule,
    d_lim_verdict,
    default_checkpoints,
    members_upto,
    prefix_count,
    upper_density,
)
from .errors import (
    CertificateError,
    EmptyIndexPrefix,
    HorizonExceeded,
    HypothesisViolation,
    NoPositivePoint,
    ParseError,
    PrefixDensityTooLow,
    ProfileInfeasible,
    TailViolation,
    TooLargeForOracle,
    ToolkitError,
    UnknownCommand,
    ValidationError,
)
from .instances import (
    GenerationProfile,
    InstanceBundle,
    WitnessInstance,
    generate_instance,
    generate_witness_instance,
    parse_instance,
)
from .measure import (
    FiniteAlgebra,
    FiniteMeasureSpace,
    Functional,
    MSet,
    apply_functional,
    inner_outer,
    measure,
)
from .witness import (
    BackwardCertificate,
    BoundedFamily,
    ForwardCertificate,
    backward_pipeline,
    build_level_sets,
    forward_functional,
    weak_d_convergence_check,
)

__version__ = "0.1.0"
