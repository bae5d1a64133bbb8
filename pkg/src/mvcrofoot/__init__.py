"""Matrix-valued inner functions, their model spaces, the generalized
Crofoot transform between them, and truncated Toeplitz operators, together
with a quantitative residual-verification suite for every identity the
construction rests on."""

__version__ = "0.1.0"

from .conjugation import (
    CompatibilityReport,
    ConjugationSpec,
    cgamma_map,
    cgamma_property_residuals,
    compatibility_residuals,
    crofoot_conjugation_residual,
    entrywise_conjugation,
    make_conjugation,
)
from .crofoot import (
    CrofootPair,
    DefectPair,
    IntertwiningReport,
    KernelMappingReport,
    StrictContraction,
    crofoot_map,
    crofoot_theta,
    defect_operators,
    disk_samples,
    intertwining_residuals,
    kernel_mapping_residual,
    recover_theta,
)
from .errors import (
    DimensionMismatchError,
    FactorInvalidError,
    FeedbackSingularError,
    GenerationFailedError,
    GridMismatchError,
    GridTooCoarseError,
    IllConditionedError,
    IncompatibleInputsError,
    MvcrofootError,
    NotInKThetaError,
    NotInvolutiveError,
    NotPureError,
    NotStrictError,
    NotUnitaryError,
    OutOfDiskError,
    PurityViolationError,
    SingularResolventError,
)
from .inner_function import (
    ElementaryFactor,
    MatrixInnerFunction,
    UnitaryRealization,
    assemble_inner,
    blaschke,
    cascade,
    inner_from_realization,
    random_inner,
    scalar_inner,
)
from .model_space import (
    DefectBases,
    ModelVector,
    defect_bases,
    kernel_vectors,
    model_operator_matrices,
    piecewise_action_residuals,
    project,
    random_model_vector,
)
from .oracle import (
    BoundaryGrid,
    OracleProjection,
    boundary_inner_product,
    boundary_norm,
    model_space_rank,
    oracle_project,
    sample_polynomial,
)
from .report import CheckRecord, SuiteReport
from .tto import (
    SymbolPolynomial,
    TruncatedToeplitzOperator,
    build_tto,
    crofoot_conjugate,
    shift_invariance_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
