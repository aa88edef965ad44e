"""Finite-truncation computations for Schauder frames of lp spaces."""

from .associated import (
    FiniteSequence,
    MaxNormOracle,
    MinNormOracle,
    Side,
    analysis_apply,
    basis_constant,
    block_sandwich_report,
    max_norm,
    min_norm,
    sandwich_constants_report,
    synthesis_apply,
)
from .diagnostics import (
    DecayProfile,
    Verdict,
    boundedly_complete_profile,
    norming_profile,
    shrinking_profile,
    verdict,
)
from .exemplars import canonical, l1_pathological, l2_tight, mercedes, random_parseval
from .extraction import (
    ExtractionReport,
    GapReport,
    extract_basic,
    extract_unconditional,
    gap_index,
    witness_check_c0,
    witness_check_l1,
)
from .frames import (
    FrameInstance,
    SignMode,
    dual_inequality_report,
    hilbert_frame_bounds,
    partial_sum,
    projection_constant,
    reconstruction_residual,
    unconditional_constant,
)
from .norms import (
    Bounds,
    LinearConstraintSet,
    Method,
    PNormSpace,
    dual_norm,
    linear_max_over_convex,
    norm,
    operator_norm,
    restricted_functional_norm,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
