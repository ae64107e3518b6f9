"""B-spline quarklet frames on the interval and the unit square.

Exact piecewise-polynomial constructions of boundary-adapted quarklet
systems, weighted sequence norms, difference-based smoothness norms, and
nuclear-norm machinery for bivariate tensor representations.
"""

from .algebra import (
    PiecewisePolynomial,
    SplineParams,
    cardinal_bspline,
    cardinal_quark,
    linear_combination,
    symmetrized_generator,
)
from .errors import (
    ConstructionFailedError,
    DivergenceError,
    FrameIndexError,
    IllConditionedError,
    InvalidParameterError,
    LevelError,
    QuarkletError,
)
from .expansion import (
    TruncationSpec,
    analyze_p0,
    frame_indices,
    gram_matrix,
    quarklet_norm_estimate,
    synthesize,
)
from .interval import BoundaryCondition, IntervalSystem, QuarkletIndex, schoenberg_bspline
from .oracle import OracleParams, hsr_norm_oracle, lr_norm_oracle, resolve_function
from .seqnorm import CoefficientField, NormParams, seq_norm_1d, weight
from .shiftinv import FilterPair, Mask, cascade, cdf_filters, shift_quarklet
from .tensor import (
    BoundaryConditions2D,
    TensorRepresentation,
    bivariate_norm_estimate,
    factorize_grid,
    nuclear_norm_objective,
    tensor_analyze_p0,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "BoundaryConditions2D",
    "CoefficientField",
    "ConstructionFailedError",
    "DivergenceError",
    "FilterPair",
    "FrameIndexError",
    "IllConditionedError",
    "IntervalSystem",
    "InvalidParameterError",
    "LevelError",
    "Mask",
    "NormParams",
    "OracleParams",
    "PiecewisePolynomial",
    "QuarkletError",
    "QuarkletIndex",
    "SplineParams",
    "TensorRepresentation",
    "TruncationSpec",
    "analyze_p0",
    "bivariate_norm_estimate",
    "cardinal_bspline",
    "cardinal_quark",
    "cascade",
    "cdf_filters",
    "factorize_grid",
    "frame_indices",
    "gram_matrix",
    "hsr_norm_oracle",
    "linear_combination",
    "lr_norm_oracle",
    "nuclear_norm_objective",
    "quarklet_norm_estimate",
    "resolve_function",
    "schoenberg_bspline",
    "seq_norm_1d",
    "shift_quarklet",
    "symmetrized_generator",
    "synthesize",
    "tensor_analyze_p0",
    "weight",
    "__version__",
]
