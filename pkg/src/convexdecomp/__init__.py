"""Canonical decomposition of convex functions into a coercive core and a linear part."""
from ._backend import BACKEND
from .coercive import (CoercivityVerdict, Status, Witness, build_witness, directional_verdict,
                       flat_segment_check, separation_rank, strict_minimum_witness,
                       verify_witness)
from .corpus import (CorpusEntry, make_example33, make_example_gamma, make_graded_corpus,
                     make_weighted_quadratic, theta)
from .decomp import (DecompConfig, Decomposition, constancy_space, decompose,
                     verify_decomposition)
from .errors import (ConvexDecompError, DimensionError, InconclusiveError, InconsistencyError,
                     OracleError, PreconditionError, RangeError, SpecFormatError)
from .funcrepr import (AffinePlus, BlackBox, ConvexFunction, Kernel, MaxAffine, Quadratic,
                       ScalarComposite, SubgradientSample, Sum, Term, evaluate, subgradient,
                       validate_subgradient)
from .vecspace import (Subspace, accumulate_span, complement_project, orthogonal_complement,
                       project, subspace_distance)

__version__ = "0.1.0"

__all__ = [
    "AffinePlus",
    "BACKEND",
    "BlackBox",
    "CoercivityVerdict",
    "ConvexDecompError",
    "ConvexFunction",
    "CorpusEntry",
    "DecompConfig",
    "Decomposition",
    "DimensionError",
    "InconclusiveError",
    "InconsistencyError",
    "Kernel",
    "MaxAffine",
    "OracleError",
    "PreconditionError",
    "Quadratic",
    "RangeError",
    "ScalarComposite",
    "SpecFormatError",
    "Status",
    "SubgradientSample",
    "Subspace",
    "Sum",
    "Term",
    "Witness",
    "accumulate_span",
    "build_witness",
    "complement_project",
    "constancy_space",
    "decompose",
    "directional_verdict",
    "evaluate",
    "flat_segment_check",
    "make_example33",
    "make_example_gamma",
    "make_graded_corpus",
    "make_weighted_quadratic",
    "orthogonal_complement",
    "project",
    "separation_rank",
    "strict_minimum_witness",
    "subgradient",
    "subspace_distance",
    "theta",
    "validate_subgradient",
    "verify_decomposition",
    "verify_witness",
]

