"""Abscissa and radius of spectral value sets of descriptor systems.

The spectral value set of ``G(lam) = C (lam E - A)^{-1} B + D`` for a given
``epsilon`` is the set of points where ``||G(lam)||_2 >= 1/epsilon``, together
with the finite eigenvalues of the pencil ``(A, E)``.
"""
import os

_threads = os.environ.get("SPECVALSET_NUM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .errors import (  # noqa: E402
    DimensionMismatch,
    EmptyInclusion,
    EpsilonTooLarge,
    InvalidEpsilon,
    NumericalFailure,
    ParseError,
    PoleProximity,
    SingularE,
    SvsError,
)
from .linalg import DenseBackend, Resolvent, generalized_eigs, svd_full  # noqa: E402
from .options import SolverOptions, Tolerances  # noqa: E402
from .system import (  # noqa: E402
    StateSpaceSystem,
    SvsProblem,
    classify_spectrum,
    initial_point,
    validate,
)
from .transfer import TransferEvaluator  # noqa: E402
from .solvers import (  # noqa: E402
    SolveReport,
    membership,
    solve,
    svs_abscissa,
    svs_direct_extended,
    svs_radius,
)

__all__ = [
    "DenseBackend",
    "DimensionMismatch",
    "EmptyInclusion",
    "EpsilonTooLarge",
    "InvalidEpsilon",
    "NumericalFailure",
    "ParseError",
    "PoleProximity",
    "Resolvent",
    "SingularE",
    "SolveReport",
    "SolverOptions",
    "StateSpaceSystem",
    "SvsError",
    "SvsProblem",
    "Tolerances",
    "TransferEvaluator",
    "classify_spectrum",
    "generalized_eigs",
    "initial_point",
    "membership",
    "solve",
    "svd_full",
    "svs_abscissa",
    "svs_direct_extended",
    "svs_radius",
    "validate",
]
