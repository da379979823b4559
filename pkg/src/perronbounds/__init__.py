"""Certified lower/upper bounds on the Perron root of non-negative kernels.

Finite matrices and interval density kernels share the same machinery: the
spectral radius is sandwiched between the extremes of the test-kernel
row-sum ratio, verified against a power-iteration oracle, and tightened by
stepping the test kernel through powers of the base kernel. A built-in
signed kernel demonstrates how the sandwich fails when the absolute product
mass diverges, and a queueing application extracts effective decay rates
from exponentially tilted transition matrices.
"""

from .bounds import BoundsReport, matrix_power_rescaled, perron_bounds, refine_bounds
from .counterexample import CounterexampleReport, verify_counterexample
from .decay import (
    DecayRateResult,
    ModulatedSource,
    decay_rate_bounds,
    effective_decay_rate,
    tilt_kernel,
)
from .errors import (
    DegenerateMeasureError,
    DomainError,
    EvaluationError,
    HypothesisViolationError,
    NoConvergenceError,
    NoRootError,
    PerronBoundsError,
    UnstableSystemError,
    VerificationFailure,
)
from .grids import (
    IntervalDomain,
    MediantBounds,
    QuadratureGrid,
    SampledFunction,
    WeightedMeasure,
    integrate,
    make_uniform_grid,
    mediant_bounds,
)
from .kernels import (
    DensityKernel,
    DiscretizedKernel,
    MatrixKernel,
    absolute_product_mass,
    builtin_kernel,
    density_from_spec,
    kernel_product,
    load_kernel_file,
    product_row_sum,
    row_sum,
)
from .nystrom import convergence_study, discretize, study_to_csv
from .oracle import EigenPair, left_power_iteration, power_iteration

__version__ = "0.1.0"

__all__ = [
    "BoundsReport",
    "CounterexampleReport",
    "DecayRateResult",
    "DegenerateMeasureError",
    "DensityKernel",
    "DiscretizedKernel",
    "DomainError",
    "EigenPair",
    "EvaluationError",
    "HypothesisViolationError",
    "IntervalDomain",
    "MatrixKernel",
    "MediantBounds",
    "ModulatedSource",
    "NoConvergenceError",
    "NoRootError",
    "PerronBoundsError",
    "QuadratureGrid",
    "SampledFunction",
    "UnstableSystemError",
    "VerificationFailure",
    "WeightedMeasure",
    "absolute_product_mass",
    "builtin_kernel",
    "convergence_study",
    "decay_rate_bounds",
    "density_from_spec",
    "discretize",
    "effective_decay_rate",
    "integrate",
    "kernel_product",
    "left_power_iteration",
    "load_kernel_file",
    "make_uniform_grid",
    "matrix_power_rescaled",
    "mediant_bounds",
    "perron_bounds",
    "power_iteration",
    "product_row_sum",
    "refine_bounds",
    "row_sum",
    "study_to_csv",
    "tilt_kernel",
    "verify_counterexample",
]
