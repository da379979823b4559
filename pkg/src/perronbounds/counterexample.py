"""The signed kernel that breaks the sandwich when absolute mass diverges.

Pair the unit Lebesgue kernel (base, non-negative, spectral radius 1) with
the split inverse-square test kernel on [0, 1]. The test kernel's row sums
are identically 1, yet the row sums of the composed kernel are identically
-1, so the ratio bound collapses to -1 on both sides even though the base
kernel's spectral radius is 1. There is no contradiction: the absolute mass
of the composition is infinite, the two iterated integrals disagree, and
the sandwich hypothesis simply fails.

Numerically the failure shows up as an order-of-integration dependence.
This module evaluates both orders with singularity-aware nested quadrature
(composite midpoint per smooth piece, geometrically graded toward the
diagonal kink) and reports the collapse, alongside the diverging
absolute-mass trend. Note that discretizing both kernels on one shared grid
can never reproduce the collapse: a finite matrix pair always satisfies the
sandwich, and the shared-grid double sum tends to pi^2/2 rather than -1 or
+1 because the off-diagonal contributions cancel pairwise.
"""

import json
from dataclasses import dataclass

import numpy as np

from .bounds import perron_bounds
from .errors import VerificationFailure
from .grids import SampledFunction, make_uniform_grid
from .kernels import absolute_product_mass, builtin_kernel
from .nystrom import discretize
from .oracle import power_iteration

#: nodes closer to the singular corner than NEAR_SINGULAR_FACTOR / n are
#: exempted from pointwise agreement checks (and counted, never hidden)
NEAR_SINGULAR_FACTOR = 10.0

#: quadrature tolerance for the pointwise and collapsed-bound checks
CHECK_TOL = 5e-2

_EXACT_ROW_SUM = 1.0
_EXACT_PRODUCT_ROW_SUM = -1.0


def row_sum_exact(y: float) -> float:
    """Closed-form row sum of the test kernel, equal to 1 for every y in [0, 1].

    The two pieces integrate to 1/y and -(1/y - 1); the evaluated difference
    is returned rather than the constant so the cancellation is exercised.
    Rounding grows with 1/y, staying within 1e-12 of 1 for y >= about 1e-3.
    """
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"y={y} outside [0, 1]")
    if y == 0.0:
        return 1.0  # the density is the constant 1 on this line
    u = 1.0 / y
    return u - (u - 1.0)


def product_row_sum_exact(x: float) -> float:
    """Closed-form row sum of (base . test), equal to -1 independent of x.

    The inner integral over the first variable gives -1/z + (1/z - 1) = -1
    for every z, and integrating the constant over z keeps -1. The
    cancellation is evaluated at z = x (or z = 1/2 when x = 0) to exercise
    the arithmetic.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
    z = x if x > 0.0 else 0.5
    u = 1.0 / z
    return (u - 1.0) - u


def _inverse_square_tail(points, cells: int, block: int = 64) -> np.ndarray:
    """Composite midpoint estimate of the integral of t**-2 over [a, 1].

    One geometric mesh per left endpoint a, graded toward a where the
    integrand peaks; cells controls the mesh size. Exact value is 1/a - 1.
    """
    pts = np.asarray(points, float)
    if np.any(pts <= 0) or np.any(pts > 1):
        raise ValueError("tail integral endpoints must lie in (0, 1]")
    out = np.empty_like(pts)
    exponents = 1.0 - np.arange(cells + 1, dtype=float) / cells
    for lo in range(0, len(pts), block):
        a = pts[lo : lo + block, None]
        edges = a ** exponents[None, :]
        mids = 0.5 * (edges[:, :-1] + edges[:, 1:])
        out[lo : lo + block] = np.sum(np.diff(edges, axis=1) / mids**2, axis=1)
    return out


def row_sum_numeric(points, cells: int) -> np.ndarray:
    """Nested-quadrature row sums of the test kernel at the given points.

    Integration runs over the second variable first, split at the diagonal
    kink: the piece below the diagonal is constant (midpoint exact), the
    inverse-square piece above it uses the graded mesh. Converges to the
    exact value 1, degrading near 0 like (1/y) (log 1/y)^2 / cells^2.
    """
    pts = np.asarray(points, float)
    return 1.0 / pts - _inverse_square_tail(pts, cells)


def product_density_numeric(points, cells: int) -> np.ndarray:
    """Nested-quadrature density of (base . test) at the given points.

    Same split, integrating over the first variable at fixed second
    argument: the constant piece contributes -1/z exactly, the
    inverse-square piece uses the graded mesh. Converges to -1.
    """
    pts = np.asarray(points, float)
    return _inverse_square_tail(pts, cells) - 1.0 / pts


def _ordered_sum(values) -> float:
    total = 0.0
    for v in values:
        total += float(v)
    return total


@dataclass(frozen=True, eq=False)
class CounterexampleReport:
    """Everything measured while reproducing the sandwich failure.

    row_sum_* hold the test kernel's row sums (exact constant 1),
    product_row_sum_* the composed kernel's row sums (exact constant -1).
    lower/upper are the ratio-bound extremes over the witness nodes;
    rowsum_first_value is the same composition evaluated in the opposite
    (row-sum-first) order, which lands near +1 instead, exhibiting the
    interchange failure. matrix_bounds_* come from the shared-grid
    discretized pair and bracket the base kernel's radius as every finite
    truncation must.
    """

    grid_size: int
    row_sum_numeric: SampledFunction
    row_sum_exact: float
    product_row_sum_numeric: SampledFunction
    product_row_sum_exact: float
    lower: float
    upper: float
    rho_base: float
    abs_mass_trend: tuple
    exempted_nodes: int
    rowsum_first_value: float
    matrix_bounds_lower: float
    matrix_bounds_upper: float
    notes: tuple = ()

    def to_dict(self) -> dict:
        return {
            "grid_size": int(self.grid_size),
            "row_sum_exact": float(self.row_sum_exact),
            "product_row_sum_exact": float(self.product_row_sum_exact),
            "lower": float(self.lower),
            "upper": float(self.upper),
            "rho_base": float(self.rho_base),
            "abs_mass_trend": [[int(s), float(v)] for s, v in self.abs_mass_trend],
            "exempted_nodes": int(self.exempted_nodes),
            "rowsum_first_value": float(self.rowsum_first_value),
            "matrix_bounds_lower": float(self.matrix_bounds_lower),
            "matrix_bounds_upper": float(self.matrix_bounds_upper),
            "notes": list(self.notes),
            "row_sum_numeric": [float(v) for v in self.row_sum_numeric],
            "product_row_sum_numeric": [float(v) for v in self.product_row_sum_numeric],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def verify_counterexample(grid_sizes, tolerance: float = CHECK_TOL) -> CounterexampleReport:
    """Reproduce the sandwich failure across refining midpoint grids.

    Runs the absolute-mass diagnostic at every size, then at the largest
    size checks, raising VerificationFailure naming the first check that
    fails:

      (a) numeric test-kernel row sums agree with 1 to the tolerance at
          every node outside the near-singular exemption band;
      (b) the numeric composed row sum agrees with -1 to the tolerance;
      (c) the ratio bounds over non-exempt nodes collapse onto -1;
      (d) the discretized base kernel's radius is 1 to 1e-10 (the matrix
          is stochastic by construction);
      (e) the absolute-mass trend is strictly increasing.

    Check (c) is skipped with a note when every node falls inside the
    exemption band (grids of 10 or fewer nodes).
    """
    sizes = [int(s) for s in grid_sizes]
    if not sizes:
        raise ValueError("at least one grid size is required")
    if any(s < 10 for s in sizes):
        raise ValueError(f"grid sizes must be at least 10, got {sizes}")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"grid sizes must be strictly increasing, got {sizes}")

    base = builtin_kernel("lebesgue")
    test = builtin_kernel("fubini_counterexample")

    trend = []
    for size in sizes:
        grid = make_uniform_grid(base.domain, size, "midpoint")
        trend.append((size, absolute_product_mass(base, test, grid)))

    n = sizes[-1]
    grid = make_uniform_grid(base.domain, n, "midpoint")
    cells = max(n, 256)
    rg = row_sum_numeric(grid.nodes, cells)
    pd = product_density_numeric(grid.nodes, cells)
    # outer integral over the second variable; constant in the first because
    # the base kernel's density does not depend on its left argument
    fg_value = _ordered_sum(grid.weights * pd)
    fg = np.full(n, fg_value)
    # the opposite order: base kernel applied to the accurate test row sums
    rowsum_first = _ordered_sum(grid.weights * rg)

    exempt = grid.nodes < NEAR_SINGULAR_FACTOR / n
    witness = ~exempt if not exempt.all() else np.ones(n, bool)
    ratios = fg[witness] / rg[witness]
    lower = float(ratios.min())
    upper = float(ratios.max())

    notes = [
        "collapsed bounds follow the composition-order nested quadrature; "
        "the interchange fails, so the opposite order lands near +1",
        "absolute-mass growth across sizes is consistent with divergence "
        "(divergence itself is not provable from finitely many evaluations)",
    ]
    if exempt.all():
        notes.append("all nodes fall in the near-singular exemption band; bound collapse check skipped")

    disc_base = discretize(base, grid)
    rho_base = power_iteration(disc_base, tol=1e-12).rho
    del disc_base

    # shared-grid truncation: the finite sandwich must hold, illustrating
    # that the collapse is purely a continuum effect
    demo_n = min(n, 1000)
    demo_grid = make_uniform_grid(base.domain, demo_n, "midpoint")
    matrix_report = perron_bounds(
        discretize(base, demo_grid),
        discretize(test, demo_grid),
        allow_signed_density=True,
    )
    notes.append(
        f"shared-grid discretization at n={demo_n} gives bounds "
        f"({matrix_report.lower!r}, {matrix_report.upper!r}) which bracket the radius 1, "
        "as every finite truncation must"
    )

    report = CounterexampleReport(
        grid_size=n,
        row_sum_numeric=SampledFunction(rg),
        row_sum_exact=_EXACT_ROW_SUM,
        product_row_sum_numeric=SampledFunction(fg),
        product_row_sum_exact=_EXACT_PRODUCT_ROW_SUM,
        lower=lower,
        upper=upper,
        rho_base=rho_base,
        abs_mass_trend=tuple(trend),
        exempted_nodes=int(exempt.sum()),
        rowsum_first_value=rowsum_first,
        matrix_bounds_lower=matrix_report.lower,
        matrix_bounds_upper=matrix_report.upper,
        notes=tuple(notes),
    )

    _run_checks(report, witness_errors=np.abs(rg[~exempt] - 1.0), tolerance=tolerance,
                all_exempt=bool(exempt.all()))
    return report


def _run_checks(report: CounterexampleReport, witness_errors: np.ndarray, tolerance: float,
                all_exempt: bool) -> None:
    if witness_errors.size and witness_errors.max() > tolerance:
        raise VerificationFailure(
            f"row-sum agreement: worst non-exempt deviation {witness_errors.max()!r} "
            f"exceeds {tolerance}"
        )
    fg_err = abs(report.product_row_sum_numeric[0] - report.product_row_sum_exact)
    if fg_err > tolerance:
        raise VerificationFailure(
            f"product row-sum agreement: deviation {fg_err!r} exceeds {tolerance}"
        )
    if not all_exempt:
        dev = max(abs(report.lower + 1.0), abs(report.upper + 1.0))
        if dev > tolerance:
            raise VerificationFailure(
                f"bound collapse: bounds ({report.lower!r}, {report.upper!r}) "
                f"deviate from -1 by {dev!r}, exceeding {tolerance}"
            )
    if abs(report.rho_base - 1.0) > 1e-10:
        raise VerificationFailure(
            f"base-kernel spectral radius: {report.rho_base!r} is not 1 to 1e-10"
        )
    values = [v for _, v in report.abs_mass_trend]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise VerificationFailure(
            f"absolute-mass growth: trend {values} is not strictly increasing"
        )
