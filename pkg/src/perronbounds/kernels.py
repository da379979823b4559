"""Kernel representations and the row-sum / product operations on them.

A kernel moves mass from a point x into a set of destinations. Finite state
spaces use MatrixKernel (entry (i, j) is the mass moved from state i into
state j). Interval state spaces use DensityKernel, a real density k(x, y)
against Lebesgue reference measure; DiscretizedKernel is its matrix image on
a quadrature grid (see the nystrom module).

Densities are vectorised callables: density(x, y) must accept broadcasting
numpy arrays and may be evaluated concurrently at distinct nodes.
"""

import csv
import io
import json
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DomainError, EvaluationError
from .grids import IntervalDomain, QuadratureGrid, SampledFunction


def _frozen_matrix(entries) -> np.ndarray:
    """Validate a square finite matrix and freeze it; read-only inputs are shared."""
    e = np.asarray(entries, float)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        raise ValueError(f"kernel matrix must be square, got shape {e.shape}")
    if e.shape[0] < 1:
        raise ValueError("kernel matrix must have dimension at least 1")
    if not np.all(np.isfinite(e)):
        i, j = map(int, np.argwhere(~np.isfinite(e))[0])
        raise ValueError(f"non-finite entry at ({i},{j})")
    if e.flags.writeable:
        e = e.copy()
        e.setflags(write=False)
    return e


@dataclass(frozen=True, eq=False)
class MatrixKernel:
    """Dense square matrix kernel on a finite index set."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen_matrix(self.entries))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def is_nonnegative(self) -> bool:
        return bool(np.all(self.entries >= 0))

    def require_nonnegative(self, name: str = "K") -> None:
        if not self.is_nonnegative:
            i, j = map(int, np.argwhere(self.entries < 0)[0])
            raise DomainError(f"{name} not non-negative at ({i},{j})")

    @classmethod
    def identity(cls, n: int) -> "MatrixKernel":
        return cls(np.eye(n))

    @classmethod
    def from_csv(cls, path) -> "MatrixKernel":
        with open(path, newline="") as fh:
            rows = [[float(cell) for cell in row] for row in csv.reader(fh) if row]
        return cls(np.asarray(rows, float))

    @classmethod
    def from_json_obj(cls, obj: dict) -> "MatrixKernel":
        entries = np.asarray(obj["entries"], float)
        if "n" in obj and int(obj["n"]) != entries.shape[0]:
            raise ValueError(f"declared n={obj['n']} does not match entries shape {entries.shape}")
        return cls(entries)

    def to_csv(self) -> str:
        # ASCII decimal, comma separators, LF newlines, no header.
        buf = io.StringIO()
        for row in self.entries:
            buf.write(",".join(repr(float(v)) for v in row))
            buf.write("\n")
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        return {"n": self.n, "entries": [[float(v) for v in row] for row in self.entries]}


@dataclass(frozen=True, eq=False)
class DensityKernel:
    """Evaluable density k(x, y) on an interval domain.

    With signed=False every evaluated value must be non-negative; violations
    are detected lazily when the density is actually evaluated. Signed
    densities are admissible only as test kernels, never as the base kernel
    whose spectral radius is being bounded.
    """

    domain: IntervalDomain
    density: Callable[[np.ndarray, np.ndarray], np.ndarray]
    signed: bool = False
    name: str = "density"

    def evaluate(self, x, y) -> np.ndarray:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        vals = np.asarray(self.density(x, y), float)
        if not np.all(np.isfinite(vals)):
            bx, by = _first_offender(~np.isfinite(vals), x, y, vals.shape)
            raise EvaluationError(f"{self.name}: non-finite value at (x={bx}, y={by})")
        if not self.signed and np.any(vals < 0):
            bx, by = _first_offender(vals < 0, x, y, vals.shape)
            raise DomainError(
                f"{self.name}: negative value at (x={bx}, y={by}) but kernel is declared non-negative"
            )
        return vals


def _first_offender(mask: np.ndarray, x: np.ndarray, y: np.ndarray, shape) -> tuple:
    idx = np.unravel_index(int(np.flatnonzero(mask)[0]), shape)
    xb = np.broadcast_to(x, shape)[idx] if x.size else float("nan")
    yb = np.broadcast_to(y, shape)[idx] if y.size else float("nan")
    return float(xb), float(yb)


@dataclass(frozen=True, eq=False)
class DiscretizedKernel:
    """Matrix image of a density on a quadrature grid: entry (i,j) = k(x_i, x_j) w_j."""

    grid: QuadratureGrid
    entries: np.ndarray
    signed: bool = False

    def __post_init__(self):
        e = _frozen_matrix(self.entries)
        if e.shape != (len(self.grid), len(self.grid)):
            raise ValueError(
                f"entries shape {e.shape} does not match grid of {len(self.grid)} nodes"
            )
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


KernelLike = Union[MatrixKernel, DiscretizedKernel]


def _entries(K: KernelLike) -> np.ndarray:
    if isinstance(K, (MatrixKernel, DiscretizedKernel)):
        return K.entries
    raise TypeError(f"expected a matrix or discretized kernel, got {type(K).__name__}")


def row_sum(K: KernelLike) -> SampledFunction:
    """Total outgoing mass per state: value i is the sum of row i."""
    return SampledFunction(np.sum(_entries(K), axis=1))


def kernel_product(F: KernelLike, G: KernelLike) -> MatrixKernel:
    """Compose two kernels; the finite-space analogue of matrix multiplication."""
    a, b = _entries(F), _entries(G)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return MatrixKernel(a @ b)


def product_row_sum(F: KernelLike, G: KernelLike) -> SampledFunction:
    """Row sums of the composed kernel, computed as F applied to row_sum(G).

    On a finite index set this equals row_sum(kernel_product(F, G)) entry by
    entry; the two evaluation orders are the interchange that the absolute
    product mass hypothesis protects in the continuum case.
    """
    a, b = _entries(F), _entries(G)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return SampledFunction(a @ np.sum(b, axis=1))


def absolute_product_mass(
    F: DensityKernel,
    G: DensityKernel,
    grid: QuadratureGrid,
    aggregate: str = "sup",
    block: int = 128,
) -> float:
    """Quadrature estimate of the absolute mass of the composed kernel.

    Computes, per outer point x, the double sum over (y, z) of
    |f(x,y) g(y,z)| w_y w_z, then aggregates over x: "sup" (default) takes
    the maximum, "integral" integrates over x with the grid weights.

    A sequence of estimates over refining grids that keeps growing without
    apparent bound signals that the interchange-of-integrals hypothesis
    fails for the pair, so the sandwich bound is not trustworthy.
    """
    if aggregate not in ("sup", "integral"):
        raise ValueError(f"unknown aggregate {aggregate!r}")
    nodes, w = grid.nodes, grid.weights
    n = len(grid)
    inner = np.empty(n)  # inner[j] = sum_z |g(y_j, z)| w_z
    for lo in range(0, n, block):
        ys = nodes[lo : lo + block, None]
        inner[lo : lo + block] = np.abs(G.evaluate(ys, nodes[None, :])) @ w
    per_x = np.empty(n)
    wa = w * inner
    for lo in range(0, n, block):
        xs = nodes[lo : lo + block, None]
        per_x[lo : lo + block] = np.abs(F.evaluate(xs, nodes[None, :])) @ wa
    if aggregate == "sup":
        return float(per_x.max())
    total = 0.0
    for wi, ti in zip(w, per_x):
        total += wi * ti
    return total


# ---------------------------------------------------------------------------
# built-in kernel families

UNIT = IntervalDomain(0.0, 1.0)


def _expression(spec) -> Callable[[np.ndarray], np.ndarray]:
    """Small vocabulary of one-dimensional profiles: affine 1 + b*t, or exp(b*t)."""
    if isinstance(spec, (int, float)):
        c = float(spec)
        return lambda t: np.full_like(np.asarray(t, float), c)
    kind = spec.get("kind")
    beta = float(spec.get("beta", 1.0))
    if kind == "affine":
        return lambda t: 1.0 + beta * np.asarray(t, float)
    if kind == "exp":
        return lambda t: np.exp(beta * np.asarray(t, float))
    raise ValueError(f"unknown expression kind {kind!r}")


def _split_inverse_square(y, z):
    """Signed density: +1/y**2 at or below the diagonal, -1/z**2 above it.

    The edge values continue the pattern: +1 on the line y = 0 and -1 on
    z = 0 (away from y = 0). Row sums over z equal 1 for every y, while the
    composition with the unit Lebesgue kernel has row sums equal to -1; the
    absolute mass over the square is infinite, which is exactly why those
    two iterated integrals may disagree.
    """
    y = np.asarray(y, float)
    z = np.asarray(z, float)
    yb, zb = np.broadcast_arrays(y, z)
    below = zb <= yb
    t = np.where(below, yb, zb)
    with np.errstate(divide="ignore"):
        np.multiply(t, t, out=t)
        mag = np.divide(1.0, t, out=t)
    out = np.where(below, mag, -mag)
    # the zero edges never occur on midpoint grids; patch them only if present
    if (y.size and y.min() <= 0) or (z.size and z.min() <= 0):
        out = np.where(zb == 0, np.where(yb == 0, 1.0, -1.0), out)
        out = np.where(yb == 0, 1.0, out)
    return out


def builtin_kernel(family: str, params: dict | None = None, domain=None, signed=None) -> DensityKernel:
    """Construct one of the built-in density kernel families.

    constant(c): density c everywhere (c >= 0 unless signed=True).
    rank_one(a, b): density a(x) * b(y) with profiles from the expression
        vocabulary (affine or exponential).
    lebesgue: density 1 on [0, 1]; every row is the uniform distribution.
    fubini_counterexample: the signed split inverse-square kernel on [0, 1]
        whose iterated integrals disagree (always signed).
    """
    params = dict(params or {})
    if family == "constant":
        c = float(params.get("c", 1.0))
        dom = IntervalDomain(*domain) if domain is not None else UNIT
        is_signed = bool(signed) if signed is not None else False
        if c < 0 and not is_signed:
            raise DomainError(f"constant kernel with c={c} requires the signed flag")
        return DensityKernel(
            dom, lambda x, y: np.full(np.broadcast_shapes(np.shape(x), np.shape(y)), c),
            signed=is_signed, name=f"constant({c})",
        )
    if family == "rank_one":
        a = _expression(params.get("a", {"kind": "affine", "beta": 1.0}))
        b = _expression(params.get("b", {"kind": "affine", "beta": 1.0}))
        dom = IntervalDomain(*domain) if domain is not None else UNIT
        is_signed = bool(signed) if signed is not None else False
        return DensityKernel(
            dom, lambda x, y: a(x) * b(y), signed=is_signed, name="rank_one",
        )
    if family == "lebesgue":
        return DensityKernel(
            UNIT, lambda x, y: np.ones(np.broadcast_shapes(np.shape(x), np.shape(y))),
            signed=False, name="lebesgue",
        )
    if family == "fubini_counterexample":
        return DensityKernel(UNIT, _split_inverse_square, signed=True, name="fubini_counterexample")
    raise ValueError(f"unknown kernel family {family!r}")


def density_from_spec(obj: dict) -> DensityKernel:
    """Parse the JSON density description {"family", "params", "domain", "signed"}."""
    return builtin_kernel(
        obj["family"],
        obj.get("params"),
        domain=obj.get("domain"),
        signed=obj.get("signed"),
    )


def load_kernel_file(path):
    """Load a kernel input file: matrix CSV, matrix JSON, or density spec JSON.

    Returns a MatrixKernel or a DensityKernel depending on the contents.
    """
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{") or stripped.startswith("["):
        obj = json.loads(text)
        if isinstance(obj, dict) and "family" in obj:
            return density_from_spec(obj)
        if isinstance(obj, dict) and "entries" in obj:
            return MatrixKernel.from_json_obj(obj)
        if isinstance(obj, list):
            return MatrixKernel(np.asarray(obj, float))
        raise ValueError(f"{path}: unrecognised kernel JSON layout")
    return MatrixKernel.from_csv(path)
