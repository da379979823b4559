"""Interval grids, weighted measures, sampled functions, and the mediant bound.

Everything here is immutable after construction and all operations are pure,
so values can be shared freely across threads.
"""

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Union

import numpy as np

from .errors import DegenerateMeasureError, DomainError

RULES = ("midpoint", "trapezoid")

#: absolute/relative slack used when validating weight sums
_WEIGHT_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class IntervalDomain:
    """A one-dimensional state space [lo, hi] with lo strictly below hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("domain endpoints must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"domain requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Ordered quadrature nodes with positive weights on an interval domain.

    Midpoint nodes are strictly interior; trapezoid nodes include the
    endpoints. Weights always sum to the domain length (up to 1e-12
    relative), so integrating the constant 1 recovers the interval length.
    """

    domain: IntervalDomain
    nodes: np.ndarray
    weights: np.ndarray
    rule: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", _readonly(np.asarray(self.nodes, float)))
        object.__setattr__(self, "weights", _readonly(np.asarray(self.weights, float)))
        if self.rule not in RULES:
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if self.nodes.ndim != 1 or self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if len(self.nodes) < 1:
            raise ValueError("grid must contain at least one node")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        lo, hi = self.domain.lo, self.domain.hi
        if self.rule == "midpoint":
            if self.nodes[0] <= lo or self.nodes[-1] >= hi:
                raise ValueError("midpoint nodes must be interior to the domain")
        elif self.nodes[0] < lo or self.nodes[-1] > hi:
            raise ValueError("nodes must lie within the domain")
        if np.any(self.weights <= 0):
            raise ValueError("all quadrature weights must be positive")
        total = float(np.add.reduce(self.weights))
        if abs(total - self.domain.length) > _WEIGHT_TOL * max(1.0, self.domain.length):
            raise ValueError(
                f"weights sum to {total}, expected the domain length {self.domain.length}"
            )

    def __len__(self) -> int:
        return len(self.nodes)

    def as_measure(self) -> "WeightedMeasure":
        """The quadrature weights viewed as a measure on the node indices."""
        return WeightedMeasure(np.arange(len(self)), self.weights)


def make_uniform_grid(domain: IntervalDomain, n: int, rule: str = "midpoint") -> QuadratureGrid:
    """Build a uniform composite quadrature grid with n nodes.

    midpoint: nodes lo + (i + 1/2) h with h = (hi - lo)/n, all weights h.
    trapezoid: n nodes spanning [lo, hi] with h = (hi - lo)/(n - 1),
    endpoint weights h/2 and interior weights h.
    """
    if n < 2:
        raise ValueError(f"grid size must be at least 2, got {n}")
    if rule == "midpoint":
        h = domain.length / n
        nodes = domain.lo + (np.arange(n) + 0.5) * h
        weights = np.full(n, h)
    elif rule == "trapezoid":
        h = domain.length / (n - 1)
        nodes = np.linspace(domain.lo, domain.hi, n)
        weights = np.full(n, h)
        weights[0] = weights[-1] = h / 2
    else:
        raise ValueError(f"unknown quadrature rule {rule!r}")
    return QuadratureGrid(domain, nodes, weights, rule)


@dataclass(frozen=True, eq=False)
class WeightedMeasure:
    """Non-negative masses attached to a list of node or matrix indices."""

    support: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", _readonly(np.asarray(self.support, dtype=np.intp)))
        object.__setattr__(self, "masses", _readonly(np.asarray(self.masses, float)))
        if self.support.ndim != 1 or self.support.shape != self.masses.shape:
            raise ValueError("support and masses must be 1-d arrays of equal length")
        if not np.all(np.isfinite(self.masses)):
            raise ValueError("masses must be finite")
        if np.any(self.masses < 0):
            raise ValueError("masses must be non-negative")
        if not np.any(self.masses > 0):
            raise ValueError("at least one mass must be positive")

    @classmethod
    def on_all(cls, masses: Iterable[float]) -> "WeightedMeasure":
        masses = np.asarray(list(masses) if not isinstance(masses, np.ndarray) else masses, float)
        return cls(np.arange(len(masses)), masses)

    @classmethod
    def uniform(cls, n: int) -> "WeightedMeasure":
        return cls(np.arange(n), np.ones(n))

    def charged_support(self) -> np.ndarray:
        """Indices that actually carry positive mass."""
        return self.support[self.masses > 0]


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Real values aligned with a grid or index set; every value finite."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.asarray(self.values, float)))
        if self.values.ndim != 1:
            raise ValueError("sampled function values must form a 1-d array")
        if not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise ValueError(f"non-finite value at index {bad}")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


FunctionLike = Union[SampledFunction, np.ndarray, Iterable[float]]


def _values(f: FunctionLike) -> np.ndarray:
    if isinstance(f, SampledFunction):
        return f.values
    return np.asarray(f, float)


def integrate(f: FunctionLike, mu: WeightedMeasure) -> float:
    """Sum of f over the measure, accumulated strictly left to right.

    The fixed accumulation order makes results bit-reproducible run to run.
    """
    fv = _values(f)
    if len(mu.support) and int(mu.support.max()) >= len(fv):
        raise ValueError(
            f"function of length {len(fv)} does not cover support index {int(mu.support.max())}"
        )
    total = 0.0
    for idx, mass in zip(mu.support, mu.masses):
        total += fv[idx] * mass
    return total


class MediantBounds(NamedTuple):
    inf_ratio: float
    integral_ratio: float
    sup_ratio: float


def mediant_bounds(f: FunctionLike, g: FunctionLike, mu: WeightedMeasure) -> MediantBounds:
    """Sandwich a mass-weighted ratio of integrals between pointwise ratio extremes.

    Returns (min f/g, integral(f)/integral(g), max f/g), the min and max taken
    over the charged support of mu. The middle value is guaranteed to lie in
    the interval up to 1e-12 relative floating-point slack.
    """
    fv, gv = _values(f), _values(g)
    if fv.shape != gv.shape:
        raise ValueError("f and g must have matching lengths")
    support = mu.charged_support()
    if len(support) and int(support.max()) >= len(fv):
        raise ValueError("measure support exceeds function length")
    fs, gs = fv[support], gv[support]
    if np.any(fs < 0):
        bad = int(support[np.flatnonzero(fs < 0)[0]])
        raise DomainError(f"f must be non-negative on the support; f[{bad}] = {fv[bad]}")
    if np.any(gs <= 0):
        bad = int(support[np.flatnonzero(gs <= 0)[0]])
        raise DomainError(f"g must be strictly positive on the support; g[{bad}] = {gv[bad]}")
    denom = integrate(g, mu)
    if denom <= 0:
        raise DegenerateMeasureError(f"integral of g against the measure is {denom}, must be positive")
    numer = integrate(f, mu)
    ratios = fs / gs
    return MediantBounds(
        inf_ratio=float(ratios.min()),
        integral_ratio=numer / denom,
        sup_ratio=float(ratios.max()),
    )
