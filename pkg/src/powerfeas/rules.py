"""Constructors for the norm-like functions used as adjustment rules.

Rules are closed data (weights plus a combinator tree), not opaque
callables, so feasibility reports can name the binding weighted sum.
All of them evaluate through ``__call__`` on a plain vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .core import (
    InvalidFunctionError,
    InvalidInputError,
    Vector,
    sup_norm,
)


def _check_dim(x: np.ndarray, dim: int, what: str) -> None:
    if x.shape != (dim,):
        raise InvalidInputError(f"{what}: expected a vector of length {dim}, got shape {x.shape}")


@dataclass(frozen=True)
class WeightedAbsSum:
    """Weighted sum of absolute components: sum_m |a_m * x_m|.

    Zero weights are permitted (a terminal with a degenerate gain simply
    drops out); the result is then a semi-norm rather than a norm, which
    is still admissible as an adjustment rule.
    """

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) < 1:
            raise InvalidInputError("WeightedAbsSum: need at least one weight")
        if not all(math.isfinite(v) for v in w):
            raise InvalidInputError("WeightedAbsSum: weights must be finite")

    @property
    def dim(self) -> int:
        return len(self.weights)

    @cached_property
    def _abs_weights(self) -> np.ndarray:
        arr = np.abs(np.array(self.weights, dtype=float))
        arr.flags.writeable = False
        return arr

    def __call__(self, x: Vector) -> float:
        arr = np.asarray(x, dtype=float)
        _check_dim(arr, self.dim, "WeightedAbsSum")
        return float(self._abs_weights @ np.abs(arr))


@dataclass(frozen=True)
class HolderNorm:
    """Holder p-norm, p >= 1; p = inf gives the sup norm."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        object.__setattr__(self, "p", p)
        if math.isnan(p) or p < 1.0:
            raise InvalidInputError(f"HolderNorm: p must be >= 1 or inf, got {p}")

    def __call__(self, x: Vector) -> float:
        arr = np.abs(np.asarray(x, dtype=float))
        if arr.size == 0:
            raise InvalidInputError("HolderNorm: empty vector")
        if math.isinf(self.p):
            return float(arr.max())
        if self.p == 1.0:
            return float(arr.sum())
        if self.p == 2.0:
            return float(math.sqrt(float(arr @ arr)))
        return float(np.power(np.power(arr, self.p).sum(), 1.0 / self.p))


OuterNorm = Union[HolderNorm, Callable[[np.ndarray], float]]


def _passes_absolute_norm_test(f: Callable[[np.ndarray], float], dim: int) -> bool:
    """Sampled check that ``f`` behaves like a monotonic (= absolute) norm."""
    rng = np.random.default_rng(1729)
    for _ in range(200):
        x = rng.uniform(-10.0, 10.0, size=dim)
        fx = float(f(x))
        f_abs = float(f(np.abs(x)))
        tol = 1e-9 * (1.0 + abs(fx) + abs(f_abs))
        if not math.isfinite(fx) or fx < 0.0:
            return False
        if abs(fx - f_abs) > tol:
            return False
        bigger = np.abs(x) + rng.uniform(0.0, 5.0, size=dim)
        if f_abs > float(f(bigger)) + tol:
            return False
    return True


@dataclass(frozen=True)
class NormOfNorms:
    """Outer monotonic norm applied to a stack of weighted-abs-sum values.

    The outer norm must be monotonic for the composition to remain a norm;
    Holder norms (including inf) qualify by construction, any other callable
    is accepted only if it passes a sampled absolute-norm test.
    """

    inner: tuple[WeightedAbsSum, ...]
    outer: OuterNorm = field(default_factory=lambda: HolderNorm(math.inf))

    def __post_init__(self):
        inner = tuple(self.inner)
        object.__setattr__(self, "inner", inner)
        if len(inner) < 1:
            raise InvalidInputError("NormOfNorms: need at least one inner function")
        dim = inner[0].dim
        if any(w.dim != dim for w in inner):
            raise InvalidInputError("NormOfNorms: inner functions must share one dimension")
        if not isinstance(self.outer, HolderNorm):
            if not callable(self.outer):
                raise InvalidInputError("NormOfNorms: outer must be a HolderNorm or a callable norm")
            if not _passes_absolute_norm_test(self.outer, len(inner)):
                raise InvalidInputError(
                    "NormOfNorms: outer callable failed the absolute-norm sample test"
                )

    @property
    def dim(self) -> int:
        return self.inner[0].dim

    @cached_property
    def _weight_matrix(self) -> np.ndarray:
        arr = np.abs(np.array([w.weights for w in self.inner], dtype=float))
        arr.flags.writeable = False
        return arr

    def inner_values(self, x: Vector) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        _check_dim(arr, self.dim, "NormOfNorms")
        return self._weight_matrix @ np.abs(arr)

    def __call__(self, x: Vector) -> float:
        return float(self.outer(self.inner_values(x)))

    def binding_inner(self, x: Vector) -> int | None:
        """Index of the inner sum attaining the value, when outer is the sup norm."""
        if isinstance(self.outer, HolderNorm) and math.isinf(self.outer.p):
            return int(np.argmax(self.inner_values(x)))
        return None


@dataclass(frozen=True)
class DominationBound:
    """Scaled sup norm that pointwise over-estimates a dominated rule.

    ``scale`` equals the dominated function's value at the all-ones vector;
    the bound is valid whenever that function is non-negative, max-monotone
    and sub-homogeneous for every positive scaling factor.
    """

    scale: float
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "dim", int(self.dim))
        if not math.isfinite(self.scale) or self.scale < 0.0:
            raise InvalidInputError(f"DominationBound: scale must be finite and >= 0, got {self.scale}")
        if self.dim < 1:
            raise InvalidInputError("DominationBound: dim must be >= 1")

    def __call__(self, x: Vector) -> float:
        arr = np.asarray(x, dtype=float)
        _check_dim(arr, self.dim, "DominationBound")
        return sup_norm(arr) * self.scale


def dominate(f: Callable[[np.ndarray], float], dim: int) -> DominationBound:
    """Build the sup-norm bound for ``f`` from its value at the all-ones vector.

    The caller asserts that ``f`` is non-negative, max-monotone and
    sub-homogeneous for all positive factors (the axioms module can verify
    this on samples); under those hypotheses the returned bound satisfies
    ``bound(x) >= f(x)`` everywhere.
    """
    try:
        at_ones = float(f(np.ones(int(dim))))
    except Exception as exc:
        raise InvalidFunctionError(f"dominate: function failed at the all-ones vector: {exc}") from exc
    if not math.isfinite(at_ones) or at_ones < 0.0:
        raise InvalidFunctionError(
            f"dominate: function value at the all-ones vector must be finite and >= 0, got {at_ones}"
        )
    return DominationBound(scale=at_ones, dim=int(dim))
