"""Fixed-point machinery: certification, successive approximation, oracle.

A :class:`System` bundles one adjustment rule per terminal. The update map
applies every rule synchronously to the previous iterate; when each rule's
function evaluates below 1 at the all-ones vector, the map is a contraction
in the sup norm with modulus equal to the largest such value, so Picard
iteration converges to the unique fixed point from any starting vector.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    AdjustmentRule,
    FeasibilityReport,
    InfeasibleSystemError,
    InvalidFunctionError,
    InvalidInputError,
    IterationTrace,
    NonConvergenceError,
    PowerVector,
    remove_component,
    sup_norm,
)
from .rules import WeightedAbsSum

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class System:
    """N coupled adjustment rules; rule i consumes the other N-1 powers."""

    rules: tuple[AdjustmentRule, ...]

    def __post_init__(self):
        rules = tuple(self.rules)
        object.__setattr__(self, "rules", rules)
        if len(rules) < 2:
            raise InvalidInputError("System: need at least two terminals")
        for i, rule in enumerate(rules):
            if rule.terminal_index != i:
                raise InvalidInputError(
                    f"System: rule at position {i} is labelled terminal {rule.terminal_index}"
                )
            dim = getattr(rule.f, "dim", None)
            if dim is not None and dim != len(rules) - 1:
                raise InvalidInputError(
                    f"System: rule {i + 1} consumes {dim} powers, expected {len(rules) - 1}"
                )

    @property
    def n(self) -> int:
        return len(self.rules)

    def step(self, x: np.ndarray) -> np.ndarray:
        """One synchronous update: every component from the previous iterate."""
        out = np.empty(self.n)
        for i, rule in enumerate(self.rules):
            out[i] = rule.f(remove_component(x, i)) + rule.offset
        return out


@dataclass(frozen=True)
class SolveConfig:
    tolerance: float = DEFAULT_TOLERANCE
    max_iter: int = DEFAULT_MAX_ITER
    initial: Optional[PowerVector] = None

    def __post_init__(self):
        if not (math.isfinite(self.tolerance) and self.tolerance > 0.0):
            raise InvalidInputError(f"SolveConfig: tolerance must be > 0, got {self.tolerance}")
        if self.max_iter < 1:
            raise InvalidInputError(f"SolveConfig: max_iter must be >= 1, got {self.max_iter}")


def lift_rule(f: Callable[[np.ndarray], float], i: int) -> Callable[[np.ndarray], float]:
    """View a rule on the other terminals' powers as a function of all powers.

    The lifted function ignores component ``i``; it inherits every axiom of
    ``f``, which is what makes the whole update map a contraction.
    """

    def lifted(x: np.ndarray) -> float:
        return float(f(remove_component(x, i)))

    return lifted


def contraction_modulus(system: System) -> FeasibilityReport:
    """Evaluate every rule at the all-ones vector and report the maximum.

    The system is feasible exactly when the maximum is below 1 (strictly);
    the binding entry names the terminal attaining it, plus the receiver
    when the rule exposes one.
    """
    ones = np.ones(system.n - 1)
    moduli = []
    for rule in system.rules:
        value = float(rule.f(ones))
        if not math.isfinite(value):
            raise InvalidFunctionError(
                f"contraction_modulus: rule for terminal {rule.terminal_index + 1} "
                f"is {value} at the all-ones vector"
            )
        moduli.append(value)
    lam = max(moduli)
    term = moduli.index(lam)
    binder = getattr(system.rules[term].f, "binding_inner", None)
    receiver = binder(ones) if binder is not None else None
    return FeasibilityReport(
        per_terminal_modulus=tuple(moduli),
        modulus=lam,
        feasible=lam < 1.0,
        binding=(term, receiver),
    )


def solve(
    system: System,
    config: SolveConfig = SolveConfig(),
    *,
    force: bool = False,
) -> tuple[PowerVector, IterationTrace]:
    """Run synchronous Picard iteration to the fixed point.

    Refuses to start when the contraction modulus is >= 1 unless ``force``
    is set; forced runs are annotated ``certified=False`` in the trace and
    may legitimately end in :class:`NonConvergenceError` (carrying the
    partial trace) when the iterates diverge or stall.

    Stopping: with modulus ``lam < 1``, iteration stops once the step size
    drops below ``tolerance * (1 - lam)``. By the standard a-posteriori
    bound this puts the returned vector within ``tolerance`` of the exact
    fixed point and leaves a residual ``sup_norm(T(p*) - p*) <= tolerance``.
    """
    report = contraction_modulus(system)
    if not report.feasible and not force:
        raise InfeasibleSystemError(
            f"solve: contraction modulus {report.modulus} >= 1; pass force=True to iterate anyway",
            report=report,
        )
    certified = report.feasible
    threshold = config.tolerance * (1.0 - report.modulus) if certified else config.tolerance

    if config.initial is None:
        x = np.zeros(system.n)
    else:
        if len(config.initial) != system.n:
            raise InvalidInputError(
                f"solve: initial vector has {len(config.initial)} entries, system has {system.n}"
            )
        x = config.initial.as_array()

    iterates = [PowerVector(tuple(x))]
    deltas: list[float] = []

    def build_trace(converged: bool) -> IterationTrace:
        return IterationTrace(
            iterates=tuple(iterates),
            deltas=tuple(deltas),
            converged=converged,
            iterations_used=len(deltas),
            tolerance=config.tolerance,
            certified=certified,
        )

    for _ in range(config.max_iter):
        nxt = system.step(x)
        if not np.all(np.isfinite(nxt)):
            raise NonConvergenceError(
                "solve: iterates left the finite range (diverging run)",
                trace=build_trace(False),
            )
        delta = sup_norm(nxt - x)
        deltas.append(delta)
        iterates.append(PowerVector(tuple(nxt)))
        x = nxt
        if delta <= threshold:
            trace = build_trace(True)
            return trace.final, trace

    raise NonConvergenceError(
        f"solve: no convergence within {config.max_iter} iterations "
        f"(last step {deltas[-1] if deltas else 'n/a'})",
        trace=build_trace(False),
    )


def linear_oracle(A: Sequence[Sequence[float]], c: Sequence[float]) -> PowerVector:
    """Exact solution of p = A p + c by direct elimination with partial pivoting.

    Independent ground truth for affine systems: A must be square and
    non-negative with a zero diagonal, c non-negative. Raises
    :class:`InfeasibleSystemError` when (I - A) is singular.
    """
    A_arr = np.asarray(A, dtype=float)
    c_arr = np.asarray(c, dtype=float)
    if A_arr.ndim != 2 or A_arr.shape[0] != A_arr.shape[1]:
        raise InvalidInputError(f"linear_oracle: A must be square, got shape {A_arr.shape}")
    n = A_arr.shape[0]
    if c_arr.shape != (n,):
        raise InvalidInputError(f"linear_oracle: c must have length {n}, got shape {c_arr.shape}")
    if not np.all(np.isfinite(A_arr)) or not np.all(np.isfinite(c_arr)):
        raise InvalidInputError("linear_oracle: entries must be finite")
    if np.any(A_arr < 0.0) or np.any(c_arr < 0.0):
        raise InvalidInputError("linear_oracle: A and c must be non-negative")
    if np.any(np.diag(A_arr) != 0.0):
        raise InvalidInputError("linear_oracle: A must have a zero diagonal")
    try:
        solution = np.linalg.solve(np.eye(n) - A_arr, c_arr)
    except np.linalg.LinAlgError as exc:
        raise InfeasibleSystemError(f"linear_oracle: (I - A) is singular: {exc}") from exc
    return PowerVector(tuple(float(v) for v in solution))


def rate_check(trace: IterationTrace, lam: float) -> bool:
    """Verify the geometric envelope delta[t+1] <= lam * delta[t] on a trace.

    The comparison allows 1e-12 * (1 + delta[t]) of floating-point slack.
    """
    for prev, nxt in zip(trace.deltas, trace.deltas[1:]):
        if nxt > lam * prev + 1e-12 * (1.0 + prev):
            return False
    return True


def affine_parts(system: System) -> tuple[np.ndarray, np.ndarray]:
    """Extract (A, c) with update p <- A p + c from a weighted-abs-sum system.

    Valid on the non-negative orthant, where the weighted absolute sums are
    plain linear forms. Raises for systems built from other rule families.
    """
    n = system.n
    A = np.zeros((n, n))
    c = np.zeros(n)
    for i, rule in enumerate(system.rules):
        if not isinstance(rule.f, WeightedAbsSum):
            raise InvalidInputError(
                f"affine_parts: rule for terminal {i + 1} is not a weighted absolute sum"
            )
        others = [j for j in range(n) if j != i]
        for j, w in zip(others, rule.f.weights):
            A[i, j] = abs(w)
        c[i] = rule.offset
    return A, c


def write_trace_csv(trace: IterationTrace, path) -> None:
    """Dump a trace as CSV: iter, p_1..p_N, delta (delta blank on row 0)."""
    n = len(trace.iterates[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter"] + [f"p_{i + 1}" for i in range(n)] + ["delta"])
        for t, pv in enumerate(trace.iterates):
            delta = "" if t == 0 else repr(trace.deltas[t - 1])
            writer.writerow([t] + [repr(v) for v in pv] + [delta])
