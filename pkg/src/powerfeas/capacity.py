"""Capacity-region sampling over QoS space, comparison and export.

Regions are sampled on a regular grid per axis and evaluated with the
closed-form admission predicates; points exactly on a boundary count as
infeasible because every condition is strict. Axis value 0 is included
for plotting and is treated as the limit of a vanishing terminal, even
though live scenarios require strictly positive targets.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import InvalidInputError

PREDICATES = ("simple", "macro_div", "mc_exact", "mc_bounded", "hanly")

MAX_GRID_DIM = 4


@dataclass(frozen=True)
class RegionSpec:
    """Which predicate to sample, on which grid.

    ``gains`` is terminal-major (N rows) for ``macro_div`` and gets row
    normalised internally; for the ``mc_*`` predicates it is receiver-major
    (K rows by N columns) and used raw together with ``d``. ``receivers``
    is only needed by ``hanly``.
    """

    predicate: str
    n: int
    resolution: int
    alpha_max: float
    gains: Optional[tuple[tuple[float, ...], ...]] = None
    d: Optional[tuple[int, ...]] = None
    receivers: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "resolution", int(self.resolution))
        object.__setattr__(self, "alpha_max", float(self.alpha_max))
        if self.predicate not in PREDICATES:
            raise InvalidInputError(f"RegionSpec: unknown predicate {self.predicate!r}")
        if self.n < 1:
            raise InvalidInputError("RegionSpec: need at least one axis")
        if self.resolution < 2:
            raise InvalidInputError("RegionSpec: resolution must be >= 2")
        if not math.isfinite(self.alpha_max) or self.alpha_max <= 0.0:
            raise InvalidInputError("RegionSpec: alpha_max must be > 0")
        if self.gains is not None:
            gains = tuple(tuple(float(v) for v in row) for row in self.gains)
            object.__setattr__(self, "gains", gains)
        if self.d is not None:
            object.__setattr__(self, "d", tuple(int(v) for v in self.d))

        if self.predicate == "macro_div":
            if self.gains is None or len(self.gains) != self.n:
                raise InvalidInputError("RegionSpec: macro_div needs one gain row per terminal")
            for i, row in enumerate(self.gains):
                if sum(row) <= 0.0 or any(v < 0.0 for v in row):
                    raise InvalidInputError(f"RegionSpec: bad macro_div gain row {i + 1}")
        elif self.predicate in ("mc_exact", "mc_bounded"):
            if self.gains is None or self.d is None:
                raise InvalidInputError(f"RegionSpec: {self.predicate} needs gains and d")
            k = len(self.gains)
            if any(len(row) != self.n for row in self.gains):
                raise InvalidInputError("RegionSpec: mc gains must have one column per terminal")
            if len(self.d) != self.n or any(not 1 <= dj <= k for dj in self.d):
                raise InvalidInputError("RegionSpec: mc diversity orders out of range")
            h = np.array(self.gains, dtype=float)
            for j, dj in enumerate(self.d):
                if np.sort(h[:, j])[k - dj] <= 0.0:
                    raise InvalidInputError(
                        f"RegionSpec: terminal {j + 1} is not in range of {dj} receivers"
                    )
        elif self.predicate == "hanly":
            if self.receivers is None or int(self.receivers) < 1:
                raise InvalidInputError("RegionSpec: hanly needs the receiver count")
            object.__setattr__(self, "receivers", int(self.receivers))

    @property
    def point_count(self) -> int:
        return self.resolution ** self.n

    def axis_values(self) -> np.ndarray:
        return np.linspace(0.0, self.alpha_max, self.resolution)

    def grid(self) -> np.ndarray:
        """All grid points in lexicographic order, shape (resolution**n, n)."""
        axes = np.meshgrid(*([self.axis_values()] * self.n), indexing="ij")
        return np.stack(axes, axis=-1).reshape(-1, self.n)

    def same_grid(self, other: "RegionSpec") -> bool:
        return (
            self.n == other.n
            and self.resolution == other.resolution
            and self.alpha_max == other.alpha_max
        )


def evaluate_predicate(spec: RegionSpec, alphas: np.ndarray) -> np.ndarray:
    """Vectorised predicate over rows of ``alphas`` (shape (P, n))."""
    pts = np.atleast_2d(np.asarray(alphas, dtype=float))
    if pts.shape[1] != spec.n:
        raise InvalidInputError(
            f"evaluate_predicate: points have {pts.shape[1]} axes, spec has {spec.n}"
        )

    if spec.predicate == "hanly":
        return pts.sum(axis=1) < spec.receivers

    if spec.predicate == "simple":
        loo = pts.sum(axis=1, keepdims=True) - pts
        return (loo < 1.0).all(axis=1)

    if spec.predicate == "macro_div":
        h = np.array(spec.gains, dtype=float)
        g = h / h.sum(axis=1, keepdims=True)
        weighted = pts @ g  # (P, K): per receiver, sum over all terminals
        per_ik = weighted[:, None, :] - pts[:, :, None] * g[None, :, :]
        return (per_ik < 1.0).all(axis=(1, 2))

    if spec.predicate == "mc_bounded":
        h = np.array(spec.gains, dtype=float)  # (K, N)
        k = h.shape[0]
        ref = np.array([np.sort(h[:, j])[k - spec.d[j]] for j in range(spec.n)])
        g = h / ref[None, :]
        weighted = pts @ g.T  # (P, K)
        per_jk = weighted[:, None, :] - pts[:, :, None] * g.T[None, :, :]
        return (per_jk < 1.0).all(axis=(1, 2))

    # mc_exact: for each terminal j, the d_j-th smallest per-receiver
    # weighted sum (own gain in the denominator) must be below 1.
    h = np.array(spec.gains, dtype=float)  # (K, N)
    totals = pts @ h.T  # (P, K)
    numer = totals[:, None, :] - pts[:, :, None] * h.T[None, :, :]  # (P, N, K)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(h.T[None, :, :] > 0.0, numer / h.T[None, :, :], np.inf)
    ordered = np.sort(ratios, axis=2)
    d_idx = np.array(spec.d) - 1
    selected = ordered[:, np.arange(spec.n), d_idx]
    return (selected < 1.0).all(axis=1)


@dataclass(frozen=True)
class RegionCloud:
    """Grid points with their feasibility verdicts, plus the RegionSpec they came from."""

    spec: RegionSpec
    alphas: np.ndarray  # (P, n), read-only
    feasible: np.ndarray  # (P,), read-only bool

    def __post_init__(self):
        if self.alphas.shape != (self.spec.point_count, self.spec.n):
            raise InvalidInputError("RegionCloud: point count must be resolution**n")
        if self.feasible.shape != (self.spec.point_count,):
            raise InvalidInputError("RegionCloud: one verdict per point required")

    def points(self) -> list[tuple[tuple[float, ...], bool]]:
        return [
            (tuple(float(v) for v in row), bool(flag))
            for row, flag in zip(self.alphas, self.feasible)
        ]

    @property
    def feasible_count(self) -> int:
        return int(self.feasible.sum())


def sample_region(spec: RegionSpec, *, allow_large: bool = False) -> RegionCloud:
    """Evaluate the predicate on the full grid, lexicographic point order."""
    if spec.n > MAX_GRID_DIM and not allow_large:
        raise InvalidInputError(
            f"sample_region: {spec.n} axes exceeds the cost guard of {MAX_GRID_DIM}; "
            "pass allow_large=True to override"
        )
    pts = spec.grid()
    verdicts = evaluate_predicate(spec, pts)
    pts.flags.writeable = False
    verdicts.flags.writeable = False
    return RegionCloud(spec=spec, alphas=pts, feasible=verdicts)


@dataclass(frozen=True)
class RegionComparison:
    """Set relation between two clouds on the same grid, with witnesses."""

    a_subset_b: bool
    b_subset_a: bool
    witness_a_not_b: Optional[tuple[float, ...]]
    witness_b_not_a: Optional[tuple[float, ...]]

    @property
    def relation(self) -> str:
        if self.a_subset_b and self.b_subset_a:
            return "equal"
        if self.a_subset_b:
            return "a_subset_b"
        if self.b_subset_a:
            return "b_subset_a"
        return "incomparable"


def compare_regions(a: RegionCloud, b: RegionCloud) -> RegionComparison:
    """Compare feasible sets pointwise; witnesses are the first grid points
    (lexicographic) feasible on one side only."""
    if not a.spec.same_grid(b.spec):
        raise InvalidInputError("compare_regions: clouds were sampled on different grids")
    only_a = a.feasible & ~b.feasible
    only_b = b.feasible & ~a.feasible
    idx_a = int(np.argmax(only_a)) if only_a.any() else None
    idx_b = int(np.argmax(only_b)) if only_b.any() else None
    return RegionComparison(
        a_subset_b=idx_a is None,
        b_subset_a=idx_b is None,
        witness_a_not_b=None if idx_a is None else tuple(float(v) for v in a.alphas[idx_a]),
        witness_b_not_a=None if idx_b is None else tuple(float(v) for v in b.alphas[idx_b]),
    )


def export_cloud(cloud: RegionCloud, path) -> None:
    """CSV dump: alpha_1..alpha_N,feasible with full-precision values."""
    n = cloud.spec.n
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"alpha_{i + 1}" for i in range(n)] + ["feasible"])
        for row, flag in zip(cloud.alphas, cloud.feasible):
            writer.writerow([repr(float(v)) for v in row] + [int(flag)])


def region_inequalities(spec: RegionSpec) -> list[tuple[tuple[float, ...], float]]:
    """H-representation: (coefficients, rhs) rows with relation '<'.

    Available for the predicates that are finite conjunctions of strict
    linear inequalities; the exact multi-connection predicate selects an
    order statistic and is a union of such systems, so its feasible set has
    no single inequality list and this raises instead.
    """
    if spec.predicate == "hanly":
        return [((1.0,) * spec.n, float(spec.receivers))]
    if spec.predicate == "simple":
        rows = []
        for i in range(spec.n):
            coefs = [1.0] * spec.n
            coefs[i] = 0.0
            rows.append((tuple(coefs), 1.0))
        return rows
    if spec.predicate == "macro_div":
        h = np.array(spec.gains, dtype=float)
        g = h / h.sum(axis=1, keepdims=True)
        rows = []
        for i in range(spec.n):
            for k in range(g.shape[1]):
                coefs = [float(g[nn, k]) for nn in range(spec.n)]
                coefs[i] = 0.0
                rows.append((tuple(coefs), 1.0))
        return rows
    if spec.predicate == "mc_bounded":
        h = np.array(spec.gains, dtype=float)
        kk = h.shape[0]
        ref = np.array([np.sort(h[:, j])[kk - spec.d[j]] for j in range(spec.n)])
        g = h / ref[None, :]
        rows = []
        for j in range(spec.n):
            for k in range(kk):
                coefs = [float(g[k, i]) for i in range(spec.n)]
                coefs[j] = 0.0
                rows.append((tuple(coefs), 1.0))
        return rows
    raise InvalidInputError(
        "region_inequalities: the exact multi-connection region is not a single "
        "conjunction of linear inequalities"
    )


def export_inequalities(spec: RegionSpec, path) -> None:
    """CSV dump of the H-representation: coef_1..coef_N,rhs,relation."""
    rows = region_inequalities(spec)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"coef_{i + 1}" for i in range(spec.n)] + ["rhs", "relation"])
        for coefs, rhs in rows:
            writer.writerow([repr(v) for v in coefs] + [repr(rhs), "<"])
