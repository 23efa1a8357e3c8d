"""Confidence band for theory-minus-experiment differences and model verdicts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import CoefficientTables, InputError, TheoryCurve, interpolate_theory

CONSISTENT = "consistent"
EXCLUDED = "excluded"


def difference_error(theory_abs, exp_abs, k: float = 1.1):
    """Half-width of the band for theory - experiment differences.

    min{ th + exp, k * sqrt(th^2 + exp^2) }, with k the two-term uniform
    coefficient (1.1 at 95% confidence). Inputs share one unit.
    """
    th = np.asarray(theory_abs, dtype=np.float64)
    ex = np.asarray(exp_abs, dtype=np.float64)
    if np.any(th < 0) or np.any(ex < 0):
        raise InputError("errors must be >= 0", where="difference_error")
    out = np.minimum(th + ex, k * np.hypot(th, ex))
    return float(out) if out.ndim == 0 else out


def difference_k(beta: float, tables: CoefficientTables) -> float:
    return tables.k(beta, 2)


def mean_difference(theory: TheoryCurve, z, exp_means):
    """Theory at each bin center minus the experimental mean there."""
    z = np.asarray(z, dtype=np.float64)
    means = np.asarray(exp_means, dtype=np.float64)
    if z.shape != means.shape:
        raise InputError("grid and means differ in shape", where="mean_difference")
    if z.size and (z.min() < theory.z[0] or z.max() > theory.z[-1]):
        raise InputError(
            f"theory {theory.model_name!r} grid [{theory.z[0]:g}, {theory.z[-1]:g}] "
            f"does not cover the experiment range [{z.min():g}, {z.max():g}]",
            where="mean_difference",
        )
    return np.asarray(interpolate_theory(theory, z)) - means


@dataclass(frozen=True)
class VerdictRange:
    tag: str
    z_start: float
    z_end: float
    n_points: int


@dataclass(frozen=True)
class ComparisonVerdict:
    model_name: str
    beta: float
    z: np.ndarray
    mean_difference: np.ndarray
    xi: np.ndarray
    inside_band: np.ndarray
    ranges: tuple[VerdictRange, ...]

    @property
    def excluded(self) -> bool:
        return any(r.tag == EXCLUDED for r in self.ranges)

    def excluded_ranges(self) -> list[tuple[float, float]]:
        return [(r.z_start, r.z_end) for r in self.ranges if r.tag == EXCLUDED]


def _runs(flags):
    start = 0
    for i in range(1, len(flags) + 1):
        if i == len(flags) or flags[i] != flags[start]:
            yield start, i
            start = i


def verdict(model_name: str, z, differences, xi, beta: float, min_run: int = 2) -> ComparisonVerdict:
    """Per-point band membership and range summary.

    A point is inside when |difference| <= xi (closed band). Maximal runs of
    outside points with at least ``min_run`` members are reported as
    excluded; everything else is consistent. Adjacent ranges with the same
    tag are merged, so the ranges partition the grid.
    """
    z = np.asarray(z, dtype=np.float64)
    d = np.asarray(differences, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    if not (z.shape == d.shape == xi.shape):
        raise InputError("grids are not aligned", where="verdict")
    inside = np.abs(d) <= xi
    tags = []
    for a, b in _runs(inside.tolist()):
        tag = EXCLUDED if (not inside[a] and b - a >= min_run) else CONSISTENT
        if tags and tags[-1][0] == tag:
            tags[-1][2] = b
        else:
            tags.append([tag, a, b])
    ranges = tuple(VerdictRange(t, float(z[a]), float(z[b - 1]), b - a) for t, a, b in tags)
    return ComparisonVerdict(model_name, beta, z, d, xi, inside, ranges)
