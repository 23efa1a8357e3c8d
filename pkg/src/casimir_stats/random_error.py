"""Variance smoothing over neighbouring bins and the Student-t random error."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .binning import GroupArrays, SubintervalGroup
from .data_model import InputError
from .tdist import student_t_quantile

__all__ = [
    "SmoothingWindow",
    "RandomErrorResult",
    "RandomErrorArrays",
    "smooth_variance",
    "build_windows",
    "window_starts",
    "random_error",
    "random_errors",
    "student_t_quantile",
]


@dataclass(frozen=True)
class SmoothingWindow:
    center: float
    members: tuple[SubintervalGroup, ...]
    start: int
    shifted: bool

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def variances(self) -> np.ndarray:
        return np.array([g.var_of_mean for g in self.members])

    @property
    def equal_weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    @property
    def inverse_weights(self) -> np.ndarray | None:
        """Weights 1/(c_k * sum_i 1/c_i) with c_i = s_i^2; None if any s_i^2 is 0."""
        c = self.variances
        if np.any(c <= 0):
            return None
        return 1.0 / (c * np.sum(1.0 / c))

    @property
    def min_count(self) -> int:
        return min(g.m for g in self.members)


@dataclass(frozen=True)
class RandomErrorResult:
    z0: float
    smoothed_var: float
    dof: int
    t_quantile: float
    delta_rand: float
    interval: tuple[float, float]


def _pooled(variances: np.ndarray, weights: np.ndarray) -> float:
    n = variances.size
    return float(n * np.sum(weights * weights * variances))


def smooth_variance(window: SmoothingWindow | Sequence[float]) -> float:
    """Conservative pooled variance of the mean over a window.

    The larger of the equal-weight estimate and the inverse-variance-weight
    estimate. The latter is undefined when a member variance is zero and is
    then skipped.
    """
    if isinstance(window, SmoothingWindow):
        var = window.variances
    else:
        var = np.asarray(window, dtype=np.float64)
    if var.size == 0:
        raise InputError("empty smoothing window", where="smooth_variance")
    if np.any(var < 0) or not np.all(np.isfinite(var)):
        raise InputError("window variances must be finite and >= 0", where="smooth_variance")
    return float(_kernels.smooth_windows(var, np.array([0]), var.size)[0])


def window_starts(n_bins: int, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Start index of each bin's window, and whether it was shifted inward."""
    if window < 1:
        raise InputError("window size must be >= 1", where="build_windows")
    if n_bins < window:
        raise InputError(
            f"{n_bins} bins cannot fill a window of {window}", where="build_windows"
        )
    idx = np.arange(n_bins)
    natural = idx - (window - 1) // 2
    starts = np.clip(natural, 0, n_bins - window)
    return starts, starts != natural


def build_windows(bins: Sequence[SubintervalGroup], window: int) -> list[SmoothingWindow]:
    """One window of ``window`` neighbouring bins per bin.

    Windows are centred on their bin (an even size leans one bin towards
    larger z) and shifted inward at the range edges so each keeps its full
    size.
    """
    starts, shifted = window_starts(len(bins), window)
    return [
        SmoothingWindow(bins[i].center, tuple(bins[s : s + window]), int(s), bool(sh))
        for i, (s, sh) in enumerate(zip(starts.tolist(), shifted.tolist()))
    ]


def random_error(smoothed_var: float, f: int, beta: float, mean: float = 0.0, z0: float = math.nan):
    """Random absolute error s * t_{(1+beta)/2}(f) and the interval around ``mean``."""
    if f < 1:
        raise InputError(f"degrees of freedom {f} < 1", where="random_error")
    if smoothed_var < 0:
        raise InputError("smoothed variance must be >= 0", where="random_error")
    t = student_t_quantile((1.0 + beta) / 2.0, int(f))
    delta = math.sqrt(smoothed_var) * t
    return RandomErrorResult(z0, smoothed_var, int(f), t, delta, (mean - delta, mean + delta))


@dataclass(frozen=True)
class RandomErrorArrays:
    """Column form of :class:`RandomErrorResult` for a whole grid."""

    smoothed_var: np.ndarray
    dof: np.ndarray
    t_quantile: np.ndarray
    delta_rand: np.ndarray
    window_start: np.ndarray
    window_shifted: np.ndarray

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(self.smoothed_var)


def random_errors(groups: GroupArrays, window: int, beta: float) -> RandomErrorArrays:
    """Smoothed variance, dof = (window min m_k) - 1, and random error per group."""
    if np.any(groups.count < 2):
        raise InputError("every group needs two or more members", where="random_errors")
    starts, shifted = window_starts(len(groups), window)
    smoothed = _kernels.smooth_windows(groups.var_of_mean, starts, window)
    dof = _kernels.window_min(groups.count, starts, window) - 1
    p = (1.0 + beta) / 2.0
    tq = np.array([student_t_quantile(p, int(f)) for f in dof.tolist()])
    return RandomErrorArrays(smoothed, dof, tq, np.sqrt(smoothed) * tq, starts, shifted)
