"""Separation binning and per-bin (or per-point) means and variances of the mean."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .data_model import InputError, MeasurementCollection


@dataclass(frozen=True)
class SubintervalGroup:
    """One separation bin: its members and their sample statistics."""

    k: int
    center: float
    members: tuple[float, ...]
    mean: float
    var_of_mean: float

    @property
    def m(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class GroupArrays:
    """Column view of a sequence of groups, as consumed by the kernels."""

    center: np.ndarray
    count: np.ndarray
    mean: np.ndarray
    var_of_mean: np.ndarray

    def __len__(self) -> int:
        return int(self.center.size)


def bin_mean_and_variance(members: Sequence[float]) -> tuple[float, float]:
    """Mean and variance of the mean, sum of squares divided by m(m-1)."""
    x = np.asarray(members, dtype=np.float64)
    m = x.size
    if m < 2:
        raise InputError(
            f"variance of the mean undefined for {m} member(s); merge the bin first",
            where="bin_mean_and_variance",
        )
    mean = x[0] + (x - x[0]).sum() / m
    dev = x - mean
    return float(mean), float((dev * dev).sum() / (m * (m - 1)))


def _bin_count(span: float, width: float) -> int:
    # tolerate float noise such as 600/1.2 = 499.99999999999994
    return max(1, math.ceil(round(span / width, 9)))


def bin_edges(z_a: float, z_b: float, delta_z: float) -> np.ndarray:
    """Edges of the 2*delta_z tiling anchored at ``z_a``."""
    width = 2.0 * delta_z
    n = _bin_count(z_b - z_a, width)
    return z_a + width * np.arange(n + 1)


def _assign(z: np.ndarray, z_a: float, width: float, n_bins: int) -> np.ndarray:
    k = np.floor(np.round((z - z_a) / width, 9)).astype(np.int64)
    return np.clip(k, 0, n_bins - 1)


def partition_into_subintervals(coll: MeasurementCollection) -> list[SubintervalGroup]:
    """Tile the observed range with bins of width 2*delta_z and group records.

    Bins are half-open ``[left, right)`` anchored at the smallest observed z;
    the largest z falls into the last bin. Empty bins are dropped and
    single-member bins are merged into the nearest bin holding at least two
    members (ties broken by the distance of the record to the bin centers,
    then towards smaller z).
    """
    z_a, z_b = coll.z_range
    width = 2.0 * coll.delta_z
    n_bins = _bin_count(z_b - z_a, width)
    kidx = _assign(coll.z, z_a, width, n_bins)
    centers = z_a + width * (np.arange(n_bins) + 0.5)

    order = np.lexsort((coll.value, kidx))
    members: dict[int, list[int]] = {}
    for i in order.tolist():
        members.setdefault(int(kidx[i]), []).append(i)

    populated = sorted(k for k, idx in members.items() if len(idx) >= 2)
    if not populated:
        raise InputError(
            "insufficient replication: no bin holds two or more records",
            where="partition_into_subintervals",
        )
    pop = np.array(populated)
    for k in sorted(k for k, idx in members.items() if len(idx) == 1):
        rec = members.pop(k)[0]
        gap = np.abs(pop - k)
        cand = pop[gap == gap.min()]
        if cand.size > 1:
            dist = np.abs(centers[cand] - coll.z[rec])
            cand = cand[dist == dist.min()]
        members[int(cand[0])].append(rec)

    groups = []
    for k in sorted(members):
        idx = np.array(sorted(members[k], key=lambda i: (coll.value[i], i)))
        vals = coll.value[idx]
        mean, var = bin_mean_and_variance(vals)
        groups.append(SubintervalGroup(k, float(centers[k]), tuple(vals.tolist()), mean, var))
    return groups


def partition_arrays(coll: MeasurementCollection) -> GroupArrays:
    """Same grouping as :func:`partition_into_subintervals`, computed by kernel."""
    groups = partition_into_subintervals(coll)
    # recompute the statistics through the kernel path on the final grouping
    values = np.concatenate([np.asarray(g.members) for g in groups])
    ids = np.repeat(np.arange(len(groups)), [g.m for g in groups])
    count, mean, var = _kernels.group_stats(values, ids, len(groups))
    return GroupArrays(np.array([g.center for g in groups]), count, mean, var)


def aligned_grid(coll: MeasurementCollection) -> np.ndarray | None:
    """The common z grid if every set holds exactly the same separations."""
    grid = None
    for s in np.unique(coll.set_index):
        z = np.sort(coll.z[coll.set_index == s])
        if grid is None:
            grid = z
        elif z.shape != grid.shape or not np.array_equal(z, grid):
            return None
    if grid is not None and np.unique(grid).size != grid.size:
        return None
    return grid


def _aligned_samples(coll: MeasurementCollection) -> tuple[np.ndarray, np.ndarray]:
    grid = aligned_grid(coll)
    if grid is None:
        raise InputError(
            "separation grids differ between sets; use partition_into_subintervals",
            where="pointwise_mean_and_variance",
        )
    set_ids = np.unique(coll.set_index)
    if set_ids.size < 2:
        raise InputError("need at least two sets", where="pointwise_mean_and_variance")
    samples = np.empty((set_ids.size, grid.size))
    for row, s in enumerate(set_ids):
        mask = coll.set_index == s
        order = np.argsort(coll.z[mask], kind="stable")
        samples[row] = coll.value[mask][order]
    return grid, samples


def pointwise_mean_and_variance(coll: MeasurementCollection):
    """Per-separation mean and variance of the mean across aligned sets.

    Returns a list of ``(z_i, mean_i, var_of_mean_i)``.
    """
    grid, samples = _aligned_samples(coll)
    means, var = _kernels.pointwise_stats(samples)
    return list(zip(grid.tolist(), means.tolist(), var.tolist()))


def pointwise_arrays(coll: MeasurementCollection) -> GroupArrays:
    grid, samples = _aligned_samples(coll)
    means, var = _kernels.pointwise_stats(samples)
    count = np.full(grid.size, samples.shape[0], dtype=np.int64)
    return GroupArrays(grid, count, means, var)


def group_collection(coll: MeasurementCollection, mode: str = "auto") -> tuple[str, GroupArrays]:
    """Pick the per-point path for aligned grids, else partition into bins."""
    if mode == "pointwise" or (
        mode == "auto" and coll.n_sets >= 2 and aligned_grid(coll) is not None
    ):
        return "pointwise", pointwise_arrays(coll)
    return "partition", partition_arrays(coll)
