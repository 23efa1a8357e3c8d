"""Hot numeric loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature. The numba
variants are used unless ``CASIMIR_STATS_DISABLE_NUMBA`` is set to a truthy
value (or numba is not importable). Both paths compute identical quantities;
results agree to rounding, not bitwise.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = "CASIMIR_STATS_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


try:
    if not _numba_requested():
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag in CI
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy reference path


def _group_stats_np(values, group_ids, n_groups):
    counts = np.bincount(group_ids, minlength=n_groups).astype(np.int64)
    # shift by the first member of each group: exact means for constant data
    first = np.zeros(n_groups)
    present, first_idx = np.unique(group_ids, return_index=True)
    first[present] = values[first_idx]
    sums = np.bincount(group_ids, weights=values - first[group_ids], minlength=n_groups)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = first + sums / counts
    dev = values - means[group_ids]
    ss = np.bincount(group_ids, weights=dev * dev, minlength=n_groups)
    with np.errstate(invalid="ignore", divide="ignore"):
        var_mean = ss / (counts * (counts - 1.0))
    return counts, means, var_mean


def _pointwise_stats_np(samples):
    # samples: (..., n_sets, n_points)
    n = samples.shape[-2]
    first = samples[..., :1, :]
    means = first[..., 0, :] + (samples - first).sum(axis=-2) / n
    dev = samples - means[..., None, :]
    var_mean = (dev * dev).sum(axis=-2) / (n * (n - 1.0))
    return means, var_mean


# the inverse-variance branch must beat the equal-weight one by more than
# accumulated rounding to be selected
_ROUND_GUARD = 4.0 * np.finfo(np.float64).eps


def _neumaier_rows_np(x):
    # compensated sum along the last axis
    s = np.zeros(x.shape[:-1])
    c = np.zeros(x.shape[:-1])
    for k in range(x.shape[-1]):
        v = x[..., k]
        t = s + v
        big = np.abs(s) >= np.abs(v)
        c += np.where(big, (s - t) + v, (v - t) + s)
        s = t
    return s + c


def _smooth_windows_np(var, starts, window):
    # var: (..., n_bins); starts: (n_windows,)
    idx = starts[:, None] + np.arange(window)[None, :]
    w = var[..., idx]  # (..., n_windows, window)
    arith = _neumaier_rows_np(w) / window
    positive = np.all(w > 0.0, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(w > 0.0, 1.0 / np.where(w > 0.0, w, 1.0), 0.0)
        # N * sum(lam^2 c) with lam = 1/(c_k sum 1/c_i) reduces to N / sum(1/c_i)
        inverse_branch = window / inv.sum(axis=-1)
    inverse_branch = np.where(positive, inverse_branch, -np.inf)
    wins = inverse_branch > arith * (1.0 + _ROUND_GUARD * window)
    return np.where(wins, inverse_branch, arith)


def _window_min_np(counts, starts, window):
    idx = starts[:, None] + np.arange(window)[None, :]
    return counts[..., idx].min(axis=-1)


# ---------------------------------------------------------------------------
# numba path


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _group_stats_nb(values, group_ids, n_groups):
        counts = np.zeros(n_groups, dtype=np.int64)
        sums = np.zeros(n_groups)
        first = np.zeros(n_groups)
        for i in range(values.shape[0]):
            g = group_ids[i]
            if counts[g] == 0:
                first[g] = values[i]
            counts[g] += 1
            sums[g] += values[i] - first[g]
        means = np.empty(n_groups)
        for g in range(n_groups):
            means[g] = first[g] + sums[g] / counts[g] if counts[g] > 0 else np.nan
        ss = np.zeros(n_groups)
        for i in range(values.shape[0]):
            g = group_ids[i]
            d = values[i] - means[g]
            ss[g] += d * d
        var_mean = np.empty(n_groups)
        for g in range(n_groups):
            m = counts[g]
            var_mean[g] = ss[g] / (m * (m - 1.0)) if m > 1 else np.nan
        return counts, means, var_mean

    @njit(cache=True, nogil=True)
    def _pointwise_stats_2d(samples, means, var_mean):
        n, p = samples.shape
        for j in range(p):
            x0 = samples[0, j]
            acc = 0.0
            for i in range(n):
                acc += samples[i, j] - x0
            mu = x0 + acc / n
            ss = 0.0
            for i in range(n):
                d = samples[i, j] - mu
                ss += d * d
            means[j] = mu
            var_mean[j] = ss / (n * (n - 1.0))

    @njit(cache=True, nogil=True)
    def _pointwise_stats_3d(samples, means, var_mean):
        for t in range(samples.shape[0]):
            _pointwise_stats_2d(samples[t], means[t], var_mean[t])

    @njit(cache=True, nogil=True)
    def _smooth_row(var, starts, window, out):
        for w in range(starts.shape[0]):
            s0 = starts[w]
            # branch with equal weights, compensated summation
            s = 0.0
            c = 0.0
            positive = True
            inv_sum = 0.0
            for k in range(window):
                v = var[s0 + k]
                t = s + v
                if abs(s) >= abs(v):
                    c += (s - t) + v
                else:
                    c += (v - t) + s
                s = t
                if v > 0.0:
                    inv_sum += 1.0 / v
                else:
                    positive = False
            best = (s + c) / window
            if positive:
                inv_branch = window / inv_sum
                if inv_branch > best * (1.0 + _ROUND_GUARD * window):
                    best = inv_branch
            out[w] = best

    @njit(cache=True, nogil=True)
    def _smooth_windows_2d(var, starts, window, out):
        for t in range(var.shape[0]):
            _smooth_row(var[t], starts, window, out[t])

    @njit(cache=True, nogil=True)
    def _window_min_row(counts, starts, window, out):
        for w in range(starts.shape[0]):
            m = counts[starts[w]]
            for k in range(1, window):
                if counts[starts[w] + k] < m:
                    m = counts[starts[w] + k]
            out[w] = m


# ---------------------------------------------------------------------------
# public dispatch


def group_stats(values, group_ids, n_groups):
    """Per-group count, mean and variance of the mean (divisor m(m-1))."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    group_ids = np.ascontiguousarray(group_ids, dtype=np.int64)
    if HAVE_NUMBA:
        return _group_stats_nb(values, group_ids, int(n_groups))
    return _group_stats_np(values, group_ids, int(n_groups))


def pointwise_stats(samples):
    """Mean and variance of the mean over the set axis (axis -2).

    Accepts ``(n_sets, n_points)`` or a batch ``(n_trials, n_sets, n_points)``.
    """
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    if samples.shape[-2] < 2:
        raise ValueError("need at least two sets for a variance of the mean")
    if not HAVE_NUMBA:
        return _pointwise_stats_np(samples)
    out_shape = samples.shape[:-2] + samples.shape[-1:]
    means = np.empty(out_shape)
    var_mean = np.empty(out_shape)
    if samples.ndim == 2:
        _pointwise_stats_2d(samples, means, var_mean)
    elif samples.ndim == 3:
        _pointwise_stats_3d(samples, means, var_mean)
    else:
        return _pointwise_stats_np(samples)
    return means, var_mean


def smooth_windows(var, starts, window):
    """Smoothed variance of the mean for each window start.

    ``var`` may be 1-D (bins) or 2-D (trials x bins); windows are
    ``var[..., s:s+window]``. Each output is the larger of the equal-weight
    and inverse-variance-weight pooled estimates; the latter is skipped when
    any member variance is zero.
    """
    var = np.ascontiguousarray(var, dtype=np.float64)
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    if not HAVE_NUMBA:
        return _smooth_windows_np(var, starts, int(window))
    if var.ndim == 1:
        out = np.empty(starts.shape[0])
        _smooth_row(var, starts, int(window), out)
        return out
    out = np.empty((var.shape[0], starts.shape[0]))
    _smooth_windows_2d(var, starts, int(window), out)
    return out


def window_min(counts, starts, window):
    """Minimum member count within each window."""
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    if not HAVE_NUMBA:
        return _window_min_np(counts, starts, int(window))
    out = np.empty(starts.shape[0], dtype=np.int64)
    _window_min_row(counts, starts, int(window), out)
    return out


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
