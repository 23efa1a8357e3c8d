import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_stats.binning import GroupArrays, SubintervalGroup
from casimir_stats.data_model import InputError
from casimir_stats.random_error import (
    build_windows,
    random_error,
    random_errors,
    smooth_variance,
    window_starts,
)

positive = st.floats(1e-6, 1e6, allow_nan=False)


def test_two_member_example():
    # equal weights 2.5, inverse weights 2*(1/5)^2*(1+4)... -> 1.6; max wins
    assert smooth_variance([1.0, 4.0]) == pytest.approx(2.5, rel=1e-15)


def test_three_member_example():
    assert smooth_variance([1.0, 1.0, 4.0]) == pytest.approx(2.0, rel=1e-15)


def test_zero_variance_skips_inverse_branch():
    assert smooth_variance([0.0, 3.0]) == 1.5
    assert smooth_variance([0.0, 0.0]) == 0.0


def test_invalid_windows():
    with pytest.raises(InputError):
        smooth_variance([])
    with pytest.raises(InputError):
        smooth_variance([1.0, -1.0])


@settings(max_examples=200, deadline=None)
@given(st.lists(positive, min_size=1, max_size=30))
def test_at_least_arithmetic_mean(v):
    assert smooth_variance(v) >= np.mean(v) * (1 - 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(positive, min_size=1, max_size=30), st.floats(1e-3, 1e3))
def test_homogeneous_degree_one(v, c):
    assert smooth_variance(np.array(v) * c) == pytest.approx(c * smooth_variance(v), rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(positive, st.integers(1, 30))
def test_constant_window_is_fixed_point(v, n):
    assert smooth_variance([v] * n) == pytest.approx(v, rel=1e-14)


def test_window_starts_centre_and_edges():
    starts, shifted = window_starts(10, 5)
    assert starts.tolist() == [0, 0, 0, 1, 2, 3, 4, 5, 5, 5]
    assert shifted.tolist() == [True, True, False, False, False, False, False, False, True, True]
    starts, _ = window_starts(6, 4)
    assert starts.tolist() == [0, 0, 1, 2, 2, 2]


def test_window_too_large():
    with pytest.raises(InputError, match="cannot fill a window"):
        window_starts(3, 5)


def _groups(vars_, counts):
    n = len(vars_)
    return GroupArrays(np.arange(n, dtype=float) * 1.2 + 100, np.asarray(counts),
                       np.zeros(n), np.asarray(vars_, dtype=float))


def test_build_windows_members():
    bins = [SubintervalGroup(k, 100.0 + k, (0.0, 1.0), 0.5, 0.25 * (k + 1)) for k in range(7)]
    wins = build_windows(bins, 3)
    assert [w.start for w in wins] == [0, 0, 1, 2, 3, 4, 4]
    assert wins[0].shifted and not wins[1].shifted
    assert all(w.size == 3 for w in wins)


def test_dof_is_window_minimum_count():
    res = random_errors(_groups([1.0] * 6, [5, 3, 9, 9, 9, 9]), 3, 0.95)
    assert res.dof.tolist() == [2, 2, 2, 8, 8, 8]


def test_random_error_um05_scale():
    # s = 1.5 pN with 65 sets: about 3.0 pN at 95%
    res = random_error(1.5**2, 64, 0.95, mean=-10.0)
    assert res.t_quantile == pytest.approx(1.9977, abs=1e-4)
    assert res.delta_rand == pytest.approx(2.9966, abs=1e-3)
    assert res.interval == pytest.approx((-10 - res.delta_rand, -10 + res.delta_rand))


def test_random_error_rejects_bad_input():
    with pytest.raises(InputError):
        random_error(1.0, 0, 0.95)
    with pytest.raises(InputError):
        random_error(-1.0, 3, 0.95)


def test_singleton_groups_rejected():
    with pytest.raises(InputError):
        random_errors(_groups([1.0] * 3, [1, 2, 2]), 3, 0.95)
