import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_stats.binning import (
    aligned_grid,
    bin_edges,
    bin_mean_and_variance,
    group_collection,
    partition_arrays,
    partition_into_subintervals,
    pointwise_mean_and_variance,
)
from casimir_stats.data_model import InputError, MeasurementCollection


def test_hand_example():
    mean, var = bin_mean_and_variance([1.0, 2.0, 3.0])
    assert mean == 2.0
    assert var == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_constant_members_exact():
    mean, var = bin_mean_and_variance([0.1] * 7)
    assert mean == 0.1 and var == 0.0


def test_singleton_rejected():
    with pytest.raises(InputError):
        bin_mean_and_variance([1.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40), st.randoms())
def test_permutation_invariance(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    m1, v1 = bin_mean_and_variance(xs)
    m2, v2 = bin_mean_and_variance(ys)
    assert m1 == pytest.approx(m2, abs=1e-9)
    assert v1 == pytest.approx(v2, rel=1e-9, abs=1e-9)
    assert v1 >= 0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40))
def test_matches_numpy_oracle(xs):
    x = np.array(xs)
    mean, var = bin_mean_and_variance(xs)
    assert mean == pytest.approx(x.mean(), abs=1e-9)
    assert var == pytest.approx(x.var(ddof=1) / x.size, rel=1e-9, abs=1e-9)


def test_bin_count_600nm_range():
    edges = bin_edges(100.0, 700.0, 0.6)
    assert edges.size - 1 == 500
    assert edges[0] == 100.0


def test_partition_half_open_and_upper_clamp(make_collection):
    # width 1.2: bins [100, 101.2), [101.2, 102.4]
    records = [(1, 100.0, 1.0), (2, 100.5, 3.0), (1, 101.2, 5.0), (2, 102.4, 7.0)]
    groups = partition_into_subintervals(make_collection(records))
    assert [g.members for g in groups] == [(1.0, 3.0), (5.0, 7.0)]
    assert groups[0].center == pytest.approx(100.6)
    assert groups[0].mean == 2.0 and groups[0].var_of_mean == 1.0


def test_empty_bins_dropped(make_collection):
    records = [(1, 100.0, 1.0), (2, 100.1, 2.0), (1, 104.0, 3.0), (2, 104.1, 4.0)]
    groups = partition_into_subintervals(make_collection(records))
    assert [g.k for g in groups] == [0, 3]


def test_singleton_merges_into_nearest_populated(make_collection):
    records = [(1, 100.0, 1.0), (2, 100.1, 2.0), (1, 101.5, 9.0),
               (1, 104.0, 3.0), (2, 104.1, 4.0)]
    groups = partition_into_subintervals(make_collection(records))
    assert len(groups) == 2
    assert groups[0].m == 3 and 9.0 in groups[0].members
    assert sum(g.m for g in groups) == 5


def test_singleton_tie_broken_by_center_distance(make_collection):
    # bins 0 and 2 populated, singleton in bin 1 sits closer to bin 2's center
    records = [(1, 100.0, 1.0), (2, 100.1, 2.0), (1, 102.3, 9.0),
               (1, 102.5, 3.0), (2, 102.6, 4.0)]
    groups = partition_into_subintervals(make_collection(records))
    assert 9.0 in groups[1].members


def test_insufficient_replication(make_collection):
    with pytest.raises(InputError, match="insufficient replication"):
        partition_into_subintervals(make_collection([(1, 100.0, 1.0), (1, 110.0, 2.0)]))


def test_partition_arrays_agree_with_groups(make_collection, rng):
    n = 400
    records = list(zip(rng.integers(1, 6, n), rng.uniform(150, 200, n), rng.normal(0, 1, n)))
    coll = make_collection(records)
    groups = partition_into_subintervals(coll)
    arr = partition_arrays(coll)
    np.testing.assert_allclose(arr.mean, [g.mean for g in groups], rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(arr.var_of_mean, [g.var_of_mean for g in groups], rtol=1e-10)
    assert arr.count.sum() == n


def _aligned(rng, n_sets=6, n_points=20):
    grid = np.linspace(100, 200, n_points)
    s = np.repeat(np.arange(1, n_sets + 1), n_points)
    z = np.tile(grid, n_sets)
    v = rng.normal(0, 1, z.size)
    return MeasurementCollection("force", "pN", s, z, v, 0.8), grid


def test_pointwise_matches_per_point_bins(rng):
    coll, grid = _aligned(rng)
    rows = pointwise_mean_and_variance(coll)
    assert [r[0] for r in rows] == grid.tolist()
    for zi, mean, var in rows:
        vals = coll.value[coll.z == zi]
        m2, v2 = bin_mean_and_variance(vals)
        assert mean == pytest.approx(m2, abs=1e-13)
        assert var == pytest.approx(v2, rel=1e-12)


def test_auto_mode_selection(rng):
    coll, _ = _aligned(rng)
    assert aligned_grid(coll) is not None
    assert group_collection(coll)[0] == "pointwise"
    jittered = MeasurementCollection("force", "pN", coll.set_index, coll.z + rng.uniform(0, 0.1, coll.z.size),
                                     coll.value, 0.8)
    assert aligned_grid(jittered) is None
    assert group_collection(jittered)[0] == "partition"
    with pytest.raises(InputError, match="grids differ"):
        pointwise_mean_and_variance(jittered)
