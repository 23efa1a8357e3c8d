import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_stats.composition import (
    SystematicSource,
    combine_random_systematic,
    combine_random_systematic_arrays,
    combine_systematic,
    evaluate_systematic_sources,
    parse_sources,
)
from casimir_stats.data_model import InputError


def test_four_force_sources(tables):
    assert combine_systematic([0.82, 0.55, 0.31, 0.12], 0.95, tables) == pytest.approx(1.1668, abs=1e-4)


def test_two_equal_terms(tables):
    assert combine_systematic([1.0, 1.0], 0.95, tables) == pytest.approx(1.1 * math.sqrt(2), rel=1e-12)


def test_single_term_passthrough(tables):
    assert combine_systematic([0.3], 0.95, tables) == 0.3


def test_missing_coefficient_is_error(tables):
    with pytest.raises(InputError, match="J=3"):
        combine_systematic([0.1, 0.2, 0.3], 0.95, tables)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([2, 4]).flatmap(
    lambda n: st.lists(st.just(0.0) | st.floats(1e-100, 1e3), min_size=n, max_size=n)))
def test_bounds(deltas):
    from casimir_stats.data_model import CoefficientTables

    t = CoefficientTables()
    out = combine_systematic(deltas, 0.95, t)
    assert out <= sum(deltas) * (1 + 1e-12) + 1e-300
    assert out >= max(deltas) * (1 - 1e-12)


def test_frequency_detuning_source():
    src = SystematicSource("f", "frequency_detuning",
                           {"delta_omega_r": 0.006, "omega_0": 700.0, "omega_r": [[100, 699.0]]})
    assert src.relative(150.0, 1.0) == pytest.approx(0.006)


def test_singular_detuning():
    src = SystematicSource("f", "frequency_detuning",
                           {"delta_omega_r": 0.006, "omega_0": 700.0, "omega_r": [[100, 700.0]]})
    with pytest.raises(InputError, match="singular source"):
        src.relative(150.0, 1.0)


def test_absolute_source_zero_signal():
    src = SystematicSource("a", "constant_absolute", {"delta": 0.1})
    assert src.relative(100.0, -2.0) == pytest.approx(0.05)
    with pytest.raises(InputError, match="zero signal"):
        src.relative(100.0, 0.0)


def test_evaluate_shape():
    srcs = parse_sources([{"name": "a", "kind": "constant_relative", "delta": 0.01},
                          {"name": "b", "kind": "constant_absolute", "delta": 0.2}])
    out = evaluate_systematic_sources(srcs, np.array([100.0, 200.0, 300.0]), np.array([1.0, 2.0, 4.0]))
    assert out.shape == (2, 3)
    np.testing.assert_allclose(out[1], [0.2, 0.1, 0.05])


@pytest.mark.parametrize("doc", [{"kind": "nope", "delta": 1}, {"name": "x"},
                                 {"kind": "constant_relative"},
                                 {"kind": "constant_relative", "delta": -1}])
def test_bad_source_docs(doc):
    with pytest.raises(InputError):
        parse_sources([doc])


@pytest.mark.parametrize(
    "rand, syst, s, regime, total",
    [
        (3.0, 1.0, 2.0, "random-dominated", 3.0),
        (3.0, 2.0, 2.0, "combined", 4.0),
        (3.0, 17.0, 2.0, "systematic-dominated", 17.0),
        (3.0, 1.6, 2.0, "combined", 0.8 * 4.6),   # r = 0.8 is inclusive
        (3.0, 16.0, 2.0, "combined", 0.8 * 19.0),  # r = 8 is inclusive
        (0.0, 0.5, 0.0, "systematic-dominated", 0.5),
        (0.0, 0.0, 0.0, "random-dominated", 0.0),
    ],
)
def test_regimes(tables, rand, syst, s, regime, total):
    got, tag = combine_random_systematic(rand, syst, s, 0.95, tables)
    assert tag == regime
    assert got == pytest.approx(total)
    arr, _, code = combine_random_systematic_arrays([rand], [syst], [s], 0.95, tables)
    assert arr[0] == pytest.approx(total)
    assert ("random-dominated", "combined", "systematic-dominated")[code[0]] == regime


def test_override(tables):
    got, tag = combine_random_systematic(3.0, 1.17, 1.5, 0.95, tables, override="combined")
    assert tag == "combined" and got == pytest.approx(0.8 * 4.17)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 100), st.floats(0, 100), st.floats(1e-3, 100))
def test_total_between_bounds(rand, syst, s):
    from casimir_stats.data_model import CoefficientTables

    total, _ = combine_random_systematic(rand, syst, s, 0.95, CoefficientTables())
    assert total <= rand + syst + 1e-12
