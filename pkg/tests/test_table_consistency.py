"""Consistency of the composition rules with the rounded published tables.

These complement the acceptance suite: where printed inputs carry only two
significant figures, a rule is checked against the whole rounding interval
of its inputs rather than the printed midpoints.
"""

import itertools

import numpy as np
import pytest

from casimir_stats.comparison import difference_error
from casimir_stats.composition import combine_random_systematic
from casimir_stats.data_model import CoefficientTables
from casimir_stats.theory_error import table_round

from reference_tables import BUDGET_RD05, BUDGET_UM05, COMPARISON_RD05, COMPARISON_RD05_MODELS

TABLES = CoefficientTables()


def _interval(printed):
    """Values that round to ``printed`` under the two-figure/integer rule."""
    if abs(printed) >= 10:
        half = 0.5
    else:
        exp = int(np.floor(np.log10(abs(printed))))
        half = 0.5 * 10.0 ** (exp - 1)
    return printed - half, printed + half


def _reachable(fn, printed_inputs, printed_output, n=41):
    grids = [np.linspace(*_interval(p), n) for p in printed_inputs]
    lo, hi = _interval(printed_output)
    return any(lo <= fn(*xs) <= hi for xs in itertools.product(*grids))


def test_named_difference_examples():
    assert round(difference_error(1.6, 0.59), 1) == 1.9
    assert round(difference_error(3.5, 0.87), 1) == 4.0


@pytest.mark.parametrize("z", sorted(BUDGET_UM05))
def test_um05_total_within_rounding(z):
    a, b, c = BUDGET_UM05[z][:3]
    assert _reachable(lambda x, y: 0.8 * (x + y), (a, b), c)


@pytest.mark.parametrize("z", [z for z in sorted(BUDGET_UM05) if z >= 160])
def test_um05_xi_within_rounding(z):
    _a, _b, c, _d, e, f = BUDGET_UM05[z]
    assert _reachable(lambda x, y: difference_error(y, x), (c, e), f)


def test_rd05_600_xi_not_reachable():
    # the printed column value sits below the band implied by its own inputs
    _a, _b, c, _d, e, f = BUDGET_RD05[600]
    assert not _reachable(lambda x, y: difference_error(y, x), (c, e), f)


def test_um05_regime_is_random_dominated_by_literal_ratio():
    # r = 1.17 / 1.5 sits just below the combined-regime threshold
    total, regime = combine_random_systematic(3.0, 1.17, 1.5, 0.95, TABLES)
    assert regime == "random-dominated" and total == 3.0


def test_rd05_99_percent_exclusion():
    from casimir_stats.comparison import verdict

    z = np.array(sorted(COMPARISON_RD05), dtype=float)
    xi = np.array([COMPARISON_RD05[int(v)][1] for v in z])
    d = np.array([COMPARISON_RD05[int(v)][COMPARISON_RD05_MODELS["drude"]] for v in z])
    assert verdict("drude", z, d, xi, 0.99).excluded_ranges() == [(300.0, 500.0)]


def test_table_round_interval_helper():
    for printed in (0.56, 1.6, 13.0, 107.0):
        lo, hi = _interval(printed)
        assert table_round(lo + 1e-9) == printed and table_round(hi - 1e-9) == printed
