import json

import numpy as np
import pytest

from casimir_stats.data_model import InputError
from casimir_stats.synth_mc import (
    SyntheticScenario,
    coverage_study,
    generate_synthetic_experiment,
    load_scenario,
)


def test_generation_is_reproducible():
    s = SyntheticScenario(n_points=11, n_sets=4)
    a, b = generate_synthetic_experiment(s), generate_synthetic_experiment(s)
    assert a.records == b.records
    assert generate_synthetic_experiment(s, seed=1).records != a.records


def test_zero_noise_is_truth():
    s = SyntheticScenario(n_points=5, n_sets=3, sigma=0.0)
    coll = generate_synthetic_experiment(s)
    np.testing.assert_array_equal(coll.value, s.truth(coll.z))


def test_jitter_width():
    s = SyntheticScenario(grid="jittered", n_points=21, n_sets=3, delta_z=0.6)
    coll = generate_synthetic_experiment(s)
    nominal = np.tile(s.nominal_grid, 3)
    assert np.max(np.abs(coll.z - nominal)) <= 0.6


def test_batched_and_generic_paths_agree():
    s = SyntheticScenario(n_points=21, n_sets=6, systematic_half_widths=(0.3, 0.2))
    a = coverage_study(s, 60, vectorized=True)
    b = coverage_study(s, 60, vectorized=False)
    assert a.hits == b.hits
    np.testing.assert_array_equal(a.per_z_count, b.per_z_count)


def test_thread_count_does_not_change_result():
    s = SyntheticScenario(n_points=21, n_sets=6)
    a = coverage_study(s, 600, threads=1)
    b = coverage_study(s, 600, threads=4)
    assert a.hits == b.hits and np.array_equal(a.per_z_coverage, b.per_z_coverage)


def test_jittered_study_runs():
    s = SyntheticScenario(grid="jittered", n_points=41, n_sets=6)
    rep = coverage_study(s, 20)
    assert 0 < rep.coverage <= 1
    assert rep.per_z_count.sum() == rep.n_intervals


def test_report_json(tmp_path):
    rep = coverage_study(SyntheticScenario(n_points=11, n_sets=5), 50)
    doc = rep.to_json()
    json.dumps(doc)
    assert doc["n_intervals"] == 550 and len(doc["per_z"]) == 11


def test_scenario_validation(tmp_path):
    with pytest.raises(InputError):
        SyntheticScenario(sigma=-1)
    with pytest.raises(InputError):
        SyntheticScenario.from_json({"bogus": 1})
    with pytest.raises(InputError):
        coverage_study(SyntheticScenario(grid="jittered"), 5, vectorized=True)
    p = tmp_path / "s.json"
    p.write_text(json.dumps(SyntheticScenario(n_sets=3).to_json()))
    assert load_scenario(p).n_sets == 3
