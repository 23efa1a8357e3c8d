"""Synthetic experiments with known truth and Monte Carlo coverage studies.

Random streams: numpy ``PCG64`` bit generators, one per trial, seeded from
``SeedSequence(seed).spawn(n_trials)``. Within a trial the draw order is
fixed: systematic offsets, then z jitter (jittered grids only), then the
Gaussian noise as an ``(n_sets, n_points)`` block. Trial results therefore
do not depend on how trials are scheduled across threads.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import _kernels
from .binning import group_collection
from .composition import (
    combine_random_systematic_arrays,
    combine_systematic,
    evaluate_systematic_sources,
    parse_sources,
)
from .data_model import ExperimentConfig, InputError, MeasurementCollection, QuantityKind
from .pipeline import experimental_errors
from .random_error import window_starts
from .tdist import student_t_quantile

RNG_ALGORITHM = f"numpy PCG64 / SeedSequence.spawn (numpy {np.__version__})"
TRIAL_CHUNK = 250


@dataclass(frozen=True)
class SyntheticScenario:
    """Power-law truth amplitude / z**power sampled on a grid with noise."""

    amplitude: float = -1.0e5
    power: float = 3.0
    z_start: float = 100.0
    z_stop: float = 300.0
    n_points: int = 41
    n_sets: int = 14
    grid: str = "aligned"
    jitter: float | None = None
    delta_z: float = 0.6
    sigma: float = 1.0
    systematic_half_widths: tuple[float, ...] = ()
    seed: int = 12345
    window_size: int = 5
    quantity_kind: str = "force"
    unit: str = "pN"
    config_overrides: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.sigma < 0:
            raise InputError("sigma must be >= 0")
        if self.grid not in ("aligned", "jittered"):
            raise InputError("grid must be 'aligned' or 'jittered'")
        if self.n_sets < 2 or self.n_points < 1:
            raise InputError("need n_sets >= 2 and n_points >= 1")
        if any(a < 0 for a in self.systematic_half_widths):
            raise InputError("systematic half-widths must be >= 0")
        object.__setattr__(self, "systematic_half_widths",
                           tuple(float(a) for a in self.systematic_half_widths))

    def truth(self, z):
        return self.amplitude / np.power(np.asarray(z, dtype=np.float64), self.power)

    @property
    def nominal_grid(self) -> np.ndarray:
        return np.linspace(self.z_start, self.z_stop, self.n_points)

    @property
    def jitter_width(self) -> float:
        return self.delta_z if self.jitter is None else self.jitter

    def analysis_config(self, beta: float) -> ExperimentConfig:
        systematics = [
            {"name": f"offset{i + 1}", "kind": "constant_absolute", "delta": a}
            for i, a in enumerate(self.systematic_half_widths)
        ]
        doc = {
            "quantity_kind": self.quantity_kind,
            "unit": self.unit,
            "delta_z_nm": self.delta_z,
            "confidence_beta": beta,
            "window_size": self.window_size,
            "systematics": systematics,
        }
        doc.update(self.config_overrides)
        return ExperimentConfig.from_json(doc)

    def to_json(self) -> dict:
        d = asdict(self)
        d["systematic_half_widths"] = list(self.systematic_half_widths)
        d["config_overrides"] = dict(self.config_overrides)
        return d

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "SyntheticScenario":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(doc) - known - {"comment"})
        if unknown:
            raise InputError(f"unknown scenario keys: {', '.join(unknown)}")
        kw = {k: v for k, v in doc.items() if k in known}
        if "systematic_half_widths" in kw:
            kw["systematic_half_widths"] = tuple(kw["systematic_half_widths"])
        return cls(**kw)


def load_scenario(path) -> SyntheticScenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"{path}: file not found", where="load_scenario") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})",
                         where="load_scenario") from None
    return SyntheticScenario.from_json(doc)


def _draw(scenario: SyntheticScenario, rng: np.random.Generator):
    """One experiment's (z, values) arrays of shape (n_sets, n_points)."""
    offsets = np.array([rng.uniform(-a, a) for a in scenario.systematic_half_widths])
    grid = scenario.nominal_grid
    z = np.broadcast_to(grid, (scenario.n_sets, scenario.n_points))
    if scenario.grid == "jittered":
        w = scenario.jitter_width
        z = z + rng.uniform(-w, w, size=z.shape)
    noise = rng.normal(0.0, 1.0, size=(scenario.n_sets, scenario.n_points)) * scenario.sigma
    values = scenario.truth(z) + noise + offsets.sum()
    return np.array(z), values


def _trial_seeds(scenario: SyntheticScenario, n_trials: int):
    return np.random.SeedSequence(scenario.seed).spawn(n_trials)


def generate_synthetic_experiment(scenario: SyntheticScenario, seed=None) -> MeasurementCollection:
    """Draw one synthetic experiment; ``seed`` defaults to the scenario seed."""
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        ss = np.random.SeedSequence(scenario.seed if seed is None else seed)
    rng = np.random.Generator(np.random.PCG64(ss))
    z, values = _draw(scenario, rng)
    sets = np.repeat(np.arange(1, scenario.n_sets + 1), scenario.n_points)
    return MeasurementCollection(
        quantity_kind=QuantityKind(scenario.quantity_kind),
        unit=scenario.unit,
        set_index=sets,
        z=z.ravel(),
        value=values.ravel(),
        delta_z=scenario.delta_z,
    )


@dataclass(frozen=True)
class CoverageReport:
    beta: float
    n_trials: int
    n_intervals: int
    hits: int
    coverage: float
    binomial_se: float
    z: np.ndarray
    per_z_coverage: np.ndarray
    per_z_count: np.ndarray
    seed: int
    rng: str = RNG_ALGORITHM

    @property
    def meets_nominal(self) -> bool:
        """Coverage not below beta by more than two binomial standard errors."""
        return self.coverage >= self.beta - 2.0 * self.binomial_se

    def to_json(self) -> dict:
        return {
            "beta": self.beta,
            "n_trials": self.n_trials,
            "n_intervals": self.n_intervals,
            "hits": self.hits,
            "coverage": self.coverage,
            "binomial_se": self.binomial_se,
            "meets_nominal": self.meets_nominal,
            "seed": self.seed,
            "rng": self.rng,
            "per_z": [
                {"z_nm": z, "coverage": c, "n": int(n)}
                for z, c, n in zip(self.z.tolist(), self.per_z_coverage.tolist(),
                                   self.per_z_count.tolist())
            ],
        }


def _chunk_aligned(scenario, config, seeds):
    """Vectorised trials on an aligned grid; same numbers as the generic path."""
    beta, tables = config.confidence_beta, config.coefficients
    draws = [_draw(scenario, np.random.Generator(np.random.PCG64(s)))[1] for s in seeds]
    samples = np.stack(draws)
    means, var = _kernels.pointwise_stats(samples)
    grid = scenario.nominal_grid
    window = int(config.window_size)
    starts, _ = window_starts(grid.size, window)
    smoothed = _kernels.smooth_windows(var, starts, window)
    sd = np.sqrt(smoothed)
    t = student_t_quantile((1.0 + beta) / 2.0, scenario.n_sets - 1)
    rand_abs = sd * t
    sources = parse_sources(config.systematics)
    if sources:
        mag = np.abs(means)
        rel = evaluate_systematic_sources(sources, np.broadcast_to(grid, means.shape), mag)
        syst_abs = np.asarray(combine_systematic(rel, beta, tables)) * mag
    else:
        syst_abs = np.zeros_like(means)
    total, _, _ = combine_random_systematic_arrays(rand_abs, syst_abs, sd, beta, tables,
                                                   config.regime_override)
    inside = np.abs(means - scenario.truth(grid)) <= total
    return inside.sum(axis=0), np.full(grid.size, len(seeds))


def _chunk_generic(scenario, config, seeds):
    grid = scenario.nominal_grid
    hits = np.zeros(grid.size, dtype=np.int64)
    counts = np.zeros(grid.size, dtype=np.int64)
    for s in seeds:
        coll = generate_synthetic_experiment(scenario, seed=s)
        _, groups = group_collection(coll, config.grid_mode)
        exp = experimental_errors(groups, config)
        inside = np.abs(exp["mean"] - scenario.truth(exp["z"])) <= exp["tot_exp_abs"]
        slot = np.abs(exp["z"][:, None] - grid[None, :]).argmin(axis=1)
        np.add.at(hits, slot, inside.astype(np.int64))
        np.add.at(counts, slot, 1)
    return hits, counts


def coverage_study(scenario: SyntheticScenario, n_trials: int, beta: float = 0.95,
                   threads: int = 1, vectorized: bool | None = None) -> CoverageReport:
    """Fraction of trials whose interval at each grid point contains the truth.

    Aligned grids use a batched path by default; jittered grids run the
    full binning pipeline per trial, with diagnostics attached to the
    nearest nominal grid point.
    """
    if n_trials < 1:
        raise InputError("n_trials must be >= 1", where="coverage_study")
    config = scenario.analysis_config(beta)
    if vectorized is None:
        vectorized = scenario.grid == "aligned"
    if vectorized and scenario.grid != "aligned":
        raise InputError("the batched path needs an aligned grid", where="coverage_study")
    run = _chunk_aligned if vectorized else _chunk_generic
    seeds = _trial_seeds(scenario, n_trials)
    chunks = [seeds[a:a + TRIAL_CHUNK] for a in range(0, n_trials, TRIAL_CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: run(scenario, config, c), chunks))
    else:
        parts = [run(scenario, config, c) for c in chunks]
    hits = np.sum([p[0] for p in parts], axis=0)
    counts = np.sum([p[1] for p in parts], axis=0)
    total_hits, total = int(hits.sum()), int(counts.sum())
    cov = total_hits / total
    with np.errstate(invalid="ignore", divide="ignore"):
        per_z = np.where(counts > 0, hits / np.maximum(counts, 1), np.nan)
    return CoverageReport(
        beta=beta, n_trials=n_trials, n_intervals=total, hits=total_hits, coverage=cov,
        binomial_se=math.sqrt(beta * (1.0 - beta) / total),
        z=scenario.nominal_grid, per_z_coverage=per_z, per_z_count=counts,
        seed=scenario.seed,
    )
