"""End-to-end analysis: grouping, experimental and theoretical budgets, verdicts."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__, _kernels
from .binning import GroupArrays, group_collection
from .comparison import ComparisonVerdict, difference_error, mean_difference, verdict
from .composition import (
    combine_random_systematic_arrays,
    combine_systematic,
    evaluate_systematic_sources,
    parse_sources,
)
from .data_model import REGIMES, ExperimentConfig, InputError, MeasurementCollection, TheoryCurve
from .random_error import window_starts
from .tdist import student_t_quantile
from .theory_error import theory_budget

CHUNK = 64


@dataclass(frozen=True)
class ErrorBudget:
    """Per-separation error ledger. Relative errors are fractions of |mean|."""

    z: np.ndarray
    count: np.ndarray
    mean: np.ndarray
    var_of_mean: np.ndarray
    smoothed_sd: np.ndarray
    dof: np.ndarray
    t_quantile: np.ndarray
    rand_abs: np.ndarray
    syst_abs: np.ndarray
    tot_exp_abs: np.ndarray
    r_ratio: np.ndarray
    regime: tuple[str, ...]
    rand_rel: np.ndarray
    syst_rel: np.ndarray
    tot_exp_rel: np.ndarray
    delta_1: np.ndarray
    delta_2: np.ndarray
    delta_0: np.ndarray
    delta_3: np.ndarray
    tot_theory_rel: np.ndarray
    tot_theory_abs: np.ndarray
    xi_abs: np.ndarray
    xi_rel: np.ndarray
    window_start: np.ndarray
    window_shifted: np.ndarray

    def __len__(self) -> int:
        return int(self.z.size)

    @classmethod
    def empty(cls) -> "ErrorBudget":
        kw = {name: np.empty(0) for name in cls.__dataclass_fields__}
        kw["regime"] = ()
        return cls(**kw)

    def rows(self) -> list[dict]:
        names = list(self.__dataclass_fields__)
        out = []
        for i in range(len(self)):
            row = {}
            for name in names:
                col = getattr(self, name)
                v = col[i]
                row[name] = v if isinstance(v, str) else v.item()
            out.append(row)
        return out


@dataclass(frozen=True)
class AnalysisResult:
    mode: str
    budget: ErrorBudget
    verdicts: tuple[ComparisonVerdict, ...]
    meta: dict = field(default_factory=dict)

    @property
    def any_excluded(self) -> bool:
        return any(v.excluded for v in self.verdicts)


def experimental_errors(groups: GroupArrays, config: ExperimentConfig, idx: np.ndarray | None = None):
    """Random, systematic and total experimental errors for the selected groups.

    Windows always draw on the full group table, so evaluating any subset of
    indices gives the same numbers as evaluating all of them.
    """
    n = len(groups)
    if idx is None:
        idx = np.arange(n)
    beta, tables = config.confidence_beta, config.coefficients
    window = int(config.window_size)
    if np.any(groups.count < 2):
        raise InputError("every group needs two or more members", where="random_error")
    starts_all, shifted_all = window_starts(n, window)
    starts, shifted = starts_all[idx], shifted_all[idx]
    smoothed = _kernels.smooth_windows(groups.var_of_mean, starts, window)
    dof = _kernels.window_min(groups.count, starts, window) - 1
    p = (1.0 + beta) / 2.0
    tq = np.array([student_t_quantile(p, int(f)) for f in dof.tolist()])
    sd = np.sqrt(smoothed)
    rand_abs = sd * tq

    z = groups.center[idx]
    mean = groups.mean[idx]
    mag = np.abs(mean)
    sources = parse_sources(config.systematics)
    if sources:
        rel = evaluate_systematic_sources(sources, z, mag)
        syst_rel = np.asarray(combine_systematic(rel, beta, tables)) * np.ones(z.shape)
        syst_abs = syst_rel * mag
    else:
        syst_abs = np.zeros(z.shape)
    tot_abs, r, code = combine_random_systematic_arrays(
        rand_abs, syst_abs, sd, beta, tables, config.regime_override
    )
    return dict(
        z=z, count=groups.count[idx], mean=mean, var_of_mean=groups.var_of_mean[idx],
        smoothed_sd=sd, dof=dof, t_quantile=tq, rand_abs=rand_abs, syst_abs=syst_abs,
        tot_exp_abs=tot_abs, r_ratio=r, regime_code=code,
        window_start=starts, window_shifted=shifted,
    )


def _budget_chunk(groups, config, idx, round_base):
    exp = experimental_errors(groups, config, idx)
    mag = np.abs(exp["mean"])
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = lambda a: np.where(mag > 0, a / np.where(mag > 0, mag, 1.0), np.inf)  # noqa: E731
        th = theory_budget(exp["z"], config, round_base=round_base)
        tot_th_abs = th.delta_tot * mag
        k = config.coefficients.k(config.confidence_beta, 2)
        xi = np.asarray(difference_error(tot_th_abs, exp["tot_exp_abs"], k)) * np.ones(mag.shape)
        cols = dict(
            rand_rel=rel(exp["rand_abs"]), syst_rel=rel(exp["syst_abs"]),
            tot_exp_rel=rel(exp["tot_exp_abs"]), delta_1=th.delta_1, delta_2=th.delta_2,
            delta_0=th.delta_0, delta_3=th.delta_3, tot_theory_rel=th.delta_tot,
            tot_theory_abs=tot_th_abs, xi_abs=xi, xi_rel=rel(xi),
        )
    exp.update(cols)
    return exp


def build_budget(groups: GroupArrays, config: ExperimentConfig, threads: int = 1,
                 round_base: bool = False) -> ErrorBudget:
    """Full error budget; work is split into fixed chunks merged in index order."""
    n = len(groups)
    if n == 0:
        return ErrorBudget.empty()
    chunks = [np.arange(a, min(a + CHUNK, n)) for a in range(0, n, CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _budget_chunk(groups, config, c, round_base), chunks))
    else:
        parts = [_budget_chunk(groups, config, c, round_base) for c in chunks]
    merged = {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}
    code = merged.pop("regime_code")
    merged["regime"] = tuple(REGIMES[c] for c in code.tolist())
    return ErrorBudget(**merged)


def compare_models(budget: ErrorBudget, curves: Sequence[TheoryCurve], config: ExperimentConfig,
                   threads: int = 1) -> tuple[ComparisonVerdict, ...]:
    def one(curve):
        d = mean_difference(curve, budget.z, budget.mean)
        return verdict(curve.model_name, budget.z, d, budget.xi_abs,
                       config.confidence_beta, config.min_exclusion_run)

    if threads > 1 and len(curves) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return tuple(pool.map(one, curves))
    return tuple(one(c) for c in curves)


def analysis_meta(config: ExperimentConfig, mode: str) -> dict:
    beta = config.confidence_beta
    tables = config.coefficients
    try:
        q = tables.q(beta)
    except InputError:
        q = None
    return {
        "tool": "casimir-stats",
        "tool_version": __version__,
        "kernel_backend": _kernels.backend(),
        "config_digest": config.digest(),
        "beta": beta,
        "window_size": int(config.window_size),
        "q_beta": q,
        "k_table": tables.to_json()["k_beta"],
        "r_thresholds": [tables.r_low, tables.r_high],
        "grouping": mode,
        "bin_convention": "width 2*delta_z, anchored at min z, half-open [left, right)",
        "window_edges": "shifted inward to keep full size",
        "regime_override": config.regime_override,
        "quantity_kind": config.quantity_kind.value,
        "unit": config.unit,
        "reconstructed_config": config.reconstructed,
    }


def analyze(coll: MeasurementCollection, curves: Sequence[TheoryCurve], config: ExperimentConfig,
            threads: int = 1) -> AnalysisResult:
    """Run every stage from raw records to per-model verdicts."""
    if coll.unit != config.unit:
        raise InputError(f"data unit {coll.unit!r} differs from config unit {config.unit!r}",
                         where="analyze")
    mode, groups = group_collection(coll, config.grid_mode)
    budget = build_budget(groups, config, threads=threads)
    verdicts = compare_models(budget, curves, config, threads=threads)
    return AnalysisResult(mode, budget, verdicts, analysis_meta(config, mode))
