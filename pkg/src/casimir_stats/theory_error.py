"""Theoretical error budget."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .composition import combine_systematic
from .data_model import NM_PER_UM, CoefficientTables, ExperimentConfig, InputError, QuantityKind


def pfa_error(z, radius_um):
    """Upper bound z/R of the proximity-force error; z in nm, R in µm."""
    z = np.asarray(z, dtype=np.float64)
    if np.any(z <= 0) or radius_um <= 0:
        raise InputError("z and R must be positive", where="pfa_error")
    out = z / (radius_um * NM_PER_UM)
    return float(out) if out.ndim == 0 else out


def base_theory_error(delta_1, delta_2, beta: float, tables: CoefficientTables):
    """Combine optical-data and PFA errors as two uniform terms."""
    return combine_systematic(np.broadcast_arrays(np.asarray(delta_1, float),
                                                  np.asarray(delta_2, float)),
                              beta, tables)


def separation_uncertainty_error(
    z, delta_z: float, kind: QuantityKind | str, radius_um: float = 1.0,
    radius_error_um: float = 0.0, exponent: int | None = None,
):
    """Error induced by the separation (and, for force, radius) uncertainty.

    Pressure: exponent * dz / z with exponent 4. Force: dR/R + exponent * dz / z
    with exponent 3.
    """
    kind = QuantityKind(kind)
    z = np.asarray(z, dtype=np.float64)
    if np.any(z <= 0):
        raise InputError("z must be positive", where="separation_uncertainty_error")
    if delta_z < 0:
        raise InputError("delta_z must be >= 0", where="separation_uncertainty_error")
    if exponent is None:
        exponent = 4 if kind is QuantityKind.PRESSURE else 3
    out = exponent * delta_z / z
    if kind is QuantityKind.FORCE:
        if radius_um <= 0 or radius_error_um < 0:
            raise InputError("need R > 0 and dR >= 0", where="separation_uncertainty_error")
        out = out + radius_error_um / radius_um
    return float(out) if np.ndim(out) == 0 else out


def total_theory_error(delta_0, delta_3, beta: float, tables: CoefficientTables):
    """q_beta * (delta_0 + delta_3).

    Always the combined rule: theory errors have no standard deviation to
    form the r ratio from.
    """
    d0 = np.asarray(delta_0, dtype=np.float64)
    d3 = np.asarray(delta_3, dtype=np.float64)
    if np.any(d0 < 0) or np.any(d3 < 0):
        raise InputError("errors must be >= 0", where="total_theory_error")
    out = tables.q(beta) * (d0 + d3)
    return float(out) if out.ndim == 0 else out


def table_round(x):
    """Round like the published tables: two significant figures below 10,
    whole numbers from 10 upward."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    flat, res = x.ravel(), out.ravel()
    for i, v in enumerate(flat.tolist()):
        res[i] = _round_one(v)
    return float(out) if out.ndim == 0 else out


def _round_one(v: float) -> float:
    if v == 0 or not np.isfinite(v):
        return v
    d = Decimal(repr(v))
    if abs(v) >= 10:
        return float(d.quantize(Decimal(1), rounding=ROUND_HALF_UP))
    exp = d.adjusted() - 1  # keep two significant digits
    return float(d.quantize(Decimal(1).scaleb(exp), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class TheoryErrorBudget:
    z: np.ndarray
    delta_1: np.ndarray
    delta_2: np.ndarray
    delta_0: np.ndarray
    delta_3: np.ndarray
    delta_tot: np.ndarray


def theory_budget(z, config: ExperimentConfig, round_base: bool = False) -> TheoryErrorBudget:
    """Per-separation theory error budget (all entries relative).

    With ``round_base`` the composed base error is rounded to the published
    two-figure percentage before entering the total, which is how the
    reference tables chain their columns.
    """
    z = np.asarray(z, dtype=np.float64)
    beta, tables = config.confidence_beta, config.coefficients
    d1 = np.full(z.shape, config.optical_data_error)
    d2 = pfa_error(z, config.sphere_radius) * np.ones(z.shape)
    d0 = np.asarray(base_theory_error(d1, d2, beta, tables)) * np.ones(z.shape)
    d3 = separation_uncertainty_error(
        z, config.delta_z, config.quantity_kind, config.sphere_radius,
        config.sphere_radius_error, config.separation_error_exponent,
    ) * np.ones(z.shape)
    d0_used = table_round(d0 * 100.0) / 100.0 if round_base else d0
    tot = np.asarray(total_theory_error(d0_used, d3, beta, tables)) * np.ones(z.shape)
    return TheoryErrorBudget(z, d1, d2, d0, d3, tot)
