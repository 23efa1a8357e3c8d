"""Domain records, configuration, and file loaders."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

NM_PER_UM = 1.0e3


class InputError(ValueError):
    """Bad input file or configuration. ``where`` names the operation."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class QuantityKind(str, Enum):
    PRESSURE = "pressure"
    FORCE = "force"


@dataclass(frozen=True)
class MeasurementCollection:
    """Raw (set, separation, value) records of one experiment.

    Values are stored signed as measured; separations in nm.
    """

    quantity_kind: QuantityKind
    unit: str
    set_index: np.ndarray
    z: np.ndarray
    value: np.ndarray
    delta_z: float

    def __post_init__(self):
        set_index = np.asarray(self.set_index, dtype=np.int64)
        z = np.asarray(self.z, dtype=np.float64)
        value = np.asarray(self.value, dtype=np.float64)
        if not (set_index.shape == z.shape == value.shape) or z.ndim != 1:
            raise InputError("record columns must be 1-D and equally long")
        if z.size == 0:
            raise InputError("measurement collection has no records")
        if not (self.delta_z > 0):
            raise InputError("delta_z must be positive")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(value))):
            raise InputError("records must be finite")
        for arr in (set_index, z, value):
            arr.setflags(write=False)
        object.__setattr__(self, "set_index", set_index)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "quantity_kind", QuantityKind(self.quantity_kind))

    @property
    def n_sets(self) -> int:
        return int(np.unique(self.set_index).size)

    @property
    def z_range(self) -> tuple[float, float]:
        return float(self.z.min()), float(self.z.max())

    @property
    def records(self) -> list[tuple[int, float, float]]:
        return list(zip(self.set_index.tolist(), self.z.tolist(), self.value.tolist()))

    def __len__(self) -> int:
        return int(self.z.size)


@dataclass(frozen=True)
class TheoryCurve:
    """A named model's predicted values on a strictly increasing z grid."""

    model_name: str
    z: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float64)
        value = np.asarray(self.value, dtype=np.float64)
        if z.ndim != 1 or z.shape != value.shape:
            raise InputError(f"theory curve {self.model_name!r}: malformed grid")
        if z.size < 2:
            raise InputError(f"theory curve {self.model_name!r}: need at least 2 points")
        if np.any(np.diff(z) == 0):
            raise InputError(f"theory curve {self.model_name!r}: duplicate abscissa")
        if np.any(np.diff(z) < 0):
            raise InputError(f"theory curve {self.model_name!r}: non-monotone grid")
        z.setflags(write=False)
        value.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "value", value)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.z.tolist(), self.value.tolist()))


def interpolate_theory(curve: TheoryCurve, z):
    """Piecewise-linear interpolation; exact at nodes, no extrapolation."""
    zq = np.asarray(z, dtype=np.float64)
    lo, hi = curve.z[0], curve.z[-1]
    if np.any(zq < lo) or np.any(zq > hi):
        raise InputError(
            f"z outside theory grid [{lo:g}, {hi:g}] of {curve.model_name!r}; "
            "extrapolation refused",
            where="interpolate_theory",
        )
    out = np.interp(zq, curve.z, curve.value)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# coefficient tables and configuration


def _beta_key(beta: float) -> float:
    return round(float(beta), 6)


DEFAULT_K_BETA = {(0.95, 2): 1.10, (0.95, 4): 1.12}
DEFAULT_Q_BETA = {0.95: 0.80}


@dataclass(frozen=True)
class CoefficientTables:
    """Composition coefficients keyed by confidence level.

    ``k_beta`` maps (beta, J) to the quadrature coefficient for J uniform
    errors; ``q_beta`` maps beta to the random+systematic coefficient.
    Missing entries raise rather than interpolate.
    """

    k_beta: Mapping[tuple[float, int], float] = field(
        default_factory=lambda: dict(DEFAULT_K_BETA)
    )
    q_beta: Mapping[float, float] = field(default_factory=lambda: dict(DEFAULT_Q_BETA))
    r_low: float = 0.8
    r_high: float = 8.0

    def __post_init__(self):
        k = {(_beta_key(b), int(j)): float(v) for (b, j), v in self.k_beta.items()}
        q = {_beta_key(b): float(v) for b, v in self.q_beta.items()}
        if any(v < 1 for v in k.values()):
            raise InputError("k_beta coefficients must be >= 1")
        if any(not (0 < v <= 1) for v in q.values()):
            raise InputError("q_beta coefficients must lie in (0, 1]")
        if not (0 < self.r_low < self.r_high):
            raise InputError("need 0 < r_low < r_high")
        object.__setattr__(self, "k_beta", k)
        object.__setattr__(self, "q_beta", q)

    def k(self, beta: float, n_terms: int) -> float:
        try:
            return self.k_beta[(_beta_key(beta), int(n_terms))]
        except KeyError:
            raise InputError(
                f"no k coefficient for beta={beta:g}, J={n_terms}; supply it under "
                "coefficients.k_beta in the config"
            ) from None

    def q(self, beta: float) -> float:
        try:
            return self.q_beta[_beta_key(beta)]
        except KeyError:
            raise InputError(
                f"no q coefficient for beta={beta:g}; supply it under "
                "coefficients.q_beta in the config"
            ) from None

    def to_json(self) -> dict:
        return {
            "k_beta": [
                {"beta": b, "J": j, "k": v} for (b, j), v in sorted(self.k_beta.items())
            ],
            "q_beta": [{"beta": b, "q": v} for b, v in sorted(self.q_beta.items())],
            "r_low": self.r_low,
            "r_high": self.r_high,
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any] | None) -> "CoefficientTables":
        if not doc:
            return cls()
        k = dict(DEFAULT_K_BETA)
        for row in doc.get("k_beta", []):
            k[(row["beta"], row["J"])] = row["k"]
        q = dict(DEFAULT_Q_BETA)
        q_doc = doc.get("q_beta", [])
        if isinstance(q_doc, (int, float)):
            q[0.95] = q_doc
        else:
            for row in q_doc:
                q[row["beta"]] = row["q"]
        return cls(
            k_beta=k,
            q_beta=q,
            r_low=doc.get("r_low", 0.8),
            r_high=doc.get("r_high", 8.0),
        )


REGIMES = ("random-dominated", "combined", "systematic-dominated")
GRID_MODES = ("auto", "partition", "pointwise")


@dataclass(frozen=True)
class ExperimentConfig:
    """Analysis settings for one experiment.

    Lengths: ``delta_z`` in nm, sphere radius and its error in µm.
    ``systematics`` holds raw source declarations, parsed by
    :func:`casimir_stats.composition.parse_sources`.
    """

    quantity_kind: QuantityKind = QuantityKind.PRESSURE
    unit: str = "mPa"
    delta_z: float = 0.6
    confidence_beta: float = 0.95
    sphere_radius: float = 148.7
    sphere_radius_error: float = 0.2
    window_size: int = 5
    optical_data_error: float = 0.005
    separation_error_exponent: int | None = None
    coefficients: CoefficientTables = field(default_factory=CoefficientTables)
    systematics: tuple = ()
    regime_override: str | None = None
    grid_mode: str = "auto"
    min_exclusion_run: int = 2
    reconstructed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "quantity_kind", QuantityKind(self.quantity_kind))
        if not (0 < self.confidence_beta < 1):
            raise InputError("confidence_beta must lie in (0, 1)")
        if not (self.sphere_radius > 0):
            raise InputError("sphere_radius must be positive")
        if self.sphere_radius_error < 0:
            raise InputError("sphere_radius_error must be nonnegative")
        if not (self.delta_z > 0):
            raise InputError("delta_z must be positive")
        if int(self.window_size) < 1:
            raise InputError("window_size must be >= 1")
        if self.optical_data_error < 0:
            raise InputError("optical_data_error must be nonnegative")
        if self.regime_override is not None and self.regime_override not in REGIMES:
            raise InputError(f"regime_override must be one of {REGIMES}")
        if self.grid_mode not in GRID_MODES:
            raise InputError(f"grid_mode must be one of {GRID_MODES}")
        if int(self.min_exclusion_run) < 1:
            raise InputError("min_exclusion_run must be >= 1")
        if self.separation_error_exponent is None:
            exp = 4 if self.quantity_kind is QuantityKind.PRESSURE else 3
            object.__setattr__(self, "separation_error_exponent", exp)
        object.__setattr__(self, "systematics", tuple(self.systematics))

    def with_beta(self, beta: float) -> "ExperimentConfig":
        return replace(self, confidence_beta=beta)

    def to_json(self) -> dict:
        return {
            "quantity_kind": self.quantity_kind.value,
            "unit": self.unit,
            "delta_z_nm": self.delta_z,
            "confidence_beta": self.confidence_beta,
            "sphere_radius_um": self.sphere_radius,
            "sphere_radius_error_um": self.sphere_radius_error,
            "window_size": int(self.window_size),
            "optical_data_error": self.optical_data_error,
            "separation_error_exponent": int(self.separation_error_exponent),
            "coefficients": self.coefficients.to_json(),
            "systematics": [dict(s) for s in self.systematics],
            "regime_override": self.regime_override,
            "grid_mode": self.grid_mode,
            "min_exclusion_run": int(self.min_exclusion_run),
            "reconstructed": self.reconstructed,
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "ExperimentConfig":
        known = {
            "quantity_kind", "unit", "delta_z_nm", "confidence_beta",
            "sphere_radius_um", "sphere_radius_error_um", "window_size",
            "optical_data_error", "separation_error_exponent", "coefficients",
            "systematics", "regime_override", "grid_mode", "min_exclusion_run",
            "reconstructed", "comment",
        }
        unknown = sorted(set(doc) - known)
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(unknown)}")
        kwargs: dict[str, Any] = {}
        rename = {
            "delta_z_nm": "delta_z",
            "sphere_radius_um": "sphere_radius",
            "sphere_radius_error_um": "sphere_radius_error",
        }
        for key, value in doc.items():
            if key in ("coefficients", "comment"):
                continue
            kwargs[rename.get(key, key)] = value
        kwargs["coefficients"] = CoefficientTables.from_json(doc.get("coefficients"))
        kwargs["systematics"] = tuple(dict(s) for s in doc.get("systematics", []))
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(str(exc)) from exc

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"{path}: file not found", where="load_config") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})",
                         where="load_config") from None
    try:
        return ExperimentConfig.from_json(doc)
    except InputError as exc:
        raise InputError(f"{path}: {exc}", where="load_config") from None


# ---------------------------------------------------------------------------
# CSV ingestion


def _read_csv(path: Path, where: str):
    """Yield (line_number, row) pairs and collect ``# key: value`` headers."""
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"{path}: file not found", where=where) from None
    meta: dict[str, str] = {}
    rows: list[tuple[int, list[str]]] = []
    header: list[str] | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, sep, val = stripped[1:].partition(":")
            if sep:
                meta[key.strip().lower()] = val.strip()
            continue
        row = next(csv.reader([line]))
        if header is None:
            header = [c.strip() for c in row]
            continue
        rows.append((lineno, [c.strip() for c in row]))
    return header, rows, meta


def _parse_float(cell: str, path: Path, lineno: int, column: str, where: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise InputError(
            f"{path}:{lineno}: non-numeric value {cell!r} in column {column!r}",
            where=where,
        ) from None
    if not math.isfinite(value):
        raise InputError(f"{path}:{lineno}: non-finite value in column {column!r}",
                         where=where)
    return value


def load_measurement_sets(
    paths: Sequence,
    unit: str,
    quantity_kind: QuantityKind | str,
    delta_z: float,
) -> MeasurementCollection:
    """Merge measurement CSV files into one collection.

    Files carry the header ``set,z_nm,value``. When the ``set`` column is
    absent, every row of the i-th file belongs to set i (1-based). An
    optional ``# unit: <unit>`` comment line is checked against ``unit``.
    """
    where = "load_measurement_sets"
    if not paths:
        raise InputError("no measurement files given", where=where)
    sets: list[int] = []
    zs: list[float] = []
    vals: list[float] = []
    for file_no, p in enumerate(paths, start=1):
        path = Path(p)
        header, rows, meta = _read_csv(path, where)
        if header is None:
            raise InputError(f"{path}: empty measurement file", where=where)
        file_unit = meta.get("unit")
        if file_unit is not None and file_unit != unit:
            raise InputError(
                f"{path}: unit mismatch ({file_unit!r} in file, {unit!r} expected)",
                where=where,
            )
        for col in ("z_nm", "value"):
            if col not in header:
                raise InputError(f"{path}:1: missing column {col!r}", where=where)
        has_set = "set" in header
        iz, iv = header.index("z_nm"), header.index("value")
        iset = header.index("set") if has_set else None
        if not rows:
            raise InputError(f"{path}: empty measurement file", where=where)
        for lineno, row in rows:
            if len(row) != len(header):
                raise InputError(
                    f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}",
                    where=where,
                )
            if has_set:
                s = _parse_float(row[iset], path, lineno, "set", where)
                if s != int(s):
                    raise InputError(f"{path}:{lineno}: set index must be an integer",
                                     where=where)
                sets.append(int(s))
            else:
                sets.append(file_no)
            zs.append(_parse_float(row[iz], path, lineno, "z_nm", where))
            vals.append(_parse_float(row[iv], path, lineno, "value", where))
    return MeasurementCollection(
        quantity_kind=QuantityKind(quantity_kind),
        unit=unit,
        set_index=np.array(sets, dtype=np.int64),
        z=np.array(zs),
        value=np.array(vals),
        delta_z=float(delta_z),
    )


def write_measurement_csv(coll: MeasurementCollection, path) -> None:
    """Write records with shortest round-trip float text."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# unit: {coll.unit}\n")
        fh.write(f"# quantity: {coll.quantity_kind.value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["set", "z_nm", "value"])
        for s, z, v in zip(coll.set_index.tolist(), coll.z.tolist(), coll.value.tolist()):
            writer.writerow([s, repr(z), repr(v)])


def load_theory_curves(paths: Sequence, names: Iterable[str | None] | None = None):
    """Load theory CSVs (header ``z_nm,value``); names default to file stems."""
    where = "load_theory_curves"
    names = list(names) if names is not None else []
    curves: list[TheoryCurve] = []
    seen: set[str] = set()
    for i, p in enumerate(paths):
        path = Path(p)
        header, rows, meta = _read_csv(path, where)
        name = names[i] if i < len(names) and names[i] else meta.get("model", path.stem)
        if header is None or not rows:
            raise InputError(f"{path}: empty theory file", where=where)
        for col in ("z_nm", "value"):
            if col not in header:
                raise InputError(f"{path}:1: missing column {col!r}", where=where)
        iz, iv = header.index("z_nm"), header.index("value")
        z = np.array([_parse_float(r[iz], path, n, "z_nm", where) for n, r in rows])
        v = np.array([_parse_float(r[iv], path, n, "value", where) for n, r in rows])
        order = np.argsort(z, kind="stable")
        z, v = z[order], v[order]
        dup = np.flatnonzero(np.diff(z) == 0)
        if dup.size:
            raise InputError(f"{path}: duplicate abscissa z={z[dup[0]]:g}", where=where)
        if name in seen:
            raise InputError(f"{path}: duplicate model {name!r}", where=where)
        seen.add(name)
        try:
            curves.append(TheoryCurve(name, z, v))
        except InputError as exc:
            raise InputError(f"{path}: {exc}", where=where) from None
    return curves
