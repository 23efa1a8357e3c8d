"""Systematic error sources and their composition with random errors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

import numpy as np

from .data_model import REGIMES, CoefficientTables, InputError

RANDOM, COMBINED, SYSTEMATIC = REGIMES


class SourceKind(str, Enum):
    CONSTANT_ABSOLUTE = "constant_absolute"
    CONSTANT_RELATIVE = "constant_relative"
    FREQUENCY_DETUNING = "frequency_detuning"


@dataclass(frozen=True)
class SystematicSource:
    """One systematic error source.

    Parameters by kind:

    - ``constant_absolute``: ``delta`` in measurement units.
    - ``constant_relative``: ``delta`` as a fraction.
    - ``frequency_detuning``: ``delta_omega_r``, ``omega_0`` and ``omega_r``,
      the latter a list of ``[z_nm, omega]`` pairs interpolated linearly.
      Any common frequency unit works; only ratios enter.
    """

    name: str
    kind: SourceKind
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", SourceKind(self.kind))
        p = self.params
        if self.kind is SourceKind.FREQUENCY_DETUNING:
            for key in ("delta_omega_r", "omega_0", "omega_r"):
                if key not in p:
                    raise InputError(f"source {self.name!r}: missing parameter {key!r}")
            if p["delta_omega_r"] < 0:
                raise InputError(f"source {self.name!r}: delta_omega_r must be >= 0")
            table = np.asarray(p["omega_r"], dtype=np.float64)
            if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 1:
                raise InputError(f"source {self.name!r}: omega_r must be [[z, omega], ...]")
            if np.any(np.diff(table[:, 0]) <= 0):
                raise InputError(f"source {self.name!r}: omega_r grid must increase")
        else:
            if "delta" not in p:
                raise InputError(f"source {self.name!r}: missing parameter 'delta'")
            if p["delta"] < 0:
                raise InputError(f"source {self.name!r}: delta must be >= 0")

    def relative(self, z, magnitude):
        """Relative error at separation(s) ``z`` for |value| = ``magnitude``."""
        z = np.asarray(z, dtype=np.float64)
        mag = np.abs(np.asarray(magnitude, dtype=np.float64))
        if self.kind is SourceKind.CONSTANT_RELATIVE:
            return np.broadcast_to(float(self.params["delta"]), np.broadcast(z, mag).shape).copy()
        if self.kind is SourceKind.CONSTANT_ABSOLUTE:
            if np.any(mag == 0):
                raise InputError(
                    f"source {self.name!r}: relative error undefined at zero signal",
                    where="evaluate_systematic_sources",
                )
            return float(self.params["delta"]) / mag
        table = np.asarray(self.params["omega_r"], dtype=np.float64)
        if table.shape[0] == 1:
            omega_r = np.full(z.shape, table[0, 1])
        else:
            if np.any(z < table[0, 0]) or np.any(z > table[-1, 0]):
                raise InputError(
                    f"source {self.name!r}: z outside the omega_r table",
                    where="evaluate_systematic_sources",
                )
            omega_r = np.interp(z, table[:, 0], table[:, 1])
        detuning = np.abs(omega_r - float(self.params["omega_0"]))
        if np.any(detuning == 0):
            raise InputError(
                f"source {self.name!r}: singular source, omega_r equals omega_0",
                where="evaluate_systematic_sources",
            )
        return float(self.params["delta_omega_r"]) / detuning

    def to_json(self) -> dict:
        return {"name": self.name, "kind": self.kind.value, **dict(self.params)}


def parse_sources(docs: Sequence[Mapping[str, Any]]) -> list[SystematicSource]:
    sources = []
    for i, doc in enumerate(docs):
        doc = dict(doc)
        try:
            name = doc.pop("name", f"source{i + 1}")
            kind = doc.pop("kind")
            sources.append(SystematicSource(name, kind, doc))
        except KeyError as exc:
            raise InputError(f"systematics[{i}]: missing {exc.args[0]!r}") from None
        except ValueError as exc:
            raise InputError(f"systematics[{i}]: {exc}") from None
    return sources


def evaluate_systematic_sources(sources: Sequence[SystematicSource], z, magnitude):
    """Relative error of every source at ``z``; shape (J, *z.shape)."""
    return np.array([s.relative(z, magnitude) for s in sources])


def combine_systematic(deltas, beta: float, tables: CoefficientTables, axis: int = 0):
    """min{ sum, k_beta^(J) * sqrt(sum of squares) } over ``axis``.

    Works on relative or absolute errors alike; a single term is returned
    unchanged.
    """
    d = np.asarray(deltas, dtype=np.float64)
    if d.ndim == 0:
        raise InputError("need a sequence of errors", where="combine_systematic")
    n_terms = d.shape[axis]
    if n_terms == 0:
        raise InputError("no systematic errors to combine", where="combine_systematic")
    if np.any(d < 0):
        raise InputError("errors must be >= 0", where="combine_systematic")
    if n_terms == 1:
        out = np.take(d, 0, axis=axis)
    else:
        k = tables.k(beta, n_terms)
        out = np.minimum(d.sum(axis=axis), k * np.sqrt((d * d).sum(axis=axis)))
    return float(out) if np.ndim(out) == 0 else out


def regime_for_ratio(r: float, tables: CoefficientTables) -> str:
    if r < tables.r_low:
        return RANDOM
    if r > tables.r_high:
        return SYSTEMATIC
    return COMBINED


def combine_random_systematic(
    delta_rand: float,
    delta_syst: float,
    s: float,
    beta: float,
    tables: CoefficientTables,
    override: str | None = None,
) -> tuple[float, str]:
    """Total error and regime tag from r = delta_syst / s.

    ``s`` is the standard deviation of the mean. With s = 0 and a nonzero
    systematic error the ratio is taken as infinite. ``override`` forces a
    regime regardless of r.
    """
    if delta_rand < 0 or delta_syst < 0 or s < 0:
        raise InputError("errors must be >= 0", where="combine_random_systematic")
    if override is not None:
        regime = override
    elif s == 0:
        regime = SYSTEMATIC if delta_syst > 0 else RANDOM
    else:
        regime = regime_for_ratio(delta_syst / s, tables)
    if regime == RANDOM:
        return float(delta_rand), regime
    if regime == SYSTEMATIC:
        return float(delta_syst), regime
    return tables.q(beta) * (delta_rand + delta_syst), regime


def combine_random_systematic_arrays(delta_rand, delta_syst, s, beta, tables, override=None):
    """Vectorized :func:`combine_random_systematic`.

    Returns ``(total, r, code)`` where ``code`` indexes :data:`REGIMES`.
    """
    delta_rand = np.asarray(delta_rand, dtype=np.float64)
    delta_syst = np.asarray(delta_syst, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(s > 0, delta_syst / np.where(s > 0, s, 1.0),
                     np.where(delta_syst > 0, math.inf, 0.0))
    if override is not None:
        code = np.full(r.shape, REGIMES.index(override), dtype=np.int64)
    else:
        code = np.where(r < tables.r_low, 0, np.where(r > tables.r_high, 2, 1)).astype(np.int64)
    q = tables.q(beta) if np.any(code == 1) else 1.0
    total = np.select(
        [code == 0, code == 2], [delta_rand, delta_syst], q * (delta_rand + delta_syst)
    )
    return total, r, code
