"""CSV and JSON documents for error budgets and model comparisons.

Both documents carry a ``meta`` block. In CSV it is a single leading
comment line ``# meta: {json}``; the table follows with RFC 4180 quoting.
Floats are written with ``repr`` (shortest round-trip text), so output is
stable for identical inputs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Sequence

from .comparison import ComparisonVerdict
from .pipeline import ErrorBudget
from .theory_error import table_round

# (output column, budget field) for the relative columns of the budget table
PERCENT_COLUMNS = [
    ("rand_pct", "rand_rel"),        # (a)
    ("syst_pct", "syst_rel"),        # (b)
    ("tot_exp_pct", "tot_exp_rel"),  # (c)
    ("delta0_pct", "delta_0"),       # (d)
    ("tot_theory_pct", "tot_theory_rel"),  # (e)
    ("xi_pct", "xi_rel"),            # (f)
]

BUDGET_EXTRA = [
    "count", "mean", "smoothed_sd", "dof", "t_quantile", "rand_abs", "syst_abs",
    "tot_exp_abs", "r_ratio", "delta_1", "delta_2", "delta_3", "tot_theory_abs",
    "xi_abs", "window_start", "window_shifted",
]


def _num(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return repr(x)


def printed_text(pct: float) -> str:
    """Percentage as printed in the reference tables (e.g. 1.4, 0.15, 107)."""
    v = table_round(pct)
    if not math.isfinite(v):
        return _num(v)
    if abs(v) >= 10:
        return f"{v:.0f}"
    if v == 0:
        return "0"
    decimals = max(0, 1 - math.floor(math.log10(abs(v))))
    return f"{v:.{decimals}f}"


def _json_float(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


def budget_records(budget: ErrorBudget) -> list[dict]:
    records = []
    for row in budget.rows():
        rec = {"z_nm": row["z"], "regime": row["regime"]}
        for col, name in PERCENT_COLUMNS:
            rec[col] = 100.0 * row[name]
        for col, name in PERCENT_COLUMNS:
            rec[col + "_printed"] = printed_text(100.0 * row[name])
        for name in BUDGET_EXTRA:
            rec[name] = row[name]
        records.append(rec)
    return records


def _header():
    return (["z_nm"] + [c for c, _ in PERCENT_COLUMNS]
            + [c + "_printed" for c, _ in PERCENT_COLUMNS] + ["regime"] + BUDGET_EXTRA)


def emit_error_budget(budget: ErrorBudget, meta: dict, fmt: str = "csv") -> str:
    """Budget table in the layout of the reference error table, columns (a)-(f)."""
    records = budget_records(budget)
    if fmt == "json":
        rows = [{k: (_json_float(v) if isinstance(v, float) else v) for k, v in r.items()}
                for r in records]
        return json.dumps({"meta": meta, "rows": rows}, indent=2, sort_keys=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    buf.write("# meta: " + json.dumps(meta, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    header = _header()
    writer.writerow(header)
    for r in records:
        writer.writerow([r[h] if isinstance(r[h], str) else _num(r[h]) for h in header])
    return buf.getvalue()


def comparison_records(verdicts: Sequence[ComparisonVerdict]):
    points, summary = [], []
    for v in verdicts:
        for z, xi, d, inside in zip(v.z.tolist(), v.xi.tolist(),
                                    v.mean_difference.tolist(), v.inside_band.tolist()):
            points.append({"model": v.model_name, "beta": v.beta, "z_nm": z, "xi": xi,
                           "mean_difference": d, "inside_band": bool(inside)})
        summary.append({
            "model": v.model_name,
            "beta": v.beta,
            "excluded": v.excluded,
            "ranges": [{"tag": r.tag, "z_start_nm": r.z_start, "z_end_nm": r.z_end,
                        "n_points": r.n_points} for r in v.ranges],
        })
    return points, summary


def emit_comparison(verdicts: Sequence[ComparisonVerdict], meta: dict, fmt: str = "csv") -> str:
    """Per-point band membership for each model plus a range summary.

    CSV rows have ``record`` = ``point`` or ``range``; JSON splits them into
    ``points`` and ``summary``.
    """
    points, summary = comparison_records(verdicts)
    if fmt == "json":
        doc = {"meta": meta, "points": points, "summary": summary}
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    buf.write("# meta: " + json.dumps(meta, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["record", "model", "beta", "z_nm", "z_end_nm", "xi",
                     "mean_difference", "inside_band", "tag"])
    for p in points:
        writer.writerow(["point", p["model"], _num(p["beta"]), _num(p["z_nm"]), "",
                         _num(p["xi"]), _num(p["mean_difference"]),
                         _num(p["inside_band"]), ""])
    for s in summary:
        for r in s["ranges"]:
            writer.writerow(["range", s["model"], _num(s["beta"]), _num(r["z_start_nm"]),
                             _num(r["z_end_nm"]), "", "", "", r["tag"]])
    return buf.getvalue()
