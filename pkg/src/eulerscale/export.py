"""Byte-stable CSV and JSON writers.

CSV: UTF-8, ``\\n`` line endings, ``.`` decimal point, floats in shortest
round-trip form (``repr``), ``NA`` for missing values.  JSON: sorted keys,
two-space indent, non-finite floats spelled as strings.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .construction import FourierSolution3D
from .terms import ExactCoef, TermSeries, to_records

MODES_SCHEMA = {
    "format": "eulerscale.modes/1",
    "record": "one per (k, m, component) with a nonzero series",
    "fields": {
        "k": "eta0 coordinate", "m": "xi1 coordinate", "component": "0, 1 or 2",
        "wavevector": "k*eta0 + m*xi1",
        "terms": "list of {f_order: int|null, freq: int, re: float, im: float}; value is "
                 "sum re+i*im times f^(f_order)(t) (1 if null) times exp(2 pi i freq t)",
        "exact": "exact mode only: per term, list of [power, re, im] with rationals as "
                 "strings; coefficient is sum (re + i im) (2 pi)^power",
    },
}


def fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    if hasattr(x, "item"):  # numpy scalar
        return fmt(x.item())
    if hasattr(x, "value"):  # enum
        return str(x.value)
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable) -> str:
    lines = [",".join(header)]
    for row in rows:
        if isinstance(row, dict):
            row = [row.get(h) for h in header]
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header: Sequence[str], rows: Iterable) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text(header, rows))
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _jsonable(obj.item())
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str)):
        return obj.value
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json_text(obj))
    return path


def _exact_terms(series: TermSeries) -> list:
    out = []
    for key, c in series.items():
        assert isinstance(c, ExactCoef)
        out.append({"f_order": key.f_order, "freq": key.freq,
                    "coef": [[p, str(re), str(im)] for p, re, im in c.parts]})
    return out


def mode_records(solution: FourierSolution3D) -> list:
    recs = []
    for (k, m) in sorted(solution.modes):
        mode = solution.modes[(k, m)]
        for comp, series in enumerate(mode.components):
            if not series:
                continue
            rec = {"k": k, "m": m, "component": comp,
                   "wavevector": [int(x) for x in solution.wavevector(k, m)],
                   "terms": to_records(series)}
            if solution.exact:
                rec["exact"] = _exact_terms(series)
            recs.append(rec)
    return recs


def modes_document(solution: FourierSolution3D) -> dict:
    return {
        "schema": MODES_SCHEMA,
        "frame": solution.frame.to_dict(),
        "box": {"K": solution.K, "M": solution.M},
        "precision": "exact" if solution.exact else "double",
        "bump": solution.bump.to_dict(),
        "records": mode_records(solution),
    }


MODES_CSV_HEADER = ("k", "m", "component", "f_order", "freq", "re", "im")


def mode_rows(solution: FourierSolution3D) -> list:
    rows = []
    for rec in mode_records(solution):
        for term in rec["terms"]:
            rows.append((rec["k"], rec["m"], rec["component"], term["f_order"], term["freq"],
                         term["re"], term["im"]))
    return rows


def export_modes(solution: FourierSolution3D, path, fmt_: str = "json") -> Path:
    if fmt_ == "json":
        return write_json(path, modes_document(solution))
    if fmt_ == "csv":
        return write_csv(path, MODES_CSV_HEADER, mode_rows(solution))
    raise ValueError(f"unknown export format {fmt_!r}")
