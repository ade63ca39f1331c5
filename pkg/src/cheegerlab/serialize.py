"""JSON and CSV encodings for signals, banks, fields, graphs and specs.

Floats are written with Python's shortest round-trip repr, so every double
survives a write/read cycle bit for bit.  Complex numbers become [re, im]
pairs and infinities the strings "+inf" / "-inf".
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .filterbank import FilterBank
from .transform import CoefficientField


def jsonable(obj):
    """Recursively convert numpy scalars/arrays, complex numbers and infinities."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, allow_nan=False)


def parse_float(x) -> float:
    if isinstance(x, str):
        return {"+inf": math.inf, "inf": math.inf, "-inf": -math.inf, "nan": math.nan}[x]
    return float(x)


def pairs(values) -> list:
    values = np.asarray(values)
    return [[float(z.real), float(z.imag)] for z in values.reshape(-1).astype(np.complex128)]


def from_pairs(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        return arr.astype(np.complex128)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of numbers or of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def signal_to_json(values) -> str:
    return dumps(pairs(values))


def signal_to_csv(values) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["re", "im"])
    for re, im in pairs(values):
        writer.writerow([repr(re), repr(im)])
    return buf.getvalue()


def read_signal(path) -> np.ndarray:
    """Complex array from a JSON pair list, a report with a "signal" entry, or a two-column (re, im) CSV."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if rows and not _numeric(rows[0][0]):
            rows = rows[1:]
        data = [[float(r[0]), float(r[1]) if len(r) > 1 else 0.0] for r in rows]
        return from_pairs(data)
    data = json.loads(text)
    if isinstance(data, dict):
        data = data["signal"]
    return from_pairs(data)


def _numeric(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def bank_to_dict(bank: FilterBank) -> dict:
    return {
        "n": bank.n,
        "labels": list(bank.labels),
        "nu": [float(v) for v in bank.nu],
        "profiles": [pairs(p) for p in bank.profiles],
        "field": bank.field,
    }


def bank_from_dict(data: dict) -> FilterBank:
    profiles = np.array([from_pairs(p) for p in data["profiles"]])
    if "n" in data and profiles.shape[1] != int(data["n"]):
        raise ValueError("profile length does not match n")
    if data.get("field", "complex") == "real":
        profiles = profiles.real if not np.any(profiles.imag) else profiles
    labels = tuple(data.get("labels", range(len(profiles))))
    return FilterBank(profiles, data.get("nu", np.ones(len(labels))), labels, data.get("field", "complex"))


def field_to_dict(F: CoefficientField) -> dict:
    return {"n": F.n, "labels": list(F.labels), "values": pairs(F.values), "field": F.field}


def field_from_dict(data: dict, nu=None) -> CoefficientField:
    labels = tuple(data["labels"])
    values = from_pairs(data["values"]).reshape(int(data["n"]), len(labels))
    field = data.get("field", "complex")
    if field == "real":
        values = values.real
    nu = np.ones(len(labels)) if nu is None else nu
    return CoefficientField(values, labels, nu, field)


def graph_to_dict(G) -> dict:
    return {
        "vertices": [{"label": lab, "w": float(w)} for lab, w in zip(G.labels, G.weights)],
        "edges": [{"a": a, "b": b, "w": w} for a, b, w in G.edge_list()],
        "max_degree": G.max_degree,
    }


def graph_to_csv(G) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["a", "b", "w"])
    for a, b, w in G.edge_list():
        writer.writerow([a, b, repr(w)])
    return buf.getvalue()


def spec_from_dict(data: dict):
    from .ambiguity import AmbiguitySpec

    signs = []
    for s in data["signs"]:
        signs.append(complex(*s) if isinstance(s, (list, tuple)) else complex(s))
    return AmbiguitySpec(tuple(tuple(p) for p in data["parts"]), tuple(signs))
