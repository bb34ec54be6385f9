"""JSON encodings of matrices, pencils, series and solver results.

A matrix is ``{"rows": m, "cols": n, "data": [[re, im], ...]}`` in row-major
order.  Plain nested lists of numbers (or ``[re, im]`` pairs) are accepted on
input as well.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .core import Annulus, LaurentSeries, LinearPencil
from .determining import PoleSolution
from .errors import InputError
from .polynomial import PolynomialPencil


def _num(x: float):
    x = float(x)
    if x == 0.0:
        return 0.0
    return x


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]),
            "data": [[_num(v.real), _num(v.imag)] for v in a.reshape(-1)]}


def _scalar(v, where: str) -> complex:
    if isinstance(v, bool):
        raise InputError(f"{where}: booleans are not numbers")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise InputError(f"{where}: expected a number or an [re, im] pair, got {v!r}")


def matrix_from_json(obj, name: str = "matrix") -> np.ndarray:
    if isinstance(obj, dict):
        try:
            rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{name}: needs integer 'rows', 'cols' and a 'data' list") from exc
        if not isinstance(data, list) or len(data) != rows * cols:
            raise InputError(f"{name}: 'data' must hold rows*cols = {rows * cols} entries")
        vals = [_scalar(v, f"{name}[{k}]") for k, v in enumerate(data)]
        out = np.array(vals, dtype=complex).reshape(rows, cols) if vals else \
            np.zeros((rows, cols), dtype=complex)
    elif isinstance(obj, list) and obj and all(isinstance(r, list) for r in obj):
        width = len(obj[0])
        out = np.zeros((len(obj), width), dtype=complex)
        for i, row in enumerate(obj):
            if len(row) != width:
                raise InputError(f"{name}: row {i} has {len(row)} entries, expected {width}")
            for k, v in enumerate(row):
                out[i, k] = _scalar(v, f"{name}[{i}][{k}]")
    else:
        raise InputError(f"{name}: not a matrix")
    if not np.all(np.isfinite(out)):
        raise InputError(f"{name}: non-finite entries")
    return out


def complex_to_json(z: complex) -> list:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def complex_from_json(v, where: str = "value") -> complex:
    return _scalar(v, where)


def radius_to_json(r: float):
    return "inf" if math.isinf(r) else float(r)


def radius_from_json(v) -> float:
    if v == "inf":
        return math.inf
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    raise InputError(f"radius must be a number or \"inf\", got {v!r}")


def pencil_to_json(p: LinearPencil) -> dict:
    return {"a0": matrix_to_json(p.a0), "a1": matrix_to_json(p.a1)}


def _pencil_keys(obj):
    for k0, k1 in (("a0", "a1"), ("A0", "A1")):
        if isinstance(obj, dict) and k0 in obj and k1 in obj:
            return k0, k1
    return None


def pencil_from_json(obj) -> LinearPencil:
    keys = _pencil_keys(obj)
    if keys is None:
        raise InputError("a pencil needs keys 'a0' and 'a1'")
    return LinearPencil(matrix_from_json(obj[keys[0]], "a0"), matrix_from_json(obj[keys[1]], "a1"))


def poly_to_json(pp: PolynomialPencil) -> dict:
    return {"coeffs": [matrix_to_json(c) for c in pp.coeffs]}


def poly_from_json(obj) -> PolynomialPencil:
    if isinstance(obj, dict) and "coeffs" in obj and isinstance(obj["coeffs"], list):
        return PolynomialPencil(tuple(matrix_from_json(c, f"A{i}")
                                      for i, c in enumerate(obj["coeffs"])))
    if _pencil_keys(obj) is not None:
        return PolynomialPencil.from_linear(pencil_from_json(obj))
    raise InputError("a polynomial pencil needs a 'coeffs' list")


def annulus_to_json(a: Annulus) -> dict:
    return {"s": float(a.s), "r": radius_to_json(a.r)}


def series_to_json(s: LaurentSeries) -> dict:
    return {"center": complex_to_json(s.center), "annulus": annulus_to_json(s.annulus),
            "neg": [matrix_to_json(m) for m in s.neg],
            "nonneg": [matrix_to_json(m) for m in s.nonneg]}


def series_from_json(obj) -> LaurentSeries:
    try:
        ann = obj.get("annulus", {"s": 0.0, "r": "inf"})
        annulus = Annulus(float(ann["s"]), radius_from_json(ann["r"]))
        return LaurentSeries(neg=[matrix_from_json(m, "neg") for m in obj["neg"]],
                             nonneg=[matrix_from_json(m, "nonneg") for m in obj["nonneg"]],
                             annulus=annulus,
                             center=complex_from_json(obj.get("center", 0.0), "center"))
    except (KeyError, TypeError, AttributeError) as exc:
        raise InputError(f"malformed series: {exc}") from exc


def _plain(x: Any):
    """Make diagnostics JSON-safe."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return matrix_to_json(x) if x.ndim == 2 else [_plain(v) for v in x.tolist()]
    if isinstance(x, (complex, np.complexfloating)):
        return complex_to_json(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def pole_solution_to_json(ps: PoleSolution) -> dict:
    return {"center": complex_to_json(ps.center), "order": ps.order,
            "coeffs": [matrix_to_json(c) for c in ps.coeffs],
            "diagnostics": _plain(ps.diagnostics)}


def pole_solution_from_json(obj) -> PoleSolution:
    try:
        return PoleSolution(order=int(obj["order"]),
                            coeffs=tuple(matrix_from_json(c, "coeff") for c in obj["coeffs"]),
                            center=complex_from_json(obj.get("center", 0.0), "center"),
                            diagnostics=dict(obj.get("diagnostics", {})))
    except (KeyError, TypeError, AttributeError) as exc:
        raise InputError(f"malformed pole solution: {exc}") from exc


def singularity_set_to_json(ss) -> dict:
    return {
        "points": [{"z": complex_to_json(pt.z), "order": pt.order,
                    "residue": matrix_to_json(pt.residue),
                    "coeffs": [matrix_to_json(c) for c in pt.coeffs],
                    "P": matrix_to_json(pt.p), "Q": matrix_to_json(pt.q)}
                   for pt in ss.points],
        "P_inf": matrix_to_json(ss.p_inf), "Q_inf": matrix_to_json(ss.q_inf),
        "entire": [matrix_to_json(e) for e in ss.entire_part],
        "diagnostics": _plain(ss.diagnostics),
    }


def plain(x):
    return _plain(x)


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
