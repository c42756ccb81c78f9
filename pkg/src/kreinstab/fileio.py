"""JSON and CSV formats for specs, reports and configs."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import InvalidSpecError
from .nambu import QBHSpec

__all__ = [
    "fmt",
    "write_csv",
    "encode_matrix",
    "decode_matrix",
    "qbh_to_json",
    "qbh_from_json",
    "bbt_to_json",
    "bbt_from_json",
    "load_json",
    "load_config",
    "spectrum_csv",
    "krein_csv",
]

SPECTRUM_COLUMNS = ["eigen_index", "re_omega", "im_omega", "is_real", "quartet_id", "algebraic_mult", "geometric_mult"]
KREIN_COLUMNS = ["eigen_index", "re_omega", "im_omega", "signature", "definiteness", "collision_flag", "kpr"]
CONFIG_KEYS = {"command", "model", "params", "grid", "tolerances", "out", "options"}


def fmt(x) -> str:
    """17 significant digits for floats; -0.0 prints as 0."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0.0:
            return "0"
        return format(x, ".17g")
    return str(x)


def write_csv(path_or_buf, header, rows) -> str:
    """Write rows with fixed formatting.  Returns the CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    text = buf.getvalue()
    if path_or_buf is not None:
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            Path(path_or_buf).write_text(text)
    return text


def encode_matrix(M) -> list:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in M]


def _entry(x):
    if isinstance(x, dict):
        try:
            return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
        except (TypeError, ValueError):
            raise InvalidSpecError(f"bad complex entry {x!r}") from None
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise InvalidSpecError(f"bad complex entry {x!r}; use {{\"re\": ..., \"im\": ...}}")


def decode_matrix(rows, shape=None) -> np.ndarray:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InvalidSpecError("matrix must be a list of rows")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise InvalidSpecError("ragged matrix rows")
    M = np.array([[_entry(x) for x in r] for r in rows], dtype=complex)
    if shape is not None and M.shape != tuple(shape):
        raise InvalidSpecError(f"matrix shape {M.shape} differs from expected {tuple(shape)}")
    return M


def qbh_to_json(spec: QBHSpec) -> dict:
    return {"N": spec.N, "K": encode_matrix(spec.K), "Delta": encode_matrix(spec.Delta)}


def qbh_from_json(d: dict) -> QBHSpec:
    for key in ("N", "K", "Delta"):
        if key not in d:
            raise InvalidSpecError(f"QBHSpec JSON is missing {key!r}")
    N = d["N"]
    if not isinstance(N, int) or N < 1:
        raise InvalidSpecError("N must be a positive integer")
    return QBHSpec(decode_matrix(d["K"], (N, N)), decode_matrix(d["Delta"], (N, N)))


def bbt_to_json(spec) -> dict:
    return {
        "N": spec.N,
        "R": spec.R,
        "g": {str(r): encode_matrix(b) for r, b in sorted(spec.g.items())},
        "V": [
            {"row_site": i, "col_site": j, "block": encode_matrix(b)}
            for (i, j), b in sorted(spec.corners.items())
        ],
    }


def bbt_from_json(d: dict, structure: str = "bosonic"):
    from .gbt import BBTSpec

    for key in ("N", "R", "g"):
        if key not in d:
            raise InvalidSpecError(f"BBTSpec JSON is missing {key!r}")
    try:
        g = {int(k): decode_matrix(v, (2, 2)) for k, v in d["g"].items()}
    except ValueError:
        raise InvalidSpecError("g keys must be integers written as strings") from None
    corners = {}
    for e in d.get("V", []):
        try:
            key = (int(e["row_site"]), int(e["col_site"]))
        except (KeyError, TypeError, ValueError):
            raise InvalidSpecError("each V entry needs integer row_site and col_site") from None
        corners[key] = corners.get(key, 0) + decode_matrix(e["block"], (2, 2))
    return BBTSpec(int(d["N"]), int(d["R"]), g, corners, structure=structure)


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidSpecError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidSpecError(f"{path} is not valid JSON: {exc}") from None


def load_config(path) -> dict:
    cfg = load_json(path)
    if not isinstance(cfg, dict):
        raise InvalidSpecError("config must be a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise InvalidSpecError(f"unknown config keys {sorted(unknown)}; allowed {sorted(CONFIG_KEYS)}")
    if "params" in cfg and not isinstance(cfg["params"], dict):
        raise InvalidSpecError("config 'params' must be an object")
    if "grid" in cfg and not isinstance(cfg["grid"], dict):
        raise InvalidSpecError("config 'grid' must be an object of axes")
    return cfg


def spectrum_csv(report, path=None) -> str:
    return write_csv(path, SPECTRUM_COLUMNS, ([r[c] for c in SPECTRUM_COLUMNS] for r in report.rows()))


def krein_csv(rows, path=None) -> str:
    dicts = [r.as_dict() if hasattr(r, "as_dict") else r for r in rows]
    return write_csv(path, KREIN_COLUMNS, ([d[c] for c in KREIN_COLUMNS] for d in dicts))
