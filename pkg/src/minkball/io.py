"""JSON/CSV file formats and atomic writes for the command line.

Bodies are ``{"grid_n": n, "support": [...]}`` or ``{"vertices": [[x, y], ...]}``
(sampled on the grid given by the caller); measures are
``{"grid_n": n, "weights": [...]}``.  JSON floats use Python's shortest
round-trip representation; CSV cells use 17 significant digits.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .measures import GridMeasure
from .support_core import DirectionGrid, GeometryError, SupportVector, make_grid, support_of_polygon

DEFAULT_GRID_N = 360
GRID_ENV = "MINKBALL_GRID_N"


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def default_grid_n() -> int:
    raw = os.environ.get(GRID_ENV)
    if raw is None or raw == "":
        return DEFAULT_GRID_N
    try:
        n = int(raw)
    except ValueError as exc:
        raise InputError(f"{GRID_ENV} must be an integer, got {raw!r}") from exc
    return n


def grid_of(n: int) -> DirectionGrid:
    try:
        return make_grid(int(n))
    except (GeometryError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=1, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        if not np.isfinite(value):
            raise InputError("refusing to serialize a non-finite number")
        return value
    return obj


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    return data


def body_from_dict(data: dict, grid_n: int | None = None) -> SupportVector:
    if "support" in data:
        n = data.get("grid_n", grid_n)
        values = data["support"]
        if n is None:
            n = len(values)
        if len(values) != int(n):
            raise InputError(f"support has {len(values)} values but grid_n is {n}")
        try:
            return SupportVector(grid_of(n), np.asarray(values, dtype=float))
        except (GeometryError, ValueError, TypeError) as exc:
            raise InputError(str(exc)) from exc
    if "vertices" in data:
        n = data.get("grid_n", grid_n if grid_n is not None else default_grid_n())
        try:
            verts = np.asarray(data["vertices"], dtype=float).reshape(-1, 2)
            return support_of_polygon(verts, grid_of(n))
        except (GeometryError, ValueError, TypeError) as exc:
            raise InputError(f"bad vertices: {exc}") from exc
    raise InputError("body needs either 'support' or 'vertices'")


def load_body(path, grid_n: int | None = None) -> SupportVector:
    return body_from_dict(read_json(path), grid_n)


def body_to_dict(h: SupportVector) -> dict:
    return {"grid_n": h.n, "support": h.values}


def measure_from_dict(data: dict) -> GridMeasure:
    if "weights" not in data:
        raise InputError("measure needs 'weights'")
    w = data["weights"]
    n = data.get("grid_n", len(w))
    if len(w) != int(n):
        raise InputError(f"measure has {len(w)} weights but grid_n is {n}")
    try:
        return GridMeasure(grid_of(n), np.asarray(w, dtype=float))
    except (GeometryError, ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc


def load_measure(path) -> GridMeasure:
    return measure_from_dict(read_json(path))


def measure_to_dict(w: GridMeasure) -> dict:
    return {"grid_n": w.n, "weights": w.weights}


PROBLEMS = ("iso", "urysohn-int", "urysohn-ext", "urysohn-ext-flat")


def load_problem(path) -> dict:
    """Problem spec with ``x0``/``bodies`` resolved to support vectors on one grid."""
    data = read_json(path)
    kind = data.get("problem")
    if kind not in PROBLEMS:
        raise InputError(f"unknown problem {kind!r}; expected one of {', '.join(PROBLEMS)}")
    n = int(data.get("grid_n", default_grid_n()))
    base = Path(path).parent
    out = dict(data)
    out["grid_n"] = n

    def resolve(entry):
        if isinstance(entry, str):
            p = Path(entry)
            return load_body(p if p.is_absolute() else base / p, n)
        if isinstance(entry, dict):
            return body_from_dict(entry, n)
        raise InputError("body entries must be a file name or an inline body object")

    if kind == "iso":
        bodies = data.get("bodies")
        if not bodies:
            raise InputError("iso problem needs a non-empty 'bodies' list")
        out["bodies"] = [resolve(b) for b in bodies]
        lam = data.get("lambda", [1.0] * len(bodies))
        if len(lam) != len(bodies):
            raise InputError("'lambda' needs one weight per body")
        out["lambda"] = [float(v) for v in lam]
        if "volume" not in data:
            raise InputError("iso problem needs 'volume'")
        out["volume"] = float(data["volume"])
    else:
        if "x0" not in data:
            raise InputError(f"{kind} problem needs 'x0'")
        out["x0"] = resolve(data["x0"])
        if "breadth" not in data:
            raise InputError(f"{kind} problem needs 'breadth'")
        out["breadth"] = float(data["breadth"])
        if kind in ("urysohn-int", "urysohn-ext-flat"):
            for key in ("z_index", "beta_cap"):
                if key not in data:
                    raise InputError(f"{kind} problem needs {key!r}")
            out["z_index"] = int(data["z_index"])
            out["beta_cap"] = float(data["beta_cap"])
    for b in ([out["x0"]] if "x0" in out else out.get("bodies", [])):
        if b.n != n:
            raise InputError("all bodies must live on the problem grid")
    return out


def frontier_csv(rows) -> str:
    """CSV with header ``cap,volume,breadth_z,alpha,beta,residual``; 17 significant digits."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cap", "volume", "breadth_z", "alpha", "beta", "residual"])
    for row in rows:
        writer.writerow([f"{float(v):.17g}" for v in row])
    return buf.getvalue()
