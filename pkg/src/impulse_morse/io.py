"""Problem files (TOML), run reports (JSON) and sample tables (CSV)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .mesh import MeshError, build_mesh
from .nonlinearity import CATALOG
from .problem import ProblemSpec, make_problem
from .shooting import SampledFunction
from .solver import SolverOptions


class SchemaError(ValueError):
    """Problem file does not match the schema; ``key`` names the offender."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


SCHEMA = {
    "mesh": {"points"},
    "coefficients": {"a", "b", "a_unit"},
    "nonlinearity": {"g", "g_params", "h"},
    "solver": {"modes", "quad_order", "gradient_tol", "max_iters", "radii", "seed",
               "refine_modes", "integrator_tol", "trust_radius", "dedup_distance",
               "directions_per_radius"},
    "certificate": {"check"},
}
REQUIRED = {"mesh": {"points"}, "coefficients": {"a", "b"}}

DEFAULT_MODES = 16


@dataclass(frozen=True)
class RunConfig:
    modes: int = DEFAULT_MODES
    quad_order: int | None = None
    check_certificate: bool = True
    options: SolverOptions = SolverOptions()


def _numbers(key, value, length=None):
    if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise SchemaError(key, "expected a list of numbers")
    if length is not None and len(value) != length:
        raise SchemaError(key, f"expected {length} values, got {len(value)}")
    return [float(v) for v in value]


def _number(key, value, kind=float, positive=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(key, "expected a number")
    if kind is int and not isinstance(value, int):
        raise SchemaError(key, "expected an integer")
    if positive and not value > 0:
        raise SchemaError(key, "must be positive")
    return kind(value)


def parse_problem(data: dict) -> tuple[ProblemSpec, RunConfig]:
    for section, body in data.items():
        if section not in SCHEMA:
            raise SchemaError(section, "unknown section")
        if not isinstance(body, dict):
            raise SchemaError(section, "expected a table")
        for key in body:
            if key not in SCHEMA[section]:
                raise SchemaError(f"{section}.{key}", "unknown key")
    for section, keys in REQUIRED.items():
        for key in keys:
            if key not in data.get(section, {}):
                raise SchemaError(f"{section}.{key}" if section in data else section, "missing")

    points = _numbers("points", data["mesh"]["points"])
    try:
        mesh = build_mesh(points)
    except MeshError as exc:
        raise SchemaError("points", str(exc)) from None
    m = mesh.m
    coef = data["coefficients"]
    a = _numbers("a", coef["a"], m + 1)
    b = _numbers("b", coef["b"], m)
    unit = coef.get("a_unit", "1")
    if unit not in ("1", "pi^2"):
        raise SchemaError("a_unit", 'expected "1" or "pi^2"')
    if unit == "pi^2":
        a = [v * math.pi**2 for v in a]

    nl = data.get("nonlinearity", {})
    g = nl.get("g", "none")
    if not isinstance(g, str):
        raise SchemaError("g", "expected a catalog name")
    if g not in CATALOG or CATALOG[g].kind == "h":
        raise SchemaError("g", f"unknown nonlinearity {g!r}")
    h = nl.get("h", "none")
    h_list = [h] * m if isinstance(h, str) else h
    if not isinstance(h_list, list) or len(h_list) != m or not all(isinstance(v, str) for v in h_list):
        raise SchemaError("h", f"expected a catalog name or a list of {m} names")
    for name in h_list:
        if name not in CATALOG or CATALOG[name].kind == "g":
            raise SchemaError("h", f"unknown nonlinearity {name!r}")
    params = nl.get("g_params", {})
    if not isinstance(params, dict):
        raise SchemaError("g_params", "expected a table")
    for key in params:
        if key != "scale":
            raise SchemaError(f"g_params.{key}", "unknown key")
    scale = params.get("scale")
    if isinstance(scale, (int, float)) and not isinstance(scale, bool):
        scale = [float(scale)]
    elif isinstance(scale, list):
        scale = _numbers("g_params.scale", scale, m + 1)
    elif scale is not None and scale != "a":
        raise SchemaError("g_params.scale", 'expected "a", a number or a list')
    problem = make_problem(mesh, a, b, g=g, h=h_list, g_scale=scale)

    sv = data.get("solver", {})
    opts = {}
    if "gradient_tol" in sv:
        opts["gradient_tol"] = _number("gradient_tol", sv["gradient_tol"])
    if "max_iters" in sv:
        opts["max_iters"] = _number("max_iters", sv["max_iters"], int)
    if "radii" in sv:
        opts["radii"] = tuple(_numbers("radii", sv["radii"]))
        if not opts["radii"] or min(opts["radii"]) <= 0:
            raise SchemaError("radii", "must be a nonempty list of positive numbers")
    if "seed" in sv:
        opts["seed"] = _number("seed", sv["seed"], int, positive=False)
    if "refine_modes" in sv:
        opts["refine_modes"] = _number("refine_modes", sv["refine_modes"], int)
    if "integrator_tol" in sv:
        opts["integrator_tol"] = _number("integrator_tol", sv["integrator_tol"])
    if "trust_radius" in sv:
        opts["trust_radius_init"] = _number("trust_radius", sv["trust_radius"])
    if "dedup_distance" in sv:
        opts["dedup_distance"] = _number("dedup_distance", sv["dedup_distance"])
    if "directions_per_radius" in sv:
        opts["directions_per_radius"] = _number("directions_per_radius", sv["directions_per_radius"], int)
    modes = _number("modes", sv["modes"], int) if "modes" in sv else DEFAULT_MODES
    quad = _number("quad_order", sv["quad_order"], int) if "quad_order" in sv else None
    if quad is not None and quad < 2 * modes + 4:
        raise SchemaError("quad_order", f"must be at least 2 * modes + 4 = {2 * modes + 4}")
    check = data.get("certificate", {}).get("check", True)
    if not isinstance(check, bool):
        raise SchemaError("certificate.check", "expected true or false")
    return problem, RunConfig(modes, quad, check, SolverOptions(**opts))


def parse_problem_file(path) -> tuple[ProblemSpec, RunConfig]:
    """Read and validate a TOML problem file.

    Raises ``OSError`` if unreadable, ``TOMLDecodeError`` (message
    carries the line number) if malformed, :class:`SchemaError` otherwise.
    """
    text = Path(path).read_text()
    return parse_problem(tomllib.loads(text))


# ---------------------------------------------------------------------------
# JSON with 17 significant digits

def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        text = f"{x:.17g}"
        if all(ch not in text for ch in ".en"):
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


@dataclass
class RunReport:
    problem: dict
    spectral: dict
    resonance: dict
    morse: dict
    certificate: dict | None = None
    critical_points: list | None = None
    solver: dict | None = None

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        data = json.loads(text)
        return cls(**{f.name: data.get(f.name) for f in fields(cls)})


# ---------------------------------------------------------------------------
# CSV

def write_solution_csv(path, x, u) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "u"])
        for xi, ui in zip(x, u):
            w.writerow([f"{float(xi):.17g}", f"{float(ui):.17g}"])


def read_solution_csv(path) -> SampledFunction:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "u"]:
        raise SchemaError("solution", 'expected header "x,u"')
    try:
        data = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r], dtype=float)
    except (ValueError, IndexError):
        raise SchemaError("solution", "rows must hold two numbers") from None
    if data.shape[0] < 12:
        raise SchemaError("solution", "too few samples")
    return SampledFunction(data[:, 0], data[:, 1])


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["param", "det", "m0", "conclusion"])
        for param, det, m0, concl in rows:
            w.writerow([param, f"{float(det):.17g}", int(m0), concl])
