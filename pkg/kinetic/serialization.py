# kinetic/serialization.py
# Formatos de intercambio: JSON para jerarquías, estados Dirac y funcionales; CSV para
# grillas, trayectorias y tablas. Los racionales viajan como texto "p/q".
from __future__ import annotations

import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np

from kinetic.errors import ConfigError
from kinetic.functionals import Constant, Expectation, Functional, Product, Sum, TensorExpectation
from kinetic.hierarchy import ObservableHierarchy
from kinetic.observables import Configuration, PhasePoint, Polynomial, Scalar
from kinetic.polyparse import format_polynomial, parse_observable
from kinetic.states import DiracState, GridState1D

SCHEMA_VERSION = "1.0"


# ---------- escalares ----------

def scalar_out(c: Scalar) -> Union[str, float, int]:
    if isinstance(c, Fraction):
        return str(c) if c.denominator != 1 else int(c.numerator)
    if isinstance(c, (int, np.integer)):
        return int(c)
    return float(c)


def scalar_in(raw: Any) -> Scalar:
    if isinstance(raw, bool):
        raise ConfigError("se esperaba un número")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"número inválido {raw!r}")
    raise ConfigError(f"se esperaba un número y llegó {type(raw).__name__}")


# ---------- jerarquías ----------

def hierarchy_to_dict(F: ObservableHierarchy) -> Dict[str, Any]:
    return {
        "d": F.d,
        "max_level": F.max_level,
        "levels": {str(k): format_polynomial(f) for k, f in F.items()},
    }


def hierarchy_from_dict(data: Mapping[str, Any]) -> ObservableHierarchy:
    try:
        d = int(data["d"])
        levels = {int(k): parse_observable(text, int(k), d) for k, text in data.get("levels", {}).items()}
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"jerarquía mal formada: {e}")
    return ObservableHierarchy(d, levels, data.get("max_level"))


# ---------- configuraciones y estados Dirac ----------

def _point_to_dict(p: PhasePoint) -> Dict[str, Any]:
    return {"x": [scalar_out(c) for c in p.x], "v": [scalar_out(c) for c in p.v]}


def configuration_to_dict(z: Configuration) -> Dict[str, Any]:
    return {"N": z.n, "d": z.d, "points": [_point_to_dict(p) for p in z.points]}


def _point_from_dict(p: Mapping[str, Any]) -> PhasePoint:
    return PhasePoint(tuple(scalar_in(c) for c in p["x"]), tuple(scalar_in(c) for c in p["v"]))


def configuration_from_dict(data: Mapping[str, Any]) -> Configuration:
    try:
        return Configuration.from_pairs([(p.x, p.v) for p in map(_point_from_dict, data["points"])])
    except (KeyError, TypeError) as e:
        raise ConfigError(f"configuración mal formada: {e}")


def dirac_to_dict(gamma: DiracState) -> Dict[str, Any]:
    return {
        "k": gamma.k,
        "d": gamma.d,
        "atoms": [
            {"weight": scalar_out(a.weight), "points": [_point_to_dict(p) for p in a.points]}
            for a in gamma.atoms
        ],
    }


def dirac_from_dict(data: Mapping[str, Any]) -> DiracState:
    try:
        atoms = []
        for atom in data["atoms"]:
            pts = [_point_from_dict(p) for p in atom["points"]]
            atoms.append((scalar_in(atom["weight"]), pts))
        return DiracState(int(data["k"]), int(data["d"]), atoms)
    except (KeyError, TypeError) as e:
        raise ConfigError(f"estado Dirac mal formado: {e}")


# ---------- funcionales ----------

def functional_to_dict(F: Functional) -> Dict[str, Any]:
    if isinstance(F, Constant):
        return {"type": "constant", "value": scalar_out(F.value)}
    if isinstance(F, Expectation):
        return {"type": "expectation", "hierarchy": hierarchy_to_dict(F.generator)}
    if isinstance(F, TensorExpectation):
        return {"type": "tensor_expectation", "k": F.k, "d": F.f.d, "observable": format_polynomial(F.f)}
    if isinstance(F, Sum):
        return {"type": "sum", "terms": [functional_to_dict(t) for t in F.terms]}
    if isinstance(F, Product):
        return {"type": "product", "factors": [functional_to_dict(f) for f in F.factors]}
    raise ConfigError(f"funcional no serializable: {type(F).__name__}")


def functional_from_dict(data: Mapping[str, Any]) -> Functional:
    kind = data.get("type")
    if kind == "constant":
        return Constant(scalar_in(data["value"]))
    if kind == "expectation":
        return Expectation(hierarchy_from_dict(data["hierarchy"]))
    if kind == "tensor_expectation":
        return TensorExpectation(parse_observable(data["observable"], int(data["k"]), int(data["d"])))
    if kind == "sum":
        return Sum([functional_from_dict(t) for t in data["terms"]])
    if kind == "product":
        return Product([functional_from_dict(f) for f in data["factors"]])
    raise ConfigError(f"tipo de funcional desconocido {kind!r}")


def functional_to_text(F: Functional) -> str:
    """Árbol JSON en una sola línea (celdas de CSV)."""
    return json.dumps(functional_to_dict(F), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# ---------- JSON ----------

def _default(o: Any) -> Any:
    if isinstance(o, Fraction):
        return scalar_out(o)
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Polynomial):
        return format_polynomial(o)
    raise TypeError(f"no serializable: {type(o).__name__}")


def dumps(obj: Any) -> str:
    """JSON estable: claves ordenadas, floats con repr."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_default, ensure_ascii=False) + "\n"


def write_text(path: Optional[Union[str, Path]], text: str) -> None:
    """Escribe en path (creando directorios) o, sin path, a stdout."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")


# ---------- CSV ----------

def _fmt(x: Any) -> str:
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, Fraction):
        return str(x)
    return str(x)


def table_to_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def grid_to_csv(grid: GridState1D) -> str:
    """Primera fila L,V,Nx,Nv; luego Nx filas de Nv valores (orden por filas)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["L", "V", "Nx", "Nv"])
    w.writerow([repr(grid.L), repr(grid.V), grid.Nx, grid.Nv])
    for row in grid.values:
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def grid_from_csv(text: str) -> GridState1D:
    rows = list(csv.reader(io.StringIO(text)))
    try:
        if rows[0] != ["L", "V", "Nx", "Nv"]:
            raise ConfigError("encabezado de grilla inválido")
        L, V = float(rows[1][0]), float(rows[1][1])
        Nx, Nv = int(rows[1][2]), int(rows[1][3])
        values = np.array([[float(x) for x in r] for r in rows[2:2 + Nx]])
    except (IndexError, ValueError) as e:
        raise ConfigError(f"grilla CSV mal formada: {e}")
    if values.shape != (Nx, Nv):
        raise ConfigError(f"la grilla trae forma {values.shape}, se esperaba ({Nx}, {Nv})")
    return GridState1D(L, V, values)


def trajectory_to_csv(traj) -> str:
    """Columnas t, particle, x_1..x_d, v_1..v_d."""
    d = traj.x.shape[2]
    cols = ["t", "particle"] + [f"x_{c}" for c in range(1, d + 1)] + [f"v_{c}" for c in range(1, d + 1)]
    rows: List[List[Any]] = []
    for n, t in enumerate(traj.times):
        for i in range(traj.n_particles):
            rows.append([float(t), i + 1] + [float(c) for c in traj.x[n, i]] + [float(c) for c in traj.v[n, i]])
    return table_to_csv(cols, rows)
