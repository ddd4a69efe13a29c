"""Job configuration: unit-tagged JSON, canonical form and cache keys.

Dimensioned values are written as ``{"value": 100, "unit": "nm"}``; a bare
number is taken to be in SI units.  :func:`canonicalize` fills defaults,
converts every quantity to SI and tags it with the SI unit, so that two
configs describing the same job serialize to the same bytes.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from typing import Any, Mapping

from scipy.constants import torr

from .errors import ConfigurationError
from .quadrature import QuadConfig

__all__ = ["JOB_KINDS", "UNITS", "cache_key", "canonical_json", "canonicalize", "load_config", "quantity"]

JOB_KINDS = ("spectrum", "totals", "sweep", "dispersion", "dynamics", "materials", "fresnel")

# dimension -> (SI unit, {unit: factor to SI})
UNITS = {
    "length": ("m", {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9}),
    "temperature": ("K", {"K": 1.0}),
    "frequency": ("rad/s", {"rad/s": 1.0, "Trad/s": 1e12}),
    "field": ("T", {"T": 1.0, "mT": 1e-3, "G": 1e-4}),
    "pressure": ("Pa", {"Pa": 1.0, "torr": torr, "mbar": 100.0}),
    "time": ("s", {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}),
    "torque": ("N m", {"N m": 1.0, "N*m": 1.0}),
    "wavevector": ("1/m", {"1/m": 1.0, "1/um": 1e6, "1/nm": 1e9}),
    "angle": ("rad", {"rad": 1.0, "deg": math.pi / 180}),
    "mass": ("kg", {"kg": 1.0}),
}

_COMPONENTS = ("P", "Fx", "Fy", "Fz", "Mx", "My", "Mz")

_TOP_KEYS = {
    "job",
    "material_db",
    "substrate",
    "particle",
    "model",
    "geometry",
    "thermal",
    "field",
    "quadrature",
    "params",
    "seed",
}


def quantity(value, dimension: str, path: str) -> float:
    """Convert a bare SI number or a ``{"value", "unit"}`` object to SI."""
    si, table = UNITS[dimension]
    if isinstance(value, Mapping):
        extra = set(value) - {"value", "unit"}
        if extra or "value" not in value:
            raise ConfigurationError('expected {"value": number, "unit": str}', path)
        unit = value.get("unit", si)
        if unit not in table:
            raise ConfigurationError(f"unknown {dimension} unit {unit!r}; known: {sorted(table)}", path)
        factor, value = table[unit], value["value"]
    else:
        factor = 1.0
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigurationError(f"expected a finite number, got {value!r}", path)
    return float(value) * factor


def _tag(x, dimension):
    # 15 significant digits absorb unit-conversion roundoff (100 nm == 1e-7 m)
    return {"value": float(f"{float(x):.15g}"), "unit": UNITS[dimension][0]}


def _grid(entry, dimension, path, *, positive=True):
    """``{"start", "stop", "num", "spacing"}`` or an explicit list -> canonical list form."""
    if isinstance(entry, list):
        vals = [quantity(v, dimension, f"{path}[{i}]") for i, v in enumerate(entry)]
    elif isinstance(entry, Mapping):
        extra = set(entry) - {"start", "stop", "num", "spacing"}
        if extra:
            raise ConfigurationError(f"unknown keys {sorted(extra)}", path)
        try:
            start = quantity(entry["start"], dimension, f"{path}.start")
            stop = quantity(entry["stop"], dimension, f"{path}.stop")
            num = entry["num"]
        except KeyError as exc:
            raise ConfigurationError("missing key", f"{path}.{exc.args[0]}") from None
        if not isinstance(num, int) or isinstance(num, bool) or num < 1:
            raise ConfigurationError("must be a positive integer", f"{path}.num")
        spacing = entry.get("spacing", "log")
        if spacing not in ("log", "linear"):
            raise ConfigurationError("must be 'log' or 'linear'", f"{path}.spacing")
        if spacing == "log" and (start <= 0 or stop <= 0):
            raise ConfigurationError("log spacing needs positive limits", path)
        if num == 1:
            vals = [start]
        elif spacing == "log":
            r = (stop / start) ** (1.0 / (num - 1))
            vals = [start * r**i for i in range(num - 1)] + [stop]
        else:
            vals = [start + (stop - start) * i / (num - 1) for i in range(num)]
    else:
        raise ConfigurationError("expected a list of values or a start/stop/num object", path)
    if not vals:
        raise ConfigurationError("must not be empty", path)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigurationError("must be strictly increasing", path)
    if positive and vals[0] <= 0:
        raise ConfigurationError("values must be > 0", path)
    return [_tag(v, dimension) for v in vals]


def _named(entry, path):
    if isinstance(entry, str):
        return {"name": entry, "override": {}}
    if isinstance(entry, Mapping):
        extra = set(entry) - {"name", "override"}
        if extra or not isinstance(entry.get("name"), str):
            raise ConfigurationError('expected a name or {"name": str, "override": {...}}', path)
        override = entry.get("override", {})
        if not isinstance(override, Mapping):
            raise ConfigurationError("expected an object", f"{path}.override")
        return {"name": entry["name"], "override": copy.deepcopy(dict(override))}
    raise ConfigurationError("expected a material name or object", path)


def _bool(entry, key, default, path):
    v = entry.get(key, default)
    if not isinstance(v, bool):
        raise ConfigurationError("expected true/false", f"{path}.{key}")
    return v


def _int(entry, key, default, path, minimum=0):
    v = entry.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigurationError(f"expected an integer >= {minimum}", f"{path}.{key}")
    return v


def _check_keys(entry, allowed, path):
    extra = set(entry) - set(allowed)
    if extra:
        raise ConfigurationError(f"unknown keys {sorted(extra)}", path)


_DEFAULT_WINDOW = [_tag(1e10, "frequency"), _tag(6e14, "frequency")]


def _window(entry, path):
    if entry is None:
        return copy.deepcopy(_DEFAULT_WINDOW)
    if not isinstance(entry, list) or len(entry) != 2:
        raise ConfigurationError("expected [low, high]", path)
    lo, hi = (quantity(v, "frequency", f"{path}[{i}]") for i, v in enumerate(entry))
    if not 0 < lo < hi:
        raise ConfigurationError("need 0 < low < high", path)
    return [_tag(lo, "frequency"), _tag(hi, "frequency")]


def _gas(entry, path):
    from .dynamics import DEFAULT_GAS_MASS

    if not isinstance(entry, Mapping):
        raise ConfigurationError("expected an object", path)
    _check_keys(entry, {"pressure", "gas_mass", "temperature"}, path)
    if "pressure" not in entry:
        raise ConfigurationError("missing key", f"{path}.pressure")
    p = quantity(entry["pressure"], "pressure", f"{path}.pressure")
    if p < 0:
        raise ConfigurationError("must be >= 0", f"{path}.pressure")
    return {
        "pressure": _tag(p, "pressure"),
        "gas_mass": _tag(quantity(entry.get("gas_mass", DEFAULT_GAS_MASS), "mass", f"{path}.gas_mass"), "mass"),
        "temperature": _tag(quantity(entry.get("temperature", 300.0), "temperature", f"{path}.temperature"), "temperature"),
    }


def _params(kind, entry, path="params"):
    if not isinstance(entry, Mapping):
        raise ConfigurationError("expected an object", path)
    out: dict[str, Any] = {}
    if kind == "spectrum":
        _check_keys(entry, {"omega", "zero_point_fz", "figures", "models"}, path)
        out["omega"] = _grid(entry.get("omega", {"start": 1e13, "stop": 1e14, "num": 40}), "frequency", f"{path}.omega")
        out["zero_point_fz"] = _bool(entry, "zero_point_fz", False, path)
        out["figures"] = _str_list(entry.get("figures", []), f"{path}.figures")
        out["models"] = _models(entry.get("models"), path)
    elif kind == "totals":
        _check_keys(entry, {"omega_window", "zero_point_fz", "Omega", "components"}, path)
        out["omega_window"] = _window(entry.get("omega_window"), f"{path}.omega_window")
        out["zero_point_fz"] = _bool(entry, "zero_point_fz", False, path)
        out["components"] = _components(entry, path)
        if entry.get("Omega") is not None:
            out["Omega"] = _grid(entry["Omega"] if isinstance(entry["Omega"], list) else [entry["Omega"]], "frequency", f"{path}.Omega", positive=False)
    elif kind == "sweep":
        _check_keys(entry, {"axis", "values", "particles", "T_p", "omega_window", "gas", "figures", "components"}, path)
        out["components"] = _components(entry, path)
        axis = entry.get("axis", "d_s")
        dims = {"d_s": "length", "T_p": "temperature", "B": "field"}
        if axis not in dims:
            raise ConfigurationError(f"must be one of {sorted(dims)}", f"{path}.axis")
        out["axis"] = axis
        if "values" not in entry:
            raise ConfigurationError("missing key", f"{path}.values")
        out["values"] = _grid(entry["values"], dims[axis], f"{path}.values", positive=axis != "B")
        out["particles"] = _str_list(entry.get("particles", []), f"{path}.particles")
        out["T_p"] = [_tag(quantity(v, "temperature", f"{path}.T_p[{i}]"), "temperature") for i, v in enumerate(entry.get("T_p", []))]
        out["omega_window"] = _window(entry.get("omega_window"), f"{path}.omega_window")
        out["gas"] = _gas(entry["gas"], f"{path}.gas") if entry.get("gas") is not None else None
        out["figures"] = _str_list(entry.get("figures", []), f"{path}.figures")
    elif kind == "dispersion":
        _check_keys(entry, {"phi", "k_range", "models", "branch", "include_zero_field", "figures"}, path)
        phis = entry.get("phi", [math.pi / 2, 3 * math.pi / 2])
        out["phi"] = [_tag(quantity(v, "angle", f"{path}.phi[{i}]"), "angle") for i, v in enumerate(phis)]
        out["k_range"] = _grid(entry.get("k_range", {"start": 1e6, "stop": 3e7, "num": 30}), "wavevector", f"{path}.k_range")
        out["models"] = _models(entry.get("models", ["local", "nonlocal"]), path)
        branch = entry.get("branch", "SPP")
        if branch not in ("SPP", "SPhP"):
            raise ConfigurationError("must be SPP or SPhP", f"{path}.branch")
        out["branch"] = branch
        out["include_zero_field"] = _bool(entry, "include_zero_field", True, path)
        out["figures"] = _str_list(entry.get("figures", []), f"{path}.figures")
    elif kind == "dynamics":
        _check_keys(entry, {"gas", "torque", "dt", "steps", "n_trajectories", "record_every", "burn_in", "omega_window", "Omega_grid", "keep_trajectories"}, path)
        out["gas"] = _gas(entry.get("gas", {"pressure": {"value": 1e-5, "unit": "torr"}}), f"{path}.gas")
        torque = entry.get("torque", 0.0)
        out["torque"] = "totals" if torque == "totals" else _tag(quantity(torque, "torque", f"{path}.torque"), "torque")
        out["dt"] = None if entry.get("dt") is None else _tag(quantity(entry["dt"], "time", f"{path}.dt"), "time")
        out["steps"] = _int(entry, "steps", 2000, path, 1)
        out["n_trajectories"] = _int(entry, "n_trajectories", 1000, path, 1)
        out["record_every"] = _int(entry, "record_every", 0, path, 0)
        out["burn_in"] = entry.get("burn_in")
        if out["burn_in"] is not None:
            out["burn_in"] = _int(entry, "burn_in", 0, path, 0)
        out["keep_trajectories"] = _int(entry, "keep_trajectories", 10, path, 0)
        out["omega_window"] = _window(entry.get("omega_window"), f"{path}.omega_window")
        out["Omega_grid"] = (
            _grid(entry["Omega_grid"], "frequency", f"{path}.Omega_grid", positive=False) if entry.get("Omega_grid") else None
        )
    elif kind == "fresnel":
        _check_keys(entry, {"omega", "k_par", "phi"}, path)
        out["omega"] = _grid(entry.get("omega", {"start": 2e13, "stop": 5e13, "num": 4}), "frequency", f"{path}.omega")
        out["k_par"] = _grid(entry.get("k_par", {"start": 1e5, "stop": 1e7, "num": 5}), "wavevector", f"{path}.k_par")
        out["phi"] = [_tag(quantity(v, "angle", f"{path}.phi[{i}]"), "angle") for i, v in enumerate(entry.get("phi", [0.0, math.pi / 2]))]
    elif kind == "materials":
        _check_keys(entry, set(), path)
    return out


def _components(entry, path):
    names = _str_list(entry.get("components", list(_COMPONENTS)), f"{path}.components")
    for i, name in enumerate(names):
        if name not in _COMPONENTS:
            raise ConfigurationError(f"must be one of {list(_COMPONENTS)}", f"{path}.components[{i}]")
    # canonical order, no duplicates
    return [n for n in _COMPONENTS if n in names]


def _models(entry, path):
    if entry is None:
        return None
    models = _str_list(entry, f"{path}.models")
    for m in models:
        if m not in ("local", "nonlocal"):
            raise ConfigurationError("models must be 'local' or 'nonlocal'", f"{path}.models")
    return models


def _str_list(entry, path):
    if not isinstance(entry, list) or not all(isinstance(x, str) for x in entry):
        raise ConfigurationError("expected a list of strings", path)
    return list(entry)


def canonicalize(config: Mapping) -> dict:
    """Validate ``config`` and return its canonical SI form with defaults filled."""
    if not isinstance(config, Mapping):
        raise ConfigurationError("top level must be an object", "config")
    _check_keys(config, _TOP_KEYS, "config")
    kind = config.get("job")
    if kind not in JOB_KINDS:
        raise ConfigurationError(f"must be one of {list(JOB_KINDS)}", "job")
    out: dict[str, Any] = {"job": kind}
    if config.get("material_db") is not None:
        if not isinstance(config["material_db"], str):
            raise ConfigurationError("expected a path", "material_db")
        out["material_db"] = config["material_db"]
    out["substrate"] = _named(config.get("substrate", "InSb-n-doped"), "substrate")
    out["particle"] = _named(config.get("particle", "NaCl"), "particle")
    model = config.get("model", "nonlocal")
    if model not in ("local", "nonlocal"):
        raise ConfigurationError("must be 'local' or 'nonlocal'", "model")
    out["model"] = model

    geom = config.get("geometry", {"d_s": {"value": 100, "unit": "nm"}})
    if not isinstance(geom, Mapping) or len(geom) != 1 or next(iter(geom)) not in ("d", "d_s"):
        raise ConfigurationError('exactly one of "d" or "d_s" is required', "geometry")
    key, val = next(iter(geom.items()))
    length = quantity(val, "length", f"geometry.{key}")
    if length <= 0:
        raise ConfigurationError("must be > 0", f"geometry.{key}")
    out["geometry"] = {key: _tag(length, "length")}

    thermal = config.get("thermal", {})
    if not isinstance(thermal, Mapping):
        raise ConfigurationError("expected an object", "thermal")
    _check_keys(thermal, {"T_p", "T_e"}, "thermal")
    out["thermal"] = {}
    for name, default in (("T_p", 310.0), ("T_e", 300.0)):
        t = quantity(thermal.get(name, default), "temperature", f"thermal.{name}")
        if t < 0:
            raise ConfigurationError("must be >= 0", f"thermal.{name}")
        out["thermal"][name] = _tag(t, "temperature")

    fld = config.get("field", {"magnitude": 1.0, "direction": [1.0, 0.0, 0.0]})
    if not isinstance(fld, Mapping):
        raise ConfigurationError("expected an object", "field")
    _check_keys(fld, {"magnitude", "direction"}, "field")
    mag = quantity(fld.get("magnitude", 0.0), "field", "field.magnitude")
    direction = fld.get("direction", [1.0, 0.0, 0.0])
    if not isinstance(direction, list) or len(direction) != 3:
        raise ConfigurationError("expected a 3-vector", "field.direction")
    for i, x in enumerate(direction):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ConfigurationError("expected a finite number", f"field.direction[{i}]")
    direction = [float(x) for x in direction]
    norm = math.sqrt(sum(x * x for x in direction))
    if norm == 0:
        raise ConfigurationError("must be nonzero", "field.direction")
    out["field"] = {"magnitude": _tag(mag, "field"), "direction": [x / norm for x in direction]}

    quad = config.get("quadrature", {})
    if not isinstance(quad, Mapping):
        raise ConfigurationError("expected an object", "quadrature")
    default_tol = {"rel_tol": 1e-4} if kind in ("totals", "sweep", "dynamics") else {}
    out["quadrature"] = QuadConfig.from_dict({**default_tol, **quad}).to_dict()

    out["params"] = _params(kind, config.get("params", {}))
    seed = config.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigurationError("expected a nonnegative integer", "seed")
    out["seed"] = seed
    return out


def canonical_json(config: Mapping) -> str:
    """Deterministic serialization (sorted keys, no whitespace, shortest float repr)."""
    return json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def cache_key(config: Mapping, version: str) -> str:
    """SHA-256 of the canonical config and the code version tag (hex)."""
    payload = canonical_json(canonicalize(config)) + "\n" + version
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc}", str(path)) from exc
