"""Batch command-line front end.

Every subcommand runs one job described by a JSON config (see
:mod:`fluxtorque.config`), writes CSV/JSON files into ``--out`` and caches
them under a SHA-256 key of the canonical config, so repeated runs are
served byte-identically from the cache.
"""

from __future__ import annotations

import argparse
import concurrent.futures as cf
import copy
import csv
import json
import logging
import math
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .config import JOB_KINDS, cache_key, canonical_json, canonicalize, load_config
from .dispersion import trace_branch
from .dynamics import (
    GasEnvironment,
    damping_coefficient,
    moment_of_inertia,
    simulate_langevin,
    steady_state_omega,
    write_summary_json,
    write_trajectories_csv,
)
from .errors import ConfigurationError, FluxTorqueError
from .fresnel import mode_coords, reflect
from .materials import (
    GyrotropicModel,
    HydrodynamicModel,
    ParticleSpec,
    default_material_db,
    dump_material_db,
    load_material_db,
    particle_from_dict,
    particle_to_dict,
    substrate_from_dict,
    substrate_to_dict,
)
from .quadrature import QuadConfig
from .spectra import COMPONENTS, SPLIT_COMPONENTS, ThermalState, integrate_totals, spectral_density, write_spectrum_csv

__all__ = ["FIGURES", "JobResult", "build_inputs", "cache_dir", "export_figure_data", "main", "run_job"]

log = logging.getLogger("fluxtorque")

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


@dataclass
class JobResult:
    """In-memory result of one job plus the files it wrote."""

    kind: str
    data: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    cached: bool = False


@dataclass(frozen=True)
class Inputs:
    substrate: Any
    particle: ParticleSpec
    thermal: ThermalState
    d: float
    quad: QuadConfig


# --- inputs -------------------------------------------------------------


def _material_db(cfg):
    return load_material_db(cfg["material_db"]) if "material_db" in cfg else default_material_db()


def _lookup(db, named, kind, section):
    name = named["name"]
    if name not in db or not isinstance(db[name], kind):
        valid = sorted(k for k, v in db.items() if isinstance(v, kind))
        raise ConfigurationError(f"unknown {section} {name!r}; valid: {valid}", f"{section}.name")
    return db[name]


def _substrate(cfg, db, model=None, field_vec=None):
    base = _lookup(db, cfg["substrate"], GyrotropicModel, "substrate")
    entry = substrate_to_dict(base)
    entry.pop("b_field", None)
    override = cfg["substrate"]["override"]
    if "carrier_density" in override:
        entry.pop("plasma_freq", None)
    entry.update(override)
    sub = substrate_from_dict(entry, "substrate.override")
    if field_vec is None:
        mag = cfg["field"]["magnitude"]["value"]
        field_vec = [mag * x for x in cfg["field"]["direction"]]
    sub = sub.with_field(field_vec) if sub.effective_mass_ratio is not None else sub
    model = model or cfg["model"]
    if model == "local" and isinstance(sub, HydrodynamicModel):
        sub = sub.local()
    if model == "nonlocal" and not isinstance(sub, HydrodynamicModel):
        raise ConfigurationError("nonlocal model needs a substrate with 'beta'", "model")
    return sub


def _particle(named, db):
    base = _lookup(db, named, ParticleSpec, "particle")
    entry = particle_to_dict(base)
    entry.update(named["override"])
    return particle_from_dict(entry, "particle.override")


def _height(cfg, particle):
    geom = cfg["geometry"]
    if "d" in geom:
        d = geom["d"]["value"]
        if d <= particle.radius:
            raise ConfigurationError("particle would overlap the substrate (d <= radius)", "geometry.d")
        return d
    return geom["d_s"]["value"] + particle.radius


def build_inputs(cfg, *, particle=None, d_s=None, T_p=None, field_vec=None, model=None) -> Inputs:
    """Materials, thermal state, height and quadrature from a canonical config."""
    db = _material_db(cfg)
    part = _particle({"name": particle, "override": {}} if particle else cfg["particle"], db)
    sub = _substrate(cfg, db, model=model, field_vec=field_vec)
    d = d_s + part.radius if d_s is not None else _height(cfg, part)
    th = cfg["thermal"]
    thermal = ThermalState(th["T_p"]["value"] if T_p is None else T_p, th["T_e"]["value"])
    return Inputs(sub, part, thermal, d, QuadConfig(**cfg["quadrature"]))


def _values(tagged):
    return [v["value"] for v in tagged]


# --- jobs ---------------------------------------------------------------


def _pool_map(fn: Callable, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with cf.ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _spectrum_point(args):
    cfg, model, w = args
    inp = build_inputs(cfg, model=model)
    return spectral_density(inp.substrate, inp.particle, inp.thermal, inp.d, [w], inp.quad, cfg["params"]["zero_point_fz"])


def _write_split_csv(res, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_rad_s"] + [f"{c}_{b}" for c in SPLIT_COMPONENTS for b in ("redshifted", "blueshifted")])
        for i, om in enumerate(res.omega):
            row = [repr(float(om))]
            for c in SPLIT_COMPONENTS:
                red, blue = res.split(c)
                row += [repr(float(red[i])), repr(float(blue[i]))]
            w.writerow(row)


def _job_spectrum(cfg, out: Path, jobs):
    p = cfg["params"]
    models = list(p["models"] or [cfg["model"]])
    if "fig1f" in p["figures"]:
        models = sorted(set(models) | {"local", "nonlocal"}, key=["nonlocal", "local"].index)
    omegas = _values(p["omega"])
    spectra = {}
    files = []
    for model in models:
        parts = _pool_map(_spectrum_point, [(cfg, model, w) for w in omegas], jobs)
        res = replace(
            parts[0],
            omega=np.concatenate([r.omega for r in parts]),
            densities=np.concatenate([r.densities for r in parts], axis=1),
            errors=np.concatenate([r.errors for r in parts], axis=1),
            red=np.concatenate([r.red for r in parts], axis=1),
        )
        spectra[model] = res
        write_spectrum_csv(res, out / f"spectrum_{model}.csv")
        _write_split_csv(res, out / f"branches_{model}.csv")
        files += [f"spectrum_{model}.csv", f"branches_{model}.csv"]
    return JobResult("spectrum", {"spectra": spectra, "primary": cfg["model"] if cfg["model"] in spectra else models[0]}, files)


def _totals_meta(cfg, inp):
    return {
        "particle": cfg["particle"]["name"],
        "substrate": cfg["substrate"]["name"],
        "model": cfg["model"],
        "d_m": inp.d,
        "T_p_K": inp.thermal.T_p,
        "T_e_K": inp.thermal.T_e,
    }


def _rotating_point(args):
    cfg, Omega, window = args
    inp = build_inputs(cfg)
    t = integrate_totals(inp.substrate, inp.particle, inp.thermal, inp.d, window, inp.quad, components=("Mx",), Omega=Omega)
    return Omega, t.M_x_rotating, t.M_total[0], t.M_error[0]


def _job_totals(cfg, out: Path, jobs):
    p = cfg["params"]
    inp = build_inputs(cfg)
    window = tuple(_values(p["omega_window"]))
    comps = p["components"]
    tot = integrate_totals(
        inp.substrate, inp.particle, inp.thermal, inp.d, window, inp.quad, components=comps, zero_point_fz=p["zero_point_fz"]
    )
    doc = {**_totals_meta(cfg, inp), **tot.as_dict(), "components": comps}
    for name in set(COMPONENTS) - set(comps):
        key = next(k for k in doc if k.startswith(name + "_"))
        doc[key] = doc["err_" + name] = None
    _dump_json(doc, out / "totals.json")
    files = ["totals.json"]
    data = {"totals": tot}
    if "Omega" in p:
        omegas = _values(p["Omega"])
        lo = window[0]
        if max(abs(o) for o in omegas) >= lo:
            lo = 10 * max(abs(o) for o in omegas)
            log.info("raising the lower frequency limit to %.3g rad/s for the rotating torque", lo)
        rows = _pool_map(_rotating_point, [(cfg, o, (lo, window[1])) for o in omegas], jobs)
        with open(out / "rotating_torque.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["Omega_rad_s", "Mx_rotating_Nm", "Mx_static_Nm", "err_Mx_static"])
            for r in rows:
                w.writerow([repr(float(x)) for x in r])
        files.append("rotating_torque.csv")
        data["rotating"] = rows
    return JobResult("totals", data, files)


_SWEEP_COLUMNS = ["particle", "T_p_K", "axis_value", "d_s_m", "B_T", "P_W", "Fx_N", "Fy_N", "Fz_N", "Mx_Nm", "My_Nm", "Mz_Nm", "err_Fy", "err_Mx"]


def _sweep_point(args):
    cfg, particle, T_p, axis, value = args
    kw = {"particle": particle, "T_p": T_p}
    d_s = None
    b_mag = cfg["field"]["magnitude"]["value"]
    if axis == "d_s":
        kw["d_s"] = d_s = value
    elif axis == "T_p":
        kw["T_p"] = value
    else:
        b_mag = value
        kw["field_vec"] = [value * x for x in cfg["field"]["direction"]]
    inp = build_inputs(cfg, **kw)
    window = tuple(_values(cfg["params"]["omega_window"]))
    comps = cfg["params"]["components"]
    t = integrate_totals(inp.substrate, inp.particle, inp.thermal, inp.d, window, inp.quad, components=comps)
    if d_s is None:
        d_s = inp.d - inp.particle.radius
    row = {
        "particle": particle,
        "T_p_K": inp.thermal.T_p,
        "axis_value": value,
        "d_s_m": d_s,
        "B_T": b_mag,
        "P_W": t.P_total,
        "Fx_N": t.F_total[0],
        "Fy_N": t.F_total[1],
        "Fz_N": t.F_total[2],
        "Mx_Nm": t.M_total[0],
        "My_Nm": t.M_total[1],
        "Mz_Nm": t.M_total[2],
        "err_Fy": t.F_error[1],
        "err_Mx": t.M_error[0],
    }
    for name in set(COMPONENTS) - set(comps):
        row[next(k for k in row if k.startswith(name + "_"))] = None
    for name in {"Fy", "Mx"} - set(comps):
        row["err_" + name] = None
    return row


def _job_sweep(cfg, out: Path, jobs):
    p = cfg["params"]
    particles = p["particles"] or [cfg["particle"]["name"]]
    temps = _values(p["T_p"]) or [cfg["thermal"]["T_p"]["value"]]
    if p["axis"] == "T_p":
        temps = [None]
    tasks = [(cfg, name, T, p["axis"], v) for name in particles for T in temps for v in _values(p["values"])]
    rows = _pool_map(_sweep_point, tasks, jobs)
    cols = list(_SWEEP_COLUMNS)
    if p["gas"] is not None:
        db = _material_db(cfg)
        gas = _gas_env(p["gas"])
        for r in rows:
            spec = _particle({"name": r["particle"], "override": {}}, db)
            r["gamma_Nms"] = damping_coefficient(spec.radius, gas)
            r["Omega_ss_rad_s"] = None if r["Mx_Nm"] is None else steady_state_omega(r["Mx_Nm"], r["gamma_Nms"])
        cols += ["gamma_Nms", "Omega_ss_rad_s"]
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow(["" if r[c] is None else r[c] if isinstance(r[c], str) else repr(float(r[c])) for c in cols])
    return JobResult("sweep", {"rows": rows, "axis": p["axis"]}, ["sweep.csv"])


def _job_dispersion(cfg, out: Path, jobs):
    p = cfg["params"]
    points = []
    ks = _values(p["k_range"])
    fields_ = [None] + ([[0.0, 0.0, 0.0]] if p["include_zero_field"] else [])
    for model in p["models"]:
        for fv in fields_:
            db = _material_db(cfg)
            sub = _substrate(cfg, db, model=model, field_vec=fv)
            phis = _values(p["phi"]) if fv is None else [_values(p["phi"])[0]]
            for phi in phis:
                pts = trace_branch(sub, phi, ks, model=model, branch=p["branch"])
                tag = "B0" if fv is not None else "B"
                points += [(tag, pt) for pt in pts]
    with open(out / "dispersion.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["k_par_per_m", "phi_rad", "omega_rad_s", "branch", "model", "field"])
        for tag, pt in points:
            w.writerow([repr(pt.k_par), repr(pt.phi), repr(pt.omega), pt.branch, pt.model, tag])
    return JobResult("dispersion", {"points": points}, ["dispersion.csv"])


def _gas_env(g):
    return GasEnvironment(g["pressure"]["value"], g["gas_mass"]["value"], g["temperature"]["value"])


def _job_dynamics(cfg, out: Path, jobs):
    p = cfg["params"]
    inp = build_inputs(cfg)
    gas = _gas_env(p["gas"])
    I = moment_of_inertia(inp.particle)
    gamma = damping_coefficient(inp.particle.radius, gas)
    window = tuple(_values(p["omega_window"]))
    if p["torque"] == "totals":
        M = integrate_totals(inp.substrate, inp.particle, inp.thermal, inp.d, window, inp.quad, components=("Mx",)).M_total[0]
    else:
        M = p["torque"]["value"]
    torque: Any = M
    extra = {"torque_Nm": M, "gamma_Nms": gamma, "moment_of_inertia_kgm2": I}
    if p["Omega_grid"]:
        grid = _values(p["Omega_grid"])
        lo = max(window[0], 10 * max(abs(o) for o in grid))
        rows = _pool_map(_rotating_point, [(cfg, o, (lo, window[1])) for o in grid], jobs)
        mx = np.array([r[1] for r in rows])
        torque = lambda om, g=np.array(grid), m=mx: np.interp(om, g, m)  # noqa: E731
        extra["Omega_grid_rad_s"] = grid
        extra["Mx_rotating_Nm"] = mx.tolist()
    tau = I / gamma if gamma > 0 else math.inf
    dt = p["dt"]["value"] if p["dt"] else tau / 200
    state = simulate_langevin(
        torque, I, gamma, inp.thermal.T_e, dt, p["steps"], p["n_trajectories"], cfg["seed"],
        burn_in=p["burn_in"], record_every=p["record_every"],
    )
    extra["steady_state_omega_rad_s"] = steady_state_omega(M, gamma)
    extra["seed"] = cfg["seed"]
    write_summary_json(state, out / "summary.json", I=I, T_e=inp.thermal.T_e, extra=extra)
    files = ["summary.json"]
    if p["record_every"] and p["keep_trajectories"]:
        kept = replace(state, trajectories=state.trajectories[: p["keep_trajectories"]])
        paths = write_trajectories_csv(kept, str(out / "trajectory_{:04d}.csv"), p["record_every"])
        files += [Path(x).name for x in paths]
    return JobResult("dynamics", {"state": state, "extra": extra}, files)


def _job_materials(cfg, out: Path, jobs):
    db = _material_db(cfg)
    (out / "materials.json").write_text(dump_material_db(db), encoding="utf-8")
    return JobResult("materials", {"db": db}, ["materials.json"])


def _job_fresnel(cfg, out: Path, jobs):
    p = cfg["params"]
    sub = _substrate(cfg, _material_db(cfg))
    w_, k_, f_ = np.meshgrid(_values(p["omega"]), _values(p["k_par"]), _values(p["phi"]), indexing="ij")
    mode = mode_coords(w_.ravel(), k_.ravel(), f_.ravel())
    r = reflect(sub, mode)
    names = ("r_ss", "r_sp", "r_ps", "r_pp")
    with open(out / "fresnel.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["omega", "k_par", "phi"] + [f"{part}_{n}" for n in names for part in ("re", "im")])
        for i in range(mode.omega.size):
            row = [repr(float(mode.omega[i])), repr(float(mode.k_par[i])), repr(float(mode.phi[i]))]
            for n in names:
                v = getattr(r, n)[i]
                row += [repr(float(v.real)), repr(float(v.imag))]
            w.writerow(row)
    return JobResult("fresnel", {"refl": r}, ["fresnel.csv"])


_JOBS = {
    "spectrum": _job_spectrum,
    "totals": _job_totals,
    "sweep": _job_sweep,
    "dispersion": _job_dispersion,
    "dynamics": _job_dynamics,
    "materials": _job_materials,
    "fresnel": _job_fresnel,
}


# --- figure exports -----------------------------------------------------


def _need(result, kind, fig):
    if result.kind != kind:
        raise ConfigurationError(f"{fig} needs a {kind} result, got {result.kind}", "figure_id")


def _fig_split(component, label):
    def export(result, rows):
        _need(result, "spectrum", label)
        res = result.data["spectra"][result.data["primary"]]
        red, blue = res.split(component)
        rows.append(["omega_rad_s", f"{component}_total", f"{component}_redshifted_branch", f"{component}_blueshifted_branch"])
        total = getattr(res, component)
        for i, om in enumerate(res.omega):
            rows.append([om, total[i], red[i], blue[i]])

    return export


def _fig1b(result, rows):
    _need(result, "dispersion", "fig1b")
    rows.append(["k_par_per_m", "phi_rad", "omega_rad_s", "branch", "model", "field"])
    for tag, pt in result.data["points"]:
        rows.append([pt.k_par, pt.phi, pt.omega, pt.branch, pt.model, tag])


def _fig1f(result, rows):
    _need(result, "spectrum", "fig1f")
    sp = result.data["spectra"]
    if not {"local", "nonlocal"} <= set(sp):
        raise ConfigurationError("fig1f needs both local and nonlocal spectra", "params.models")
    rows.append(["omega_rad_s", "Fy_nonlocal", "Fy_local"])
    for i, om in enumerate(sp["nonlocal"].omega):
        rows.append([om, sp["nonlocal"].Fy[i], sp["local"].Fy[i]])


def _fig2bc(result, rows):
    _need(result, "sweep", "fig2bc")
    rows.append(["particle", "T_p_K", "d_s_m", "Fy_N", "Mx_Nm"])
    for r in result.data["rows"]:
        rows.append([r["particle"], r["T_p_K"], r["d_s_m"], r["Fy_N"], r["Mx_Nm"]])


def _fig2d(result, rows):
    _need(result, "sweep", "fig2d")
    if not result.data["rows"] or "Omega_ss_rad_s" not in result.data["rows"][0]:
        raise ConfigurationError("fig2d needs a sweep with a 'gas' entry", "params.gas")
    rows.append(["particle", "T_p_K", "d_s_m", "Mx_Nm", "gamma_Nms", "Omega_ss_rad_s"])
    for r in result.data["rows"]:
        rows.append([r["particle"], r["T_p_K"], r["d_s_m"], r["Mx_Nm"], r["gamma_Nms"], r["Omega_ss_rad_s"]])


def _figS1(result, rows):
    _need(result, "totals", "figS1")
    if "rotating" not in result.data:
        raise ConfigurationError("figS1 needs a totals job with 'Omega' values", "params.Omega")
    rows.append(["Omega_rad_s", "Mx_rotating_Nm", "Mx_static_Nm"])
    for om, rot, static, _ in result.data["rotating"]:
        rows.append([om, rot, static])


# id -> (exporter, description written as the file's first line)
FIGURES = {
    "fig1b": (_fig1b, "surface polariton dispersion, +/- propagation with field and at zero field, local and nonlocal"),
    "fig1c": (_fig_split("Fy", "fig1c"), "lateral force spectral density with k_y>0 (redshifted) and k_y<0 (blueshifted) polariton parts"),
    "fig1d": (_fig_split("Mx", "fig1d"), "lateral torque spectral density with redshifted and blueshifted polariton parts"),
    "fig1e": (_fig_split("P", "fig1e"), "power spectral density with redshifted and blueshifted polariton parts"),
    "fig1f": (_fig1f, "lateral force spectral density, nonlocal vs local substrate model"),
    "fig2bc": (_fig2bc, "total lateral force and torque vs surface-to-surface distance"),
    "fig2d": (_fig2d, "steady-state spin vs surface-to-surface distance"),
    "figS1": (_figS1, "lateral torque vs spin rate of the particle"),
}


def export_figure_data(result: JobResult, figure_id: str, path) -> Path:
    """Write the CSV emulating ``figure_id``; the first line names the figure."""
    if figure_id not in FIGURES:
        raise ConfigurationError(f"unknown figure id {figure_id!r}; valid ids: {sorted(FIGURES)}", "figure_id")
    fn, desc = FIGURES[figure_id]
    rows: list = []
    fn(result, rows)
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {figure_id}: {desc}\n")
        w = csv.writer(fh)
        for row in rows:
            w.writerow(["" if x is None else x if isinstance(x, str) else repr(float(x)) for x in row])
    return path


# --- cache and orchestration ----------------------------------------------


def cache_dir() -> Path:
    env = os.environ.get("FLUXTORQUE_CACHE_DIR")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "fluxtorque"


def _dump_json(doc, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _execute(cfg, workdir: Path, jobs) -> JobResult:
    result = _JOBS[cfg["job"]](cfg, workdir, jobs)
    figures = cfg["params"].get("figures", [])
    for fig in figures:
        name = f"{fig}.csv"
        export_figure_data(result, fig, workdir / name)
        result.files.append(name)
    (workdir / "config.canonical.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    result.files.append("config.canonical.json")
    return result


def _copy_files(src: Path, dst: Path, names):
    dst.mkdir(parents=True, exist_ok=True)
    for n in names:
        shutil.copyfile(src / n, dst / n)


def run_job(config, out_dir, use_cache: bool = True, jobs: int = 1) -> JobResult:
    """Validate ``config``, run it (or replay it from the cache) and write results to ``out_dir``."""
    cfg = canonicalize(config)
    for fig in cfg["params"].get("figures", []):
        if fig not in FIGURES:
            raise ConfigurationError(f"unknown figure id {fig!r}; valid ids: {sorted(FIGURES)}", "params.figures")
    out = Path(out_dir)
    key = cache_key(cfg, __version__)
    entry = cache_dir() / key
    if use_cache and (entry / "manifest.json").is_file():
        names = json.loads((entry / "manifest.json").read_text("utf-8"))["files"]
        _copy_files(entry, out, names)
        log.info("cache hit %s", key[:16])
        return JobResult(cfg["job"], {"cache_key": key}, names, cached=True)

    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(prefix=".fluxtorque-", dir=out) as tmp:
        tmp = Path(tmp)
        result = _execute(cfg, tmp, jobs)
        _copy_files(tmp, out, result.files)
        if use_cache:
            _store(entry, tmp, result.files, cfg, key)
    result.data["cache_key"] = key
    return result


def _store(entry: Path, src: Path, names, cfg, key):
    root = entry.parent
    root.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=f".{key[:16]}-", dir=root))
    try:
        _copy_files(src, stage, names)
        manifest = {"files": names, "version": __version__, "config": canonical_json(cfg)}
        (stage / "manifest.json").write_text(json.dumps(manifest, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(stage, entry)  # atomic publish; fails if another writer won
    except OSError:
        shutil.rmtree(stage, ignore_errors=True)


# --- presets ------------------------------------------------------------

_FIXED_ALPHA = {"name": "NaCl", "override": {"oscillators": [], "fixed_alpha": {"real": 0.0, "imag": 1e-19}}}
_SPECTRUM_PRESET = {
    "job": "spectrum",
    "particle": _FIXED_ALPHA,
    "geometry": {"d": {"value": 0.3, "unit": "um"}},
    "thermal": {"T_p": 305, "T_e": 300},
    "params": {"omega": {"start": 1.5e13, "stop": 5e13, "num": 80, "spacing": "linear"}},
}
_SWEEP_PRESET = {
    "job": "sweep",
    "params": {
        "axis": "d_s",
        "values": {"start": {"value": 5, "unit": "nm"}, "stop": {"value": 2, "unit": "um"}, "num": 8},
        "particles": ["AgBr", "NaCl"],
    },
}

PRESETS = {
    "fig1b": {"job": "dispersion"},
    "fig1c": _SPECTRUM_PRESET,
    "fig1d": _SPECTRUM_PRESET,
    "fig1e": _SPECTRUM_PRESET,
    "fig1f": _SPECTRUM_PRESET,
    "fig2bc": {**_SWEEP_PRESET, "params": {**_SWEEP_PRESET["params"], "T_p": [310, 500]}},
    "fig2d": {
        **_SWEEP_PRESET,
        "thermal": {"T_p": 310, "T_e": 300},
        "params": {**_SWEEP_PRESET["params"], "gas": {"pressure": {"value": 1e-5, "unit": "torr"}}},
    },
    "figS1": {
        "job": "totals",
        "thermal": {"T_p": 400, "T_e": 300},
        "params": {"Omega": [1e6, 1e7, 1e8, 1e9, 1e10, 1e11]},
    },
}


def _preset(figure_id):
    if figure_id not in PRESETS:
        raise ConfigurationError(f"unknown figure id {figure_id!r}; valid ids: {sorted(PRESETS)}", "figure_id")
    cfg = copy.deepcopy(PRESETS[figure_id])
    cfg.setdefault("params", {})["figures"] = [figure_id]
    return cfg


# --- entry point ----------------------------------------------------------


def _parser():
    ap = argparse.ArgumentParser(prog="fluxtorque", description="Nonequilibrium power, force and torque on a particle above a magnetized substrate.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="JSON job configuration")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
        p.add_argument("--seed", type=int, help="RNG seed (overrides the config)")
        p.add_argument("--no-cache", action="store_true", help="recompute even if a cached result exists")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for independent points")
        p.add_argument("--figure", action="append", default=[], help="also export figure data (repeatable)")
        p.add_argument("-v", "--verbose", action="store_true")

    for kind in JOB_KINDS:
        common(sub.add_parser(kind, help=f"run a {kind} job"))
    fig = sub.add_parser("figure", help="run a preset job and export one figure's data")
    fig.add_argument("figure_id")
    common(fig)
    return ap


def _fail(code, exc, field_=None):
    doc = {"error": type(exc).__name__, "message": str(exc)}
    if field_:
        doc["field"] = field_
    print(json.dumps(doc), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        if args.jobs < 1:
            raise ConfigurationError("must be >= 1", "--jobs")
        if args.command == "figure":
            cfg = _preset(args.figure_id)
            if args.config:
                cfg.update(load_config(args.config))
                cfg["job"] = PRESETS[args.figure_id]["job"]
        else:
            cfg = load_config(args.config) if args.config else {}
            if cfg.get("job", args.command) != args.command:
                raise ConfigurationError(f"config job {cfg.get('job')!r} does not match subcommand {args.command!r}", "job")
            cfg["job"] = args.command
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.figure:
            params = cfg.setdefault("params", {})
            params["figures"] = list(dict.fromkeys(list(params.get("figures", [])) + args.figure))
        result = run_job(cfg, args.out, use_cache=not args.no_cache, jobs=args.jobs)
    except ConfigurationError as exc:
        return _fail(EXIT_CONFIG, exc, getattr(exc, "field", None))
    except FluxTorqueError as exc:
        return _fail(EXIT_NUMERIC, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    for name in result.files:
        print(Path(args.out) / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
