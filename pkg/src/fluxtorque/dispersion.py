"""Surface-polariton dispersion of the magnetized substrate.

A polariton at ``(k_par, phi)`` is located as the real frequency that
maximizes ``Im r_pp``; for lossy media this is what the spectral
integrands actually feel.  Traces proceed by continuation in ``k_par``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.optimize import brentq, minimize_scalar
from scipy.signal import find_peaks

from .errors import ConfigurationError
from .fresnel import mode_coords, reflect_local, reflect_nonlocal
from .materials import GyrotropicModel, HydrodynamicModel, ParticleSpec, epsilon_particle

__all__ = ["BranchPoint", "classify_branch", "seed_frequencies", "surface_window", "trace_branch", "write_dispersion_csv"]

_SCAN_POINTS = 1500
_PEAK_FLOOR = 0.05


@dataclass(frozen=True)
class BranchPoint:
    """One point of a traced polariton branch."""

    k_par: float
    phi: float
    omega: float
    branch: str
    model: str
    peak: float = float("nan")


def _phonon_bands(model: GyrotropicModel):
    bands = []
    for strength, w_to, _ in model.phonon_terms:
        bands.append((w_to, w_to * np.sqrt(1 + strength / model.eps_inf)))
    return bands


def classify_branch(model: GyrotropicModel, omega: float) -> str:
    """``"SPhP"`` for the upper branch (above the lowest TO phonon), ``"SPP"`` below it.

    With a strongly screened plasma the phonon-like surface mode is pushed
    above the reststrahlen band, so the split is made at the TO frequency.
    """
    bands = _phonon_bands(model)
    if bands and omega >= min(lo for lo, _ in bands):
        return "SPhP"
    return "SPP"


def surface_window(model: GyrotropicModel):
    """Frequency window that contains every surface mode of the substrate (rad/s)."""
    scales = [model.plasma_freq / np.sqrt(model.eps_inf), model.cyclotron_freq]
    scales += [hi for _, hi in _phonon_bands(model)]
    top = max(s for s in scales if s > 0) if any(s > 0 for s in scales) else None
    if top is None:
        raise ConfigurationError("substrate has no resonant response", "substrate")
    return 0.05 * top, 2.5 * top


def _im_rpp(model, omega, k_par, phi, nonlocal_):
    mode = mode_coords(omega, k_par, phi)
    refl = reflect_nonlocal(model, mode) if nonlocal_ else reflect_local(model, mode)
    return refl.r_pp.imag


def _refine(model, k_par, phi, nonlocal_, grid, vals, i):
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    f = lambda w: -float(_im_rpp(model, w, k_par, phi, nonlocal_))  # noqa: E731
    try:
        res = minimize_scalar(f, bracket=(lo, grid[i], hi), method="golden", tol=1e-7)
        if lo <= res.x <= hi:
            return res.x, -res.fun
    except ValueError:
        pass
    return grid[i], vals[i]


def _peaks(model, k_par, phi, nonlocal_, window, n=_SCAN_POINTS):
    grid = np.geomspace(window[0], window[1], n)
    vals = _im_rpp(model, grid, k_par, phi, nonlocal_)
    idx, _ = find_peaks(vals, prominence=_PEAK_FLOOR)
    return grid, vals, idx


def trace_branch(
    substrate: GyrotropicModel,
    phi: float,
    k_range,
    model: str = "local",
    branch: str = "SPP",
    window=None,
) -> list[BranchPoint]:
    """Trace one polariton branch over the wavevectors in ``k_range``.

    Parameters
    ----------
    substrate
        Material model; a hydrodynamic model is required for
        ``model="nonlocal"``.
    phi
        In-plane propagation angle (rad).
    k_range
        Increasing wavevectors above the light line (1/m).
    model
        ``"local"`` or ``"nonlocal"``.
    branch
        ``"SPP"`` (plasmon) or ``"SPhP"`` (phonon) branch to follow.
    window
        Optional ``(lo, hi)`` frequency window; defaults to
        :func:`surface_window`.

    The first point takes the strongest peak of the requested class from a
    full-window scan; later points search around the previous frequency.
    A lost branch truncates the trace with a warning.
    """
    if model not in ("local", "nonlocal"):
        raise ConfigurationError("model must be 'local' or 'nonlocal'", "model")
    if branch not in ("SPP", "SPhP"):
        raise ConfigurationError("branch must be 'SPP' or 'SPhP'", "branch")
    nonlocal_ = model == "nonlocal"
    if nonlocal_ and not isinstance(substrate, HydrodynamicModel):
        raise ConfigurationError("nonlocal tracing needs a hydrodynamic model", "substrate")
    if not nonlocal_ and isinstance(substrate, HydrodynamicModel):
        substrate = substrate.local()
    k_range = np.asarray(k_range, dtype=float)
    if np.any(np.diff(k_range) <= 0):
        raise ConfigurationError("k_range must be strictly increasing", "k_range")
    window = surface_window(substrate) if window is None else window

    points: list[BranchPoint] = []
    prev = None
    for k in k_range:
        if k <= window[1] / C_LIGHT:
            raise ConfigurationError("k_range must lie above the light line of the window", "k_range")
        if prev is None:
            grid, vals, idx = _peaks(substrate, k, phi, nonlocal_, window)
            idx = [i for i in idx if classify_branch(substrate, grid[i]) == branch]
        else:
            local_win = (prev * 0.93, min(prev * 1.07, window[1]))
            grid, vals, idx = _peaks(substrate, k, phi, nonlocal_, local_win, n=400)
            idx = [i for i in idx if classify_branch(substrate, grid[i]) == branch]
            if not idx:
                # steep branch (coarse k steps): rescan the whole window
                grid, vals, idx = _peaks(substrate, k, phi, nonlocal_, window)
                idx = [i for i in idx if classify_branch(substrate, grid[i]) == branch and grid[i] >= prev * 0.93]
            if idx:
                idx = [min(idx, key=lambda i: abs(grid[i] - prev))]
        if not idx:
            warnings.warn(f"{branch} branch lost at k_par={k:.4g} 1/m; trace truncated")
            break
        best = max(idx, key=lambda i: vals[i])
        w, peak = _refine(substrate, k, phi, nonlocal_, grid, vals, best)
        points.append(BranchPoint(float(k), float(phi), float(w), classify_branch(substrate, w), model, float(peak)))
        prev = w
    return points


def _froehlich(spec: ParticleSpec, window):
    """Frequencies where Re eps_particle crosses -2 while increasing (Im alpha peaks)."""
    grid = np.geomspace(window[0], window[1], 20000)
    re = np.real(epsilon_particle(spec, grid)) + 2
    out = []
    for i in np.nonzero((re[:-1] < 0) & (re[1:] >= 0))[0]:
        out.append(brentq(lambda w: np.real(epsilon_particle(spec, w)) + 2, grid[i], grid[i + 1], xtol=1e-6))
    return out


def _particle_seeds(spec: ParticleSpec):
    seeds = []
    for _, w0, _ in spec.oscillators:
        hits = _froehlich(spec, (0.5 * w0, 5 * w0))
        seeds.extend(hits if hits else [w0])
    return seeds


def _substrate_seeds(model: GyrotropicModel):
    if isinstance(model, HydrodynamicModel):
        model = model.local()
    window = surface_window(model)
    k_big = 200 * window[1] / C_LIGHT
    seeds = []
    for phi in (np.pi / 2, 3 * np.pi / 2):
        grid, vals, idx = _peaks(model, k_big, phi, False, window)
        for i in idx:
            seeds.append(_refine(model, k_big, phi, False, grid, vals, i)[0])
    return seeds


def _dedupe(values, rtol=1e-4):
    out = []
    for v in sorted(values):
        if not out or v > out[-1] * (1 + rtol):
            out.append(float(v))
    return out


def seed_frequencies(substrate: GyrotropicModel | None, particle: ParticleSpec | None) -> list[float]:
    """Resonance frequencies for seeding frequency grids (rad/s).

    Particle seeds are the absorption peaks of the polarizability (where
    ``Re eps = -2`` on the rising side of each oscillator).  Substrate seeds
    are the large-wavevector surface-mode frequencies for propagation along
    +y and -y, which coincide when the field vanishes.
    """
    seeds = []
    if particle is not None:
        seeds += _particle_seeds(particle)
    if substrate is not None:
        seeds += _substrate_seeds(substrate)
    return _dedupe(seeds)


def write_dispersion_csv(points, path):
    """Write ``k_par_per_m, phi_rad, omega_rad_s, branch, model`` rows."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["k_par_per_m", "phi_rad", "omega_rad_s", "branch", "model"])
        for p in points:
            w.writerow([repr(p.k_par), repr(p.phi), repr(p.omega), p.branch, p.model])
