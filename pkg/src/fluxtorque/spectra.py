"""Spectral densities of nonequilibrium power, force and torque.

A particle at height ``d`` (center) above the substrate, at temperature
``T_p``, exchanges thermal photons with the substrate and the vacuum at
``T_e``.  Every density is ``prefactor(omega) * int dk_par dphi K(mode)``
where the kernels ``K`` are built from the Fresnel matrix:

    P     dTheta k0^2 Im(alpha) [k0/pi + int Im(i k e/(8 pi^2 k_z) X)]
    F_x   -dTheta (k0/c) Im(alpha) int Im(i k e/(8 pi^2 k_z) X) k cos(phi)
    F_z   -sTheta (k0/c) Im(alpha) int Im(i k e/(8 pi^2) X)
    M_x   -dTheta (k0/c) Im(alpha) int k^2/(8 pi^2 k0)
              [cos(phi) Im((r_sp - r_ps) e/k_z) + 2 sin(phi) Im(r_pp e)/k0]
    M_z   +dTheta (k0/c) Im(alpha) int k/(8 pi^2 k0) Im((r_sp + r_ps) e)

with ``e = exp(2 i k_z d)``, ``X = r_ss + r_pp (2 k^2/k0^2 - 1)``,
``dTheta = Theta(T_p) - Theta(T_e)`` and ``sTheta = Theta(T_p) + Theta(T_e)``.
``F_y`` and ``M_y`` follow from ``cos -> sin``, ``sin -> -cos``.
Totals are ``(1/pi) int_0^inf Q(omega) domega``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import hbar, k as K_B

from .errors import ConfigurationError, UndefinedSpinError
from .fresnel import ModeCoords, ReflectionMatrix, reflect
from .greens import greens_reflected_integrand
from .materials import GyrotropicModel, ParticleSpec, polarizability
from .quadrature import QuadConfig, integrate_kphi, integrate_omega

__all__ = [
    "COMPONENTS",
    "SpectralResult",
    "ThermalState",
    "WrenchTotals",
    "force_density",
    "integrate_totals",
    "mode_densities",
    "mode_kernels",
    "photon_spin",
    "power_density",
    "rotating_torque_x",
    "spectral_density",
    "theta",
    "torque_density",
    "vacuum_rotation_terms",
    "write_spectrum_csv",
]

COMPONENTS = ("P", "Fx", "Fy", "Fz", "Mx", "My", "Mz")
SPLIT_COMPONENTS = ("P", "Fy", "Mx")
# kernel layout: 7 densities, 3 red-branch partials, Im G_yy, Im G_zz
_N_DENS = 7
_RED = slice(7, 10)
_CHECKED = (0, 1, 2, 3, 4, 5, 6, 10, 11)

Substrate = Union[GyrotropicModel, Callable[[ModeCoords], ReflectionMatrix]]


@dataclass(frozen=True)
class ThermalState:
    """Particle and environment temperatures in kelvin."""

    T_p: float
    T_e: float

    def __post_init__(self):
        for name in ("T_p", "T_e"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ConfigurationError("temperature must be >= 0", f"thermal.{name}")


def theta(omega, T, zero_point: bool = True):
    """Mean energy of a quantum oscillator, ``hbar w / 2 + hbar w / (exp(hbar w / k T) - 1)``.

    The occupation term underflows to zero for ``hbar w / k T > 700`` and at
    ``T = 0``.  ``zero_point=False`` drops the ``hbar w / 2`` part.
    """
    omega = np.asarray(omega, dtype=float)
    e = hbar * omega
    if T <= 0:
        bose = np.zeros_like(e)
    else:
        x = e / (K_B * T)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            bose = np.where(x > 700, 0.0, e / np.expm1(np.minimum(x, 700)))
        bose = np.where(x == 0, K_B * T, bose)
    return bose + 0.5 * e if zero_point else bose


def _reflector(substrate: Substrate):
    if isinstance(substrate, GyrotropicModel):
        return lambda mode: reflect(substrate, mode)
    if callable(substrate):
        return substrate
    raise TypeError("substrate must be a material model or a callable mode -> ReflectionMatrix")


def _red_weight(phi):
    # k_y > 0 half plane, endpoints shared with the blue half
    on_edge = np.isclose(np.sin(phi), 0.0, atol=1e-14)
    return np.where(on_edge, 0.5, (phi < np.pi).astype(float))


def mode_kernels(refl: ReflectionMatrix, mode: ModeCoords, d: float, magnitudes: bool = False):
    """Per-mode integration kernels, shape ``(12,) + mode.shape``.

    Rows 0-6 are the (k_par, phi) integrands of P (reflected part), F_x,
    F_y, F_z, M_x, M_y, M_z without their frequency prefactors; rows 7-9
    are the k_y > 0 parts of P, F_y and M_x; rows 10-11 are
    ``k_par/(2 pi)^2 Im G_yy`` and ``Im G_zz`` of the reflected Green's tensor.
    With ``magnitudes=True`` a second array of nonnegative magnitude proxies
    is returned for the quadrature tolerance.
    """
    kp, kz, k0 = mode.k_par, mode.k_z, mode.k0
    c, s = np.cos(mode.phi), np.sin(mode.phi)
    e = np.exp(2j * kz * d)
    x = refl.r_ss + refl.r_pp * (2 * kp**2 / k0**2 - 1)
    pref = kp / (8 * np.pi**2)

    p = np.imag(1j * pref * e * x / kz)
    fx = p * kp * c
    fy = p * kp * s
    fz = np.imag(1j * pref * e * x)
    cross = np.imag((refl.r_sp - refl.r_ps) * e / kz)
    pp = np.imag(refl.r_pp * e) / k0
    mx = kp**2 / (8 * np.pi**2 * k0) * (c * cross + 2 * s * pp)
    my = kp**2 / (8 * np.pi**2 * k0) * (s * cross - 2 * c * pp)
    mz = kp / (8 * np.pi**2 * k0) * np.imag((refl.r_sp + refl.r_ps) * e)

    red = _red_weight(mode.phi)
    g = greens_reflected_integrand(refl, mode, d)
    gw = kp / (4 * np.pi**2)
    values = np.stack(
        [p, fx, fy, fz, mx, my, mz, p * red, fy * red, mx * red, gw * g[..., 1, 1].imag, gw * g[..., 2, 2].imag]
    )
    if not magnitudes:
        return values
    # magnitude proxies: absolute values before the azimuthal cancellations;
    # M_z vanishes for in-plane fields and its cross-polarized amplitudes are
    # pure roundoff at zero field, so its scale uses all four amplitudes
    ap = np.abs(p)
    am = kp**2 / (8 * np.pi**2 * k0) * (np.abs(cross) + 2 * np.abs(pp))
    ae = np.abs(e)
    mags = np.stack(
        [
            ap,
            ap * kp,
            ap * kp,
            np.abs(fz),
            am,
            am,
            kp / (8 * np.pi**2 * k0) * ae * (np.abs(refl.r_ss) + np.abs(refl.r_sp) + np.abs(refl.r_ps) + np.abs(refl.r_pp)),
            ap,
            ap * kp,
            am,
            gw * np.abs(g[..., 1, 1]),
            gw * np.abs(g[..., 2, 2]),
        ]
    )
    return values, mags


def _prefactors(particle: ParticleSpec, thermal: ThermalState, omega, zero_point_fz=False):
    """Frequency prefactors of the seven densities, shape ``(7,) + omega.shape``."""
    omega = np.asarray(omega, dtype=float)
    k0 = omega / C_LIGHT
    im_a = np.imag(polarizability(particle, omega))
    d_theta = theta(omega, thermal.T_p, False) - theta(omega, thermal.T_e, False)
    s_theta = theta(omega, thermal.T_p, zero_point_fz) + theta(omega, thermal.T_e, zero_point_fz)
    lat = (k0 / C_LIGHT) * im_a
    return np.stack([d_theta * k0**2 * im_a, -d_theta * lat, -d_theta * lat, -s_theta * lat, -d_theta * lat, -d_theta * lat, d_theta * lat])


def mode_densities(substrate: Substrate, particle: ParticleSpec, thermal: ThermalState, mode: ModeCoords, d: float):
    """Per-mode integrands with prefactors, shape ``(7,) + mode.shape``.

    Row 0 is the reflected part of the power integrand only.  Integrating
    over ``dk_par dphi`` gives the spectral densities.
    """
    refl = _reflector(substrate)(mode)
    kern = mode_kernels(refl, mode, d)[:_N_DENS]
    pre = _prefactors(particle, thermal, mode.omega)
    return pre * kern


@dataclass
class SpectralResult:
    """Spectral densities on a frequency grid.

    ``densities`` and ``errors`` have shape ``(7, n_omega)`` in the order of
    :data:`COMPONENTS` (units W s, N s, N m s).  ``red`` holds the k_y > 0
    partial densities of P, F_y and M_x; the k_y < 0 part is ``total - red``.
    """

    omega: np.ndarray
    densities: np.ndarray
    errors: np.ndarray
    red: np.ndarray
    zero_point_fz: bool = False

    def __getattr__(self, name):
        if name in COMPONENTS:
            return self.densities[COMPONENTS.index(name)]
        raise AttributeError(name)

    def split(self, name):
        """``(red, blue)`` partial densities for P, Fy or Mx."""
        red = self.red[SPLIT_COMPONENTS.index(name)]
        return red, self.densities[COMPONENTS.index(name)] - red


def _kernel_integral(substrate, omega, d, cfg):
    refl_fn = _reflector(substrate)
    res = integrate_kphi(lambda m: mode_kernels(refl_fn(m), m, d, magnitudes=True), omega, d, cfg, checked=_CHECKED)
    return res.value, res.error, res.info["abs_integral"]


def _check_geometry(d, omega):
    if not (d > 0):
        raise ConfigurationError("particle height must be > 0", "d")
    if np.any(~(np.asarray(omega) > 0)):
        raise ConfigurationError("angular frequency must be > 0", "omega")


def _assemble(pre, kern, kerr, omega, zero_point_fz):
    k0 = omega / C_LIGHT
    dens = pre * kern[:_N_DENS]
    dens[0] = pre[0] * (k0 / np.pi + kern[0])
    err = np.abs(pre) * kerr[:_N_DENS]
    red = pre[[0, 2, 4]] * kern[_RED]
    red[0] = pre[0] * (k0 / (2 * np.pi) + kern[7])
    return dens, err, red


def spectral_density(
    substrate: Substrate,
    particle: ParticleSpec,
    thermal: ThermalState,
    d: float,
    omega,
    cfg: QuadConfig | None = None,
    zero_point_fz: bool = False,
) -> SpectralResult:
    """All seven spectral densities at each frequency of ``omega``.

    ``zero_point_fz`` includes the ``hbar w / 2`` terms in the F_z
    prefactor; by default only the thermal occupation enters.  The vacuum
    power term is split evenly between the two half planes.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    _check_geometry(d, omega)
    cfg = cfg or QuadConfig()
    pre = _prefactors(particle, thermal, omega, zero_point_fz)
    dens = np.zeros((_N_DENS, omega.size))
    errs = np.zeros_like(dens)
    red = np.zeros((3, omega.size))
    for i, w in enumerate(omega):
        if not np.any(pre[:, i]):
            dens[0, i] = 0.0
            continue
        kern, kerr, _ = _kernel_integral(substrate, w, d, cfg)
        dens[:, i], errs[:, i], red[:, i] = _assemble(pre[:, i], kern, kerr, w, zero_point_fz)
    return SpectralResult(omega, dens, errs, red, zero_point_fz)


def power_density(substrate, particle, thermal, d, omega, quad_cfg=None):
    """Net spectral power emitted by the particle (W s)."""
    return spectral_density(substrate, particle, thermal, d, omega, quad_cfg).P


def force_density(axis, substrate, particle, thermal, d, omega, quad_cfg=None, zero_point_fz=False):
    """Spectral force along ``axis`` in {"x", "y", "z"} (N s)."""
    if axis not in ("x", "y", "z"):
        raise ConfigurationError("axis must be x, y or z", "axis")
    res = spectral_density(substrate, particle, thermal, d, omega, quad_cfg, zero_point_fz)
    return getattr(res, "F" + axis)


def torque_density(axis, substrate, particle, thermal, d, omega, quad_cfg=None):
    """Spectral torque along ``axis`` in {"x", "y", "z"} (N m s)."""
    if axis not in ("x", "y", "z"):
        raise ConfigurationError("axis must be x, y or z", "axis")
    return getattr(spectral_density(substrate, particle, thermal, d, omega, quad_cfg), "M" + axis)


def photon_spin(mode: ModeCoords, refl: ReflectionMatrix, d: float) -> np.ndarray:
    """Angular momentum per exchanged photon, in units of hbar.

    Ratio of the torque integrand to the photon-number integrand of the
    same mode; returns an array of shape ``mode.shape + (3,)``.  For
    evanescent modes ``exp(2 i k_z d)`` is real and the ratio is evaluated
    in that simplified form.  Large-k_par polaritons tend to
    ``(sin phi, -cos phi, 0)``.
    """
    kp, kz, k0 = mode.k_par, mode.k_z, mode.k0
    c, s = np.cos(mode.phi), np.sin(mode.phi)
    x = refl.r_ss + refl.r_pp * (2 * kp**2 / k0**2 - 1)
    dr, sr = refl.r_sp - refl.r_ps, refl.r_sp + refl.r_ps
    evan = kp > k0

    # propagating form
    e = np.exp(2j * kz * d)
    den_p = np.imag(1j * e * x / (2 * kz))
    cross_p = np.imag(dr * e / kz)
    pp_p = np.imag(refl.r_pp * e)
    z_p = np.imag(sr * e)

    # evanescent form: k_z = i kappa, e real
    kappa = np.abs(kz)
    with np.errstate(divide="ignore", invalid="ignore"):
        ev = np.exp(-2 * kappa * d)
        den_e = ev * np.imag(x) / (2 * kappa)
        cross_e = -ev * np.real(dr) / kappa
    pp_e = ev * np.imag(refl.r_pp)
    z_e = ev * np.imag(sr)

    den = np.where(evan, den_e, den_p)
    cross = np.where(evan, cross_e, cross_p)
    pp = np.where(evan, pp_e, pp_p)
    zz = np.where(evan, z_e, z_p)
    if np.any(den == 0) or not np.all(np.isfinite(den)):
        raise UndefinedSpinError("photon-number weight vanishes for at least one mode")
    nx = kp / (2 * k0) * c * cross + kp / k0**2 * s * pp
    ny = kp / (2 * k0) * s * cross - kp / k0**2 * c * pp
    nz = -zz / (2 * k0)
    return np.stack([nx / den, ny / den, nz / den], axis=-1)


def vacuum_rotation_terms(particle: ParticleSpec, thermal: ThermalState, omega, Omega):
    """Free-space torque densities on a particle spinning at ``Omega`` about x.

    Returns ``(from environment fluctuations, from particle fluctuations)``,
    each as one-sided densities (see :func:`rotating_torque_x`).
    """
    omega = np.asarray(omega, dtype=float)
    wm, wp = omega - Omega, omega + Omega
    da = np.imag(polarizability(particle, wm) - polarizability(particle, wp))
    env = 2 * omega**2 / (3 * np.pi * C_LIGHT**3) * da * theta(omega, thermal.T_e)
    own = 2 * (wm**3 - wp**3) / (3 * np.pi * omega * C_LIGHT**3) * np.imag(polarizability(particle, omega)) * theta(omega, thermal.T_p)
    return env, own


def _rotating_from_kernels(particle, thermal, omega, Omega, kern0, kern_m, kern_p):
    """Half of the one-sided rotating-frame torque density, from kernel integrals.

    ``kern*`` are the integrated :func:`mode_kernels` at omega, omega - Omega
    and omega + Omega.  ``k0^2 * kernel[4]`` is ``eps0 Re(G^t_yz - G^t_zy)``,
    ``k0^2 * kernel[10/11]`` is ``eps0 Im G^t_yy / zz``.
    """
    wm, wp = omega - Omega, omega + Omega
    k2, k2m, k2p = (omega / C_LIGHT) ** 2, (wm / C_LIGHT) ** 2, (wp / C_LIGHT) ** 2
    a0 = polarizability(particle, omega)
    am, ap = polarizability(particle, wm), polarizability(particle, wp)
    th_e, th_p = theta(omega, thermal.T_e), theta(omega, thermal.T_p)

    anti0 = k2 * kern0[4]
    m_env = th_e / omega * (np.imag(am + ap) * anti0 + k2 * (kern0[10] + kern0[11]) * np.imag(am - ap))
    m_own = (
        th_p
        / omega
        * np.imag(a0)
        * (
            k2m * kern_m[11]
            - k2p * kern_p[11]
            + k2m * kern_m[10]
            - k2p * kern_p[10]
            - k2p * kern_p[4]
            - k2m * kern_m[4]
        )
    )
    v_env, v_own = vacuum_rotation_terms(particle, thermal, omega, Omega)
    return 0.5 * (m_env + m_own + v_env + v_own)


def rotating_torque_x(substrate, particle, thermal, d, omega, Omega, quad_cfg=None):
    """Torque density about x on a particle spinning at ``Omega`` about x (N m s).

    Rotational Doppler shifts move the particle's polarizability and the
    Green's function to ``omega +/- Omega``.  The one-sided rotating-frame
    expression counts positive and negative frequencies together, so half
    of it is returned, matching the convention of :func:`torque_density`.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    _check_geometry(d, omega)
    if np.any(np.abs(Omega) >= omega):
        raise ConfigurationError("|Omega| must be below every omega", "Omega")
    cfg = quad_cfg or QuadConfig()
    out = np.zeros(omega.size)
    for i, w in enumerate(omega):
        k0 = _kernel_integral(substrate, w, d, cfg)[0]
        if Omega == 0:
            km = kp = k0
        else:
            km = _kernel_integral(substrate, w - Omega, d, cfg)[0]
            kp = _kernel_integral(substrate, w + Omega, d, cfg)[0]
        out[i] = _rotating_from_kernels(particle, thermal, w, Omega, k0, km, kp)
    return out


@dataclass
class WrenchTotals:
    """Frequency-integrated power (W), force (N) and torque (N m) with error estimates."""

    P_total: float
    F_total: np.ndarray
    M_total: np.ndarray
    P_error: float
    F_error: np.ndarray
    M_error: np.ndarray
    window: tuple
    zero_point_fz: bool = False
    M_x_rotating: float | None = None
    Omega: float | None = None
    tail: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def as_dict(self):
        out = {
            "P_W": self.P_total,
            "Fx_N": self.F_total[0],
            "Fy_N": self.F_total[1],
            "Fz_N": self.F_total[2],
            "Mx_Nm": self.M_total[0],
            "My_Nm": self.M_total[1],
            "Mz_Nm": self.M_total[2],
            "err_P": self.P_error,
            "err_Fx": self.F_error[0],
            "err_Fy": self.F_error[1],
            "err_Fz": self.F_error[2],
            "err_Mx": self.M_error[0],
            "err_My": self.M_error[1],
            "err_Mz": self.M_error[2],
            "omega_min": self.window[0],
            "omega_max": self.window[1],
            "Fz_includes_zero_point": self.zero_point_fz,
        }
        if self.M_x_rotating is not None:
            out["Omega_rad_s"] = self.Omega
            out["Mx_rotating_Nm"] = self.M_x_rotating
        return {k: (float(v) if isinstance(v, (np.floating, float, int)) and not isinstance(v, bool) else v) for k, v in out.items()}


def integrate_totals(
    substrate: Substrate,
    particle: ParticleSpec,
    thermal: ThermalState,
    d: float,
    omega_window=(1e10, 6e14),
    quad_cfg: QuadConfig | None = None,
    seeds=None,
    components=None,
    zero_point_fz: bool = False,
    Omega: float | None = None,
    inner_factor: float = 0.01,
) -> WrenchTotals:
    """Totals ``(1/pi) int Q(omega) domega`` of the seven densities over ``omega_window``.

    Parameters
    ----------
    seeds
        Resonance frequencies used as initial breakpoints; by default taken
        from :func:`fluxtorque.dispersion.seed_frequencies`.
    components
        Subset of :data:`COMPONENTS` that must be computed.  Components whose
        prefactor vanishes identically (every one except F_z when
        ``T_p == T_e``) are returned as exact zeros without quadrature.
    Omega
        If given, the rotating-frame torque about x at this spin rate is
        integrated on the same frequency nodes (``M_x_rotating``).
    inner_factor
        The wavevector integrals run at ``inner_factor * rel_tol`` so that
        their noise does not stall the frequency refinement.

    Raises
    ------
    TailDominatedError
        If the densities at the window edges imply weight outside it.
    """
    _check_geometry(d, 1.0)
    cfg = quad_cfg or QuadConfig(rel_tol=1e-4)
    wanted = list(COMPONENTS if components is None else components)
    for name in wanted:
        if name not in COMPONENTS:
            raise ConfigurationError(f"unknown component {name!r}", "components")
    equilibrium = thermal.T_p == thermal.T_e
    active = [n for n in wanted if not (equilibrium and n != "Fz")]
    if Omega is not None and Omega != 0 and abs(Omega) >= omega_window[0]:
        raise ConfigurationError("|Omega| must be below the lower frequency limit", "Omega")
    if not active and Omega is None:
        z = np.zeros(3)
        return WrenchTotals(0.0, z.copy(), z.copy(), 0.0, z.copy(), z.copy(), tuple(omega_window), zero_point_fz)

    if seeds is None:
        from .dispersion import seed_frequencies

        seeds = seed_frequencies(substrate, particle) if isinstance(substrate, GyrotropicModel) else [
            o[1] for o in particle.oscillators
        ]

    with_rot = Omega is not None
    inner = replace(cfg, rel_tol=cfg.rel_tol * inner_factor)

    def density(omegas):
        n = _N_DENS + int(with_rot)
        out = np.zeros((n, omegas.size))
        mags = np.zeros_like(out)
        pre = _prefactors(particle, thermal, omegas, zero_point_fz)
        for i, w in enumerate(omegas):
            if not np.any(pre[:, i]) and not with_rot:
                continue
            kern, kerr, kabs = _kernel_integral(substrate, w, d, inner)
            dens, _, _ = _assemble(pre[:, i], kern, kerr, w, zero_point_fz)
            out[:_N_DENS, i] = dens
            mags[:_N_DENS, i] = np.abs(pre[:, i]) * kabs[:_N_DENS]
            mags[0, i] += np.abs(pre[0, i]) * w / (np.pi * C_LIGHT)
            if with_rot:
                if Omega == 0:
                    km = kp = kern
                else:
                    km = _kernel_integral(substrate, w - Omega, d, inner)[0]
                    kp = _kernel_integral(substrate, w + Omega, d, inner)[0]
                out[_N_DENS, i] = _rotating_from_kernels(particle, thermal, w, Omega, kern, km, kp)
                mags[_N_DENS, i] = abs(out[_N_DENS, i]) + mags[4, i]
        return out, mags

    checked = [COMPONENTS.index(n) for n in active] + ([_N_DENS] if with_rot else [])
    T_max = max(thermal.T_p, thermal.T_e)
    decay = K_B * T_max / hbar if T_max > 0 else None
    res = integrate_omega(density, omega_window, cfg, seeds=seeds, checked=checked, upper_decay=decay, require_tail=True)
    val = res.value / np.pi
    err = res.error / np.pi
    for i, name in enumerate(COMPONENTS):
        if name not in active:
            val[i], err[i] = 0.0, 0.0
    if zero_point_fz and "Fz" in active:
        warnings.warn("F_z includes zero-point terms over a finite window only; this is not the full Casimir-Polder force")
    return WrenchTotals(
        P_total=float(val[0]),
        F_total=val[1:4].copy(),
        M_total=val[4:7].copy(),
        P_error=float(err[0]),
        F_error=err[1:4].copy(),
        M_error=err[4:7].copy(),
        window=tuple(omega_window),
        zero_point_fz=zero_point_fz,
        M_x_rotating=float(val[_N_DENS]) if with_rot else None,
        Omega=Omega,
        tail=res.tail / np.pi,
        info={"n_panels": res.n_panels},
    )


def write_spectrum_csv(result: SpectralResult, path):
    """Write ``omega_rad_s, P, Fx, ..., Mz, err_P, ..., err_Mz`` rows."""
    header = ["omega_rad_s", *COMPONENTS, *("err_" + c for c in COMPONENTS)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, om in enumerate(result.omega):
            w.writerow([repr(float(om))] + [repr(float(v)) for v in result.densities[:, i]] + [repr(float(v)) for v in result.errors[:, i]])
