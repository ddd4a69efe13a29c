"""Reflected dyadic Green's function at the particle position.

The tensor is only ever exposed as a per-mode integrand: every downstream
quantity weights it differently, and the full Green's function at the
particle is

    G_ref = int dk_par dphi  k_par / (2 pi)^2  * greens_reflected_integrand(...)
"""

from __future__ import annotations

import numpy as np
from scipy.constants import c as C_LIGHT

from .errors import ConfigurationError, LightLineError
from .fresnel import ModeCoords, ReflectionMatrix, polarization_vectors

__all__ = ["greens_reflected_integrand", "greens_trace", "vacuum_ldos_factor"]


def _phase(mode: ModeCoords, d):
    if np.any(~(np.asarray(d) > 0)):
        raise ConfigurationError("particle height must be > 0", "d")
    if np.any(mode.k_z == 0):
        raise LightLineError("k_z = 0: reflected Green's function integrand is singular on the light line")
    return 1j * np.exp(2j * mode.k_z * d) / (2 * mode.k_z)


def greens_reflected_integrand(refl: ReflectionMatrix, mode: ModeCoords, d: float) -> np.ndarray:
    """Per-mode reflected Green's tensor, shape ``mode.shape + (3, 3)``.

    ``(i / 2k_z) e^{2 i k_z d} [(r_ss e_s + r_ps e_p+) e_s^T + (r_sp e_s + r_pp e_p+) e_p-^T]``
    with the polarization vectors from :func:`fluxtorque.fresnel.polarization_vectors`.
    """
    pref = _phase(mode, d)
    e_s, e_pp, e_pm = polarization_vectors(mode)
    up_s = refl.r_ss[..., None] * e_s + refl.r_ps[..., None] * e_pp
    up_p = refl.r_sp[..., None] * e_s + refl.r_pp[..., None] * e_pp
    tensor = up_s[..., :, None] * e_s[..., None, :] + up_p[..., :, None] * e_pm[..., None, :]
    return pref[..., None, None] * tensor


def greens_trace(refl: ReflectionMatrix, mode: ModeCoords, d: float):
    """Trace of :func:`greens_reflected_integrand` in closed form."""
    pref = _phase(mode, d)
    return pref * (refl.r_ss + refl.r_pp * (2 * mode.k_par**2 / mode.k0**2 - 1))


def vacuum_ldos_factor(omega):
    """``omega^3 / (pi c^3)``: the free-space term of the power spectrum per unit Im(alpha) dTheta."""
    omega = np.asarray(omega, dtype=float)
    return omega**3 / (np.pi * C_LIGHT**3)
