"""Nonequilibrium fluctuation-induced power, force and torque on a dipolar
particle above a magnetized (gyrotropic) half-space.

Modules
-------
materials   permittivity tensors, particle polarizabilities, material database
fresnel     reflection matrix of the substrate (local and hydrodynamic models)
greens      reflected dyadic Green's function integrand
quadrature  adaptive wavevector / frequency integration
spectra     spectral densities, photon spin, rotating-frame torque, totals
dispersion  surface polariton tracing and frequency seeds
dynamics    gas damping and Langevin spin dynamics
cli         batch front end with result caching
"""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .materials import (  # noqa: E402
    GyrotropicModel,
    HydrodynamicModel,
    ParticleSpec,
    default_material_db,
    epsilon_particle,
    epsilon_substrate,
    load_material_db,
    polarizability,
)
from .fresnel import ModeCoords, ReflectionMatrix, mode_coords, reflect, reflect_local, reflect_nonlocal  # noqa: E402
from .quadrature import QuadConfig  # noqa: E402
from .spectra import ThermalState, integrate_totals, spectral_density  # noqa: E402

__all__ = [
    "GyrotropicModel",
    "HydrodynamicModel",
    "ModeCoords",
    "ParticleSpec",
    "QuadConfig",
    "ReflectionMatrix",
    "ThermalState",
    "default_material_db",
    "epsilon_particle",
    "epsilon_substrate",
    "integrate_totals",
    "load_material_db",
    "mode_coords",
    "polarizability",
    "reflect",
    "reflect_local",
    "reflect_nonlocal",
    "spectral_density",
]
