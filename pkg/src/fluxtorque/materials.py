"""Material response: gyrotropic substrate tensors and particle polarizabilities.

Conventions: fields vary as ``exp(-i omega t)``, so passive media have
``Im eps > 0``. All frequencies are angular (rad/s), all quantities SI.

The substrate is a magnetized free-carrier plasma (electrons) on top of a
background of Lorentz phonon terms.  With a static field ``B = |B| b``
the free-carrier current obeys

    (gamma - i omega) J - omega_c b x J = eps0 omega_p^2 E

which gives ``eps = eps_bound I + (i omega_p^2 / omega) [(gamma - i omega) I - omega_c [b]x]^-1``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from typing import Mapping, Union

import numpy as np
from scipy.constants import elementary_charge, electron_mass, epsilon_0

from .errors import ConfigurationError, ResonanceSingularityError

__all__ = [
    "GyrotropicModel",
    "HydrodynamicModel",
    "ParticleSpec",
    "epsilon_substrate",
    "epsilon_particle",
    "polarizability",
    "plasma_frequency",
    "cyclotron_frequency",
    "load_material_db",
    "save_material_db",
    "default_material_db",
    "DEFAULT_DB_PATH",
]

_UNIT_TOL = 1e-12


def plasma_frequency(carrier_density, effective_mass_ratio):
    """Unscreened plasma frequency sqrt(n e^2 / (m* eps0)) in rad/s.

    ``carrier_density`` in m^-3, ``effective_mass_ratio`` = m*/m_e.
    """
    m_eff = effective_mass_ratio * electron_mass
    return math.sqrt(carrier_density * elementary_charge**2 / (m_eff * epsilon_0))


def cyclotron_frequency(b_magnitude, effective_mass_ratio):
    """Electron cyclotron frequency e|B|/m* in rad/s."""
    return elementary_charge * abs(b_magnitude) / (effective_mass_ratio * electron_mass)


def _as_phonons(terms):
    out = []
    for t in terms:
        if isinstance(t, Mapping):
            t = (t["strength"], t["resonance"], t["damping"])
        s, w0, g = (float(x) for x in t)
        out.append((s, w0, g))
    return tuple(out)


@dataclass(frozen=True)
class GyrotropicModel:
    """Local magneto-optical permittivity model of the substrate.

    ``plasma_freq`` is the bare (unscreened) plasma frequency, so the free
    carrier term is ``-plasma_freq**2 / (omega (omega + i drude_damping))``
    at zero field.  Each phonon term is ``(strength, resonance, damping)``
    and contributes ``strength * w0**2 / (w0**2 - omega**2 - i damping omega)``.
    """

    eps_inf: float
    plasma_freq: float
    drude_damping: float
    cyclotron_freq: float = 0.0
    phonon_terms: tuple = ()
    b_direction: tuple = (1.0, 0.0, 0.0)
    effective_mass_ratio: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "phonon_terms", _as_phonons(self.phonon_terms))
        b = tuple(float(x) for x in self.b_direction)
        object.__setattr__(self, "b_direction", b)
        if len(b) != 3 or abs(math.sqrt(sum(x * x for x in b)) - 1.0) > _UNIT_TOL:
            raise ConfigurationError(f"must be a unit 3-vector, got {b}", "b_direction")
        if self.plasma_freq < 0:
            raise ConfigurationError("must be >= 0", "plasma_freq")
        if self.drude_damping < 0:
            raise ConfigurationError("must be >= 0", "drude_damping")
        if self.cyclotron_freq < 0:
            raise ConfigurationError("must be >= 0 (direction lives in b_direction)", "cyclotron_freq")
        for i, (s, w0, g) in enumerate(self.phonon_terms):
            if g < 0:
                raise ConfigurationError("must be >= 0", f"phonon_terms[{i}].damping")
            if w0 <= 0:
                raise ConfigurationError("must be > 0", f"phonon_terms[{i}].resonance")
        if self.effective_mass_ratio is not None and self.effective_mass_ratio <= 0:
            raise ConfigurationError("must be > 0", "effective_mass_ratio")

    def with_field(self, b_field):
        """Return a copy magnetized by the field vector ``b_field`` (tesla).

        The cyclotron frequency is re-derived from the stored effective mass,
        so sweeps over B stay consistent.
        """
        if self.effective_mass_ratio is None:
            raise ConfigurationError("needed to derive the cyclotron frequency", "effective_mass_ratio")
        b = np.asarray(b_field, dtype=float)
        mag = float(np.linalg.norm(b))
        if mag == 0.0:
            return replace(self, cyclotron_freq=0.0)
        direction = tuple(float(x) for x in b / mag)
        return replace(
            self,
            cyclotron_freq=cyclotron_frequency(mag, self.effective_mass_ratio),
            b_direction=direction,
        )

    def reversed_field(self):
        """Same model with the static field flipped (B -> -B)."""
        return replace(self, b_direction=tuple(-x for x in self.b_direction))

    @property
    def is_gyrotropic(self):
        return self.cyclotron_freq > 0.0

    def bound_permittivity(self, omega):
        """Scalar background (eps_inf + phonons) permittivity."""
        omega = np.asarray(omega, dtype=float)
        eps = np.full(omega.shape, self.eps_inf, dtype=complex)
        for s, w0, g in self.phonon_terms:
            eps = eps + s * w0**2 / (w0**2 - omega**2 - 1j * g * omega)
        return eps


@dataclass(frozen=True)
class HydrodynamicModel(GyrotropicModel):
    """Gyrotropic model plus a hydrodynamic pressure term for the free carriers.

    ``beta`` (m/s) sets the longitudinal plasma wave speed; ``beta == 0``
    reduces to the local model.
    """

    beta: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if self.beta < 0:
            raise ConfigurationError("must be >= 0", "beta")

    def local(self):
        """Drop the nonlocal term."""
        kw = {f.name: getattr(self, f.name) for f in fields(GyrotropicModel)}
        return GyrotropicModel(**kw)


@dataclass(frozen=True)
class ParticleSpec:
    """Isotropic spherical particle with a Lorentz-oscillator permittivity.

    ``oscillators`` holds ``(strength, resonance, damping)`` triples; the
    permittivity is ``eps_inf + sum(S w0^2 / (w0^2 - w^2 - i g w))``.
    ``fixed_alpha`` (m^3), when set, replaces the Clausius-Mossotti
    polarizability by a frequency-independent value, a common idealization
    for isolating substrate features in spectra.
    """

    radius: float
    eps_inf: float = 1.0
    oscillators: tuple = ()
    mass_density: float = 1000.0
    temperature: float = 300.0
    fixed_alpha: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "oscillators", _as_phonons(self.oscillators))
        if not self.radius > 0:
            raise ConfigurationError("must be > 0", "radius")
        if self.mass_density < 0:
            raise ConfigurationError("must be >= 0", "mass_density")
        if self.temperature < 0:
            raise ConfigurationError("must be >= 0", "temperature")
        for i, (s, w0, g) in enumerate(self.oscillators):
            if g < 0:
                raise ConfigurationError("must be >= 0", f"oscillators[{i}].damping")
            if s < 0:
                # negative strength would make Im eps < 0 somewhere
                raise ConfigurationError("must be >= 0 for a passive medium", f"oscillators[{i}].strength")
            if w0 <= 0:
                raise ConfigurationError("must be > 0", f"oscillators[{i}].resonance")
        if self.fixed_alpha is not None:
            object.__setattr__(self, "fixed_alpha", complex(self.fixed_alpha))
            if self.fixed_alpha.imag < 0:
                raise ConfigurationError("imaginary part must be >= 0 for a passive particle", "fixed_alpha")

    @property
    def volume(self):
        return 4.0 / 3.0 * math.pi * self.radius**3

    @property
    def mass(self):
        return self.volume * self.mass_density


def _check_omega(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(~(omega > 0)):
        raise ConfigurationError("angular frequency must be > 0", "omega")
    return omega


def _cross_matrix(b):
    bx, by, bz = b
    return np.array([[0.0, -bz, by], [bz, 0.0, -bx], [-by, bx, 0.0]])


def _substrate_tensor(model, omega):
    """Permittivity tensor without the omega > 0 guard (used for the reality check)."""
    omega = np.asarray(omega, dtype=float)
    eps_b = model.bound_permittivity(omega)
    b = np.asarray(model.b_direction)
    eye = np.eye(3)
    out = eps_b[..., None, None] * eye
    if model.plasma_freq == 0.0:
        return out
    g = model.drude_damping - 1j * omega
    c = model.cyclotron_freq
    # closed-form inverse of g I - c [b]x, using [b]x^2 = b b^T - I
    inv = (
        (g**2)[..., None, None] * eye
        + (g * c)[..., None, None] * _cross_matrix(b)
        + (c**2) * np.outer(b, b)
    ) / (g * (g**2 + c**2))[..., None, None]
    return out + (1j * model.plasma_freq**2 / omega)[..., None, None] * inv


def epsilon_substrate(model: GyrotropicModel, omega) -> np.ndarray:
    """Local permittivity tensor of the substrate in lab axes.

    Accepts scalar or array ``omega``; the result has shape ``omega.shape + (3, 3)``.
    """
    return _substrate_tensor(model, _check_omega(omega))


def epsilon_particle(spec: ParticleSpec, omega):
    """Lorentz-oscillator permittivity of the particle material."""
    omega = _check_omega(omega)
    eps = np.full(omega.shape, spec.eps_inf, dtype=complex)
    for s, w0, g in spec.oscillators:
        if s == 0.0:
            continue
        denom = w0**2 - omega**2 - 1j * g * omega
        if np.any(denom == 0):
            raise ResonanceSingularityError(f"undamped oscillator evaluated on its resonance {w0}")
        eps = eps + s * w0**2 / denom
    return eps if eps.ndim else complex(eps)


def polarizability(spec: ParticleSpec, omega):
    """Clausius-Mossotti polarizability 4 pi R^3 (eps-1)/(eps+2), in m^3."""
    if spec.fixed_alpha is not None:
        omega = _check_omega(omega)
        alpha = np.full(omega.shape, spec.fixed_alpha, dtype=complex)
        return alpha if alpha.ndim else complex(alpha)
    eps = np.asarray(epsilon_particle(spec, omega))
    denom = eps + 2.0
    if np.any(np.abs(denom) < 1e-12):
        raise ResonanceSingularityError(f"eps within 1e-12 of -2 (lossless Frohlich pole) for radius {spec.radius}")
    alpha = 4.0 * math.pi * spec.radius**3 * (eps - 1.0) / denom
    return alpha if alpha.ndim else complex(alpha)


# --- material database -----------------------------------------------------

DEFAULT_DB_PATH = resources.files("fluxtorque") / "data" / "materials.json"

Material = Union[GyrotropicModel, ParticleSpec]


def _require(entry, key, path):
    if key not in entry:
        raise ConfigurationError("missing required key", f"{path}.{key}")
    return entry[key]


def _number(value, path, *, minimum=None, strict=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"expected a number, got {value!r}", path)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigurationError("must be finite", path)
    if minimum is not None and (value <= minimum if strict else value < minimum):
        raise ConfigurationError(f"must be {'>' if strict else '>='} {minimum}", path)
    return value


def _oscillator_list(items, path):
    if not isinstance(items, list):
        raise ConfigurationError("expected a list", path)
    out = []
    for i, item in enumerate(items):
        p = f"{path}[{i}]"
        if not isinstance(item, Mapping):
            raise ConfigurationError("expected an object with strength/resonance/damping", p)
        out.append(
            (
                _number(_require(item, "strength", p), f"{p}.strength", minimum=0.0),
                _number(_require(item, "resonance", p), f"{p}.resonance", minimum=0.0, strict=True),
                _number(_require(item, "damping", p), f"{p}.damping", minimum=0.0),
            )
        )
    return tuple(out)


def substrate_from_dict(entry, path="substrate"):
    """Build a substrate model from its JSON form (see docs/materials.md)."""
    if not isinstance(entry, Mapping):
        raise ConfigurationError("expected an object", path)
    m_ratio = entry.get("effective_mass_ratio")
    if m_ratio is not None:
        m_ratio = _number(m_ratio, f"{path}.effective_mass_ratio", minimum=0.0, strict=True)
    if "plasma_freq" in entry:
        wp = _number(entry["plasma_freq"], f"{path}.plasma_freq", minimum=0.0)
    else:
        n = _number(_require(entry, "carrier_density", path), f"{path}.carrier_density", minimum=0.0)
        if m_ratio is None:
            raise ConfigurationError("required with carrier_density", f"{path}.effective_mass_ratio")
        wp = plasma_frequency(n, m_ratio)
    kw = dict(
        eps_inf=_number(_require(entry, "eps_inf", path), f"{path}.eps_inf"),
        plasma_freq=wp,
        drude_damping=_number(_require(entry, "drude_damping", path), f"{path}.drude_damping", minimum=0.0),
        phonon_terms=_oscillator_list(entry.get("phonon_terms", []), f"{path}.phonon_terms"),
        effective_mass_ratio=m_ratio,
    )
    beta = entry.get("beta")
    if beta is not None:
        model = HydrodynamicModel(beta=_number(beta, f"{path}.beta", minimum=0.0), **kw)
    else:
        model = GyrotropicModel(**kw)
    b_field = entry.get("b_field", [0.0, 0.0, 0.0])
    if not isinstance(b_field, list) or len(b_field) != 3:
        raise ConfigurationError("expected a 3-vector in tesla", f"{path}.b_field")
    b_field = [_number(x, f"{path}.b_field[{i}]") for i, x in enumerate(b_field)]
    if any(b_field):
        model = model.with_field(b_field)
    return model


def particle_from_dict(entry, path="particle"):
    """Build a :class:`ParticleSpec` from its JSON form."""
    if not isinstance(entry, Mapping):
        raise ConfigurationError("expected an object", path)
    return ParticleSpec(
        radius=_number(_require(entry, "radius", path), f"{path}.radius", minimum=0.0, strict=True),
        eps_inf=_number(_require(entry, "eps_inf", path), f"{path}.eps_inf"),
        oscillators=_oscillator_list(entry.get("oscillators", []), f"{path}.oscillators"),
        mass_density=_number(_require(entry, "mass_density", path), f"{path}.mass_density", minimum=0.0, strict=True),
        temperature=_number(entry.get("temperature", 300.0), f"{path}.temperature", minimum=0.0),
        fixed_alpha=_fixed_alpha(entry.get("fixed_alpha"), f"{path}.fixed_alpha"),
    )


def _fixed_alpha(value, path):
    if value is None:
        return None
    if not isinstance(value, Mapping):
        raise ConfigurationError("expected {\"real\": ..., \"imag\": ...} in m^3", path)
    return complex(_number(value.get("real", 0.0), f"{path}.real"), _number(_require(value, "imag", path), f"{path}.imag", minimum=0.0))


def substrate_to_dict(model: GyrotropicModel):
    out = {
        "eps_inf": model.eps_inf,
        "plasma_freq": model.plasma_freq,
        "drude_damping": model.drude_damping,
        "phonon_terms": [{"strength": s, "resonance": w, "damping": g} for s, w, g in model.phonon_terms],
    }
    if model.effective_mass_ratio is not None:
        out["effective_mass_ratio"] = model.effective_mass_ratio
        if model.cyclotron_freq > 0:
            mag = model.cyclotron_freq * model.effective_mass_ratio * electron_mass / elementary_charge
            out["b_field"] = [mag * x for x in model.b_direction]
    if isinstance(model, HydrodynamicModel):
        out["beta"] = model.beta
    return out


def particle_to_dict(spec: ParticleSpec):
    out = {
        "radius": spec.radius,
        "eps_inf": spec.eps_inf,
        "oscillators": [{"strength": s, "resonance": w, "damping": g} for s, w, g in spec.oscillators],
        "mass_density": spec.mass_density,
        "temperature": spec.temperature,
    }
    if spec.fixed_alpha is not None:
        out["fixed_alpha"] = {"real": spec.fixed_alpha.real, "imag": spec.fixed_alpha.imag}
    return out


def _parse_db(doc, source):
    if not isinstance(doc, Mapping):
        raise ConfigurationError("top level must be an object", source)
    unknown = set(doc) - {"substrates", "particles", "_comment"}
    if unknown:
        raise ConfigurationError(f"unknown top-level keys {sorted(unknown)}", source)
    out: dict[str, Material] = {}
    for section, builder in (("substrates", substrate_from_dict), ("particles", particle_from_dict)):
        entries = doc.get(section, {})
        if not isinstance(entries, Mapping):
            raise ConfigurationError("expected an object keyed by material name", section)
        for name, entry in entries.items():
            if name in out:
                raise ConfigurationError("duplicate material name", f"{section}.{name}")
            out[name] = builder(entry, f"{section}.{name}")
    return out


def load_material_db(path) -> dict[str, Material]:
    """Load and validate a material database JSON file.

    An empty file (or ``{}``) yields an empty map.  Any invariant violation
    raises :class:`ConfigurationError` naming the field path.
    """
    text = open(path, encoding="utf-8").read() if not hasattr(path, "read_text") else path.read_text("utf-8")
    if not text.strip():
        return {}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc}", os.fspath(path) if not hasattr(path, "read_text") else str(path)) from exc
    return _parse_db(doc, str(path))


def dump_material_db(materials: Mapping[str, Material]) -> str:
    doc = {"substrates": {}, "particles": {}}
    for name, m in materials.items():
        if isinstance(m, ParticleSpec):
            doc["particles"][name] = particle_to_dict(m)
        else:
            doc["substrates"][name] = substrate_to_dict(m)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def save_material_db(path, materials: Mapping[str, Material]) -> None:
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(dump_material_db(materials))
    os.replace(tmp, path)


def default_material_db() -> dict[str, Material]:
    """The shipped database (InSb substrate plus the particle library)."""
    return load_material_db(DEFAULT_DB_PATH)
