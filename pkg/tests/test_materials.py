import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.constants import elementary_charge, electron_mass

from fluxtorque.errors import ConfigurationError, ResonanceSingularityError
from fluxtorque.materials import (
    GyrotropicModel,
    HydrodynamicModel,
    ParticleSpec,
    _substrate_tensor,
    cyclotron_frequency,
    dump_material_db,
    epsilon_particle,
    epsilon_substrate,
    load_material_db,
    polarizability,
    save_material_db,
)

R200 = 200e-9


def magneto_drude_z(omega, eps_b, wp, gamma, wc):
    """Textbook electron magnetoplasma tensor for B along +z, exp(-i w t)."""
    w = omega + 1j * gamma
    den = omega * (w**2 - wc**2)
    exx = eps_b - wp**2 * w / den
    exy = 1j * wp**2 * wc / den
    ezz = eps_b - wp**2 / (omega * w)
    return np.array([[exx, exy, 0], [-exy, exx, 0], [0, 0, ezz]])


def _unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def _model(b=(1.0, 0.0, 0.0), wc=2e12):
    return GyrotropicModel(
        eps_inf=15.7,
        plasma_freq=3.9e13,
        drude_damping=3.4e12,
        cyclotron_freq=wc,
        phonon_terms=((2.2, 3.39e13, 5.65e11),),
        b_direction=tuple(_unit(b)),
        effective_mass_ratio=0.022,
    )


class TestSubstrateTensor:
    def test_zero_field_is_scalar(self):
        eps = epsilon_substrate(_model(wc=0.0), np.array([1e13, 3e13, 7e13]))
        off = eps - np.einsum("...ii->...i", eps)[..., None] * np.eye(3)
        assert np.all(off == 0)
        assert np.allclose(eps[..., 0, 0], eps[..., 2, 2], rtol=0, atol=0)

    def test_high_frequency_limit(self):
        m = _model()
        eps = epsilon_substrate(m, 1e18)
        assert np.allclose(eps, m.eps_inf * np.eye(3), rtol=1e-6, atol=1e-6 * m.eps_inf)

    def test_onsager_example(self):
        m = _model(b=(0.3, -0.5, 0.8))
        w = 2.1e13
        a = epsilon_substrate(m, w)
        b = epsilon_substrate(m.reversed_field(), w)
        assert np.allclose(a.T, b, rtol=1e-12, atol=0)

    def test_magneto_drude_oracle_faraday(self):
        m = _model(b=(0, 0, 1), wc=5e12)
        w = m.plasma_freq / math.sqrt(m.eps_inf)
        eps_b = m.eps_inf + 2.2 * 3.39e13**2 / (3.39e13**2 - w**2 - 1j * 5.65e11 * w)
        ref = magneto_drude_z(w, eps_b, m.plasma_freq, m.drude_damping, m.cyclotron_freq)
        assert np.allclose(epsilon_substrate(m, w), ref, rtol=1e-12, atol=1e-12 * abs(ref).max())

    def test_magneto_drude_oracle_voigt(self):
        # B along x: the z-axis oracle with axes relabelled (x, y, z) -> (y, z, x)
        m = _model(b=(1, 0, 0), wc=5e12)
        w = 1.1 * m.plasma_freq / math.sqrt(m.eps_inf)
        eps_b = m.bound_permittivity(w)
        ref_z = magneto_drude_z(w, eps_b, m.plasma_freq, m.drude_damping, m.cyclotron_freq)
        perm = [1, 2, 0]
        ref = np.zeros((3, 3), complex)
        for i in range(3):
            for j in range(3):
                ref[perm[i], perm[j]] = ref_z[i, j]
        assert np.allclose(epsilon_substrate(m, w), ref, rtol=1e-12, atol=1e-12 * abs(ref).max())

    def test_nonunit_direction_rejected(self):
        with pytest.raises(ConfigurationError) as exc:
            GyrotropicModel(15.7, 1e13, 1e12, 1e12, (), (1.0, 1.0, 0.0))
        assert exc.value.field == "b_direction"

    def test_cyclotron_from_field(self):
        m = _model().with_field([0.0, 2.0, 0.0])
        assert m.b_direction == (0.0, 1.0, 0.0)
        assert m.cyclotron_freq == pytest.approx(elementary_charge * 2.0 / (0.022 * electron_mass), rel=1e-14, abs=0)
        assert cyclotron_frequency(-2.0, 0.022) == m.cyclotron_freq

    def test_nonpositive_omega_rejected(self):
        with pytest.raises(ConfigurationError):
            epsilon_substrate(_model(), 0.0)


directions = st.tuples(*[st.floats(-1, 1) for _ in range(3)]).filter(lambda v: np.linalg.norm(v) > 0.1)
omegas = st.floats(1e11, 1e15)


@given(directions, omegas, st.floats(0, 3e13))
def test_onsager_property(b, w, wc):
    m = _model(b=b, wc=wc)
    a = epsilon_substrate(m, w)
    r = epsilon_substrate(m.reversed_field(), w)
    assert np.allclose(a.T, r, rtol=1e-12, atol=1e-12 * np.abs(a).max())


@given(directions, omegas, st.floats(0, 3e13))
def test_passivity_property(b, w, wc):
    eps = epsilon_substrate(_model(b=b, wc=wc), w)
    anti = (eps - eps.conj().T) / 2j
    assert np.linalg.eigvalsh(anti).min() >= -1e-12 * max(1.0, np.abs(eps).max())


@given(directions, omegas, st.floats(0, 3e13))
def test_reality_property(b, w, wc):
    m = _model(b=b, wc=wc)
    assert np.allclose(_substrate_tensor(m, -w), np.conj(_substrate_tensor(m, w)), rtol=1e-12, atol=0)


class TestParticle:
    def test_vacuum(self):
        assert epsilon_particle(ParticleSpec(R200), 1e13) == 1 + 0j

    def test_resonance_oracle(self):
        s, w0, g = 3.68, 3.089e13, 1.0e12
        spec = ParticleSpec(R200, eps_inf=2.22, oscillators=((s, w0, g),))
        # at w = w0 the Lorentz term is S w0^2 / (-i g w0) = i S w0 / g
        eps = epsilon_particle(spec, w0)
        assert eps.imag == pytest.approx(s * w0 / g, rel=1e-13, abs=0)
        assert eps.real == pytest.approx(2.22, rel=1e-12, abs=0)

    def test_high_frequency(self):
        spec = ParticleSpec(R200, eps_inf=2.22, oscillators=((3.68, 3.089e13, 1e12),))
        assert epsilon_particle(spec, 1e19) == pytest.approx(2.22, rel=1e-10, abs=0)

    def test_index_matched_alpha_is_zero(self):
        assert polarizability(ParticleSpec(R200), 1e13) == 0

    def test_conductor_limit(self):
        alpha = polarizability(ParticleSpec(R200, eps_inf=1e12), 1e13)
        assert alpha.real == pytest.approx(4 * math.pi * R200**3, rel=1e-11, abs=0)

    def test_clausius_mossotti_oracle(self):
        # eps_inf = -2 and S w0 / g = 0.1 give eps = -2 + 0.1i at w = w0
        w0, g = 3e13, 1e12
        spec = ParticleSpec(R200, eps_inf=-2.0, oscillators=((0.1 * g / w0, w0, g),))
        assert epsilon_particle(spec, w0) == pytest.approx(-2 + 0.1j, rel=1e-14, abs=0)
        expected = 4 * math.pi * R200**3 * (1 + 30j)
        assert polarizability(spec, w0) == pytest.approx(expected, rel=1e-12, abs=0)

    def test_froehlich_pole(self):
        with pytest.raises(ResonanceSingularityError):
            polarizability(ParticleSpec(R200, eps_inf=-2.0), 1e13)

    def test_fixed_alpha(self):
        spec = ParticleSpec(R200, fixed_alpha=1e-19j)
        assert np.all(polarizability(spec, np.array([1e13, 2e13])) == 1e-19j)
        with pytest.raises(ConfigurationError):
            ParticleSpec(R200, fixed_alpha=-1e-19j)

    def test_invariants(self):
        with pytest.raises(ConfigurationError):
            ParticleSpec(0.0)
        with pytest.raises(ConfigurationError):
            ParticleSpec(R200, oscillators=((1.0, 1e13, -1.0),))


@given(st.floats(0, 20), st.floats(1e12, 1e14), st.floats(0, 1e13), st.floats(1, 30), st.floats(1e11, 1e15))
def test_particle_passivity(s, w0, g, eps_inf, w):
    spec = ParticleSpec(R200, eps_inf=eps_inf, oscillators=((s, w0, g),))
    try:
        eps = epsilon_particle(spec, w)
        alpha = polarizability(spec, w)
    except ResonanceSingularityError:
        assert g == 0.0 or s > 0
        return
    assert np.isfinite(eps) and np.isfinite(alpha)
    assert eps.imag >= 0
    assert alpha.imag >= -1e-30


def test_undamped_resonance_hit():
    spec = ParticleSpec(R200, eps_inf=2.0, oscillators=((1.0, 1e13, 0.0),))
    with pytest.raises(ResonanceSingularityError):
        epsilon_particle(spec, 1e13)
    idle = ParticleSpec(R200, eps_inf=2.0, oscillators=((0.0, 1e13, 0.0),))
    assert epsilon_particle(idle, 1e13) == 2.0


class TestDatabase:
    def test_empty_file(self, tmp_path):
        p = tmp_path / "db.json"
        p.write_text("")
        assert load_material_db(p) == {}
        p.write_text("{}")
        assert load_material_db(p) == {}

    def test_round_trip_bit_identical(self, tmp_path):
        spec = ParticleSpec(
            R200, eps_inf=2.22, oscillators=((3.68, 3.089e13, 1.0e12),), mass_density=2165.0, temperature=310.0
        )
        p = tmp_path / "db.json"
        save_material_db(p, {"NaCl": spec})
        first = p.read_bytes()
        loaded = load_material_db(p)
        assert loaded == {"NaCl": spec}
        save_material_db(p, loaded)
        assert p.read_bytes() == first

    def test_substrate_round_trip(self, tmp_path, db):
        sub = db["InSb-n-doped"].with_field([0.0, 1.0, 0.0])
        p = tmp_path / "db.json"
        save_material_db(p, {"s": sub})
        back = load_material_db(p)["s"]
        assert isinstance(back, HydrodynamicModel)
        assert back.b_direction == pytest.approx(sub.b_direction, abs=1e-15)
        assert back.cyclotron_freq == pytest.approx(sub.cyclotron_freq, rel=1e-14, abs=0)

    def test_negative_damping_named_field(self, tmp_path):
        doc = {"particles": {"bad": {"radius": 2e-7, "eps_inf": 2.0, "mass_density": 2000.0,
                                     "oscillators": [{"strength": 1.0, "resonance": 3e13, "damping": -1.0}]}}}
        p = tmp_path / "db.json"
        p.write_text(json.dumps(doc))
        with pytest.raises(ConfigurationError) as exc:
            load_material_db(p)
        assert exc.value.field == "particles.bad.oscillators[0].damping"

    def test_shipped_database(self, db):
        assert {"InSb-n-doped", "NaCl", "AgBr", "PbTe", "CdTe", "AgCl", "ZnSe", "InAs"} <= set(db)
        assert json.loads(dump_material_db(db))["substrates"]["InSb-n-doped"]["beta"] > 0
        for name, m in db.items():
            if isinstance(m, ParticleSpec):
                assert m.radius == R200
