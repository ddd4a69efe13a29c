"""End-to-end acceptance criteria.

Each test carries ``@pytest.mark.acceptance(number, title)``; the terminal
summary prints one PASS/FAIL line per criterion, a criterion failing if any
of its tests fails.  The frequency-integrated totals are expensive (minutes
each on one core) and are computed once per configuration.
"""

import math
import time
from functools import lru_cache

import numpy as np
import pytest
from scipy.constants import c, hbar, k as k_B
from test_fresnel import hydrodynamic_mirror_rp, isotropic_fresnel, random_modes
from test_greens import image_dipole_greens, integrated_tensor, mirror
from test_quadrature import decay_closed_form, decay_integrand, lorentzian, lorentzian_closed
from test_spectra import image_trace, mirror_substrate

from fluxtorque.dispersion import trace_branch
from fluxtorque.dynamics import (
    GasEnvironment,
    damping_coefficient,
    gravity_weight,
    moment_of_inertia,
    simulate_langevin,
    steady_state_omega,
)
from fluxtorque.fresnel import mode_coords, reflect, reflect_nonlocal, reflect_tensor
from fluxtorque.materials import ParticleSpec, default_material_db
from fluxtorque.quadrature import QuadConfig, integrate_kphi, integrate_omega
from fluxtorque.spectra import (
    ThermalState,
    integrate_totals,
    mode_densities,
    mode_kernels,
    photon_spin,
    power_density,
    rotating_torque_x,
    theta,
    torque_density,
)

acceptance = pytest.mark.acceptance
GAS = GasEnvironment.from_torr(1e-5)


@lru_cache(maxsize=None)
def totals(particle, d_s, T_p, B, components=("Fy", "Mx"), Omega=None):
    db = default_material_db()
    sub = db["InSb-n-doped"].with_field([B, 0.0, 0.0])
    p = db[particle]
    return integrate_totals(sub, p, ThermalState(T_p, 300.0), p.radius + d_s, components=components, Omega=Omega)


# 1 -----------------------------------------------------------------------


@acceptance(1, "equilibrium null (exact)")
def test_equilibrium_null(db):
    base = db["InSb-n-doped"]
    subs = [base.with_field(b) for b in ([0, 0, 0], [1, 0, 0], [0.3, 0.4, 0.5])] + [base.local()]
    comps = ("P", "Fx", "Fy", "Mx", "My", "Mz")
    start = time.perf_counter()
    for sub in subs:
        for name in ("NaCl", "AgBr"):
            p = db[name]
            t = integrate_totals(sub, p, ThermalState(300.0, 300.0), p.radius + 1e-7, components=comps)
            assert t.P_total == 0.0
            assert t.F_total[0] == 0.0 and t.F_total[1] == 0.0
            assert np.all(t.M_total == 0.0)
    assert time.perf_counter() - start < 1.0


@acceptance(1, "equilibrium null (exact)")
def test_equilibrium_mode_densities_vanish(db, rng):
    m = random_modes(rng, 1000)
    sub = db["InSb-n-doped"].with_field([1.0, 0.0, 0.0])
    dens = mode_densities(sub, db["NaCl"], ThermalState(300.0, 300.0), m, 3e-7)
    assert np.all(dens[[0, 1, 2, 4, 5, 6]] == 0.0)


# 2 -----------------------------------------------------------------------


@acceptance(2, "reciprocity null at zero field")
def test_reciprocity_null():
    on = totals("NaCl", 100e-9, 310.0, 1.0)
    off = totals("NaCl", 100e-9, 310.0, 0.0)
    assert abs(off.F_total[1]) < 1e-6 * abs(on.F_total[1])
    assert abs(off.M_total[0]) < 1e-6 * abs(on.M_total[0])


# 3 -----------------------------------------------------------------------


@acceptance(3, "Voigt symmetry nulls")
def test_voigt_spectral_nulls(insb):
    cfg = QuadConfig(rel_tol=1e-6)
    d = 200e-9 + 100e-9

    def kern(m):
        return mode_kernels(reflect(insb, m), m, d, magnitudes=True)

    for w in np.linspace(1.5e13, 5e13, 20):
        res = integrate_kphi(kern, w, d, cfg, checked=range(7))
        scale = res.info["abs_integral"]
        for row in (1, 5, 6):  # F_x, M_y, M_z
            assert abs(res.value[row]) <= cfg.rel_tol * scale[row]
        assert abs(res.value[2]) > cfg.rel_tol * scale[2]  # F_y is genuinely nonzero


@acceptance(3, "Voigt symmetry nulls")
def test_voigt_cross_coefficients(insb, rng):
    m = random_modes(rng, 100)
    r = reflect(insb, m)
    assert np.max(np.abs(r.r_sp + r.r_ps)) < 1e-9


# 4 -----------------------------------------------------------------------


@acceptance(4, "momentum bookkeeping identity")
def test_momentum_identity(db, insb, rng):
    m = random_modes(rng, 1000, kmax=60.0)
    dens = mode_densities(insb, db["NaCl"], ThermalState(310.0, 300.0), m, 3e-7)
    photons = dens[0] / (hbar * m.omega)
    # the particle recoils against each emitted photon of in-plane momentum hbar k_par
    expected = -photons * hbar * m.k_par * np.sin(m.phi)
    np.testing.assert_allclose(dens[2], expected, rtol=1e-12, atol=1e-12 * np.abs(expected).max())


# 5 -----------------------------------------------------------------------


@acceptance(5, "photon spin asymptote")
def test_spin_asymptote(insb):
    phi = np.linspace(0, 2 * np.pi, 73)[:-1]
    for w in (2.0e13, 2.6e13, 4.0e13):
        m = mode_coords(w, 100 * w / c * np.ones_like(phi), phi)
        s = photon_spin(m, reflect(insb, m), 300e-9)
        target = np.stack([np.sin(phi), -np.cos(phi), 0 * phi], axis=-1)
        assert np.max(np.linalg.norm(s - target, axis=-1)) < 0.01


# 6 -----------------------------------------------------------------------


@acceptance(6, "nonreciprocal dispersion shifts")
@pytest.mark.parametrize("model", ["local", "nonlocal"])
def test_dispersion_ordering(insb, insb_b0, model):
    k = np.geomspace(1e6, 3e7, 12)
    red = trace_branch(insb, np.pi / 2, k, model=model)
    blue = trace_branch(insb, 3 * np.pi / 2, k, model=model)
    zero = trace_branch(insb_b0, np.pi / 2, k, model=model)
    assert len(red) == len(blue) == len(zero) == k.size
    for r, z, b in zip(red, zero, blue):
        assert r.omega < z.omega < b.omega


@acceptance(6, "nonreciprocal dispersion shifts")
def test_dispersion_large_k(insb):
    k = np.array([5e6, 1e7, 2e7])
    loc = [p.omega for p in trace_branch(insb, np.pi / 2, k, model="local")]
    non = [p.omega for p in trace_branch(insb, np.pi / 2, k, model="nonlocal")]
    assert abs(loc[2] - loc[1]) < 1e-3 * loc[1]
    assert non[0] < non[1] < non[2]
    assert non[2] - non[1] > 10 * abs(loc[2] - loc[1])


# 7 -----------------------------------------------------------------------


@acceptance(7, "sign structure and magnitude of lateral force and torque")
def test_signs_nacl():
    t = totals("NaCl", 100e-9, 310.0, 1.0)
    assert t.F_total[1] > 0 and t.M_total[0] > 0


@acceptance(7, "sign structure and magnitude of lateral force and torque")
def test_signs_agbr():
    t = totals("AgBr", 100e-9, 310.0, 1.0)
    assert t.F_total[1] < 0 and t.M_total[0] < 0


@acceptance(7, "sign structure and magnitude of lateral force and torque")
def test_magnitude_hot_close():
    t = totals("NaCl", 10e-9, 500.0, 1.0)
    assert 1e-16 / 5 <= t.F_total[1] <= 1e-16 * 5
    assert 1e-23 / 5 <= t.M_total[0] <= 1e-23 * 5


# 8 -----------------------------------------------------------------------


@acceptance(8, "mechanics exacts")
@pytest.mark.parametrize("name,weight", [("NaCl", 7.3e-17), ("AgBr", 2.17e-16)])
def test_gravity(db, name, weight):
    assert gravity_weight(db[name]) == pytest.approx(weight, rel=0.01, abs=0)


@acceptance(8, "mechanics exacts")
@pytest.mark.parametrize("name,tau", [("NaCl", 48.0), ("AgBr", 140.0)])
def test_relaxation_time(db, name, tau):
    p = db[name]
    assert moment_of_inertia(p) / damping_coefficient(p.radius, GAS) == pytest.approx(tau, rel=0.10, abs=0)


# 9 -----------------------------------------------------------------------


def _equilibrium_ensemble(p):
    I = moment_of_inertia(p)
    gamma = damping_coefficient(p.radius, GAS)
    tau = I / gamma
    return I, simulate_langevin(0.0, I, gamma, 300.0, tau / 100, 4000, 1000, 2024, burn_in=500)


@acceptance(9, "Langevin rotational physics")
@pytest.mark.parametrize("name", ["NaCl", "AgBr"])
def test_equipartition(db, name):
    I, st = _equilibrium_ensemble(db[name])
    energy = 0.5 * I * (st.stationary_variance + st.stationary_mean**2)
    assert energy == pytest.approx(0.5 * k_B * 300.0, rel=0.05, abs=0)


@acceptance(9, "Langevin rotational physics")
@pytest.mark.parametrize("name", ["NaCl", "AgBr"])
def test_spin_spread(db, name):
    _, st = _equilibrium_ensemble(db[name])
    std = math.sqrt(st.stationary_variance)
    assert 1e4 / 2 <= std <= 1e4 * 2


@acceptance(9, "Langevin rotational physics")
def test_driven_mean_spin(db):
    p = db["NaCl"]
    M = totals("NaCl", 100e-9, 310.0, 1.0).M_total[0]
    I = moment_of_inertia(p)
    gamma = damping_coefficient(p.radius, GAS)
    tau = I / gamma
    st = simulate_langevin(M, I, gamma, 300.0, tau / 100, 4000, 1000, 7, burn_in=2000)
    target = steady_state_omega(M, gamma)
    assert st.stationary_mean == pytest.approx(target, rel=0.01, abs=0)
    assert 1e6 <= st.stationary_mean / (2 * np.pi) <= 1e9


# 10 ----------------------------------------------------------------------


@acceptance(10, "rotating-frame torque flatness")
def test_rotating_flat():
    t = totals("NaCl", 100e-9, 400.0, 1.0, components=("Mx",), Omega=1e9)
    static = t.M_total[0]
    assert abs(t.M_x_rotating - static) / abs(static) < 0.01


@acceptance(10, "rotating-frame torque flatness")
def test_rotating_zero_matches_static():
    t = totals("NaCl", 100e-9, 400.0, 1.0, components=("Mx",), Omega=0.0)
    assert t.M_x_rotating == pytest.approx(t.M_total[0], rel=1e-10, abs=0)


@acceptance(10, "rotating-frame torque flatness")
def test_rotating_zero_density(db, insb):
    p = db["NaCl"]
    w = np.linspace(1.5e13, 5e13, 8)
    th = ThermalState(400.0, 300.0)
    rot = rotating_torque_x(insb, p, th, p.radius + 1e-7, w, 0.0)
    np.testing.assert_allclose(rot, torque_density("x", insb, p, th, p.radius + 1e-7, w), rtol=1e-10)


# 11 ----------------------------------------------------------------------


@acceptance(11, "oracle equivalences")
def test_oracle_isotropic_fresnel(rng):
    m = random_modes(rng, 500)
    for eps in (2.5 + 0.3j, -12.0 + 1.5j):
        r = reflect_tensor(eps * np.eye(3), m)
        rs, rp = isotropic_fresnel(eps, m.k0, m.k_par)
        np.testing.assert_allclose(r.r_ss, rs, rtol=1e-6)
        np.testing.assert_allclose(r.r_pp, rp, rtol=1e-6)


@acceptance(11, "oracle equivalences")
def test_oracle_image_dipole():
    for w, d in ((3e13, 3e-7), (1e14, 2e-6)):
        got = integrated_tensor(lambda m: mirror(m.k_par.shape), w, d, QuadConfig(rel_tol=1e-9))
        ref = image_dipole_greens(w / c, d)
        np.testing.assert_allclose(got, ref, rtol=1e-6, atol=1e-6 * np.abs(ref).max())
        p = ParticleSpec(2e-7, fixed_alpha=1e-19j)
        th = ThermalState(310.0, 300.0)
        power = power_density(mirror_substrate, p, th, d, [w], QuadConfig(rel_tol=1e-9))[0]
        k0 = w / c
        d_theta = theta(w, 310.0) - theta(w, 300.0)
        ref_power = d_theta * k0**2 * 1e-19 * (k0 / np.pi + np.imag(image_trace(k0, d)))
        assert power == pytest.approx(ref_power, rel=1e-6, abs=0)


@acceptance(11, "oracle equivalences")
def test_oracle_hydrodynamic_mirror(insb_b0):
    w = np.array([1.5e13, 2.6e13, 5e13])[:, None]
    kp = (w / c) * np.array([2.0, 50.0, 200.0])[None, :]
    r = reflect_nonlocal(insb_b0, mode_coords(w, kp, 0.9))
    ref = hydrodynamic_mirror_rp(w, kp, insb_b0.bound_permittivity(w), insb_b0.plasma_freq, insb_b0.drude_damping, insb_b0.beta)
    np.testing.assert_allclose(r.r_pp, ref, rtol=1e-6)


@acceptance(11, "oracle equivalences")
def test_oracle_quadrature_battery():
    cfg = QuadConfig(rel_tol=1e-8)
    for w, d in ((3e13, 1e-7), (1e14, 1e-6)):
        k_max = max(cfg.k_par_max_factor / d, 2 * w / c)
        res = integrate_kphi(decay_integrand(d), w, d, cfg)
        assert res.value == pytest.approx(decay_closed_form(w / c, d, k_max), rel=1e-6, abs=0)
    res = integrate_omega(lorentzian(3e13, 2e11), (1e12, 1e14), cfg, seeds=[3e13])
    assert res.value == pytest.approx(lorentzian_closed(3e13, 2e11, 1e12, 1e14), rel=1e-6, abs=0)
