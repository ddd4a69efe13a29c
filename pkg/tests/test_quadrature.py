import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.constants import c
from scipy.integrate import trapezoid

from fluxtorque.errors import ConfigurationError, QuadratureError, TailDominatedError
from fluxtorque.fresnel import reflect
from fluxtorque.quadrature import QuadConfig, integrate_kphi, integrate_omega
from fluxtorque.spectra import mode_kernels


def decay_integrand(d):
    return lambda m: m.k_par * np.abs(np.exp(2j * m.k_z * d))


def decay_closed_form(k0, d, k_max):
    kappa = math.sqrt(k_max**2 - k0**2)
    x = 2 * d * kappa
    return 2 * np.pi * (k0**2 / 2 + (1 - math.exp(-x) * (1 + x)) / (4 * d**2))


def peak_integrand(d, k_res, width):
    # polariton-like pole in the evanescent region on top of the light-line edge
    def f(m):
        e = np.exp(2j * m.k_z * d)
        pole = 1.0 / (m.k_par - k_res - 1j * width)
        return np.imag(1j * m.k_par * e / m.k_z * (1 + 0.5 * np.cos(m.phi)) * pole) * k_res
    return f


def lorentzian(w0, g):
    return lambda w: g / ((w - w0) ** 2 + g**2)


def lorentzian_closed(w0, g, lo, hi):
    return math.atan((hi - w0) / g) - math.atan((lo - w0) / g)


class TestConfig:
    def test_defaults(self):
        cfg = QuadConfig()
        assert cfg.k_par_max_factor == 40 and cfg.phi_order == 64

    @pytest.mark.parametrize(
        "kw,field",
        [
            ({"rel_tol": 0}, "quadrature.rel_tol"),
            ({"abs_tol": -1}, "quadrature.abs_tol"),
            ({"k_par_max_factor": 9}, "quadrature.k_par_max_factor"),
            ({"phi_order": 8}, "quadrature.phi_order"),
            ({"max_subdivisions": 0}, "quadrature.max_subdivisions"),
        ],
    )
    def test_invariants(self, kw, field):
        with pytest.raises(ConfigurationError) as exc:
            QuadConfig(**kw)
        assert exc.value.field == field

    def test_round_trip(self):
        cfg = QuadConfig(rel_tol=1e-5, phi_order=32)
        assert QuadConfig.from_dict(cfg.to_dict()) == cfg
        with pytest.raises(ConfigurationError):
            QuadConfig.from_dict({"bogus": 1})


class TestKPhi:
    @pytest.mark.parametrize("omega,d", [(3e13, 1e-7), (1e14, 1e-6), (1e12, 5e-8)])
    def test_decay_closed_form(self, omega, d):
        cfg = QuadConfig(rel_tol=1e-10)
        k0 = omega / c
        k_max = max(cfg.k_par_max_factor / d, 2 * k0)
        res = integrate_kphi(decay_integrand(d), omega, d, cfg)
        assert res.value == pytest.approx(decay_closed_form(k0, d, k_max), rel=1e-9, abs=0)
        assert abs(res.value - decay_closed_form(k0, d, k_max)) <= max(res.error, 1e-14 * res.value)

    def test_light_line_edge(self):
        # int_0^k0 k / sqrt(k0^2 - k^2) dk = k0: the 1/k_z edge is absorbed exactly
        omega = 3e13
        res = integrate_kphi(lambda m: np.where(m.k_par < m.k0, np.real(m.k_par / m.k_z), 0.0), omega, 1e-6,
                             QuadConfig(rel_tol=1e-12))
        assert res.value == pytest.approx(2 * np.pi * omega / c, rel=1e-12, abs=0)

    def test_sin_phi_orthogonality(self):
        f = lambda m: np.sin(m.phi) * m.k_par * np.abs(np.exp(2j * m.k_z * 1e-7))  # noqa: E731
        res = integrate_kphi(f, 3e13, 1e-7, QuadConfig(rel_tol=1e-8))
        assert abs(res.value) <= 1e-14 * res.info["abs_integral"]

    def test_components_and_magnitudes(self):
        d = 1e-7

        def f(m):
            v = np.stack([decay_integrand(d)(m), np.cos(m.phi) * decay_integrand(d)(m)])
            return v, np.abs(np.stack([v[0], v[0]]))

        res = integrate_kphi(f, 3e13, d, QuadConfig(rel_tol=1e-9))
        assert res.value.shape == (2,)
        assert abs(res.value[1]) <= 1e-12 * res.value[0]
        assert res.info["abs_integral"][1] == pytest.approx(res.value[0], rel=1e-9, abs=0)

    def test_subdivision_limit(self):
        with pytest.raises(QuadratureError) as exc:
            integrate_kphi(peak_integrand(1e-7, 5e6, 1e2), 3e13, 1e-7, QuadConfig(rel_tol=1e-12, max_subdivisions=8))
        assert exc.value.value is not None

    @given(st.floats(1e-8, 1e-6), st.floats(2, 30), st.floats(1e-3, 3e-2), st.sampled_from([1e-3, 1e-4, 1e-5, 1e-6]))
    def test_estimator_soundness(self, d, ratio, rel_width, tol):
        omega = 3e13
        k_res = ratio * omega / c
        f = peak_integrand(d, k_res, rel_width * k_res)
        coarse = integrate_kphi(f, omega, d, QuadConfig(rel_tol=tol))
        fine = integrate_kphi(f, omega, d, QuadConfig(rel_tol=tol / 2))
        assert abs(fine.value - coarse.value) <= coarse.error + 1e-15 * abs(coarse.value)

    def test_monotone_error_estimates(self):
        f = peak_integrand(1e-7, 10 * 3e13 / c, 3e4)
        errs = [integrate_kphi(f, 3e13, 1e-7, QuadConfig(rel_tol=t)).error for t in (1e-3, 1e-5, 1e-7, 1e-9)]
        assert all(b <= a for a, b in zip(errs, errs[1:]))

    def test_physical_kernel_soundness_and_cutoff(self, insb):
        omega, d = 2.4e13, 3e-7

        def kern(m):
            return mode_kernels(reflect(insb, m), m, d, magnitudes=True)

        checked = (0, 1, 2, 3, 4, 5, 6)
        a = integrate_kphi(kern, omega, d, QuadConfig(rel_tol=1e-5), checked=checked)
        b = integrate_kphi(kern, omega, d, QuadConfig(rel_tol=5e-6), checked=checked)
        wide = integrate_kphi(kern, omega, d, QuadConfig(rel_tol=1e-5, k_par_max_factor=80), checked=checked)
        for i in checked:
            assert abs(a.value[i] - b.value[i]) <= a.error[i] + 1e-14 * a.info["abs_integral"][i]
            assert abs(a.value[i] - wide.value[i]) <= a.error[i] + wide.error[i] + 1e-14 * a.info["abs_integral"][i]


class TestOmega:
    @pytest.mark.parametrize("tol", [1e-6, 1e-9])
    def test_lorentzian_arctan(self, tol):
        w0, g, lo, hi = 3e13, 2e11, 1e12, 1e14
        res = integrate_omega(lorentzian(w0, g), (lo, hi), QuadConfig(rel_tol=tol), seeds=[w0])
        exact = lorentzian_closed(w0, g, lo, hi)
        assert res.value == pytest.approx(exact, rel=tol, abs=0)

    def test_zero_density(self):
        res = integrate_omega(lambda w: np.zeros_like(w), (1e12, 1e14))
        assert res.value == 0 and res.error == 0

    def test_narrow_peak_off_seed(self):
        w0, g, lo, hi = 3.3e13, 3e8, 1e12, 1e14
        cfg = QuadConfig(rel_tol=1e-8, max_subdivisions=20000)
        res = integrate_omega(lorentzian(w0, g), (lo, hi), cfg, seeds=[2.9e13])
        grid = np.linspace(w0 - 2e11, w0 + 2e11, 2_000_001)
        dense = trapezoid(lorentzian(w0, g)(grid), grid) + lorentzian_closed(w0, g, lo, w0 - 2e11) + lorentzian_closed(
            w0, g, w0 + 2e11, hi
        )
        assert res.value == pytest.approx(dense, rel=1e-7, abs=0)

    def test_vector_density_and_magnitudes(self):
        w0, g = 3e13, 1e12

        def f(w):
            v = np.stack([lorentzian(w0, g)(w), (w - w0) / g * lorentzian(w0, g)(w) * 1e-3])
            return v, np.abs(np.stack([v[0], v[0]]))

        res = integrate_omega(f, (1e13, 5e13), QuadConfig(rel_tol=1e-10), seeds=[w0])
        assert res.value.shape == (2,)
        assert res.value[0] == pytest.approx(lorentzian_closed(w0, g, 1e13, 5e13), rel=1e-10, abs=0)

    def test_tail_dominated(self):
        with pytest.raises(TailDominatedError):
            integrate_omega(lorentzian(3e13, 1e13), (2.5e13, 3.5e13), QuadConfig(rel_tol=1e-6), require_tail=True)

    def test_subdivision_limit(self):
        with pytest.raises(QuadratureError):
            integrate_omega(lorentzian(3.3e13, 1e6), (1e12, 1e14), QuadConfig(rel_tol=1e-10, max_subdivisions=20))

    def test_bad_window(self):
        with pytest.raises(ConfigurationError):
            integrate_omega(lorentzian(3e13, 1e12), (1e14, 1e13))
