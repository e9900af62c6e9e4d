import math

import numpy as np
import pytest

from eitsim.constants import C_LIGHT, TWO_PI
from eitsim.errors import (ConfigError, ConventionError,
                           DivergentVelocityError, InvalidArgumentError,
                           SingularParametersError)
from eitsim.lambda_system import (LambdaParams, Susceptibility, chi_analytic,
                                  dchi_prime_ddelta, lambda_from_material)
from eitsim.materials import pryso_defaults
from eitsim.optics import (CSV_HEADER, DriveSet, GridSpec, Spectrum,
                           absorption, full_model_chi, group_velocity,
                           make_index_sampler, probe_angular_frequency,
                           refractive_index, rho_to_chi, spectrum_to_csv,
                           sweep, transparency_window,
                           window_width_closed_form)

MAT = pryso_defaults()
EIT_DRIVES = DriveSet(probe_rabi=1.5e3, coupling_rabi=1.5e6, aux_rabi=1.5e6)
EIT = lambda_from_material(MAT, 1.5e6)


class TestGridSpec:
    def test_values_and_center(self):
        grid = GridSpec(-2e7, 2e7, 201)
        v = grid.values()
        assert v.size == 201
        assert v[0] == -2e7 and v[-1] == 2e7
        assert v[100] == 0.0  # odd symmetric grid hits resonance exactly

    def test_validation(self):
        with pytest.raises(ConfigError):
            GridSpec(1.0, 1.0, 10)
        with pytest.raises(ConfigError):
            GridSpec(0.0, 1.0, 1)
        with pytest.raises(ConfigError):
            GridSpec(float("nan"), 1.0, 10)


class TestDriveSet:
    def test_field_drives_geometry(self):
        ds = DriveSet(1.0, 2.0, 3.0, coupling_detuning=5.0, aux_detuning=-7.0)
        probe, coupling, aux = ds.field_drives(11.0)
        assert (probe.upper, probe.lower, probe.rabi, probe.detuning) == \
            (5, 2, 1.0, 11.0)
        assert (coupling.upper, coupling.lower, coupling.detuning) == (5, 3, 5.0)
        assert (aux.upper, aux.lower, aux.detuning) == (6, 1, -7.0)


class TestPointwiseOptics:
    def test_rho_to_chi_identity(self):
        chi = rho_to_chi(0.5j, MAT, 1.5e3)
        want = 2.0 * MAT.coupling_strength * 0.5j / 1.5e3
        assert chi.as_complex == want

    def test_rho_to_chi_zero_probe(self):
        with pytest.raises(ZeroDivisionError):
            rho_to_chi(0.1j, MAT, 0.0)

    def test_refractive_index(self):
        assert refractive_index(Susceptibility(0.0, 1.0)) == 1.0
        assert refractive_index(Susceptibility(-4e-4, 0.0)) == 1.0 - 2e-4

    def test_absorption_values(self):
        # resonant absorption without coupling, and inside the window
        ref = absorption(chi_analytic(
            LambdaParams(EIT.gamma52, EIT.gamma32, 0.0, EIT.coupling_a), 0.0),
            MAT.probe_wavelength)
        assert ref == pytest.approx(550438.1535833669, rel=1e-12)
        eit = absorption(chi_analytic(EIT, 0.0), MAT.probe_wavelength)
        assert eit == pytest.approx(291.4698675382169, rel=1e-12)
        assert ref / eit == pytest.approx(1888.4907665839403, rel=1e-10)

    def test_absorption_sign_handling(self):
        assert absorption(Susceptibility(0.0, -1e-13), 605.7e-9) == 0.0
        with pytest.raises(ConventionError):
            absorption(Susceptibility(0.0, -1e-9), 605.7e-9)
        with pytest.raises(InvalidArgumentError):
            absorption(Susceptibility(0.0, 1.0), 0.0)

    def test_probe_angular_frequency(self):
        want = TWO_PI * C_LIGHT / 605.7e-9
        assert probe_angular_frequency(MAT) == pytest.approx(want, rel=1e-15)
        assert probe_angular_frequency(MAT) == pytest.approx(3.10987546196e15,
                                                             rel=1e-9)


class TestGroupVelocity:
    def _sampler(self, lam=EIT, delta0=0.0):
        omega0 = probe_angular_frequency(MAT)
        return make_index_sampler(lambda d: chi_analytic(lam, d), omega0,
                                  delta0), omega0

    def test_slow_light_value(self):
        sampler, omega0 = self._sampler()
        vg = group_velocity(sampler, omega0, EIT.gamma32 / 100)
        # exact group index via the closed-form slope and the sign map
        ng = 1.0 - omega0 * 0.5 * dchi_prime_ddelta(EIT, 0.0)
        assert vg < 50.0
        assert vg == pytest.approx(C_LIGHT / ng, rel=1e-6)
        assert C_LIGHT / ng == pytest.approx(21.57, rel=1e-3)

    def test_step_robustness_two_decades(self):
        sampler, omega0 = self._sampler()
        ng = 1.0 - omega0 * 0.5 * dchi_prime_ddelta(EIT, 0.0)
        exact = C_LIGHT / ng
        for h in (EIT.gamma32 / 10, EIT.gamma32 / 100, EIT.gamma32 / 1000):
            vg = group_velocity(sampler, omega0, h)
            assert abs(vg - exact) / exact < 1e-4

    def test_sign_map(self):
        # exact arithmetic: small carrier so omega + h is representable
        sampler = make_index_sampler(lambda d: chi_analytic(EIT, d),
                                     1e6, 2e5)
        # moving omega up moves delta down by the same amount
        want = refractive_index(chi_analytic(EIT, 2e5 - 1e3))
        assert sampler(1e6 + 1e3) == want

    def test_vacuum_limit(self):
        omega0 = probe_angular_frequency(MAT)
        vg = group_velocity(lambda _: 1.0, omega0, 1e3)
        assert vg == C_LIGHT

    def test_anomalous_slope_negative_velocity(self):
        lam0 = LambdaParams(EIT.gamma52, EIT.gamma32, 0.0, EIT.coupling_a)
        sampler, omega0 = self._sampler(lam=lam0)
        vg = group_velocity(sampler, omega0, EIT.gamma32 / 100)
        assert vg < 0  # steep anomalous dispersion at the bare resonance
        assert abs(vg) < 1.0

    def test_divergent_group_index(self):
        # n = 2 - omega makes the group index exactly zero at omega = 1
        with pytest.raises(DivergentVelocityError):
            group_velocity(lambda w: 2.0 - w, 1.0, 0.5)

    def test_input_validation(self):
        with pytest.raises(InvalidArgumentError):
            group_velocity(lambda _: 1.0, -1.0, 1e3)
        with pytest.raises(InvalidArgumentError):
            group_velocity(lambda _: 1.0, 1e15, 0.0)
        with pytest.raises(InvalidArgumentError):
            # step far below the grid spacing of doubles at this omega
            group_velocity(lambda _: 1.0, 1e15, 1e-6)


class TestSweep:
    def test_analytic_matches_pointwise(self):
        grid = GridSpec(-2e7, 2e7, 51)
        spec = sweep("analytic", MAT, EIT_DRIVES, grid)
        for i, delta in enumerate(grid.values()):
            chi = chi_analytic(EIT, float(delta))
            assert spec.chi_re[i] == chi.chi_re
            assert spec.chi_im[i] == chi.chi_im
            assert spec.n_index[i] == 1.0 + 0.5 * chi.chi_re
            assert spec.alpha[i] == absorption(chi, MAT.probe_wavelength)

    def test_symmetry_invariants(self):
        grid = GridSpec(-2e7, 2e7, 101)
        ana = sweep("analytic", MAT, EIT_DRIVES, grid)
        assert np.max(np.abs(ana.chi_im - ana.chi_im[::-1])) \
            <= 1e-10 * ana.chi_im.max()
        assert np.max(np.abs(ana.chi_re + ana.chi_re[::-1])) \
            <= 1e-10 * np.abs(ana.chi_re).max()
        ful = sweep("full", MAT, EIT_DRIVES, grid)
        assert np.max(np.abs(ful.chi_im - ful.chi_im[::-1])) \
            <= 0.01 * ful.chi_im.max()
        assert np.max(np.abs(ful.chi_re + ful.chi_re[::-1])) \
            <= 0.01 * np.abs(ful.chi_re).max()

    def test_full_close_to_analytic_at_default_probe(self):
        grid = GridSpec(-2e7, 2e7, 201)
        ana = sweep("analytic", MAT, EIT_DRIVES, grid)
        ful = sweep("full", MAT, EIT_DRIVES, grid)
        dev = np.abs(ful.chi_im - ana.chi_im) / np.abs(ana.chi_im)
        assert dev.max() < 0.02

    def test_alpha_nonnegative_everywhere(self):
        for backend in ("analytic", "full"):
            spec = sweep(backend, MAT, EIT_DRIVES, GridSpec(-2e7, 2e7, 41))
            assert np.all(spec.alpha >= 0)

    def test_no_coupling_peak_at_resonance(self):
        drives = DriveSet(probe_rabi=1.5e3, coupling_rabi=0.0, aux_rabi=0.0)
        spec = sweep("analytic", MAT, drives, GridSpec(-2e7, 2e7, 101))
        assert spec.deltas[np.argmax(spec.alpha)] == 0.0

    def test_jobs_do_not_change_results(self):
        grid = GridSpec(-2e7, 2e7, 41)
        one = sweep("full", MAT, EIT_DRIVES, grid, jobs=1)
        four = sweep("full", MAT, EIT_DRIVES, grid, jobs=4)
        assert np.array_equal(one.chi_re, four.chi_re)
        assert np.array_equal(one.chi_im, four.chi_im)
        assert spectrum_to_csv(one) == spectrum_to_csv(four)

    def test_repeated_sweep_is_bit_identical(self):
        grid = GridSpec(-2e7, 2e7, 31)
        a = sweep("full", MAT, EIT_DRIVES, grid)
        b = sweep("full", MAT, EIT_DRIVES, grid)
        assert spectrum_to_csv(a) == spectrum_to_csv(b)
        assert a.params_digest == b.params_digest

    def test_full_backend_weak_probe_gate(self):
        strong = DriveSet(probe_rabi=3e5, coupling_rabi=1.5e6, aux_rabi=1.5e6)
        with pytest.raises(ConfigError):
            sweep("full", MAT, strong, GridSpec(-1e6, 1e6, 3))
        off = DriveSet(probe_rabi=0.0, coupling_rabi=1.5e6, aux_rabi=1.5e6)
        with pytest.raises(ConfigError):
            sweep("full", MAT, off, GridSpec(-1e6, 1e6, 3))

    def test_backend_and_jobs_validation(self):
        with pytest.raises(ConfigError):
            sweep("exact", MAT, EIT_DRIVES, GridSpec(-1.0, 1.0, 3))
        with pytest.raises(ConfigError):
            sweep("analytic", MAT, EIT_DRIVES, GridSpec(-1.0, 1.0, 3), jobs=0)

    def test_point_failures_name_the_detuning(self):
        # undamped ground coherence + no coupling: the closed form is
        # singular exactly at delta = 0 and the sweep must say where
        mat = pryso_defaults(
            lifetimes=np.array([np.inf] * 3 + [164e-6] * 3),
            dephasing_hz={(5, 2): 9e3, (5, 3): 9e3})
        drives = DriveSet(probe_rabi=1.5e3, coupling_rabi=0.0, aux_rabi=0.0)
        with pytest.raises(SingularParametersError, match="delta"):
            sweep("analytic", mat, drives, GridSpec(-1e3, 1e3, 3))

    def test_spectrum_invariants_enforced(self):
        d = np.array([0.0, 1.0, 2.0])
        ones = np.ones(3)
        with pytest.raises(InvalidArgumentError):
            Spectrum("analytic", d, ones, ones, 1.0 + 0.5 * ones, -ones)
        with pytest.raises(InvalidArgumentError):
            Spectrum("analytic", d[::-1], ones, ones, 1.0 + 0.5 * ones, ones)
        with pytest.raises(InvalidArgumentError):
            Spectrum("analytic", d, ones, ones, ones, ones)  # n != 1+chi/2


class TestCsv:
    def test_header_and_shape(self):
        spec = sweep("analytic", MAT, EIT_DRIVES, GridSpec(-1e6, 1e6, 5))
        text = spectrum_to_csv(spec)
        lines = text.strip().split("\n")
        assert lines[0] == CSV_HEADER == "delta_rad_s,chi_re,chi_im,n,alpha_per_m"
        assert len(lines) == 6
        assert text.endswith("\n")

    def test_values_round_trip_exactly(self):
        spec = sweep("analytic", MAT, EIT_DRIVES, GridSpec(-2e7, 2e7, 9))
        lines = spectrum_to_csv(spec).strip().split("\n")[1:]
        for i, line in enumerate(lines):
            cells = [float(c) for c in line.split(",")]
            assert cells[0] == spec.deltas[i]
            assert cells[1] == spec.chi_re[i]
            assert cells[2] == spec.chi_im[i]
            assert cells[3] == spec.n_index[i]
            assert cells[4] == spec.alpha[i]


class TestTransparencyWindow:
    def _reference(self, lam):
        bare = LambdaParams(lam.gamma52, lam.gamma32, 0.0, lam.coupling_a)
        return absorption(chi_analytic(bare, 0.0), MAT.probe_wavelength)

    def _measure(self, omega_c, points=4001):
        lam = lambda_from_material(MAT, omega_c)
        width_est = window_width_closed_form(lam.gamma52, omega_c)
        drives = DriveSet(probe_rabi=1.5e3, coupling_rabi=omega_c,
                          aux_rabi=omega_c)
        grid = GridSpec(-2 * width_est, 2 * width_est, points)
        spec = sweep("analytic", MAT, drives, grid)
        return transparency_window(spec, self._reference(lam)), width_est

    def test_closed_form_agreement_across_coupling_strengths(self):
        for ratio in (10.0, 30.0, 100.0):
            omega_c = ratio * EIT.gamma52
            report, want = self._measure(omega_c)
            assert report.has_window and not report.truncated
            assert abs(report.width - want) / want < 0.005

    def test_default_eit_width(self):
        report, want = self._measure(1.5e6)
        # closed-form edge: sqrt(gamma52^2 + omega_c^2) - gamma52
        assert want == math.hypot(EIT.gamma52, 1.5e6) - EIT.gamma52
        assert report.width == pytest.approx(want, rel=0.005)
        assert report.width == pytest.approx(1.45e6, rel=0.01)
        assert report.width_hz == report.width / TWO_PI
        assert report.edges[0] == pytest.approx(-report.edges[1], rel=1e-6)

    def test_monotone_in_coupling(self):
        w1, _ = self._measure(1.5e6)
        w2, _ = self._measure(3.0e6)
        assert w2.width > w1.width

    def test_no_window_without_coupling(self):
        drives = DriveSet(probe_rabi=1.5e3, coupling_rabi=0.0, aux_rabi=0.0)
        spec = sweep("analytic", MAT, drives, GridSpec(-2e7, 2e7, 201))
        report = transparency_window(spec, self._reference(EIT))
        assert not report.has_window
        assert report.width == 0.0

    def test_truncated_when_grid_too_narrow(self):
        lam = lambda_from_material(MAT, 1.5e6)
        width_est = window_width_closed_form(lam.gamma52, 1.5e6)
        grid = GridSpec(-0.3 * width_est, 0.3 * width_est, 501)
        spec = sweep("analytic", MAT, EIT_DRIVES, grid)
        report = transparency_window(spec, self._reference(lam))
        assert report.has_window and report.truncated
        assert report.width <= 0.6 * width_est * 1.0001

    def test_grid_must_cover_resonance(self):
        spec = sweep("analytic", MAT, EIT_DRIVES, GridSpec(1e5, 1e6, 11))
        with pytest.raises(ConfigError):
            transparency_window(spec, 1.0)

    def test_reference_must_be_positive(self):
        spec = sweep("analytic", MAT, EIT_DRIVES, GridSpec(-1e6, 1e6, 11))
        with pytest.raises(InvalidArgumentError):
            transparency_window(spec, 0.0)


def test_full_model_chi_resonant_point():
    chi = full_model_chi(MAT, EIT_DRIVES, 0.0)
    want = chi_analytic(EIT, 0.0)
    assert chi.chi_im == pytest.approx(want.chi_im, rel=0.02)
