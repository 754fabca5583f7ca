import math

import numpy as np
import pytest

from ionring.config import M_EFF, TWO_PI, RampSchedule
from ionring.lattice import (ForceProvider, LatticeError, coulomb_charge,
                             coulomb_pair, equilibrium_frame,
                             external_force_spline, force_matrix, frame_at,
                             ramp_frame)
from ionring.profile import build_profile

from test_config import make_config


class TestCoulombPair:
    def test_charge_convention(self):
        cfg = make_config(n_ions=100, kappa=1.2591)
        assert coulomb_charge(cfg) == pytest.approx(1.2591 / 200.0)

    def test_chord_law_value(self):
        pot, _, _ = coulomb_pair(math.pi, 1.0)   # opposite points: d = 1/pi
        assert pot == pytest.approx(math.pi)

    def test_small_separation_limits(self):
        # d -> delta/2pi: pot -> 2 pi q/delta, stiffness -> 4 pi q / delta^3
        q = 0.3
        delta = 1e-3
        pot, _, d2pot = coulomb_pair(delta, q)
        assert pot == pytest.approx(TWO_PI * q / delta, rel=1e-6)
        assert d2pot == pytest.approx(4.0 * math.pi * q / delta**3, rel=1e-5)

    def test_derivatives_consistent(self):
        q = 0.7
        for delta in (0.3, 1.0, 2.5, -1.2):
            eps = 1e-6
            pm = coulomb_pair(delta - eps, q)[0]
            pp = coulomb_pair(delta + eps, q)[0]
            _, dpot, d2pot = coulomb_pair(delta, q)
            assert (pp - pm) / (2 * eps) == pytest.approx(dpot, rel=1e-7)
            dm = coulomb_pair(delta - eps, q)[1]
            dp = coulomb_pair(delta + eps, q)[1]
            assert (dp - dm) / (2 * eps) == pytest.approx(d2pot, rel=1e-6)

    def test_even_potential_odd_force(self):
        pot_p, dpot_p, _ = coulomb_pair(1.1, 1.0)
        pot_m, dpot_m, _ = coulomb_pair(-1.1, 1.0)
        assert pot_p == pot_m
        assert dpot_p == -dpot_m

    def test_coincident_ions_rejected(self):
        with pytest.raises(LatticeError):
            coulomb_pair(0.0, 1.0)
        with pytest.raises(LatticeError):
            coulomb_pair(TWO_PI, 1.0)


class TestEquilibriumFrame:
    def test_homogeneous_needs_no_external_force(self):
        cfg = make_config(n_ions=16, v_min_frac=1.0)
        frame = equilibrium_frame(build_profile(cfg), 0.1)
        # uniform rotation: Coulomb forces cancel, acceleration vanishes
        assert np.max(np.abs(frame.force_external)) < 1e-10

    def test_positions_follow_profile(self):
        cfg = make_config(n_ions=16)
        prof = build_profile(cfg)
        frame = equilibrium_frame(prof, 0.25)
        u = np.arange(16) / 16 + 0.25
        assert np.allclose(frame.theta, prof.g(u), atol=1e-13)
        assert np.allclose(frame.velocity, prof.gp(u), atol=1e-13)

    @pytest.mark.parametrize("interaction", ["nearest-neighbor", "full-coulomb"])
    def test_external_force_closes_newton(self, interaction):
        # m_eff * acc = F^c + F^e by construction
        cfg = make_config(n_ions=12, interaction=interaction)
        frame = equilibrium_frame(build_profile(cfg), 0.05)
        from ionring.lattice import _coulomb_force
        residual = M_EFF * frame.acceleration - (
            _coulomb_force(frame.theta, cfg) + frame.force_external)
        assert np.max(np.abs(residual)) < 1e-12


class TestForceMatrix:
    @pytest.mark.parametrize("interaction", ["nearest-neighbor", "full-coulomb"])
    @pytest.mark.parametrize("n_ions", [8, 12, 16])
    def test_matches_finite_difference_hessian(self, interaction, n_ions):
        from ionring.lattice import _coulomb_force
        cfg = make_config(n_ions=n_ions, interaction=interaction)
        frame = equilibrium_frame(build_profile(cfg), 0.1)
        f = force_matrix(frame).f
        spline = external_force_spline(frame)

        def total_force(theta):
            return _coulomb_force(theta, cfg) + spline(theta % TWO_PI)

        eps = 1e-7
        fd = np.zeros((n_ions, n_ions))
        for j in range(n_ions):
            d = np.zeros(n_ions)
            d[j] = eps
            fd[:, j] = -(total_force(frame.theta + d)
                         - total_force(frame.theta - d)) / (2 * eps)
        scale = np.max(np.abs(f))
        assert np.max(np.abs(f - fd)) / scale < 1e-6

    def test_symmetric_and_zero_row_sums_without_external(self):
        cfg = make_config(n_ions=16, interaction="full-coulomb")
        frame = equilibrium_frame(build_profile(cfg), 0.0)
        f = force_matrix(frame, include_external_hessian=False).f
        assert np.allclose(f, f.T, atol=1e-12)
        # pure pair interactions: translating all ions costs nothing
        assert np.max(np.abs(f.sum(axis=1))) < 1e-10 * np.max(np.abs(f))

    def test_nearest_neighbor_bandwidth(self):
        cfg = make_config(n_ions=16)
        frame = equilibrium_frame(build_profile(cfg), 0.0)
        fm = force_matrix(frame)
        assert fm.bandwidth == 1
        f = fm.f.copy()
        idx = np.arange(16)
        f[idx, idx] = 0.0
        f[idx, (idx + 1) % 16] = 0.0
        f[idx, (idx - 1) % 16] = 0.0
        assert np.max(np.abs(f)) == 0.0

    def test_shift_covariance(self):
        # f(t + T/N) = P f(t) P^T with (P v)_i = v_{i+1}
        cfg = make_config(n_ions=32, interaction="full-coulomb")
        prof = build_profile(cfg)
        t = 0.123
        f0 = force_matrix(equilibrium_frame(prof, t)).f
        f1 = force_matrix(equilibrium_frame(prof, t + 1.0 / 32)).f
        rolled = np.roll(np.roll(f0, -1, axis=0), -1, axis=1)
        assert np.max(np.abs(f1 - rolled)) < 1e-8 * np.max(np.abs(f0))


class TestRamp:
    def ramp_config(self, **kw):
        return make_config(n_ions=16, sigma=0.3, kappa=1.127,
                           ramp=RampSchedule(tau=0.05, target_v_min_frac=5 / 6),
                           **kw)

    def test_prequench_is_homogeneous(self):
        cfg = self.ramp_config()
        frame = ramp_frame(cfg, -0.01)
        assert np.allclose(np.diff(frame.theta), TWO_PI / 16, atol=1e-9)
        assert np.allclose(frame.velocity, TWO_PI, atol=1e-6)

    def test_closure_throughout_ramp(self):
        cfg = self.ramp_config()
        for t in (0.0, 0.01, 0.025, 0.05, 0.2):
            frame = ramp_frame(cfg, t)
            assert frame.profile.g(1.0) - frame.profile.g(0.0) == (
                pytest.approx(TWO_PI, abs=1e-10))

    def test_velocity_matches_position_derivative(self):
        cfg = self.ramp_config()
        t, dt = 0.02, 1e-6
        th_p = ramp_frame(cfg, t + dt).theta
        th_m = ramp_frame(cfg, t - dt).theta
        vel = ramp_frame(cfg, t).velocity
        assert np.allclose((th_p - th_m) / (2 * dt), vel, rtol=1e-4, atol=1e-6)

    def test_frame_at_dispatches(self):
        cfg = self.ramp_config()
        assert frame_at(cfg, 0.02).t == 0.02
        static = make_config(n_ions=16)
        assert frame_at(static, 0.02).t == 0.02

    def test_ramp_frame_requires_schedule(self):
        with pytest.raises(LatticeError):
            ramp_frame(make_config(n_ions=16), 0.1)


class TestForceProvider:
    def test_cached_apply_matches_direct(self):
        cfg = make_config(n_ions=24, interaction="full-coulomb")
        provider = ForceProvider(cfg)
        dt = 1.0 / (24 * 8)
        provider.set_phase_grid(dt)
        rng = np.random.default_rng(7)
        x = rng.standard_normal(24)
        for step in (0, 5, 24, 100, 301):
            t = (step + 0.5) * dt
            direct = provider.matrix(t) @ x
            cached = provider.apply(t, x)
            assert np.max(np.abs(direct - cached)) < 1e-8 * np.max(np.abs(direct))

    def test_off_grid_times_fall_back(self):
        cfg = make_config(n_ions=16)
        provider = ForceProvider(cfg)
        provider.set_phase_grid(1.0 / (16 * 8))
        x = np.ones(16)
        t = 0.0123456
        assert np.allclose(provider.apply(t, x), provider.matrix(t) @ x,
                           atol=1e-12)

    def test_omega_max_positive(self):
        assert ForceProvider(make_config(n_ions=32)).omega_max() > 0
