import math

import numpy as np
import pytest

from ionring.config import M_EFF, TWO_PI
from ionring.lattice import coulomb_charge, equilibrium_frame, force_matrix
from ionring.modes import (DispersionTable, ModeError, bloch_regime,
                           build_final_pulse, dispersion, frequency_split,
                           from_modes, kg_norms, mode_numbers,
                           project_out_zero_mode, solve_frequency_condition,
                           to_modes, uniform_dispersion_omega,
                           uniform_group_velocity)
from ionring.profile import build_profile

from test_config import make_config


class TestModeNumbers:
    def test_range_and_order(self):
        m = mode_numbers(8)
        assert list(m) == [0, 1, 2, 3, 4, -3, -2, -1]

    def test_odd_n(self):
        m = mode_numbers(9)
        assert m.min() == -4 and m.max() == 4


class TestDFT:
    def test_round_trip(self):
        cfg = make_config(n_ions=32)
        table = dispersion(cfg)
        rng = np.random.default_rng(0)
        dth, dthd = rng.standard_normal(32), rng.standard_normal(32)
        modes = to_modes(dth, dthd, table)
        dth2, dthd2 = from_modes(modes)
        assert np.allclose(dth2, dth, atol=1e-13)
        assert np.allclose(dthd2, dthd, atol=1e-13)

    def test_parseval(self):
        cfg = make_config(n_ions=32)
        table = dispersion(cfg)
        rng = np.random.default_rng(1)
        dth = rng.standard_normal(32)
        modes = to_modes(dth, np.zeros(32), table)
        assert np.sum(np.abs(modes.theta_k) ** 2) == pytest.approx(
            np.sum(dth**2), rel=1e-12)


class TestDispersion:
    def test_nn_matches_sine_law(self):
        cfg = make_config(n_ions=64, interaction="nearest-neighbor")
        vf = cfg.v_min_frac
        table = dispersion(cfg)
        # analytic NN chain: omega = 2 sqrt(K/m) |sin(k/2N)| with the pair
        # stiffness from the chord potential at the reference spacing
        n, q = cfg.n_ions, coulomb_charge(cfg)
        phi = math.pi / n
        k_theta = (math.pi / vf) ** 2 * (q * math.pi / vf) * (
            1 + math.cos(phi) ** 2) / math.sin(phi) ** 3 / TWO_PI**2
        expected = 2.0 * math.sqrt(k_theta / M_EFF) * np.abs(
            np.sin(table.k / (2 * n)))
        scale = expected.max()
        assert np.max(np.abs(table.omega - expected)) / scale < 1e-10

    @pytest.mark.parametrize("interaction", ["nearest-neighbor", "full-coulomb"])
    def test_matches_dense_eigenvalues_homogeneous(self, interaction):
        cfg = make_config(n_ions=48, v_min_frac=1.0, interaction=interaction)
        table = dispersion(cfg, v_frac=1.0)
        f = force_matrix(equilibrium_frame(build_profile(cfg), 0.0)).f
        w2 = np.linalg.eigvalsh(f / M_EFF)
        dense = np.sqrt(np.maximum(w2, 0.0))
        # skip the translation zero mode: its dense eigenvalue is only zero
        # to sqrt(machine epsilon times the stiffness scale)
        assert np.allclose(np.sort(table.omega)[1:], np.sort(dense)[1:],
                           atol=1e-8 * dense.max())

    def test_full_coulomb_group_velocity_diverges_at_low_k(self):
        cfg = make_config(n_ions=256, interaction="full-coulomb")
        table = dispersion(cfg)
        vg = [float(table.vgroup[list(table.n_modes).index(n)])
              for n in (5, 4, 3, 2, 1)]
        assert all(b > a for a, b in zip(vg, vg[1:]))

    def test_nn_group_velocity_bounded(self):
        cfg = make_config(n_ions=256, interaction="nearest-neighbor")
        table = dispersion(cfg)
        vg = [float(table.vgroup[list(table.n_modes).index(n)])
              for n in (1, 2, 3, 4, 5)]
        assert max(vg) / min(vg) < 1.01

    def test_continuous_k_interpolates(self):
        cfg = make_config(n_ions=64)
        table = dispersion(cfg)
        # at integer modes the continuous evaluator equals the table
        k_int = TWO_PI * np.array([1.0, 5.0, 13.0])
        om = table.omega_at(k_int)
        for kk, oo in zip(k_int, om):
            idx = list(table.n_modes).index(int(round(kk / TWO_PI)))
            assert oo == pytest.approx(table.omega[idx], rel=1e-12)
        # midpoints lie between neighboring values in the acoustic branch
        k_mid = TWO_PI * 5.5
        lo = table.omega[list(table.n_modes).index(5)]
        hi = table.omega[list(table.n_modes).index(6)]
        assert lo < float(table.omega_at(k_mid)[0]) < hi

    def test_group_velocity_is_derivative(self):
        cfg = make_config(n_ions=64)
        table = dispersion(cfg)
        k = TWO_PI * 7.3
        dk = 1e-5
        fd = (table.omega_at(k + dk)[0] - table.omega_at(k - dk)[0]) / (2 * dk)
        assert float(table.vgroup_at(k)[0]) == pytest.approx(fd, rel=1e-6)


class TestFrequencySplit:
    def table(self, n=32):
        return dispersion(make_config(n_ions=n))

    def test_split_reconstructs(self):
        table = self.table()
        rng = np.random.default_rng(2)
        dth = rng.standard_normal(32)
        dth -= dth.mean()                      # no zero-mode content
        dthd = rng.standard_normal(32)
        dthd -= dthd.mean()
        modes = to_modes(dth, dthd, table)
        plus, minus = frequency_split(modes)
        assert np.allclose(plus.theta_k + minus.theta_k, modes.theta_k,
                           atol=1e-13)
        assert np.allclose(plus.thetadot_k + minus.thetadot_k, modes.thetadot_k,
                           atol=1e-13)

    def test_zero_mode_content_rejected(self):
        table = self.table()
        modes = to_modes(np.ones(32), np.zeros(32), table)
        with pytest.raises(ModeError):
            frequency_split(modes)

    def test_project_out_zero_mode(self):
        table = self.table()
        modes = to_modes(np.ones(32) + np.sin(TWO_PI * np.arange(32) / 32),
                         np.zeros(32), table)
        cleaned, leaked = project_out_zero_mode(modes)
        assert leaked > 0
        plus, minus = frequency_split(cleaned)   # no longer raises
        assert plus.theta_k[0] == 0.0

    def test_pure_positive_frequency_mode(self):
        # theta ~ e^{ikx}, thetadot = -i omega theta: all norm on the + branch
        table = self.table()
        n = 32
        idx = list(table.n_modes).index(4)
        tk = np.zeros(n, dtype=complex)
        tk[idx] = 1.0
        om = table.omega[idx]
        from ionring.modes import ModeAmplitudes
        plus, minus = frequency_split(
            ModeAmplitudes(t=0.0, theta_k=tk, thetadot_k=-1j * om * tk,
                           table=table))
        spec = kg_norms(plus, minus)
        assert spec.total_plus == pytest.approx(om, rel=1e-12)
        assert spec.total_minus == pytest.approx(0.0, abs=1e-14)


class TestClusters:
    def test_two_separated_clusters(self):
        table = dispersion(make_config(n_ions=64))
        n = 64
        tk = np.zeros(n, dtype=complex)
        nm = list(table.n_modes)
        for mode in (5, 6, 7):
            tk[nm.index(mode)] = 1.0
        for mode in (-20, -21):
            tk[nm.index(mode)] = 0.5
        om = table.omega.copy()
        tdk = -1j * om * tk
        from ionring.modes import ModeAmplitudes
        plus, minus = frequency_split(
            ModeAmplitudes(t=0.0, theta_k=tk, thetadot_k=tdk, table=table))
        spec = kg_norms(plus, minus, cluster_floor=1e-6)
        ranges = sorted((c.n_lo, c.n_hi) for c in spec.clusters)
        assert ranges == [(-21, -20), (5, 7)]


class TestFinalPulse:
    def test_pulse_geometry_and_norm(self):
        cfg = make_config(n_ions=1000, kappa=1.2591, hbar=0.002)
        prof = build_profile(cfg)
        table = dispersion(cfg)
        pv, sign = build_final_pulse(cfg, 5, 0.2, prof, table)
        assert sign in (-1, 1)
        # unit Klein-Gordon norm in total
        modes = to_modes(pv.dtheta, pv.dtheta_dot, table, profile=prof)
        cleaned, _ = project_out_zero_mode(modes)
        plus, minus = frequency_split(cleaned)
        spec = kg_norms(plus, minus)
        assert abs(spec.total) == pytest.approx(1.0, rel=1e-9)
        # localized in the flat subsonic region
        x = np.arange(1000) / 1000
        flat = (x <= prof.x1) | (x >= prof.x4)
        w = np.abs(pv.dtheta) ** 2
        assert np.sum(w[flat]) / np.sum(w) > 0.99


class TestFrequencyCondition:
    def test_reference_roots(self):
        cfg = make_config(n_ions=1000, kappa=1.2591)
        table = dispersion(cfg)
        roots = solve_frequency_condition(48.555, table)
        ks = sorted(r.k / TWO_PI for r in roots)
        # low-k root near the pulse and two high-|k| partners
        assert any(abs(k - (-16.3)) < 3 for k in ks)
        assert any(k > 400 for k in ks)
        assert any(k < -400 for k in ks)
        assert not bloch_regime(roots)

    def test_bloch_regime_flag(self):
        cfg = make_config(n_ions=1000, kappa=2.0004)
        table = dispersion(cfg)
        roots = solve_frequency_condition(87.86, table)
        assert bloch_regime(roots)
