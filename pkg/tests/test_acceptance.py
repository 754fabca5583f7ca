"""End-to-end acceptance checks.

Each test covers one headline capability at its release tolerance and prints
a single PASS/FAIL line (visible with ``pytest -s``).  Budgets are wall-clock
ceilings for a single desk-scale machine.

The inhomogeneous-ring stability check is a known failure: the configured
supersonic cavity supports a parametrically amplified trapped mode, so the
monodromy spectrum genuinely leaves the unit circle.  The test states the
stable classification anyway and is expected to fail; see the repository
notes for the numerical evidence.
"""

import math
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from ionring.config import M_EFF, TWO_PI, parse_config
from ionring.dynamics import (GaussianState, PhaseVector, evolve_phase,
                              monodromy_stability, transfer_matrix)
from ionring.experiments import (hawking_temperature_for, log_negativity,
                                 off_diagonal_peak, detect_ridge_slope,
                                 ridge_prediction, run_backward_thermality,
                                 run_negativity_trace, run_quench_correlations)
from ionring.lattice import (ForceProvider, coulomb_charge, equilibrium_frame,
                             external_force_spline, force_matrix,
                             _coulomb_force)
from ionring.modes import dispersion
from ionring.profile import build_profile

from test_config import make_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def load(name):
    return parse_config(CONFIG_DIR / f"{name}.cfg")


def report(name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} {name}"
    if detail:
        line += f"  [{detail}]"
    print(line, flush=True)
    assert ok, line


class Budget:
    def __init__(self, seconds):
        self.limit = seconds
        self.t0 = time.monotonic()

    @property
    def elapsed(self):
        return time.monotonic() - self.t0

    def check(self, name):
        report(f"{name} runtime", self.elapsed < self.limit,
               f"{self.elapsed:.1f}s < {self.limit:.0f}s")


def test_profile_closure_and_geometry():
    budget = Budget(1.0)
    cfg = make_config(n_ions=1000, kappa=1.2591)
    prof = build_profile(cfg)
    err_vmax = abs(prof.v_max / TWO_PI - 2.5)
    report("profile v_max T/2pi = 2.5 (1e-9)", err_vmax < 1e-9,
           f"err={err_vmax:.2e}")
    bh = prof.find_horizons()[0]
    err_vh = abs(bh.v / TWO_PI - cfg.kappa ** (1.0 / 3.0))
    report("profile v_H T/2pi = kappa^(1/3) (1e-6)", err_vh < 1e-6,
           f"v_H={bh.v / TWO_PI:.6f} err={err_vh:.2e}")
    budget.check("profile")


def test_hawking_temperature_identity():
    budget = Budget(10.0)
    rng = np.random.default_rng(42)
    checked = 0
    worst = 0.0
    while checked < 100:
        try:
            cfg = make_config(kappa=rng.uniform(0.6, 2.0),
                              v_min_frac=rng.uniform(0.6, 0.95),
                              sigma=rng.uniform(0.2, 0.46),
                              gamma1=rng.uniform(0.01, 0.08),
                              gamma2=rng.uniform(0.01, 0.08))
            prof = build_profile(cfg)
        except ValueError:
            continue
        checked += 1
        for h in prof.find_horizons():
            form1, form2 = prof.hawking_temperature(h)
            worst = max(worst, abs(form1 - form2) / abs(form2))
    report("surface-gravity forms agree over 100 configs (1e-6 rel)",
           worst < 1e-6, f"worst rel dev={worst:.2e}")
    # quench geometry reference value
    cfg = load("quench_nn")
    prof = build_profile(cfg, v_min_frac=cfg.ramp.target_v_min_frac)
    t_h = prof.hawking_temperature(prof.find_horizons()[0])[1]
    report("quench-geometry T_H in [4.0, 5.5]", 4.0 < t_h < 5.5,
           f"T_H={t_h:.4f}")
    budget.check("hawking-identity")


def test_hessian_oracle():
    budget = Budget(30.0)
    worst = 0.0
    for interaction in ("nearest-neighbor", "full-coulomb"):
        for n_ions in (8, 12, 16):
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
            worst = max(worst, np.max(np.abs(f - fd)) / np.max(np.abs(f)))
    report("force matrix matches FD Hessian (1e-6 rel, N<=16, both models)",
           worst < 1e-6, f"worst rel dev={worst:.2e}")
    budget.check("hessian-oracle")


def test_symplectic_integrity():
    budget = Budget(300.0)
    cfg = make_config(n_ions=100)
    provider = ForceProvider(cfg)
    tm = transfer_matrix(0.0, 1.0, provider)
    defect = tm.symplectic_defect()
    report("one-period transfer matrix symplectic defect < 1e-7 (N=100)",
           defect < 1e-7, f"defect={defect:.2e}")

    rng = np.random.default_rng(7)
    pv = PhaseVector(t=0.0, data=rng.standard_normal(200))
    fwd = evolve_phase(pv, 1.0, provider)
    back = evolve_phase(fwd, 0.0, provider)
    rt = np.max(np.abs(back.data - pv.data))
    report("backward-forward round trip < 1e-7", rt < 1e-7, f"err={rt:.2e}")

    ref = evolve_phase(pv, 0.2, provider, n_sub=256).data
    errs = [np.max(np.abs(evolve_phase(PhaseVector(0.0, pv.data.copy()), 0.2,
                                       provider, n_sub=ns).data - ref))
            for ns in (16, 32, 64)]
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    report("second-order convergence under step halving",
           all(1.8 < r < 2.2 for r in rates),
           "rates=" + ", ".join(f"{r:.2f}" for r in rates))
    budget.check("symplectic")


def test_dispersion():
    budget = Budget(60.0)
    cfg = make_config(n_ions=256, interaction="nearest-neighbor")
    table = dispersion(cfg)
    n, q, vf = cfg.n_ions, coulomb_charge(cfg), cfg.v_min_frac
    phi = math.pi / n
    k_theta = (math.pi / vf) ** 2 * (q * math.pi / vf) * (
        1 + math.cos(phi) ** 2) / math.sin(phi) ** 3 / TWO_PI ** 2
    expected = 2.0 * math.sqrt(k_theta / M_EFF) * np.abs(
        np.sin(table.k / (2 * n)))
    dev = np.max(np.abs(table.omega - expected)) / expected.max()
    report("NN frequencies match |sin| law (1e-10)", dev < 1e-10,
           f"rel dev={dev:.2e}")

    cfg = make_config(n_ions=256, interaction="full-coulomb")
    table = dispersion(cfg)
    nm = list(table.n_modes)
    vg = [float(table.vgroup[nm.index(m)]) for m in (5, 4, 3, 2, 1)]
    report("full-Coulomb group velocity grows as k decreases (modes 5..1)",
           all(b > a for a, b in zip(vg, vg[1:])),
           "v_g=" + ", ".join(f"{v:.2f}" for v in vg))
    budget.check("dispersion")


class TestThermality:
    def test_nearest_neighbor(self):
        budget = Budget(1800.0)
        cfg = load("thermality_nn")
        rep = run_backward_thermality(cfg)
        k_ref = TWO_PI * cfg.pulse_s
        high = [c for c in rep.initial_spectrum.clusters
                if abs(c.k_center) > 4.0 * abs(k_ref)]
        pos = [c for c in high
               if c.k_center > 0 and c.norm_plus + c.norm_minus > 0]
        neg = [c for c in high
               if c.k_center < 0 and c.norm_plus + c.norm_minus < 0]
        report("thermality: two incoming high-|k| clusters, opposite "
               "wave-number and frequency signs",
               len(high) >= 2 and pos and neg,
               f"{len(high)} clusters, k_c="
               + ", ".join(f"{c.k_center:.0f}" for c in high))
        book = abs(rep.n_plus + rep.n_minus - rep.n_final)
        report("thermality: norm bookkeeping N+ + N- = N_final (1e-3)",
               book < 1e-3, f"dev={book:.2e}")
        report("thermality: Bose-factor deviation eps < 0.05",
               rep.epsilon < 0.05,
               f"eps={rep.epsilon:.4f} T_H={rep.t_hawking:.3f} "
               f"omega0={rep.omega0:.2f}")
        budget.check("thermality-nn")

    def test_full_coulomb(self):
        budget = Budget(1800.0)
        rep = run_backward_thermality(load("thermality_coulomb"))
        report("thermality full-Coulomb: eps <= 0.2", rep.epsilon <= 0.2,
               f"eps={rep.epsilon:.4f}")
        budget.check("thermality-coulomb")

    def test_bloch_regime(self):
        budget = Budget(1800.0)
        cfg = load("thermality_bloch")
        rep = run_backward_thermality(cfg)
        report("thermality Bloch regime: outside-zone flag set", rep.bloch,
               f"bloch={rep.bloch}")
        k_edge = math.pi * cfg.n_ions
        k_ref = TWO_PI * cfg.pulse_s
        high = [c for c in rep.initial_spectrum.clusters
                if abs(c.k_center) > 4.0 * abs(k_ref)]
        main = max(high, key=lambda c: abs(c.norm_plus + c.norm_minus))
        report("thermality Bloch regime: incoming cluster near zone edge",
               abs(main.k_center) > 0.8 * k_edge,
               f"|k_c|/k_edge={abs(main.k_center) / k_edge:.3f}")
        budget.check("thermality-bloch")


class TestQuenchCorrelations:
    def test_vacuum_band_and_ridge(self):
        budget = Budget(1200.0)
        cfg = load("quench_nn")
        maps = run_quench_correlations(cfg, times=(0.0, 0.5))
        pre = off_diagonal_peak(maps[0], cfg)
        post = off_diagonal_peak(maps[1], cfg)
        report("quench: off-diagonal band appears after quench",
               post > 3.0 * pre, f"post/pre={post / pre:.1f}")
        slope, peak = detect_ridge_slope(maps[1], cfg)
        pred = ridge_prediction(cfg)[3]
        rel = abs(slope - pred) / abs(pred)
        report("quench: ridge slope within 20% of group-velocity prediction",
               peak > 0 and rel < 0.2,
               f"slope={slope:.3f} pred={pred:.3f} rel dev={rel:.3f}")
        budget.check("quench-vacuum")

    def test_hot_start_robustness(self):
        budget = Budget(1200.0)
        cfg = load("quench_nn")
        prof = build_profile(cfg, v_min_frac=cfg.ramp.target_v_min_frac)
        t_h = hawking_temperature_for(cfg, prof, TWO_PI * 5)[0]
        maps = run_quench_correlations(cfg, times=(0.0, 0.5),
                                       temperature=100.0 * t_h)
        pre = off_diagonal_peak(maps[0], cfg)
        post = off_diagonal_peak(maps[1], cfg)
        report("quench: band detectable at T_init = 100 T_H (>5x background)",
               post > 5.0 * pre, f"post/pre={post / max(pre, 1e-300):.1e}")
        budget.check("quench-hot")


class TestNegativity:
    def test_two_oscillator_oracle(self):
        hbar = 0.002
        worst = 0.0
        for r in (0.2, 1.0, 2.5):
            ch, sh = math.cosh(2 * r), math.sinh(2 * r)
            cov = hbar / 2 * np.array([[ch, sh, 0, 0],
                                       [sh, ch, 0, 0],
                                       [0, 0, ch, -sh],
                                       [0, 0, -sh, ch]])
            st = GaussianState(t=0.0, mean=np.zeros(4), cov=cov, hbar=hbar)
            worst = max(worst, abs(log_negativity(st, [0], [1])
                                   - 2 * r / math.log(2)))
        report("negativity: two-oscillator oracle (1e-8)", worst < 1e-8,
               f"worst dev={worst:.2e}")

    def test_growth_and_thermal_death(self):
        budget = Budget(600.0)
        cfg = replace(load("quench_nn"), n_ions=100)
        prof = build_profile(cfg, v_min_frac=cfg.ramp.target_v_min_frac)
        t_h = hawking_temperature_for(cfg, prof, TWO_PI * 5)[0]
        times = (0.05, 0.10, 0.15)
        for label, temp in (("T=0", 0.0), ("T=10 T_H", 10.0 * t_h)):
            trace = run_negativity_trace(cfg, temp, times=times)
            report(f"negativity increasing post-quench at {label}",
                   all(b > a for a, b in zip(trace.values, trace.values[1:])),
                   "E_N=" + ", ".join(f"{v:.3f}" for v in trace.values))
        trace = run_negativity_trace(cfg, 100.0 * t_h, times=times)
        report("negativity < 1e-6 at T=100 T_H", max(trace.values) < 1e-6,
               f"max E_N={max(trace.values):.2e}")
        budget.check("negativity")


class TestStability:
    def test_homogeneous_ring_stable(self):
        budget = Budget(300.0)
        cfg = make_config(n_ions=1000, v_min_frac=1.0)
        rep = monodromy_stability(cfg)
        dev = np.max(np.abs(np.abs(rep.eigenvalues) - 1.0))
        report("stability: homogeneous ring all |lambda| = 1 (1e-8)",
               rep.classification == "stable" and dev < 1e-8,
               f"{rep.classification}, max dev={dev:.2e}")
        budget.check("stability-homogeneous")

    def test_inhomogeneous_ring_stable(self):
        # Known failure: the supersonic cavity hosts a parametrically
        # amplified trapped mode, so |lambda|_max genuinely exceeds 1.
        cfg = load("thermality_nn")
        rep = monodromy_stability(cfg)
        top = float(np.max(np.abs(rep.eigenvalues)))
        report("stability: horizon configuration classified stable",
               rep.classification == "stable",
               f"{rep.classification}, max |lambda|={top:.3f}")
