"""Command line entry point: configuration parsing, experiment orchestration
and bit-stable result emission.

Exit codes: 0 success, 1 usage/configuration errors, 2 physics errors
(infeasible profile, divergence, inconclusive run).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from .config import (M_EFF, TWO_PI, ConfigError, RampSchedule, RingConfig,
                     parse_config)
from .dynamics import DivergenceError, default_n_sub, monodromy_stability
from .experiments import (InconclusiveRunError, RegionError, off_diagonal_peak,
                          run_backward_thermality, run_negativity_trace,
                          run_quench_correlations)
from .io import RunManifest, write_csv, write_json, write_matrix_csv
from .lattice import ForceProvider
from .modes import dispersion
from .profile import ProfileError, build_profile, profile_table

USAGE_ERROR = 1
PHYSICS_ERROR = 2


def _add_common(p: argparse.ArgumentParser, config_required: bool = True):
    p.add_argument("--config", type=Path, required=config_required,
                   help="key=value configuration file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="cap worker threads (results are independent of it)")
    p.add_argument("--seedless", action="store_true",
                   help="assert that no RNG is used anywhere (always true)")
    # overrides mirroring config keys
    p.add_argument("--n-ions", type=int, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--v-min-frac", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--interaction", choices=("nearest-neighbor", "full-coulomb"),
                   default=None)
    p.add_argument("--n-sub", type=int, default=None)


def _apply_overrides(config: RingConfig, args) -> RingConfig:
    updates = {}
    for attr, key in (("n_ions", "n_ions"), ("kappa", "kappa"),
                      ("v_min_frac", "v_min_frac"), ("sigma", "sigma"),
                      ("interaction", "interaction"), ("n_sub", "n_sub")):
        val = getattr(args, attr, None)
        if val is not None:
            updates[key] = val
    return dataclasses.replace(config, **updates) if updates else config


def _limit_threads(args):
    if args.threads is not None:
        import os
        os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
        os.environ.setdefault("OPENBLAS_NUM_THREADS", str(args.threads))


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage failures exit with code 1, keeping code 2
    reserved for physics errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ionring")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    for name, helptext in (
        ("profile", "emit the velocity profile, horizons and T_H"),
        ("dispersion", "emit the reference-ring dispersion table"),
        ("stability", "Floquet/monodromy classification"),
        ("thermality", "backward-propagation Klein-Gordon thermality run"),
        ("quench", "black-hole-formation quench correlation maps"),
        ("negativity", "logarithmic negativity across the horizon"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        if name == "thermality":
            p.add_argument("--s", type=int, default=None, help="pulse index 1..20")
            p.add_argument("--back-time", type=float, default=None)
        if name in ("quench", "negativity"):
            p.add_argument("--temperature", type=float, default=0.0,
                           help="initial temperature k_B T/hbar in 1/T units")
            p.add_argument("--times", type=str, default=None,
                           help="comma separated output times (units of T)")

    units = sub.add_parser("units", help="physical mapping for given m, L, T")
    units.add_argument("--mass", type=float, required=True, help="ion mass [kg]")
    units.add_argument("--circumference", type=float, required=True,
                       help="ring circumference L [m]")
    units.add_argument("--period", type=float, required=True,
                       help="rotation period T [s]")
    _add_common(units, config_required=False)
    return ap


def _cmd_profile(config: RingConfig, out: Path, manifest: RunManifest) -> int:
    prof = build_profile(config)
    x, theta, v, c, gpp = profile_table(prof, n_points=4096)
    rows = zip(x, theta, v, c, gpp)
    extra = {"v_max_frac": repr(prof.v_max_frac), "v_min_frac": repr(prof.v_min_frac)}
    horizons = prof.find_horizons()
    for i, h in enumerate(horizons):
        t_h = prof.hawking_temperature(h)
        extra[f"horizon_{i}"] = (f"side={h.side} label={h.label!r} "
                                 f"theta={h.theta!r} T_H={t_h[1]!r}")
    # both supersonic-bound conventions, logged rather than silently chosen
    extra["supersonic_right_bound_angle"] = repr(TWO_PI - config.sigma * prof.v_min)
    extra["supersonic_right_bound_literal"] = repr(1.0 - config.sigma * prof.v_min)
    manifest.add(write_csv(out / "profile.csv",
                           ["x", "theta", "v", "c_continuum", "gpp"], rows,
                           config, extra))
    print(f"v_max*T/2pi = {prof.v_max_frac:.6f}  v_min*T/2pi = {prof.v_min_frac:.6f}")
    for h in horizons:
        print(f"horizon: {h.side} at theta = {h.theta:.6f}")
    return 0


def _cmd_dispersion(config: RingConfig, out: Path, manifest: RunManifest) -> int:
    table = dispersion(config)
    rows = zip(table.n_modes, table.k, table.omega, table.vgroup)
    manifest.add(write_csv(out / "dispersion.csv",
                           ["n", "k", "omega", "vgroup"], rows, config,
                           {"interaction": config.interaction,
                            "v_frac": repr(table.v_frac)}))
    return 0


def _cmd_stability(config: RingConfig, out: Path, manifest: RunManifest) -> int:
    report = monodromy_stability(config)
    rows = [(ev.real, ev.imag, abs(ev)) for ev in report.eigenvalues]
    manifest.add(write_csv(out / "monodromy.csv", ["re", "im", "modulus"],
                           rows, config,
                           {"classification": report.classification,
                            "max_modulus": repr(report.max_modulus),
                            "growth_rate": repr(report.growth_rate)}))
    print(f"classification: {report.classification} "
          f"(max |lambda| = {report.max_modulus:.3e})")
    return 0


def _spectrum_rows(spec, table):
    return zip(spec.n_modes, spec.k, spec.norm_plus, spec.norm_minus)


def _cmd_thermality(config: RingConfig, out: Path, manifest: RunManifest,
                    args) -> int:
    report = run_backward_thermality(config, s=args.s, back_time=args.back_time)
    s = report.s
    table = dispersion(config)
    for tag, spec in (("final", report.final_spectrum),
                      ("initial", report.initial_spectrum)):
        manifest.add(write_csv(
            out / f"spectrum_{tag}_s{s}.csv",
            ["n", "k", "norm_plus", "norm_minus"],
            _spectrum_rows(spec, table), config, {"t_tag": tag}))
    payload = {
        "s": s,
        "freq_sign": report.freq_sign,
        "n_plus": report.n_plus,
        "n_minus": report.n_minus,
        "n_final": report.n_final,
        "omega0": report.omega0,
        "t_hawking": report.t_hawking,
        "t_hawking_continuum": report.t_hawking_continuum,
        "n_plus_predicted": report.n_plus_predicted,
        "epsilon": report.epsilon,
        "back_time": report.back_time,
        "flat_fraction": report.flat_fraction,
        "bloch": report.bloch,
        "bins": report.bins,
        "spectra": [f"spectrum_final_s{s}.csv", f"spectrum_initial_s{s}.csv"],
    }
    manifest.add(write_json(out / f"thermality_s{s}.json", payload, config))
    print(f"epsilon = {report.epsilon:.4f}  (N+ = {report.n_plus:.4f}, "
          f"predicted {report.n_plus_predicted:.4f})")
    return 0


def _parse_times(args, default):
    if getattr(args, "times", None):
        return [float(v) for v in args.times.split(",")]
    return default


def _cmd_quench(config: RingConfig, out: Path, manifest: RunManifest, args) -> int:
    times = _parse_times(args, list(config.times) or [0.5])
    maps = run_quench_correlations(config, times, temperature=args.temperature)
    for cmap in maps:
        tag = f"{cmap.t:g}"
        manifest.add(write_matrix_csv(out / f"correlations_t{tag}.csv", cmap.c,
                                      config,
                                      {"t": repr(cmap.t),
                                       "horizon_theta": repr(cmap.horizon_theta),
                                       "predicted_slope": repr(cmap.predicted_slope)}))
        manifest.add(write_csv(out / f"theta_t{tag}.csv", ["i", "theta"],
                               zip(range(config.n_ions), cmap.theta), config))
        if cmap.ridge_lines:
            rows = []
            for line_id, (ta, tb) in enumerate(cmap.ridge_lines):
                rows.extend((line_id, a, b) for a, b in zip(ta, tb))
            manifest.add(write_csv(out / f"ridges_t{tag}.csv",
                                   ["line", "theta_a", "theta_b"], rows, config))
        peak = off_diagonal_peak(cmap, config)
        print(f"t = {cmap.t:g}: off-diagonal peak |C| = {peak:.3e}")
    return 0


def _cmd_negativity(config: RingConfig, out: Path, manifest: RunManifest,
                    args) -> int:
    times = _parse_times(args, list(config.times) or [0.2, 0.35, 0.5])
    trace = run_negativity_trace(config, args.temperature, times)
    rows = [(t, v, trace.temperature) for t, v in zip(trace.times, trace.values)]
    manifest.add(write_csv(out / "negativity.csv", ["t", "E_N", "T_init"],
                           rows, config))
    for t, v in zip(trace.times, trace.values):
        print(f"t = {t:g}: E_N = {v:.6f}")
    return 0


def _cmd_units(args) -> int:
    m, length, period = args.mass, args.circumference, args.period
    hbar_si = 1.054571817e-34
    eps_factor = 8.9875517923e9      # 1/(4 pi eps0) [N m^2 C^-2]
    e_charge = 1.602176634e-19
    coulomb = eps_factor * e_charge**2
    kappa_over_2n = coulomb / (m * length**3 / period**2)
    hbar_tilde = hbar_si * period * (2.0 * math.pi / length) ** 2 / m
    print(f"natural units: m = {m:.6e} kg, L = {length:.6e} m, T = {period:.6e} s")
    print(f"e^2/4pi eps0 = {kappa_over_2n:.6e} * m L^3 T^-2  (= kappa/(2N))")
    print(f"hbar~ = hbar T (2pi/L)^2 / m = {hbar_tilde:.6e}")
    print(f"frequency unit 1/T = {1.0 / period:.6e} Hz")
    print(f"k_B T_H/hbar = 5/T corresponds to {5.0 / period / (2 * math.pi):.6e} Hz"
          f" * 2pi")
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.subcommand == "units":
        return _cmd_units(args)
    _limit_threads(args)
    try:
        config = parse_config(args.config)
        config = _apply_overrides(config, args)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return USAGE_ERROR
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config, args.subcommand)
    try:
        if args.subcommand == "profile":
            rc = _cmd_profile(config, out, manifest)
        elif args.subcommand == "dispersion":
            rc = _cmd_dispersion(config, out, manifest)
        elif args.subcommand == "stability":
            rc = _cmd_stability(config, out, manifest)
        elif args.subcommand == "thermality":
            rc = _cmd_thermality(config, out, manifest, args)
        elif args.subcommand == "quench":
            rc = _cmd_quench(config, out, manifest, args)
        elif args.subcommand == "negativity":
            rc = _cmd_negativity(config, out, manifest, args)
        else:  # pragma: no cover
            return USAGE_ERROR
    except (ProfileError, DivergenceError, InconclusiveRunError,
            RegionError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return PHYSICS_ERROR
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    manifest.write(out)
    return rc


if __name__ == "__main__":
    sys.exit(main())
