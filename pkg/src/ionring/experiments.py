"""The two headline experiments and their analyses: backward-propagation
thermality, quench correlations, and logarithmic negativity between the two
sides of the horizon.

Temperatures are dimensionless frequencies k_B T / hbar in units of 1/T,
the same convention as the Hawking temperature; the Bose factors they enter
are independent of the phase-space quantum hbar~.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import circulant

from .config import M_EFF, TWO_PI, RingConfig
from .dynamics import (GaussianState, PhaseVector, evolve_covariance,
                       evolve_phase, symplectic_eigenvalues)
from .lattice import ForceProvider, frame_at
from .modes import (DispersionTable, NormSpectrum, build_final_pulse,
                    dispersion, frequency_split, kg_norms, mode_numbers,
                    project_out_zero_mode, to_modes)
from .profile import Horizon, Profile, build_profile


class InconclusiveRunError(RuntimeError):
    """Backward propagation ended without localized, separated clusters."""


class RegionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# thermal states of the homogeneous ring


def thermal_state(config: RingConfig, temperature: float, t: float = 0.0
                  ) -> GaussianState:
    """Gaussian thermal state of the phonons around homogeneously spaced
    ions; temperature = 0 gives the vacuum.

    Normal-mode variances: <|q_k|^2> = hbar/(2 m_eff w_k) coth(w_k/2T),
    <|p_k|^2> = hbar m_eff w_k / 2 coth(w_k/2T).  The translation zero mode
    has no vacuum; it is assigned the free-particle thermal momentum
    variance (m_eff hbar T at high T) with the conjugate displacement
    variance chosen to saturate the uncertainty relation, so all symplectic
    eigenvalues are >= hbar/2 at every temperature.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    n = config.n_ions
    hbar = config.hbar
    table = dispersion(config, v_frac=1.0)
    om = table.omega.copy()
    nz = om > 0
    sig_q = np.empty(n)
    sig_p = np.empty(n)
    if temperature == 0:
        coth = np.ones(n)
    else:
        coth = 1.0 / np.tanh(np.where(nz, om, 1.0) / (2.0 * temperature))
    sig_q[nz] = hbar / (2.0 * M_EFF * om[nz]) * coth[nz]
    sig_p[nz] = 0.5 * hbar * M_EFF * om[nz] * coth[nz]
    om1 = float(np.min(om[nz]))
    p0 = M_EFF * hbar * temperature if temperature > 0 else 0.5 * M_EFF * hbar * om1
    sig_p[~nz] = p0
    sig_q[~nz] = hbar * hbar / (4.0 * p0)
    c_q = np.real(np.fft.ifft(sig_q))
    c_p = np.real(np.fft.ifft(sig_p))
    cov = np.zeros((2 * n, 2 * n))
    cov[:n, :n] = circulant(c_q)
    cov[n:, n:] = circulant(c_p)
    return GaussianState(t=t, mean=np.zeros(2 * n), cov=cov, hbar=hbar)


# ---------------------------------------------------------------------------
# experiment A: backward-propagation thermality


@dataclass
class ThermalityReport:
    s: int
    freq_sign: int
    final_spectrum: NormSpectrum
    initial_spectrum: NormSpectrum
    n_plus: float                 # positive-norm total at the initial time
    n_minus: float
    n_final: float
    omega0: float                 # central lab frequency of the final pulse
    t_hawking: float              # k_B T_H / hbar from the discrete low-k model
    t_hawking_continuum: float
    n_plus_predicted: float
    epsilon: float
    back_time: float
    flat_fraction: float
    zero_mode_leak: float
    bloch: bool
    bins: list[tuple[float, float, float, float, float]] = field(default_factory=list)
    # rows: (omega_lab, final_norm, initial_norm, predicted, rel_deviation)


def _swap_spectrum(spec: NormSpectrum) -> NormSpectrum:
    out = NormSpectrum(
        n_modes=spec.n_modes, k=spec.k,
        norm_plus=-spec.norm_minus, norm_minus=-spec.norm_plus,
        total_plus=-spec.total_minus, total_minus=-spec.total_plus,
        total=-spec.total)
    for c in spec.clusters:
        out.clusters.append(type(c)(
            n_lo=c.n_lo, n_hi=c.n_hi, norm_plus=-c.norm_minus,
            norm_minus=-c.norm_plus, k_center=c.k_center,
            omega_lab=c.omega_lab, vgroup_label=c.vgroup_label))
    return out


def _flat_fraction(dtheta: np.ndarray, profile: Profile, t: float) -> float:
    """Fraction of squared amplitude on ions currently outside the
    transition regions (flat sub- or supersonic)."""
    n = len(dtheta)
    u = (np.arange(n) / n + t) % 1.0
    in_trans = ((u > profile.x1) & (u < profile.x2)) | \
               ((u > profile.x3) & (u < profile.x4))
    w = np.abs(dtheta) ** 2
    return float(np.sum(w[~in_trans]) / np.sum(w))


def _spectrum_of(pv: PhaseVector, table: DispersionTable, profile: Profile,
                 cluster_floor: float = 1e-8) -> tuple[NormSpectrum, float]:
    mm = to_modes(pv.dtheta, pv.dtheta_dot, table, t=pv.t, profile=profile)
    mm, leak = project_out_zero_mode(mm)
    plus, minus = frequency_split(mm)
    return kg_norms(plus, minus, cluster_floor=cluster_floor), leak


def hawking_temperature_for(config: RingConfig, profile: Profile,
                            k_ref: float) -> tuple[float, float, Horizon | None]:
    """(discrete low-k T_H, continuum T_H, black-hole horizon)."""
    bh = [h for h in profile.find_horizons() if h.side == "black-hole"]
    th_cont = profile.hawking_temperature(bh[0])[1] if bh else 0.0
    bh_d = [h for h in profile.find_horizons("discrete-group-velocity", k_ref=k_ref)
            if h.side == "black-hole"]
    th_disc = profile.hawking_temperature(bh_d[0])[1] if bh_d else th_cont
    return th_disc, th_cont, (bh_d[0] if bh_d else (bh[0] if bh else None))


def run_backward_thermality(config: RingConfig, s: int | None = None,
                            back_time: float | None = None,
                            n_bins: int = 24,
                            evolved_cluster_floor: float = 0.03
                            ) -> ThermalityReport:
    """Backward propagation of the final pulse family and Klein-Gordon-norm
    thermality analysis (first moments only).

    Evolved spectra are segmented with an amplitude floor of
    `evolved_cluster_floor` x peak (well above the scattering debris left by
    the transition regions) so the incoming pulses resolve as separate
    clusters.
    """
    s = config.pulse_s if s is None else s
    budget = config.back_time if back_time is None else back_time
    profile = build_profile(config)
    table = dispersion(config)
    provider = ForceProvider(config)
    k_ref = TWO_PI * s
    t_h, t_h_cont, _bh = hawking_temperature_for(config, profile, k_ref)

    pv, freq_sign = build_final_pulse(config, s, config.pulse_center, profile,
                                      table, provider=provider,
                                      width=config.pulse_width_override)
    final_spec, _ = _spectrum_of(pv, table, profile)
    swap = final_spec.total < 0
    if swap:
        final_spec = _swap_spectrum(final_spec)

    # central lab frequency: the lab-frame frequency at the final pulse's
    # norm-weighted central wave number (the conserved frequency of the
    # dominant mode-conversion channel)
    w = final_spec.norm_plus - final_spec.norm_minus
    b = freq_sign
    om_lab = np.abs(final_spec.k + b * table.omega)
    k_c = float(np.sum(w * final_spec.k) / np.sum(w))
    omega0 = float(abs(k_c + b * table.omega_at(k_c)[0]))

    # backward evolution with a localization monitor; checkpoints snap to
    # whole ion-passage periods so every integrator step lands on the force
    # provider's cached phase grid
    n_chunks = 6
    n = config.n_ions
    checkpoints = [-round(budget * (j + 1) / n_chunks * n) / n
                   for j in range(n_chunks)]
    flat_frac = 0.0
    state = pv
    done = False
    for t_target in checkpoints:
        state = evolve_phase(state, t_target, provider)
        flat_frac = _flat_fraction(state.dtheta, profile, state.t)
        spec_now, _ = _spectrum_of(state, table, profile,
                                   cluster_floor=evolved_cluster_floor)
        high_k = [c for c in spec_now.clusters
                  if abs(c.k_center) > 4.0 * abs(k_ref)]
        if (-state.t >= 0.6 * budget and flat_frac >= config.flat_fraction_min
                and len(high_k) >= 2):
            done = True
            break
    if not done and flat_frac < config.flat_fraction_min:
        raise InconclusiveRunError(
            f"clusters not localized at t = {state.t:.3f}: flat fraction "
            f"{flat_frac:.4f} < {config.flat_fraction_min}")

    initial_spec, leak = _spectrum_of(state, table, profile,
                                      cluster_floor=evolved_cluster_floor)
    if swap:
        initial_spec = _swap_spectrum(initial_spec)

    n_final = final_spec.total
    n_plus = initial_spec.total_plus
    n_minus = initial_spec.total_minus
    x = omega0 / t_h
    n_pred = n_final / (1.0 - math.exp(-x))
    eps = abs(n_plus - n_pred) / n_pred

    # Bloch-regime detection through the frequency condition at omega0
    from .modes import bloch_regime, solve_frequency_condition
    roots = solve_frequency_condition(-omega0 if b < 0 else omega0, table)
    bloch = bloch_regime([r for r in roots if abs(r.k) > 4.0 * abs(k_ref)])

    # spectrally dissolved comparison: bin by lab frequency on the branch
    # carrying the final pulse
    om_i_plus = np.abs(initial_spec.k + b * table.omega)
    w_final = final_spec.norm_plus - final_spec.norm_minus
    sel = w_final > 1e-12 * np.max(w_final)
    lo, hi = float(np.min(om_lab[sel])), float(np.max(om_lab[sel]))
    edges = np.linspace(lo, hi, n_bins + 1)
    bins = []
    for i in range(n_bins):
        in_f = (om_lab >= edges[i]) & (om_lab < edges[i + 1])
        in_i = (om_i_plus >= edges[i]) & (om_i_plus < edges[i + 1])
        fb = float(np.sum(final_spec.norm_plus[in_f]))
        ib = float(np.sum(initial_spec.norm_plus[in_i]))
        om_c = 0.5 * (edges[i] + edges[i + 1])
        pred = fb / (1.0 - math.exp(-om_c / t_h)) if fb > 0 else 0.0
        dev = abs(ib - pred) / pred if pred > 0 else 0.0
        bins.append((om_c, fb, ib, pred, dev))

    return ThermalityReport(
        s=s, freq_sign=freq_sign, final_spectrum=final_spec,
        initial_spectrum=initial_spec, n_plus=n_plus, n_minus=n_minus,
        n_final=n_final, omega0=omega0, t_hawking=t_h,
        t_hawking_continuum=t_h_cont, n_plus_predicted=n_pred, epsilon=eps,
        back_time=-state.t, flat_fraction=flat_frac, zero_mode_leak=leak,
        bloch=bloch, bins=bins)


# ---------------------------------------------------------------------------
# experiment B: quench correlations


@dataclass
class CorrelationMap:
    t: float
    c: np.ndarray                   # N x N, <p_i p_j> / hbar
    theta: np.ndarray               # ion angles at t (mod 2pi)
    horizon_theta: float | None
    ridge_lines: list[tuple[np.ndarray, np.ndarray]]
    predicted_slope: float | None


def _target_profile(config: RingConfig) -> Profile:
    if config.ramp is None:
        return build_profile(config)
    return build_profile(config, v_min_frac=config.ramp.target_v_min_frac)


def ridge_prediction(config: RingConfig, k_ref: float = TWO_PI * 5.0):
    """(horizon angle, lab signal velocities inside/outside, slope).

    The main correlation feature links the phonon pair emitted at the
    horizon: upstream-moving partners travel at the ion velocity minus the
    local group velocity on each side.
    """
    prof = _target_profile(config)
    bh = [h for h in prof.find_horizons() if h.side == "black-hole"]
    if not bh:
        return None, None, None, None
    theta_h = bh[0].theta
    from .modes import uniform_group_velocity
    def c_of(v_frac):
        if config.interaction == "nearest-neighbor":
            return math.sqrt(TWO_PI**3 * config.kappa / (TWO_PI * v_frac))
        vg = float(uniform_group_velocity(config, v_frac, k_ref)[0])
        return TWO_PI * v_frac * vg
    v_in = prof.v_max - c_of(prof.v_max_frac)
    v_out = prof.v_min - c_of(prof.v_min_frac)
    slope = v_in / v_out
    return theta_h, v_in, v_out, slope


def run_quench_correlations(config: RingConfig, times=None,
                            temperature: float = 0.0,
                            include_external_hessian: bool = True
                            ) -> list[CorrelationMap]:
    """Evolve the covariance through the quench and emit the normalized
    momentum-correlation maps C_ij = <p_i p_j> / hbar at each output time."""
    if config.ramp is None:
        raise ValueError("quench run needs a ramp schedule")
    times = list(times if times is not None else config.times) or [0.5]
    provider = ForceProvider(config, include_external_hessian=include_external_hessian)
    state = thermal_state(config, temperature)
    theta_h, v_in, v_out, slope = ridge_prediction(config)
    t_q = 0.5 * config.ramp.tau
    out = []
    for t in sorted(times):
        if t > state.t:
            state = evolve_covariance(state, t, provider)
        n = config.n_ions
        c = state.cov[n:, n:] / config.hbar
        frame = frame_at(config, t)
        ridges = []
        if theta_h is not None and t > t_q:
            span = np.linspace(t_q, t, 64)
            ridges.append((theta_h + v_in * (t - span), theta_h + v_out * (t - span)))
            ridges.append((theta_h + v_out * (t - span), theta_h + v_in * (t - span)))
        out.append(CorrelationMap(t=t, c=c, theta=frame.theta % TWO_PI,
                                  horizon_theta=theta_h, ridge_lines=ridges,
                                  predicted_slope=slope))
    return out


def off_diagonal_peak(cmap: CorrelationMap, config: RingConfig,
                      mask_frac: float = 0.02) -> float:
    """max |C_ij| outside the circular diagonal band |i-j| <= mask_frac N."""
    n = config.n_ions
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :])
    dist = np.minimum(dist, n - dist)
    mask = dist > mask_frac * n
    return float(np.max(np.abs(cmap.c[mask])))


def detect_ridge_slope(cmap: CorrelationMap, config: RingConfig,
                       mask_frac: float = 0.02, level: float = 0.3):
    """Orientation of the correlation band emitted at the black-hole horizon.

    Only supersonic x subsonic ion pairs on the black-hole side of each
    region are considered (the white-hole horizon emits its own, often
    stronger, feature).  Returns (slope, peak_value); slope is
    d theta_in / d theta_out from a |C|-weighted principal-axis fit of the
    cells above `level` x peak.
    """
    prof = _target_profile(config)
    v_h = TWO_PI * config.kappa ** (1.0 / 3.0)
    n = config.n_ions
    theta = cmap.theta
    x = prof.g_inv(theta)
    x = x - np.floor(x)
    sup = (prof.gp(x) > v_h)
    th_h = cmap.horizon_theta if cmap.horizon_theta is not None else 0.0
    d = (theta - th_h + math.pi) % TWO_PI - math.pi
    if not (sup.any() and (~sup).any()):
        return None, 0.0
    half_in = 0.5 * d[sup].max()
    half_out = 0.5 * d[~sup].min()
    near_in = sup & (d > 0) & (d < half_in)
    near_out = ~sup & (d < 0) & (d > half_out)
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :])
    dist = np.minimum(dist, n - dist)
    sel = np.outer(near_in, near_out) & (dist > mask_frac * n)
    absc = np.abs(cmap.c)
    if not np.any(sel):
        return None, 0.0
    peak = float(np.max(absc[sel]))
    if peak <= 0:
        return None, 0.0
    strong = sel & (absc >= level * peak)
    ii, jj = np.nonzero(strong)
    w = absc[ii, jj]
    ti, tj = d[ii], d[jj]
    mi, mj = np.average(ti, weights=w), np.average(tj, weights=w)
    cov_ii = np.average((ti - mi) ** 2, weights=w)
    cov_jj = np.average((tj - mj) ** 2, weights=w)
    cov_ij = np.average((ti - mi) * (tj - mj), weights=w)
    mat = np.array([[cov_ii, cov_ij], [cov_ij, cov_jj]])
    evals, evecs = np.linalg.eigh(mat)
    v = evecs[:, -1]
    if abs(v[1]) < 1e-12:
        return None, peak
    return float(v[0] / v[1]), peak


# ---------------------------------------------------------------------------
# logarithmic negativity


def log_negativity(state: GaussianState, region_a, region_b) -> float:
    """E_N of the bipartition (A, B): partial transpose by momentum sign
    flip on B, then sum of -log2(2 nu / hbar) over symplectic eigenvalues
    below hbar/2."""
    a = np.asarray(region_a, dtype=int)
    b = np.asarray(region_b, dtype=int)
    if np.intersect1d(a, b).size:
        raise RegionError("regions must be disjoint")
    n = state.n
    nu_floor = state.hbar / 2.0
    nu_all = symplectic_eigenvalues(state.cov)
    if np.any(nu_all < nu_floor * (1.0 - 1e-6)):
        raise ValueError("covariance violates the uncertainty relation")
    sel = np.concatenate([a, b])
    qi = sel
    pi = sel + n
    ids = np.concatenate([qi, pi])
    gamma = state.cov[np.ix_(ids, ids)].copy()
    m = len(sel)
    flip = np.ones(2 * m)
    flip[m + len(a): 2 * m] = -1.0
    gamma = gamma * np.outer(flip, flip)
    nu = symplectic_eigenvalues(gamma)
    arg = 2.0 * nu / state.hbar
    en = -np.log2(np.minimum(arg, 1.0))
    return float(np.sum(en[arg < 1.0]))


@dataclass
class NegativityTrace:
    times: list[float]
    values: list[float]
    temperature: float
    region_inside: np.ndarray
    region_outside: np.ndarray


def horizon_regions(config: RingConfig, t: float, width_frac: float | None = None):
    """Ion index windows adjacent to the black-hole horizon at time t:
    (inside = supersonic side, outside = subsonic side)."""
    prof = _target_profile(config)
    bh = [h for h in prof.find_horizons() if h.side == "black-hole"]
    if not bh:
        raise RegionError("no black-hole horizon in the target profile")
    th_h = bh[0].theta
    wf = config.regions_width_frac if width_frac is None else width_frac
    m = max(2, round(wf * config.n_ions))
    frame = frame_at(config, t)
    d = (frame.theta - th_h) % TWO_PI
    inside = np.argsort(d)[:m]                       # just past the horizon
    outside = np.argsort((-d) % TWO_PI)[:m]          # just before it
    return inside, outside


def run_negativity_trace(config: RingConfig, temperature: float,
                         times=None) -> NegativityTrace:
    if config.ramp is None:
        raise ValueError("negativity trace needs a ramp schedule")
    times = sorted(times if times is not None else config.times or [0.2, 0.35, 0.5])
    provider = ForceProvider(config)
    state = thermal_state(config, temperature)
    values = []
    inside = outside = None
    for t in times:
        if t > state.t:
            state = evolve_covariance(state, t, provider)
        inside, outside = horizon_regions(config, t)
        values.append(log_negativity(state, inside, outside))
    return NegativityTrace(times=list(times), values=values,
                           temperature=temperature,
                           region_inside=inside, region_outside=outside)
