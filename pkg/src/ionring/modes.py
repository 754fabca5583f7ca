"""Label-space Fourier analysis: discrete dispersion, frequency splitting,
Klein-Gordon norms, final-pulse construction and the frequency condition.

Wave numbers are in full-ring label units: mode n carries k_n = 2 pi n with
n in (-N/2, N/2], so the Brillouin zone is |k| <= pi N.  The mode transform
is the unitary DFT over ion labels; a phonon excitation compactly supported
in the flat subsonic region is analyzed against the dispersion of a
homogeneous reference ring at the subsonic spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import M_EFF, TWO_PI, RingConfig
from .lattice import coulomb_charge


class ModeError(ValueError):
    pass


def mode_numbers(n: int) -> np.ndarray:
    """Mode indices in (-N/2, N/2], in FFT storage order."""
    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    if n % 2 == 0:
        m = m.copy()
        m[n // 2] = n // 2
    return m


def _reference_stiffnesses(config: RingConfig, v_frac: float) -> np.ndarray:
    """Pair stiffnesses K_j of a homogeneous ring of N ions at the spacing
    of a region with velocity v = 2 pi v_frac / T (circumference shrunk to
    v T; chord distances are taken on that ring).  Index j = 1..N-1."""
    n = config.n_ions
    q = coulomb_charge(config)
    circ = v_frac          # circumference in units of L: v T / (2 pi L)
    j = np.arange(1, n)
    # chord law on the shrunk ring: V(s) = q / d(s), d(s) = (C/pi) sin(pi s/C);
    # pair j sits at arc separation s_j = j C / N, i.e. phi_j = pi j / N
    phi = math.pi * j / n
    sin, cos = np.sin(phi), np.cos(phi)
    pref = q * math.pi / circ          # q pi / C
    d2v_ds2 = (math.pi / circ) ** 2 * pref * (1.0 + cos**2) / sin**3
    # dynamical coordinate is the full-ring angle theta; arc displacement
    # is (L/2pi) dtheta, so K_theta = K_s / (2 pi)^2
    k_theta = d2v_ds2 / (TWO_PI * TWO_PI)
    if config.interaction == "nearest-neighbor":
        mask = np.zeros_like(k_theta)
        mask[0] = 1.0
        mask[-1] = 1.0
        k_theta = k_theta * mask
    return k_theta


def _signed_separations(n: int) -> np.ndarray:
    """Nearest-image representatives of the pair separations j = 1..N-1.

    Between integer modes the lattice sum must use the signed separation
    (j - N for j > N/2); at integer multiples of 2pi both conventions agree,
    but only the signed one interpolates smoothly in k.
    """
    j = np.arange(1, n)
    return np.where(j <= n // 2, j, j - n)


def uniform_dispersion_omega(config: RingConfig, v_frac: float, k) -> np.ndarray:
    """omega(k) of the homogeneous reference ring at velocity fraction
    v_frac, evaluated at (possibly non-integer multiples of 2pi) wave
    numbers k; omega is 2 pi N periodic in k."""
    n = config.n_ions
    kj = _reference_stiffnesses(config, v_frac)
    j = _signed_separations(n)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    phase = np.outer(k / n, j)        # k j / N with k = 2 pi n_mode
    om2 = (1.0 / M_EFF) * np.sum(kj[None, :] * (1.0 - np.cos(phase)), axis=1)
    return np.sqrt(np.maximum(om2, 0.0))


def uniform_group_velocity(config: RingConfig, v_frac: float, k) -> np.ndarray:
    """d omega / d k by exact spectral differentiation."""
    n = config.n_ions
    kj = _reference_stiffnesses(config, v_frac)
    j = _signed_separations(n)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    phase = np.outer(k / n, j)
    om = uniform_dispersion_omega(config, v_frac, k)
    dom2 = (1.0 / M_EFF) * np.sum(kj[None, :] * np.sin(phase) * (j[None, :] / n), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        vg = np.where(om > 0, dom2 / (2.0 * np.maximum(om, 1e-300)), 0.0)
    return vg


@dataclass
class DispersionTable:
    interaction: str
    v_frac: float                 # reference velocity fraction (subsonic spacing)
    n_modes: np.ndarray           # mode indices, FFT order
    k: np.ndarray                 # 2 pi n
    omega: np.ndarray             # >= 0
    vgroup: np.ndarray            # d omega / d k
    config: RingConfig = field(repr=False, default=None)

    def omega_at(self, k) -> np.ndarray:
        return uniform_dispersion_omega(self.config, self.v_frac, k)

    def vgroup_at(self, k) -> np.ndarray:
        return uniform_group_velocity(self.config, self.v_frac, k)


def dispersion(config: RingConfig, interaction: str | None = None,
               v_frac: float | None = None) -> DispersionTable:
    """Dispersion table of the homogeneous reference ring (default: subsonic
    spacing, config.v_min_frac)."""
    if interaction is not None and interaction != config.interaction:
        from dataclasses import replace
        config = replace(config, interaction=interaction)
    vf = config.v_min_frac if v_frac is None else v_frac
    nm = mode_numbers(config.n_ions)
    k = TWO_PI * nm.astype(float)
    om = uniform_dispersion_omega(config, vf, k)
    vg = uniform_group_velocity(config, vf, k)
    om[nm == 0] = 0.0
    vg[nm == 0] = 0.0
    return DispersionTable(interaction=config.interaction, v_frac=vf,
                           n_modes=nm, k=k, omega=om, vgroup=vg, config=config)


@dataclass
class ModeAmplitudes:
    t: float
    theta_k: np.ndarray       # complex, FFT order
    thetadot_k: np.ndarray
    table: DispersionTable
    out_of_region_fraction: float = 0.0


def to_modes(dtheta: np.ndarray, dtheta_dot: np.ndarray, table: DispersionTable,
             t: float = 0.0, profile=None) -> ModeAmplitudes:
    """Unitary DFT over ion labels.  When a profile is given, the fraction of
    squared amplitude outside the flat subsonic region is reported (a warning
    quantity; never blocks)."""
    n = len(dtheta)
    norm = 1.0 / math.sqrt(n)
    tk = norm * np.fft.fft(dtheta)
    tdk = norm * np.fft.fft(dtheta_dot)
    frac = 0.0
    if profile is not None:
        x = np.arange(n) / n
        flat = (x <= profile.x1) | (x >= profile.x4)
        w = np.abs(dtheta) ** 2
        tot = float(np.sum(w))
        if tot > 0:
            frac = float(np.sum(w[~flat]) / tot)
    return ModeAmplitudes(t=t, theta_k=tk, thetadot_k=tdk, table=table,
                          out_of_region_fraction=frac)


def from_modes(modes: ModeAmplitudes) -> tuple[np.ndarray, np.ndarray]:
    n = len(modes.theta_k)
    norm = math.sqrt(n)
    return norm * np.fft.ifft(modes.theta_k), norm * np.fft.ifft(modes.thetadot_k)


def project_out_zero_mode(modes: ModeAmplitudes) -> tuple[ModeAmplitudes, float]:
    """Drop any translation-zero-mode content (it carries no Klein-Gordon
    norm and blocks the frequency split); returns the removed amplitude."""
    zero = modes.table.n_modes == 0
    leaked = float(abs(modes.theta_k[zero][0]) + abs(modes.thetadot_k[zero][0]))
    tk = np.where(zero, 0.0, modes.theta_k)
    tdk = np.where(zero, 0.0, modes.thetadot_k)
    return ModeAmplitudes(t=modes.t, theta_k=tk, thetadot_k=tdk,
                          table=modes.table,
                          out_of_region_fraction=modes.out_of_region_fraction), leaked


def frequency_split(modes: ModeAmplitudes) -> tuple[ModeAmplitudes, ModeAmplitudes]:
    """2 theta_k^+- = theta_k +- i thetadot_k / omega_k and
    2 thetadot_k^+- = thetadot_k -+ i omega_k theta_k; plus + minus
    reproduces the input identically."""
    om = modes.table.omega
    zero = modes.table.n_modes == 0
    amp0 = abs(modes.theta_k[zero][0]) + abs(modes.thetadot_k[zero][0])
    scale = float(np.max(np.abs(modes.theta_k)) + np.max(np.abs(modes.thetadot_k)))
    if amp0 > 1e-12 * max(scale, 1.0):
        raise ModeError("nonzero amplitude on the translation zero mode")
    om_safe = np.where(zero, 1.0, om)
    tk, tdk = modes.theta_k, modes.thetadot_k
    plus = ModeAmplitudes(
        t=modes.t,
        theta_k=np.where(zero, 0.0, 0.5 * (tk + 1j * tdk / om_safe)),
        thetadot_k=np.where(zero, 0.0, 0.5 * (tdk - 1j * om_safe * tk)),
        table=modes.table)
    minus = ModeAmplitudes(
        t=modes.t,
        theta_k=np.where(zero, 0.0, 0.5 * (tk - 1j * tdk / om_safe)),
        thetadot_k=np.where(zero, 0.0, 0.5 * (tdk + 1j * om_safe * tk)),
        table=modes.table)
    return plus, minus


@dataclass
class PulseCluster:
    n_lo: int                 # inclusive mode-index range (signed mode numbers)
    n_hi: int
    norm_plus: float
    norm_minus: float
    k_center: float           # norm-weighted wave number
    omega_lab: float          # lab frequency |k/T + b omega| at k_center
    vgroup_label: float       # envelope velocity in label space


@dataclass
class NormSpectrum:
    """Per-mode Klein-Gordon norms after the 1/2i convention: N_k^+ >= 0 and
    N_k^- <= 0; totals and the pulse-cluster segmentation."""
    n_modes: np.ndarray
    k: np.ndarray
    norm_plus: np.ndarray      # omega_k |theta_k^+|^2
    norm_minus: np.ndarray     # -omega_k |theta_k^-|^2
    total_plus: float
    total_minus: float
    total: float
    clusters: list[PulseCluster] = field(default_factory=list)


def kg_norms(plus: ModeAmplitudes, minus: ModeAmplitudes,
             cluster_floor: float = 1e-8, cluster_gap: int = 3) -> NormSpectrum:
    om = plus.table.omega
    np_k = om * np.abs(plus.theta_k) ** 2
    nm_k = -om * np.abs(minus.theta_k) ** 2
    nm_arr = plus.table.n_modes
    k = plus.table.k
    spec = NormSpectrum(n_modes=nm_arr, k=k, norm_plus=np_k, norm_minus=nm_k,
                        total_plus=float(np.sum(np_k)),
                        total_minus=float(np.sum(nm_k)),
                        total=float(np.sum(np_k + nm_k)))
    # cluster segmentation on sorted mode index
    order = np.argsort(nm_arr)
    amp = (np.abs(plus.theta_k) + np.abs(minus.theta_k))[order]
    peak = float(np.max(amp)) if len(amp) else 0.0
    if peak <= 0:
        return spec
    active = amp > cluster_floor * peak
    # merge gaps shorter than cluster_gap
    runs = []
    i = 0
    nmo = nm_arr[order]
    while i < len(active):
        if not active[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(active):
            if active[j + 1]:
                j += 1
                continue
            # look ahead across a short gap
            ahead = active[j + 1: j + 1 + cluster_gap]
            if np.any(ahead):
                j += 1 + int(np.argmax(ahead))
            else:
                break
        runs.append((i, j))
        i = j + 1
    for (i0, i1) in runs:
        sel = order[i0: i1 + 1]
        w = np_k[sel] - nm_k[sel]           # positive weight
        tot_w = float(np.sum(w))
        if tot_w <= 0:
            continue
        k_c = float(np.sum(w * k[sel]) / tot_w)
        npl = float(np.sum(np_k[sel]))
        nmi = float(np.sum(nm_k[sel]))
        b = 1.0 if npl >= -nmi else -1.0
        om_c = float(plus.table.omega_at(k_c)[0])
        vg_c = float(plus.table.vgroup_at(k_c)[0])
        spec.clusters.append(PulseCluster(
            n_lo=int(nmo[i0]), n_hi=int(nmo[i1]),
            norm_plus=npl, norm_minus=nmi,
            k_center=k_c,
            omega_lab=abs(k_c + b * om_c),
            vgroup_label=b * vg_c))
    return spec


def build_final_pulse(config: RingConfig, s: int, center: float, profile,
                      table: DispersionTable, freq_sign: int | None = None,
                      provider=None, width: float | None = None):
    """Final pulse of the backward-propagation experiment.

    Mode amplitudes theta_k = k exp(-((k - 2 pi s)/(40 pi))^2) translated to
    `center`, with velocities for a pure single-sign-frequency pulse.  When
    freq_sign is None the sign is chosen operationally: a short forward test
    evolution must carry the pulse away from the black-hole horizon.  The
    output is normalized to unit total Klein-Gordon norm magnitude.

    Returns (PhaseVector, chosen_sign).
    """
    from .dynamics import PhaseVector
    from .lattice import ForceProvider

    if not 1 <= s <= 20:
        raise ModeError("pulse index s must lie in 1..20")
    n = config.n_ions
    nm = table.n_modes
    k = table.k
    w = 40.0 * math.pi if width is None else width
    amp = k * np.exp(-(((k - TWO_PI * s) / w) ** 2))
    amp = amp.astype(complex) * np.exp(-1j * k * center)
    amp[nm == 0] = 0.0
    # real-space Gaussian width of the k-space envelope, in label units
    sigma_x = math.sqrt(2.0) / w
    flat_lo, flat_hi = profile.x4 - 1.0, profile.x1   # subsonic flat, wrapped
    c = center - math.floor(center)
    cc = c if c < flat_hi + 1e-12 else c - 1.0
    clearance = min(cc - flat_lo, flat_hi - cc)
    if clearance < 3.0 * sigma_x:
        raise ModeError("pulse center lacks 3 Gaussian widths of clearance "
                        "inside the subsonic flat region")

    def assemble(sign: int) -> PhaseVector:
        om = table.omega
        tdk = -1j * sign * om * amp
        norm = 1.0 / math.sqrt(n)
        dtheta = np.fft.ifft(amp / norm)
        dthetadot = np.fft.ifft(tdk / norm)
        data = np.concatenate([dtheta, M_EFF * dthetadot])
        return PhaseVector(t=0.0, data=data)

    def kg_total(pv) -> float:
        mm = to_modes(pv.dtheta, pv.dtheta_dot, table)
        pl, mi = frequency_split(mm)
        sp = kg_norms(pl, mi)
        return sp.total_plus - sp.total_minus   # total magnitude

    if freq_sign is None:
        horizons = [h for h in profile.find_horizons() if h.side == "black-hole"]
        if not horizons:
            raise ModeError("no black-hole horizon: cannot orient the pulse")
        x_h = horizons[0].label
        if provider is None:
            provider = ForceProvider(config)
        from .dynamics import evolve_phase
        t_test = 5.0 / n            # a few ion periods
        best = None
        for sign in (+1, -1):
            pv = assemble(sign)
            x = np.arange(n) / n
            def centroid(vec):
                wgt = np.abs(vec.dtheta) ** 2
                z = np.sum(wgt * np.exp(2j * math.pi * x)) / np.sum(wgt)
                return (np.angle(z) / TWO_PI) % 1.0
            def horizon_distance(vec, t):
                xh = (x_h - t) % 1.0
                d = (centroid(vec) - xh) % 1.0
                return min(d, 1.0 - d)
            d0 = horizon_distance(pv, 0.0)
            pv1 = evolve_phase(pv, t_test, provider)
            d1 = horizon_distance(pv1, t_test)
            rate = (d1 - d0) / t_test
            if best is None or rate > best[0]:
                best = (rate, sign)
        if abs(best[0]) < 1e-6:
            raise ModeError("ambiguous pulse direction: |group velocity| < 1e-6")
        freq_sign = best[1]
    pv = assemble(freq_sign)
    total = kg_total(pv)
    pv.data /= math.sqrt(total)
    return pv, freq_sign


@dataclass
class FrequencyRoot:
    k: float
    branch: int              # +1 or -1 in omega0 = k/T + branch * omega(k)
    vgroup_lab: float        # d(k/T + b omega)/dk
    inside_bz: bool


def solve_frequency_condition(omega0: float, table: DispersionTable,
                              region_v_frac: float | None = None,
                              extended_factor: float = 2.0) -> list[FrequencyRoot]:
    """All roots k of omega0 = k/T + b omega(k), b = +-1, scanned over the
    extended zone |k| <= extended_factor * pi N (omega periodically
    continued); roots with |k| > pi N are flagged outside the Brillouin zone.
    """
    config = table.config
    vf = table.v_frac if region_v_frac is None else region_v_frac
    n = config.n_ions
    k_max = extended_factor * math.pi * n
    grid = np.linspace(-k_max, k_max, 8192)
    roots: list[FrequencyRoot] = []
    for b in (+1, -1):
        f = grid + b * uniform_dispersion_omega(config, vf, grid) - omega0
        sign = np.sign(f)
        idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
        for i in idx:
            lo, hi = grid[i], grid[i + 1]
            flo = f[i]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = float(mid + b * uniform_dispersion_omega(config, vf, mid)[0]
                           - omega0)
                if fm * flo <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            k_root = 0.5 * (lo + hi)
            vg = 1.0 + b * float(uniform_group_velocity(config, vf, k_root)[0])
            roots.append(FrequencyRoot(k=float(k_root), branch=b,
                                       vgroup_lab=vg,
                                       inside_bz=abs(k_root) <= math.pi * n + 1e-9))
        # exact zeros sitting on a grid point (k = 0 for omega0 = 0)
        exact = np.nonzero(f == 0.0)[0]
        for i in exact:
            k_root = float(grid[i])
            if any(abs(r.k - k_root) < 1e-6 and r.branch == b for r in roots):
                continue
            vg = 1.0 + b * float(uniform_group_velocity(config, vf, k_root)[0])
            roots.append(FrequencyRoot(k=k_root, branch=b, vgroup_lab=vg,
                                       inside_bz=abs(k_root) <= math.pi * n + 1e-9))
    roots.sort(key=lambda r: (r.branch, r.k))
    return roots


def bloch_regime(roots: list[FrequencyRoot]) -> bool:
    """True when the upstream-branch partner solutions fall outside the
    Brillouin zone (Bloch-oscillation regime)."""
    return any(not r.inside_bz for r in roots)
