"""Equilibrium ion trajectories, Coulomb interactions on the ring, the
required external force and the time-dependent force matrix.

Coulomb pairs interact through the 3-D chord distance d = (L/pi) sin(|dtheta|/2),
which reduces to the straight-chain law at small separations.  The external
potential is represented only through the force it must exert to sustain the
imposed equilibrium motion; its curvature enters the force matrix through a
periodic spline of the per-ion required forces (toggle `include_external_hessian`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .config import M_EFF, TWO_PI, RingConfig
from .profile import Profile, build_profile


class LatticeError(ValueError):
    pass


def coulomb_charge(config: RingConfig) -> float:
    """e^2 / 4 pi eps0 in natural units: kappa / (2N)."""
    return config.kappa / (2.0 * config.n_ions)


def coulomb_pair(delta_theta, charge: float):
    """Pair potential q/d at chord distance d = (1/pi) sin(|dtheta|/2)
    plus first and second derivatives with respect to dtheta.

    Valid for 0 < |dtheta| < 2pi; even in dtheta.
    """
    d = np.asarray(delta_theta, dtype=float)
    if np.any(d == 0.0) or np.any(np.abs(d) >= TWO_PI):
        raise LatticeError("coincident ions: |dtheta| must lie in (0, 2pi)")
    half = 0.5 * np.abs(d)
    sgn = np.sign(d)
    sin, cos = np.sin(half), np.cos(half)
    qp = charge * math.pi
    pot = qp / sin
    dpot = -0.5 * qp * cos / sin**2 * sgn          # odd in dtheta
    d2pot = 0.25 * qp * (1.0 + cos**2) / sin**3
    if pot.ndim == 0:
        return float(pot), float(dpot), float(d2pot)
    return pot, dpot, d2pot


@dataclass(frozen=True)
class EquilibriumFrame:
    """Snapshot of the imposed classical motion at one time."""
    t: float
    theta: np.ndarray        # per-ion angle, strictly increasing mod 2pi
    velocity: np.ndarray     # dtheta/dt
    acceleration: np.ndarray
    force_external: np.ndarray   # F^e_i = m_eff * accel_i - F^c_i
    profile: Profile


@dataclass(frozen=True)
class ForceMatrix:
    t: float
    f: np.ndarray            # symmetric N x N stiffness (dense)
    interaction: str
    bandwidth: int | None    # 1 for nearest-neighbor, None for dense


def _coulomb_force(theta: np.ndarray, config: RingConfig) -> np.ndarray:
    """Generalized Coulomb force F^c_i = -dV^c/dtheta_i."""
    n = len(theta)
    q = coulomb_charge(config)
    if config.interaction == "nearest-neighbor":
        d_next = np.roll(theta, -1) - theta
        d_next = np.where(d_next <= 0, d_next + TWO_PI, d_next)
        _, dpot, _ = coulomb_pair(d_next, q)   # dV/d(theta_{i+1}-theta_i)
        # V = sum_i V(theta_{i+1} - theta_i); F_i = dpot_i - dpot_{i-1}
        return dpot - np.roll(dpot, 1)
    dth = theta[:, None] - theta[None, :]
    np.fill_diagonal(dth, 1.0)                 # placeholder, masked below
    _, dpot, _ = coulomb_pair(dth, q)
    np.fill_diagonal(dpot, 0.0)
    return -np.sum(dpot, axis=1)


def equilibrium_frame(profile: Profile, t: float) -> EquilibriumFrame:
    """Equilibrium frame for a static profile (or the instantaneous profile
    of a ramp; use `ramp_frame` for ramps, which adds the dG/dt terms)."""
    config = profile.config
    u = np.arange(config.n_ions) / config.n_ions + t
    theta = profile.g(u)
    vel = profile.gp(u)
    acc = profile.gpp(u)
    fe = M_EFF * acc - _coulomb_force(theta, config)
    return EquilibriumFrame(t=t, theta=theta, velocity=vel, acceleration=acc,
                            force_external=fe, profile=profile)


def ramp_frame(config: RingConfig, t: float) -> EquilibriumFrame:
    """Equilibrium frame during a quench: positions from the instantaneous
    profile, velocity and acceleration by central differences in t (step
    tau/1000) because the profile itself is time dependent."""
    if config.ramp is None:
        raise LatticeError("ramp_frame needs a ramp schedule")
    n = config.n_ions
    u = np.arange(n) / n
    def pos(tt):
        prof = build_profile(config, v_min_frac=config.ramp.v_min_frac(tt))
        return prof.g(u + tt), prof
    dt = config.ramp.tau / 1000.0
    theta, prof = pos(t)
    th_p, _ = pos(t + dt)
    th_m, _ = pos(t - dt)
    vel = (th_p - th_m) / (2.0 * dt)
    acc = (th_p - 2.0 * theta + th_m) / (dt * dt)
    fe = M_EFF * acc - _coulomb_force(theta, config)
    return EquilibriumFrame(t=t, theta=theta, velocity=vel, acceleration=acc,
                            force_external=fe, profile=prof)


def frame_at(config: RingConfig, t: float, static_profile: Profile | None = None
             ) -> EquilibriumFrame:
    if config.ramp is not None:
        return ramp_frame(config, t)
    prof = static_profile if static_profile is not None else build_profile(config)
    return equilibrium_frame(prof, t)


def external_force_spline(frame: EquilibriumFrame) -> CubicSpline:
    """Periodic cubic spline of the required external force over theta."""
    order = np.argsort(frame.theta % TWO_PI)
    th = (frame.theta % TWO_PI)[order]
    fe = frame.force_external[order]
    th_ext = np.concatenate([th, [th[0] + TWO_PI]])
    fe_ext = np.concatenate([fe, [fe[0]]])
    return CubicSpline(th_ext, fe_ext, bc_type="periodic")


def force_matrix(frame: EquilibriumFrame, include_external_hessian: bool = True
                 ) -> ForceMatrix:
    """Hessian of the total potential at the equilibrium positions.

    Off-diagonals f_ij = -(pair stiffness)(theta_i - theta_j); the diagonal
    carries the opposite pair sums plus, when the toggle is on, the curvature
    of the external potential, -dF^e/dtheta, from the periodic force spline.
    """
    config = frame.profile.config
    n = config.n_ions
    theta = frame.theta
    q = coulomb_charge(config)
    f = np.zeros((n, n))
    if config.interaction == "nearest-neighbor":
        d_next = np.roll(theta, -1) - theta
        d_next = np.where(d_next <= 0, d_next + TWO_PI, d_next)
        _, _, k_next = coulomb_pair(d_next, q)
        idx = np.arange(n)
        f[idx, (idx + 1) % n] = -k_next
        f[(idx + 1) % n, idx] = -k_next
        np.fill_diagonal(f, k_next + np.roll(k_next, 1))
        bw = 1
    else:
        dth = theta[:, None] - theta[None, :]
        np.fill_diagonal(dth, 1.0)
        _, _, stiff = coulomb_pair(dth, q)
        np.fill_diagonal(stiff, 0.0)
        f = -stiff
        np.fill_diagonal(f, np.sum(stiff, axis=1))
        bw = None
    if include_external_hessian:
        spline = external_force_spline(frame)
        f[np.arange(n), np.arange(n)] -= spline(theta % TWO_PI, 1)
    return ForceMatrix(t=frame.t, f=f, interaction=config.interaction,
                       bandwidth=bw)


# ---------------------------------------------------------------------------
# force providers for the integrator


class ForceProvider:
    """Supplies f(t) @ X for the integrator.

    For static profiles the shift covariance f(t + T/N) = P f(t) P^T is
    exploited: matrices are assembled once per distinct phase of the
    sub-period T/N and reused through index shifts.
    """

    def __init__(self, config: RingConfig, include_external_hessian: bool = True):
        self.config = config
        self.include_external_hessian = include_external_hessian
        self.static = config.ramp is None
        self._profile = build_profile(config) if self.static else None
        self._cache: dict[int, np.ndarray] = {}
        self._sub = 1.0 / config.n_ions            # T/N in natural units
        self._phase_quantum: float | None = None

    def set_phase_grid(self, dt: float):
        """Declare the integrator step so cached phases can be keyed exactly.

        The cache survives across evolution legs that use the same step (up
        to roundoff in span / n_steps), so repeated legs do not re-pay the
        matrix-assembly cost.
        """
        quantum = dt / 2.0
        if (self._phase_quantum is not None
                and abs(quantum - self._phase_quantum) < 1e-9 * self._sub):
            return
        self._phase_quantum = quantum
        self._cache.clear()

    def matrix(self, t: float) -> np.ndarray:
        fr = frame_at(self.config, t, static_profile=self._profile)
        return force_matrix(fr, self.include_external_hessian).f

    def _cached(self, t: float):
        """(base matrix, shift) such that f(t) = P^shift f_base P^-shift."""
        shift = math.floor(t / self._sub + 1e-12)
        phase = t - shift * self._sub
        key = round(phase / self._phase_quantum)
        if abs(key * self._phase_quantum - phase) > 1e-9 * self._sub:
            return self.matrix(t), 0
        base = self._cache.get(key)
        if base is None:
            base = self.matrix(phase)
            self._cache[key] = base
        return base, shift % self.config.n_ions

    def apply(self, t: float, x: np.ndarray) -> np.ndarray:
        """f(t) @ x (x may be a vector or a stack of columns)."""
        if not self.static or self._phase_quantum is None:
            return self.matrix(t) @ x
        base, s = self._cached(t)
        if s == 0:
            return base @ x
        # f(t)_{ij} = base_{i+s, j+s}
        return np.roll(base @ np.roll(x, s, axis=0), -s, axis=0)

    def omega_max(self) -> float:
        """Largest phonon frequency of the (target) profile; sets n_sub."""
        from .modes import uniform_dispersion_omega
        cfg = self.config
        vmf = cfg.ramp.target_v_min_frac if cfg.ramp is not None else cfg.v_min_frac
        n = cfg.n_ions
        k_edge = math.pi * n
        k = np.array([k_edge * j / 64.0 for j in range(1, 65)])
        return float(np.max(uniform_dispersion_omega(cfg, vmf, k)))
