"""Imposed velocity profile on the ring: the label->angle map g, horizons,
sound speeds and the Hawking temperature.

The equilibrium motion is theta_i(t) = g(i/N + t/T).  g'(x)/T is piecewise:
flat at v_min, a quintic smooth step up to v_max over a transition of
half-width gamma1 centred at sigma, flat at v_max, a step back down over
gamma2 centred at 1 - sigma, and flat at v_min again.  v_max is never
user-set; it follows from the closure condition int_0^1 g' dx = 2pi,
which reduces to 2 sigma v_min + (1 - 2 sigma) v_max = 2pi/T.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .config import M_EFF, TWO_PI, RingConfig


class ProfileError(ValueError):
    """Infeasible velocity profile."""


class DegenerateHorizonWarning(UserWarning):
    """Horizon falls in a flat region; surface gravity vanishes."""


def smooth_step(s):
    """Quintic step h(s) = 15/8 s - 5/4 s^3 + 3/8 s^5 and its derivatives.

    h is odd with h(+-1) = +-1 and h'(+-1) = h''(+-1) = 0, which makes the
    velocity profile C^2 at the region boundaries.
    """
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) > 1.0 + 1e-15):
        raise ValueError("smooth_step argument must satisfy |s| <= 1")
    s2 = s * s
    h = s * (15.0 / 8.0 + s2 * (-5.0 / 4.0 + s2 * (3.0 / 8.0)))
    hp = 15.0 / 8.0 + s2 * (-15.0 / 4.0 + s2 * (15.0 / 8.0))
    hpp = s * (-15.0 / 2.0 + s2 * (15.0 / 2.0))
    if h.ndim == 0:
        return float(h), float(hp), float(hpp)
    return h, hp, hpp


def _step_integral(s):
    """Antiderivative H of h with H(-1) = 0."""
    s = np.asarray(s, dtype=float)
    s2 = s * s
    H = s2 * (15.0 / 16.0 + s2 * (-5.0 / 16.0 + s2 / 16.0))
    H_m1 = 15.0 / 16.0 - 5.0 / 16.0 + 1.0 / 16.0
    return H - H_m1


def v_max_from_closure(v_min_frac: float, sigma: float) -> float:
    """v_max * T / 2pi from 2 sigma v_min + (1 - 2 sigma) v_max = 2pi/T."""
    return (1.0 - 2.0 * sigma * v_min_frac) / (1.0 - 2.0 * sigma)


@dataclass(frozen=True)
class Horizon:
    label: float          # u_H = g^-1(theta_H)
    theta: float          # theta_H
    side: str             # "black-hole" or "white-hole"
    v: float              # flow velocity at the horizon (angle/time)


class Profile:
    """Immutable geometry of the imposed flow; safe for concurrent reads.

    Exposes exact piecewise evaluators for g, g', g'' with periodic
    continuation g(x + 1) = g(x) + 2pi, the inverse map, the continuum
    sound speed and the horizon list.
    """

    def __init__(self, config: RingConfig, v_min_frac: float | None = None):
        self.config = config
        vmf = config.v_min_frac if v_min_frac is None else v_min_frac
        self.v_min_frac = vmf
        vmaxf = v_max_from_closure(vmf, config.sigma)
        if vmaxf < vmf:
            raise ProfileError("derived v_max < v_min: infeasible profile")
        if vmaxf < 1.0 - 1e-12:
            raise ProfileError("derived v_max <= 2pi/T: no supersonic region possible")
        self.v_min = TWO_PI * vmf
        self.v_max = TWO_PI * vmaxf
        self.v_max_frac = vmaxf
        self.alpha = 0.5 * (self.v_max - self.v_min)
        self.beta = 0.5 * (self.v_max + self.v_min)
        s, g1, g2 = config.sigma, config.gamma1, config.gamma2
        # region boundaries in label space
        self.x1 = s - g1
        self.x2 = s + g1
        self.x3 = 1.0 - s - g2
        self.x4 = 1.0 - s + g2
        # g at the boundaries, accumulated analytically
        self._g1 = self.v_min * self.x1
        self._g2 = self._g1 + self.beta * 2.0 * g1   # odd step integrates to 0
        self._g3 = self._g2 + self.v_max * (self.x3 - self.x2)
        self._g4 = self._g3 + self.beta * 2.0 * g2
        closure = self._g4 + self.v_min * (1.0 - self.x4)
        assert abs(closure - TWO_PI) < 1e-9, closure

    # -- exact piecewise evaluators --------------------------------------

    def g(self, x):
        x = np.asarray(x, dtype=float)
        wrap = np.floor(x)
        xf = x - wrap
        cfg = self.config
        out = np.empty_like(xf)
        r1 = xf <= self.x1
        r2 = (xf > self.x1) & (xf < self.x2)
        r3 = (xf >= self.x2) & (xf <= self.x3)
        r4 = (xf > self.x3) & (xf < self.x4)
        r5 = xf >= self.x4
        out[r1] = self.v_min * xf[r1]
        s = (xf[r2] - cfg.sigma) / cfg.gamma1
        out[r2] = self._g1 + self.beta * (xf[r2] - self.x1) + self.alpha * cfg.gamma1 * _step_integral(s)
        out[r3] = self._g2 + self.v_max * (xf[r3] - self.x2)
        s = (xf[r4] - (1.0 - cfg.sigma)) / cfg.gamma2
        out[r4] = self._g3 + self.beta * (xf[r4] - self.x3) - self.alpha * cfg.gamma2 * _step_integral(s)
        out[r5] = self._g4 + self.v_min * (xf[r5] - self.x4)
        out += TWO_PI * wrap
        return float(out) if out.ndim == 0 else out

    def gp(self, x):
        """g'(x) = T * v(x-label)."""
        x = np.asarray(x, dtype=float)
        xf = x - np.floor(x)
        cfg = self.config
        out = np.full_like(xf, self.v_min)
        r2 = (xf > self.x1) & (xf < self.x2)
        r3 = (xf >= self.x2) & (xf <= self.x3)
        r4 = (xf > self.x3) & (xf < self.x4)
        h, _, _ = smooth_step((xf[r2] - cfg.sigma) / cfg.gamma1)
        out[r2] = self.beta + self.alpha * h
        out[r3] = self.v_max
        h, _, _ = smooth_step((xf[r4] - (1.0 - cfg.sigma)) / cfg.gamma2)
        out[r4] = self.beta - self.alpha * h
        return float(out) if out.ndim == 0 else out

    def gpp(self, x):
        x = np.asarray(x, dtype=float)
        xf = x - np.floor(x)
        cfg = self.config
        out = np.zeros_like(xf)
        r2 = (xf > self.x1) & (xf < self.x2)
        r4 = (xf > self.x3) & (xf < self.x4)
        _, hp, _ = smooth_step((xf[r2] - cfg.sigma) / cfg.gamma1)
        out[r2] = self.alpha * hp / cfg.gamma1
        _, hp, _ = smooth_step((xf[r4] - (1.0 - cfg.sigma)) / cfg.gamma2)
        out[r4] = -self.alpha * hp / cfg.gamma2
        return float(out) if out.ndim == 0 else out

    def g_inv(self, theta):
        """Monotone inverse of g, bisection + Newton polish, |g(x)-theta| < 1e-10."""
        theta = np.asarray(theta, dtype=float)
        wrap = np.floor(theta / TWO_PI)
        tf = theta - TWO_PI * wrap
        lo = np.zeros_like(tf)
        hi = np.ones_like(tf)
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            below = self.g(mid) <= tf
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        x = 0.5 * (lo + hi)
        for _ in range(4):
            x = np.clip(x - (self.g(x) - tf) / self.gp(x), lo, hi)
        x = x + wrap
        return float(x) if x.ndim == 0 else x

    # -- physical fields --------------------------------------------------

    def v(self, theta):
        """Flow velocity v(theta) = g'(g^-1(theta)) / T, in angle/time."""
        return self.gp(self.g_inv(theta))

    def density(self, theta):
        """Ion density n(theta) = N / (v(theta) T)."""
        return self.config.n_ions / self.v(theta)

    def conformal_factor(self, theta):
        """rho(theta) = n(theta) m L^2 / (2pi)^2 in natural units."""
        return self.density(theta) * M_EFF

    def sound_speed(self, theta):
        """Continuum sound speed c(theta) = sqrt((2pi)^3 kappa / (v T^3))."""
        return np.sqrt(TWO_PI**3 * self.config.kappa / self.v(theta))

    def _sound_speed_of_v(self, v):
        return np.sqrt(TWO_PI**3 * self.config.kappa / v)

    # -- horizons ----------------------------------------------------------

    def find_horizons(self, sound_model: str = "continuum-NN",
                      k_ref: float | None = None) -> list[Horizon]:
        """All roots of v(theta) = c(theta).

        sound_model "continuum-NN" uses the continuum sound speed; the
        "discrete-group-velocity" model replaces c by the group velocity of
        the local discrete dispersion at the reference wave number k_ref
        (full-ring label units k = 2pi n), which makes the k-dependence of
        the long-range dispersion explicit.
        """
        if sound_model == "continuum-NN":
            v_h = TWO_PI * self.config.kappa ** (1.0 / 3.0)
        elif sound_model == "discrete-group-velocity":
            if k_ref is None:
                raise ValueError("discrete-group-velocity model needs k_ref")
            v_h = self._discrete_horizon_velocity(k_ref)
        else:
            raise ValueError(f"unknown sound model {sound_model!r}")
        if not self.v_min < v_h < self.v_max:
            return []
        horizons = []
        for (a, b, side) in (
            (self.x1, self.x2, "black-hole"),     # v rises through v_h: flow enters
            (self.x3, self.x4, "white-hole"),     # v falls through v_h: flow exits
        ):
            lo, hi = a, b
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                rising = self.gp(mid) < v_h
                if side == "black-hole":
                    lo, hi = (mid, hi) if rising else (lo, mid)
                else:
                    lo, hi = (lo, mid) if rising else (mid, hi)
            x_h = 0.5 * (lo + hi)
            horizons.append(Horizon(label=x_h, theta=self.g(x_h), side=side,
                                    v=self.gp(x_h)))
        return horizons

    def _local_group_velocity(self, k_ref: float, v: float) -> float:
        """Group velocity (angle/time) at wave number k_ref of a uniform chain
        at local spacing v T / N."""
        from .modes import uniform_dispersion_omega
        n = self.config.n_ions
        dk = max(TWO_PI * 1e-3, abs(k_ref) * 1e-4)
        om = uniform_dispersion_omega(self.config, v / TWO_PI,
                                      np.array([k_ref - dk, k_ref + dk]))
        return v * (om[1] - om[0]) / (2.0 * dk)

    def _discrete_horizon_velocity(self, k_ref: float) -> float:
        f = lambda v: self._local_group_velocity(k_ref, v) - v
        lo, hi = self.v_min, self.v_max
        if f(lo) <= 0 or f(hi) >= 0:
            # no sign change: globally sub- or supersonic at this k_ref
            return math.inf if f(lo) <= 0 else 0.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if f(mid) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def hawking_temperature(self, horizon: Horizon,
                            sound_model: str = "continuum-NN",
                            k_ref: float | None = None) -> tuple[float, float]:
        """Both forms of k_B T_H / hbar (units 1/T) at the given horizon.

        Returns (surface_gravity_form, profile_form).  The first form is
        (1/4pi v) d/dtheta (v^2 - c^2) evaluated by central differences of
        the actual fields; the second is (3/4pi T) g''/g' at the horizon.
        They coincide identically because c^2 is proportional to 1/v.
        """
        x_h = horizon.label
        if self.gpp(x_h) == 0.0:
            warnings.warn("horizon in a flat region: zero surface gravity",
                          DegenerateHorizonWarning)
        # profile form
        form2 = 3.0 / (4.0 * math.pi) * self.gpp(x_h) / self.gp(x_h)
        # surface-gravity form, numerically differentiated in theta
        if sound_model == "continuum-NN":
            c_of_theta = self.sound_speed
        else:
            c_of_theta = lambda th: np.asarray([
                self._local_group_velocity(k_ref, vv)
                for vv in np.atleast_1d(self.v(th))])
        th = horizon.theta
        dth = 1e-5
        def vc2(theta):
            v = self.v(theta)
            c = c_of_theta(theta)
            return v * v - np.asarray(c) ** 2
        deriv = (vc2(th + dth) - vc2(th - dth)) / (2.0 * dth)
        form1 = float(deriv) / (4.0 * math.pi * horizon.v)
        return form1, form2


def build_profile(config: RingConfig, v_min_frac: float | None = None) -> Profile:
    """Construct the profile; raises ProfileError when the derived v_max is
    not supersonic-capable (v_max <= v_min)."""
    return Profile(config, v_min_frac=v_min_frac)


def profile_table(profile: Profile, n_points: int | None = None):
    """Dense tabulation (x, theta, v, c_continuum, g'') for profile.csv."""
    if n_points is None:
        n_points = max(16 * profile.config.n_ions, 2**14)
    x = np.linspace(0.0, 1.0, n_points, endpoint=False)
    theta = profile.g(x)
    v = profile.gp(x)
    c = profile._sound_speed_of_v(v)
    gpp = profile.gpp(x)
    return x, theta, v, c, gpp
