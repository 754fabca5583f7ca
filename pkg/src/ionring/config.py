"""Run configuration: all physical and numerical parameters in natural units.

Natural units throughout: ion mass m = 1, ring circumference L = 1,
rotation period T = 1.  Angles theta live on [0, 2pi), ion labels
x = i/N on [0, 1).  The effective inertia for angle coordinates is
m_eff = m (L/2pi)^2 = 1/(2pi)^2 and momenta are p_i = m_eff * dtheta_i/dt.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

TWO_PI = 2.0 * math.pi
#: inertia of the angle coordinate, m (L/2pi)^2 in natural units
M_EFF = 1.0 / (TWO_PI * TWO_PI)

INTERACTIONS = ("nearest-neighbor", "full-coulomb")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RampSchedule:
    """Quench: reduce v_min from 2pi/T to the target over a time tau.

    v_min(t) = v_target + (2pi/T - v_target) * exp(-(3 t / tau)^2) for
    t >= 0 and homogeneous rotation (v_min = 2pi/T) for t < 0; the factor
    3 puts v_min within e^-9 of the target at t = tau.  v_max is re-derived
    from the closure condition at every instant, so the average rotation
    velocity stays 2pi/T.
    """

    tau: float
    target_v_min_frac: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError("ramp.tau must be > 0")
        if not 0 < self.target_v_min_frac < 1:
            raise ConfigError("ramp.target_v_min_frac must be in (0, 1)")

    def v_min_frac(self, t: float) -> float:
        if t <= 0.0:
            return 1.0
        return self.target_v_min_frac + (1.0 - self.target_v_min_frac) * math.exp(
            -((3.0 * t / self.tau) ** 2)
        )


@dataclass(frozen=True)
class RingConfig:
    """Single source of truth for one experiment run.

    kappa is the dimensionless Coulomb coupling: e^2/4pi eps0 =
    kappa/(2N) * m L^3 / T^2.  hbar is the dimensionless quantum of the
    angle phase space, hbar * T * (2pi/L)^2 / m.
    """

    n_ions: int
    kappa: float
    v_min_frac: float = 5.0 / 6.0
    sigma: float = 0.45
    gamma1: float = 0.02
    gamma2: float = 0.05
    hbar: float = 1.0
    interaction: str = "nearest-neighbor"
    ramp: RampSchedule | None = None
    n_sub: int | None = None          # substeps per ion period T/N; None = auto
    back_time: float = 0.67           # backward-propagation horizon (units of T)
    flat_fraction_min: float = 0.9    # localization threshold for thermality runs
    pulse_s: int = 5
    pulse_center: float = 0.2
    pulse_width_override: float | None = None
    regions_width_frac: float = 0.05
    times: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_ions < 8:
            raise ConfigError("n_ions must be >= 8")
        if not self.kappa > 0:
            raise ConfigError("kappa must be > 0")
        # v_min_frac = 1 is the degenerate homogeneous ring (v_max = v_min)
        if not 0 < self.v_min_frac <= 1:
            raise ConfigError("v_min_frac must satisfy 0 < v_min_frac <= 1")
        if not 0 < self.sigma < 0.5:
            raise ConfigError("sigma must lie in (0, 0.5)")
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ConfigError("gamma1 and gamma2 must be > 0")
        # the five pieces of g' must be disjoint and ordered
        if not self.sigma - self.gamma1 > 0:
            raise ConfigError("need sigma - gamma1 > 0")
        if not self.sigma + self.gamma1 < 1 - self.sigma - self.gamma2:
            raise ConfigError("transition regions overlap: sigma + gamma1 >= 1 - sigma - gamma2")
        if not 1 - self.sigma + self.gamma2 < 1:
            raise ConfigError("need 1 - sigma + gamma2 < 1")
        if not self.hbar > 0:
            raise ConfigError("hbar must be > 0")
        if self.interaction not in INTERACTIONS:
            raise ConfigError(f"interaction must be one of {INTERACTIONS}")
        if self.n_sub is not None and self.n_sub < 1:
            raise ConfigError("n_sub must be >= 1")
        if not 1 <= self.pulse_s <= 20:
            raise ConfigError("pulse.s must lie in 1..20")

    def with_v_min_frac(self, v_min_frac: float) -> "RingConfig":
        return replace(self, v_min_frac=v_min_frac)


# ---------------------------------------------------------------------------
# plain-text key=value config files

_REQUIRED_KEYS = ("n_ions", "kappa", "v_min_frac", "sigma", "gamma1", "gamma2",
                  "hbar", "interaction")
_OPTIONAL_KEYS = ("n_sub", "ramp.tau", "ramp.target_v_min_frac", "pulse.s",
                  "pulse.center", "pulse.width_override", "regions.width_frac",
                  "times")
_ALL_KEYS = _REQUIRED_KEYS + _OPTIONAL_KEYS


def _parse_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in pairs:
            raise ConfigError(f"duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _get_float(pairs: dict[str, str], key: str) -> float:
    try:
        return float(pairs[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: not a number: {pairs[key]!r}") from exc


def parse_config_text(text: str) -> RingConfig:
    pairs = _parse_pairs(text)
    unknown = sorted(set(pairs) - set(_ALL_KEYS))
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}")
    missing = [k for k in _REQUIRED_KEYS if k not in pairs]
    if missing:
        raise ConfigError(f"missing required key {missing[0]!r}")

    try:
        n_ions = int(pairs["n_ions"])
    except ValueError as exc:
        raise ConfigError(f"key 'n_ions': not an integer: {pairs['n_ions']!r}") from exc

    kwargs: dict = dict(
        n_ions=n_ions,
        kappa=_get_float(pairs, "kappa"),
        v_min_frac=_get_float(pairs, "v_min_frac"),
        sigma=_get_float(pairs, "sigma"),
        gamma1=_get_float(pairs, "gamma1"),
        gamma2=_get_float(pairs, "gamma2"),
        hbar=_get_float(pairs, "hbar"),
        interaction=pairs["interaction"],
    )
    if "n_sub" in pairs:
        try:
            kwargs["n_sub"] = int(pairs["n_sub"])
        except ValueError as exc:
            raise ConfigError(f"key 'n_sub': not an integer: {pairs['n_sub']!r}") from exc
    if ("ramp.tau" in pairs) != ("ramp.target_v_min_frac" in pairs):
        raise ConfigError("ramp.tau and ramp.target_v_min_frac must be given together")
    if "ramp.tau" in pairs:
        kwargs["ramp"] = RampSchedule(
            tau=_get_float(pairs, "ramp.tau"),
            target_v_min_frac=_get_float(pairs, "ramp.target_v_min_frac"),
        )
    if "pulse.s" in pairs:
        try:
            kwargs["pulse_s"] = int(pairs["pulse.s"])
        except ValueError as exc:
            raise ConfigError(f"key 'pulse.s': not an integer: {pairs['pulse.s']!r}") from exc
    if "pulse.center" in pairs:
        kwargs["pulse_center"] = _get_float(pairs, "pulse.center")
    if "pulse.width_override" in pairs:
        kwargs["pulse_width_override"] = _get_float(pairs, "pulse.width_override")
    if "regions.width_frac" in pairs:
        kwargs["regions_width_frac"] = _get_float(pairs, "regions.width_frac")
    if "times" in pairs:
        try:
            kwargs["times"] = tuple(float(v) for v in pairs["times"].split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"key 'times': expected comma-separated numbers") from exc
    return RingConfig(**kwargs)


def parse_config(path) -> RingConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def emit_config(config: RingConfig) -> str:
    """Byte-stable key=value dump; parse_config_text(emit_config(c)) == c."""
    lines = [
        f"n_ions = {config.n_ions}",
        f"kappa = {config.kappa!r}",
        f"v_min_frac = {config.v_min_frac!r}",
        f"sigma = {config.sigma!r}",
        f"gamma1 = {config.gamma1!r}",
        f"gamma2 = {config.gamma2!r}",
        f"hbar = {config.hbar!r}",
        f"interaction = {config.interaction}",
    ]
    if config.n_sub is not None:
        lines.append(f"n_sub = {config.n_sub}")
    if config.ramp is not None:
        lines.append(f"ramp.tau = {config.ramp.tau!r}")
        lines.append(f"ramp.target_v_min_frac = {config.ramp.target_v_min_frac!r}")
    lines.append(f"pulse.s = {config.pulse_s}")
    lines.append(f"pulse.center = {config.pulse_center!r}")
    if config.pulse_width_override is not None:
        lines.append(f"pulse.width_override = {config.pulse_width_override!r}")
    lines.append(f"regions.width_frac = {config.regions_width_frac!r}")
    if config.times:
        lines.append("times = " + ",".join(repr(t) for t in config.times))
    return "\n".join(lines) + "\n"


def config_hash(config: RingConfig) -> str:
    return hashlib.sha256(emit_config(config).encode("utf-8")).hexdigest()[:16]
