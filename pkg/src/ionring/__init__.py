"""Acoustic black hole simulator for phonons on a rotating ion ring."""

__version__ = "0.1.0"

from .config import RampSchedule, RingConfig, parse_config, parse_config_text
from .profile import build_profile, smooth_step

__all__ = [
    "RingConfig",
    "RampSchedule",
    "parse_config",
    "parse_config_text",
    "build_profile",
    "smooth_step",
    "__version__",
]
