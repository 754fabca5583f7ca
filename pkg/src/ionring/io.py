"""Bit-stable CSV/JSON emission with config-hash headers and run manifests.

Numbers are written with repr(), the shortest decimal that round-trips the
binary float, so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RingConfig, config_hash, emit_config


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: Path, columns: list[str], rows, config: RingConfig,
              extra_header: dict | None = None) -> Path:
    path = Path(path)
    lines = [f"# config_hash = {config_hash(config)}"]
    for line in emit_config(config).splitlines():
        lines.append(f"# config: {line}")
    for key, val in (extra_header or {}).items():
        lines.append(f"# {key} = {val}")
    lines.append("# columns: " + ",".join(columns))
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_matrix_csv(path: Path, matrix: np.ndarray, config: RingConfig,
                     extra_header: dict | None = None) -> Path:
    """Dense row-major matrix dump with '#' metadata header."""
    path = Path(path)
    lines = [f"# config_hash = {config_hash(config)}"]
    for key, val in (extra_header or {}).items():
        lines.append(f"# {key} = {val}")
    lines.append(f"# shape = {matrix.shape[0]}x{matrix.shape[1]}")
    for row in np.asarray(matrix):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_json(path: Path, payload: dict, config: RingConfig) -> Path:
    path = Path(path)
    payload = dict(payload)
    payload["config_hash"] = config_hash(config)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


class RunManifest:
    def __init__(self, config: RingConfig, subcommand: str):
        self.config = config
        self.subcommand = subcommand
        self.outputs: list[str] = []
        self.timings: dict[str, float] = {}
        self._t0 = time.perf_counter()

    def add(self, path: Path) -> Path:
        self.outputs.append(str(path))
        return path

    def lap(self, name: str):
        self.timings[name] = time.perf_counter() - self._t0

    def write(self, out_dir: Path) -> Path:
        self.lap("total")
        payload = {
            "tool_version": __version__,
            "subcommand": self.subcommand,
            "config_hash": config_hash(self.config),
            "config": emit_config(self.config),
            "outputs": self.outputs,
            "timings_seconds": self.timings,
        }
        path = Path(out_dir) / "run_manifest.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return path
