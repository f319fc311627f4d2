"""Experiment configuration: flat ``key = value`` files plus overrides.

Example file::

    # convergence sweep
    h_list = 0.2, 0.1, 0.05, 0.025
    T = 1.0
    gamma = 0.5
    sign = defocusing
    psi = gaussian(width=1, amplitude=1, center=0, mode=0.5)
    phi = gaussian(width=1, amplitude=0.8, center=1)

Later sources win: defaults < file < command-line overrides.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..lattice import as_sign, sign_name
from ..spectral import DEFAULT_H0, DEFAULT_M_REF, TorusGrid
from .profiles import ProfileSpec, parse_profile

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config_text"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or unparseable experiment configuration."""


def _float_list(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    parts = [p for p in str(text).replace(";", ",").split(",") if p.strip()]
    return tuple(float(p) for p in parts)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    h_list: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    T: float = 1.0
    gamma: float = 0.5
    sign: int = 1
    torus_length: float = 51.2
    m_ref: int = DEFAULT_M_REF
    dt: float = 0.05
    snapshot_count: int = 21
    seed: int = 0
    psi: ProfileSpec = field(default_factory=lambda: parse_profile("gaussian(width=1, amplitude=1, center=0, mode=0.5)"))
    phi: ProfileSpec = field(default_factory=lambda: parse_profile("gaussian(width=1, amplitude=0.8, center=1)"))
    output_dir: str = "runs"
    h0: float = DEFAULT_H0
    # reference continuum solver step, in t units; checked against its own half step
    dt_ref: float = 1e-3
    # reuse one reference solution for all h (extra truncation error reported separately)
    fast_reference: bool = False
    # wall-clock column; off by default so reports are byte-reproducible
    record_timing: bool = False
    kappas: tuple[float, ...] = (4.0, 8.0, 16.0, 32.0, 64.0)
    acl_spacing: float = 1.0
    # tau spacing for the L^6 / L^4 norms (dense enough for the fastest linear phase 4)
    norm_spacing: float = 0.05

    def __post_init__(self):
        try:
            self._normalize()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        self.validate()

    def _normalize(self):
        conv = {
            "h_list": _float_list,
            "kappas": _float_list,
            "T": float,
            "gamma": float,
            "torus_length": float,
            "dt": float,
            "h0": float,
            "dt_ref": float,
            "acl_spacing": float,
            "norm_spacing": float,
            "m_ref": int,
            "snapshot_count": int,
            "seed": int,
            "sign": as_sign,
            "fast_reference": _bool,
            "record_timing": _bool,
            "output_dir": str,
            "psi": parse_profile,
            "phi": parse_profile,
        }
        for name, fn in conv.items():
            object.__setattr__(self, name, fn(getattr(self, name)))

    def validate(self):
        if not self.h_list:
            raise ConfigError("h_list is empty")
        if any(b >= a for a, b in zip(self.h_list, self.h_list[1:])):
            raise ConfigError(f"h_list must be strictly decreasing, got {list(self.h_list)}")
        if not 0 < self.gamma < 1:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.T >= 0:
            raise ConfigError(f"T must be non-negative, got {self.T}")
        if not 0 < self.dt <= 0.5:
            raise ConfigError(f"dt must lie in (0, 0.5], got {self.dt}")
        if not self.dt_ref > 0:
            raise ConfigError(f"dt_ref must be positive, got {self.dt_ref}")
        if self.snapshot_count < 2:
            raise ConfigError("snapshot_count must be at least 2")
        try:
            fine = TorusGrid.with_nodes(self.torus_length, self.m_ref)
        except ValueError as exc:
            raise ConfigError(f"m_ref: {exc}") from exc
        for h in self.h_list:
            if not 0 < h < self.h0:
                raise ConfigError(f"h = {h} outside the admissible range (0, {self.h0})")
            if h**self.gamma >= math.pi / 2:
                raise ConfigError(f"h = {h} violates h^gamma < pi/2")
            try:
                grid = TorusGrid.from_length(self.torus_length, h)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            if grid.m > fine.m:
                raise ConfigError(f"h = {h} needs {grid.m} sites, more than m_ref = {fine.m}")
        if any(k <= 0 or not math.log2(k).is_integer() for k in self.kappas):
            raise ConfigError(f"kappas must be positive powers of two, got {list(self.kappas)}")
        for name in ("psi", "phi"):
            try:
                getattr(self, name).check_periodic(self.torus_length)
            except ValueError as exc:
                raise ConfigError(f"{name}: {exc}") from exc

    # ------------------------------------------------------------------

    def to_mapping(self) -> dict:
        """Plain-data view used for manifests and hashing."""
        out = asdict(self)
        out["h_list"] = list(self.h_list)
        out["kappas"] = list(self.kappas)
        out["sign"] = sign_name(self.sign)
        out["psi"] = self.psi.to_text()
        out["phi"] = self.phi.to_text()
        return out

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**mapping)

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, **overrides)

    def config_hash(self) -> str:
        text = json.dumps(self.to_mapping(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then the file at ``path`` (if any), then ``overrides``."""
    mapping = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        mapping.update(parse_config_text(text))
    mapping.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.from_mapping(mapping)
