"""Named families of initial profiles ``f(x)`` on the centred torus.

A profile is written ``name(key=value, ...)``, e.g.
``gaussian(width=1, amplitude=0.8, center=1)``.  New families are added with
:func:`register_profile`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["ProfileSpec", "PROFILES", "parse_profile", "register_profile"]


def _gaussian(x, width=1.0, amplitude=1.0, center=0.0, mode=0.0):
    return amplitude * np.exp(-((x - center) ** 2) / (2 * width**2)) * np.exp(1j * mode * x)


def _sech(x, width=1.0, amplitude=1.0, center=0.0, mode=0.0):
    return amplitude / np.cosh((x - center) / width) * np.exp(1j * mode * x)


def _plane_wave(x, mode=0.0, amplitude=1.0):
    return amplitude * np.exp(1j * mode * x) * np.ones_like(x)


def _two_bump(x, width=1.0, amplitude=1.0, separation=4.0, mode=0.0):
    half = separation / 2
    return _gaussian(x, width, amplitude, -half, mode) + _gaussian(x, width, amplitude, half, mode)


def _zero(x):
    return np.zeros_like(x, dtype=complex)


PROFILES: dict[str, Callable] = {
    "gaussian": _gaussian,
    "sech": _sech,
    "plane_wave": _plane_wave,
    "two_bump": _two_bump,
    "zero": _zero,
}


def register_profile(name: str, fn: Callable) -> None:
    """Add a family; ``fn(x, **params)`` must return complex samples."""
    PROFILES[name] = fn


_CALL = re.compile(r"^\s*([A-Za-z_][\w-]*)\s*(?:\((.*)\))?\s*$")


@dataclass(frozen=True)
class ProfileSpec:
    name: str
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.name not in PROFILES:
            raise ValueError(f"unknown profile {self.name!r}; known: {sorted(PROFILES)}")
        try:
            self(np.zeros(1))
        except TypeError as exc:
            raise ValueError(f"bad parameters for profile {self.name!r}: {exc}") from exc

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(PROFILES[self.name](x, **dict(self.params)), dtype=complex)

    def to_text(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params)
        return f"{self.name}({inner})"

    def check_periodic(self, length: float) -> None:
        """A plane wave must fit the torus (its mode a multiple of ``2 pi / length``)."""
        if self.name != "plane_wave":
            return
        k = dict(self.params).get("mode", 0.0)
        cycles = k * length / (2 * math.pi)
        if abs(cycles - round(cycles)) > 1e-9:
            raise ValueError(
                f"plane_wave mode {k} is not a torus wavenumber for length {length}"
            )


def parse_profile(text) -> ProfileSpec:
    if isinstance(text, ProfileSpec):
        return text
    match = _CALL.match(str(text))
    if not match:
        raise ValueError(f"cannot parse profile {text!r}")
    name = match.group(1).replace("-", "_")
    params = []
    body = (match.group(2) or "").strip()
    if body:
        for item in body.split(","):
            if "=" not in item:
                raise ValueError(f"profile parameter needs key=value, got {item.strip()!r}")
            key, value = item.split("=", 1)
            params.append((key.strip(), float(value)))
    return ProfileSpec(name, tuple(sorted(params)))
