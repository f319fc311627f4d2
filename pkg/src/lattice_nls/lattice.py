"""Time evolution of the cubic DNLS lattice and its (almost) conserved functionals.

The equation, in lattice time ``tau``, is

    i du_n/dtau = -(u_{n+1} - 2 u_n + u_{n-1}) + sign * 2 |u_n|^2 u_n

with ``sign = +1`` defocusing, ``-1`` focusing and ``0`` for the linear flow.
Both halves of the splitting are solved exactly, so every step is an
l^2-isometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .spectral import CutoffSpec, LatticeField, TorusGrid, dft, sharp_cutoff

__all__ = [
    "NumericalAbort",
    "DnlsParams",
    "SnapshotSeries",
    "as_sign",
    "dispersion",
    "linear_propagate",
    "nonlinear_propagate",
    "strang_step",
    "evolve",
    "stream",
    "SnapshotStream",
    "mass",
    "energy",
    "truncated_mass",
]

_SIGNS = {"defocusing": 1, "+": 1, "focusing": -1, "-": -1, "linear": 0, "none": 0}

# how often the stepping loop checks for non-finite values
_FINITE_CHECK_STRIDE = 256


class NumericalAbort(RuntimeError):
    """A run produced NaN/Inf or failed a resolution check."""


def as_sign(sign) -> int:
    """Normalize ``'defocusing'/'focusing'/'linear'`` or ``+1/-1/0`` to an int."""
    if isinstance(sign, str):
        try:
            return _SIGNS[sign.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown sign {sign!r}") from None
    if sign in (1, -1, 0):
        return int(sign)
    raise ValueError(f"sign must be +1, -1 or 0, got {sign!r}")


def sign_name(sign) -> str:
    return {1: "defocusing", -1: "focusing", 0: "linear"}[as_sign(sign)]


@dataclass(frozen=True)
class DnlsParams:
    sign: int = 1
    dt: float = 0.05
    t_end: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sign", as_sign(self.sign))
        if not 0.0 < self.dt <= 0.5:
            raise ValueError(f"dt must lie in (0, 0.5], got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")


@dataclass(frozen=True, eq=False)
class SnapshotSeries:
    """States ``u(tau_j)`` at increasing times; ``states`` is a ``(J, m)`` array."""

    grid: TorusGrid
    taus: np.ndarray
    states: np.ndarray
    params: DnlsParams

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float)
        states = np.asarray(self.states, dtype=complex)
        if states.shape != (taus.size, self.grid.m):
            raise ValueError(f"states shape {states.shape} does not match taus/grid")
        if taus.size > 1 and not np.all(np.diff(taus) > 0):
            raise ValueError("snapshot times must be strictly increasing")
        taus.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return self.taus.size

    def __getitem__(self, j: int) -> LatticeField:
        return LatticeField(self.grid, self.states[j])

    def __iter__(self) -> Iterator[tuple[float, np.ndarray]]:
        for tau, values in zip(self.taus, self.states):
            yield float(tau), values

    def masses(self) -> np.ndarray:
        return np.sum(np.abs(self.states) ** 2, axis=1)

    def energies(self) -> np.ndarray:
        return np.array([_energy_values(v, self.params.sign) for v in self.states])


def dispersion(thetas: np.ndarray) -> np.ndarray:
    """Phase speed ``4 sin^2(theta/2) = -(2 cos theta - 2)`` of the linear flow."""
    return 4.0 * np.sin(0.5 * thetas) ** 2


def linear_propagate(u: LatticeField, tau: float) -> LatticeField:
    """Exact solution of ``i du/dtau = -Delta_d u`` after time ``tau``."""
    symbol = np.exp(-1j * tau * dispersion(u.grid.thetas))
    return u.with_values(np.fft.ifft(symbol * np.fft.fft(u.values)))


def _nonlinear_phase(values: np.ndarray, tau: float, sign: int) -> np.ndarray:
    if sign == 0:
        return values
    return values * np.exp((-2j * sign * tau) * (values.real**2 + values.imag**2))


def nonlinear_propagate(u: LatticeField, tau: float, sign) -> LatticeField:
    """Exact flow of ``i du_n/dtau = sign * 2 |u_n|^2 u_n``; ``|u_n|`` is untouched."""
    return u.with_values(_nonlinear_phase(u.values, tau, as_sign(sign)))


def strang_step(u: LatticeField, dt: float, sign) -> LatticeField:
    """Half nonlinear, full linear, half nonlinear."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    sign = as_sign(sign)
    v = nonlinear_propagate(u, 0.5 * dt, sign)
    v = linear_propagate(v, dt)
    return nonlinear_propagate(v, 0.5 * dt, sign)


class _Stepper:
    """Fused Strang stepping: adjacent nonlinear half-steps are merged."""

    def __init__(self, grid: TorusGrid, dt: float, sign: int):
        self.sign = sign
        self.omega = dispersion(grid.thetas)
        self.dt = dt
        self.full = np.exp(-1j * dt * self.omega)

    def _symbol(self, step: float) -> np.ndarray:
        if step == self.dt:
            return self.full
        return np.exp(-1j * step * self.omega)

    def advance(self, values: np.ndarray, steps: list[float]) -> np.ndarray:
        """Apply Strang steps of the given sizes in sequence (sizes may be negative)."""
        if not steps:
            return values
        sign = self.sign
        v = _nonlinear_phase(values, 0.5 * steps[0], sign)
        for i, step in enumerate(steps):
            v = np.fft.ifft(self._symbol(step) * np.fft.fft(v))
            nxt = steps[i + 1] if i + 1 < len(steps) else 0.0
            v = _nonlinear_phase(v, 0.5 * (step + nxt), sign)
            if i % _FINITE_CHECK_STRIDE == 0 and not np.all(np.isfinite(v)):
                raise NumericalAbort(f"non-finite state after step {i} (size {step})")
        if not np.all(np.isfinite(v)):
            raise NumericalAbort("non-finite state at end of interval")
        return v


def _step_sizes(span: float, dt: float) -> list[float]:
    """Full steps of ``dt`` followed by one partial step landing on ``span``."""
    if span == 0:
        return []
    direction = math.copysign(1.0, span)
    length = abs(span)
    n_full = int(math.floor(length / dt * (1 + 1e-14)))
    rest = length - n_full * dt
    steps = [dt] * n_full
    if rest > 1e-12 * dt:
        steps.append(rest)
    return [direction * s for s in steps]


class SnapshotStream:
    """Lazily evolved run: iterating yields ``(tau, values)`` in increasing ``tau``.

    If negative times are requested the state is first carried back to the
    earliest one with steps of ``-dt``, then swept forward through all
    snapshots.  Only the current state is held in memory, so long, densely
    sampled runs can feed the diagnostics directly.  Each iteration re-runs
    the evolution from ``u0``.
    """

    def __init__(self, u0: LatticeField, params: DnlsParams, snapshot_taus: Iterable[float]):
        taus = np.sort(np.asarray(list(snapshot_taus), dtype=float))
        if taus.size and np.any(np.diff(taus) <= 0):
            raise ValueError("snapshot times must be distinct")
        horizon = params.t_end
        if taus.size and np.max(np.abs(taus)) > horizon * (1 + 1e-12) + 1e-12:
            raise ValueError(f"snapshot times exceed the horizon t_end={horizon}")
        self.u0 = u0
        self.params = params
        self.taus = taus

    @property
    def grid(self) -> TorusGrid:
        return self.u0.grid

    def __len__(self) -> int:
        return self.taus.size

    def __iter__(self) -> Iterator[tuple[float, np.ndarray]]:
        params = self.params
        stepper = _Stepper(self.grid, params.dt, params.sign)
        v, t = np.array(self.u0.values), 0.0
        if self.taus.size and self.taus[0] < 0:
            t = float(self.taus[0])
            v = stepper.advance(v, _step_sizes(t, params.dt))
        for tau in self.taus:
            v = stepper.advance(v, _step_sizes(tau - t, params.dt))
            t = float(tau)
            yield t, v


def stream(u0: LatticeField, params: DnlsParams, snapshot_taus: Iterable[float]) -> SnapshotStream:
    return SnapshotStream(u0, params, snapshot_taus)


def evolve(
    u0: LatticeField, params: DnlsParams, snapshot_taus: Iterable[float]
) -> SnapshotSeries:
    """Evolve ``u0`` and collect the states at ``snapshot_taus``."""
    taus, states = [], []
    for tau, values in stream(u0, params, snapshot_taus):
        taus.append(tau)
        states.append(values)
    states = np.array(states, dtype=complex).reshape(len(taus), u0.grid.m)
    return SnapshotSeries(u0.grid, np.array(taus), states, params)


def mass(u: LatticeField) -> float:
    return float(np.sum(np.abs(u.values) ** 2))


def _energy_values(values: np.ndarray, sign: int) -> float:
    grad = np.roll(values, -1) - values
    a2 = np.abs(values) ** 2
    return float(np.sum(np.abs(grad) ** 2) + sign * np.sum(a2**2))


def energy(u: LatticeField, sign) -> float:
    """``sum_n |u_{n+1} - u_n|^2 + sign |u_n|^4`` with periodic wrap."""
    return _energy_values(u.values, as_sign(sign))


def truncated_mass(u: LatticeField, cutoff: CutoffSpec) -> float:
    """Mass of the sharp projection ``|sin theta| < lam`` of ``u``."""
    kept = sharp_cutoff(dft(u), cutoff, "inside").coeffs
    return float(np.sum(np.abs(kept) ** 2) / u.grid.m)
