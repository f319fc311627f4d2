"""Reference solver for the coupled cubic NLS system

    i psi_t = -psi_xx + sign * 2 (|psi|^2 + 2 |phi|^2) psi
    i phi_t = +phi_xx + sign * 2 (|phi|^2 + 2 |psi|^2) phi

on the periodic torus, by Strang splitting of the exact linear and pointwise
phase flows.  Note the opposite dispersion in the ``phi`` equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .lattice import NumericalAbort, as_sign
from .spectral import ContinuumField, TorusGrid

__all__ = [
    "CoupledState",
    "nls_linear_step",
    "nls_nonlinear_step",
    "nls_strang_step",
    "nls_evolve",
    "nls_stream",
    "coupled_mass",
    "coupled_energy",
]


@dataclass(frozen=True, eq=False)
class CoupledState:
    psi: ContinuumField
    phi: ContinuumField

    def __post_init__(self):
        if self.psi.grid != self.phi.grid:
            raise ValueError("psi and phi must live on the same grid")

    @property
    def grid(self) -> TorusGrid:
        return self.psi.grid

    @classmethod
    def from_arrays(cls, grid: TorusGrid, psi, phi) -> "CoupledState":
        return cls(ContinuumField(grid, psi), ContinuumField(grid, phi))

    def swap_conjugate(self) -> "CoupledState":
        """The symmetry ``(psi, phi) -> (conj phi, conj psi)``."""
        return CoupledState.from_arrays(
            self.grid, np.conj(self.phi.values), np.conj(self.psi.values)
        )


def _linear_symbols(grid: TorusGrid, t: float) -> tuple[np.ndarray, np.ndarray]:
    xi2 = grid.wavenumbers**2
    return np.exp(-1j * t * xi2), np.exp(1j * t * xi2)


def nls_linear_step(state: CoupledState, t: float) -> CoupledState:
    """``psi_hat *= exp(-i t xi^2)``, ``phi_hat *= exp(+i t xi^2)``."""
    sp, sq = _linear_symbols(state.grid, t)
    return CoupledState.from_arrays(
        state.grid,
        np.fft.ifft(sp * np.fft.fft(state.psi.values)),
        np.fft.ifft(sq * np.fft.fft(state.phi.values)),
    )


def _phase_flow(psi, phi, t, sign):
    if sign == 0:
        return psi, phi
    a = psi.real**2 + psi.imag**2
    b = phi.real**2 + phi.imag**2
    k = -2j * sign * t
    return psi * np.exp(k * (a + 2.0 * b)), phi * np.exp(k * (b + 2.0 * a))


def nls_nonlinear_step(state: CoupledState, t: float, sign) -> CoupledState:
    """Exact pointwise flow of the coupled cubic terms (both moduli are invariant)."""
    psi, phi = _phase_flow(state.psi.values, state.phi.values, t, as_sign(sign))
    return CoupledState.from_arrays(state.grid, psi, phi)


def nls_strang_step(state: CoupledState, dt: float, sign) -> CoupledState:
    sign = as_sign(sign)
    s = nls_nonlinear_step(state, 0.5 * dt, sign)
    s = nls_linear_step(s, dt)
    return nls_nonlinear_step(s, 0.5 * dt, sign)


def _advance(psi, phi, grid, steps, sign, cache):
    if not steps:
        return psi, phi
    psi, phi = _phase_flow(psi, phi, 0.5 * steps[0], sign)
    for i, step in enumerate(steps):
        if step not in cache:
            cache[step] = _linear_symbols(grid, step)
        sp, sq = cache[step]
        psi = np.fft.ifft(sp * np.fft.fft(psi))
        phi = np.fft.ifft(sq * np.fft.fft(phi))
        nxt = steps[i + 1] if i + 1 < len(steps) else 0.0
        psi, phi = _phase_flow(psi, phi, 0.5 * (step + nxt), sign)
        if i % 256 == 0 and not (np.all(np.isfinite(psi)) and np.all(np.isfinite(phi))):
            raise NumericalAbort(f"coupled NLS blew up at step {i}")
    if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(phi))):
        raise NumericalAbort("coupled NLS produced non-finite values")
    return psi, phi


def _steps(span: float, dt: float) -> list[float]:
    if span == 0:
        return []
    n = max(1, int(math.ceil(abs(span) / dt - 1e-9)))
    return [span / n] * n


def nls_stream(
    state0: CoupledState, dt: float, sign, snapshot_ts: Iterable[float]
) -> Iterator[tuple[float, CoupledState]]:
    """Yield ``(t, state)`` at the requested times in increasing order.

    Each interval between consecutive snapshots is split into equal steps no
    longer than ``dt``, so every snapshot is hit exactly.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    sign = as_sign(sign)
    ts = np.sort(np.asarray(list(snapshot_ts), dtype=float))
    grid = state0.grid
    cache: dict = {}
    psi, phi = np.array(state0.psi.values), np.array(state0.phi.values)
    t = 0.0
    if ts.size and ts[0] < 0:
        psi, phi = _advance(psi, phi, grid, _steps(ts[0], dt), sign, cache)
        t = float(ts[0])
    for target in ts:
        psi, phi = _advance(psi, phi, grid, _steps(target - t, dt), sign, cache)
        t = float(target)
        yield t, CoupledState.from_arrays(grid, psi, phi)


def nls_evolve(
    state0: CoupledState, t_end: float, dt: float, sign, snapshot_ts: Iterable[float]
) -> list[CoupledState]:
    """States at ``snapshot_ts`` (each within ``[-t_end, t_end]``)."""
    ts = list(snapshot_ts)
    if ts and max(abs(t) for t in ts) > abs(t_end) * (1 + 1e-12) + 1e-12:
        raise ValueError(f"snapshot times exceed the horizon {t_end}")
    return [s for _, s in nls_stream(state0, dt, sign, ts)]


def coupled_mass(state: CoupledState) -> tuple[float, float]:
    dx = state.grid.h
    return (
        float(dx * np.sum(np.abs(state.psi.values) ** 2)),
        float(dx * np.sum(np.abs(state.phi.values) ** 2)),
    )


def _spectral_derivative(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return np.fft.ifft(1j * grid.wavenumbers * np.fft.fft(values))


def coupled_energy(state: CoupledState, sign) -> float:
    """``int |psi_x|^2 - |phi_x|^2 + sign (|psi|^4 + |phi|^4 + 4 |psi|^2 |phi|^2) dx``.

    Not coercive (the gradient terms have opposite signs); a diagnostic only.
    """
    sign = as_sign(sign)
    grid = state.grid
    psi, phi = state.psi.values, state.phi.values
    a, b = np.abs(psi) ** 2, np.abs(phi) ** 2
    kinetic = np.abs(_spectral_derivative(psi, grid)) ** 2 - np.abs(
        _spectral_derivative(phi, grid)
    ) ** 2
    density = kinetic + sign * (a**2 + b**2 + 4.0 * a * b)
    return float(grid.h * np.sum(density))
