"""
Grids, Fourier transforms and the lattice <-> continuum passage.

Conventions
-----------
Lattice sites are ``n = 0, ..., m-1`` on a periodic torus of ``m`` sites with
spacing ``h``; site ``n`` sits at ``x = h n`` (mod ``length``).  The discrete
Fourier series is

    a_hat(theta_k) = sum_n a_n exp(-i n theta_k),   theta_k = 2 pi k / m,

which is exactly ``numpy.fft.fft``.  Coefficient arrays are kept in FFT order;
``TorusGrid.thetas`` gives the matching frequency nodes in ``[-pi, pi)``.

A continuum field on the same torus is stored by its samples on a fine grid
of ``M`` nodes (spacing ``dx``).  Fine-grid samples determine a trigonometric
polynomial; every continuum operation here (projections, evaluation at lattice
points, L^2 norms) is exact for that polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TorusGrid",
    "LatticeField",
    "SpectrumField",
    "ContinuumField",
    "CutoffSpec",
    "SamplingSpec",
    "SamplingError",
    "DEFAULT_H0",
    "DEFAULT_M_REF",
    "dft",
    "idft",
    "smooth_bump",
    "smooth_lowpass",
    "sharp_cutoff",
    "sample_initial_data",
    "reconstruct",
    "evaluate_on_lattice",
    "l2_norm",
    "lp_norm",
]

DEFAULT_H0 = 0.25
DEFAULT_M_REF = 4096


class SamplingError(ValueError):
    """Raised when the requested sampling would alias or leave the studied regime."""


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid of ``m`` nodes and spacing ``h`` (``length = m h``)."""

    m: int
    h: float

    def __post_init__(self):
        if int(self.m) != self.m or not _is_power_of_two(int(self.m)):
            raise ValueError(f"site count must be a power of two, got {self.m}")
        if not (self.h > 0 and np.isfinite(self.h)):
            raise ValueError(f"spacing must be positive, got {self.h}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "h", float(self.h))

    @classmethod
    def from_length(cls, length: float, h: float) -> "TorusGrid":
        """Grid of spacing ``h`` covering ``length``; ``length / h`` must be a power of two."""
        ratio = length / h
        m = int(round(ratio))
        if abs(ratio - m) > 1e-9 * max(1.0, ratio) or not _is_power_of_two(m):
            raise ValueError(
                f"length/h = {ratio!r} is not a power of two (length={length}, h={h})"
            )
        return cls(m, length / m)

    @classmethod
    def with_nodes(cls, length: float, m: int) -> "TorusGrid":
        return cls(m, length / m)

    @property
    def length(self) -> float:
        return self.m * self.h

    @property
    def sites(self) -> np.ndarray:
        """Integer site labels ``0..m-1`` (FFT order)."""
        return np.arange(self.m)

    @property
    def x(self) -> np.ndarray:
        """Node positions wrapped into ``[-length/2, length/2)``, in storage order."""
        n = np.arange(self.m)
        n = np.where(n >= self.m // 2, n - self.m, n)
        return n * self.h

    @property
    def thetas(self) -> np.ndarray:
        """Lattice frequencies ``theta_k`` in ``[-pi, pi)``, FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.m)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Continuum wavenumbers ``xi_k = theta_k / h`` (FFT order)."""
        return self.thetas / self.h

    @property
    def alternating(self) -> np.ndarray:
        """The carrier ``(-1)^n``."""
        return 1.0 - 2.0 * (np.arange(self.m) % 2)

    def same_torus(self, other: "TorusGrid") -> bool:
        return abs(self.length - other.length) <= 1e-12 * self.length


def _as_values(values, m: int) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if arr.shape != (m,):
        raise ValueError(f"expected {m} values, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field contains NaN or Inf")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LatticeField:
    """Complex lattice state ``u_n``."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.values, self.grid.m))

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "LatticeField":
        return cls(grid, np.zeros(grid.m, dtype=complex))

    def with_values(self, values) -> "LatticeField":
        return LatticeField(self.grid, values)


@dataclass(frozen=True, eq=False)
class SpectrumField:
    """Fourier coefficients ``a_hat(theta_k)`` of a lattice field, FFT order."""

    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_values(self.coeffs, self.grid.m))


@dataclass(frozen=True, eq=False)
class ContinuumField:
    """Samples of a band-limited function on a fine periodic grid.

    ``band`` optionally records the half-width of the declared Fourier support
    (``pi / (2h)`` for reconstructed fields); it is metadata only.
    """

    grid: TorusGrid
    values: np.ndarray
    band: float | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.values, self.grid.m))

    @classmethod
    def from_function(cls, grid: TorusGrid, f) -> "ContinuumField":
        return cls(grid, f(grid.x))

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "ContinuumField":
        return cls(grid, np.zeros(grid.m, dtype=complex))

    @property
    def spectrum(self) -> np.ndarray:
        """Fine-grid FFT of the samples (FFT order, unnormalized)."""
        return np.fft.fft(self.values)

    def norm(self) -> float:
        return l2_norm(self)


@dataclass(frozen=True)
class CutoffSpec:
    """Sharp cutoff ``|sin theta| < lam``; ``lam >= 1`` is the identity."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"cutoff parameter must be positive, got {self.lam}")

    @property
    def is_identity(self) -> bool:
        return self.lam >= 1.0

    def mask(self, thetas: np.ndarray) -> np.ndarray:
        if self.is_identity:
            return np.ones(thetas.shape, dtype=bool)
        return np.abs(np.sin(thetas)) < self.lam


@dataclass(frozen=True)
class SamplingSpec:
    """Lattice spacing ``h`` and smoothing exponent ``gamma``; ``n_cut = h^(gamma-1)/2``."""

    h: float
    gamma: float
    h0: float = DEFAULT_H0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise SamplingError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 < self.h < self.h0:
            raise SamplingError(
                f"h = {self.h} is outside the admissible range (0, {self.h0})"
            )
        if not 2.0 * self.h * self.n_cut < np.pi / 2:
            raise SamplingError(
                f"support condition h^gamma < pi/2 fails for h={self.h}, gamma={self.gamma}"
            )

    @property
    def n_cut(self) -> float:
        return self.h ** (-1.0 + self.gamma) / 2.0


# ----------------------------------------------------------------------------
# Discrete Fourier series


def dft(u: LatticeField) -> SpectrumField:
    return SpectrumField(u.grid, np.fft.fft(u.values))


def idft(spec: SpectrumField) -> LatticeField:
    return LatticeField(spec.grid, np.fft.ifft(spec.coeffs))


# ----------------------------------------------------------------------------
# Projections


def smooth_bump(r: np.ndarray) -> np.ndarray:
    """Even bump: 1 on ``|r| <= 1``, 0 on ``|r| >= 2``, raised cosine between."""
    a = np.abs(np.asarray(r, dtype=float))
    out = np.cos(0.5 * np.pi * (a - 1.0)) ** 2
    out = np.where(a <= 1.0, 1.0, out)
    return np.where(a >= 2.0, 0.0, out)


def smooth_lowpass(f: ContinuumField, n_cut: float) -> ContinuumField:
    """Apply the Fourier multiplier ``smooth_bump(xi / n_cut)``."""
    if not n_cut > 0:
        raise ValueError(f"n_cut must be positive, got {n_cut}")
    mult = smooth_bump(f.grid.wavenumbers / n_cut)
    band = 2.0 * n_cut if f.band is None else min(f.band, 2.0 * n_cut)
    return ContinuumField(f.grid, np.fft.ifft(mult * np.fft.fft(f.values)), band)


def sharp_cutoff(spec: SpectrumField, cutoff: CutoffSpec, keep: str = "inside") -> SpectrumField:
    """Keep the coefficients with ``|sin theta_k| < lam`` (``inside``) or the rest (``outside``).

    Nodes with ``|sin theta_k| == lam`` count as outside.
    """
    mask = cutoff.mask(spec.grid.thetas)
    if keep == "outside":
        mask = ~mask
    elif keep != "inside":
        raise ValueError(f"keep must be 'inside' or 'outside', got {keep!r}")
    return SpectrumField(spec.grid, np.where(mask, spec.coeffs, 0.0))


# ----------------------------------------------------------------------------
# Lattice <-> continuum


def _resample_coeffs(coeffs: np.ndarray, size: int) -> np.ndarray:
    """Move FFT-ordered coefficients onto ``size`` modes (truncate or zero-pad).

    Modes kept are ``k in [-size/2, size/2)``.
    """
    n = coeffs.shape[-1]
    k = np.fft.fftfreq(n, 1.0 / n).astype(int)
    keep = (k >= -size // 2) & (k < size // 2)
    out = np.zeros(coeffs.shape[:-1] + (size,), dtype=complex)
    out[..., k[keep] % size] = coeffs[..., keep]
    return out


def evaluate_on_lattice(f: ContinuumField, grid: TorusGrid) -> np.ndarray:
    """Exact values ``f(h n)`` of a fine-grid trigonometric polynomial at lattice sites.

    Frequencies at or beyond the lattice Nyquist ``pi/h`` are rejected unless
    they vanish, since sampling would alias them.
    """
    if not f.grid.same_torus(grid):
        raise ValueError("continuum field and lattice live on different tori")
    M, m = f.grid.m, grid.m
    if m <= M and M % m == 0:
        return np.array(f.values[:: M // m])
    coeffs = np.fft.fft(f.values)
    return np.fft.ifft(_resample_coeffs(coeffs, m)) * (m / M)


def sample_initial_data(
    psi0: ContinuumField, phi0: ContinuumField, spec: SamplingSpec
) -> LatticeField:
    """Assemble ``u_n(0) = h [P psi0](hn) + (-1)^n h [P phi0](hn)`` with ``P`` the
    smooth low-pass at ``spec.n_cut``.
    """
    fine = psi0.grid
    if fine != phi0.grid:
        raise SamplingError("psi0 and phi0 must share one fine grid")
    nyquist = np.pi / fine.h
    if not 2.0 * spec.n_cut < nyquist:
        raise SamplingError(
            f"fine grid (Nyquist {nyquist:.6g}) cannot resolve the smoothing band "
            f"2*n_cut = {2 * spec.n_cut:.6g}"
        )
    lattice = TorusGrid.from_length(fine.length, spec.h)
    if lattice.m > fine.m:
        raise SamplingError(
            f"lattice of {lattice.m} sites is finer than the reference grid ({fine.m})"
        )
    low = evaluate_on_lattice(smooth_lowpass(psi0, spec.n_cut), lattice)
    high = evaluate_on_lattice(smooth_lowpass(phi0, spec.n_cut), lattice)
    return LatticeField(lattice, spec.h * (low + lattice.alternating * high))


def _semicircle_masks(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Low modes ``k in [-m/4, m/4)`` and high modes ``k in [m/4, 3m/4)``.

    The half-open split makes the two pieces partition the whole circle, so
    reconstruction followed by resampling is exact for every lattice field.
    """
    k = np.fft.fftfreq(m, 1.0 / m).astype(int)
    low = (k >= -m // 4) & (k < m // 4)
    return low, ~low


def reconstruct(
    u: LatticeField,
    tau: float,
    component: str,
    fine: TorusGrid | None = None,
) -> ContinuumField:
    """Band-limited reconstruction of the low (``psi^h``) or high (``phi^h``) component.

    ``low``: keep ``|theta| < pi/2``, map ``theta = h xi`` and scale by ``1/h``.
    ``high``: keep ``|theta - pi| < pi/2``, recentre at ``pi`` and multiply by
    ``exp(4 i tau)``.  Output lives on ``fine`` and is band-limited to
    ``[-pi/(2h), pi/(2h)]``.  ``fine`` defaults to ``DEFAULT_M_REF`` nodes.
    """
    grid = u.grid
    if fine is None:
        fine = TorusGrid.with_nodes(grid.length, DEFAULT_M_REF)
    if not grid.same_torus(fine):
        raise ValueError("lattice and fine grid have different lengths")
    m, M = grid.m, fine.m
    if M < m // 2:
        raise ValueError(f"fine grid ({M}) cannot hold the half band of a {m}-site lattice")
    coeffs = np.fft.fft(u.values)
    low, high = _semicircle_masks(m)
    if component == "low":
        c = np.where(low, coeffs, 0.0)
        phase = 1.0
    elif component == "high":
        c = np.roll(np.where(high, coeffs, 0.0), -m // 2)
        phase = np.exp(4j * tau)
    else:
        raise ValueError(f"component must be 'low' or 'high', got {component!r}")
    # psi^h(x_j) = (1/(h m)) sum_k c_k e^{i xi_k x_j} = ifft_M(pad c) * M / length
    values = np.fft.ifft(_resample_coeffs(c, M)) * (M / grid.length) * phase
    return ContinuumField(fine, values, band=np.pi / (2.0 * grid.h))


# ----------------------------------------------------------------------------
# Norms


def l2_norm(f: ContinuumField) -> float:
    """``||f||_{L^2}`` of the fine-grid trigonometric polynomial (exact)."""
    return float(np.sqrt(f.grid.h * np.sum(np.abs(f.values) ** 2)))


def lp_norm(values: np.ndarray, p: float, weight: float = 1.0) -> float:
    """``(weight * sum |a|^p)^(1/p)``; ``p = inf`` gives the max modulus."""
    a = np.abs(np.asarray(values))
    if np.isinf(p):
        return float(a.max(initial=0.0))
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float((weight * np.sum(a**p)) ** (1.0 / p))
