"""Measurable functionals of lattice and continuum runs.

Everything that integrates over time consumes an iterable of ``(time, values)``
pairs, so a stored :class:`SnapshotSeries` and a lazily evolved
:class:`SnapshotStream` are interchangeable.  Time integrals use the trapezoid
rule over the snapshot times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .continuum import CoupledState
from .lattice import DnlsParams, SnapshotStream, dispersion, mass
from .spectral import (
    DEFAULT_M_REF,
    ContinuumField,
    LatticeField,
    TorusGrid,
    reconstruct,
)

__all__ = [
    "NormSpec",
    "DriftCurve",
    "BilinearRecord",
    "BilinearSweep",
    "spacetime_norm",
    "strichartz_report",
    "acl_drift_curve",
    "frequency_tail",
    "spatial_tail",
    "annular_data",
    "product_norm",
    "bilinear_ratio_experiment",
    "bilinear_sweep",
    "nonresonance_integral",
    "nonresonance_integrals",
    "nonresonance_stride",
    "fit_loglog_slope",
]

# samples per period of the fastest phase in a time integrand
SAMPLES_PER_PERIOD = 20
# fastest phase of the mixed cubic terms, in lattice time
MIXED_PHASE = 8.0


@dataclass(frozen=True)
class NormSpec:
    """Exponents of the mixed norm ``L^q_t l^p_x``; ``inf`` allowed in either slot."""

    q: float
    p: float

    def __post_init__(self):
        for name, v in (("q", self.q), ("p", self.p)):
            if not (v >= 1):
                raise ValueError(f"exponent {name} must be >= 1, got {v}")

    @property
    def admissible(self) -> bool:
        """Schroedinger admissibility ``2/q + 1/p == 1/2`` (metadata only)."""
        return math.isclose(2.0 / self.q + 1.0 / self.p, 0.5, abs_tol=1e-12)


@dataclass(frozen=True)
class DriftCurve:
    kappas: np.ndarray
    drifts: np.ndarray
    fitted_exponent: float
    floor: float = 0.0
    mass0: float = 0.0
    measurable: np.ndarray = field(default=None)

    def __post_init__(self):
        kappas = np.asarray(self.kappas, dtype=float)
        drifts = np.asarray(self.drifts, dtype=float)
        if kappas.shape != drifts.shape:
            raise ValueError("kappas and drifts must have the same length")
        if np.any(drifts < 0):
            raise ValueError("drifts must be non-negative")
        object.__setattr__(self, "kappas", kappas)
        object.__setattr__(self, "drifts", drifts)
        if self.measurable is None:
            object.__setattr__(self, "measurable", np.zeros(kappas.shape, dtype=bool))

    @property
    def exponent_measurable(self) -> bool:
        return bool(np.isfinite(self.fitted_exponent))


def fit_loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``; NaN with fewer than two points."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 2:
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# ----------------------------------------------------------------------------
# Space-time norms


def _snapshot_values(item) -> tuple[float, np.ndarray, float | None]:
    t, v = item
    if isinstance(v, (ContinuumField, LatticeField)):
        w = v.grid.h if isinstance(v, ContinuumField) else None
        return float(t), np.asarray(v.values), w
    return float(t), np.asarray(v), None


def spacetime_norm(snapshots: Iterable, spec: NormSpec, spatial_weight: float | None = None) -> float:
    """``(int (sum_n w |u_n|^p)^(q/p) dt)^(1/q)`` by the trapezoid rule in time.

    ``snapshots`` yields ``(t, values)`` pairs.  ``spatial_weight`` defaults to
    1 for plain arrays and to ``dx`` for :class:`ContinuumField` snapshots.
    """
    p, q = spec.p, spec.q
    prev_t, prev_f = None, None
    acc, count = 0.0, 0
    for item in snapshots:
        t, v, w = _snapshot_values(item)
        weight = spatial_weight if spatial_weight is not None else (w or 1.0)
        a = np.abs(v)
        if np.isinf(p):
            s = float(a.max(initial=0.0))
        else:
            s = float((weight * np.sum(a**p)) ** (1.0 / p))
        if np.isinf(q):
            acc = max(acc, s)
        else:
            f = s**q
            if prev_t is not None:
                if not t > prev_t:
                    raise ValueError("snapshot times must be strictly increasing")
                acc += 0.5 * (t - prev_t) * (f + prev_f)
            prev_t, prev_f = t, f
        count += 1
    if count < 2:
        raise ValueError("a space-time norm needs at least two snapshots")
    return acc if np.isinf(q) else acc ** (1.0 / q)


def strichartz_report(series: Iterable, h: float, T: float) -> dict:
    """``L^6_tau l^6`` and ``L^4_tau l^inf`` norms of a run over ``[-T/h^2, T/h^2]``.

    The ratios divide by ``||u(0)||_{l^2}`` (the snapshot nearest ``tau = 0``).
    All four numbers come from a single pass over ``series``.
    """
    horizon = T / h**2
    taus, l6, linf, norms = [], [], [], []
    for tau, v in series:
        a = np.abs(np.asarray(v))
        taus.append(float(tau))
        l6.append(float(np.sum(a**6)))
        linf.append(float(a.max(initial=0.0)) ** 4)
        norms.append(float(np.sqrt(np.sum(a**2))))
    taus = np.array(taus)
    if taus.size < 2:
        raise ValueError("need at least two snapshots")
    slack = 1e-9 * max(1.0, horizon)
    if taus[0] > -horizon + slack or taus[-1] < horizon - slack:
        raise ValueError(
            f"series spans [{taus[0]:.6g}, {taus[-1]:.6g}], expected [-{horizon:.6g}, {horizon:.6g}]"
        )
    n6 = float(np.trapezoid(l6, taus) ** (1 / 6))
    n4 = float(np.trapezoid(linf, taus) ** (1 / 4))
    norm0 = norms[int(np.argmin(np.abs(taus)))]
    ratio = (lambda x: x / norm0) if norm0 > 0 else (lambda x: 0.0)
    return {
        "h": h,
        "T": T,
        "l6_l6": n6,
        "l4_linf": n4,
        "norm0": norm0,
        "ratio_l6_l6": ratio(n6),
        "ratio_l4_linf": ratio(n4),
    }


# ----------------------------------------------------------------------------
# Almost conservation of truncated mass


def _truncated_masses(power: np.ndarray, sin_abs: np.ndarray, lams: np.ndarray, m: int) -> np.ndarray:
    out = np.empty(lams.size)
    for i, lam in enumerate(lams):
        keep = np.ones_like(sin_abs, dtype=bool) if lam >= 1 else sin_abs < lam
        out[i] = np.sum(power[keep]) / m
    return out


def acl_drift_curve(
    u0: LatticeField,
    h: float,
    T: float,
    kappas,
    sign=1,
    dt: float = 0.05,
    spacing: float = 1.0,
) -> DriftCurve:
    """Drift ``max_tau |M[P_{<kappa h} u(tau)] - M[P_{<kappa h} u(0)]|`` for each kappa.

    One evolution over ``[-T/h^2, T/h^2]`` with snapshots every ``spacing``
    (in tau) serves all kappas.  The log-log slope is fitted on the kappas
    whose drift exceeds 100 times the roundoff floor, taken as the larger of
    the observed full-mass drift and ``m * eps * M[u0]``.  With fewer than two
    such kappas the exponent is NaN ("not measurable").
    """
    kappas = np.asarray(kappas, dtype=float)
    if kappas.size == 0 or np.any(kappas <= 0):
        raise ValueError("kappas must be positive")
    logs = np.log2(kappas)
    if not np.allclose(logs, np.round(logs)):
        raise ValueError(f"kappas must be dyadic, got {kappas.tolist()}")
    grid = u0.grid
    lams = kappas * h
    sin_abs = np.abs(np.sin(grid.thetas))
    mass0 = mass(u0)
    base = _truncated_masses(np.abs(np.fft.fft(u0.values)) ** 2, sin_abs, lams, grid.m)

    horizon = T / h**2
    n = max(1, int(math.ceil(horizon / spacing - 1e-9)))
    taus = np.linspace(-horizon, horizon, 2 * n + 1)
    params = DnlsParams(sign=sign, dt=dt, t_end=horizon)
    drifts = np.zeros(kappas.size)
    mass_drift = 0.0
    for _, v in SnapshotStream(u0, params, taus):
        power = np.abs(np.fft.fft(v)) ** 2
        drifts = np.maximum(drifts, np.abs(_truncated_masses(power, sin_abs, lams, grid.m) - base))
        mass_drift = max(mass_drift, abs(float(np.sum(np.abs(v) ** 2)) - mass0))

    floor = max(mass_drift, grid.m * np.finfo(float).eps * mass0)
    measurable = drifts > 100.0 * floor
    slope = fit_loglog_slope(kappas[measurable], drifts[measurable])
    return DriftCurve(kappas, drifts, slope, floor, mass0, measurable)


# ----------------------------------------------------------------------------
# Tightness: frequency and spatial tails


def frequency_tail(state: CoupledState, kappa: float) -> float:
    """``||P_{|xi|>=kappa} psi||^2 + ||P_{|xi|>=kappa} phi||^2`` (sharp restriction)."""
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    grid = state.grid
    outside = np.abs(grid.wavenumbers) >= kappa
    total = 0.0
    for f in (state.psi, state.phi):
        c = np.fft.fft(f.values)
        total += np.sum(np.abs(c[outside]) ** 2)
    # Plancherel on the fine grid: dx sum |f|^2 = (dx / M) sum |c|^2
    return float(total * grid.h / grid.m)


def spatial_tail(state: CoupledState, R: float) -> float:
    """``int_{|x|>=R} |psi|^2 + |phi|^2 dx`` on the fine grid, coordinates centred at 0."""
    grid = state.grid
    if not R < grid.length / 2:
        raise ValueError(f"R = {R} must be below the torus half-length {grid.length / 2}")
    far = np.abs(grid.x) >= R
    density = np.abs(state.psi.values) ** 2 + np.abs(state.phi.values) ** 2
    return float(grid.h * np.sum(density[far]))


# ----------------------------------------------------------------------------
# Bilinear estimate for annular data


@dataclass(frozen=True)
class BilinearRecord:
    K: float
    L: float
    window: float
    lhs: np.ndarray  # per trial, normalized data
    ratios: np.ndarray  # lhs / L^{-1/2}

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))

    @property
    def median_ratio(self) -> float:
        return float(np.median(self.ratios))

    @property
    def median_lhs(self) -> float:
        return float(np.median(self.lhs))


@dataclass(frozen=True)
class BilinearSweep:
    records: list
    slope: float

    @property
    def max_ratio(self) -> float:
        return max(r.max_ratio for r in self.records)

    @property
    def median_ratio(self) -> float:
        return float(np.median(np.concatenate([r.ratios for r in self.records])))


def annular_data(thetas: np.ndarray, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Fourier coefficients i.i.d. standard complex normal on ``|sin theta| in [scale/2, scale)``."""
    s = np.abs(np.sin(thetas))
    shell = (s >= scale / 2) & (s < scale)
    z = rng.standard_normal(thetas.size) + 1j * rng.standard_normal(thetas.size)
    return np.where(shell, z / np.sqrt(2.0), 0.0)


def product_norm(a_hat: np.ndarray, b_hat: np.ndarray, window: float, chunk: int = 128) -> float:
    """``||(e^{i tau Delta} a)(e^{i tau Delta} b)||_{L^2_tau l^2}`` over ``[0, window]``.

    ``a_hat`` and ``b_hat`` are lattice Fourier coefficients (FFT order).
    """
    omega = dispersion(TorusGrid(a_hat.size, 1.0).thetas)
    dtau = 2 * np.pi / MIXED_PHASE / SAMPLES_PER_PERIOD
    n = max(2, int(math.ceil(window / dtau)) + 1)
    taus = np.linspace(0.0, window, n)
    vals = np.empty(n)
    for i in range(0, n, chunk):
        t = taus[i : i + chunk]
        ph = np.exp(-1j * np.outer(t, omega))
        ua = np.fft.ifft(a_hat * ph, axis=1)
        ub = np.fft.ifft(b_hat * ph, axis=1)
        vals[i : i + chunk] = np.sum(np.abs(ua * ub) ** 2, axis=1)
    return float(np.sqrt(np.trapezoid(vals, taus)))


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial)])


def _bilinear_trials(K, Ls, trials, window, seed, m):
    if not trials >= 1:
        raise ValueError("need at least one trial")
    for L in Ls:
        if not (0 < K and L <= 1):
            raise ValueError(f"scales must lie in (0, 1], got K={K}, L={L}")
        if not K < L / 2:
            raise ValueError(f"K = {K} must be below L/2 = {L / 2}")
    thetas = TorusGrid(m, 1.0).thetas
    lhs = np.zeros((len(Ls), trials))
    for j in range(trials):
        rng = _trial_rng(seed, j)
        a = annular_data(thetas, K, rng)
        na = np.sqrt(np.sum(np.abs(a) ** 2) / m)
        a = a / na if na > 0 else a
        for i, L in enumerate(Ls):
            b = annular_data(thetas, L, rng)
            nb = np.sqrt(np.sum(np.abs(b) ** 2) / m)
            b = b / nb if nb > 0 else b
            lhs[i, j] = product_norm(a, b, window)
    return lhs


def bilinear_ratio_experiment(
    K: float, L: float, trials: int, window: float = 50.0, seed: int = 0, m: int = 4096
) -> BilinearRecord:
    """Ratios ``||(e^{i tau Delta} a_K)(e^{i tau Delta} b_L)|| / (L^{-1/2} ||a|| ||b||)``.

    Each trial draws its data from a generator keyed on ``(seed, trial)``.
    """
    lhs = _bilinear_trials(K, [L], trials, window, seed, m)[0]
    return BilinearRecord(K, L, window, lhs, lhs * np.sqrt(L))


def bilinear_sweep(
    K: float, L_list, trials: int, window: float = 50.0, seed: int = 0, m: int = 4096
) -> BilinearSweep:
    """Run the ratio experiment over ``L_list`` and fit the slope of median LHS against L."""
    Ls = [float(L) for L in L_list]
    lhs = _bilinear_trials(K, Ls, trials, window, seed, m)
    records = [BilinearRecord(K, L, window, row, row * np.sqrt(L)) for L, row in zip(Ls, lhs)]
    slope = fit_loglog_slope(Ls, [r.median_lhs for r in records])
    return BilinearSweep(records, slope)


# ----------------------------------------------------------------------------
# Non-resonant cubic cross terms


def nonresonance_stride() -> float:
    """Largest tau spacing that resolves the mixed phase ``exp(8 i tau)``."""
    return 2 * np.pi / MIXED_PHASE / SAMPLES_PER_PERIOD


_MODES = ("psi_mixed", "phi_mixed")


def nonresonance_integrals(
    series: Iterable,
    h: float,
    fine: TorusGrid | None = None,
    grid: TorusGrid | None = None,
) -> dict:
    """All four mixed-term integrals from one pass over ``series``.

    Keys are ``psi_mixed``, ``phi_mixed`` and their phase-removed controls
    ``psi_mixed_control``, ``phi_mixed_control``.  See
    :func:`nonresonance_integral` for the definitions.
    """
    grid = grid or getattr(series, "grid", None)
    if grid is None:
        raise ValueError("lattice grid unknown: pass grid= or a series with .grid")
    if fine is None:
        fine = TorusGrid.with_nodes(grid.length, max(DEFAULT_M_REF, grid.m))
    stride = nonresonance_stride()
    acc = {k: np.zeros(fine.m, dtype=complex) for k in _MODES + tuple(k + "_control" for k in _MODES)}
    prev_tau, prev = None, None
    for tau, values in series:
        u = LatticeField(grid, values)
        psi = reconstruct(u, tau, "low", fine).values
        phi = reconstruct(u, tau, "high", fine).values
        f_psi = phi**2 * np.conj(psi)
        f_phi = psi**2 * np.conj(phi)
        rot = np.exp(1j * MIXED_PHASE * tau)
        cur = {
            "psi_mixed": f_psi / rot,
            "phi_mixed": f_phi * rot,
            "psi_mixed_control": f_psi,
            "phi_mixed_control": f_phi,
        }
        if prev_tau is None:
            if abs(tau) > 1e-12:
                raise ValueError(f"series must start at tau = 0, got {tau}")
        else:
            gap = tau - prev_tau
            if gap > stride * (1 + 1e-9):
                raise ValueError(
                    f"snapshot spacing {gap:.6g} too coarse: the phase exp(8 i tau) "
                    f"needs spacing <= {stride:.6g}"
                )
            w = 0.5 * h**2 * gap
            for k in acc:
                acc[k] += w * (cur[k] + prev[k])
        prev_tau, prev = tau, cur
    if prev_tau is None:
        raise ValueError("empty series")
    return {k: float(np.sqrt(fine.h * np.sum(np.abs(v) ** 2))) for k, v in acc.items()}


def nonresonance_integral(
    series: Iterable,
    h: float,
    mode: str,
    fine: TorusGrid | None = None,
    control: bool = False,
    grid: TorusGrid | None = None,
) -> float:
    """``||int_0^t e^{-+8 i s/h^2} F(s) ds||_{L^2}`` at the last snapshot time.

    ``psi_mixed``: ``F = (phi^h)^2 conj(psi^h)`` with phase ``e^{-8 i tau}``.
    ``phi_mixed``: ``F = (psi^h)^2 conj(phi^h)`` with phase ``e^{+8 i tau}``.
    ``control=True`` drops the phase, isolating the cancellation.
    Snapshots are ``(tau, values)`` starting at ``tau = 0``; ``s = h^2 tau``.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be psi_mixed or phi_mixed, got {mode!r}")
    values = nonresonance_integrals(series, h, fine, grid)
    return values[mode + "_control" if control else mode]
