"""Sweeps over the lattice spacing and the single-run pipeline."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .. import diagnostics as diag
from ..continuum import CoupledState, nls_linear_step, nls_stream
from ..lattice import DnlsParams, NumericalAbort, SnapshotSeries, evolve, sign_name, stream
from ..spectral import (
    ContinuumField,
    LatticeField,
    SamplingSpec,
    TorusGrid,
    evaluate_on_lattice,
    reconstruct,
    sample_initial_data,
    smooth_lowpass,
)
from .config import SCHEMA_VERSION, ExperimentConfig
from .io import (
    HarnessIOError,
    dump_json,
    read_field_csv,
    read_table_csv,
    write_field_csv,
    write_table_csv,
    write_text,
)

__all__ = [
    "ReferenceUnderResolved",
    "ConvergenceRow",
    "ConvergenceReport",
    "initial_data",
    "run_convergence_study",
    "run_single",
    "load_run",
    "emit_report",
    "read_report",
    "emit_table",
    "acl_rows",
    "nonresonance_rows",
    "bilinear_rows",
]

# the reference must be this much more accurate than the error it measures
REFERENCE_MARGIN = 10.0
# below this the reference check is moot (both sides at roundoff)
_ROUNDOFF = 1e-13


class ReferenceUnderResolved(NumericalAbort):
    """The continuum reference is not accurate enough to measure the lattice error."""


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    err_psi: float
    err_phi: float
    longwave_err: float
    ref_check: float
    seconds: float
    l2_err: float
    trunc_err: float = 0.0


COLUMNS = [f.name for f in fields(ConvergenceRow)]


@dataclass(frozen=True)
class ConvergenceReport:
    rows: list
    config_hash: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        hs = [r.h for r in self.rows]
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ValueError("report rows must be ordered by decreasing h")
        for r in self.rows:
            if not all(math.isfinite(getattr(r, c)) for c in COLUMNS):
                raise ValueError(f"non-finite entry in row h={r.h}")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


# ----------------------------------------------------------------------------
# Data


def fine_grid(cfg: ExperimentConfig) -> TorusGrid:
    return TorusGrid.with_nodes(cfg.torus_length, cfg.m_ref)


def initial_data(cfg: ExperimentConfig) -> tuple[ContinuumField, ContinuumField]:
    fine = fine_grid(cfg)
    return ContinuumField.from_function(fine, cfg.psi), ContinuumField.from_function(fine, cfg.phi)


def _sampled(cfg: ExperimentConfig, h: float):
    psi0, phi0 = initial_data(cfg)
    spec = SamplingSpec(h, cfg.gamma, cfg.h0)
    u0 = sample_initial_data(psi0, phi0, spec)
    smoothed = CoupledState(smooth_lowpass(psi0, spec.n_cut), smooth_lowpass(phi0, spec.n_cut))
    return u0, smoothed, CoupledState(psi0, phi0)


def snapshot_times(cfg: ExperimentConfig) -> np.ndarray:
    return np.linspace(-cfg.T, cfg.T, cfg.snapshot_count)


# ----------------------------------------------------------------------------
# Convergence study


def _reference_arrays(state0: CoupledState, cfg: ExperimentConfig, ts: np.ndarray):
    """Reference snapshots at ``dt_ref`` together with the half-step check runs."""
    coarse = nls_stream(state0, cfg.dt_ref, cfg.sign, ts)
    finer = nls_stream(state0, cfg.dt_ref / 2, cfg.sign, ts)
    return zip(coarse, finer)


def _diff_norm(a: np.ndarray, b: np.ndarray, dx: float) -> float:
    return float(np.sqrt(dx * np.sum(np.abs(a - b) ** 2)))


def _convergence_row(cfg: ExperimentConfig, h: float, shared_reference=None) -> ConvergenceRow:
    start = time.perf_counter()
    try:
        u0, smoothed, raw = _sampled(cfg, h)
        grid, fine = u0.grid, smoothed.grid
        ts = snapshot_times(cfg)
        horizon = cfg.T / h**2
        lattice = stream(u0, DnlsParams(cfg.sign, cfg.dt, horizon), ts / h**2)
        if shared_reference is None:
            reference = _reference_arrays(smoothed, cfg, ts)
        else:
            reference = shared_reference
        trunc = math.hypot(
            _diff_norm(smoothed.psi.values, raw.psi.values, fine.h),
            _diff_norm(smoothed.phi.values, raw.phi.values, fine.h),
        ) if cfg.fast_reference else 0.0

        err_psi = err_phi = longwave = combined = ref_err = 0.0
        for (tau, values), ((t, ref), (_, ref_half)) in zip(lattice, reference):
            u = LatticeField(grid, values)
            psi_h = reconstruct(u, tau, "low", fine).values
            phi_h = reconstruct(u, tau, "high", fine).values
            ep = _diff_norm(psi_h, ref.psi.values, fine.h)
            eq = _diff_norm(phi_h, ref.phi.values, fine.h)
            err_psi, err_phi = max(err_psi, ep), max(err_phi, eq)
            combined = max(combined, math.hypot(ep, eq))
            sampled = evaluate_on_lattice(ref.psi, grid) + np.exp(-4j * tau) * grid.alternating * evaluate_on_lattice(ref.phi, grid)
            longwave = max(longwave, math.sqrt(h) * float(np.linalg.norm(values / h - sampled)))
            ref_err = max(ref_err, math.hypot(
                _diff_norm(ref.psi.values, ref_half.psi.values, fine.h),
                _diff_norm(ref.phi.values, ref_half.phi.values, fine.h),
            ))
    except NumericalAbort as exc:
        if isinstance(exc, ReferenceUnderResolved):
            raise
        raise NumericalAbort(f"h={h}: {exc}") from exc
    if ref_err > _ROUNDOFF and REFERENCE_MARGIN * ref_err > combined:
        raise ReferenceUnderResolved(
            f"h={h}: reference error {ref_err:.3g} is not {REFERENCE_MARGIN:g}x below "
            f"the lattice error {combined:.3g}; decrease dt_ref"
        )
    seconds = time.perf_counter() - start if cfg.record_timing else 0.0
    return ConvergenceRow(h, err_psi, err_phi, longwave, ref_err, seconds, combined, trunc)


def _shared_reference(cfg: ExperimentConfig):
    psi0, phi0 = initial_data(cfg)
    ts = snapshot_times(cfg)
    return list(_reference_arrays(CoupledState(psi0, phi0), cfg, ts))


def run_convergence_study(cfg: ExperimentConfig, jobs: int = 1) -> ConvergenceReport:
    """Lattice-vs-continuum errors for every ``h`` in ``cfg.h_list``.

    Independent ``h`` jobs run in up to ``jobs`` worker processes; the report
    does not depend on ``jobs``.
    """
    shared = _shared_reference(cfg) if cfg.fast_reference else None
    hs = list(cfg.h_list)
    if jobs > 1 and len(hs) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(hs))) as pool:
            rows = list(pool.map(_convergence_row, [cfg] * len(hs), hs, [shared] * len(hs)))
    else:
        rows = [_convergence_row(cfg, h, shared) for h in hs]
    meta = {"config": cfg.to_mapping()}
    return ConvergenceReport(rows, cfg.config_hash(), meta)


# ----------------------------------------------------------------------------
# Reports


def emit_table(columns: list[str], rows: list[dict], meta: dict, fmt: str, path: str | Path) -> Path:
    """Write rows as CSV (header + rows) or JSON (``schema_version``, ``columns``, ``rows``, ``meta``)."""
    if not rows:
        raise ValueError("refusing to write an empty report")
    if fmt == "csv":
        return write_table_csv(path, columns, rows)
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "columns": columns, "rows": rows, "meta": meta}
        return write_text(path, dump_json(doc))
    raise ValueError(f"format must be csv or json, got {fmt!r}")


def emit_report(report: ConvergenceReport, fmt: str, path: str | Path) -> Path:
    rows = [{c: getattr(r, c) for c in COLUMNS} for r in report.rows]
    meta = {"config_hash": report.config_hash, **report.meta}
    return emit_table(COLUMNS, rows, meta, fmt, path)


def read_report(path: str | Path) -> ConvergenceReport:
    path = Path(path)
    if path.suffix == ".json":
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise HarnessIOError(f"cannot read {path}: {exc}") from exc
        raw_rows, meta = doc["rows"], doc.get("meta", {})
    else:
        _, raw_rows = read_table_csv(path)
        meta = {}
    rows = [ConvergenceRow(**{c: float(r[c]) for c in COLUMNS}) for r in raw_rows]
    meta = dict(meta)
    config_hash = meta.pop("config_hash", "")
    return ConvergenceReport(rows, config_hash, meta)


# ----------------------------------------------------------------------------
# Single run


def _run_dir(cfg: ExperimentConfig, h: float) -> Path:
    return Path(cfg.output_dir) / f"single_h{h!r}"


def _dense_taus(horizon: float, spacing: float, symmetric: bool) -> np.ndarray:
    n = max(1, int(math.ceil(horizon / spacing - 1e-9)))
    if symmetric:
        return np.linspace(-horizon, horizon, 2 * n + 1)
    return np.linspace(0.0, horizon, n + 1)


def _linear_check(cfg, h, series: SnapshotSeries, smoothed: CoupledState) -> dict:
    """Compare psi^h with the free Schroedinger flow of the smoothed data."""
    fine = smoothed.grid
    xi = fine.wavenumbers
    psi_hat = np.fft.fft(smoothed.psi.values)
    # dispersion mismatch 4 sin^2(h xi / 2)/h^2 - xi^2 ~ -h^2 xi^4 / 12
    mismatch = float(np.sqrt(fine.h / fine.m * np.sum(np.abs(xi**4 * psi_hat / 12) ** 2)))
    worst, bound = 0.0, 0.0
    for tau, values in series:
        t = h**2 * tau
        free = nls_linear_step(smoothed, t).psi.values
        psi_h = reconstruct(LatticeField(series.grid, values), tau, "low", fine).values
        worst = max(worst, _diff_norm(psi_h, free, fine.h))
        bound = max(bound, abs(t) * h**2 * mismatch)
    return {"linear_free_error": worst, "linear_free_bound": bound}


def run_single(cfg: ExperimentConfig, h: float, out_dir: str | Path | None = None) -> Path:
    """Full pipeline at one ``h``; everything lands in a self-describing directory."""
    run_dir = Path(out_dir) if out_dir is not None else _run_dir(cfg, h)
    u0, smoothed, _ = _sampled(cfg, h)
    grid, fine = u0.grid, smoothed.grid
    horizon = cfg.T / h**2
    ts = snapshot_times(cfg)
    params = DnlsParams(cfg.sign, cfg.dt, horizon)
    series = evolve(u0, params, ts / h**2)

    snaps, table = [], []
    masses, energies = series.masses(), series.energies()
    for j, (tau, values) in enumerate(series):
        u = LatticeField(grid, values)
        names = {c: f"fields/{c}_{j:04d}.csv" for c in ("u", "psi", "phi")}
        write_field_csv(run_dir / names["u"], values, grid.h, "u")
        write_field_csv(run_dir / names["psi"], reconstruct(u, tau, "low", fine).values, fine.h, "psi")
        write_field_csv(run_dir / names["phi"], reconstruct(u, tau, "high", fine).values, fine.h, "phi")
        snaps.append({"index": j, "tau": tau, "t": float(ts[j]), "files": names})
        table.append({"index": j, "tau": tau, "t": float(ts[j]), "mass": masses[j], "energy": energies[j]})
    write_table_csv(run_dir / "series.csv", ["index", "tau", "t", "mass", "energy"], table)

    curve = diag.acl_drift_curve(u0, h, cfg.T, cfg.kappas, cfg.sign, cfg.dt, cfg.acl_spacing)
    write_table_csv(
        run_dir / "acl.csv",
        ["kappa", "drift", "measurable"],
        [{"kappa": k, "drift": d, "measurable": int(f)} for k, d, f in zip(curve.kappas, curve.drifts, curve.measurable)],
    )

    dense = stream(u0, params, _dense_taus(horizon, cfg.norm_spacing, True))
    strichartz = diag.strichartz_report(dense, h, cfg.T)
    forward = stream(u0, params, _dense_taus(horizon, diag.nonresonance_stride(), False))
    nonres = diag.nonresonance_integrals(forward, h, fine)

    tails = {"kappa": list(cfg.kappas), "frequency_tail_max": [], "spatial_tail_R": cfg.torus_length / 4}
    spatial = 0.0
    for tau, values in series:
        u = LatticeField(grid, values)
        state = CoupledState(reconstruct(u, tau, "low", fine), reconstruct(u, tau, "high", fine))
        tails["frequency_tail_max"].append([diag.frequency_tail(state, k) for k in cfg.kappas])
        spatial = max(spatial, diag.spatial_tail(state, cfg.torus_length / 4))
    tails["frequency_tail_max"] = np.max(np.array(tails["frequency_tail_max"]), axis=0).tolist()
    tails["spatial_tail_max"] = spatial

    diagnostics = {
        "acl": {"fitted_exponent": curve.fitted_exponent, "floor": curve.floor, "mass0": curve.mass0},
        "strichartz": strichartz,
        "nonresonance": nonres,
        "tails": tails,
        "mass_drift_rel": float(np.max(np.abs(masses - masses[0])) / masses[0]) if masses[0] > 0 else 0.0,
        "energy_drift": float(np.max(np.abs(energies - energies[0]))),
    }
    if cfg.sign == 0:
        diagnostics["linear"] = _linear_check(cfg, h, series, smoothed)
    write_text(run_dir / "diagnostics.json", dump_json(diagnostics))

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_mapping(),
        "config_hash": cfg.config_hash(),
        "h": h,
        "grid": {"m": grid.m, "h": grid.h, "length": grid.length},
        "fine_grid": {"m": fine.m, "h": fine.h},
        "sign": sign_name(cfg.sign),
        "components": ["u", "psi", "phi"],
        "snapshots": snaps,
        "files": ["series.csv", "acl.csv", "diagnostics.json"],
    }
    write_text(run_dir / "manifest.json", dump_json(manifest))
    return run_dir


def load_run(run_dir: str | Path) -> tuple[ExperimentConfig, float, SnapshotSeries]:
    """Rebuild the config and lattice snapshot series of a run directory."""
    run_dir = Path(run_dir)
    try:
        manifest = json.loads((run_dir / "manifest.json").read_text())
    except OSError as exc:
        raise HarnessIOError(f"cannot read {run_dir / 'manifest.json'}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise HarnessIOError(f"malformed manifest in {run_dir}: {exc}") from exc
    cfg = ExperimentConfig.from_mapping(manifest["config"])
    h = float(manifest["h"])
    grid = TorusGrid(manifest["grid"]["m"], manifest["grid"]["h"])
    taus, states = [], []
    for snap in manifest["snapshots"]:
        values, _ = read_field_csv(run_dir / snap["files"]["u"])
        taus.append(snap["tau"])
        states.append(values)
    params = DnlsParams(cfg.sign, cfg.dt, cfg.T / h**2)
    return cfg, h, SnapshotSeries(grid, np.array(taus), np.array(states), params)


# ----------------------------------------------------------------------------
# Other sweeps, as flat rows


def acl_rows(cfg: ExperimentConfig, h: float, kappas=None) -> tuple[list[dict], diag.DriftCurve]:
    u0, _, _ = _sampled(cfg, h)
    curve = diag.acl_drift_curve(
        u0, h, cfg.T, kappas if kappas is not None else cfg.kappas, cfg.sign, cfg.dt, cfg.acl_spacing
    )
    rows = [
        {"kappa": k, "drift": d, "measurable": int(f)}
        for k, d, f in zip(curve.kappas, curve.drifts, curve.measurable)
    ]
    return rows, curve


def _nonres_row(cfg: ExperimentConfig, h: float) -> dict:
    u0, smoothed, _ = _sampled(cfg, h)
    horizon = cfg.T / h**2
    forward = stream(u0, DnlsParams(cfg.sign, cfg.dt, horizon), _dense_taus(horizon, diag.nonresonance_stride(), False))
    return {"h": h, **diag.nonresonance_integrals(forward, h, smoothed.grid)}


def nonresonance_rows(cfg: ExperimentConfig, jobs: int = 1) -> list[dict]:
    hs = list(cfg.h_list)
    if jobs > 1 and len(hs) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(hs))) as pool:
            return list(pool.map(_nonres_row, [cfg] * len(hs), hs))
    return [_nonres_row(cfg, h) for h in hs]


def bilinear_rows(K, L_list, trials, seed, window=50.0, m=4096) -> tuple[list[dict], diag.BilinearSweep]:
    sweep = diag.bilinear_sweep(K, L_list, trials, window, seed, m)
    rows = [
        {"K": r.K, "L": r.L, "median_lhs": r.median_lhs, "median_ratio": r.median_ratio, "max_ratio": r.max_ratio}
        for r in sweep.records
    ]
    return rows, sweep
