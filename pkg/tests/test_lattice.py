import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lattice_nls import (
    CutoffSpec,
    DnlsParams,
    LatticeField,
    NumericalAbort,
    SnapshotSeries,
    TorusGrid,
    energy,
    evolve,
    linear_propagate,
    mass,
    nonlinear_propagate,
    strang_step,
    stream,
    truncated_mass,
)
from lattice_nls.lattice import as_sign, dispersion

from conftest import random_complex

seeds = st.integers(0, 2**32 - 1)
G64 = TorusGrid(64, 1.0)


def rand_field(seed, m=64, scale=0.3):
    return LatticeField(TorusGrid(m, 1.0), random_complex(np.random.default_rng(seed), m, scale))


def plane_wave(grid, k, amp):
    theta0 = 2 * np.pi * k / grid.m
    return theta0, LatticeField(grid, amp * np.exp(1j * theta0 * grid.sites))


def test_sign_parsing():
    assert as_sign("defocusing") == 1 and as_sign("focusing") == -1 and as_sign("linear") == 0
    assert as_sign(-1) == -1
    with pytest.raises(ValueError):
        as_sign("sideways")
    with pytest.raises(ValueError):
        as_sign(2)


def test_params_validation():
    with pytest.raises(ValueError):
        DnlsParams(dt=0.0)
    with pytest.raises(ValueError):
        DnlsParams(dt=0.6)
    assert DnlsParams(sign="focusing").sign == -1


# --- linear flow -------------------------------------------------------------


def test_linear_identity_and_plane_wave():
    u = rand_field(1)
    assert np.array_equal(linear_propagate(u, 0.0).values, np.fft.ifft(np.fft.fft(u.values)))
    theta0, w = plane_wave(G64, 5, 1.0)
    tau = 3.7
    expected = np.exp(1j * (theta0 * G64.sites - 4 * np.sin(theta0 / 2) ** 2 * tau))
    assert np.allclose(linear_propagate(w, tau).values, expected, atol=1e-13)


@given(seeds)
def test_linear_unitary(seed):
    u = rand_field(seed)
    assert np.linalg.norm(linear_propagate(u, 5.3).values) == pytest.approx(np.linalg.norm(u.values), rel=1e-13)


def test_dispersion_symbol():
    th = np.linspace(-np.pi, np.pi, 9)
    assert np.allclose(dispersion(th), -(2 * np.cos(th) - 2))


# --- nonlinear flow ----------------------------------------------------------


def test_nonlinear_examples():
    g = TorusGrid(1, 1.0)
    one = LatticeField(g, [1.0])
    assert nonlinear_propagate(one, np.pi, 1).values[0] == pytest.approx(1.0, abs=1e-14)
    u = rand_field(2)
    assert np.array_equal(nonlinear_propagate(u, 0.0, 1).values, u.values)


@given(seeds, st.floats(-10, 10), st.sampled_from([1, -1]))
def test_nonlinear_preserves_modulus(seed, tau, sign):
    u = rand_field(seed, scale=2.0)
    out = nonlinear_propagate(u, tau, sign).values
    assert np.allclose(np.abs(out), np.abs(u.values), rtol=1e-15, atol=1e-15)


# --- Strang step and evolve --------------------------------------------------


def test_strang_zero_field():
    z = LatticeField.zeros(G64)
    assert np.all(strang_step(z, 0.1, 1).values == 0)
    with pytest.raises(ValueError):
        strang_step(z, 0.0, 1)


@pytest.mark.parametrize("sign", [1, -1])
def test_strang_plane_wave_exact(sign):
    amp, dt = 0.6, 0.05
    theta0, w = plane_wave(G64, 7, amp)
    omega = 4 * np.sin(theta0 / 2) ** 2 + sign * 2 * amp**2
    got = strang_step(w, dt, sign).values
    expected = amp * np.exp(1j * (theta0 * G64.sites - omega * dt))
    assert np.max(np.abs(got - expected)) < 1e-12


# the focusing plane wave is modulationally unstable: roundoff grows like
# e^{0.4 tau} here, so its horizon is kept short
@pytest.mark.parametrize("sign, horizon", [(1, 400.0), (-1, 10.0)])
def test_evolve_plane_wave_closed_form(sign, horizon):
    amp = 0.4
    theta0, w = plane_wave(G64, 3, amp)
    omega = 4 * np.sin(theta0 / 2) ** 2 + sign * 2 * amp**2
    taus = np.array([-7.3, 0.0, 2.01, horizon])
    series = evolve(w, DnlsParams(sign, 0.05, horizon), taus)
    for tau, values in series:
        expected = amp * np.exp(1j * (theta0 * G64.sites - omega * tau))
        assert np.max(np.abs(values - expected)) < 1e-10


def two_mode(grid):
    n = grid.sites
    return LatticeField(grid, 0.5 * np.exp(2j * np.pi * 3 * n / grid.m) + 0.4 * np.exp(-2j * np.pi * 9 * n / grid.m + 0.3j))


def test_strang_second_order():
    u0 = two_mode(G64)
    horizon = 5.0
    ref = evolve(u0, DnlsParams(1, 1e-4, horizon), [horizon]).states[-1]
    errs = [np.linalg.norm(evolve(u0, DnlsParams(1, dt, horizon), [horizon]).states[-1] - ref) for dt in (0.1, 0.05)]
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_energy_drift_second_order():
    u0 = two_mode(G64)
    taus = np.linspace(0, 20, 21)
    e0 = energy(u0, 1)
    drifts = [np.max(np.abs(evolve(u0, DnlsParams(1, dt, 20), taus).energies() - e0)) for dt in (0.1, 0.05)]
    assert 3.5 <= drifts[0] / drifts[1] <= 4.5


def test_evolve_zero_data():
    series = evolve(LatticeField.zeros(G64), DnlsParams(1, 0.05, 3), [0, 1, 3])
    assert np.all(series.states == 0)


@given(seeds)
def test_mass_conserved_long_run(seed):
    u0 = rand_field(seed, scale=0.5)
    series = evolve(u0, DnlsParams(1, 0.05, 100), [50.0, 100.0])
    m0 = mass(u0)
    assert np.max(np.abs(series.masses() - m0)) <= 1e-11 * m0


def test_time_reversibility():
    u0 = rand_field(3)
    fwd = evolve(u0, DnlsParams(1, 0.05, 20), [20.0])[0]
    back = evolve(fwd, DnlsParams(1, 0.05, 20), [-20.0])[0]
    assert np.max(np.abs(back.values - u0.values)) < 1e-9


@given(seeds, st.floats(0, 2 * np.pi))
def test_gauge_covariance(seed, alpha):
    u0 = rand_field(seed)
    rot = LatticeField(u0.grid, np.exp(1j * alpha) * u0.values)
    params = DnlsParams(-1, 0.05, 5)
    a = evolve(rot, params, [5.0]).states[-1]
    b = np.exp(1j * alpha) * evolve(u0, params, [5.0]).states[-1]
    assert np.max(np.abs(a - b)) < 1e-12


def test_evolve_hits_snapshots_exactly():
    u0 = rand_field(4)
    params = DnlsParams(1, 0.05, 1.0)
    series = evolve(u0, params, [0.0, 0.123, 1.0])
    assert series.taus.tolist() == [0.0, 0.123, 1.0]
    assert np.array_equal(series[0].values, u0.values)
    manual = strang_step(strang_step(u0, 0.05, 1), 0.05, 1)
    manual = strang_step(manual, 0.023, 1)
    assert np.allclose(series[1].values, manual.values, atol=1e-14)


def test_evolve_rejects_snapshots_past_horizon():
    with pytest.raises(ValueError):
        evolve(rand_field(0), DnlsParams(1, 0.05, 1.0), [2.0])


def test_stream_matches_evolve():
    u0 = rand_field(8)
    params = DnlsParams(1, 0.05, 3.0)
    taus = [-3.0, -1.0, 0.5, 3.0]
    streamed = list(stream(u0, params, taus))
    stored = evolve(u0, params, taus)
    for (t1, v1), (t2, v2) in zip(streamed, stored):
        assert t1 == t2 and np.array_equal(v1, v2)


def test_nan_aborts():
    g = TorusGrid(8, 1.0)
    huge = LatticeField(g, np.full(8, 1e160))
    with np.errstate(all="ignore"), pytest.raises(NumericalAbort):
        evolve(huge, DnlsParams(1, 0.05, 1.0), [1.0])


def test_snapshot_series_invariants():
    with pytest.raises(ValueError):
        SnapshotSeries(G64, np.array([1.0, 0.0]), np.zeros((2, 64)), DnlsParams())
    with pytest.raises(ValueError):
        SnapshotSeries(G64, np.array([0.0]), np.zeros((1, 32)), DnlsParams())


# --- functionals -------------------------------------------------------------


def test_mass_and_energy_examples():
    delta = LatticeField(TorusGrid(8, 1.0), np.eye(8)[0])
    assert mass(LatticeField.zeros(G64)) == 0
    assert mass(delta) == 1
    assert energy(LatticeField.zeros(G64), 1) == 0
    assert energy(delta, "defocusing") == 3
    assert energy(delta, "focusing") == 1


@given(seeds)
def test_mass_plancherel(seed):
    u = rand_field(seed)
    assert mass(u) == pytest.approx(np.sum(np.abs(np.fft.fft(u.values)) ** 2) / 64, rel=1e-12)


def test_single_site_data_conserves_mass_and_energy():
    h = 0.1
    g = TorusGrid(512, h)
    u0 = LatticeField(g, np.sqrt(h) * np.eye(512)[0])  # mass h
    series = evolve(u0, DnlsParams(1, 0.05, 100), np.linspace(0, 100, 11))
    assert np.max(np.abs(series.masses() - h)) <= 1e-11 * h
    # energy is conserved up to the O(dt^2) splitting error; tiny mass keeps it small
    e = series.energies()
    assert np.max(np.abs(e - e[0])) <= 1e-11 + 1e-3 * e[0]


def test_truncated_mass_examples():
    u = rand_field(9)
    assert truncated_mass(u, CutoffSpec(1.0)) == pytest.approx(mass(u), rel=1e-13)
    g = TorusGrid(64, 1.0)
    quarter = LatticeField(g, np.exp(1j * np.pi / 2 * g.sites))
    assert truncated_mass(quarter, CutoffSpec(0.99)) == pytest.approx(0, abs=1e-20)


@given(seeds, st.floats(0.05, 0.99))
def test_truncated_mass_partition(seed, lam):
    u = rand_field(seed)
    inside = truncated_mass(u, CutoffSpec(lam))
    outside = mass(u) - inside
    from lattice_nls import dft, idft, sharp_cutoff

    out = idft(sharp_cutoff(dft(u), CutoffSpec(lam), "outside"))
    assert inside + mass(out) == pytest.approx(mass(u), rel=1e-12)
    assert outside == pytest.approx(mass(out), abs=1e-12 * mass(u))
