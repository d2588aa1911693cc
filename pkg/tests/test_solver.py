"""Time integration, conserved quantities, the cutoff Duhamel map, the
contraction measurement, and the scaling symmetry."""

import numpy as np
import pytest

from hokdv.dispersion import DispersionModel, free_evolve
from hokdv.iterates import second_iterate_closed
from hokdv.norms import NormSpec, smooth_bump_window, sobolev_norm
from hokdv.solver import (
    BlowUpError,
    ContractionTrace,
    SolverConfig,
    conserved_quantities,
    contraction_experiment,
    duhamel_map,
    integrate,
    scale_time_factor,
    scale_transform,
)
from hokdv.torus import SpectralField, TorusGrid

from helpers import random_band_limited


def smooth_data(grid, scale=0.05, decay=1.5, max_mode=6, seed=7):
    rng = np.random.default_rng(seed)
    amps = {}
    for m in range(1, max_mode + 1):
        a = scale * (rng.normal() + 1j * rng.normal()) * np.exp(-decay * m)
        amps[m] = a
        amps[-m] = np.conj(a)
    return SpectralField.from_modes(grid, amps)


@pytest.mark.parametrize("scheme", ["ifrk4", "etdrk4"])
def test_linear_integration_is_exact(scheme):
    grid = TorusGrid(1.0, 256)
    model = DispersionModel(2, 1.0)
    u0 = smooth_data(grid)
    cfg = SolverConfig(dt=0.02, T=1.0, nonlinear=False, scheme=scheme, frame_stride=10)
    _, frames = integrate(model, u0, cfg)
    exact = free_evolve(model, u0, 1.0)
    assert np.max(np.abs(frames[-1].coeffs - exact.coeffs)) < 1e-10


@pytest.mark.parametrize("j", [2, 3])
def test_invariants_over_unit_time(j):
    grid = TorusGrid(1.0, 256)
    model = DispersionModel(j, 1.0)
    u0 = smooth_data(grid)
    cfg = SolverConfig(dt=5e-4, T=1.0, frame_stride=200)
    _, frames = integrate(model, u0, cfg)
    mean0, l20 = conserved_quantities(frames[0])
    for frame in frames:
        mean, l2 = conserved_quantities(frame)
        assert abs(mean - mean0) < 1e-12
        assert abs(l2 - l20) / l20 < 1e-8


def test_temporal_convergence_order():
    grid = TorusGrid(1.0, 64)
    model = DispersionModel(2, 1.0)
    u0 = smooth_data(grid, scale=0.2, decay=1.0, max_mode=3)

    def end_state(dt):
        cfg = SolverConfig(dt=dt, T=0.25, frame_stride=10**9)
        return integrate(model, u0, cfg)[1][-1].coeffs

    e1 = np.max(np.abs(end_state(0.002) - end_state(0.001)))
    e2 = np.max(np.abs(end_state(0.001) - end_state(0.0005)))
    assert e1 / e2 >= 2**3.8


def test_blow_up_detection():
    grid = TorusGrid(1.0, 64)
    model = DispersionModel(2, 1.0)
    u0 = smooth_data(grid, scale=40.0, decay=0.3, max_mode=8)
    cfg = SolverConfig(dt=0.05, T=2.0, frame_stride=1)
    with pytest.raises(BlowUpError) as info:
        integrate(model, u0, cfg)
    assert info.value.ratio > 10


def test_mean_zero_requirement():
    grid = TorusGrid(1.0, 32)
    model = DispersionModel(2, 1.0)
    u0 = SpectralField.from_modes(grid, {0: 1.0, 1: 0.1, -1: 0.1})
    with pytest.raises(ValueError):
        integrate(model, u0, SolverConfig(dt=0.01, T=0.1))


def test_conserved_quantities_of_named_fields():
    grid = TorusGrid(1.0, 32)
    constant = SpectralField.from_modes(grid, {0: 2.0 * np.pi * 1.7})  # f(x) = 1.7
    mean, l2 = conserved_quantities(constant)
    assert mean == pytest.approx(1.7)
    assert l2 == pytest.approx(1.7 * np.sqrt(2 * np.pi))
    from hokdv.iterates import phi_n_data

    two_mode = phi_n_data(4, -1.0, grid)
    mean2, l22 = conserved_quantities(two_mode)
    assert mean2 == 0.0
    # Parseval: integral |u|^2 = (1/(2 pi)) * (1/lam) sum |coeff|^2
    assert l22 == pytest.approx(np.sqrt(2 * 16.0 / (2 * np.pi)))


# -- Duhamel map ------------------------------------------------------------------


def frame_times(n_frames=2801, span=2.2):
    half = n_frames // 2
    dt = span / half
    return dt * np.arange(-half, half + 1)


def test_duhamel_of_zero_is_windowed_free_flow():
    grid = TorusGrid(1.0, 16)
    model = DispersionModel(2, 1.0)
    phi = SpectralField.from_modes(grid, {1: 0.05, -1: 0.05})
    times = frame_times(301)
    eta = smooth_bump_window()
    zero = [SpectralField.zero(grid) for _ in times]
    out = duhamel_map(model, phi, zero, times)
    for idx in (0, 60, 150, 222, 300):
        expect = eta(times[idx]) * free_evolve(model, phi, times[idx]).coeffs
        assert np.max(np.abs(out[idx].coeffs - expect)) < 1e-14


def test_duhamel_picard_two_matches_closed_second_iterate():
    """One application of the map to the free flow must reproduce
    u1 - (1/2) A2 on the window core."""
    grid = TorusGrid(1.0, 16)
    model = DispersionModel(2, 1.0)
    phi = SpectralField.from_modes(grid, {1: 0.05 * np.pi, -1: 0.05 * np.pi})
    times = frame_times(2801)
    eta = smooth_bump_window()
    eta_t = eta(times)
    u1 = [
        SpectralField(grid, eta_t[i] * free_evolve(model, phi, t).coeffs)
        for i, t in enumerate(times)
    ]
    out = duhamel_map(model, phi, u1, times)
    worst = 0.0
    for idx in range(0, len(times), 137):
        t = times[idx]
        if not 0.0 <= t <= 1.0:
            continue
        expect = (
            free_evolve(model, phi, t).coeffs
            - 0.5 * second_iterate_closed(model, phi, t).field.coeffs
        )
        worst = max(worst, np.max(np.abs(out[idx].coeffs - expect)))
    assert worst < 1e-8


def test_fixed_point_residual_of_converged_iteration():
    grid = TorusGrid(1.0, 16)
    model = DispersionModel(2, 1.0)
    phi = SpectralField.from_modes(grid, {1: 0.01 * np.pi, -1: 0.01 * np.pi})
    times = frame_times(301)
    eta = smooth_bump_window()
    eta_t = eta(times)
    current = [
        SpectralField(grid, eta_t[i] * free_evolve(model, phi, t).coeffs)
        for i, t in enumerate(times)
    ]
    for _ in range(8):
        current = duhamel_map(model, phi, current, times)
    again = duhamel_map(model, phi, current, times)
    residual = max(
        np.max(np.abs(a.coeffs - b.coeffs)) for a, b in zip(again, current)
    )
    scale = max(np.max(np.abs(f.coeffs)) for f in current)
    assert residual < 1e-8 * scale


# -- contraction -------------------------------------------------------------------


def test_contraction_factor_small_data():
    grid = TorusGrid(1.0, 16)
    model = DispersionModel(2, 1.0)
    phi = SpectralField.from_modes(grid, {1: 0.01 * np.pi, -1: 0.01 * np.pi})
    trace = contraction_experiment(model, phi, -1.5, max_iter=8, n_frames=301)
    assert trace.converged
    assert trace.factor < 0.5


def test_contraction_zero_data_converges_immediately():
    grid = TorusGrid(1.0, 16)
    model = DispersionModel(2, 1.0)
    trace = contraction_experiment(
        model, SpectralField.zero(grid), -1.5, max_iter=3, n_frames=101
    )
    assert trace.converged
    assert all(d == 0 for d in trace.diff_norms)


def test_contraction_factor_scales_linearly_with_amplitude():
    grid = TorusGrid(1.0, 16)
    model = DispersionModel(2, 1.0)
    amplitudes = [0.005, 0.01, 0.02, 0.04]
    factors = []
    for amp in amplitudes:
        phi = SpectralField.from_modes(grid, {1: amp * np.pi, -1: amp * np.pi})
        trace = contraction_experiment(model, phi, -1.5, max_iter=5, n_frames=301)
        factors.append(trace.factor)
    design = np.vstack([amplitudes, np.ones(4)]).T
    coef, residual, *_ = np.linalg.lstsq(design, np.array(factors), rcond=None)
    total = np.sum((np.array(factors) - np.mean(factors)) ** 2)
    r_squared = 1.0 - (residual[0] / total if len(residual) else 0.0)
    assert r_squared > 0.99


def test_contraction_diverges_for_large_data():
    grid = TorusGrid(1.0, 16)
    model = DispersionModel(2, 1.0)
    phi = SpectralField.from_modes(grid, {1: 10 * np.pi, -1: 10 * np.pi})
    trace = contraction_experiment(model, phi, -1.5, max_iter=8, n_frames=101)
    assert trace.diverged or trace.factor >= 1.0


# -- scaling ------------------------------------------------------------------------


def test_scale_transform_identity():
    grid = TorusGrid(1.0, 32)
    model = DispersionModel(2, 1.0)
    u0 = SpectralField.from_modes(grid, {2: 1.0, -2: 1.0})
    out, out_model = scale_transform(model, u0, 1)
    assert out is u0 and out_model is model


def test_scale_transform_rejects_fractional_mu():
    grid = TorusGrid(1.0, 32)
    model = DispersionModel(2, 1.0)
    u0 = SpectralField.from_modes(grid, {2: 1.0})
    with pytest.raises(ValueError):
        scale_transform(model, u0, 1.5)


@pytest.mark.parametrize("mu", [2, 4, 8])
@pytest.mark.parametrize("j,s", [(2, -1.5), (3, -2.5)])
def test_homogeneous_norm_scaling_law_is_exact(mu, j, s):
    grid = TorusGrid(1.0, 64)
    model = DispersionModel(j, 1.0)
    u0 = random_band_limited(grid, np.random.default_rng(21), 12)
    scaled, _ = scale_transform(model, u0, mu)
    ratio = sobolev_norm(scaled, NormSpec(s, homogeneous=True)) / sobolev_norm(
        u0, NormSpec(s, homogeneous=True)
    )
    assert ratio == pytest.approx(float(mu) ** (-2 * j + 0.5 - s), rel=1e-12)


def test_inhomogeneous_norm_scaling_within_five_percent_at_high_frequency():
    grid = TorusGrid(1.0, 256)
    model = DispersionModel(2, 1.0)
    amps = {m: 1.0 for m in range(32, 49)}
    amps.update({-m: 1.0 for m in range(32, 49)})
    u0 = SpectralField.from_modes(grid, amps)
    scaled, _ = scale_transform(model, u0, 2)
    ratio = sobolev_norm(scaled, NormSpec(-1.5)) / sobolev_norm(u0, NormSpec(-1.5))
    assert ratio == pytest.approx(2.0 ** (-2 * 2 + 0.5 + 1.5), rel=0.05)


@pytest.mark.parametrize("mu", [2, 3])
def test_solve_then_scale_commutes_with_scale_then_solve(mu):
    grid = TorusGrid(1.0, 64)
    model = DispersionModel(2, 1.0)
    u0 = smooth_data(grid, scale=0.3, decay=1.0, max_mode=3, seed=5)
    T = 0.1
    factor = scale_time_factor(model, mu)
    scaled0, scaled_model = scale_transform(model, u0, mu)
    _, f_scaled = integrate(
        scaled_model, scaled0, SolverConfig(dt=T / 512, T=T, frame_stride=10**9)
    )
    _, f_orig = integrate(
        model, u0, SolverConfig(dt=(T / factor) / 512, T=T / factor, frame_stride=10**9)
    )
    rescaled_end, _ = scale_transform(model, f_orig[-1], mu)
    diff = np.max(np.abs(f_scaled[-1].coeffs - rescaled_end.coeffs))
    assert diff < 1e-8
