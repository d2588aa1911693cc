"""Shared test-field builders."""

from __future__ import annotations

import numpy as np

from hokdv.torus import SpectralField, TorusGrid


def random_band_limited(
    grid: TorusGrid, rng: np.random.Generator, max_mode: int, real: bool = True
) -> SpectralField:
    """Random field supported on |m| <= max_mode (conjugate symmetric if real)."""
    amps: dict[int, complex] = {}
    for m in range(1, max_mode + 1):
        a = rng.normal() + 1j * rng.normal()
        amps[m] = a
        amps[-m] = np.conj(a) if real else rng.normal() + 1j * rng.normal()
    if not real:
        amps[0] = 0.0
    return SpectralField.from_modes(grid, amps)


def random_spacetime_coeffs(
    rng: np.random.Generator, modes: int, t_modes: int
) -> np.ndarray:
    return rng.normal(size=(modes, t_modes)) + 1j * rng.normal(size=(modes, t_modes))
