"""Dispersion relation, free semigroup, exact resonance functions, and
modulation regions for the odd-order dispersive equation

    u_t + (-1)^{j+1} d_x^{2j+1} u + (1/2) d_x(u^2) = 0.

The semigroup multiplier is exp(i t p(k)) with p(k) = (-1)^{j+1} k^{2j+1}.
The modulation of a space-time frequency is measured against the same
signed phase, sigma = tau - p(k), so free solutions sit at sigma = 0.

Resonance functions are evaluated in exact integer arithmetic on the
index lattice m (k = m/lam); k^{2j+1} overflows 64-bit floats and ints
long before the mode ranges used here run out.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable

import numpy as np

from .reporting import ExperimentReport
from .torus import SpectralField


class Region(Enum):
    """Modulation regions partitioning {(tau, k) : |k| >= 1/lam}, plus k = 0."""

    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    D4 = "D4"
    D5 = "D5"
    ZERO_MODE = "ZeroMode"


@dataclass(frozen=True)
class DispersionModel:
    """Equation order parameter j (order 2j+1) and torus scale lam."""

    j: int
    lam: float = 1.0

    def __post_init__(self) -> None:
        if self.j < 1:
            raise ValueError(f"j must be a positive integer, got {self.j}")
        if self.j == 1:
            warnings.warn(
                "j = 1 is the classical KdV sanity mode; the well/ill-posedness "
                "thresholds implemented here assume j >= 2",
                stacklevel=2,
            )
        if self.lam < 1:
            raise ValueError(f"lam must be >= 1, got {self.lam}")

    @property
    def order(self) -> int:
        return 2 * self.j + 1

    @property
    def sign(self) -> int:
        return -1 if self.j % 2 == 0 else 1  # (-1)^(j+1)

    def phase(self, k):
        """Semigroup phase speed p(k) = (-1)^{j+1} k^{2j+1}."""
        k = np.asarray(k, dtype=np.float64)
        p = self.sign * k**self.order
        return p if p.ndim else float(p)

    def sigma(self, k, tau):
        """Modulation tau - p(k)."""
        return np.asarray(tau, dtype=np.float64) - self.phase(k)


@dataclass(frozen=True)
class ModulationPoint:
    """A space-time frequency with its modulation, sigma recomputed on demand."""

    model: DispersionModel
    k: float
    tau: float

    @property
    def sigma(self) -> float:
        return float(self.tau - self.model.phase(self.k))


def free_evolve(model: DispersionModel, u0: SpectralField, t: float) -> SpectralField:
    """Apply the free propagator: coeff(k) -> exp(i t p(k)) coeff(k)."""
    if u0.grid.lam != model.lam:
        raise ValueError(
            f"grid lam {u0.grid.lam} does not match model lam {model.lam}"
        )
    multiplier = np.exp(1j * t * model.phase(u0.grid.k_values))
    return SpectralField(u0.grid, u0.coeffs * multiplier)


def integer_power_sum_gap(j: int, m1: int, m2: int) -> int:
    """Exact m^{2j+1} - m1^{2j+1} - m2^{2j+1} with m = m1 + m2 (index-lattice units)."""
    n = 2 * j + 1
    return (m1 + m2) ** n - m1**n - m2**n


def resonance_q0(model: DispersionModel, m1: int, m2: int):
    """Exact q0 = k1^{2j+1} + k2^{2j+1} - (k1+k2)^{2j+1} for k_i = m_i/lam.

    Integer for lam = 1, exact Fraction otherwise (lam must then be integral).
    """
    q = -integer_power_sum_gap(model.j, m1, m2)
    return _scale_exact(model, q)


def resonance_q1_q2(model: DispersionModel, m1: int, m2: int, m3: int):
    """Exact (q1, q2) for the frequency triple, k = k1 + k2 + k3 implied.

    q1 = k1^n + k2^n + k3^n - k^n,  q2 = k1^n + (k2+k3)^n - k^n,  n = 2j+1.
    """
    n = model.order
    m = m1 + m2 + m3
    q1 = m1**n + m2**n + m3**n - m**n
    q2 = m1**n + (m2 + m3) ** n - m**n
    return _scale_exact(model, q1), _scale_exact(model, q2)


def _scale_exact(model: DispersionModel, q: int):
    if model.lam == 1:
        return q
    lam = Fraction(model.lam).limit_denominator(10**6)
    return Fraction(q, 1) / lam**model.order


def phase_mismatch(model: DispersionModel, q_exact) -> float:
    """Float phase mismatch omega = p(k1)+..-p(k) = (-1)^{j+1} q for the exact q."""
    return model.sign * float(q_exact)


def audit_resonance_bound(model: DispersionModel, kmax: int) -> ExperimentReport:
    """Exhaustively check |k^{2j+1}-k1^{2j+1}-k2^{2j+1}| >= (2j+1)|k k1^j k2^j|.

    Runs over every integer pair 1 <= |m1|, |m2| <= kmax with m1 + m2 != 0,
    entirely in exact integer arithmetic.  Records the minimal LHS/RHS ratio
    and any violating witness (none is expected; a violation would signal an
    implementation bug, since the bound is a proved identity consequence).
    """
    if kmax < 1:
        raise ValueError(f"kmax must be >= 1, got {kmax}")
    j, n = model.j, model.order
    pow_n = {m: m**n for m in range(-2 * kmax, 2 * kmax + 1)}
    pow_j = {m: m**j for m in range(-kmax, kmax + 1)}
    pairs_checked = 0
    violations: list[tuple[int, int]] = []
    min_num, min_den = None, None  # running min of LHS/RHS as exact pair
    argmin = None
    rng1 = [m for m in range(-kmax, kmax + 1) if m != 0]
    for m1 in rng1:
        p1 = pow_n[m1]
        jf1 = abs(pow_j[m1])
        for m2 in rng1:
            m = m1 + m2
            if m == 0:
                continue
            pairs_checked += 1
            lhs = abs(pow_n[m] - p1 - pow_n[m2])
            rhs = n * abs(m) * jf1 * abs(pow_j[m2])
            if lhs < rhs:
                violations.append((m1, m2))
            if min_num is None or lhs * min_den < min_num * rhs:
                min_num, min_den = lhs, rhs
                argmin = (m1, m2)
    min_ratio = float(Fraction(min_num, min_den)) if min_den else float("nan")
    return ExperimentReport(
        kind="resonance-audit",
        inputs={"j": j, "lam": model.lam, "kmax": kmax},
        rows=[
            {
                "j": j,
                "kmax": kmax,
                "pairs_checked": pairs_checked,
                "violations": len(violations),
                "min_ratio": min_ratio,
            }
        ],
        summary={
            "pairs_checked": pairs_checked,
            "violations": len(violations),
            "min_ratio": min_ratio,
            "min_ratio_pair": list(argmin) if argmin else None,
            "witnesses": [list(v) for v in violations[:16]],
        },
        passed=not violations,
    )


def classify_region(model: DispersionModel, k: float, tau: float) -> Region:
    """Assign the unique modulation region label of a space-time frequency.

    Boundaries are inclusive toward the lower-indexed region, and |k| = 1
    (covered by both groups of defining inequalities) is assigned to D1-D3.
    """
    if k == 0:
        return Region.ZERO_MODE
    abs_k = abs(k)
    abs_sigma = abs(tau - model.phase(k))
    n = model.order
    inner = (2.0 * n / 3.0) * abs_k ** (n - 1)
    outer = 2.0 * n * abs_k**n
    if abs_k >= 1.0:
        if abs_sigma <= inner:
            return Region.D1
        if abs_sigma <= outer:
            return Region.D2
        return Region.D3
    return Region.D4 if abs_sigma > outer else Region.D5


def classify_region_arrays(
    model: DispersionModel, k: np.ndarray, sigma: np.ndarray
) -> np.ndarray:
    """Vectorized region labels (object array of Region) from k and sigma arrays."""
    k = np.asarray(k, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    n = model.order
    abs_k = np.abs(k)
    abs_s = np.abs(sigma)
    inner = (2.0 * n / 3.0) * abs_k ** (n - 1)
    outer = 2.0 * n * abs_k**n
    out = np.empty(k.shape, dtype=object)
    big = abs_k >= 1.0
    out[big & (abs_s <= inner)] = Region.D1
    out[big & (abs_s > inner) & (abs_s <= outer)] = Region.D2
    out[big & (abs_s > outer)] = Region.D3
    out[~big & (abs_s > outer)] = Region.D4
    out[~big & (abs_s <= outer)] = Region.D5
    out[k == 0] = Region.ZERO_MODE
    return out


def region_masks(
    model: DispersionModel, k: np.ndarray, sigma: np.ndarray
) -> dict[Region, np.ndarray]:
    """Boolean masks per region for flat (k, sigma) arrays."""
    labels = classify_region_arrays(model, k, sigma)
    return {r: labels == r for r in Region}


def enumerate_vanishing_q0(model: DispersionModel, kmax: int) -> Iterable[tuple[int, int]]:
    """All integer pairs with m1, m2, m1+m2 nonzero and q0 = 0 (expected empty)."""
    n = model.order
    for m1 in range(-kmax, kmax + 1):
        if m1 == 0:
            continue
        for m2 in range(-kmax, kmax + 1):
            if m2 == 0 or m1 + m2 == 0:
                continue
            if m1**n + m2**n - (m1 + m2) ** n == 0:
                yield (m1, m2)
