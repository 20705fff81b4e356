"""Steady-state linear response of the doped CROW and EIT transparency windows.

The complex susceptibility of mode k is obtained from the steady state of
the damped spin-wave equations with the photon amplitude as the drive:

    chi_k = -(2 G1 / omega0) <A_k> / <a_k>

The closed real/imaginary expressions are provided separately by
:func:`printed_susceptibility` and serve as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoWindowFound, SingularSteadyState
from .model import ModelParams, dispersion

__all__ = [
    "SusceptibilityPoint",
    "TransparencyWindow",
    "steady_state_ratio",
    "susceptibility",
    "printed_susceptibility",
    "susceptibility_scan_delta",
    "susceptibility_scan_J",
    "find_transparency_window",
]

_TINY = 1e-300


@dataclass(frozen=True)
class SusceptibilityPoint:
    k: float
    delta: float
    chi_r: float
    chi_i: float
    J: float = math.nan
    singular: bool = False


@dataclass(frozen=True)
class TransparencyWindow:
    center: float
    width: float
    residual: float
    left_peak: float
    right_peak: float


def steady_state_ratio(k: float, p: ModelParams) -> complex:
    """Steady-state ratio <A_k>/<a_k> with the photon amplitude held fixed.

    Raises :class:`SingularSteadyState` when the denominator vanishes, which
    needs gamma_A = gamma_C = 0 at an exact resonance.
    """
    omega_k = 2.0 * p.J * math.cos(k * p.ell)
    eps = float(dispersion(k, p))
    two_photon = omega_k + p.delta  # == eps_k
    one_photon = omega_k - p.delta1  # == eps_k - delta2
    tol = 1e-12 * max(1.0, abs(omega_k), abs(p.delta1), abs(p.delta2))
    assert abs(two_photon - eps) <= tol and abs(one_photon - (eps - p.delta2)) <= tol
    G1 = p.G1
    num = 1j * G1 * (1j * two_photon - p.gamma_c)
    den = (1j * one_photon - p.gamma_a) * (1j * two_photon - p.gamma_c) + p.g2**2
    if abs(den) <= _TINY:
        raise SingularSteadyState(
            f"steady state undefined at k={k}: denominator {den} (add damping or detuning)"
        )
    return num / den


def susceptibility(k: float, p: ModelParams) -> SusceptibilityPoint:
    """Complex susceptibility of mode ``k`` from the steady-state ratio."""
    chi = -(2.0 * p.G1 / p.omega0) * steady_state_ratio(k, p)
    return SusceptibilityPoint(float(k), p.delta, chi.real, chi.imag, p.J)


def printed_susceptibility(k, p: ModelParams, real_detuning: str = "delta2"):
    """Closed-form (chi_r, chi_i) written out in real arithmetic.

    ``real_detuning="delta2"`` gives the real part consistent with the
    steady state; ``"delta1"`` reproduces the variant with (eps_k - delta1)
    in the real part, which only agrees when delta1 == delta2.
    Works elementwise on arrays.
    """
    if real_detuning not in ("delta1", "delta2"):
        raise ValueError("real_detuning must be 'delta1' or 'delta2'")
    eps = dispersion(k, p)
    # eps - delta2 formed without cancelling delta2 against itself
    one_photon = 2.0 * p.J * np.cos(np.asarray(k, dtype=float) * p.ell) - p.delta1
    ga, gc, g2 = p.gamma_a, p.gamma_c, p.g2
    F = 2.0 * p.G1**2 / p.omega0
    L = 1.0 / (
        (ga * gc + g2**2 - eps * one_photon) ** 2 + (eps * ga + one_photon * gc) ** 2
    )
    detuned = one_photon if real_detuning == "delta2" else eps - p.delta1
    chi_r = F * (eps * g2**2 - detuned * (gc**2 + eps**2)) * L
    chi_i = F * (eps**2 * ga + (ga * gc + g2**2) * gc) * L
    return chi_r, chi_i


def _safe_point(k, q: ModelParams) -> SusceptibilityPoint:
    try:
        return susceptibility(k, q)
    except SingularSteadyState:
        return SusceptibilityPoint(float(k), q.delta, math.nan, math.nan, q.J, singular=True)


def _check_range(lo, hi, n_points):
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    if not lo < hi:
        raise ValueError(f"scan range must satisfy min < max, got ({lo}, {hi})")


def susceptibility_scan_delta(k: float, p: ModelParams, delta_range, n_points: int) -> list[SusceptibilityPoint]:
    """Scan delta = delta2 - delta1 uniformly by moving delta1 at fixed delta2.

    Singular points come back flagged with ``singular=True`` and NaN values.
    """
    lo, hi = delta_range
    _check_range(lo, hi, n_points)
    return [
        _safe_point(k, p.replace(delta1=p.delta2 - d))
        for d in np.linspace(lo, hi, n_points)
    ]


def susceptibility_scan_J(k: float, p: ModelParams, J_range, n_points: int) -> list[SusceptibilityPoint]:
    """Scan the inter-cavity hopping J at fixed detunings and wavevector."""
    lo, hi = J_range
    _check_range(lo, hi, n_points)
    return [_safe_point(k, p.replace(J=float(J))) for J in np.linspace(lo, hi, n_points)]


def _crossing(x0, y0, x1, y1, level):
    if y1 == y0:
        return x0
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def find_transparency_window(scan, variable: str = "delta") -> TransparencyWindow:
    """Locate the deepest interior dip of chi_i and measure its width.

    The width is the distance between the two points where chi_i crosses
    half the mean of the flanking absorption maxima.  ``variable`` selects
    the scanned axis ("delta" or "J").
    """
    if variable not in ("delta", "J"):
        raise ValueError("variable must be 'delta' or 'J'")
    pts = [s for s in scan if not s.singular]
    if len(pts) < 5:
        raise NoWindowFound(f"need at least 5 regular points, got {len(pts)}")
    x = np.array([getattr(s, variable) for s in pts])
    y = np.array([s.chi_i for s in pts])
    interior = np.flatnonzero((y[1:-1] <= y[:-2]) & (y[1:-1] <= y[2:])) + 1
    best = None
    for i in interior[np.argsort(y[interior], kind="stable")]:
        left = i
        while left > 0 and y[left - 1] >= y[left]:
            left -= 1
        right = i
        while right < len(y) - 1 and y[right + 1] >= y[right]:
            right += 1
        # a maximum sitting on the scan edge is not a resolved absorption peak
        if left == 0 or right == len(y) - 1:
            continue
        level = 0.25 * (y[left] + y[right])
        if y[i] < level:
            best = (i, left, right, level)
            break
    if best is None:
        raise NoWindowFound("chi_i has no interior dip flanked by absorption peaks")
    i, left, right, level = best

    j = i
    while y[j] < level:
        j -= 1
    x_lo = _crossing(x[j], y[j], x[j + 1], y[j + 1], level)
    j = i
    while y[j] < level:
        j += 1
    x_hi = _crossing(x[j - 1], y[j - 1], x[j], y[j], level)

    center, residual = x[i], y[i]
    if 0 < i < len(y) - 1:
        # parabolic vertex through the three lowest samples
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        curv = y0 - 2 * y1 + y2
        if curv > 0:
            shift = 0.5 * (y0 - y2) / curv
            h = x[i + 1] - x[i]
            center = x[i] + shift * h
            residual = max(0.0, y1 - 0.25 * (y0 - y2) * shift)
    return TransparencyWindow(
        center=float(center),
        width=float(x_hi - x_lo),
        residual=float(residual),
        left_peak=float(x[left]),
        right_peak=float(x[right]),
    )
