"""Polariton spectra: eigenvalues, eigenvectors, bands and group velocities.

The eigenvalues of the 3x3 mode matrix come from the trigonometric form of
Cardano's formula.  Near-degenerate spectra fall back to LAPACK.  The
complex-radical form with the cube roots beta_+/beta_- is kept in
:func:`cardano_radical_roots` as an independent cross-check.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BothCouplingsZero, DegenerateRootsWarning
from .model import (
    KGrid,
    ModelParams,
    assemble_mode_matrices,
    assemble_mode_matrix,
    dispersion_slope,
)

__all__ = [
    "PolaritonBranch",
    "BandStructure",
    "eigenvalues_closed_form",
    "cardano_radical_roots",
    "cubic_coefficients",
    "polariton_branch",
    "polariton_branches",
    "closed_form_composition",
    "dark_state_angle",
    "band_structure",
    "group_velocity",
    "finite_difference_velocity",
    "composition_profile",
    "mode_eigensystem",
    "branch_at",
]

DEGENERACY_RTOL = 1e-9
# below this relative gap the arccos step loses ~sqrt(machine eps); the close pair is re-solved by deflation
CLOSE_PAIR_RTOL = 1e-4
# eigenvectors from cross products lose orthogonality below this relative gap
VECTOR_GAP_RTOL = 1e-6
# closed-form polariton coefficients are only compared when lambda stays this far from 0 and eps_k
CLOSED_FORM_RTOL = 1e-3


@dataclass(frozen=True)
class PolaritonBranch:
    """One polariton: eigenvalue and normalised (photon, A, C) weights at wavevector k."""

    branch_index: int
    k: float
    eigenvalue: float
    d1: float
    d2: float
    d3: float

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.d1, self.d2, self.d3])


@dataclass(frozen=True)
class BandStructure:
    """Three continuous polariton bands sampled on a set of wavevectors.

    ``eigenvalues[j, i]`` is branch ``i`` (0-based, ordered by mean energy)
    at ``k[j]``; ``vectors[j, i]`` holds (d1, d2, d3) of that polariton.
    """

    k: np.ndarray
    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def bandwidths(self) -> np.ndarray:
        return self.eigenvalues.max(axis=0) - self.eigenvalues.min(axis=0)

    def branch(self, index: int) -> np.ndarray:
        """Eigenvalues of branch ``index`` (1-based, as in the polariton labels)."""
        return self.eigenvalues[:, index - 1]


def _norm(m: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(m * m, axis=(-2, -1)))


def _det3(a: np.ndarray) -> np.ndarray:
    return (
        a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
        - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
        + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
    )


def _adj_trace(a: np.ndarray) -> np.ndarray:
    # sum of principal 2x2 minors, i.e. -d/dlambda det(a - lambda I)
    return (
        a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1]
        + a[..., 0, 0] * a[..., 2, 2] - a[..., 0, 2] * a[..., 2, 0]
        + a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    )


def _trig_cardano(m: np.ndarray) -> np.ndarray:
    eye = np.eye(3)
    shift = np.trace(m, axis1=-2, axis2=-1) / 3.0
    b = m - shift[..., None, None] * eye
    r = np.sqrt(np.sum(b * b, axis=(-2, -1)) / 6.0)
    safe_r = np.where(r > 0, r, 1.0)
    half_det = _det3(b / safe_r[..., None, None]) / 2.0
    phi = np.arccos(np.clip(half_det, -1.0, 1.0)) / 3.0
    top = shift + 2.0 * r * np.cos(phi)
    bottom = shift + 2.0 * r * np.cos(phi + 2.0 * np.pi / 3.0)
    middle = 3.0 * shift - top - bottom
    lam = np.stack([bottom, middle, top], axis=-1)
    return np.sort(lam, axis=-1)


def _newton_polish(m: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """One guarded Newton step on det(M - lambda I) for each root."""
    eye = np.eye(3)
    out = lam.copy()
    gaps = np.diff(lam, axis=-1)
    sep = np.full(lam.shape, np.inf)
    sep[..., :-1] = gaps
    sep[..., 1:] = np.minimum(sep[..., 1:], gaps)
    for i in range(3):
        a = m - lam[..., i, None, None] * eye
        f = _det3(a)
        df = -_adj_trace(a)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(df != 0, f / df, 0.0)
        ok = np.isfinite(step) & (np.abs(step) < 0.1 * sep[..., i])
        out[..., i] = np.where(ok, lam[..., i] - step, lam[..., i])
    return np.sort(out, axis=-1)


def _deflate_close_pair(m: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Re-solve the two closest roots from the 2x2 block orthogonal to the isolated eigenvector."""
    gaps = np.diff(lam, axis=-1)
    iso = np.where(gaps[..., 1] < gaps[..., 0], 0, 2)
    lam_iso = np.take_along_axis(lam, iso[..., None], axis=-1)
    v = _null_vectors(m, lam_iso)[..., 0, :]
    valid = np.linalg.norm(v, axis=-1) > 0.5
    v = np.where(valid[..., None], v, np.array([1.0, 0.0, 0.0]))
    # any axis far from v completes an orthonormal frame
    seed = np.eye(3)[np.argmin(np.abs(v), axis=-1)]
    u1 = np.cross(v, seed)
    u1 /= np.linalg.norm(u1, axis=-1, keepdims=True)
    u2 = np.cross(v, u1)
    mu1 = np.einsum("...ij,...j->...i", m, u1)
    mu2 = np.einsum("...ij,...j->...i", m, u2)
    a = np.sum(u1 * mu1, axis=-1)
    d = np.sum(u2 * mu2, axis=-1)
    b = 0.5 * (np.sum(u1 * mu2, axis=-1) + np.sum(u2 * mu1, axis=-1))
    mean = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), b)
    out = np.sort(np.stack([lam_iso[..., 0], mean - radius, mean + radius], axis=-1), axis=-1)
    # a multiple of the identity has no isolated eigenvector; its roots are already exact
    return np.where(valid[..., None], out, lam)


def eigenvalues_closed_form(m) -> np.ndarray:
    """Ascending eigenvalues of a real symmetric 3x3 matrix (or a stack of them).

    Uses the trigonometric three-real-roots solution of the characteristic
    cubic followed by one Newton refinement.  When two roots are close the
    pair is recomputed from the 2x2 block orthogonal to the third
    eigenvector, which keeps full accuracy.  Where two roots lie closer
    than ``1e-9 * ||M||`` a :class:`DegenerateRootsWarning` is emitted and
    those matrices are diagonalised with :func:`numpy.linalg.eigvalsh`.
    """
    m = np.asarray(m, dtype=float)
    if m.shape[-2:] != (3, 3):
        raise ValueError(f"expected (..., 3, 3) matrices, got shape {m.shape}")
    lam = _newton_polish(m, _trig_cardano(m))
    scale = _norm(m)
    close = (np.min(np.diff(lam, axis=-1), axis=-1) <= CLOSE_PAIR_RTOL * scale) & (scale > 0)
    if np.any(close):
        lam[close] = _deflate_close_pair(m[close], lam[close])
    degenerate = np.min(np.diff(lam, axis=-1), axis=-1) <= DEGENERACY_RTOL * scale
    degenerate &= scale > 0
    if np.any(degenerate):
        warnings.warn(
            f"{int(np.sum(degenerate))} matrix(es) with nearly degenerate eigenvalues; "
            "using iterative eigensolver",
            DegenerateRootsWarning,
            stacklevel=2,
        )
        lam[degenerate] = np.linalg.eigvalsh(m[degenerate])
    return lam


def cubic_coefficients(eps, delta2, G1, g2):
    """Depressed-cubic coefficients (p, q) of det(M - lambda I) = 0."""
    p = -eps**2 / 3.0 + delta2 * eps / 3.0 - G1**2 - g2**2 - delta2**2 / 3.0
    q = (
        3.0 * delta2 * eps**2
        - 2.0 * eps**3
        + (18.0 * g2**2 - 9.0 * G1**2 + 3.0 * delta2**2) * eps
        - 2.0 * delta2**3
        - 9.0 * G1**2 * delta2
        - 9.0 * g2**2 * delta2
    ) / 27.0
    return p, q


def cardano_radical_roots(eps: float, delta2: float, G1: float, g2: float) -> np.ndarray:
    """Roots from the complex-radical Cardano formulas, in the unsorted (beta_+, beta_-) labelling.

    Returns complex values; for a symmetric mode matrix the imaginary parts
    are rounding residue only.
    """
    p, q = cubic_coefficients(eps, delta2, G1, g2)
    root = np.sqrt(complex((q / 2.0) ** 2 + (p / 3.0) ** 3))
    beta_p = complex(-q / 2.0 + root) ** (1.0 / 3.0)
    # choose beta_- so that beta_+ beta_- = -p/3 (consistent branch of the cube roots)
    if abs(beta_p) > 0:
        beta_m = -p / (3.0 * beta_p)
    else:
        beta_m = complex(-q / 2.0 - root) ** (1.0 / 3.0)
    kappa = complex(-0.5, math.sqrt(3.0) / 2.0)
    offset = (eps + delta2) / 3.0
    return np.array(
        [
            beta_p + beta_m + offset,
            kappa * beta_p + kappa**2 * beta_m + offset,
            kappa**2 * beta_p + kappa * beta_m + offset,
        ]
    )


def _orient(v: np.ndarray) -> np.ndarray:
    """Flip each vector so its largest-magnitude component is positive.

    Components equal in magnitude to within 1e-9 count as ties, resolved in
    favour of the first (photon before A before C).
    """
    mag = np.abs(v)
    lead_mask = mag >= (1.0 - 1e-9) * np.max(mag, axis=-1, keepdims=True)
    idx = np.argmax(lead_mask, axis=-1)
    lead = np.take_along_axis(v, idx[..., None], axis=-1)
    return np.where(lead < 0, -v, v)


def _null_vectors(m: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Unit null vectors of M - lambda_i I from the largest row cross product."""
    eye = np.eye(3)
    a = m[..., None, :, :] - lam[..., :, None, None] * eye
    c = np.stack(
        [
            np.cross(a[..., 0, :], a[..., 1, :]),
            np.cross(a[..., 0, :], a[..., 2, :]),
            np.cross(a[..., 1, :], a[..., 2, :]),
        ],
        axis=-2,
    )
    n = np.linalg.norm(c, axis=-1)
    best = np.argmax(n, axis=-1)
    v = np.take_along_axis(c, best[..., None, None], axis=-2)[..., 0, :]
    vn = np.take_along_axis(n, best[..., None], axis=-1)
    return v / np.where(vn > 0, vn, 1.0)


def _eigensystem(m: np.ndarray):
    """Eigenvalues (ascending) and oriented eigenvectors ``vec[..., i, :]``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateRootsWarning)
        lam = eigenvalues_closed_form(m)
    vec = _null_vectors(m, lam)
    scale = _norm(m)
    close = np.min(np.diff(lam, axis=-1), axis=-1) <= VECTOR_GAP_RTOL * scale
    if np.any(close):
        w, q = np.linalg.eigh(m[close])
        lam[close] = w
        vec[close] = np.swapaxes(q, -1, -2)
    return lam, _orient(vec)


def closed_form_composition(lam: float, eps: float, G1: float, g2: float) -> np.ndarray:
    """Normalised (d1, d2, d3) = (G1/(lam-eps), 1, g2/lam)/r for a well-posed eigenvalue."""
    v = np.array([G1 / (lam - eps), 1.0, g2 / lam])
    return v / math.sqrt(float(v @ v))


def _check_closed_form(m: np.ndarray, lam: np.ndarray, vec: np.ndarray) -> None:
    eps, G1, g2 = m[0, 0], m[0, 1], m[1, 2]
    scale = float(_norm(m))
    for i in range(3):
        gap = min(abs(lam[i] - lam[j]) for j in range(3) if j != i)
        far = min(abs(lam[i]), abs(lam[i] - eps))
        if scale == 0 or gap < CLOSED_FORM_RTOL * scale or far < CLOSED_FORM_RTOL * scale:
            continue
        cf = _orient(closed_form_composition(lam[i], eps, G1, g2))
        if np.max(np.abs(cf - vec[i])) > 1e-9:
            raise ArithmeticError(
                f"polariton closed form disagrees with null-space vector for branch {i + 1}: "
                f"{cf} vs {vec[i]}"
            )


def polariton_branches(m, k: float = math.nan) -> list[PolaritonBranch]:
    """All three polaritons of one mode matrix, ascending in energy."""
    m = np.asarray(m, dtype=float)
    lam, vec = _eigensystem(m)
    _check_closed_form(m, lam, vec)
    return [
        PolaritonBranch(i + 1, float(k), float(lam[i]), *map(float, vec[i]))
        for i in range(3)
    ]


def polariton_branch(m, which: int, k: float = math.nan, p: ModelParams | None = None) -> PolaritonBranch:
    """Polariton ``which`` (1 = lowest eigenvalue) of the mode matrix ``m``.

    Away from lambda = 0 and lambda = eps_k the coefficients coincide with
    (G1/(lambda - eps_k), 1, g2/lambda) after normalisation; that identity is
    checked on every call.  At the dark state or in decoupled limits the
    vector comes from the null space of M - lambda I.  ``p`` is accepted for
    symmetry with the other operations and is not needed.
    """
    if which not in (1, 2, 3):
        raise ValueError(f"branch index must be 1, 2 or 3, got {which}")
    return polariton_branches(m, k)[which - 1]


def dark_state_angle(p: ModelParams) -> float:
    """Mixing angle theta with tan(theta) = G1 / g2, in [0, pi/2]."""
    if p.G1 == 0 and p.g2 == 0:
        raise BothCouplingsZero("dark-state angle undefined for G1 = g2 = 0")
    return math.atan2(p.G1, p.g2)


def _match_permutation(prev: np.ndarray, cur: np.ndarray) -> tuple[int, ...]:
    overlap = np.abs(prev @ cur.T)
    return max(
        itertools.permutations(range(3)),
        key=lambda perm: sum(overlap[i, perm[i]] for i in range(3)),
    )


def band_structure(grid, p: ModelParams) -> BandStructure:
    """Polariton bands over ``grid`` (a :class:`KGrid` or an array of wavevectors).

    Branches are followed from one k to the next by maximal eigenvector
    overlap, so they stay continuous through exact crossings of the
    uncoupled bands; the three tracked branches are then labelled by mean
    energy.  With both couplings nonzero this equals ascending order at
    every k.
    """
    k = np.asarray(getattr(grid, "values", grid), dtype=float)
    if k.ndim != 1 or k.size == 0:
        raise ValueError("band_structure needs a nonempty 1-D set of wavevectors")
    lam, vec = _eigensystem(assemble_mode_matrices(k, p))
    if p.G1 == 0 or p.g2 == 0:
        lam, vec = lam.copy(), vec.copy()
        for j in range(1, k.size):
            perm = list(_match_permutation(vec[j - 1], vec[j]))
            lam[j] = lam[j, perm]
            vec[j] = vec[j, perm]
        order = np.argsort(lam.mean(axis=0), kind="stable")
        lam, vec = lam[:, order], vec[:, order]
    return BandStructure(k=k, eigenvalues=lam, vectors=vec)


def group_velocity(branch: PolaritonBranch, p: ModelParams) -> float:
    """d(lambda)/dk of a polariton from the Hellmann-Feynman identity.

    Only the photon diagonal entry of M depends on k, so
    d(lambda)/dk = d1**2 * d(eps_k)/dk.
    """
    return float(branch.d1**2 * dispersion_slope(branch.k, p))


def finite_difference_velocity(k: float, which: int, p: ModelParams, step: float | None = None) -> float:
    """Fourth-order central difference of the ascending-labelled eigenvalue ``which``."""
    h = 1e-3 / p.ell if step is None else step
    ks = k + h * np.array([-2.0, -1.0, 1.0, 2.0])
    lam = eigenvalues_closed_form(assemble_mode_matrices(ks, p))[:, which - 1]
    return float((8.0 * (lam[2] - lam[1]) - (lam[3] - lam[0])) / (12.0 * h))


def composition_profile(grid, p: ModelParams) -> dict[int, np.ndarray]:
    """Per-branch arrays with columns (k, d1, d2, d3)."""
    bands = band_structure(grid, p)
    return {
        i + 1: np.column_stack([bands.k, bands.vectors[:, i, :]])
        for i in range(3)
    }


def mode_eigensystem(k, p: ModelParams):
    """Ascending eigenvalues ``(n, 3)`` and oriented eigenvectors ``(n, 3, 3)`` for wavevectors ``k``."""
    return _eigensystem(assemble_mode_matrices(np.atleast_1d(np.asarray(k, dtype=float)), p))


def branch_at(k: float, which: int, p: ModelParams) -> PolaritonBranch:
    """Shortcut: polariton ``which`` of mode ``k`` for parameters ``p``."""
    return polariton_branch(assemble_mode_matrix(k, p), which, k, p)

