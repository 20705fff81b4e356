"""Physical parameters, the Brillouin-zone grid and the per-mode coupling matrix.

All quantities are angular frequencies in a single consistent unit system
(natural units with |J| ~ 1 by default).  Mode amplitudes are ordered
(photon a, spin wave A, spin wave C) everywhere in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "KGrid",
    "dispersion",
    "bare_band",
    "dispersion_slope",
    "assemble_mode_matrix",
    "assemble_mode_matrices",
]


@dataclass(frozen=True)
class ModelParams:
    """Parameters of a CROW with N_A Lambda atoms per cavity.

    ``J`` is signed.  ``delta1`` is the probe-atom detuning and ``delta2`` the
    control-atom detuning.  Decay rates are amplitude damping rates.
    """

    omega0: float = 100.0
    J: float = -1.0
    ell: float = 1.0
    g1: float = 1.0
    n_atoms: float = 1.0
    g2: float = 1.0
    delta1: float = 0.0
    delta2: float = 0.0
    gamma: float = 0.0
    gamma_a: float = 0.0
    gamma_c: float = 0.0

    def __post_init__(self):
        if not self.ell > 0:
            raise ValueError(f"ell must be positive, got {self.ell}")
        if not self.n_atoms >= 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        for name in ("g1", "g2", "gamma", "gamma_a", "gamma_c"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be >= 0, got {value}")

    @property
    def G1(self) -> float:
        """Collectively enhanced probe coupling g1 * sqrt(N_A)."""
        if self.n_atoms == 1:
            return float(self.g1)
        return float(self.g1 * math.sqrt(self.n_atoms))

    @property
    def delta(self) -> float:
        """Two-photon detuning difference delta2 - delta1."""
        return self.delta2 - self.delta1

    @property
    def Delta(self) -> float:
        # common detuning of the detuned dark-state construction (delta1 = delta2 = Delta)
        return self.delta1

    @property
    def k0(self) -> float:
        """Band centre pi / (2 ell)."""
        return math.pi / (2.0 * self.ell)

    def replace(self, **changes) -> "ModelParams":
        import dataclasses

        return dataclasses.replace(self, **changes)

    def with_G1(self, G1: float) -> "ModelParams":
        """Copy with g1 chosen so that the enhanced coupling equals ``G1``."""
        return self.replace(g1=G1 / math.sqrt(self.n_atoms))


@dataclass(frozen=True)
class KGrid:
    """Uniform grid over the first Brillouin zone [-pi/ell, pi/ell)."""

    n_modes: int
    ell: float = 1.0
    values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 2:
            raise ValueError(f"n_modes must be an integer >= 2, got {self.n_modes}")
        if not self.ell > 0:
            raise ValueError(f"ell must be positive, got {self.ell}")
        j = np.arange(self.n_modes)
        k = -np.pi / self.ell + 2.0 * np.pi * j / (self.n_modes * self.ell)
        k.setflags(write=False)
        object.__setattr__(self, "values", k)

    @classmethod
    def for_params(cls, n_modes: int, p: ModelParams) -> "KGrid":
        return cls(n_modes, p.ell)

    def __len__(self):
        return self.n_modes

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / (self.n_modes * self.ell)

    def center_index(self) -> int:
        """Index of the grid point closest to the band centre pi/(2 ell)."""
        return self.nearest_index(np.pi / (2.0 * self.ell))

    def nearest_index(self, k: float) -> int:
        period = 2.0 * np.pi / self.ell
        d = (self.values - k + period / 2) % period - period / 2
        return int(np.argmin(np.abs(d)))


def dispersion(k, p: ModelParams):
    """CROW dispersion 2 J cos(k ell) + delta2 - delta1 in the rotating frame."""
    return 2.0 * p.J * np.cos(np.asarray(k) * p.ell) + (p.delta2 - p.delta1)


def bare_band(k, p: ModelParams):
    """Bare photonic band of the single-atom model; same function as :func:`dispersion`."""
    return dispersion(k, p)


def dispersion_slope(k, p: ModelParams):
    """d(epsilon_k)/dk = -2 J ell sin(k ell)."""
    return -2.0 * p.J * p.ell * np.sin(np.asarray(k) * p.ell)


def assemble_mode_matrix(k: float, p: ModelParams) -> np.ndarray:
    """Return the real symmetric 3x3 coupling matrix of mode ``k``.

    Rows and columns are ordered (a, A, C)::

        [[eps_k, G1,     0 ],
         [G1,    delta2, g2],
         [0,     g2,     0 ]]
    """
    eps = float(dispersion(k, p))
    G1 = p.G1
    m = np.array(
        [[eps, G1, 0.0],
         [G1, p.delta2, p.g2],
         [0.0, p.g2, 0.0]]
    )
    m.setflags(write=False)
    return m


def assemble_mode_matrices(k, p: ModelParams) -> np.ndarray:
    """Stack of coupling matrices, shape ``k.shape + (3, 3)``."""
    k = np.asarray(k, dtype=float)
    m = np.zeros(k.shape + (3, 3))
    m[..., 0, 0] = dispersion(k, p)
    m[..., 0, 1] = m[..., 1, 0] = p.G1
    m[..., 1, 1] = p.delta2
    m[..., 1, 2] = m[..., 2, 1] = p.g2
    return m
