"""Time evolution of single-excitation amplitudes: propagation, stopping and retrieval.

Every k-mode carries a complex 3-vector v = (a_k, A_k, C_k) obeying

    dv/dt = (-i M_k(t) - Gamma) v,    Gamma = diag(gamma, gamma_A, gamma_C).

Modes decouple for uniform couplings, so a pulse is a stack of independent
3-vectors.  :func:`real_space_oracle_evolve` integrates the same physics on
the ring of N cavities in the site basis as a cross-check.

Real-space amplitudes use F_j = N**-0.5 * sum_k F_k exp(i k ell j), so a
packet built from modes with positive d(lambda)/dk moves towards larger j.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import StepSizeUnderflow
from .model import KGrid, ModelParams, assemble_mode_matrices
from .spectra import mode_eigensystem

__all__ = [
    "PulseState",
    "RampSchedule",
    "StorageReport",
    "evolve_mode",
    "evolve_modes",
    "make_gaussian_pulse",
    "run_storage_protocol",
    "real_space_hamiltonian",
    "real_space_oracle_evolve",
    "to_real_space",
    "from_real_space",
    "pulse_center",
    "adiabaticity_margin",
]

ParamPath = Union[ModelParams, Callable[[float], ModelParams]]

_GAUSS = math.sqrt(3.0) / 6.0
_CONTROLS = ("g2", "delta2")


def _expm_apply(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """exp(x) @ v for stacks of small matrices ``x`` and vectors ``v`` (scaled Taylor series)."""
    norm = float(np.max(np.sum(np.abs(x), axis=-1)))
    s = max(0, int(math.ceil(math.log2(norm / 0.25)))) if norm > 0.25 else 0
    y = x / 2.0**s
    for _ in range(2**s):
        term = v
        out = v
        for n in range(1, 13):
            term = (y @ term) / n
            out = out + term
        v = out
    return v


def _generator(k: np.ndarray, p: ModelParams) -> np.ndarray:
    a = -1j * assemble_mode_matrices(k, p)
    a[..., 0, 0] -= p.gamma
    a[..., 1, 1] -= p.gamma_a
    a[..., 2, 2] -= p.gamma_c
    return a


def _as_path(params: ParamPath) -> Callable[[float], ModelParams]:
    if isinstance(params, ModelParams):
        return lambda t: params
    return params


def _magnus_run(v, k, path, t0, t1, n_steps):
    h = (t1 - t0) / n_steps
    v = v[..., None]
    for i in range(n_steps):
        ta = t0 + h * (i + 0.5 - _GAUSS)
        tb = t0 + h * (i + 0.5 + _GAUSS)
        a1 = _generator(k, path(ta))
        a2 = _generator(k, path(tb))
        omega = 0.5 * h * (a1 + a2) + (math.sqrt(3.0) / 12.0) * h * h * (a2 @ a1 - a1 @ a2)
        v = _expm_apply(omega, v)
    return v[..., 0]


def _default_dt(k, path, t0, t1) -> float:
    scale = 0.0
    for t in (t0, 0.5 * (t0 + t1), t1):
        a = _generator(k, path(t))
        scale = max(scale, float(np.max(np.abs(a))) * 3.0)
    return 3 / scale if scale > 0 else max(t1 - t0, 1e-300)


def evolve_modes(v, k, params: ParamPath, t0: float, t1: float, dt_max: float | None = None,
                 rtol: float = 1e-8) -> np.ndarray:
    """Evolve a stack of mode vectors ``v`` (shape ``(n, 3)``) from ``t0`` to ``t1``.

    ``params`` is a :class:`ModelParams` or a callable ``t -> ModelParams``.
    The scheme is the fourth-order two-point Magnus integrator, exact for
    constant parameters.  The result is accepted once halving the step
    changes it by less than ``rtol`` (relative, in the 2-norm).
    """
    v = np.asarray(v, dtype=complex)
    k = np.asarray(k, dtype=float)
    if t1 == t0:
        return v.copy()
    path = _as_path(params)
    dt = _default_dt(k, path, t0, t1) if dt_max is None else float(dt_max)
    if not dt > 0:
        raise ValueError(f"dt_max must be positive, got {dt_max}")
    span = abs(t1 - t0)
    n = max(1, int(math.ceil(span / dt)))
    coarse = None
    while True:
        # checked before integrating so a tiny dt_max fails fast
        if span / (2 * n) < 1e-12 * span:
            raise StepSizeUnderflow(
                f"step halving failed to converge on [{t0}, {t1}] (step {span / (2 * n):.3g})"
            )
        coarse = _magnus_run(v, k, path, t0, t1, n) if coarse is None else coarse
        fine = _magnus_run(v, k, path, t0, t1, 2 * n)
        ref = np.linalg.norm(fine)
        if np.linalg.norm(fine - coarse) <= rtol * max(ref, 1e-300):
            return fine
        coarse, n = fine, 2 * n


def evolve_mode(v, k: float, params: ParamPath, t0: float, t1: float, dt_max: float | None = None) -> np.ndarray:
    """Evolve one complex 3-vector of mode ``k``."""
    out = evolve_modes(np.asarray(v, dtype=complex)[None, :], np.array([k]), params, t0, t1, dt_max)
    return out[0]


@dataclass(frozen=True)
class PulseState:
    """Single-excitation amplitudes (a_k, A_k, C_k) for every mode of ``grid``."""

    grid: KGrid
    amplitudes: np.ndarray
    time: float = 0.0

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def fractions(self) -> np.ndarray:
        """Weight in (photon, A, C) normalised to the total norm."""
        w = np.sum(np.abs(self.amplitudes) ** 2, axis=0)
        return w / np.sum(w)

    def real_space(self) -> np.ndarray:
        return to_real_space(self.amplitudes, self.grid)


def _fourier_matrix(grid: KGrid) -> np.ndarray:
    j = np.arange(grid.n_modes)
    # rows: sites, columns: modes
    return np.exp(1j * np.outer(j, grid.values * grid.ell)) / math.sqrt(grid.n_modes)


def to_real_space(amplitudes, grid: KGrid) -> np.ndarray:
    """Map ``(N, 3)`` mode amplitudes to the site vector [a_0..a_N-1, A_0.., C_0..]."""
    f = _fourier_matrix(grid)
    return (f @ np.asarray(amplitudes)).T.reshape(-1)


def from_real_space(state, grid: KGrid) -> np.ndarray:
    """Inverse of :func:`to_real_space`."""
    f = _fourier_matrix(grid)
    sites = np.asarray(state).reshape(3, grid.n_modes).T
    return f.conj().T @ sites


def pulse_center(state, n_sites: int) -> float:
    """Circular mean position (in units of ell) of the total excitation density on the ring."""
    rho = np.sum(np.abs(np.asarray(state).reshape(3, n_sites)) ** 2, axis=0)
    phase = np.sum(rho * np.exp(2j * np.pi * np.arange(n_sites) / n_sites))
    return float(np.angle(phase) * n_sites / (2.0 * np.pi))


def make_gaussian_pulse(grid: KGrid, center_k: float, width_k: float,
                        branch_projection: int | None = None,
                        params: ModelParams | None = None) -> PulseState:
    """Photonic Gaussian wavepacket in k-space, normalised to unit norm.

    With ``branch_projection`` set, every mode vector is projected on that
    polariton branch (needs ``params``) and the packet is renormalised.
    """
    if not width_k > 0:
        raise ValueError(f"width_k must be positive, got {width_k}")
    period = 2.0 * np.pi / grid.ell
    dk = (grid.values - center_k + period / 2) % period - period / 2
    logw = -(dk**2) / (2.0 * width_k**2)
    amp = np.exp(logw - logw.max())
    v = np.zeros((grid.n_modes, 3), dtype=complex)
    v[:, 0] = amp
    if branch_projection is not None:
        if params is None:
            raise ValueError("branch projection needs model parameters")
        _, vec = mode_eigensystem(grid.values, params)
        u = vec[:, branch_projection - 1, :]
        v = u * np.sum(u * v, axis=1)[:, None]
    v /= math.sqrt(np.sum(np.abs(v) ** 2))
    return PulseState(grid, v, 0.0)


def real_space_hamiltonian(n_sites: int, p: ModelParams) -> np.ndarray:
    """Site-basis coupling matrix of the periodic ring in the rotating frame (3N x 3N)."""
    n = n_sites
    h = np.zeros((3 * n, 3 * n))
    idx = np.arange(n)
    nxt = (idx + 1) % n
    h[idx, idx] = p.delta2 - p.delta1
    h[idx, nxt] += p.J
    h[nxt, idx] += p.J
    h[n + idx, n + idx] = p.delta2
    h[idx, n + idx] = h[n + idx, idx] = p.G1
    h[n + idx, 2 * n + idx] = h[2 * n + idx, n + idx] = p.g2
    return h


def _real_generator(n_sites: int, p: ModelParams) -> np.ndarray:
    damp = np.repeat([p.gamma, p.gamma_a, p.gamma_c], n_sites)
    return -1j * real_space_hamiltonian(n_sites, p) - np.diag(damp)


def real_space_oracle_evolve(state, params: ParamPath, t0: float, t1: float) -> np.ndarray:
    """Evolve 3N site amplitudes on the ring of N cavities.

    Constant parameters use one dense matrix exponential; a parameter path
    is integrated with DOP853 at tight tolerances.
    """
    state = np.asarray(state, dtype=complex)
    if state.size % 3:
        raise ValueError("site state must hold 3N amplitudes")
    n = state.size // 3
    if isinstance(params, ModelParams):
        return scipy.linalg.expm(_real_generator(n, params) * (t1 - t0)) @ state
    sol = scipy.integrate.solve_ivp(
        lambda t, y: _real_generator(n, params(t)) @ y,
        (t0, t1), state, method="DOP853", rtol=1e-12, atol=1e-14,
    )
    return sol.y[:, -1]


@dataclass(frozen=True)
class RampSchedule:
    """Ramp of ``control`` start -> hold -> end with half-cosine edges.

    Segment durations may be zero, which makes the corresponding change sudden.
    """

    control: str = "g2"
    start_value: float = 10.0
    hold_value: float = 0.1
    end_value: float = 10.0
    t_ramp_down: float = 200.0
    t_hold: float = 50.0
    t_ramp_up: float = 200.0
    shape: str = "half-cosine"

    def __post_init__(self):
        if self.control not in _CONTROLS:
            raise ValueError(f"control must be one of {_CONTROLS}, got {self.control!r}")
        if self.shape != "half-cosine":
            raise ValueError(f"unsupported ramp shape {self.shape!r}")
        for name in ("t_ramp_down", "t_hold", "t_ramp_up"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        if self.control == "g2":
            for name in ("start_value", "hold_value", "end_value"):
                if getattr(self, name) < 0:
                    raise ValueError(f"{name} of a g2 ramp must be >= 0")

    @property
    def duration(self) -> float:
        return self.t_ramp_down + self.t_hold + self.t_ramp_up

    def segments(self) -> list[tuple[str, float, float, float, float]]:
        """(name, t_start, t_end, value_start, value_end) for each segment."""
        t1 = self.t_ramp_down
        t2 = t1 + self.t_hold
        return [
            ("ramp_down", 0.0, t1, self.start_value, self.hold_value),
            ("hold", t1, t2, self.hold_value, self.hold_value),
            ("ramp_up", t2, self.duration, self.hold_value, self.end_value),
        ]

    @staticmethod
    def _shape(ta, tb, va, vb, t):
        if tb <= ta:
            return vb, 0.0
        s = min(max((t - ta) / (tb - ta), 0.0), 1.0)
        value = va + (vb - va) * 0.5 * (1.0 - math.cos(math.pi * s))
        rate = (vb - va) * 0.5 * math.pi / (tb - ta) * math.sin(math.pi * s)
        return value, rate

    def value(self, t: float) -> float:
        """Control value at time ``t`` (right-continuous at sudden jumps)."""
        return self._locate(t)[0]

    def rate(self, t: float) -> float:
        return self._locate(t)[1]

    def _locate(self, t):
        if t < 0:
            return self.start_value, 0.0
        for _, ta, tb, va, vb in self.segments():
            if t < tb:
                return self._shape(ta, tb, va, vb, t)
        return self.end_value, 0.0

    def initial_params(self, p: ModelParams) -> ModelParams:
        """Parameters before the protocol starts (control at ``start_value``)."""
        return dataclasses.replace(p, **{self.control: self.start_value})

    def params_at(self, p: ModelParams, t: float) -> ModelParams:
        return dataclasses.replace(p, **{self.control: self.value(t)})

    def segment_path(self, p: ModelParams, index: int) -> Callable[[float], ModelParams]:
        _, ta, tb, va, vb = self.segments()[index]
        control = self.control

        def path(t):
            return dataclasses.replace(p, **{control: self._shape(ta, tb, va, vb, t)[0]})

        return path


@dataclass
class StorageReport:
    """Time series and summary figures of a stop-and-retrieve run."""

    times: np.ndarray
    photon_fraction: np.ndarray
    a_fraction: np.ndarray
    c_fraction: np.ndarray
    norm: np.ndarray
    pulse_center: np.ndarray
    bandwidth: np.ndarray
    peak_retrieval_photon_fraction: float
    hold_photon_fraction: float
    fidelity: float
    velocity_estimates: dict = field(default_factory=dict)
    final_state: PulseState | None = None


def _sample_times(schedule: RampSchedule, sample_dt: float) -> np.ndarray:
    total = schedule.duration
    n = int(math.floor(total / sample_dt + 1e-9))
    ts = list(np.arange(n + 1) * sample_dt)
    ts += [b for _, a, b, _, _ in schedule.segments()] + [0.0, total]
    ts = np.unique(np.round(np.array(ts), 12))
    return ts[ts <= total]


def _adiabatic_reference(pulse: PulseState, p: ModelParams, schedule: RampSchedule,
                         branch: int, n_nodes: int = 64) -> np.ndarray:
    """Loss-free state that follows branch ``branch`` adiabatically through the schedule."""
    k = pulse.grid.values
    _, vec0 = mode_eigensystem(k, schedule.initial_params(p))
    u_prev = vec0[:, branch - 1, :]
    coeff = np.sum(u_prev.conj() * pulse.amplitudes, axis=1)
    phase = np.zeros(k.size)
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    for index, (_, ta, tb, _, _) in enumerate(schedule.segments()):
        path = schedule.segment_path(p, index)
        if tb <= ta:
            _, vec = mode_eigensystem(k, path(tb))
            u = vec[:, branch - 1, :]
            u_prev = u * np.sign(np.sum(u * u_prev, axis=1))[:, None]
            continue
        nodes = ta + (tb - ta) * (x + 1.0) / 2.0
        for t, wt in zip(nodes, w):
            lam, vec = mode_eigensystem(k, path(t))
            phase += 0.5 * (tb - ta) * wt * lam[:, branch - 1]
            u = vec[:, branch - 1, :]
            u_prev = u * np.sign(np.sum(u * u_prev, axis=1))[:, None]
        _, vec = mode_eigensystem(k, path(tb))
        u = vec[:, branch - 1, :]
        u_prev = u * np.sign(np.sum(u * u_prev, axis=1))[:, None]
    ref = (coeff * np.exp(-1j * phase))[:, None] * u_prev
    return ref / math.sqrt(np.sum(np.abs(ref) ** 2))


def _fit_velocity(t, x):
    if len(t) < 2 or t[-1] - t[0] <= 0:
        return math.nan
    return float(np.polyfit(t, x, 1)[0])


def run_storage_protocol(pulse: PulseState, p: ModelParams, schedule: RampSchedule,
                         sample_dt: float, branch: int = 2, dt_max: float | None = None) -> StorageReport:
    """Evolve ``pulse`` through the ramp schedule and summarise storage and retrieval.

    Fidelity is |<ideal|out>|**2 where ``ideal`` is the loss-free state that
    stays on ``branch`` and acquires only the dynamical phase; taking the
    modulus optimises over the global phase.
    """
    if not sample_dt > 0:
        raise ValueError("sample_dt must be positive")
    grid = pulse.grid
    k = grid.values
    n = grid.n_modes
    times = _sample_times(schedule, sample_dt)
    segs = schedule.segments()

    def seg_index(ta, tb):
        mid = 0.5 * (ta + tb)
        for i, (_, a, b, _, _) in enumerate(segs):
            if a <= mid < b:
                return i
        return len(segs) - 1

    def record(v, t):
        w = np.sum(np.abs(v) ** 2, axis=0)
        total = float(np.sum(w))
        lam = mode_eigensystem(k, schedule.params_at(p, t))[0][:, branch - 1]
        return (w / total, total, pulse_center(to_real_space(v, grid), n), float(np.ptp(lam)))

    v = np.array(pulse.amplitudes, dtype=complex)
    rows = [record(v, times[0])]
    for ta, tb in zip(times[:-1], times[1:]):
        v = evolve_modes(v, k, schedule.segment_path(p, seg_index(ta, tb)), ta, tb, dt_max)
        rows.append(record(v, tb))

    frac = np.array([r[0] for r in rows])
    norm = np.array([r[1] for r in rows])
    center = np.unwrap(np.array([r[2] for r in rows]) * 2 * np.pi / n) * n / (2 * np.pi)
    width = np.array([r[3] for r in rows])

    t_hold0 = schedule.t_ramp_down
    t_hold1 = t_hold0 + schedule.t_hold
    in_hold = (times >= t_hold0) & (times <= t_hold1)
    after = times >= t_hold1
    velocities = {}
    for name, ta, tb, _, _ in segs:
        sel = (times >= ta) & (times <= tb)
        velocities[name] = _fit_velocity(times[sel], center[sel])

    ref = _adiabatic_reference(pulse, p, schedule, branch)
    fidelity = float(abs(np.sum(ref.conj() * v)) ** 2)
    return StorageReport(
        times=times,
        photon_fraction=frac[:, 0],
        a_fraction=frac[:, 1],
        c_fraction=frac[:, 2],
        norm=norm,
        pulse_center=center,
        bandwidth=width,
        peak_retrieval_photon_fraction=float(frac[after, 0].max()),
        hold_photon_fraction=float(frac[in_hold, 0].max()),
        fidelity=fidelity,
        velocity_estimates=velocities,
        final_state=PulseState(grid, v, float(times[-1])),
    )


def adiabaticity_margin(p: ModelParams, schedule: RampSchedule, grid: KGrid, branch: int = 2,
                        n_samples: int = 201, modes=None) -> float:
    """Smallest gap**2 / |rate * <u_j| dM/dx |u_branch>| over ramp times and modes.

    ``x`` is the ramped parameter.  Large values predict adiabatic following;
    a sudden segment gives 0.  ``modes`` restricts the minimum to a subset
    of grid indices.
    """
    k = grid.values if modes is None else grid.values[np.asarray(modes)]
    dm = np.zeros((3, 3))
    if schedule.control == "g2":
        dm[1, 2] = dm[2, 1] = 1.0
    else:
        dm[0, 0] = dm[1, 1] = 1.0
    margin = math.inf
    for _, ta, tb, va, vb in schedule.segments():
        if va == vb:
            continue
        if tb <= ta:
            return 0.0
        for t in np.linspace(ta, tb, n_samples):
            value, rate = RampSchedule._shape(ta, tb, va, vb, t)
            if rate == 0:
                continue
            lam, vec = mode_eigensystem(k, dataclasses.replace(p, **{schedule.control: value}))
            u = vec[:, branch - 1, :]
            for j in range(3):
                if j == branch - 1:
                    continue
                gap = lam[:, j] - lam[:, branch - 1]
                coupling = np.abs(np.einsum("ni,ij,nj->n", vec[:, j, :], dm, u)) * abs(rate)
                with np.errstate(divide="ignore"):
                    ratio = np.where(coupling > 0, gap**2 / coupling, np.inf)
                margin = min(margin, float(ratio.min()))
    return margin
