"""Photon transmission in a coupled-resonator optical waveguide doped with Lambda atoms."""

from .errors import (
    BothCouplingsZero,
    ConfigError,
    DegenerateRootsWarning,
    NoWindowFound,
    SingularSteadyState,
    StepSizeUnderflow,
)
from .model import KGrid, ModelParams, assemble_mode_matrix, bare_band, dispersion
from .response import (
    SusceptibilityPoint,
    TransparencyWindow,
    find_transparency_window,
    steady_state_ratio,
    susceptibility,
    susceptibility_scan_delta,
    susceptibility_scan_J,
)
from .spectra import (
    BandStructure,
    PolaritonBranch,
    band_structure,
    composition_profile,
    dark_state_angle,
    eigenvalues_closed_form,
    group_velocity,
    polariton_branch,
    polariton_branches,
)
from .dynamics import (
    PulseState,
    RampSchedule,
    StorageReport,
    adiabaticity_margin,
    evolve_mode,
    make_gaussian_pulse,
    real_space_oracle_evolve,
    run_storage_protocol,
)

__version__ = "0.1.0"
