"""Simulator and analysis toolkit for the adiabatic Rydberg-dressed CZ gate."""

from .config import (
    DOPPLER_FREE,
    SINGLE_LASER,
    DerivedParams,
    GateConfig,
    derive,
    dumps_config,
    load_config,
    load_config_file,
    reference_config,
)
from .dressing import (
    DressedSpectrum,
    dipole_kick,
    doppler_phase,
    dressed_spectrum,
    interaction_J,
    light_shift_pair_blockaded,
    light_shift_single,
    weak_dressing_J,
)
from .gate import (
    ErrorBudget,
    GateResult,
    ScanRow,
    ThermalEnsemble,
    assemble_rho,
    coherence_ratio,
    error_budget,
    run_branch,
    scan_ramp,
    thermal_ensemble,
)
from .model import (
    ElectronicBasis,
    HamiltonianMatrix,
    build_single_atom,
    build_two_atom,
    dipole_gradient,
    dipole_potential,
)
from .propagator import Trajectory, propagate
from .pulse import (
    PulseSchedule,
    adiabaticity_margin,
    calibrate_hold,
    conditional_phase,
    evaluate,
    schedule_from_config,
)

__version__ = "0.1.0"
