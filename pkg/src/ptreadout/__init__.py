"""Simulator for exceptional-point-enhanced dispersive readout of a weakly
coupled qubit: gain/loss cavity chains, their complex spectra, probe
transmission, mean-field dynamics, and reproducible figure scenarios."""

from ._version import __version__
from .hamiltonian import (
    EffectiveHamiltonian,
    PTSymmetryReport,
    QubitBranch,
    SystemParams,
    build_hamiltonian,
    dispersive_shift,
    pt_symmetry_check,
)
from .spectrum import (
    ComplexSpectrum,
    DeltaOmega,
    EPReport,
    SplittingFit,
    delta_omega,
    delta_omega_sweep,
    eigenvalues,
    eigenvalues_2x2,
    eigenvalues_3x3,
    ep_splitting,
    find_ep,
    principal_sqrt,
    splitting_exponent,
    track_modes,
)
from .transmission import (
    DistinguishabilityMetrics,
    Peak,
    PeakSet,
    TransmissionTrace,
    distinguishability,
    find_peaks,
    s21,
    s21_steady_state,
    s21_value,
    self_energy,
)
from .dynamics import (
    CrosscheckReport,
    DriveSpec,
    StabilityReport,
    TrajectoryResult,
    crosscheck_s21,
    integrate,
    stability_classify,
)
from .experiment import (
    ProbeGrid,
    RunResult,
    ScenarioConfig,
    SweepSpec,
    load_config,
    load_config_file,
    preset_catalog,
    run_scenario,
)

__all__ = [
    "__version__",
    "QubitBranch",
    "SystemParams",
    "EffectiveHamiltonian",
    "PTSymmetryReport",
    "dispersive_shift",
    "build_hamiltonian",
    "pt_symmetry_check",
    "ComplexSpectrum",
    "DeltaOmega",
    "EPReport",
    "SplittingFit",
    "principal_sqrt",
    "eigenvalues",
    "eigenvalues_2x2",
    "eigenvalues_3x3",
    "track_modes",
    "delta_omega",
    "delta_omega_sweep",
    "find_ep",
    "ep_splitting",
    "splitting_exponent",
    "TransmissionTrace",
    "Peak",
    "PeakSet",
    "DistinguishabilityMetrics",
    "self_energy",
    "s21_value",
    "s21",
    "s21_steady_state",
    "find_peaks",
    "distinguishability",
    "DriveSpec",
    "StabilityReport",
    "TrajectoryResult",
    "CrosscheckReport",
    "stability_classify",
    "integrate",
    "crosscheck_s21",
    "ScenarioConfig",
    "SweepSpec",
    "ProbeGrid",
    "RunResult",
    "load_config",
    "load_config_file",
    "preset_catalog",
    "run_scenario",
]
