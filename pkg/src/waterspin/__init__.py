"""Rotational alignment dynamics of ortho and para water driven by short laser kicks."""

from waterspin.angular import AngularIndices, clebsch_gordan, dmatrix_element, wigner_3j
from waterspin.dynamics import (
    PulseSequence,
    WavepacketState,
    cos2theta_matrix,
    expect_cos2,
    expect_energy,
    free_propagate,
    run_sequence,
)
from waterspin.ensemble import (
    AlignmentTrace,
    ThermalEnsemble,
    ThermalSpec,
    boltzmann_weights,
    converge_jmax,
    thermal_trace,
)
from waterspin.errors import (
    ClassificationError,
    ConfigError,
    ConvergenceError,
    KickIntegrationError,
    NumericalError,
    WaterSpinError,
)
from waterspin.interaction import (
    KickCoefficients,
    KickGenerator,
    PulseSpec,
    apply_kick_exact,
    apply_kick_ode,
    build_kick_generator,
    field_from_intensity,
    kick_strengths,
)
from waterspin.rotor import (
    WATER,
    EigenstateTable,
    MolecularSpec,
    RotorEigenstate,
    SpinIsomer,
    SymmetryLabel,
    build_eigentable,
)

__version__ = "0.1.0"

__all__ = [
    "WATER",
    "AlignmentTrace",
    "AngularIndices",
    "ClassificationError",
    "ConfigError",
    "ConvergenceError",
    "EigenstateTable",
    "KickCoefficients",
    "KickGenerator",
    "KickIntegrationError",
    "MolecularSpec",
    "NumericalError",
    "PulseSequence",
    "PulseSpec",
    "RotorEigenstate",
    "SpinIsomer",
    "SymmetryLabel",
    "ThermalEnsemble",
    "ThermalSpec",
    "WaterSpinError",
    "WavepacketState",
    "apply_kick_exact",
    "apply_kick_ode",
    "boltzmann_weights",
    "build_eigentable",
    "build_kick_generator",
    "clebsch_gordan",
    "converge_jmax",
    "cos2theta_matrix",
    "dmatrix_element",
    "expect_cos2",
    "expect_energy",
    "field_from_intensity",
    "free_propagate",
    "kick_strengths",
    "run_sequence",
    "thermal_trace",
    "wigner_3j",
]
