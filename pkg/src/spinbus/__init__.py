"""Simulation toolkit for an optically injected, drift-transported
electron-spin bus between defect clusters in diamond.

Subpackages: params (constants and registry), spin (Hamiltonians and
dephasing), photophysics (cross-sections, rates, selectivity), transport
(drift-diffusion solver, closed forms, feasibility), protocol (pulse
timelines and budgets), cli (command-line front end).
"""

from .params import (
    DONOR_TABLE,
    GAMMA_E,
    DonorSpinParams,
    PhysicalParameters,
    Quantity,
    UnitSystem,
    load_parameters,
    serialize_parameters,
    thermal_velocity,
)
from .photophysics import (
    ChargeStateRules,
    CrossSectionTable,
    capture_rate,
    injection_fidelity,
    load_bundled_table,
    photoionization_rate,
    recharge_time,
    selectivity_check,
    spurious_electron_estimate,
)
from .protocol import (
    BudgetReport,
    FidelityInputs,
    ProtocolTimeline,
    Pulse,
    build_detection_pair,
    build_entanglement,
    build_injection_nv,
    build_injection_pair,
    end_to_end_fidelity,
    validate,
)
from .spin import (
    DephasingEstimate,
    SpinHamiltonian,
    donor_hamiltonian,
    donor_secular_hamiltonian,
    evolve,
    ionization_dephasing,
    misalignment_angle,
    nv_hamiltonian,
    product_state_expansion,
    separated_nv_hamiltonian,
)
from .transport import (
    FeasibilityMap,
    SolverOptions,
    TransportDomain,
    TransportState,
    analytic_half_space,
    feasibility_region,
    nanowire_steady_state,
    solve_drift_diffusion,
    spread_radius,
    transport_distance,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetReport",
    "ChargeStateRules",
    "CrossSectionTable",
    "DONOR_TABLE",
    "DephasingEstimate",
    "DonorSpinParams",
    "FeasibilityMap",
    "FidelityInputs",
    "GAMMA_E",
    "PhysicalParameters",
    "ProtocolTimeline",
    "Pulse",
    "Quantity",
    "SolverOptions",
    "SpinHamiltonian",
    "TransportDomain",
    "TransportState",
    "UnitSystem",
    "analytic_half_space",
    "build_detection_pair",
    "build_entanglement",
    "build_injection_nv",
    "build_injection_pair",
    "capture_rate",
    "donor_hamiltonian",
    "donor_secular_hamiltonian",
    "end_to_end_fidelity",
    "evolve",
    "feasibility_region",
    "injection_fidelity",
    "ionization_dephasing",
    "load_bundled_table",
    "load_parameters",
    "misalignment_angle",
    "nanowire_steady_state",
    "nv_hamiltonian",
    "photoionization_rate",
    "product_state_expansion",
    "recharge_time",
    "selectivity_check",
    "separated_nv_hamiltonian",
    "serialize_parameters",
    "solve_drift_diffusion",
    "spread_radius",
    "spurious_electron_estimate",
    "thermal_velocity",
    "transport_distance",
    "validate",
]
