"""Learn the Pauli noise of every gate in a Clifford gate set from circuit eigenvalues."""

__version__ = "0.1.0"

from .channels import (  # noqa: E402
    EigenvalueVector,
    NoiseModel,
    PauliChannel,
    eigenvalues_to_rates,
    gate_locations,
    process_infidelity,
    random_noise_model,
    rates_to_eigenvalues,
    tvd,
)
from .clifford import (  # noqa: E402
    Circuit,
    CliffordGate,
    GateSet,
    Operation,
    builtin_gateset,
    conjugate,
    generate_circuit,
    propagate,
)
from .config import ConfigError, RunConfig  # noqa: E402
from .pauli import PauliString, parse_label, symplectic_inner  # noqa: E402
from .protocol import (  # noqa: E402
    DesignMatrix,
    ExperimentPlan,
    ParameterIndex,
    RankDeficientError,
    SolveReport,
    build_design_matrix,
    check_rank,
    design_circuits,
    estimate_all,
    make_plan,
    resource_estimate,
    run_characterization,
    select_probes,
    solve,
)
from .simulate import (  # noqa: E402
    CountsTable,
    TwirledCircuit,
    analytic_circuit_eigenvalue,
    sample_shots,
    twirl_circuit,
)

__all__ = [
    "Circuit",
    "CliffordGate",
    "ConfigError",
    "CountsTable",
    "DesignMatrix",
    "EigenvalueVector",
    "ExperimentPlan",
    "GateSet",
    "NoiseModel",
    "Operation",
    "ParameterIndex",
    "PauliChannel",
    "PauliString",
    "RankDeficientError",
    "RunConfig",
    "SolveReport",
    "TwirledCircuit",
    "analytic_circuit_eigenvalue",
    "build_design_matrix",
    "builtin_gateset",
    "check_rank",
    "conjugate",
    "design_circuits",
    "eigenvalues_to_rates",
    "estimate_all",
    "gate_locations",
    "generate_circuit",
    "make_plan",
    "parse_label",
    "process_infidelity",
    "propagate",
    "random_noise_model",
    "rates_to_eigenvalues",
    "resource_estimate",
    "run_characterization",
    "sample_shots",
    "select_probes",
    "solve",
    "symplectic_inner",
    "tvd",
    "twirl_circuit",
    "__version__",
]
