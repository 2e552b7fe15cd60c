"""Simulation and exact moment analysis of diagonal quantum circuits."""
from .circuits import (
    CircuitInstance,
    GateSetSpec,
    PlacedGate,
    gr_placements,
    instance_to_diagonal,
    sample_gcz_instance,
    sample_gr_instance,
)
from .errors import (
    ArgumentError,
    CalibrationError,
    CapacityError,
    ConfigurationError,
    DiagcircError,
    EmptyShellError,
    NonConvergentError,
    ShapeError,
    UnsupportedFormError,
)
from .iqp import (
    IQPCircuit,
    OutputDistribution,
    ZProductGate,
    circuit_hypergraph,
    ising_amplitude,
    multiplicative_error_check,
    output_distribution,
    sample_outputs,
)
from .moments import (
    DesignReport,
    diag_target_moment,
    gcz_epsilon,
    gr_circuit_moment,
    haar_state_moment,
    is_exact_design,
    moment_distance,
    t_conv,
)
from .qstate import (
    DensityMatrix,
    DiagonalUnitary,
    PureState,
    apply_diagonal,
    entanglement_entropy,
    plus_state,
    reduced_density,
    trace_distance,
)
from .state_designs import (
    EtaResult,
    StateEnsembleSpec,
    eta_exact,
    phase_random_moment,
    protocol_moment,
    sample_protocol_state,
)
from .thermo import (
    ClassicalHamiltonian,
    EnergyShell,
    SystemSplit,
    ThermalizeOutcome,
    calibrate_beta,
    energy_shell,
    gibbs_state,
    ideal_shell_state,
    ising_chain,
    min_gap,
    qpe_thermalize,
)

__version__ = "0.1.0"
