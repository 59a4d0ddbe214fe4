"""TDMA ring membership with clique avoidance.

Concrete N-station simulator with asymmetric-fault injection, the matching
counter abstraction (single-fault automaton and multi-fault counter tree),
and an explicit-state checker that verifies the counting properties and the
two-round convergence claim, cross-validating concrete runs against the
abstraction.
"""

from .protocol import (
    CheckPhase,
    Frame,
    Location,
    MembershipVector,
    StationId,
    StationState,
    check_first_successor,
    check_second_successor,
    clique_gate,
    crc_correct,
    full_vector,
    initial_station,
    receive_step,
    reintegrate_step,
    vector_str,
)
from .ring import (
    FaultSpec,
    IntegrationSpec,
    Ring,
    Scenario,
    ScenarioError,
    SlotEvent,
    SlotRecord,
    StabilizationReport,
    check_stabilization,
    is_single_clique,
    parse_scenario,
    partition_classes,
    render_run_tables,
    run_scenario,
    scenario_text,
    trace_lines,
)
from .abstraction import (
    AbstractInputs,
    AbstractState,
    AbstractTransition,
    abstract_init,
    abstract_inputs_for_slot,
    abstract_successors,
    abstraction_map,
    conserves_population,
)
from .kfault import (
    CounterTree,
    GateCheck,
    counting_gate_checks,
    expected_counter_count,
    tree_gate_checks,
)
from .checker import (
    PropertyVerdict,
    ResourceCap,
    StateGraph,
    SweepResult,
    check_properties,
    cross_check,
    explore,
    single_fault_sweep,
    two_fault_sweep,
    x_values,
)

__all__ = [
    "AbstractInputs",
    "AbstractState",
    "AbstractTransition",
    "CheckPhase",
    "CounterTree",
    "FaultSpec",
    "Frame",
    "GateCheck",
    "IntegrationSpec",
    "Location",
    "MembershipVector",
    "PropertyVerdict",
    "ResourceCap",
    "Ring",
    "Scenario",
    "ScenarioError",
    "SlotEvent",
    "SlotRecord",
    "StabilizationReport",
    "StateGraph",
    "StationId",
    "StationState",
    "SweepResult",
    "abstract_init",
    "abstract_inputs_for_slot",
    "abstract_successors",
    "abstraction_map",
    "check_first_successor",
    "check_properties",
    "check_second_successor",
    "check_stabilization",
    "clique_gate",
    "conserves_population",
    "counting_gate_checks",
    "crc_correct",
    "cross_check",
    "expected_counter_count",
    "explore",
    "full_vector",
    "initial_station",
    "is_single_clique",
    "parse_scenario",
    "partition_classes",
    "receive_step",
    "reintegrate_step",
    "render_run_tables",
    "run_scenario",
    "scenario_text",
    "single_fault_sweep",
    "trace_lines",
    "tree_gate_checks",
    "two_fault_sweep",
    "vector_str",
    "x_values",
]

__version__ = "0.1.0"
