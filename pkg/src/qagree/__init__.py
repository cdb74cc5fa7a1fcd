"""Generalized quantum measurements, meter dilations, Ozawa-type scenarios
and two-agent agreement simulations on dense state vectors."""

from .agents import (
    AgentScenario,
    SimReport,
    TrialRecord,
    agreement_probability,
    alice_distribution,
    bob_report_distribution,
    make_agent_scenario,
    run_trials,
    sample_trials,
)
from .dilation import (
    DilationModel,
    build_dilation,
    dilated_post_state,
    dilated_probabilities,
)
from .errors import (
    CompletenessViolation,
    DimensionMismatch,
    InvariantViolation,
    OutcomeImpossible,
    PreconditionViolated,
    QAgreeError,
    ScenarioSyntaxError,
)
from .instruments import (
    KrausInstrument,
    MeasurementClass,
    classify,
    is_projective,
    outcome_probabilities,
    post_state,
    repeat_conditional,
    rotated_projective,
    validate_instrument,
)
from .linalg import (
    adjoint,
    apply,
    complete_isometry_to_unitary,
    partial_meter_contraction,
    tensor_product,
)
from .ozawa import (
    OzawaScenario,
    ReproducibilityReport,
    build_reproducible_scenario,
    build_uncoupled_scenario,
    check_reproducibility,
    direct_probabilities,
    effective_system_povm,
    joint_distribution,
    joint_state,
    make_scenario,
    meter_probabilities,
    verify_intersubjectivity,
)
from .serialization import dump_scenario, dumps, loads_scenario, parse_scenario

__version__ = "0.1.0"
