"""Distributed proximal-gradient optimization over rate-limited links.

Subsystems on a communication graph cooperatively minimise a sum of
quadratic costs over box constraints while exchanging only quantized
messages.  The package provides the block-structured problem model, a
refining uniform quantizer with a bit-exact wire codec, exact / inexact /
quantized projected-gradient runners (plain and accelerated), the quantizer
parameter designer with its convergence envelopes, and a seeded generator
for condensed distributed-MPC test problems.
"""

from .algorithms import (
    ErrorMeasurement,
    IterationRecord,
    RunConfig,
    RunState,
    RunTrace,
    fit_rate,
    init_run_state,
    measure_errors,
    momentum,
    reference_gap,
    reference_solution,
    run_exact,
    run_inexact,
    run_quantized,
    step_quantized_apgm,
    step_quantized_pgm,
)
from .design import (
    DesignCoefficients,
    DesignInputs,
    DesignPoint,
    DesignResult,
    coefficients,
    coefficients_apgm,
    coefficients_pgm,
    default_kappa,
    design_quantizers,
    error_envelope_constants,
    geometric_proposition_envelope,
    kappa_bounds,
    min_bits,
    min_intervals,
    proposition_envelope,
    rate_constant,
    theorem_envelope,
)
from .errors import (
    DimensionMismatch,
    DisconnectedGraph,
    GenerationFailed,
    InadmissibleKappa,
    Infeasible,
    InvalidEdge,
    InvalidStepSize,
    MalformedMessage,
    MalformedTrace,
    NegativeEpsilon,
    NoFeasibleBits,
    NonpositiveInterval,
    NotStronglyConvex,
    QuantnetError,
    SchemaError,
    SeriesTooShort,
)
from .model import (
    BoxSet,
    DistributedQP,
    ProblemConstants,
    SelectionMaps,
    Topology,
    build_topology,
    compute_constants,
    concat_boxes,
    global_gradient,
    global_hessian,
    load_qp,
    local_gradient,
    objective_value,
    project_box,
    qp_from_document,
    qp_to_document,
    save_qp,
)
from .mpc import (
    MpcInstance,
    condense,
    load_mpc,
    mpc_from_document,
    mpc_to_document,
    random_instance,
    save_mpc,
)
from .quantizer import (
    BitLedger,
    QuantizedMessage,
    QuantizerSchedule,
    UniformQuantizer,
    decode,
    encode,
    payload_size,
    quantize,
    record_bits,
    refine,
)

__version__ = "0.1.0"
