"""Deterministic simulation and verification of saturated-Nussbaum adaptive
consensus for first-order agents with unknown control directions."""

__version__ = "0.1.0"

from .chain import (
    NegativeOverlapInterval,
    NussbaumChain,
    build_chain,
    containment_interval,
    overlap_interval,
    overlap_interval_for_signs,
)
from .dynamics import (
    AgentSpec,
    ControlOutputs,
    Graph,
    Regressor,
    SystemState,
    closed_loop_derivative,
    combined_error,
    control_step,
    laplacian,
)
from .engine import BlowupRecord, SimConfig, Trajectory, euler_step, rk4_step, simulate
from .errors import (
    ChainOverflowError,
    ConfigError,
    GainOverflowError,
    NonFiniteDerivativeError,
    NussbaumSimError,
    SegmentHorizonError,
)
from .functions import (
    SaturatedParams,
    TraditionalParams,
    eval_saturated_G,
    eval_saturated_N,
    eval_traditional_N,
    locate_segment,
    max_representable_segment,
    segment_boundary,
    segment_extremum_amplitude,
)
from .theorem import GainConstraintReport, synthesize_gain_params, validate_gain_constraints

__all__ = [name for name in dir() if not name.startswith("_")]
