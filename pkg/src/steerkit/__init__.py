"""Steered versus steering states of bipartite pure states."""

__version__ = "0.1.0"

from .core_states import (
    BipartiteState,
    KetVector,
    SchmidtSpectrum,
    Side,
    SteeringResult,
    equal_up_to_phase,
    generic_steer,
    inner_product,
    schmidt_decompose,
)
from .exceptions import (
    DimensionMismatchError,
    InvariantError,
    OffSupportError,
    SteerkitError,
    ZeroProbabilityError,
)
from .fr_scenario import build_fr_state, compute_ok_probabilities, run_inference_chain
from .ladder import LadderTrace, fixed_point, ladder_step, run_ladder
from .min_overlap import (
    MinOverlapSolution,
    ReductionTrace,
    brute_force_oracle,
    closed_form_min,
    optimal_phi,
    solve_by_reduction,
)
from .steering import (
    ReportClass,
    classify_report,
    cross_overlap,
    mutual_overlap,
    steered_state,
    steering_state,
)
