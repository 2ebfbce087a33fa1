"""Interactive level-set image segmentation.

A region-fitting level-set contour evolved by explicit finite differences,
regularized by a fourth-order smoothing term with double-well gradient
control, and steered round by round through user-drawn regions and seed
points. Ships with a validation harness, an HTTP session service and a CLI.
"""

from .errors import (
    AmbiguousPointError,
    DecodeError,
    DivergenceError,
    ExperimentError,
    LevelSegError,
    ParameterError,
    ProtocolError,
    RoundOrderError,
)
from .evolve import (
    RegionMeans,
    SolverParams,
    SolverState,
    StepDiagnostics,
    compute_region_means,
    run,
    signed_distance_drift,
    step,
)
from .metrics import MetricReport, evaluate, mask_from_field
from .session import (
    InteractionEvent,
    RoundRecord,
    SessionState,
    apply_interaction,
    field_checksum,
    init_lsf,
    parse_event,
    reconstitute,
)
from .store import SessionStore, decode_image
from .validate import EXPERIMENTS, nested_demo_script, run_experiments

__version__ = "0.1.0"

__all__ = [
    "AmbiguousPointError",
    "DecodeError",
    "DivergenceError",
    "EXPERIMENTS",
    "ExperimentError",
    "InteractionEvent",
    "LevelSegError",
    "MetricReport",
    "ParameterError",
    "ProtocolError",
    "RegionMeans",
    "RoundOrderError",
    "RoundRecord",
    "SessionState",
    "SessionStore",
    "SolverParams",
    "SolverState",
    "StepDiagnostics",
    "apply_interaction",
    "compute_region_means",
    "decode_image",
    "evaluate",
    "field_checksum",
    "init_lsf",
    "mask_from_field",
    "nested_demo_script",
    "parse_event",
    "reconstitute",
    "run",
    "run_experiments",
    "signed_distance_drift",
    "step",
    "__version__",
]
