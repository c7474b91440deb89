"""swarmstack: derivative-free global minimization for box-constrained objectives.

The optimizer keeps a bounded, value-sorted "stack" of best distinct points
(the swarm) and pushes it through four cascaded search stages, repeated over a
descending temperature ladder with several independent trials per step.
"""

from .domain import BoundsSpec
from .objective import (ObjectiveHandle, external_objective, make_benchmark,
                        make_benchmark_with_bounds)
from .scheduler import (RunConfig, RunDiagnostics, run_optimization,
                        run_temperature_step, run_trial)
from .stages import AlgorithmOptions
from .swarm import RatedPoint, Stack, StackMetrics

__all__ = [
    "AlgorithmOptions",
    "BoundsSpec",
    "ObjectiveHandle",
    "RatedPoint",
    "RunConfig",
    "RunDiagnostics",
    "Stack",
    "StackMetrics",
    "external_objective",
    "make_benchmark",
    "make_benchmark_with_bounds",
    "run_optimization",
    "run_temperature_step",
    "run_trial",
]
