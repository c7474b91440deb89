"""Top-level orchestration: trials, temperature ladder, merging, diagnostics.

A run executes ``trials_per_temperature`` independent trials at each
temperature of a descending ladder.  Every trial owns a private RNG stream
derived from the master seed, seeds its stack from the current guess points,
then runs the four stages under a fixed evaluation budget.  After each
temperature step all trial stacks merge into one, whose positions become the
guess points of the next, cooler step.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .domain import BoundsSpec
from .objective import CONCURRENT_SAFE, ObjectiveHandle
from .rng import seed
from .stages import STAGE_NAMES, STAGES, AlgorithmOptions, TrialContext
from .swarm import (RatedPoint, Stack, StackMetrics, default_ema_alpha,
                    merge_stacks, stack_score)

DEFAULT_TEMPERATURES = (1.0, 0.75, 0.5, 0.25, 0.0)

# stage-3 and stage-4 budget weight relative to stages 1 and 2
_LATE_STAGE_WEIGHT = 1.3


@dataclass(frozen=True)
class RunConfig:
    """Everything one optimization run needs besides the objective itself."""

    dim: int
    bounds: BoundsSpec
    temperatures: tuple[float, ...] = DEFAULT_TEMPERATURES
    trials_per_temperature: int = 10
    evals_per_trial: int = 10_000
    stack_capacity: int = 120
    master_seed: int = 0
    threads: int = 1
    options: AlgorithmOptions = AlgorithmOptions()
    collect_history: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.bounds.dim != self.dim:
            raise ValueError(f"bounds dim {self.bounds.dim} != dim {self.dim}")
        temps = tuple(float(t) for t in self.temperatures)
        object.__setattr__(self, "temperatures", temps)
        if not temps or any(not 0.0 <= t <= 1.0 for t in temps):
            raise ValueError("temperatures must lie in [0, 1]")
        if any(a <= b for a, b in zip(temps, temps[1:])):
            raise ValueError("temperatures must be strictly descending")
        if (self.trials_per_temperature < 1 or self.stack_capacity < 1
                or self.threads < 1):
            raise ValueError("counts must be positive")
        allocate_budget(self.evals_per_trial)  # validates the size


@dataclass(frozen=True)
class StageRecord:
    """Diagnostics for one stage of one trial."""

    temperature: float
    trial_index: int
    stage: str
    evals_used: int
    best_value: float
    metrics: StackMetrics
    elapsed_s: float


@dataclass
class RunDiagnostics:
    """Per-stage records plus evaluation accounting for a whole run."""

    records: list[StageRecord] = field(default_factory=list)
    total_evaluations: int = 0
    swarm_history: list[RatedPoint] = field(default_factory=list)
    elapsed_s: float = 0.0

    def recorded_evaluations(self) -> int:
        return sum(r.evals_used for r in self.records)

    def best_value_trajectory(self) -> list[float]:
        return [r.best_value for r in self.records]


def initial_guesses(dim: int) -> list[np.ndarray]:
    """Three points on the principal diagonal at 1/4, 1/2 and 3/4."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return [np.full(dim, c) for c in (0.25, 0.5, 0.75)]


def allocate_budget(evals_per_trial: int) -> tuple[int, int, int, int]:
    """Split a trial budget over the four stages.

    The two late stages (proximal, axes) are more demanding and receive 30%
    more evaluations each; rounding remainders land on the last stage so the
    parts always sum to the input.
    """
    if evals_per_trial < 100:
        raise ValueError(
            f"evals_per_trial must be >= 100, got {evals_per_trial}")
    base = evals_per_trial / (2.0 + 2.0 * _LATE_STAGE_WEIGHT)
    s1 = round(base)
    s2 = round(base)
    s3 = round(_LATE_STAGE_WEIGHT * base)
    s4 = evals_per_trial - s1 - s2 - s3
    return (s1, s2, s3, s4)


def run_trial(config: RunConfig, objective: ObjectiveHandle, temperature: float,
              guess_points: Sequence[np.ndarray], stream_index: int,
              ) -> tuple[Stack, list[StageRecord], list[RatedPoint]]:
    """One full four-stage pass at a fixed temperature.

    Guess-point evaluations count against the first stage's budget.  The
    returned stack is deterministic given (config, temperature, guesses,
    stream_index) and the objective.
    """
    if not guess_points:
        raise ValueError("run_trial needs at least one guess point")
    opts = config.options
    r_eq = opts.equivalence_radius(temperature, config.dim)
    stack = Stack(config.stack_capacity, r_eq)
    ctx = TrialContext(
        stack=stack, rng=seed(config.master_seed, stream_index),
        temperature=temperature, dim=config.dim, objective=objective,
        stage_budgets=allocate_budget(config.evals_per_trial), options=opts,
        insert_log=[] if config.collect_history else None)

    for guess in guess_points:
        position = np.asarray(guess, dtype=float)
        ctx.offer(ctx.rate(position, ctx.evaluate(position)))
    seed_cost = ctx.eval_count

    alpha = default_ema_alpha(config.stack_capacity)
    records = []
    budgets = (max(ctx.stage_budgets[0] - seed_cost, 0),) + ctx.stage_budgets[1:]
    for stage, name, budget in zip(STAGES, STAGE_NAMES, budgets):
        before = ctx.eval_count
        started = time.perf_counter()
        stage(ctx, budget)
        used = ctx.eval_count - before
        if name == STAGE_NAMES[0]:
            used += seed_cost  # guesses are paid out of the first stage
        records.append(StageRecord(
            temperature=temperature, trial_index=stream_index,
            stage=name, evals_used=used, best_value=stack.best.value,
            metrics=stack_score(stack, alpha),
            elapsed_s=time.perf_counter() - started))
    return stack, records, ctx.insert_log or []


def run_temperature_step(config: RunConfig, objective: ObjectiveHandle,
                         temperature: float, guesses: Sequence[np.ndarray],
                         base_stream: int,
                         ) -> tuple[Stack, list[StageRecord], list[RatedPoint]]:
    """All trials of one temperature, merged into a single stack."""
    indices = range(config.trials_per_temperature)

    def one(i: int):
        return run_trial(config, objective, temperature, guesses,
                         base_stream + i)

    parallel = (config.threads > 1
                and objective.concurrency_class == CONCURRENT_SAFE)
    if parallel:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(one, indices))
    else:
        results = [one(i) for i in indices]

    stacks = [r[0] for r in results]
    records = [rec for r in results for rec in r[1]]
    history = [p for r in results for p in r[2]]
    r_eq = config.options.equivalence_radius(temperature, config.dim)
    merged = merge_stacks(stacks, config.stack_capacity, r_eq)
    return merged, records, history


def run_optimization(config: RunConfig, objective: ObjectiveHandle,
                     ) -> tuple[Stack, RunDiagnostics]:
    """Full run over the temperature ladder; returns the final merged stack.

    Solutions of each temperature step become the guess points of the next,
    so the best value can only improve along the ladder.  Stream indices
    never repeat across the run.
    """
    if objective.dim != config.dim:
        raise ValueError(f"objective dim {objective.dim} != config {config.dim}")
    started = time.perf_counter()
    diagnostics = RunDiagnostics()
    guesses = initial_guesses(config.dim)
    stack: Optional[Stack] = None
    for step_index, temperature in enumerate(config.temperatures):
        base_stream = step_index * config.trials_per_temperature
        stack, records, history = run_temperature_step(
            config, objective, temperature, guesses, base_stream)
        diagnostics.records.extend(records)
        diagnostics.swarm_history.extend(history)
        guesses = [entry.position for entry in stack.entries]
    diagnostics.total_evaluations = objective.eval_count
    diagnostics.elapsed_s = time.perf_counter() - started
    return stack, diagnostics
