"""Command-line front end: config parsing, run execution, result export.

Configuration is a flat key-value text file (``key = value`` per line, ``#``
comments) whose keys are mirrored one-to-one by command-line flags; flags win
over the file.  A run writes the final stack as CSV, per-stage diagnostics as
JSON lines and, optionally, plane projections of every point that ever
entered a swarm (data tables for external plotting, not images).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .domain import BoundsSpec, denormalize
from .objective import (BENCHMARK_NAMES, ObjectiveHandle, external_objective,
                        make_benchmark, make_benchmark_with_bounds)
from .scheduler import (DEFAULT_TEMPERATURES, RunConfig, RunDiagnostics,
                        run_optimization)
from .stages import AlgorithmOptions
from .swarm import RatedPoint, Stack


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _parse_bounds(text: str) -> list[tuple[float, float]]:
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        lo, _, hi = chunk.partition(":")
        pairs.append((float(lo), float(hi)))
    if not pairs:
        raise ValueError("empty bounds list")
    return pairs


@dataclass
class CliConfig:
    """Everything the command layer needs to build and run one optimization."""

    dim: int = 2
    bounds: list[tuple[float, float]] | None = None
    function: str = "sphere"
    bounds_style: str = "conventional"
    external_cmd: str | None = None
    timeout: float = 30.0
    workers: int = 1
    temperatures: tuple[float, ...] = DEFAULT_TEMPERATURES
    trials: int = 10
    evals_per_trial: int = 10_000
    stack_capacity: int = 120
    seed: int = 0
    tol: float = 1e-4
    threads: int = 1
    out_dir: str = "swarmstack_out"
    emit_projections: bool = False
    projection_planes: str = "0-1"
    linmin_on_improvement: bool = True
    mutation_prob: float = 0.25
    notch_exponent: float = 1.0 / 6.0
    fat_tail3_c1: float = 15.0
    fat_tail3_c2: float = 4.0
    fat_tail3_c3: float = 1.0
    fat_tail3_k1: float = 10.0
    fat_tail3_k2: float = 50.0
    fat_tail3_s_divisor: float = 20.0
    r_eq_base: float = 0.01
    r_eq_slope: float = 0.09
    recombine_ratio_high_t: float = 2.0
    recombine_ratio_low_t: float = 5.0


# config-file / flag key -> (dataclass field, converter)
CONFIG_KEYS = {
    "dim": ("dim", int),
    "bounds": ("bounds", _parse_bounds),
    "function": ("function", str),
    "bounds_style": ("bounds_style", str),
    "external_cmd": ("external_cmd", str),
    "timeout": ("timeout", float),
    "workers": ("workers", int),
    "temperatures": ("temperatures", _parse_floats),
    "trials": ("trials", int),
    "evals_per_trial": ("evals_per_trial", int),
    "stack_capacity": ("stack_capacity", int),
    "seed": ("seed", int),
    "tol": ("tol", float),
    "threads": ("threads", int),
    "out_dir": ("out_dir", str),
    "emit_projections": ("emit_projections", _parse_bool),
    "projection_planes": ("projection_planes", str),
    "linmin_on_improvement": ("linmin_on_improvement", _parse_bool),
    "mutation_prob": ("mutation_prob", float),
    "notch_exponent": ("notch_exponent", float),
    "fatTail3.c1": ("fat_tail3_c1", float),
    "fatTail3.c2": ("fat_tail3_c2", float),
    "fatTail3.c3": ("fat_tail3_c3", float),
    "fatTail3.k1": ("fat_tail3_k1", float),
    "fatTail3.k2": ("fat_tail3_k2", float),
    "fatTail3.s_divisor": ("fat_tail3_s_divisor", float),
    "r_eq.base": ("r_eq_base", float),
    "r_eq.slope": ("r_eq_slope", float),
    "recombine.ratio_high_t": ("recombine_ratio_high_t", float),
    "recombine.ratio_low_t": ("recombine_ratio_low_t", float),
}


def parse_config(file_path: str | None,
                 flag_overrides: dict[str, str] | None = None) -> CliConfig:
    """Read the flat key-value file, then apply flag overrides on top."""
    config = CliConfig()
    if file_path is not None:
        path = Path(file_path)
        if not path.is_file():
            raise ValueError(f"config file not found: {file_path}")
        for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise ValueError(
                    f"{file_path}:{lineno}: expected 'key = value', got {raw!r}")
            key = key.strip()
            if key not in CONFIG_KEYS:
                raise ValueError(f"{file_path}:{lineno}: unknown key {key!r}")
            attr, convert = CONFIG_KEYS[key]
            try:
                config = replace(config, **{attr: convert(value.strip())})
            except ValueError as exc:
                raise ValueError(f"{file_path}:{lineno}: bad value for "
                                 f"{key!r}: {exc}") from exc
    for key, value in (flag_overrides or {}).items():
        if key not in CONFIG_KEYS:
            raise ValueError(f"unknown key {key!r}")
        attr, convert = CONFIG_KEYS[key]
        if isinstance(value, str):
            value = convert(value)
        config = replace(config, **{attr: value})
    return config


def build_run(config: CliConfig) -> tuple[RunConfig, ObjectiveHandle]:
    """Materialize the objective handle and the run configuration."""
    options = AlgorithmOptions(
        linmin_on_improvement=config.linmin_on_improvement,
        linmin_tol=config.tol,
        notch_exponent=config.notch_exponent,
        mutation_prob=config.mutation_prob,
        recombine_ratio_high_t=config.recombine_ratio_high_t,
        recombine_ratio_low_t=config.recombine_ratio_low_t,
        fat_tail3_c=(config.fat_tail3_c1, config.fat_tail3_c2,
                     config.fat_tail3_c3),
        fat_tail3_k=(config.fat_tail3_k1, config.fat_tail3_k2),
        fat_tail3_s_divisor=config.fat_tail3_s_divisor,
        r_eq_base=config.r_eq_base,
        r_eq_slope=config.r_eq_slope,
    )
    if config.external_cmd:
        if config.bounds is None:
            raise ValueError("external_cmd requires explicit bounds")
        pairs = config.bounds
        if len(pairs) == 1 and config.dim > 1:
            pairs = pairs * config.dim
        bounds = BoundsSpec.from_pairs(pairs)
        handle = external_objective(config.external_cmd, bounds,
                                    timeout=config.timeout,
                                    workers=config.workers)
    elif config.bounds is not None:
        pairs = config.bounds
        if len(pairs) == 1 and config.dim > 1:
            pairs = pairs * config.dim
        bounds = BoundsSpec.from_pairs(pairs)
        handle = make_benchmark_with_bounds(config.function, config.dim,
                                            bounds, noise_seed=config.seed)
    else:
        handle = make_benchmark(config.function, config.dim,
                                bounds_style=config.bounds_style,
                                noise_seed=config.seed)
    run_config = RunConfig(
        dim=handle.dim, bounds=handle.bounds,
        temperatures=config.temperatures,
        trials_per_temperature=config.trials,
        evals_per_trial=config.evals_per_trial,
        stack_capacity=config.stack_capacity,
        master_seed=config.seed, threads=config.threads, options=options,
        collect_history=config.emit_projections)
    return run_config, handle


def write_stack_csv(stack: Stack, bounds: BoundsSpec, path: Path) -> None:
    """CSV rows (rank, value, normalized coords, user coords), best first.

    Floats are written with repr so reading the table back reproduces the
    in-memory stack exactly.
    """
    dim = bounds.dim
    header = (["rank", "value"]
              + [f"x{i}" for i in range(dim)]
              + [f"u{i}" for i in range(dim)])
    lines = [",".join(header)]
    for rank, entry in enumerate(stack.entries):
        user = denormalize(entry.position, bounds)
        cells = ([str(rank), repr(float(entry.value))]
                 + [repr(float(v)) for v in entry.position]
                 + [repr(float(v)) for v in user])
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def read_stack_csv(path: Path, capacity: int, r_eq: float,
                   ) -> tuple[Stack, BoundsSpec | None]:
    """Parse a stack table back; inverse of :func:`write_stack_csv`."""
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    dim = sum(1 for h in header if h.startswith("x"))
    stack = Stack(capacity, r_eq)
    for line in lines[1:]:
        cells = line.split(",")
        position = np.array([float(v) for v in cells[2:2 + dim]])
        stack.entries.append(RatedPoint(position, float(cells[1]),
                                        int(cells[0])))
    return stack, None


def write_diagnostics_jsonl(diag: RunDiagnostics, path: Path) -> None:
    with path.open("w") as fh:
        for r in diag.records:
            fh.write(json.dumps({
                "temperature": r.temperature,
                "trial": r.trial_index,
                "stage": r.stage,
                "evals": r.evals_used,
                "best_value": r.best_value,
                "stat_dist": r.metrics.stat_dist,
                "stat_params": r.metrics.stat_params,
                "disp_score": r.metrics.disp_score,
                "fmt_score": r.metrics.fmt_score,
                "stack_score": r.metrics.stack_score,
                "elapsed_s": r.elapsed_s,
            }) + "\n")


def parse_planes(spec: str, dim: int) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """Parse plane specs: "0-1;2-3" axis pairs or "u.../v..." vector pairs."""
    planes = []
    for idx, chunk in enumerate(spec.split(";")):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "/" in chunk:
            u_txt, v_txt = chunk.split("/", 1)
            u = np.array([float(x) for x in u_txt.split()])
            v = np.array([float(x) for x in v_txt.split()])
            if u.size != dim or v.size != dim:
                raise ValueError(f"plane {chunk!r} has wrong dimension")
            planes.append((f"plane{idx}", u, v))
        else:
            i_txt, _, j_txt = chunk.partition("-")
            i, j = int(i_txt), int(j_txt)
            if not (0 <= i < dim and 0 <= j < dim) or i == j:
                raise ValueError(f"bad axis pair {chunk!r} for dim {dim}")
            u = np.zeros(dim)
            v = np.zeros(dim)
            u[i] = 1.0
            v[j] = 1.0
            planes.append((f"e{i}-e{j}", u, v))
    return planes


def export_projections(history: list[RatedPoint],
                       planes: list[tuple[str, np.ndarray, np.ndarray]],
                       out_dir: Path) -> list[Path]:
    """Write one TSV per plane: (u, v, value, eval_index) rows.

    Cube projections onto oblique directions span more than one unit; each
    axis is rescaled by its own extent so every table lives in the unit
    square, matching the cube-face view on coordinate planes.
    """
    if not history:
        raise ValueError("empty swarm history: nothing to project")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, u, v in planes:
        for d in (u, v):
            if abs(float(np.sqrt(d @ d)) - 1.0) > 1e-9:
                raise ValueError(f"plane {name!r}: direction not unit length")
        if abs(float(u @ v)) > 1e-9:
            raise ValueError(f"plane {name!r}: directions not orthogonal")
        u_min = float(np.minimum(u, 0.0).sum())
        v_min = float(np.minimum(v, 0.0).sum())
        u_len = float(np.abs(u).sum())
        v_len = float(np.abs(v).sum())
        path = out_dir / f"{name}.tsv"
        lines = ["u\tv\tvalue\teval_index"]
        for p in history:
            pu = (float(p.position @ u) - u_min) / u_len
            pv = (float(p.position @ v) - v_min) / v_len
            lines.append(f"{pu!r}\t{pv!r}\t{float(p.value)!r}\t{p.eval_index}")
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def run_command(config: CliConfig) -> int:
    """Execute one optimization run and write all requested artifacts."""
    try:
        run_config, handle = build_run(config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    try:
        stack, diag = run_optimization(run_config, handle)
    finally:
        handle.close()
    elapsed = time.perf_counter() - started

    write_stack_csv(stack, handle.bounds, out_dir / "stack.csv")
    write_diagnostics_jsonl(diag, out_dir / "diagnostics.jsonl")
    if config.emit_projections:
        planes = parse_planes(config.projection_planes, run_config.dim)
        export_projections(diag.swarm_history, planes, out_dir / "projections")

    best = stack.best
    best_user = denormalize(best.position, handle.bounds)
    print(f"best value: {best.value:.10g}")
    print("best point (user units): "
          + " ".join(f"{v:.10g}" for v in best_user))
    print(f"total evaluations: {diag.total_evaluations}"
          + (f" ({handle.flagged_count} flagged)" if handle.flagged_count else ""))
    print(f"elapsed: {elapsed:.2f}s")
    print(f"outputs in: {out_dir}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="swarmstack",
        description="Derivative-free global minimizer over box domains.")
    parser.add_argument("--config", help="flat key=value config file")
    for key in CONFIG_KEYS:
        parser.add_argument(f"--{key}", dest=f"opt_{key}", default=None,
                            metavar="V")
    args = parser.parse_args(argv)
    overrides = {}
    for key in CONFIG_KEYS:
        value = getattr(args, f"opt_{key}")
        if value is not None:
            overrides[key] = value
    try:
        config = parse_config(args.config, overrides)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run_command(config)


if __name__ == "__main__":
    sys.exit(main())
