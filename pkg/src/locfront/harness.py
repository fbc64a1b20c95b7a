"""Monte Carlo harness: declarative experiments, deterministic seeding, tables.

Every replication draws its own generator from the substream keyed by
(master_seed, beta_star, n, replication index), so results are bit-identical
whether replications run sequentially or across a process pool, and removing
a cell from an experiment never changes another cell's numbers.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .bandwidth import (
    AdaptiveConfig,
    AdaptiveResult,
    adaptive_bandwidth,
    balanced_bandwidth,
    simulation_bandwidth,
)
from .estimator import Dataset, EstimatorConfig, fit_at
from .synthetic import (
    DesignSpec,
    ErrorSpec,
    ModelSpec,
    eval_boundary,
    gen_design,
    make_sample,
    sample_errors,
)

WORKERS_ENV = "LOCFRONT_WORKERS"

RESULT_CSV_HEADER = (
    "beta_star,n,mse,mc_stderr,n_exact,n_degraded,n_expanded"
)


class ConfigError(ValueError):
    """Bad experiment configuration file."""


@dataclass(frozen=True)
class BandwidthRule:
    """How each cell's bandwidth is produced from (n, q, beta_star)."""

    kind: str  # "fixed" | "simulation" | "balanced" | "adaptive"
    h: float | None = None
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("fixed", "simulation", "balanced", "adaptive"):
            raise ValueError(f"unknown bandwidth rule {self.kind!r}")
        if self.kind == "fixed":
            if self.h is None or not 0.0 < self.h <= 1.0:
                raise ValueError("fixed rule needs h in (0, 1]")
        if self.kind == "balanced":
            if self.alpha is None or self.beta is None:
                raise ValueError("balanced rule needs alpha and beta")
            if self.alpha <= 0 or self.beta <= 0:
                raise ValueError("balanced rule needs positive alpha and beta")


def resolve_bandwidth(rule: BandwidthRule, n: int, q: int, beta_star: int) -> float:
    if rule.kind == "fixed":
        return float(rule.h)
    if rule.kind == "simulation":
        return simulation_bandwidth(n, q, beta_star)
    if rule.kind == "balanced":
        return balanced_bandwidth(n, q, rule.alpha, rule.beta)
    raise ValueError("adaptive bandwidths are selected per dataset; use run_adaptive")


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative Monte Carlo experiment over a (beta_star, n) grid."""

    q: int
    n_list: tuple[int, ...]
    beta_star_list: tuple[int, ...]
    replications: int
    master_seed: int
    design: str = "random_uniform"
    error: ErrorSpec = field(default_factory=lambda: ErrorSpec("exponential_unit"))
    model: ModelSpec = field(default_factory=lambda: ModelSpec("sine_sum"))
    bandwidth: BandwidthRule = field(default_factory=lambda: BandwidthRule("simulation"))
    evaluation: str = "center"  # "center" | "grid"
    grid_points_per_axis: int = 20
    fallback: str = "degrade_degree"
    empty_window: str = "expand"

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(
            self, "beta_star_list", tuple(int(b) for b in self.beta_star_list)
        )
        if not self.n_list:
            raise ValueError("n_list must be nonempty")
        if not self.beta_star_list:
            raise ValueError("beta_star_list must be nonempty")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be a nonnegative integer")
        if self.evaluation not in ("center", "grid"):
            raise ValueError("evaluation must be 'center' or 'grid'")
        if self.evaluation == "grid" and self.grid_points_per_axis < 1:
            raise ValueError("grid evaluation needs at least 1 point per axis")
        if self.design not in ("random_uniform", "equidistant_grid"):
            raise ValueError("design must be 'random_uniform' or 'equidistant_grid'")


@dataclass(frozen=True)
class CellResult:
    mse: float
    mc_stderr: float
    replications: int
    n_exact: int
    n_degraded: int
    n_expanded: int


@dataclass(frozen=True)
class ResultTable:
    """MSE summary per (beta_star, n) cell."""

    cells: dict[tuple[int, int], CellResult]

    def sorted_keys(self) -> list[tuple[int, int]]:
        return sorted(self.cells)

    def rows(self) -> list[dict]:
        out = []
        for beta_star, n in self.sorted_keys():
            cell = self.cells[(beta_star, n)]
            out.append(
                {
                    "beta_star": beta_star,
                    "n": n,
                    "mse": cell.mse,
                    "mc_stderr": cell.mc_stderr,
                    "n_exact": cell.n_exact,
                    "n_degraded": cell.n_degraded,
                    "n_expanded": cell.n_expanded,
                }
            )
        return out


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError as err:
            raise ConfigError(f"{WORKERS_ENV}={raw!r} is not an integer") from err
        if value < 1:
            raise ConfigError(f"{WORKERS_ENV} must be >= 1")
        return value
    return os.cpu_count() or 1


def _replication_rng(spec: ExperimentSpec, beta_star: int, n: int, r: int):
    return np.random.default_rng([spec.master_seed, beta_star, n, r])


def _make_dataset(spec: ExperimentSpec, beta_star: int, n: int, r: int) -> Dataset:
    rng = _replication_rng(spec, beta_star, n, r)
    design = DesignSpec(spec.design, spec.q, n)
    points = gen_design(design, rng)
    errors = sample_errors(spec.error, n, rng)
    return make_sample(points, spec.model, errors)


def evaluation_grid(q: int, points_per_axis: int) -> np.ndarray:
    """Equidistant lattice on [0,1]^q including the boundary, (N^q, q).

    A single point per axis collapses to the cube center, so a one-point grid
    evaluation coincides with the center-point evaluation.
    """
    if points_per_axis == 1:
        return np.full((1, q), 0.5)
    axis = np.linspace(0.0, 1.0, points_per_axis)
    mesh = np.meshgrid(*([axis] * q), indexing="ij")
    return np.stack([g.ravel(order="F") for g in mesh], axis=1)


def _fit_config(spec: ExperimentSpec, beta_star: int, h: float) -> EstimatorConfig:
    return EstimatorConfig(
        beta_star=beta_star,
        h=h,
        fallback=spec.fallback,
        empty_window=spec.empty_window,
    )


def _center_task(args) -> tuple[float, str]:
    spec, beta_star, n, r = args
    data = _make_dataset(spec, beta_star, n, r)
    h = resolve_bandwidth(spec.bandwidth, n, spec.q, beta_star)
    center = np.full(spec.q, 0.5)
    result = fit_at(data, center, _fit_config(spec, beta_star, h))
    truth = eval_boundary(spec.model, center)
    return (result.value - truth) ** 2, result.status


def _grid_task(args) -> tuple[float, str]:
    spec, beta_star, n, r = args
    data = _make_dataset(spec, beta_star, n, r)
    h = resolve_bandwidth(spec.bandwidth, n, spec.q, beta_star)
    cfg = _fit_config(spec, beta_star, h)
    grid = evaluation_grid(spec.q, spec.grid_points_per_axis)
    truth = eval_boundary(spec.model, grid)
    sq_sum = 0.0
    worst = "exact"
    for point, g_true in zip(grid, truth):
        result = fit_at(data, point, cfg)
        sq_sum += (result.value - g_true) ** 2
        if result.status == "degraded":
            worst = "degraded"
        elif result.status == "expanded" and worst == "exact":
            worst = "expanded"
    return sq_sum / grid.shape[0], worst


def _sup_error_task(args) -> float:
    spec, beta_star, n, r, grid_size = args
    data = _make_dataset(spec, beta_star, n, r)
    h = resolve_bandwidth(spec.bandwidth, n, spec.q, beta_star)
    cfg = _fit_config(spec, beta_star, h)
    grid = evaluation_grid(spec.q, grid_size)
    truth = eval_boundary(spec.model, grid)
    worst = 0.0
    for point, g_true in zip(grid, truth):
        result = fit_at(data, point, cfg)
        worst = max(worst, abs(result.value - g_true))
    return worst


def _adaptive_task(args) -> AdaptiveResult:
    spec, beta_star, n, r, cfg = args
    data = _make_dataset(spec, beta_star, n, r)
    return adaptive_bandwidth(data, beta_star, cfg)


def _run_tasks(task_fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [task_fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task_fn, tasks, chunksize=chunk))


def _identify(task_fn, tasks, workers, label_fn):
    """Run tasks, re-raising any failure with the offending cell attached."""
    try:
        return _run_tasks(task_fn, tasks, workers)
    except (ValueError, RuntimeError) as err:
        raise type(err)(f"{label_fn()}: {err}") from err


def _aggregate(results: Iterable[tuple[float, str]], replications: int) -> CellResult:
    values = np.array([r[0] for r in results])
    statuses = [r[1] for r in results]
    stderr = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return CellResult(
        mse=float(values.mean()),
        mc_stderr=stderr,
        replications=replications,
        n_exact=statuses.count("exact"),
        n_degraded=statuses.count("degraded"),
        n_expanded=statuses.count("expanded"),
    )


def run_mse_center(spec: ExperimentSpec, workers: int | None = None) -> ResultTable:
    """Center-point MSE per cell: mean of (ghat(0.5,...) - g(0.5,...))^2."""
    if spec.evaluation != "center":
        raise ValueError("run_mse_center needs evaluation='center'")
    workers = default_workers() if workers is None else workers
    cells = {}
    for beta_star in spec.beta_star_list:
        for n in spec.n_list:
            tasks = [(spec, beta_star, n, r) for r in range(spec.replications)]
            results = _identify(
                _center_task, tasks, workers,
                lambda: f"cell (beta_star={beta_star}, n={n})",
            )
            cells[(beta_star, n)] = _aggregate(results, spec.replications)
    return ResultTable(cells)


def run_mse_grid(spec: ExperimentSpec, workers: int | None = None) -> ResultTable:
    """Grid-mean MSE per cell: replication average of per-grid-point MSE.

    A replication's status tally is its worst fit ("degraded" over "expanded"
    over "exact"), so tallies still sum to the replication count.
    """
    if spec.evaluation != "grid":
        raise ValueError("run_mse_grid needs evaluation='grid'")
    workers = default_workers() if workers is None else workers
    cells = {}
    for beta_star in spec.beta_star_list:
        for n in spec.n_list:
            tasks = [(spec, beta_star, n, r) for r in range(spec.replications)]
            results = _identify(
                _grid_task, tasks, workers,
                lambda: f"cell (beta_star={beta_star}, n={n})",
            )
            cells[(beta_star, n)] = _aggregate(results, spec.replications)
    return ResultTable(cells)


@dataclass(frozen=True)
class RateStudyResult:
    """Log-log slope of median sup-error against sample size."""

    beta_star: int
    alpha: float
    beta: float
    n_list: tuple[int, ...]
    median_sup_errors: tuple[float, ...]
    slope: float
    expected_slope: float


def run_rate_study(
    spec: ExperimentSpec,
    eval_grid_size: int = 33,
    workers: int | None = None,
) -> RateStudyResult:
    """Empirical convergence rate under the balanced bandwidth rule.

    Per sample size, takes the median over replications of the max absolute
    error over an evaluation grid, then regresses log(median) on log(n). The
    theoretical comparison value is -beta/(alpha*beta + q).
    """
    if spec.bandwidth.kind != "balanced":
        raise ValueError("rate study needs the balanced bandwidth rule")
    if len(spec.n_list) < 4:
        raise ValueError("rate study needs at least 4 sample sizes")
    if len(spec.beta_star_list) != 1:
        raise ValueError("rate study runs one beta_star at a time")
    if sorted(spec.n_list) != list(spec.n_list):
        raise ValueError("n_list must be increasing")
    workers = default_workers() if workers is None else workers
    beta_star = spec.beta_star_list[0]
    medians = []
    for n in spec.n_list:
        tasks = [
            (spec, beta_star, n, r, eval_grid_size) for r in range(spec.replications)
        ]
        sups = _identify(
            _sup_error_task, tasks, workers, lambda: f"rate cell n={n}"
        )
        medians.append(float(np.median(sups)))
    slope = float(
        np.polyfit(np.log(np.asarray(spec.n_list, float)), np.log(medians), 1)[0]
    )
    alpha, beta = spec.bandwidth.alpha, spec.bandwidth.beta
    return RateStudyResult(
        beta_star=beta_star,
        alpha=alpha,
        beta=beta,
        n_list=spec.n_list,
        median_sup_errors=tuple(medians),
        slope=slope,
        expected_slope=-beta / (alpha * beta + spec.q),
    )


@dataclass(frozen=True)
class AdaptiveRun:
    n: int
    replication: int
    result: AdaptiveResult


def run_adaptive(
    spec: ExperimentSpec, cfg: AdaptiveConfig, workers: int | None = None
) -> list[AdaptiveRun]:
    """Ladder-selected bandwidth and diagnostics for every replication."""
    if len(spec.beta_star_list) != 1:
        raise ValueError("adaptive runs use one beta_star at a time")
    workers = default_workers() if workers is None else workers
    beta_star = spec.beta_star_list[0]
    runs = []
    for n in spec.n_list:
        tasks = [(spec, beta_star, n, r, cfg) for r in range(spec.replications)]
        results = _identify(
            _adaptive_task, tasks, workers, lambda: f"adaptive cell n={n}"
        )
        runs.extend(
            AdaptiveRun(n=n, replication=r, result=res)
            for r, res in enumerate(results)
        )
    return runs


# ---------------------------------------------------------------------------
# output files


def write_result_csv(table: ResultTable, path) -> None:
    with open(path, "w") as fh:
        fh.write(RESULT_CSV_HEADER + "\n")
        for row in table.rows():
            fh.write(
                f"{row['beta_star']},{row['n']},{row['mse']!r},{row['mc_stderr']!r},"
                f"{row['n_exact']},{row['n_degraded']},{row['n_expanded']}\n"
            )


def _spec_echo(spec: ExperimentSpec) -> dict:
    echo = asdict(spec)
    echo["error"] = {"kind": spec.error.kind, "alpha": spec.error.alpha}
    echo["model"] = {"g_id": spec.model.g_id}
    return echo


def write_result_json(table: ResultTable, spec: ExperimentSpec, path) -> None:
    payload = {
        "experiment": _spec_echo(spec),
        "master_seed": spec.master_seed,
        "results": table.rows(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_adaptive_csv(runs: list[AdaptiveRun], path) -> None:
    with open(path, "w") as fh:
        fh.write("n,replication,k_hat,h_selected,alpha_hat,trigger_k,trigger_l\n")
        for run in runs:
            res = run.result
            alpha = "" if res.alpha_hat is None else repr(res.alpha_hat)
            tk, tl = ("", "") if res.trigger is None else res.trigger
            fh.write(
                f"{run.n},{run.replication},{res.k_hat},{res.h_selected!r},{alpha},{tk},{tl}\n"
            )


def write_adaptive_diagnostics_csv(result: AdaptiveResult, path) -> None:
    """Per-rung ladder table: k, h_k, zeta_k, max-grid delta to the next fit."""
    with open(path, "w") as fh:
        fh.write("k,h_k,zeta_k,max_delta_next\n")
        for row in result.diagnostics_rows():
            fh.write(
                f"{row['k']},{row['h_k']!r},{row['zeta_k']!r},{row['max_delta_next']!r}\n"
            )


# ---------------------------------------------------------------------------
# experiment config files: "key = value" lines, '#' comments


_CONFIG_KEYS = {
    "q", "n", "beta_star", "replications", "seed", "design", "error", "model",
    "bandwidth", "evaluation", "fallback", "empty_window",
    "rate_grid", "adaptive_s", "adaptive_rho", "adaptive_constant",
    "adaptive_grid", "adaptive_hill_order",
}


def parse_config(text: str) -> dict[str, str]:
    """Raw key/value pairs from config text; unknown keys are rejected."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        out[key] = value
    return out


def _int_list(value: str, key: str) -> tuple[int, ...]:
    try:
        return tuple(int(part.strip()) for part in value.split(","))
    except ValueError as err:
        raise ConfigError(f"{key}: expected comma-separated integers, got {value!r}") from err


def _parse_error(value: str) -> ErrorSpec:
    if value == "exponential":
        return ErrorSpec("exponential_unit")
    if value == "zero":
        return ErrorSpec("zero")
    if value.startswith("weibull:"):
        try:
            return ErrorSpec("weibull", alpha=float(value.split(":", 1)[1]))
        except ValueError as err:
            raise ConfigError(f"error: bad weibull shape in {value!r}") from err
    raise ConfigError(f"error: expected 'exponential' or 'weibull:<alpha>', got {value!r}")


def _parse_bandwidth(value: str) -> BandwidthRule:
    if value == "simulation":
        return BandwidthRule("simulation")
    if value == "adaptive":
        return BandwidthRule("adaptive")
    if value.startswith("fixed:"):
        try:
            return BandwidthRule("fixed", h=float(value.split(":", 1)[1]))
        except ValueError as err:
            raise ConfigError(f"bandwidth: bad fixed value in {value!r}") from err
    if value.startswith("balanced:"):
        parts = value.split(":", 1)[1].split(",")
        if len(parts) != 2:
            raise ConfigError(f"bandwidth: expected 'balanced:<alpha>,<beta>', got {value!r}")
        try:
            return BandwidthRule("balanced", alpha=float(parts[0]), beta=float(parts[1]))
        except ValueError as err:
            raise ConfigError(f"bandwidth: bad balanced parameters in {value!r}") from err
    raise ConfigError(
        f"bandwidth: expected simulation | fixed:<h> | balanced:<a>,<b> | adaptive, got {value!r}"
    )


def build_experiment_spec(cfg: dict[str, str]) -> ExperimentSpec:
    """Assemble an ExperimentSpec from parsed config pairs."""
    for key in ("q", "n", "beta_star", "replications", "seed"):
        if key not in cfg:
            raise ConfigError(f"missing required key {key!r}")
    evaluation = cfg.get("evaluation", "center")
    grid_n = 20
    if evaluation.startswith("grid"):
        if ":" in evaluation:
            try:
                grid_n = int(evaluation.split(":", 1)[1])
            except ValueError as err:
                raise ConfigError(f"evaluation: bad grid size in {evaluation!r}") from err
        evaluation = "grid"
    elif evaluation != "center":
        raise ConfigError(f"evaluation: expected 'center' or 'grid:<N>', got {evaluation!r}")
    model = cfg.get("model", "sine_sum")
    if model not in ("sine_sum", "cubic_1d"):
        raise ConfigError(f"model: expected 'sine_sum' or 'cubic_1d', got {model!r}")
    try:
        return ExperimentSpec(
            q=int(cfg["q"]),
            n_list=_int_list(cfg["n"], "n"),
            beta_star_list=_int_list(cfg["beta_star"], "beta_star"),
            replications=int(cfg["replications"]),
            master_seed=int(cfg["seed"]),
            design=cfg.get("design", "random_uniform"),
            error=_parse_error(cfg.get("error", "exponential")),
            model=ModelSpec(model),
            bandwidth=_parse_bandwidth(cfg.get("bandwidth", "simulation")),
            evaluation=evaluation,
            grid_points_per_axis=grid_n,
            fallback=cfg.get("fallback", "degrade_degree"),
            empty_window=cfg.get("empty_window", "expand"),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def build_adaptive_config(cfg: dict[str, str], q: int) -> AdaptiveConfig:
    """AdaptiveConfig from the adaptive_* keys (grid size defaults to 25^1/q)."""
    grid_n = int(cfg.get("adaptive_grid", "25"))
    if grid_n < 1:
        raise ConfigError("adaptive_grid must be >= 1")
    grid = evaluation_grid(q, grid_n) if grid_n > 1 else np.full((1, q), 0.5)
    hill_order = cfg.get("adaptive_hill_order")
    try:
        return AdaptiveConfig(
            grid=grid,
            s=float(cfg.get("adaptive_s", "0.5")),
            rho=float(cfg.get("adaptive_rho", "1.25")),
            threshold_constant=float(cfg.get("adaptive_constant", "1.0")),
            hill_order=int(hill_order) if hill_order is not None else None,
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err
