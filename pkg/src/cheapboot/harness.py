"""Monte Carlo experiment harness: configs, trial execution, aggregation,
sensitivity sweeps, and report persistence.

A cell is one (problem, method, scale) combination; ``run_cell`` executes its
independent trials, each on a fresh dataset derived from (master_seed, trial),
and pools per-coordinate coverage indicators and interval lengths across
trials and coordinates. Results are deterministic given the config, including
under multi-worker execution, because every trial owns seeds derived from its
own index.
"""

from __future__ import annotations

import dataclasses
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .baselines import (
    HiGradArchitecture,
    batch_layout,
    batch_means_interval,
    default_higrad_architecture,
    delta_interval,
    higrad_interval,
    online_bootstrap_interval,
)
from .cheap import IntervalSet, cofb, conb
from .defaults import ETA_RANGE
from .engine import StepSchedule, run_trajectory
from .errors import CheapbootError, ConfigError, ParameterDomainError
from .problems import (
    SIGMA_KINDS,
    estimate_logistic_ground_truth,
    gen_linear,
    gen_logistic,
    make_sigma,
    objective_for,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "METHODS",
    "run_cell",
    "run_one_trial",
    "sensitivity_sweep",
    "emit_report",
    "parse_reports",
    "seed_derive",
    "table_configs",
    "REPORT_COLUMNS",
]

METHODS = (
    "cofb_asgd",
    "cofb_sgd",
    "conb",
    "delta",
    "batch_means",
    "online_bootstrap",
    "higrad",
)
_METHODS_WITH_B = {
    "cofb_asgd": 2,  # minimum B per method
    "cofb_sgd": 2,
    "conb": 1,
    "online_bootstrap": 1,
}

REPORT_COLUMNS = (
    "problem",
    "method",
    "d",
    "n",
    "sigma",
    "eta",
    "alpha",
    "B",
    "level",
    "trials",
    "seed",
    "coverage",
    "coverage_se",
    "mean_length",
    "length_se",
    "wall_time_s",
)

JSON_SCHEMA_VERSION = 1


def seed_derive(master_seed: int, labels=()) -> np.random.Generator:
    """An independent generator for (master_seed, *labels).

    Label tuples are collision-resistant: streams differing in any label, or
    in label count, are statistically independent. Non-negative integer
    labels only.
    """
    key = tuple(int(v) for v in labels)
    if any(v < 0 for v in key):
        raise ParameterDomainError(f"labels must be non-negative, got {key}")
    seq = np.random.SeedSequence(int(master_seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment cell: problem, method, scale, and execution knobs."""

    problem: str
    method: str
    d: int
    n: int
    eta: float
    sigma: str = "identity"
    noise_sd: float = 1.0
    alpha: float = 0.501
    B: int | None = None
    M: int | None = None
    higrad_splits: tuple[int, ...] | None = None
    higrad_lengths: tuple[int, ...] | None = None
    level: float = 0.95
    trials: int = 300
    master_seed: int = 0
    workers: int = 1

    def resolved_M(self) -> int:
        """Batch count: explicit M, else the closest integer to n^0.25."""
        if self.M is not None:
            return self.M
        return int(np.floor(self.n**0.25 + 0.5))

    def resolved_architecture(self) -> HiGradArchitecture:
        if self.higrad_splits is not None or self.higrad_lengths is not None:
            if self.higrad_splits is None or self.higrad_lengths is None:
                raise ConfigError("higrad_splits and higrad_lengths must be given together")
            return HiGradArchitecture(tuple(self.higrad_splits), tuple(self.higrad_lengths))
        return default_higrad_architecture(self.n)

    def validate(self) -> None:
        """Raise ConfigError on any inconsistency, before any trial runs."""
        if self.problem not in ("linear", "logistic"):
            raise ConfigError(f"problem must be linear or logistic, got {self.problem!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.sigma not in SIGMA_KINDS:
            raise ConfigError(f"sigma must be one of {SIGMA_KINDS}, got {self.sigma!r}")
        if self.d < 2:
            raise ConfigError(f"d must be >= 2, got {self.d}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"level must lie in (0, 1), got {self.level}")
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.noise_sd < 0:
            raise ConfigError(f"noise_sd must be >= 0, got {self.noise_sd}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.master_seed < 0:
            raise ConfigError(f"master_seed must be >= 0, got {self.master_seed}")

        if self.method == "cofb_sgd":
            if self.alpha != 1.0:
                raise ConfigError(
                    "cofb_sgd resamples the final iterate and runs the 1/t "
                    f"schedule; set alpha=1.0 (got {self.alpha})"
                )
        elif not 0.5 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in (0.5, 1], got {self.alpha}")

        min_b = _METHODS_WITH_B.get(self.method)
        if min_b is None:
            if self.B is not None:
                raise ConfigError(f"method {self.method} does not take B")
        else:
            if self.B is None:
                raise ConfigError(f"method {self.method} requires B")
            if self.B < min_b:
                raise ConfigError(f"method {self.method} requires B >= {min_b}, got {self.B}")

        if self.method == "batch_means":
            if self.alpha >= 1.0:
                raise ConfigError("batch_means requires alpha < 1")
            try:
                batch_layout(self.n, self.alpha, self.resolved_M())
            except CheapbootError as exc:
                raise ConfigError(f"batch layout infeasible: {exc}") from exc
        elif self.M is not None:
            raise ConfigError(f"method {self.method} does not take M")

        if self.method == "higrad":
            try:
                arch = self.resolved_architecture()
            except CheapbootError as exc:
                raise ConfigError(f"higrad architecture invalid: {exc}") from exc
            if arch.data_budget() > self.n:
                raise ConfigError(
                    f"higrad architecture needs {arch.data_budget()} observations "
                    f"but n={self.n}"
                )
        elif self.higrad_splits is not None or self.higrad_lengths is not None:
            raise ConfigError(f"method {self.method} does not take a higrad architecture")


@dataclass(frozen=True)
class ExperimentReport:
    """Pooled coverage/length statistics for one cell, plus the config echo."""

    coverage_mean: float
    coverage_se: float
    mean_length: float
    length_se: float
    wall_time_s: float
    per_coordinate_coverage: tuple[float, ...]
    config: ExperimentConfig

    def __post_init__(self):
        if not 0.0 <= self.coverage_mean <= 1.0:
            raise ParameterDomainError(f"coverage {self.coverage_mean} outside [0, 1]")
        if self.mean_length < 0:
            raise ParameterDomainError(f"mean length {self.mean_length} negative")

    def to_record(self) -> dict:
        """Flatten into the fixed report schema (see REPORT_COLUMNS)."""
        c = self.config
        return {
            "problem": c.problem,
            "method": c.method,
            "d": c.d,
            "n": c.n,
            "sigma": c.sigma,
            "eta": c.eta,
            "alpha": c.alpha,
            "B": c.B,
            "level": c.level,
            "trials": c.trials,
            "seed": c.master_seed,
            "coverage": self.coverage_mean,
            "coverage_se": self.coverage_se,
            "mean_length": self.mean_length,
            "length_se": self.length_se,
            "wall_time_s": self.wall_time_s,
        }


def run_one_trial(config: ExperimentConfig, trial: int) -> tuple[np.ndarray, np.ndarray]:
    """One independent trial: fresh dataset, one interval, per-coordinate
    coverage indicators and lengths. Streams derive from (master_seed, trial)."""
    data_rng = seed_derive(config.master_seed, (trial, 0))
    method_rng = seed_derive(config.master_seed, (trial, 1))
    if config.problem == "linear":
        data, truth = gen_linear(
            config.n, config.d, config.sigma, config.noise_sd, data_rng
        )
    else:
        data, truth = gen_logistic(config.n, config.d, config.sigma, data_rng)
    obj = objective_for(config.problem, config.d)
    schedule = StepSchedule(config.eta, config.alpha)
    level = config.level

    method = config.method
    if method == "cofb_asgd":
        interval = cofb(obj, data, schedule, config.B, mode="asgd", level=level, rng=method_rng)
    elif method == "cofb_sgd":
        interval = cofb(obj, data, schedule, config.B, mode="sgd", level=level, rng=method_rng)
    elif method == "conb":
        interval = conb(obj, data, schedule, config.B, level=level, rng=method_rng)
    elif method == "delta":
        run = run_trajectory(obj, data, schedule, accumulate_delta=True)
        interval = delta_interval(run, level)
    elif method == "batch_means":
        layout = batch_layout(config.n, config.alpha, config.resolved_M())
        run = run_trajectory(obj, data, schedule, record_iterates=True)
        interval = batch_means_interval(run.iterates, layout, level)
    elif method == "online_bootstrap":
        interval = online_bootstrap_interval(
            obj, data, schedule, config.B, level=level, rng=method_rng
        )
    elif method == "higrad":
        interval = higrad_interval(
            obj, data, schedule, config.resolved_architecture(), level=level
        )
    else:
        raise ConfigError(f"unknown method {method!r}")

    return interval.contains(truth.x_star), interval.lengths


_curvature_floor_cache: dict[tuple[str, str, int], float] = {}


def _curvature_floor(problem: str, sigma: str, d: int) -> float:
    """Smallest eigenvalue of the population curvature matrix (estimated by
    Monte Carlo for logistic regression)."""
    key = (problem, sigma, d)
    if key not in _curvature_floor_cache:
        if problem == "linear":
            from .problems import CovarianceFamily

            G = make_sigma(CovarianceFamily(sigma, d))
        else:
            # population property, so a fixed diagnostic seed is appropriate
            rng = np.random.Generator(np.random.PCG64(20230817))
            G = estimate_logistic_ground_truth(d, sigma, rng=rng, n_draws=10**6).G
        _curvature_floor_cache[key] = float(np.linalg.eigvalsh(G)[0])
    return _curvature_floor_cache[key]


def _warn_step_condition(config: ExperimentConfig) -> None:
    if config.method != "cofb_sgd":
        return
    floor = _curvature_floor(config.problem, config.sigma, config.d)
    if config.eta * floor <= 0.5:
        warnings.warn(
            f"cofb_sgd step condition eta * l > 1/2 not met: eta={config.eta}, "
            f"smallest curvature eigenvalue ~ {floor:.4g} "
            f"(product {config.eta * floor:.4g}); final-iterate theory does not "
            "apply, intervals may be unreliable",
            stacklevel=3,
        )


def run_cell(config: ExperimentConfig) -> ExperimentReport:
    """Execute all trials of one cell and pool the results.

    Coverage is the mean of per-coordinate indicators pooled over trials and
    coordinates, with the binomial standard error sqrt(p(1-p)/(trials*d));
    per-coordinate coverage is also retained. Deterministic given the config
    (wall time aside), whatever the worker count.
    """
    config.validate()
    _warn_step_condition(config)
    t0 = time.perf_counter()
    if config.workers > 1:
        chunk = max(1, config.trials // (config.workers * 8))
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(
                pool.map(partial(run_one_trial, config), range(config.trials), chunksize=chunk)
            )
    else:
        results = [run_one_trial(config, t) for t in range(config.trials)]
    wall = time.perf_counter() - t0

    covered = np.stack([r[0] for r in results])  # (trials, d) indicators
    lengths = np.stack([r[1] for r in results])
    count = covered.size
    p_hat = float(covered.mean())
    coverage_se = float(np.sqrt(p_hat * (1.0 - p_hat) / count))
    mean_length = float(lengths.mean())
    if count > 1:
        length_se = float(lengths.std(ddof=1) / np.sqrt(count))
    else:
        length_se = 0.0
    return ExperimentReport(
        coverage_mean=p_hat,
        coverage_se=coverage_se,
        mean_length=mean_length,
        length_se=length_se,
        wall_time_s=wall,
        per_coordinate_coverage=tuple(float(v) for v in covered.mean(axis=0)),
        config=config,
    )


def sensitivity_sweep(base: ExperimentConfig, eta_grid) -> list[ExperimentReport]:
    """Rerun one cell across initial step sizes; one report per grid point.

    Every eta must lie in the admissible tuning range [0.2, 0.7].
    """
    grid = [float(e) for e in eta_grid]
    if not grid:
        raise ConfigError("eta grid is empty")
    lo, hi = ETA_RANGE
    bad = [e for e in grid if not lo <= e <= hi]
    if bad:
        raise ConfigError(f"eta values {bad} outside the tuning range [{lo}, {hi}]")
    return [run_cell(dataclasses.replace(base, eta=e)) for e in grid]


# ---------------------------------------------------------------------------
# Report persistence


def _format_real(x: float) -> str:
    return f"{x:.17g}"


def emit_report(reports, format: str = "csv", path=None) -> str:
    """Serialize reports (one record per cell) to CSV or JSON.

    CSV uses the fixed header in REPORT_COLUMNS with reals at 17 significant
    digits; JSON wraps the same records with a schema version. Writes to
    ``path`` when given; returns the serialized text either way.
    """
    records = [r.to_record() for r in reports]
    if format == "csv":
        lines = [",".join(REPORT_COLUMNS)]
        for rec in records:
            row = []
            for col in REPORT_COLUMNS:
                val = rec[col]
                if val is None:
                    row.append("")
                elif isinstance(val, float):
                    row.append(_format_real(val))
                else:
                    row.append(str(val))
            lines.append(",".join(row))
        text = "\n".join(lines) + "\n"
    elif format == "json":
        text = json.dumps(
            {"schema_version": JSON_SCHEMA_VERSION, "records": records}, indent=2
        ) + "\n"
    else:
        raise ParameterDomainError(f"format must be csv or json, got {format!r}")
    if path is not None:
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"failed to write report to {path}: {exc}") from exc
    return text


_INT_COLUMNS = {"d", "n", "B", "trials", "seed"}
_REAL_COLUMNS = {
    "eta", "alpha", "level", "coverage", "coverage_se",
    "mean_length", "length_se", "wall_time_s",
}


def parse_reports(path) -> list[dict]:
    """Read records written by ``emit_report``; numerically exact round-trip."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        if doc.get("schema_version") != JSON_SCHEMA_VERSION:
            raise ParameterDomainError(
                f"unsupported report schema version {doc.get('schema_version')!r}"
            )
        return doc["records"]
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split(",")
    if tuple(header) != REPORT_COLUMNS:
        raise ParameterDomainError(f"unexpected report header {header}")
    records = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rec = {}
        for col, raw in zip(header, parts):
            if raw == "":
                rec[col] = None
            elif col in _INT_COLUMNS:
                rec[col] = int(raw)
            elif col in _REAL_COLUMNS:
                rec[col] = float(raw)
            else:
                rec[col] = raw
        records.append(rec)
    return records


# ---------------------------------------------------------------------------
# Reproduction grids


def table_configs(
    problem: str = "linear",
    full: bool = False,
    master_seed: int = 0,
    workers: int = 1,
    trials: int | None = None,
    dims: tuple[int, ...] | None = None,
) -> list[ExperimentConfig]:
    """The reproduction grid for one problem: methods x sigma families x d.

    Desk scale (default) runs n=1e4 with 300 trials and d in {2, 5}; the full
    scale runs n=1e5 with 500 trials and d in {5, 20, 200}. Step sizes come
    from the pinned defaults table.
    """
    from .defaults import default_eta

    if full:
        n, n_trials, ds = 10**5, 500, (5, 20, 200)
    else:
        n, n_trials, ds = 10**4, 300, (2, 5)
    if trials is not None:
        n_trials = trials
    if dims is not None:
        ds = dims

    rows: list[tuple[str, int | None]] = [
        ("delta", None),
        ("batch_means", None),
        ("online_bootstrap", 10),
        ("online_bootstrap", 100),
        ("higrad", None),
        ("cofb_asgd", 3),
        ("cofb_asgd", 5),
        ("cofb_asgd", 10),
        ("cofb_sgd", 3),
        ("cofb_sgd", 5),
        ("cofb_sgd", 10),
        ("conb", 3),
        ("conb", 5),
        ("conb", 10),
    ]
    configs = []
    for sigma in SIGMA_KINDS:
        for d in ds:
            for method, B in rows:
                configs.append(
                    ExperimentConfig(
                        problem=problem,
                        method=method,
                        d=d,
                        n=n,
                        eta=default_eta(problem, method, sigma),
                        sigma=sigma,
                        alpha=1.0 if method == "cofb_sgd" else 0.501,
                        B=B,
                        trials=n_trials,
                        master_seed=master_seed,
                        workers=workers,
                    )
                )
    return configs
