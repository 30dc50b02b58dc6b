"""Cheap bootstrap confidence intervals for (A)SGD solutions.

Two constructions, both exploiting the asymptotic independence of the
original run's error and the resample runs' errors, which makes a Student-t
pivot valid at very small replicate counts:

- ``cofb``: rerun (A)SGD on B independent with-replacement resamples of the
  dataset; interval centered at the original output with a t_{B-1} multiplier
  on the replicate spread about the replicate mean.
- ``conb``: one data pass driving B+1 parallel averaged-SGD threads, the
  extra B threads multiplying each gradient by a fresh Exp(1) weight;
  interval centered at the unweighted thread's average with a t_B multiplier
  on the thread spread about that center.

Replicates with identical outputs yield zero-width intervals, not errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import islice
from typing import Iterable, NamedTuple

import numpy as np

from .engine import StepSchedule, exponential_weights, run_trajectory, _DIVERGENCE_LIMIT
from .errors import (
    DegeneratePivotError,
    DivergenceError,
    EmptyInputError,
    InsufficientReplicatesError,
    ParameterDomainError,
)
from .problems import Dataset, Objective
from .stats import sample_sd_about_center, sample_sd_about_mean, two_sided_multiplier

__all__ = [
    "IntervalSet",
    "ThreadOutputs",
    "resample_with_replacement",
    "run_weighted_threads",
    "cofb",
    "conb",
    "pivot_statistic",
]

_MODES = ("sgd", "asgd")


@dataclass(frozen=True)
class IntervalSet:
    """Per-coordinate symmetric confidence intervals.

    Interval i is [centers[i] - half_widths[i], centers[i] + half_widths[i]]
    at nominal coverage ``level``. ``method`` tags the construction; ``B`` and
    ``n`` record replicate count and sample size where meaningful.
    """

    centers: np.ndarray
    half_widths: np.ndarray
    level: float
    method: str
    B: int | None = None
    n: int | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.centers, dtype=float))
        h = np.atleast_1d(np.asarray(self.half_widths, dtype=float))
        if c.shape != h.shape or c.ndim != 1:
            raise ParameterDomainError(
                f"centers {c.shape} and half_widths {h.shape} must be matching vectors"
            )
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(h)):
            raise ParameterDomainError("intervals must be finite")
        if np.any(h < 0):
            raise ParameterDomainError("half-widths must be non-negative")
        if not 0.0 < self.level < 1.0:
            raise ParameterDomainError(f"level must lie in (0, 1), got {self.level}")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "half_widths", h)

    @property
    def dim(self) -> int:
        return self.centers.shape[0]

    @property
    def lower(self) -> np.ndarray:
        return self.centers - self.half_widths

    @property
    def upper(self) -> np.ndarray:
        return self.centers + self.half_widths

    @property
    def lengths(self) -> np.ndarray:
        return 2.0 * self.half_widths

    def contains(self, x) -> np.ndarray:
        """Entrywise indicator of x_i inside interval i (endpoints count).

        Evaluated against the same computed bounds that ``lower`` and
        ``upper`` expose, so the endpoints are inside by construction.
        """
        x = np.asarray(x, dtype=float)
        return (x >= self.lower) & (x <= self.upper)


class ThreadOutputs(NamedTuple):
    """Averages from one weighted multi-thread pass."""

    x_out: np.ndarray        # average of the unit-weight thread
    thread_avgs: np.ndarray  # (B, d) averages of the weighted threads
    n_steps: int


def resample_with_replacement(data: Dataset, rng) -> Dataset:
    """A same-size resample of ``data``, indices i.i.d. uniform; input unchanged."""
    n = len(data)
    if n < 1:
        raise EmptyInputError("cannot resample an empty dataset")
    return data.subset(rng.integers(0, n, size=n))


def _iter_pairs(stream) -> Iterable:
    if isinstance(stream, Dataset):
        return zip(stream.features, stream.responses)
    return iter(stream)


def run_weighted_threads(
    obj: Objective,
    data_stream,
    schedule: StepSchedule,
    B: int,
    x0=None,
    rng=None,
    weight_kind: str = "exponential",
    block_size: int = 4096,
) -> ThreadOutputs:
    """Advance B+1 averaged-SGD threads in lockstep over one data pass.

    Thread 0 applies unit weights; threads 1..B multiply each gradient by an
    i.i.d. Exp(1) draw (or unit, with ``weight_kind="unit"``, for
    diagnostics). All threads see the observations in the same order; each
    observation is consumed exactly once. Weights are drawn per block of
    arrivals, so the draw sequence depends only on ``rng`` and B.
    """
    if B < 1:
        raise InsufficientReplicatesError(f"need B >= 1 threads, got {B}")
    if weight_kind not in ("unit", "exponential"):
        raise ParameterDomainError(f"weight kind must be unit or exponential, got {weight_kind!r}")
    if weight_kind == "exponential" and rng is None:
        raise ParameterDomainError("exponential weights need an rng")
    d = obj.dim
    if x0 is None:
        x0 = np.zeros(d)
    else:
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (d,):
            raise ParameterDomainError(f"x0 shape {x0.shape} does not match d={d}")

    X = np.tile(x0, (B + 1, 1))
    sums = np.zeros_like(X)
    w = np.empty(B + 1)
    w[0] = 1.0
    gradient_multi = obj.gradient_multi
    t = 0
    pairs = _iter_pairs(data_stream)
    # Overflow in the divergence probe is the detection signal, not a
    # warning-worthy anomaly.
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            block = list(islice(pairs, block_size))
            if not block:
                break
            if weight_kind == "exponential":
                wblock = exponential_weights((B, len(block)), rng)
            else:
                wblock = np.ones((B, len(block)))
            steps = schedule.step_sizes(len(block), first=t + 1)
            for j, (a, b) in enumerate(block):
                g = gradient_multi(X, (a, b))
                if not np.vdot(g, g) < _DIVERGENCE_LIMIT:
                    raise DivergenceError(step=t + j + 1)
                w[1:] = wblock[:, j]
                X -= (steps[j] * w)[:, None] * g
                sums += X
            t += len(block)
    if t == 0:
        raise EmptyInputError("data stream yielded no observations")
    sums /= t
    return ThreadOutputs(x_out=sums[0], thread_avgs=sums[1:], n_steps=t)


def cofb(
    obj: Objective,
    data: Dataset,
    schedule: StepSchedule,
    B: int,
    x0=None,
    mode: str = "asgd",
    level: float = 0.95,
    rng=None,
) -> IntervalSet:
    """Offline cheap bootstrap interval from B resample reruns.

    Runs the original trajectory on ``data`` as given, then B trajectories on
    independent with-replacement resamples, all from the same ``x0``. The
    output is x_avg in "asgd" mode and the final iterate in "sgd" mode (the
    latter expects a 1/t schedule). Replicate b draws from its own child
    stream of ``rng``, so replicates are individually reproducible.
    """
    if B < 2:
        raise InsufficientReplicatesError(f"cofb needs B >= 2 resamples, got {B}")
    if mode not in _MODES:
        raise ParameterDomainError(f"mode must be one of {_MODES}, got {mode!r}")
    if rng is None:
        raise ParameterDomainError("cofb needs an rng for resampling")

    def output(run):
        return run.x_avg if mode == "asgd" else run.x_final

    x_out = output(run_trajectory(obj, data, schedule, x0))
    replicate_outputs = np.empty((B, data.d))
    for b, child in enumerate(rng.spawn(B)):
        replicate = resample_with_replacement(data, child)
        replicate_outputs[b] = output(run_trajectory(obj, replicate, schedule, x0))
    spread = sample_sd_about_mean(replicate_outputs)
    half = two_sided_multiplier(level, df=B - 1) * spread
    return IntervalSet(x_out, half, level, method=f"cofb_{mode}", B=B, n=len(data))


def conb(
    obj: Objective,
    data_stream,
    schedule: StepSchedule,
    B: int,
    x0=None,
    level: float = 0.95,
    rng=None,
    mode: str = "asgd",
    weight_kind: str = "exponential",
) -> IntervalSet:
    """Online cheap bootstrap interval from one single-pass run.

    Maintains B+1 parallel averaged threads (see ``run_weighted_threads``);
    the interval is centered at the unit-weight thread's average with spread
    taken about that center and a t_B multiplier. Averaged output only:
    ``mode="sgd"`` is rejected, final-iterate intervals are not supported
    by this construction.
    """
    if B < 1:
        raise InsufficientReplicatesError(f"conb needs B >= 1 threads, got {B}")
    if mode != "asgd":
        raise ParameterDomainError(
            f"conb supports averaged output only, got mode {mode!r}"
        )
    out = run_weighted_threads(
        obj, data_stream, schedule, B, x0=x0, rng=rng, weight_kind=weight_kind
    )
    spread = sample_sd_about_center(out.thread_avgs, out.x_out)
    half = two_sided_multiplier(level, df=B) * spread
    return IntervalSet(out.x_out, half, level, method="conb", B=B, n=out.n_steps)


def pivot_statistic(x_out_i: float, x_star_i: float, s_i: float) -> float:
    """The studentized error (x_out_i - x_star_i) / s_i.

    Asymptotically t_{B-1} for cofb and t_B for conb; a test hook, not part
    of interval construction.
    """
    s_i = float(s_i)
    if s_i == 0.0:
        raise DegeneratePivotError("spread is zero; pivot undefined")
    if s_i < 0 or not np.isfinite(s_i):
        raise ParameterDomainError(f"spread must be positive and finite, got {s_i}")
    return (float(x_out_i) - float(x_star_i)) / s_i
