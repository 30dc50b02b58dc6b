"""Benchmark interval constructions: delta method, batch means, online
bootstrap, and hierarchical thread splitting.

All emit the same ``IntervalSet`` as the cheap-bootstrap methods so the
harness can treat every method uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cheap import IntervalSet, _iter_pairs, run_weighted_threads
from .engine import _DIVERGENCE_LIMIT, EstimatorRun, StepSchedule
from .errors import (
    DivergenceError,
    InsufficientDataError,
    InsufficientReplicatesError,
    LayoutError,
    ParameterDomainError,
    SingularMatrixError,
)
from .problems import Dataset, Objective
from .stats import sample_sd_about_center, sample_sd_about_mean, two_sided_multiplier

__all__ = [
    "BatchLayout",
    "HiGradArchitecture",
    "batch_layout",
    "batch_means_interval",
    "delta_interval",
    "online_bootstrap_interval",
    "higrad_interval",
]


# ---------------------------------------------------------------------------
# Batch means


@dataclass(frozen=True)
class BatchLayout:
    """Iterate-index boundaries e_0 < e_1 < ... < e_M splitting a trajectory.

    Batch k (k = 1..M) covers iterate indices (e_{k-1}, e_k]; everything at
    or before e_0 is discarded as transient.
    """

    boundaries: tuple[int, ...]

    def __post_init__(self):
        e = tuple(int(v) for v in self.boundaries)
        if len(e) < 3:
            raise LayoutError(f"need at least 2 batches (3 boundaries), got {len(e)}")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise LayoutError(f"boundaries must be strictly increasing, got {e}")
        if e[0] < 0:
            raise LayoutError(f"boundaries must be non-negative, got e_0={e[0]}")
        object.__setattr__(self, "boundaries", e)

    @property
    def M(self) -> int:
        return len(self.boundaries) - 1

    @property
    def sizes(self) -> tuple[int, ...]:
        e = self.boundaries
        return tuple(b - a for a, b in zip(e, e[1:]))

    @property
    def span(self) -> int:
        """Total iterates covered, e_M - e_0."""
        return self.boundaries[-1] - self.boundaries[0]


def batch_layout(n: int, alpha: float, M: int) -> BatchLayout:
    """Increasing-size batch boundaries matched to the t^(-alpha) decay.

    With N = n^(1-alpha)/(M+1), boundary e_k is the closest integer to
    ((k+1)*N)^(1/(1-alpha)) for k = 0..M (ties round up). Batch sizes grow so
    each batch carries comparable weight despite the decaying step size.
    """
    if M < 2:
        raise ParameterDomainError(f"need M >= 2 batches, got {M}")
    if not 0.5 < alpha < 1.0:
        raise ParameterDomainError(
            f"alpha must lie in (0.5, 1); got {alpha} (the exponent 1/(1-alpha) "
            "is undefined at alpha=1)"
        )
    if n < 1:
        raise ParameterDomainError(f"need n >= 1, got {n}")
    N = n ** (1.0 - alpha) / (M + 1)
    power = 1.0 / (1.0 - alpha)
    bounds = [int(np.floor(((k + 1) * N) ** power + 0.5)) for k in range(M + 1)]
    if any(b <= a for a, b in zip(bounds, bounds[1:])):
        raise LayoutError(
            f"n={n} is too small for M={M} batches at alpha={alpha}: "
            f"boundaries {bounds} are not strictly increasing"
        )
    if bounds[-1] > n:
        raise LayoutError(f"final boundary {bounds[-1]} exceeds n={n}")
    return BatchLayout(tuple(bounds))


def batch_means_interval(iterates, layout: BatchLayout, level: float = 0.95) -> IntervalSet:
    """Normal-quantile intervals from the between-batch spread of iterates.

    ``iterates`` holds the full trajectory indexed by iterate number: row i is
    x_i, with row 0 = x_0, so it must extend at least to row e_M. The
    covariance estimate is V = (1/M) sum_k n_k (m_k - gm)(m_k - gm)^T with
    batch means m_k and the grand mean gm over (e_0, e_M]; the interval is
    gm_i +/- z * sqrt(V_ii / (e_M - e_0)), treating V as the covariance of
    the sqrt-scaled average over the covered window.
    """
    arr = np.asarray(iterates, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    e = layout.boundaries
    if arr.shape[0] < e[-1] + 1:
        raise LayoutError(
            f"trajectory has {arr.shape[0]} iterates but the layout needs index {e[-1]}"
        )
    csum = np.cumsum(arr, axis=0)

    def window_sum(lo, hi):  # sum of x_i for i in (lo, hi]
        return csum[hi] - csum[lo]

    sizes = np.asarray(layout.sizes, dtype=float)
    means = np.stack([window_sum(a, b) / (b - a) for a, b in zip(e, e[1:])])
    grand = window_sum(e[0], e[-1]) / layout.span
    dev = means - grand
    vhat = (dev * sizes[:, None]).T @ dev / layout.M
    half = two_sided_multiplier(level) * np.sqrt(np.diag(vhat) / layout.span)
    return IntervalSet(grand, half, level, method="batch_means", n=layout.span)


# ---------------------------------------------------------------------------
# Plug-in delta method


def delta_interval(run: EstimatorRun, level: float = 0.95) -> IntervalSet:
    """Normal-quantile intervals from the plug-in sandwich covariance.

    Uses the run's accumulated averages: curvature Gn and gradient outer
    product Sn, giving variance diag(Gn^-1 Sn Gn^-1)/n about the averaged
    iterate.
    """
    if run.hessian_avg is None or run.grad_outer_avg is None:
        raise ParameterDomainError(
            "run has no accumulators; rerun with accumulate_delta=True"
        )
    G = run.hessian_avg
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("accumulated curvature matrix is singular") from exc
    sandwich = np.linalg.solve(G, np.linalg.solve(G, run.grad_outer_avg).T).T
    half = two_sided_multiplier(level) * np.sqrt(np.diag(sandwich) / run.n_steps)
    return IntervalSet(run.x_avg, half, level, method="delta", n=run.n_steps)


# ---------------------------------------------------------------------------
# Online bootstrap (many exponentially weighted threads, normal quantile)


def online_bootstrap_interval(
    obj: Objective,
    data_stream,
    schedule: StepSchedule,
    B: int,
    x0=None,
    level: float = 0.95,
    rng=None,
    weight_kind: str = "exponential",
) -> IntervalSet:
    """Normal-quantile intervals from B exponentially weighted threads.

    Identical thread mechanics to ``conb`` (same seed and B reproduce the
    same thread outputs); differs in using the normal quantile rather than
    t_B, with B intended large (around 100).
    """
    if B < 1:
        raise InsufficientReplicatesError(f"need B >= 1 threads, got {B}")
    out = run_weighted_threads(
        obj, data_stream, schedule, B, x0=x0, rng=rng, weight_kind=weight_kind
    )
    spread = sample_sd_about_center(out.thread_avgs, out.x_out)
    half = two_sided_multiplier(level) * spread
    return IntervalSet(
        out.x_out, half, level, method="online_bootstrap", B=B, n=out.n_steps
    )


# ---------------------------------------------------------------------------
# Hierarchical split threads


@dataclass(frozen=True)
class HiGradArchitecture:
    """Branching plan: after segment i (length segment_lengths[i]), every
    active thread forks into splits[i] branches; leaves are thread outputs.

    splits = (B_1..B_K) and segment_lengths = (n_0..n_K); the thread count
    T = prod(B_i) must be at least 2.
    """

    splits: tuple[int, ...]
    segment_lengths: tuple[int, ...]

    def __post_init__(self):
        splits = tuple(int(v) for v in self.splits)
        lengths = tuple(int(v) for v in self.segment_lengths)
        if len(lengths) != len(splits) + 1:
            raise LayoutError(
                f"need one segment length per level plus the root: "
                f"{len(splits)} splits but {len(lengths)} lengths"
            )
        if any(s < 1 for s in splits):
            raise LayoutError(f"splits must be >= 1, got {splits}")
        if any(ln < 1 for ln in lengths):
            raise LayoutError(f"segment lengths must be >= 1, got {lengths}")
        if int(np.prod(splits)) < 2:
            raise LayoutError("need at least 2 leaf threads")
        object.__setattr__(self, "splits", splits)
        object.__setattr__(self, "segment_lengths", lengths)

    @property
    def n_threads(self) -> int:
        return int(np.prod(self.splits))

    def data_budget(self) -> int:
        """Observations consumed: n_0 + sum_i (prod_{j<=i} B_j) * n_i."""
        total = self.segment_lengths[0]
        threads = 1
        for b, ln in zip(self.splits, self.segment_lengths[1:]):
            threads *= b
            total += threads * ln
        return total


def default_higrad_architecture(n: int) -> HiGradArchitecture:
    """The ((2, 2), (n//7, n//7, n//7)) plan: two binary splits, equal
    segments, consuming 7*(n//7) <= n observations."""
    return HiGradArchitecture((2, 2), (n // 7, n // 7, n // 7))


def higrad_interval(
    obj: Objective,
    data_stream,
    schedule: StepSchedule,
    arch: HiGradArchitecture,
    x0=None,
    level: float = 0.95,
) -> IntervalSet:
    """t-quantile intervals from hierarchically split SGD threads.

    One root segment of n_0 steps runs from ``x0``; each fork copies the
    current iterate into B_i branches, every branch consuming n_i fresh
    observations from the shared stream (depth-first order). The step-size
    index continues along each root-to-leaf path, and a thread's output is
    the average of all iterates along its path. The interval is the mean of
    the T outputs +/- t_{T-1} * sd / sqrt(T), treating thread outputs as
    approximately exchangeable (correlation from shared segments is not
    modeled).
    """
    d = obj.dim
    if x0 is None:
        x0 = np.zeros(d)
    else:
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (d,):
            raise ParameterDomainError(f"x0 shape {x0.shape} does not match d={d}")

    pairs = _iter_pairs(data_stream)
    gradient = obj.gradient
    outputs: list[np.ndarray] = []

    def run_segment(x, t0, length):
        x = x.copy()
        total = np.zeros(d)
        steps = schedule.step_sizes(length, first=t0 + 1)
        # Overflow in the divergence probe is the detection signal.
        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(length):
                try:
                    a, b = next(pairs)
                except StopIteration:
                    raise InsufficientDataError(
                        f"stream exhausted after {t0 + j} observations; "
                        f"architecture needs {arch.data_budget()}"
                    ) from None
                g = gradient(x, (a, b))
                if not (g @ g) < _DIVERGENCE_LIMIT:
                    raise DivergenceError(step=t0 + j + 1)
                x -= steps[j] * g
                total += x
        return x, total

    def descend(x, t0, depth, path_sum, path_count):
        seg = arch.segment_lengths[depth]
        x_end, seg_sum = run_segment(x, t0, seg)
        path_sum = path_sum + seg_sum
        path_count += seg
        if depth == len(arch.splits):
            outputs.append(path_sum / path_count)
            return
        for _ in range(arch.splits[depth]):
            descend(x_end, t0 + seg, depth + 1, path_sum, path_count)

    descend(x0, 0, 0, np.zeros(d), 0)
    stacked = np.stack(outputs)
    T = arch.n_threads
    center = stacked.mean(axis=0)
    spread = sample_sd_about_mean(stacked) / np.sqrt(T)
    half = two_sided_multiplier(level, df=T - 1) * spread
    return IntervalSet(center, half, level, method="higrad", n=arch.data_budget())
