"""The (A)SGD iteration: x_t = x_{t-1} - eta_t * W_t * grad h(x_{t-1}, obs_t).

Steps are 1-indexed: the update consuming observation t uses step size
eta * t^(-alpha), and the averaged output is the mean of x_1..x_n (the
initial point x_0 is excluded).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DivergenceError,
    EmptyInputError,
    ParameterDomainError,
    StepSizeDomainError,
)
from .problems import Dataset, Objective

__all__ = [
    "StepSchedule",
    "EstimatorRun",
    "WeightSource",
    "exponential_weights",
    "run_trajectory",
]

# squared-gradient norm above this (or NaN) aborts the run
_DIVERGENCE_LIMIT = 1e300


@dataclass(frozen=True)
class StepSchedule:
    """Polynomial step decay eta_t = eta * t^(-alpha), t >= 1.

    alpha must lie in (0.5, 1]; alpha=1 is the 1/t schedule used for
    final-iterate (non-averaged) output.
    """

    eta: float
    alpha: float = 0.501

    def __post_init__(self):
        if not self.eta > 0:
            raise ParameterDomainError(f"eta must be positive, got {self.eta}")
        if not 0.5 < self.alpha <= 1.0:
            raise StepSizeDomainError(f"alpha must lie in (0.5, 1], got {self.alpha}")

    def step_size(self, t: int) -> float:
        """Step size at iteration t (1-based)."""
        if t < 1:
            raise IndexError(f"iteration counter is 1-based, got t={t}")
        return self.eta * float(t) ** -self.alpha

    def step_sizes(self, count: int, first: int = 1) -> np.ndarray:
        """Step sizes for iterations first..first+count-1."""
        if first < 1:
            raise IndexError(f"iteration counter is 1-based, got first={first}")
        t = np.arange(first, first + count, dtype=float)
        return self.eta * t**-self.alpha


@dataclass(frozen=True)
class EstimatorRun:
    """Result of one trajectory: final iterate, averaged iterate, extras.

    ``hessian_avg``/``grad_outer_avg`` are the running averages of the
    per-observation hessian and gradient outer product, both evaluated at the
    pre-update iterate (present when requested). ``iterates`` has shape
    (n_steps+1, d) with row 0 = x_0 (present when recording was requested).
    """

    x_final: np.ndarray
    x_avg: np.ndarray
    n_steps: int
    hessian_avg: np.ndarray | None = None
    grad_outer_avg: np.ndarray | None = None
    iterates: np.ndarray | None = None


def exponential_weights(size, rng) -> np.ndarray:
    """Exp(1) draws by inverse transform, W = -log(1 - U); branch-free."""
    return -np.log1p(-rng.random(size))


@dataclass(frozen=True)
class WeightSource:
    """Per-step gradient multipliers: unit, or i.i.d. Exp(1) from ``rng``."""

    kind: str = "unit"
    rng: np.random.Generator | None = None

    def __post_init__(self):
        if self.kind not in ("unit", "exponential"):
            raise ParameterDomainError(f"weight kind must be unit or exponential, got {self.kind!r}")
        if self.kind == "exponential" and self.rng is None:
            raise ParameterDomainError("exponential weights need an rng")

    def draw(self, size) -> np.ndarray | None:
        """Weights for ``size`` steps; None means all-unit (fast path)."""
        if self.kind == "unit":
            return None
        return exponential_weights(size, self.rng)


def run_trajectory(
    obj: Objective,
    data: Dataset,
    schedule: StepSchedule,
    x0=None,
    weights: WeightSource | None = None,
    accumulate_delta: bool = False,
    record_iterates: bool = False,
) -> EstimatorRun:
    """Run one (A)SGD trajectory over ``data`` in its given order.

    Parameters
    ----------
    obj : objective whose ``gradient`` drives the updates.
    data : observations, consumed once in order.
    schedule : step-size schedule.
    x0 : starting point; defaults to the zero vector.
    weights : optional per-step gradient multipliers (default unit).
    accumulate_delta : also average per-observation hessians and gradient
        outer products at the pre-update iterate.
    record_iterates : also store the full iterate sequence (x_0 included).

    Raises
    ------
    DivergenceError
        If a gradient is non-finite or overflows; carries the 1-based step.
    """
    n = len(data)
    if n < 1:
        raise EmptyInputError("need at least one observation")
    d = data.d
    if x0 is None:
        x = np.zeros(d)
    else:
        x = np.array(x0, dtype=float, copy=True)
        if x.shape != (d,):
            raise ParameterDomainError(f"x0 shape {x.shape} does not match d={d}")

    steps = schedule.step_sizes(n)
    if weights is not None:
        w = weights.draw(n)
        if w is not None:
            steps = steps * w

    if accumulate_delta and not hasattr(obj, "hessian"):
        raise ParameterDomainError("objective has no hessian; cannot accumulate")

    feats = data.features
    resp = data.responses
    grad = obj.gradient
    avg = np.zeros(d)
    hess_sum = np.zeros((d, d)) if accumulate_delta else None
    outer_sum = np.zeros((d, d)) if accumulate_delta else None
    iters = np.empty((n + 1, d)) if record_iterates else None
    if record_iterates:
        iters[0] = x

    # Overflow in the divergence probe (g @ g) is the detection signal,
    # not an anomaly worth a warning.
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(n):
            g = grad(x, (feats[t], resp[t]))
            if accumulate_delta:
                hess_sum += obj.hessian(x, (feats[t], resp[t]))
                outer_sum += np.outer(g, g)
            if not (g @ g) < _DIVERGENCE_LIMIT:
                raise DivergenceError(step=t + 1)
            x -= steps[t] * g
            avg += x
            if record_iterates:
                iters[t + 1] = x

    return EstimatorRun(
        x_final=x,
        x_avg=avg / n,
        n_steps=n,
        hessian_avg=None if hess_sum is None else hess_sum / n,
        grad_outer_avg=None if outer_sum is None else outer_sum / n,
        iterates=iters,
    )
