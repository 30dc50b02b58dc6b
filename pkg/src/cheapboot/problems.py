"""Synthetic regression problems: objectives, generators, ground truth.

Linear regression has closed-form curvature G and gradient-noise covariance S;
logistic regression only admits Monte Carlo estimates of them, exposed through
``estimate_logistic_ground_truth`` and flagged approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EmptyInputError, ParameterDomainError

__all__ = [
    "Observation",
    "Dataset",
    "Objective",
    "LinearObjective",
    "LogisticObjective",
    "objective_for",
    "CovarianceFamily",
    "GroundTruth",
    "SIGMA_KINDS",
    "make_sigma",
    "make_x_star",
    "gen_linear",
    "gen_logistic",
    "estimate_logistic_ground_truth",
    "save_dataset",
    "load_dataset",
]

SIGMA_KINDS = ("identity", "toeplitz", "equicorr")
TOEPLITZ_RHO = 0.5
EQUICORR_RHO = 0.2


class Observation(NamedTuple):
    features: np.ndarray
    response: float


@dataclass(frozen=True)
class Dataset:
    """A fixed-order sample of observations, stored columnar.

    features has shape (n, d), responses shape (n,). ``kind`` is "linear"
    (real responses) or "logistic" (labels in {-1, +1}).
    """

    features: np.ndarray
    responses: np.ndarray
    kind: str

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        resp = np.asarray(self.responses, dtype=float)
        if feats.ndim != 2:
            raise ParameterDomainError(f"features must be 2-d, got shape {feats.shape}")
        if resp.shape != (feats.shape[0],):
            raise ParameterDomainError(
                f"responses shape {resp.shape} does not match {feats.shape[0]} rows"
            )
        if self.kind not in ("linear", "logistic"):
            raise ParameterDomainError(f"unknown dataset kind {self.kind!r}")
        if self.kind == "logistic" and resp.size and not np.all(np.abs(resp) == 1.0):
            raise ParameterDomainError("logistic responses must be labels in {-1, +1}")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "responses", resp)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Observation:
        return Observation(self.features[i], float(self.responses[i]))

    def __iter__(self):
        for a, b in zip(self.features, self.responses):
            yield Observation(a, float(b))

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[idx], self.responses[idx], self.kind)


# ---------------------------------------------------------------------------
# Objectives


def _sigmoid(z: float) -> float:
    # stable on both sides; never exponentiates a positive argument
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _sigmoid_vec(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class Objective:
    """Per-observation loss h(x, obs) with gradient and optional hessian.

    ``gradient_multi`` evaluates the gradient at several iterates against one
    shared observation; subclasses override it with vectorized forms for the
    multi-thread methods.
    """

    dim: int

    def loss(self, x: np.ndarray, obs) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray, obs) -> np.ndarray:
        raise NotImplementedError

    def gradient_multi(self, X: np.ndarray, obs) -> np.ndarray:
        return np.stack([self.gradient(x, obs) for x in X])


@dataclass(frozen=True)
class LinearObjective(Objective):
    """Squared-error loss h(x, (a, b)) = (a.x - b)^2 / 2."""

    dim: int

    def loss(self, x, obs) -> float:
        a, b = obs
        r = float(a @ x) - b
        return 0.5 * r * r

    def gradient(self, x, obs) -> np.ndarray:
        a, b = obs
        return (float(a @ x) - b) * a

    def hessian(self, x, obs) -> np.ndarray:
        a, _ = obs
        return np.outer(a, a)

    def gradient_multi(self, X, obs) -> np.ndarray:
        a, b = obs
        r = X @ a - b
        return r[:, None] * a


@dataclass(frozen=True)
class LogisticObjective(Objective):
    """Logistic loss h(x, (a, b)) = log(1 + exp(-b * a.x)) with b in {-1, +1}."""

    dim: int

    def loss(self, x, obs) -> float:
        a, b = obs
        z = b * float(a @ x)
        # log(1 + exp(-z)) without overflow
        return float(np.logaddexp(0.0, -z))

    def gradient(self, x, obs) -> np.ndarray:
        a, b = obs
        z = b * float(a @ x)
        return (-b * _sigmoid(-z)) * a

    def hessian(self, x, obs) -> np.ndarray:
        a, _ = obs
        s = _sigmoid(float(a @ x))
        return (s * (1.0 - s)) * np.outer(a, a)

    def gradient_multi(self, X, obs) -> np.ndarray:
        a, b = obs
        z = b * (X @ a)
        return (-b * _sigmoid_vec(-z))[:, None] * a


def objective_for(kind: str, d: int) -> Objective:
    """The objective matching a dataset kind."""
    if kind == "linear":
        return LinearObjective(d)
    if kind == "logistic":
        return LogisticObjective(d)
    raise ParameterDomainError(f"unknown problem kind {kind!r}")


# ---------------------------------------------------------------------------
# Population quantities


@dataclass(frozen=True)
class CovarianceFamily:
    """One of the three feature covariance families, at a fixed dimension."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in SIGMA_KINDS:
            raise ParameterDomainError(
                f"sigma kind must be one of {SIGMA_KINDS}, got {self.kind!r}"
            )
        if self.dim < 1:
            raise ParameterDomainError(f"dimension must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class GroundTruth:
    """The target x* with curvature G and gradient-noise covariance S.

    For linear regression G and S are exact; for logistic regression they are
    Monte Carlo estimates (``exact=False``) or absent.
    """

    x_star: np.ndarray
    G: np.ndarray | None
    S: np.ndarray | None
    exact: bool = True


def make_sigma(family: CovarianceFamily) -> np.ndarray:
    """The covariance matrix named by ``family``."""
    d = family.dim
    if family.kind == "identity":
        return np.eye(d)
    if family.kind == "toeplitz":
        idx = np.arange(d)
        return TOEPLITZ_RHO ** np.abs(idx[:, None] - idx[None, :])
    sigma = np.full((d, d), EQUICORR_RHO)
    np.fill_diagonal(sigma, 1.0)
    return sigma


def make_x_star(d: int) -> np.ndarray:
    """Target vector with entries i/(d-1), i = 0..d-1."""
    if d < 2:
        raise ParameterDomainError(f"need d >= 2 (entry spacing divides by d-1), got {d}")
    return np.linspace(0.0, 1.0, d)


def _resolve_family(family, d: int) -> CovarianceFamily:
    if isinstance(family, str):
        return CovarianceFamily(family, d)
    if family.dim != d:
        raise ParameterDomainError(f"family dimension {family.dim} does not match d={d}")
    return family


def gen_linear(n, d, family="identity", noise_sd=1.0, rng=None) -> tuple[Dataset, GroundTruth]:
    """Generate n linear-regression observations b = a.x* + eps.

    Features a ~ N(0, Sigma) via the Cholesky factor applied to i.i.d.
    standard normals; eps ~ N(0, noise_sd^2) independent of a. Draw order is
    fixed (features first, then noise) so a given rng state is reproducible.

    Returns the dataset and exact ground truth (G = Sigma, S = noise_sd^2 *
    Sigma). ``noise_sd=0`` is allowed and gives the noiseless problem.
    """
    if n < 1:
        raise EmptyInputError(f"need n >= 1 observations, got {n}")
    family = _resolve_family(family, d)
    noise_sd = float(noise_sd)
    if noise_sd < 0:
        raise ParameterDomainError(f"noise_sd must be >= 0, got {noise_sd}")
    x_star = make_x_star(d)
    sigma = make_sigma(family)
    chol = np.linalg.cholesky(sigma)
    feats = rng.standard_normal((n, d)) @ chol.T
    resp = feats @ x_star + noise_sd * rng.standard_normal(n)
    truth = GroundTruth(x_star, sigma, noise_sd * noise_sd * sigma, exact=True)
    return Dataset(feats, resp, "linear"), truth


def gen_logistic(n, d, family="identity", rng=None, x_star=None) -> tuple[Dataset, GroundTruth]:
    """Generate n logistic-regression observations with labels in {-1, +1}.

    P(b = +1 | a) = 1 / (1 + exp(-a.x*)). The ``x_star`` override exists for
    tests only (e.g. a zero vector makes labels fair coin flips). G and S have
    no closed form here; see ``estimate_logistic_ground_truth``.
    """
    if n < 1:
        raise EmptyInputError(f"need n >= 1 observations, got {n}")
    family = _resolve_family(family, d)
    if x_star is None:
        x_star = make_x_star(d)
    else:
        x_star = np.asarray(x_star, dtype=float)
    sigma = make_sigma(family)
    chol = np.linalg.cholesky(sigma)
    feats = rng.standard_normal((n, d)) @ chol.T
    p_plus = _sigmoid_vec(feats @ x_star)
    labels = np.where(rng.random(n) < p_plus, 1.0, -1.0)
    truth = GroundTruth(x_star, None, None, exact=False)
    return Dataset(feats, labels, "logistic"), truth


def estimate_logistic_ground_truth(
    d, family="identity", rng=None, n_draws=1_000_000, x_star=None, chunk=200_000
) -> GroundTruth:
    """Monte Carlo estimate of G and S for logistic regression at x*.

    Averages the per-observation hessian and gradient outer product over
    ``n_draws`` fresh feature/label draws. The result is approximate
    (``exact=False``); intended for diagnostics, not interval construction.
    """
    family = _resolve_family(family, d)
    if x_star is None:
        x_star = make_x_star(d)
    else:
        x_star = np.asarray(x_star, dtype=float)
    if n_draws < 1:
        raise ParameterDomainError(f"need n_draws >= 1, got {n_draws}")
    sigma = make_sigma(family)
    chol = np.linalg.cholesky(sigma)
    g_sum = np.zeros((d, d))
    s_sum = np.zeros((d, d))
    remaining = int(n_draws)
    while remaining > 0:
        m = min(chunk, remaining)
        feats = rng.standard_normal((m, d)) @ chol.T
        u = feats @ x_star
        s = _sigmoid_vec(u)
        g_sum += (feats * (s * (1.0 - s))[:, None]).T @ feats
        labels = np.where(rng.random(m) < s, 1.0, -1.0)
        coef = -labels * _sigmoid_vec(-labels * u)
        grads = coef[:, None] * feats
        s_sum += grads.T @ grads
        remaining -= m
    return GroundTruth(x_star, g_sum / n_draws, s_sum / n_draws, exact=False)


# ---------------------------------------------------------------------------
# Serialization (CSV; row = features then response, header carries kind and d)


def save_dataset(data: Dataset, path) -> None:
    """Write a dataset as CSV with a '# kind=<kind> d=<d>' header line."""
    rows = np.column_stack([data.features, data.responses])
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header=f"kind={data.kind} d={data.d}")


def load_dataset(path) -> Dataset:
    """Read a dataset written by ``save_dataset``; round-trips exactly."""
    with open(path) as fh:
        header = fh.readline().strip()
    fields = dict(
        part.split("=", 1) for part in header.lstrip("# ").split() if "=" in part
    )
    if "kind" not in fields or "d" not in fields:
        raise ParameterDomainError(f"missing kind/d in dataset header: {header!r}")
    d = int(fields["d"])
    rows = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if rows.shape[1] != d + 1:
        raise ParameterDomainError(
            f"expected {d + 1} columns per row, found {rows.shape[1]}"
        )
    return Dataset(rows[:, :d], rows[:, d], fields["kind"])
