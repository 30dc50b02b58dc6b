"""Statistical primitives: quantiles, sample spreads, asymptotic covariances.

Quantiles of the Student-t and standard normal distributions are computed
in-package (CDF via the regularized incomplete beta function, inverted by a
bracketed Newton/bisection hybrid) so the library carries no statistical
dependency. Tests cross-check them against an independent reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientReplicatesError,
    ParameterDomainError,
    SingularMatrixError,
    StepSizeDomainError,
)

__all__ = [
    "QuantileSpec",
    "AsymptoticCovariance",
    "quantile",
    "t_quantile",
    "normal_quantile",
    "t_cdf",
    "normal_cdf",
    "regularized_incomplete_beta",
    "two_sided_multiplier",
    "sample_sd_about_mean",
    "sample_sd_about_center",
    "asgd_asymptotic_cov",
    "sgd_asymptotic_cov",
]


# ---------------------------------------------------------------------------
# Regularized incomplete beta function and the CDFs built on it


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-16:
            return h
    raise RuntimeError(f"incomplete beta continued fraction failed to converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the regularized incomplete beta function.

    Parameters
    ----------
    a, b : positive shape parameters.
    x : evaluation point in [0, 1].
    """
    if a <= 0 or b <= 0:
        raise ParameterDomainError(f"beta shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ParameterDomainError(f"incomplete beta argument must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # use the continued fraction on the side where it converges fast
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def _check_df(df: int) -> int:
    if not isinstance(df, (int, np.integer)) or df < 1:
        raise ParameterDomainError(f"degrees of freedom must be a positive integer, got {df!r}")
    return int(df)


def _check_prob(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0 or not math.isfinite(p):
        raise ParameterDomainError(f"probability must lie strictly in (0, 1), got {p}")
    return p


def t_cdf(x: float, df: int) -> float:
    """CDF of the Student-t distribution with ``df`` degrees of freedom."""
    df = _check_df(df)
    x = float(x)
    if x == 0.0:
        return 0.5
    z = df / (df + x * x)
    tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, z)
    return tail if x < 0 else 1.0 - tail


def _t_pdf(x: float, df: int) -> float:
    ln = (
        math.lgamma(0.5 * (df + 1))
        - math.lgamma(0.5 * df)
        - 0.5 * math.log(df * math.pi)
        - 0.5 * (df + 1) * math.log1p(x * x / df)
    )
    return math.exp(ln)


def normal_cdf(x: float) -> float:
    """CDF of the standard normal distribution."""
    return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))


_SQRT_2PI = math.sqrt(2.0 * math.pi)

# rational approximation coefficients for the inverse normal CDF (Acklam)
_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)


def _normal_quantile_approx(p: float) -> float:
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    if p > 1.0 - p_low:
        q = math.sqrt(-2.0 * math.log1p(-p))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    q = p - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / (
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    )


def normal_quantile(p: float) -> float:
    """Quantile of the standard normal distribution, |error| well below 1e-10."""
    p = _check_prob(p)
    x = _normal_quantile_approx(p)
    # Halley refinement against the erfc-based CDF
    for _ in range(2):
        err = normal_cdf(x) - p
        u = err * _SQRT_2PI * math.exp(0.5 * x * x)
        x -= u / (1.0 + 0.5 * x * u)
    return x


def t_quantile(df: int, p: float) -> float:
    """Quantile of the Student-t distribution with ``df`` degrees of freedom.

    Inverts ``t_cdf`` by a bracketed Newton/bisection hybrid; the root is
    located to about 1e-12, comfortably inside the 1e-8 contract.
    """
    df = _check_df(df)
    p = _check_prob(p)
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_quantile(df, 1.0 - p)

    lo, hi = 0.0, 1.0
    while t_cdf(hi, df) < p:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise RuntimeError(f"failed to bracket t quantile (df={df}, p={p})")

    x = 0.5 * (lo + hi)
    for _ in range(200):
        f = t_cdf(x, df) - p
        if f > 0:
            hi = x
        else:
            lo = x
        if abs(f) < 1e-15 or (hi - lo) < 1e-13 * max(1.0, hi):
            break
        pdf = _t_pdf(x, df)
        step = f / pdf if pdf > 0 else 0.0
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        x = x_new
    return x


@dataclass(frozen=True)
class QuantileSpec:
    """A distribution-and-probability pair identifying one quantile.

    distribution is "student_t" (requires ``df``) or "standard_normal".
    """

    distribution: str
    probability: float
    df: int | None = None

    def __post_init__(self):
        if self.distribution not in ("student_t", "standard_normal"):
            raise ParameterDomainError(f"unknown distribution {self.distribution!r}")
        _check_prob(self.probability)
        if self.distribution == "student_t":
            _check_df(self.df)
        elif self.df is not None:
            raise ParameterDomainError("df only applies to student_t")


def quantile(spec: QuantileSpec) -> float:
    """Evaluate the quantile described by ``spec``."""
    if spec.distribution == "student_t":
        return t_quantile(spec.df, spec.probability)
    return normal_quantile(spec.probability)


def two_sided_multiplier(level: float, df: int | None = None) -> float:
    """Critical value for a symmetric two-sided interval at the given level.

    Student-t with ``df`` degrees of freedom when ``df`` is given, standard
    normal otherwise.
    """
    level = float(level)
    if not 0.0 < level < 1.0:
        raise ParameterDomainError(f"level must lie in (0, 1), got {level}")
    p = 0.5 * (1.0 + level)
    return normal_quantile(p) if df is None else t_quantile(df, p)


# ---------------------------------------------------------------------------
# Sample spreads


def sample_sd_about_mean(values) -> float | np.ndarray:
    """Sample standard deviation about the sample mean (divisor B-1).

    ``values`` may be shape (B,) or (B, d); the reduction runs over axis 0.
    Requires B >= 2.
    """
    v = np.asarray(values, dtype=float)
    if v.shape[0] < 2:
        raise InsufficientReplicatesError(f"need at least 2 values, got {v.shape[0]}")
    out = np.std(v, axis=0, ddof=1)
    return float(out) if out.ndim == 0 else out


def sample_sd_about_center(values, center) -> float | np.ndarray:
    """Root mean squared deviation about a fixed center (divisor B).

    ``values`` may be shape (B,) or (B, d); ``center`` must broadcast against
    one row. Requires B >= 1.
    """
    v = np.asarray(values, dtype=float)
    if v.shape[0] < 1:
        raise InsufficientReplicatesError("need at least 1 value")
    dev = v - np.asarray(center, dtype=float)
    out = np.sqrt(np.mean(dev * dev, axis=0))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Asymptotic covariances of the (A)SGD error


@dataclass(frozen=True)
class AsymptoticCovariance:
    """Covariance matrix of the sqrt(n)-scaled estimation error.

    Validates symmetry (1e-10 absolute) and positive semi-definiteness
    (eigenvalues >= -1e-10) on construction.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterDomainError(f"covariance must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.T)) > 1e-10:
            raise ParameterDomainError("covariance is not symmetric within 1e-10")
        if np.min(np.linalg.eigvalsh(0.5 * (m + m.T))) < -1e-10:
            raise ParameterDomainError("covariance has an eigenvalue below -1e-10")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _check_symmetric(mat: np.ndarray, name: str, tol: float = 1e-8) -> np.ndarray:
    m = np.asarray(mat, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParameterDomainError(f"{name} must be square, got shape {m.shape}")
    if np.max(np.abs(m - m.T)) > tol * max(1.0, np.max(np.abs(m))):
        raise ParameterDomainError(f"{name} must be symmetric")
    return m


def asgd_asymptotic_cov(G, S) -> AsymptoticCovariance:
    """Asymptotic covariance G^{-1} S G^{-1} of the averaged-iterate error.

    Parameters
    ----------
    G : symmetric positive definite curvature matrix.
    S : symmetric positive semi-definite gradient-noise covariance.
    """
    G = _check_symmetric(G, "G")
    S = _check_symmetric(S, "S")
    if G.shape != S.shape:
        raise ParameterDomainError(f"G and S shapes differ: {G.shape} vs {S.shape}")
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("G must be positive definite") from exc
    inner = np.linalg.solve(G, S)
    cov = np.linalg.solve(G, inner.T).T
    return AsymptoticCovariance(0.5 * (cov + cov.T))


def sgd_asymptotic_cov(G, S, eta: float) -> tuple[AsymptoticCovariance, np.ndarray]:
    """Asymptotic covariance of the final-iterate error under the 1/t schedule.

    With G = Q diag(d_1..d_d) Q^T (eigenvalues decreasing), the covariance of
    the scaled error, expressed in the eigenbasis of G, has entries

        sigma2[i, j] = eta^2 * (Q^T S Q)[i, j] / (eta*d_i + eta*d_j - 1).

    Returns the eigenbasis matrix together with Q; no rotation back to the
    original coordinates is applied, so callers can work in either basis.
    Requires eta*d_i + eta*d_j - 1 > 0 for every pair (i, j).
    """
    G = _check_symmetric(G, "G")
    S = _check_symmetric(S, "S")
    if G.shape != S.shape:
        raise ParameterDomainError(f"G and S shapes differ: {G.shape} vs {S.shape}")
    eta = float(eta)
    if eta <= 0:
        raise ParameterDomainError(f"eta must be positive, got {eta}")
    eigvals, eigvecs = np.linalg.eigh(G)
    if eigvals[0] <= 0:
        raise SingularMatrixError("G must be positive definite")
    order = np.argsort(eigvals)[::-1]
    d = eigvals[order]
    Q = eigvecs[:, order]
    denom = eta * d[:, None] + eta * d[None, :] - 1.0
    if np.min(denom) <= 0:
        raise StepSizeDomainError(
            f"eta*d_i + eta*d_j - 1 must be positive for all eigenvalue pairs; "
            f"smallest value {np.min(denom):.6g} (need eta > {0.5 / d[-1]:.6g})"
        )
    sigma2 = (eta * eta) * (Q.T @ S @ Q) / denom
    return AsymptoticCovariance(0.5 * (sigma2 + sigma2.T)), Q
