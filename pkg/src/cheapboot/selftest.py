"""Fast invariant checks runnable without a test framework (CLI `selftest`).

A trimmed version of the pytest suite's property checks: quantile sanity,
determinism, resample inclusion, weight moments, batch layout against a
brute-force reference, and the degenerate zero-width cases.
"""

from __future__ import annotations

import numpy as np

from .baselines import batch_layout, higrad_interval, HiGradArchitecture
from .cheap import cofb, conb, resample_with_replacement
from .engine import StepSchedule, exponential_weights, run_trajectory
from .harness import ExperimentConfig, run_cell, seed_derive
from .problems import Dataset, LinearObjective, gen_linear
from .stats import normal_quantile, t_quantile

__all__ = ["run_selftest"]


def _check_quantiles():
    assert abs(t_quantile(1, 0.975) - 12.7062047) < 1e-6
    assert abs(normal_quantile(0.975) - 1.9599640) < 1e-6
    assert t_quantile(5, 0.5) == 0.0
    for df in (1, 3, 30):
        assert abs(t_quantile(df, 0.975) + t_quantile(df, 0.025)) < 1e-10


def _check_determinism():
    cfg = ExperimentConfig(
        problem="linear", method="conb", d=2, n=500, eta=0.5, B=3, trials=5,
        master_seed=7,
    )
    a, b = run_cell(cfg), run_cell(cfg)
    assert a.coverage_mean == b.coverage_mean
    assert a.mean_length == b.mean_length


def _check_resample_inclusion():
    rng = seed_derive(11, (0,))
    data, _ = gen_linear(2000, 2, "identity", 1.0, rng)
    fractions = []
    for child in rng.spawn(50):
        rep = resample_with_replacement(data, child)
        fractions.append(len(np.unique(rep.features[:, 0])) / len(data))
    assert abs(np.mean(fractions) - 0.632) < 0.02


def _check_weight_mean():
    w = exponential_weights(10**5, seed_derive(3, (0,)))
    assert np.all(w > 0)
    assert 0.99 <= w.mean() <= 1.01


def _brute_boundaries(n, alpha, M):
    out = []
    for k in range(M + 1):
        target = ((k + 1) * n ** (1 - alpha) / (M + 1)) ** (1 / (1 - alpha))
        best = int(target)
        while abs(best + 1 - target) <= abs(best - target):
            best += 1
        out.append(best)
    return out


def _check_batch_layout():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(5_000, 200_000))
        alpha = float(rng.uniform(0.55, 0.95))
        M = int(rng.integers(2, 25))
        try:
            layout = batch_layout(n, alpha, M)
        except Exception:
            continue
        assert list(layout.boundaries) == _brute_boundaries(n, alpha, M)


class _ZeroGradObjective:
    dim = 2

    def gradient(self, x, obs):
        return np.zeros(2)

    def gradient_multi(self, X, obs):
        return np.zeros_like(X)


def _check_degenerate_zero_width():
    rng = seed_derive(1, (0,))
    data, _ = gen_linear(50, 2, "identity", 1.0, rng)
    obj = _ZeroGradObjective()
    sched = StepSchedule(0.5, 0.501)
    iv = cofb(obj, data, sched, B=3, rng=seed_derive(1, (1,)))
    assert np.all(iv.half_widths == 0.0)
    iv = higrad_interval(obj, data, sched, HiGradArchitecture((2,), (10, 10)))
    assert np.all(iv.half_widths == 0.0)
    assert np.all(iv.centers == 0.0)


def _check_conb_unit_weights():
    rng = seed_derive(2, (0,))
    data, _ = gen_linear(400, 2, "identity", 1.0, rng)
    obj = LinearObjective(2)
    sched = StepSchedule(0.5, 0.501)
    iv = conb(obj, data, sched, B=1, rng=seed_derive(2, (1,)), weight_kind="unit")
    base = run_trajectory(obj, data, sched)
    assert np.all(iv.half_widths == 0.0)
    # The lockstep pass and the single-trajectory engine associate the same
    # sums differently, so cross-implementation agreement is 1-ulp, not
    # bitwise; within the pass all unit threads are bitwise identical.
    assert np.allclose(iv.centers, base.x_avg, rtol=1e-12)


_CHECKS = (
    ("quantile values and symmetry", _check_quantiles),
    ("experiment determinism under fixed seed", _check_determinism),
    ("resample inclusion fraction near 0.632", _check_resample_inclusion),
    ("exponential weight mean near 1", _check_weight_mean),
    ("batch layout matches brute-force boundaries", _check_batch_layout),
    ("degenerate runs give zero-width intervals", _check_degenerate_zero_width),
    ("unit-weight online threads equal the original run", _check_conb_unit_weights),
)


def run_selftest(verbose: bool = True) -> bool:
    """Run all checks; print one PASS/FAIL line each; True if all passed."""
    all_ok = True
    for name, check in _CHECKS:
        try:
            check()
            status = "PASS"
        except Exception as exc:  # report and continue
            status = f"FAIL ({type(exc).__name__}: {exc})"
            all_ok = False
        if verbose:
            print(f"[{status.split()[0]:4s}] {name}" + ("" if status == "PASS" else f" -- {status}"))
    return all_ok
