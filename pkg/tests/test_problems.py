"""Tests for synthetic problem generators and objective derivatives.

Finite differences serve as the independent oracle for gradients and
hessians; scipy quadrature values (frozen below) check the Monte Carlo
ground-truth estimator for logistic regression.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cheapboot import (
    CovarianceFamily,
    Dataset,
    LinearObjective,
    LogisticObjective,
    ParameterDomainError,
    estimate_logistic_ground_truth,
    gen_linear,
    gen_logistic,
    load_dataset,
    make_sigma,
    make_x_star,
    objective_for,
    save_dataset,
)

# --------------------------------------------------------------------------
# Covariance families and targets
# --------------------------------------------------------------------------


def test_make_sigma_identity():
    assert_allclose(make_sigma(CovarianceFamily("identity", 4)), np.eye(4))


def test_make_sigma_toeplitz_hand_value():
    # Hand arithmetic: entries 0.5^|i-j| for d=3.
    want = np.array(
        [[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]]
    )
    assert_allclose(make_sigma(CovarianceFamily("toeplitz", 3)), want)


def test_make_sigma_equicorr_hand_value():
    # Hand arithmetic: off-diagonal 0.2 everywhere for d=2.
    want = np.array([[1.0, 0.2], [0.2, 1.0]])
    assert_allclose(make_sigma(CovarianceFamily("equicorr", 2)), want)


@pytest.mark.parametrize("kind", ["identity", "toeplitz", "equicorr"])
@pytest.mark.parametrize("d", [2, 5, 20, 200])
def test_make_sigma_positive_definite(kind, d):
    sigma = make_sigma(CovarianceFamily(kind, d))
    assert np.linalg.eigvalsh(sigma)[0] > 0


def test_covariance_family_validation():
    with pytest.raises(ParameterDomainError):
        CovarianceFamily("circulant", 3)
    with pytest.raises(ParameterDomainError):
        CovarianceFamily("identity", 0)
    # Generators require d >= 2 (the target grid divides by d - 1).
    with pytest.raises(ParameterDomainError):
        gen_linear(10, 1, rng=np.random.default_rng(0))
    with pytest.raises(ParameterDomainError):
        gen_logistic(10, 1, rng=np.random.default_rng(0))


def test_make_x_star_hand_values():
    assert_allclose(make_x_star(5), [0.0, 0.25, 0.5, 0.75, 1.0])
    assert_allclose(make_x_star(2), [0.0, 1.0])
    with pytest.raises(ParameterDomainError):
        make_x_star(1)


# --------------------------------------------------------------------------
# Linear generator
# --------------------------------------------------------------------------


def test_gen_linear_shapes_and_truth():
    rng = np.random.default_rng(3)
    data, truth = gen_linear(50, 4, family="toeplitz", noise_sd=2.0, rng=rng)
    assert data.features.shape == (50, 4)
    assert data.responses.shape == (50,)
    assert data.kind == "linear"
    sigma = make_sigma(CovarianceFamily("toeplitz", 4))
    assert truth.exact
    assert_allclose(truth.x_star, make_x_star(4))
    assert_allclose(truth.G, sigma)
    assert_allclose(truth.S, 4.0 * sigma)  # noise_sd^2 * Sigma


def test_gen_linear_noiseless_responses_exact():
    rng = np.random.default_rng(4)
    data, truth = gen_linear(30, 3, noise_sd=0.0, rng=rng)
    assert_allclose(data.responses, data.features @ truth.x_star, atol=0)


def test_gen_linear_rejects_negative_noise():
    with pytest.raises(ParameterDomainError):
        gen_linear(10, 2, noise_sd=-0.5, rng=np.random.default_rng(0))


def test_gen_linear_deterministic_given_seed():
    a, _ = gen_linear(100, 3, rng=np.random.default_rng(42))
    b, _ = gen_linear(100, 3, rng=np.random.default_rng(42))
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.responses, b.responses)


def test_gen_linear_feature_covariance_matches_family():
    rng = np.random.default_rng(5)
    data, _ = gen_linear(100_000, 3, family="toeplitz", rng=rng)
    sample_cov = data.features.T @ data.features / data.n
    sigma = make_sigma(CovarianceFamily("toeplitz", 3))
    rel = np.linalg.norm(sample_cov - sigma) / np.linalg.norm(sigma)
    assert rel < 0.05


# --------------------------------------------------------------------------
# Logistic generator
# --------------------------------------------------------------------------


def test_gen_logistic_labels_and_balance():
    rng = np.random.default_rng(6)
    data, truth = gen_logistic(100_000, 3, rng=rng, x_star=np.zeros(3))
    assert set(np.unique(data.responses)) == {-1.0, 1.0}
    # With x* = 0 every label is a fair coin.
    frac_pos = np.mean(data.responses == 1.0)
    assert 0.49 < frac_pos < 0.51
    assert not truth.exact
    assert truth.G is None and truth.S is None


def test_gen_logistic_label_frequency_tracks_signal():
    rng = np.random.default_rng(7)
    data, _ = gen_logistic(50_000, 2, rng=rng)
    # x* = (0, 1): P(label=1 | a) = sigmoid(a_2), so labels correlate
    # positively with the second feature.
    corr = np.corrcoef(data.features[:, 1], data.responses)[0, 1]
    assert corr > 0.3


def test_dataset_rejects_bad_labels():
    feats = np.zeros((3, 2))
    with pytest.raises(ParameterDomainError):
        Dataset(feats, np.array([0.0, 1.0, 1.0]), kind="logistic")
    # Linear responses are unconstrained.
    Dataset(feats, np.array([0.0, 1.0, 2.5]), kind="linear")


# --------------------------------------------------------------------------
# Objective derivatives (finite-difference oracle)
# --------------------------------------------------------------------------


def _fd_gradient(obj, x, ob, h=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (obj.loss(x + e, ob) - obj.loss(x - e, ob)) / (2 * h)
    return g


def _fd_hessian(obj, x, ob, h=1e-5):
    d = x.size
    out = np.empty((d, d))
    for i in range(d):
        e = np.zeros_like(x)
        e[i] = h
        out[:, i] = (obj.gradient(x + e, ob) - obj.gradient(x - e, ob)) / (
            2 * h
        )
    return out


@pytest.mark.parametrize("kind", ["linear", "logistic"])
def test_gradient_matches_finite_differences(kind):
    rng = np.random.default_rng(8)
    d = 4
    obj = objective_for(kind, d)
    for _ in range(100):
        x = rng.standard_normal(d)
        a = rng.standard_normal(d)
        b = 1.0 if kind == "logistic" and rng.random() < 0.5 else -1.0
        if kind == "linear":
            b = rng.standard_normal()
        ob = (a, b)
        got = obj.gradient(x, ob)
        want = _fd_gradient(obj, x, ob)
        assert_allclose(got, want, rtol=1e-5, atol=1e-7)


@pytest.mark.parametrize("kind", ["linear", "logistic"])
def test_hessian_matches_finite_differences(kind):
    rng = np.random.default_rng(9)
    d = 3
    obj = objective_for(kind, d)
    for _ in range(100):
        x = rng.standard_normal(d)
        a = rng.standard_normal(d)
        b = 1.0 if rng.random() < 0.5 else -1.0
        if kind == "linear":
            b = rng.standard_normal()
        ob = (a, b)
        got = obj.hessian(x, ob)
        want = _fd_hessian(obj, x, ob)
        assert_allclose(got, want, rtol=1e-4, atol=1e-6)


def test_logistic_hessian_positive_semidefinite():
    rng = np.random.default_rng(10)
    obj = LogisticObjective(dim=3)
    for _ in range(50):
        x = 3.0 * rng.standard_normal(3)
        a = rng.standard_normal(3)
        b = 1.0 if rng.random() < 0.5 else -1.0
        h = obj.hessian(x, (a, b))
        assert np.linalg.eigvalsh(h)[0] >= -1e-12


def test_gradient_multi_matches_row_loop():
    # gradient_multi evaluates one shared observation at several iterates
    # (the shape the lockstep multi-thread runners need).
    rng = np.random.default_rng(12)
    for kind in ("linear", "logistic"):
        obj = objective_for(kind, 3)
        iterates = rng.standard_normal((8, 3))
        a = rng.standard_normal(3)
        b = rng.standard_normal() if kind == "linear" else 1.0
        got = obj.gradient_multi(iterates, (a, b))
        want = np.stack([obj.gradient(x, (a, b)) for x in iterates])
        assert_allclose(got, want, rtol=1e-13, atol=1e-15)


def test_logistic_loss_stable_for_large_margins():
    obj = LogisticObjective(dim=2)
    a = np.array([500.0, 0.0])
    x = np.array([1.0, 0.0])
    # Well-classified: loss ~ exp(-500), gradient ~ 0; must not overflow.
    assert obj.loss(x, (a, 1.0)) == pytest.approx(0.0, abs=1e-100)
    assert_allclose(obj.gradient(x, (a, 1.0)), [0.0, 0.0], atol=1e-100)
    # Badly classified: loss ~ 500, gradient ~ -b*a; must not be inf/nan.
    assert obj.loss(x, (a, -1.0)) == pytest.approx(500.0, rel=1e-12)
    assert_allclose(obj.gradient(x, (a, -1.0)), [500.0, 0.0], rtol=1e-12)


def test_linear_objective_hand_values():
    obj = LinearObjective(dim=2)
    x = np.array([1.0, 2.0])
    ob = (np.array([3.0, -1.0]), 0.5)
    # residual = 3 - 2 - 0.5 = 0.5; loss = 0.125; grad = 0.5 * a.
    assert obj.loss(x, ob) == pytest.approx(0.125, rel=1e-15)
    assert_allclose(obj.gradient(x, ob), [1.5, -0.5], rtol=1e-15)
    assert_allclose(
        obj.hessian(x, ob), [[9.0, -3.0], [-3.0, 1.0]], rtol=1e-15
    )


# --------------------------------------------------------------------------
# Monte Carlo ground truth for logistic regression
# --------------------------------------------------------------------------


def test_logistic_ground_truth_matches_quadrature():
    # Oracle: scipy.integrate.quad of sigmoid'(u) moments against the
    # standard normal density, frozen 2026-08. With identity features and
    # x* = (0, 1), u depends only on the second coordinate, so
    # G = diag(E[w(u)], E[w(u) u^2]) with w = sigmoid * (1 - sigmoid).
    rng = np.random.default_rng(13)
    truth = estimate_logistic_ground_truth(
        2, rng=rng, n_draws=400_000
    )
    want = np.array([[0.206620964142, 0.0], [0.0, 0.144224480183]])
    assert_allclose(truth.G, want, atol=5e-3)
    assert not truth.exact


def test_logistic_ground_truth_information_identity():
    # At the true parameter the gradient outer-product matrix equals the
    # expected hessian, so the independent S accumulator must agree with G
    # up to Monte Carlo noise.
    rng = np.random.default_rng(14)
    truth = estimate_logistic_ground_truth(
        3, family="equicorr", rng=rng, n_draws=400_000
    )
    assert_allclose(truth.S, truth.G, atol=6e-3)
    # Both symmetric PSD.
    assert np.linalg.eigvalsh(truth.G)[0] > 0
    assert np.linalg.eigvalsh(truth.S)[0] > 0


# --------------------------------------------------------------------------
# Dataset container and serialization
# --------------------------------------------------------------------------


def test_dataset_iteration_and_subset():
    feats = np.arange(12.0).reshape(4, 3)
    resp = np.array([1.0, -1.0, 1.0, 1.0])
    data = Dataset(feats, resp, kind="logistic")
    assert len(data) == 4
    head = data[0]
    assert_allclose(head.features, [0.0, 1.0, 2.0])
    assert head.response == 1.0
    rows = list(data)
    assert len(rows) == 4
    assert_allclose(rows[2].features, feats[2])
    sub = data.subset([2, 0, 0])
    assert_allclose(sub.features, feats[[2, 0, 0]])
    assert_allclose(sub.responses, resp[[2, 0, 0]])
    assert sub.kind == "logistic"


def test_dataset_round_trip_exact(tmp_path):
    rng = np.random.default_rng(15)
    data, _ = gen_linear(25, 3, family="equicorr", rng=rng)
    path = tmp_path / "cell.csv"
    save_dataset(data, path)
    back = load_dataset(path)
    assert back.kind == data.kind
    assert np.array_equal(back.features, data.features)
    assert np.array_equal(back.responses, data.responses)


def test_dataset_round_trip_logistic(tmp_path):
    rng = np.random.default_rng(16)
    data, _ = gen_logistic(10, 2, rng=rng)
    path = tmp_path / "cell.csv"
    save_dataset(data, path)
    back = load_dataset(path)
    assert back.kind == "logistic"
    assert np.array_equal(back.responses, data.responses)
