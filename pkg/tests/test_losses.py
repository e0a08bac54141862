"""Loss models, gradients, and curvature estimation against oracles."""

import math

import numpy as np
import pytest

from _oracles import finite_diff_grad
from conftest import quadratic_nodes
from fedl_lab.datagen import UEDataset
from fedl_lab.losses import CurvatureConstants, LossModel, estimate_curvature, grad, loss

MSE = LossModel(kind="mse-linear")


def _node(x, y, weight=1.0):
    return UEDataset(features=np.asarray(x, float), labels=np.asarray(y, float), weight=weight)


def test_mse_two_sample_hand_solution():
    # rows (1,0) and (1,1), labels 1 and 3: normal equations give w = (1, 2)
    x = np.array([[1.0, 0.0], [1.0, 1.0]])
    y = np.array([1.0, 3.0])
    w = np.array([1.0, 2.0])
    assert loss(MSE, w, x, y) == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(grad(MSE, w, x, y), 0.0, atol=1e-12)


def test_mse_zero_everything():
    x = np.ones((4, 3))
    y = np.zeros(4)
    assert loss(MSE, np.zeros(3), x, y) == 0.0


def test_mse_matches_mean_square_residual():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 4))
    y = rng.normal(size=50)
    w = rng.normal(size=4)
    r = x @ w - y
    assert loss(MSE, w, x, y) == pytest.approx(np.mean(r**2), rel=1e-14)


def test_grad_zero_at_least_squares_optimum():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(60, 5))
    y = rng.normal(size=60)
    w_star, *_ = np.linalg.lstsq(x, y, rcond=None)
    assert np.linalg.norm(grad(MSE, w_star, x, y)) < 1e-10


@pytest.mark.parametrize("kind,classes,reg", [("mse-linear", 0, 0.0), ("multinomial-logistic", 3, 0.01)])
def test_grad_matches_finite_differences(kind, classes, reg):
    model = LossModel(kind=kind, classes=classes, reg=reg)
    rng = np.random.default_rng(7)
    x = rng.normal(size=(30, 4))
    if kind == "mse-linear":
        y = rng.normal(size=30)
    else:
        y = rng.integers(0, classes, size=30).astype(float)
    for _ in range(5):
        w = rng.normal(size=model.dim(4))
        g = grad(model, w, x, y)
        fd = finite_diff_grad(lambda v: loss(model, v, x, y), w)
        assert np.linalg.norm(g - fd) <= 1e-5 * max(1.0, np.linalg.norm(g))


def test_grad_full_batch_equals_all_indices():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(25, 4))
    y = rng.normal(size=25)
    w = rng.normal(size=4)
    full = grad(MSE, w, x, y)
    batched = grad(MSE, w, x, y, batch=np.arange(25))
    assert np.array_equal(full, batched)


def test_grad_batch_is_subsample_gradient():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(20, 3))
    y = rng.normal(size=20)
    w = rng.normal(size=3)
    idx = np.array([2, 5, 11])
    got = grad(MSE, w, x, y, batch=idx)
    want = grad(MSE, w, x[idx], y[idx])
    assert np.allclose(got, want, atol=1e-14)


def test_logistic_uniform_start_is_log_classes():
    model = LossModel(kind="multinomial-logistic", classes=2)
    x = np.random.default_rng(5).normal(size=(40, 3))
    y = np.repeat([0.0, 1.0], 20)
    w = np.zeros(model.dim(3))
    assert loss(model, w, x, y) == pytest.approx(math.log(2.0), rel=1e-12)


def test_logistic_reg_floor_sets_beta():
    model = LossModel(kind="multinomial-logistic", classes=3, reg=0.01)
    nodes = [_node(np.random.default_rng(6).normal(size=(50, 4)),
                   np.random.default_rng(7).integers(0, 3, 50).astype(float))]
    consts = estimate_curvature(model, nodes)
    assert consts.beta == pytest.approx(0.01, rel=1e-12)
    assert consts.L > consts.beta
    assert consts.rho == pytest.approx(consts.L / consts.beta, rel=1e-12)


def test_curvature_matches_dense_eigensolver():
    nodes = quadratic_nodes(4, 6, (80, 120), seed=10, target_rho=3.0)
    consts = estimate_curvature(MSE, nodes)
    for ds in nodes:
        gram = 2.0 * ds.features.T @ ds.features / ds.n_samples
        evals = np.linalg.eigvalsh(gram)
        # the iterative eigensolver stops on step size, so allow its error
        assert consts.L >= evals[-1] * (1.0 - 1e-6)
        assert consts.beta <= evals[0] * (1.0 + 1e-6)
    # the extremes are attained by some node
    tops = []
    bottoms = []
    for ds in nodes:
        gram = 2.0 * ds.features.T @ ds.features / ds.n_samples
        evals = np.linalg.eigvalsh(gram)
        tops.append(evals[-1])
        bottoms.append(evals[0])
    assert consts.L == pytest.approx(max(tops), rel=1e-6)
    assert consts.beta == pytest.approx(min(bottoms), rel=1e-6)


def test_whitened_data_condition_number_tends_to_one():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(20000, 5))
    consts = estimate_curvature(MSE, [_node(x, rng.normal(size=20000))])
    assert consts.rho < 1.2


def test_co_coercivity_on_random_pairs():
    nodes = quadratic_nodes(3, 5, (60, 90), seed=12, target_rho=4.0)
    consts = estimate_curvature(MSE, nodes)
    rng = np.random.default_rng(13)
    for _ in range(100):
        w = rng.normal(size=5)
        v = rng.normal(size=5)
        for ds in nodes:
            dg = grad(MSE, w, ds.features, ds.labels) - grad(MSE, v, ds.features, ds.labels)
            inner = float(np.dot(dg, w - v))
            assert inner >= np.dot(dg, dg) / consts.L - 1e-9


def test_strong_convexity_lower_bound():
    nodes = quadratic_nodes(3, 5, (60, 90), seed=14, target_rho=4.0)
    consts = estimate_curvature(MSE, nodes)
    rng = np.random.default_rng(15)
    for _ in range(50):
        w = rng.normal(size=5)
        v = rng.normal(size=5)
        for ds in nodes:
            dg = grad(MSE, w, ds.features, ds.labels) - grad(MSE, v, ds.features, ds.labels)
            gap = float(np.dot(dg, w - v))
            assert gap >= consts.beta * float(np.dot(w - v, w - v)) - 1e-9


def test_validation_errors():
    with pytest.raises(ValueError):
        LossModel(kind="hinge")
    with pytest.raises(ValueError):
        LossModel(kind="multinomial-logistic", classes=1)
    with pytest.raises(ValueError):
        loss(MSE, np.zeros(3), np.zeros((4, 2)), np.zeros(4))
    with pytest.raises(ValueError):
        loss(MSE, np.zeros(2), np.zeros((4, 2)), np.zeros(3))
    with pytest.raises(ValueError):
        loss(MSE, np.zeros(2), np.zeros((0, 2)), np.zeros(0))


def test_curvature_constants_fields():
    c = CurvatureConstants(L=4.0, beta=2.0, rho=2.0)
    assert (c.L, c.beta, c.rho) == (4.0, 2.0, 2.0)
