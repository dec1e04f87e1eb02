import json

import numpy as np
import pytest

from shapig.micronet import (MicroNet, TrainConfig, TrainingDivergedError, dataset_loss, forward,
                             input_gradient, load, save, train)


def fd_gradient(net, x, k, h=1e-6):
    g = np.zeros_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (forward(net, x + e)[k] - forward(net, x - e)[k]) / (2 * h)
    return g


def test_init_is_bounded_and_seeded():
    a = MicroNet.init([5, 7, 2], seed=3)
    b = MicroNet.init([5, 7, 2], seed=3)
    assert a.layer_sizes == (5, 7, 2)
    for Wa, Wb in zip(a.weights, b.weights):
        assert np.array_equal(Wa, Wb)
        assert np.abs(Wa).max() <= 1 / np.sqrt(Wa.shape[1])


def test_weights_are_read_only():
    net = MicroNet.init([2, 3, 1], seed=0)
    with pytest.raises(ValueError):
        net.weights[0][0, 0] = 1.0


def test_rejects_broken_chain_and_nan():
    W = np.ones((3, 2))
    with pytest.raises(ValueError):
        MicroNet((W, np.ones((1, 2))), (np.zeros(3), np.zeros(1)))
    with pytest.raises(ValueError):
        MicroNet((np.full((1, 2), np.nan),), (np.zeros(1),))


def test_linear_net_output_and_gradient():
    # F1(x) = x + 1 with a single affine layer
    net = MicroNet((np.array([[1.0]]),), (np.array([1.0]),))
    assert forward(net, np.array([2.0]))[0] == 3.0
    assert input_gradient(net, np.array([5.0]), 0)[0] == 1.0


@pytest.mark.parametrize("activation,head", [("tanh", "regression"), ("tanh", "classification"),
                                             ("relu", "regression")])
def test_gradient_matches_finite_differences(activation, head):
    rng = np.random.default_rng(0)
    for seed in range(5):
        net = MicroNet.init([4, 6, 5, 3], seed, activation, head)
        x = rng.normal(size=4)
        for k in range(3):
            np.testing.assert_allclose(input_gradient(net, x, k), fd_gradient(net, x, k),
                                       rtol=1e-4, atol=1e-7)


def test_batch_gradient_equals_rowwise():
    net = MicroNet.init([3, 4, 2], 1)
    X = np.random.default_rng(1).normal(size=(6, 3))
    G = input_gradient(net, X, 1)
    for row, g in zip(X, G):
        np.testing.assert_allclose(input_gradient(net, row, 1), g, atol=1e-14)


def test_output_index_range():
    net = MicroNet.init([3, 2], 0)
    with pytest.raises(ValueError):
        input_gradient(net, np.zeros(3), 2)


def test_train_fits_smooth_regression():
    X = np.linspace(-2, 2, 200)[:, None]
    y = np.sin(X[:, 0])
    net = MicroNet.init([1, 16, 1], 0)
    fitted = train(net, X, y, TrainConfig(learning_rate=1e-2, epochs=300, batch_size=50))
    assert dataset_loss(fitted, X, y) < 1e-3 < dataset_loss(net, X, y)


def test_train_classification_learns_threshold():
    X = np.random.default_rng(0).normal(size=(300, 2))
    y = (X[:, 0] > 0).astype(int)
    net = train(MicroNet.init([2, 8, 2], 0, head="classification"), X, y,
                TrainConfig(learning_rate=1e-2, epochs=100, loss="cross-entropy"))
    acc = np.mean(np.argmax(forward(net, X), axis=1) == y)
    assert acc > 0.95
    np.testing.assert_allclose(forward(net, X).sum(axis=1), 1.0)


def test_full_batch_sgd_monotone_under_stability_bound():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(50, 3))
    y = X @ np.array([1.0, -2.0, 0.5]) + 0.3
    A = np.hstack([X, np.ones((50, 1))])
    L = np.linalg.eigvalsh(A.T @ A / 50).max()
    hist = []
    train(MicroNet.init([3, 1], 0), X, y,
          TrainConfig(learning_rate=1.9 / L, epochs=100, batch_size=50, optimizer="sgd"),
          history=hist)
    assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))


def test_divergence_raises():
    X = np.random.default_rng(0).normal(size=(20, 2)) * 100
    with pytest.raises(TrainingDivergedError):
        train(MicroNet.init([2, 1], 0), X, X[:, 0] * 1e3,
              TrainConfig(learning_rate=10.0, epochs=200, batch_size=20, optimizer="sgd"))


def test_loss_head_mismatch():
    with pytest.raises(ValueError):
        train(MicroNet.init([2, 1], 0), np.zeros((3, 2)), [0, 1, 0],
              TrainConfig(loss="cross-entropy"))


def test_train_is_deterministic_and_pure():
    X = np.random.default_rng(3).normal(size=(64, 3))
    y = X.sum(axis=1)
    net = MicroNet.init([3, 5, 1], 0)
    cfg = TrainConfig(epochs=5, batch_size=16, seed=9)
    a, b = train(net, X, y, cfg), train(net, X, y, cfg)
    assert all(np.array_equal(p, q) for p, q in zip(a.weights, b.weights))
    assert np.array_equal(net.weights[0], MicroNet.init([3, 5, 1], 0).weights[0])
    assert dataset_loss(a, X, y) < dataset_loss(net, X, y)


def test_save_load_round_trip(tmp_path):
    net = MicroNet.init([4, 3, 2], 5, "relu", "classification")
    path = tmp_path / "net.json"
    save(net, path)
    back = load(path)
    assert back.activation == "relu" and back.head == "classification"
    x = np.arange(4.0)
    assert np.array_equal(forward(net, x), forward(back, x))
    doc = json.loads(path.read_text())
    doc["version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load(path)
