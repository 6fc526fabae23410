"""Training, gradients and ANN-to-SNN conversion."""

import numpy as np
import pytest

from ringsnn import dataio
from ringsnn.ann import (
    MlpClassifier,
    TrainingDivergedError,
    ZeroActivationError,
    convert,
    gradient_check,
    loss_and_gradients,
)
from ringsnn.snn import evaluate, infer, periodic_encode

from conftest import needs_mnist


def toy_problem(rng, n=40, features=6, classes=3):
    X = rng.normal(size=(n, features))
    y = rng.integers(0, classes, n)
    return X, y


def test_gradient_check_toy_model(rng):
    X, y = toy_problem(rng, n=5)
    model = MlpClassifier(hidden=(4,), n_classes=3, seed=0)
    weights, biases = model._init_params(6)
    worst = gradient_check(weights, biases, X, y)
    assert worst <= 1e-5


def test_gradient_check_with_bias_penalty(rng):
    X, y = toy_problem(rng, n=4)
    model = MlpClassifier(hidden=(4,), n_classes=3, seed=1, bias_mode="trained")
    weights, biases = model._init_params(6)
    for b in biases:
        b += rng.normal(size=b.shape) * 0.1
    worst = gradient_check(weights, biases, X, y, bias_penalty=1e-2)
    assert worst <= 1e-5


def test_zero_epochs_keeps_initialization(rng):
    X, y = toy_problem(rng)
    model = MlpClassifier(hidden=(4,), n_classes=3, epochs=0, seed=7).fit(X, y)
    init_w, init_b = model._init_params(6)
    for trained, init in zip(model.weights_, init_w):
        assert np.array_equal(trained, init)
    assert model.history_ == []


def test_training_reduces_loss_and_separates(rng):
    # two well-separated gaussian blobs
    n = 200
    X = np.vstack(
        [rng.normal(-2.0, 0.5, size=(n, 4)), rng.normal(2.0, 0.5, size=(n, 4))]
    )
    y = np.array([0] * n + [1] * n)
    model = MlpClassifier(hidden=(8,), n_classes=2, epochs=5, seed=3).fit(X, y)
    assert model.history_[0]["loss"] > model.history_[-1]["loss"]
    assert model.score(X, y) > 0.97


def test_divergence_raises(rng):
    X, y = toy_problem(rng, n=64)
    model = MlpClassifier(
        hidden=(4,), n_classes=3, epochs=3, learning_rate=1e200, seed=0
    )
    with pytest.raises(TrainingDivergedError):
        model.fit(X, y)


def test_estimator_params_roundtrip():
    model = MlpClassifier(hidden=(64,), epochs=3)
    params = model.get_params()
    assert params["hidden"] == (64,) and params["epochs"] == 3
    clone = MlpClassifier(**params)
    assert clone.get_params() == params
    model.set_params(epochs=9)
    assert model.epochs == 9
    with pytest.raises(ValueError):
        model.set_params(bogus=1)


def test_predict_requires_fit():
    with pytest.raises(RuntimeError):
        MlpClassifier().predict(np.zeros((1, 4)))


def test_input_validation(rng):
    X, y = toy_problem(rng)
    model = MlpClassifier(hidden=(4,), n_classes=3, epochs=1, seed=0)
    with pytest.raises(ValueError):
        model.fit(np.full_like(X, np.nan), y)
    with pytest.raises(ValueError):
        model.fit(X, y + 10)


def test_model_json_roundtrip(tmp_path, rng):
    X, y = toy_problem(rng)
    model = MlpClassifier(hidden=(4,), n_classes=3, epochs=2, seed=5).fit(X, y)
    path = tmp_path / "model.json"
    model.save(path)
    back = MlpClassifier.load(path)
    for w_orig, w_back in zip(model.weights_, back.weights_):
        assert np.array_equal(w_orig, w_back)
    assert back.get_params() == model.get_params()
    assert np.array_equal(back.predict(X), model.predict(X))


# ---------------------------------------------------------------------------
# conversion
# ---------------------------------------------------------------------------


def test_convert_rejects_zero_weights():
    model = MlpClassifier(hidden=(4,), n_classes=3)
    model.weights_ = [np.zeros((6, 4)), np.zeros((4, 3))]
    model.biases_ = [np.zeros(4), np.zeros(3)]
    with pytest.raises(ZeroActivationError):
        convert(model, np.abs(np.random.default_rng(0).normal(size=(20, 6))))


def test_convert_rejects_large_biases(rng):
    X, y = toy_problem(rng, n=60)
    model = MlpClassifier(hidden=(4,), n_classes=3, epochs=2, seed=0).fit(X, y)
    model.biases_ = [np.full(4, 10.0), np.zeros(3)]
    with pytest.raises(ValueError, match="biases"):
        convert(model, np.abs(X))


def test_single_layer_constant_drive_rate_is_exact_staircase(rng):
    # reset-to-zero integrate-and-fire under constant drive r spikes every
    # ceil(1/r) steps exactly; this is the sharp form of the rate
    # approximation for this reset contract
    steps = 120
    for drive in (0.09, 0.21, 0.37, 0.52, 0.8):
        model = MlpClassifier(hidden=(), n_classes=2)
        model.weights_ = [np.array([[drive, drive / 2]])]
        model.biases_ = [np.zeros(2)]
        result = convert(model, np.ones((10, 1)), percentile=100.0)
        raster = periodic_encode(np.array([255], dtype=np.uint8), steps)
        counts = infer(result.ideal, raster).spike_counts
        for j, r in enumerate((1.0, 0.5)):  # weights normalized by max drive
            assert counts[j] == steps // int(np.ceil(1.0 / r))


def test_single_layer_rates_track_activations(rng):
    # positive-weight single layer: spike rates follow the normalized
    # activations.  Reset-to-zero discards threshold overshoot, so rates
    # sit below the activation by up to the staircase loss (~35% at
    # mid-range rates, measured); order is preserved, which is what the
    # spike-count readout consumes.
    W = rng.uniform(0.2, 1.0, size=(5, 3))
    model = MlpClassifier(hidden=(), n_classes=3)
    model.weights_ = [W]
    model.biases_ = [np.zeros(3)]
    X_cal = rng.uniform(0.0, 1.0, size=(50, 5))
    result = convert(model, X_cal, percentile=100.0)
    x = np.clip(rng.uniform(0.3, 0.9, size=5), 0, 1)
    activation = np.clip(x @ result.ideal.weights[0], 0.0, 1.0)
    steps = 100
    raster = periodic_encode((x * 255).astype(np.uint8), steps)
    rates = infer(result.ideal, raster).spike_counts / steps
    assert np.all(rates <= activation + 1.0 / steps)
    assert np.all(rates >= activation * 0.6 - 1.0 / steps)
    assert np.array_equal(np.argsort(rates), np.argsort(activation))


def test_conversion_scale_invariance(rng):
    X, y = toy_problem(rng, n=120)
    model = MlpClassifier(hidden=(6,), n_classes=3, epochs=3, seed=2).fit(X, y)
    scaled = MlpClassifier(hidden=(6,), n_classes=3)
    scaled.weights_ = [w * 2.0 for w in model.weights_]  # exact in floats
    scaled.biases_ = [b.copy() for b in model.biases_]
    X_cal = np.abs(X)
    base = convert(model, X_cal)
    double = convert(scaled, X_cal)
    for w_base, w_double in zip(base.ideal.weights, double.ideal.weights):
        assert np.array_equal(w_base, w_double)


@needs_mnist
def test_converted_network_matches_ann_argmax(small_model, mnist_test):
    # deterministic high-T run: ideal-SNN predictions track the ANN argmax
    sample = mnist_test.take(np.arange(500))
    X = dataio.normalize(sample.flat_images)
    calibration = X[:400]
    result = convert(small_model, calibration)
    ann_pred = small_model.predict(X)
    snn_eval = evaluate(
        result.ideal, sample.images, sample.labels, time_steps=200, encoder="periodic"
    )
    agreement = float(np.mean(snn_eval.predictions == ann_pred))
    assert agreement >= 0.98


@needs_mnist
def test_conversion_report_contents(small_model, mnist_train):
    calibration = dataio.normalize(mnist_train.flat_images[:2000])
    result = convert(small_model, calibration)
    report = result.report.to_dict()
    assert report["percentile"] == 99.9
    assert len(report["activation_scales"]) == 2
    assert all(s > 0 for s in report["activation_scales"])
    assert len(report["drive_scales"]) == 2
    assert result.ideal.neuron_kind == "ideal"
    assert result.device.neuron_kind == "device"
    for w_ideal, w_device in zip(result.ideal.weights, result.device.weights):
        assert np.array_equal(w_ideal, w_device)  # shared weights


@needs_mnist
def test_small_model_learns(small_model, mnist_test):
    X = dataio.normalize(mnist_test.flat_images[:2000])
    assert small_model.score(X, mnist_test.labels[:2000]) >= 0.88
