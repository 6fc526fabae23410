"""Fully connected ReLU network: training and conversion to the SNN.

Training is plain mini-batch gradient descent with softmax
cross-entropy.  Conversion replaces each ReLU unit by an
integrate-and-fire neuron and rescales the weights layer by layer so
that a unit threshold corresponds to the chosen activation percentile
observed on calibration data; the same weights back both the ideal and
the device-backed spiking networks.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validate import ParamsMixin, check_array, check_is_fitted, check_labels
from .snn import SnnNetwork

__all__ = [
    "MlpClassifier",
    "TrainingDivergedError",
    "ZeroActivationError",
    "ConversionReport",
    "ConversionResult",
    "convert",
    "loss_and_gradients",
    "gradient_check",
]


class TrainingDivergedError(RuntimeError):
    pass


class ZeroActivationError(ValueError):
    pass


def _relu(x):
    return np.maximum(x, 0.0)


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_gradients(weights, biases, X, y, bias_penalty=0.0):
    """Cross-entropy loss and analytic gradients for a ReLU MLP.

    weights/biases are lists per layer; returns (loss, dWs, dbs).
    """
    n = X.shape[0]
    activations = [X]
    pre = []
    h = X
    last = len(weights) - 1
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = h @ W + b
        pre.append(z)
        h = z if i == last else _relu(z)
        activations.append(h)
    probs = _softmax(pre[-1])
    eps = 1e-12
    loss = -np.mean(np.log(probs[np.arange(n), y] + eps))
    if bias_penalty:
        loss += 0.5 * bias_penalty * sum(float(b @ b) for b in biases)

    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    dWs, dbs = [None] * len(weights), [None] * len(weights)
    for i in range(last, -1, -1):
        dWs[i] = activations[i].T @ delta
        dbs[i] = delta.sum(axis=0)
        if bias_penalty:
            dbs[i] = dbs[i] + bias_penalty * biases[i]
        if i > 0:
            delta = (delta @ weights[i].T) * (pre[i - 1] > 0)
    return loss, dWs, dbs


def gradient_check(weights, biases, X, y, step=1e-5, bias_penalty=0.0,
                   train_bias=True):
    """Max relative error between analytic and central-difference
    gradients over every parameter."""
    loss, dWs, dbs = loss_and_gradients(weights, biases, X, y, bias_penalty)
    params = list(weights) + (list(biases) if train_bias else [])
    grads = list(dWs) + (list(dbs) if train_bias else [])
    worst = 0.0
    for theta, grad in zip(params, grads):
        flat = theta.reshape(-1)
        gflat = np.asarray(grad).reshape(-1)
        for k in range(flat.size):
            keep = flat[k]
            flat[k] = keep + step
            up, _, _ = loss_and_gradients(weights, biases, X, y, bias_penalty)
            flat[k] = keep - step
            down, _, _ = loss_and_gradients(weights, biases, X, y, bias_penalty)
            flat[k] = keep
            numeric = (up - down) / (2.0 * step)
            scale = max(1.0, abs(numeric), abs(gflat[k]))
            worst = max(worst, abs(numeric - gflat[k]) / scale)
    return worst


class MlpClassifier(ParamsMixin):
    """ReLU multilayer perceptron trained with backpropagation.

    Estimator-style interface: construct with hyperparameters, then
    fit(X, y) / predict(X) / score(X, y).  `bias_mode` is "zero" (train
    without biases, the default: the converted spiking network has no
    bias pathway) or "trained" (biases learned under an L2 penalty and
    checked at conversion time).
    """

    def __init__(
        self,
        hidden=(128,),
        n_classes=10,
        epochs=10,
        batch_size=64,
        learning_rate=0.1,
        lr_decay=0.95,
        seed=42,
        bias_mode="zero",
        bias_penalty=1e-3,
    ):
        self.hidden = hidden
        self.n_classes = n_classes
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.lr_decay = lr_decay
        self.seed = seed
        self.bias_mode = bias_mode
        self.bias_penalty = bias_penalty
        self.weights_ = None
        self.biases_ = None
        self.history_ = None

    def _init_params(self, n_features):
        if self.bias_mode not in ("zero", "trained"):
            raise ValueError("bias_mode must be 'zero' or 'trained'")
        rng = np.random.default_rng(self.seed)
        sizes = [n_features, *self.hidden, self.n_classes]
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)
            weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return weights, biases

    def fit(self, X, y, eval_set=None):
        """Mini-batch gradient descent; records per-epoch loss and accuracy
        in history_ (plus held-out accuracy when eval_set is given)."""
        X = check_array(X)
        y = check_labels(y, self.n_classes)
        self.weights_, self.biases_ = self._init_params(X.shape[1])
        rng = np.random.default_rng(self.seed)
        penalty = self.bias_penalty if self.bias_mode == "trained" else 0.0
        train_bias = self.bias_mode == "trained"
        lr = self.learning_rate
        self.history_ = []
        for epoch in range(self.epochs):
            order = rng.permutation(X.shape[0])
            losses = []
            for start in range(0, X.shape[0], self.batch_size):
                idx = order[start : start + self.batch_size]
                with np.errstate(over="ignore", invalid="ignore"):
                    loss, dWs, dbs = loss_and_gradients(
                        self.weights_, self.biases_, X[idx], y[idx], penalty
                    )
                if not np.isfinite(loss):
                    raise TrainingDivergedError(
                        f"non-finite loss at epoch {epoch}, batch {start // self.batch_size}"
                    )
                losses.append(loss)
                for W, dW in zip(self.weights_, dWs):
                    W -= lr * dW
                if train_bias:
                    for b, db in zip(self.biases_, dbs):
                        b -= lr * db
            if not all(np.all(np.isfinite(W)) for W in self.weights_):
                raise TrainingDivergedError(f"non-finite parameters after epoch {epoch}")
            with np.errstate(over="ignore", invalid="ignore"):
                record = {
                    "epoch": epoch,
                    "loss": float(np.mean(losses)),
                    "train_accuracy": self.score(X, y),
                    "learning_rate": lr,
                }
                if eval_set is not None:
                    record["eval_accuracy"] = self.score(*eval_set)
            self.history_.append(record)
            lr *= self.lr_decay
        return self

    def _forward(self, X, return_hidden=False):
        check_is_fitted(self, "weights_")
        hidden = []
        h = X
        last = len(self.weights_) - 1
        for i, (W, b) in enumerate(zip(self.weights_, self.biases_)):
            z = h @ W + b
            h = z if i == last else _relu(z)
            if i != last:
                hidden.append(h)
        if return_hidden:
            return h, hidden
        return h

    def decision_function(self, X):
        return self._forward(check_array(X))

    def predict_proba(self, X):
        return _softmax(self.decision_function(X))

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)

    def score(self, X, y):
        X = check_array(X)
        y = check_labels(y, self.n_classes)
        return float(np.mean(self.predict(X) == y))

    # -- persistence ---------------------------------------------------------

    def to_json(self) -> str:
        import json

        check_is_fitted(self, "weights_")
        doc = {
            "format": "ringsnn-mlp-1",
            "params": {
                k: (list(v) if isinstance(v, tuple) else v)
                for k, v in self.get_params().items()
            },
            "weights": [w.tolist() for w in self.weights_],
            "biases": [b.tolist() for b in self.biases_],
            "history": self.history_,
        }
        return json.dumps(doc, sort_keys=True)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "MlpClassifier":
        import json

        doc = json.loads(text)
        if doc.get("format") != "ringsnn-mlp-1":
            raise ValueError("not a ringsnn model file")
        params = doc["params"]
        params["hidden"] = tuple(params["hidden"])
        model = cls(**params)
        model.weights_ = [np.array(w, dtype=np.float64) for w in doc["weights"]]
        model.biases_ = [np.array(b, dtype=np.float64) for b in doc["biases"]]
        model.history_ = doc.get("history")
        return model

    @classmethod
    def load(cls, path) -> "MlpClassifier":
        with open(path) as fh:
            return cls.from_json(fh.read())


@dataclass
class ConversionReport:
    """Per-layer normalization record emitted alongside the converted nets."""

    percentile: float
    activation_scales: list
    weight_factors: list
    thresholds: list
    drive_scales: list
    bias_tolerance: float
    max_bias_ratio: float
    calibration_size: int
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "percentile": self.percentile,
            "activation_scales": self.activation_scales,
            "weight_factors": self.weight_factors,
            "thresholds": self.thresholds,
            "drive_scales": self.drive_scales,
            "bias_tolerance": self.bias_tolerance,
            "max_bias_ratio": self.max_bias_ratio,
            "calibration_size": self.calibration_size,
            **self.extras,
        }


@dataclass
class ConversionResult:
    ideal: SnnNetwork
    device: SnnNetwork
    report: ConversionReport


def convert(
    model: MlpClassifier,
    calibration_X,
    percentile: float = 99.9,
    time_steps: int = 25,
    bias_tolerance: float = 1e-3,
    threshold_fraction: float = None,
    routing: str = None,
    drive_percentile: float = None,
) -> ConversionResult:
    """Convert a trained ReLU network into ideal and device-backed SNNs.

    Layer weights are divided by the running ratio of activation
    percentiles so every integrate-and-fire threshold is 1.0.  The
    device network shares the same weight matrices; its per-layer drive
    scale and firing threshold fraction default to the calibrated values
    in `snn_defaults`.
    """
    from . import snn_defaults

    check_is_fitted(model, "weights_")
    X = check_array(calibration_X)
    threshold_fraction = (
        snn_defaults.THRESHOLD_FRACTION if threshold_fraction is None else threshold_fraction
    )
    routing = snn_defaults.ROUTING if routing is None else routing
    drive_percentile = (
        snn_defaults.DRIVE_PERCENTILE if drive_percentile is None else drive_percentile
    )

    max_w = max(float(np.max(np.abs(w))) for w in model.weights_)
    max_b = max(float(np.max(np.abs(b))) for b in model.biases_)
    if max_w > 0:
        max_bias_ratio = max_b / max_w
    else:
        max_bias_ratio = 0.0 if max_b == 0 else np.inf
    if max_bias_ratio > bias_tolerance:
        raise ValueError(
            f"biases too large to fold out (|b|/|w| = {max_bias_ratio:.3g} "
            f"> {bias_tolerance:g}); train with bias_mode='zero'"
        )

    # layer activation percentiles on calibration data
    _, hidden = model._forward(X, return_hidden=True)
    logits = model.decision_function(X)
    scales = []
    for h in hidden:
        scales.append(float(np.percentile(h, percentile)))
    positive_logits = _relu(logits)
    scales.append(float(np.percentile(positive_logits, percentile)))
    if min(scales) <= 0.0:
        raise ZeroActivationError(
            f"activation percentile non-positive per layer: {scales}"
        )

    converted = []
    factors = []
    prev = 1.0
    for W, scale in zip(model.weights_, scales):
        converted.append(W * prev / scale)
        factors.append(prev / scale)
        prev = scale

    thresholds = [1.0] * len(converted)

    # device lane: drives rescaled so the chosen percentile of the net
    # positive drive maps to the top of the power window (spike rates of
    # the previous layer are approximated by its normalized activations)
    rates = X
    drive_scales = []
    for W in converted:
        net = rates @ W
        positive = net[net > 0]
        if positive.size == 0:
            drive_scales.append(1.0)
        else:
            drive_scales.append(1.0 / float(np.percentile(positive, drive_percentile)))
        rates = np.clip(_relu(net), 0.0, 1.0)

    ideal = SnnNetwork(
        weights=converted,
        thresholds=thresholds,
        neuron_kind="ideal",
        time_steps=time_steps,
        metadata={"source": "ann-conversion", "percentile": percentile},
    )
    device = SnnNetwork(
        weights=[w.copy() for w in converted],
        thresholds=list(thresholds),
        neuron_kind="device",
        time_steps=time_steps,
        drive_scales=drive_scales,
        threshold_fraction=threshold_fraction,
        routing=routing,
        metadata={"source": "ann-conversion", "percentile": percentile},
    )
    report = ConversionReport(
        percentile=percentile,
        activation_scales=scales,
        weight_factors=factors,
        thresholds=thresholds,
        drive_scales=drive_scales,
        bias_tolerance=bias_tolerance,
        max_bias_ratio=max_bias_ratio,
        calibration_size=int(X.shape[0]),
        extras={"threshold_fraction": threshold_fraction, "routing": routing},
    )
    return ConversionResult(ideal=ideal, device=device, report=report)
