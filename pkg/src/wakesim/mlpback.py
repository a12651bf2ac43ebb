"""Int8 MLP back end: float training, post-training quantization, integer inference.

The network consumes the 32 top-ranked spectral bins, each affine-quantized
to int8 between its 0.5th and 99.5th training percentiles. The float model
trains on the common dequantization x = (q + 128) / 255 of those int8
features, so the integer pipeline's input tensor has a single per-tensor
scale (1/255, zero point -128) even though the feature clips differ per bin.

Integer inference is the reference arithmetic: int8 weights, int32
accumulators, bias add, then requantization by a real-valued multiplier
with round-half-to-even and clamping. Hidden activations are calibrated to
[0, max] so the ReLU folds into the requantization clamp. Final-layer
logits stay int32 and the argmax (lowest index on ties) is the prediction.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingDiverged

HIDDEN_DIMS = (74, 100)
N_INPUT_BINS = 32
INPUT_SCALE = 1.0 / 255.0
INPUT_ZERO_POINT = -128
CLIP_PERCENTILES = (0.5, 99.5)


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.05
    epochs: int = 200
    batch_size: int = 64
    seed: int = 0


@dataclass(frozen=True)
class InputQuantizer:
    """Per-feature affine int8 quantizer for the selected bins."""

    clip_lo: np.ndarray
    clip_hi: np.ndarray

    def __call__(self, raw) -> np.ndarray:
        raw = np.asarray(raw, dtype=np.float64)
        unit = (raw - self.clip_lo) / (self.clip_hi - self.clip_lo)
        q = np.floor(unit * 255.0 + 0.5) + INPUT_ZERO_POINT
        return np.clip(q, -128, 127).astype(np.int8)

    def dequantize(self, q) -> np.ndarray:
        """Shared [0, 1] embedding of the int8 features; the float model's input."""
        return (np.asarray(q, dtype=np.float64) - INPUT_ZERO_POINT) * INPUT_SCALE


def fit_input_quantizer(values) -> InputQuantizer:
    """Clip each feature at its 0.5 / 99.5 training percentiles."""
    values = np.asarray(values, dtype=np.float64)
    lo = np.percentile(values, CLIP_PERCENTILES[0], axis=0)
    hi = np.percentile(values, CLIP_PERCENTILES[1], axis=0)
    degenerate = ~(lo < hi)
    if degenerate.any():
        # Widen constant features so the affine map stays defined.
        hi = hi.copy()
        hi[degenerate] = lo[degenerate] + 1.0
    return InputQuantizer(clip_lo=lo, clip_hi=hi)


@dataclass
class MlpFloat:
    """Float64 reference network (ReLU hidden layers, linear output)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    loss_curve: list[float] = field(default_factory=list)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

    def forward(self, x: np.ndarray) -> list[np.ndarray]:
        """Activations per layer; index 0 is the input batch."""
        acts = [np.asarray(x, dtype=np.float64)]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = acts[-1] @ w.T + b
            acts.append(np.maximum(z, 0.0) if i < len(self.weights) - 1 else z)
        return acts

    def predict(self, x: np.ndarray) -> np.ndarray:
        logits = self.forward(x)[-1]
        return np.argmax(logits, axis=1)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(model: MlpFloat, x: np.ndarray, y: np.ndarray):
    """Mean cross-entropy and its gradients for one batch."""
    acts = model.forward(x)
    logits = acts[-1]
    probs = _softmax(logits)
    n = len(y)
    loss = float(-np.log(probs[np.arange(n), y] + 1e-300).mean())
    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads_w = []
    grads_b = []
    for i in range(len(model.weights) - 1, -1, -1):
        grads_w.append(delta.T @ acts[i])
        grads_b.append(delta.sum(axis=0))
        if i > 0:
            delta = (delta @ model.weights[i]) * (acts[i] > 0)
    return loss, grads_w[::-1], grads_b[::-1]


def train_mlp(inputs, labels, config: TrainConfig = TrainConfig(),
              hidden_dims: tuple[int, ...] = HIDDEN_DIMS, n_classes: int = 4) -> MlpFloat:
    """Plain minibatch gradient descent, deterministic for a seed.

    Initialization, batch order, and accumulation order are all fixed by
    the seed, so refits reproduce identical float weights on a platform.
    Raises TrainingDiverged (with the epoch) if the loss goes non-finite.
    """
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    rng = np.random.default_rng(config.seed)
    dims = (x.shape[1],) + tuple(hidden_dims) + (n_classes,)
    weights = [
        rng.normal(0.0, np.sqrt(2.0 / dims[i]), size=(dims[i + 1], dims[i]))
        for i in range(len(dims) - 1)
    ]
    biases = [np.zeros(dims[i + 1]) for i in range(len(dims) - 1)]
    model = MlpFloat(weights=weights, biases=biases)
    n = len(x)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, gw, gb = loss_and_grads(model, x[batch], y[batch])
            if not np.isfinite(loss):
                raise TrainingDiverged(epoch)
            for i in range(len(model.weights)):
                model.weights[i] -= config.lr * gw[i]
                model.biases[i] -= config.lr * gb[i]
            epoch_loss += loss
            n_batches += 1
        model.loss_curve.append(epoch_loss / max(n_batches, 1))
    return model


# ---------------------------------------------------------------------------
# Quantization
# ---------------------------------------------------------------------------

@dataclass
class QuantLayer:
    w_q: np.ndarray          # int8, (out, in), row-major
    b_q: np.ndarray          # int32, at scale s_in * s_w
    s_w: float
    s_in: float
    zp_in: int
    s_out: float | None      # None on the final layer: logits stay int32
    zp_out: int | None


@dataclass
class MlpModel:
    dims: tuple[int, ...]
    layers: list[QuantLayer]
    activation: str = "relu"
    float_ref: MlpFloat | None = None


def _weight_scale(w: np.ndarray) -> float:
    peak = float(np.abs(w).max())
    return peak / 127.0 if peak > 0 else 1.0


def quantize_mlp(model: MlpFloat, calibration: np.ndarray) -> MlpModel:
    """Post-training quantization against a calibration batch.

    Weights: symmetric per-tensor int8 (scale = max|w| / 127; an all-zero
    tensor gets scale 1). Biases: int32 at the combined input*weight scale.
    Hidden activations: per-tensor affine from the observed [0, max] range.
    """
    calibration = np.asarray(calibration, dtype=np.float64)
    acts = model.forward(calibration)
    layers: list[QuantLayer] = []
    s_in = INPUT_SCALE
    zp_in = INPUT_ZERO_POINT
    n_layers = len(model.weights)
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        s_w = _weight_scale(w)
        w_q = np.clip(np.rint(w / s_w), -127, 127).astype(np.int8)
        b_q = np.rint(b / (s_in * s_w)).astype(np.int64)
        if np.abs(b_q).max(initial=0) > np.iinfo(np.int32).max:
            raise ValueError("bias does not fit in int32 at the combined scale")
        b_q = b_q.astype(np.int32)
        if i < n_layers - 1:
            peak = float(acts[i + 1].max())
            s_out = peak / 255.0 if peak > 0 else 1.0 / 255.0
            zp_out = -128  # range [0, peak]: ReLU folds into the clamp
            layers.append(QuantLayer(w_q, b_q, s_w, s_in, zp_in, s_out, zp_out))
            s_in, zp_in = s_out, zp_out
        else:
            layers.append(QuantLayer(w_q, b_q, s_w, s_in, zp_in, None, None))
    return MlpModel(dims=model.dims, layers=layers, float_ref=model)


def mlp_infer(q_input, model: MlpModel) -> tuple[int, np.ndarray]:
    """Integer-only forward pass.

    Returns (predicted class, int32 logits). Deterministic given the model
    file contents: every step is integer arithmetic except the requantize
    multiply, which is a single float64 product rounded half-to-even.
    """
    x = np.asarray(q_input, dtype=np.int32)
    if x.shape != (model.dims[0],):
        raise ValueError(f"expected input of shape ({model.dims[0]},), got {x.shape}")
    for layer in model.layers:
        acc = layer.w_q.astype(np.int32) @ (x - layer.zp_in) + layer.b_q
        if layer.s_out is None:
            logits = acc
        else:
            multiplier = layer.s_in * layer.s_w / layer.s_out
            q = np.rint(acc * multiplier) + layer.zp_out
            x = np.clip(q, -128, 127).astype(np.int32)
    pred = int(np.argmax(logits))
    return pred, logits


class MlpClassifier:
    """Bundle of bin selection, input quantizer, and quantized network."""

    def __init__(self, bins, input_quantizer: InputQuantizer, model: MlpModel):
        self.bins = tuple(int(b) for b in bins)
        self.input_quantizer = input_quantizer
        self.model = model

    def quantize_input(self, mags) -> np.ndarray:
        mags = np.asarray(mags, dtype=np.float64)
        return self.input_quantizer(mags[list(self.bins)])

    def predict(self, beat, mags) -> int:
        pred, _ = mlp_infer(self.quantize_input(mags), self.model)
        return pred

    def predict_features(self, mags_matrix) -> np.ndarray:
        return np.array([
            mlp_infer(self.input_quantizer(row[list(self.bins)]), self.model)[0]
            for row in np.asarray(mags_matrix, dtype=np.float64)
        ])


def fit_backend(mags, labels, ranked_bins, config: TrainConfig = TrainConfig()) -> MlpClassifier:
    """Train the full back end from a feature matrix and a bin ranking."""
    bins = [int(b) for b, _ in ranked_bins[:N_INPUT_BINS]]
    if len(bins) < N_INPUT_BINS:
        raise ValueError(f"need {N_INPUT_BINS} ranked bins, got {len(bins)}")
    raw = np.asarray(mags, dtype=np.float64)[:, bins]
    quantizer = fit_input_quantizer(raw)
    x = quantizer.dequantize(quantizer(raw))
    float_model = train_mlp(x, labels, config)
    model = quantize_mlp(float_model, x)
    return MlpClassifier(bins, quantizer, model)


# ---------------------------------------------------------------------------
# Model file format: JSON, weights/biases as base64 blobs with declared
# shapes, row-major, fixed little-endian integer layout.
# ---------------------------------------------------------------------------

def _blob(arr: np.ndarray, dtype: str) -> str:
    return base64.b64encode(np.ascontiguousarray(arr.astype(dtype))).decode("ascii")


def _unblob(text: str, dtype: str, shape) -> np.ndarray:
    return np.frombuffer(base64.b64decode(text), dtype=dtype).reshape(shape).copy()


def save_classifier(path: str, clf: MlpClassifier) -> None:
    doc = {
        "dims": list(clf.model.dims),
        "activation": clf.model.activation,
        "input": {
            "bins": list(clf.bins),
            "clip_lo": [float(v) for v in clf.input_quantizer.clip_lo],
            "clip_hi": [float(v) for v in clf.input_quantizer.clip_hi],
            "scale": INPUT_SCALE,
            "zero_point": INPUT_ZERO_POINT,
        },
        "layers": [
            {
                "shape": list(layer.w_q.shape),
                "weights": _blob(layer.w_q, "int8"),
                "bias": _blob(layer.b_q, "<i4"),
                "s_w": layer.s_w,
                "s_in": layer.s_in,
                "zp_in": layer.zp_in,
                "s_out": layer.s_out,
                "zp_out": layer.zp_out,
            }
            for layer in clf.model.layers
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_classifier(path: str) -> MlpClassifier:
    with open(path, "r") as fh:
        doc = json.load(fh)
    layers = []
    for spec in doc["layers"]:
        shape = tuple(spec["shape"])
        layers.append(QuantLayer(
            w_q=_unblob(spec["weights"], "int8", shape),
            b_q=_unblob(spec["bias"], "<i4", (shape[0],)).astype(np.int32),
            s_w=spec["s_w"],
            s_in=spec["s_in"],
            zp_in=spec["zp_in"],
            s_out=spec["s_out"],
            zp_out=spec["zp_out"],
        ))
    model = MlpModel(dims=tuple(doc["dims"]), layers=layers, activation=doc["activation"])
    quantizer = InputQuantizer(
        clip_lo=np.array(doc["input"]["clip_lo"], dtype=np.float64),
        clip_hi=np.array(doc["input"]["clip_hi"], dtype=np.float64),
    )
    return MlpClassifier(doc["input"]["bins"], quantizer, model)
