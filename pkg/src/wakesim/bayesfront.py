"""Log-domain naive Bayes front end.

Likelihoods are stored as 8-bit codes n = round(m * log_b(p)) with b < 1, so
small codes mean likely and per-class evidence accumulates by integer
addition. The minimum accumulated code wins; a minimum at or above the
underflow threshold means every class decoded below machine-integer
resolution and the inference is flagged invalid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .datapipe.beats import CLASS_NAMES, N_CLASSES
from .datapipe.quantizers import QuantizerSpec, fit_quantizer, quantize
from .errors import ReadFault

N_FEATURES = 4
N_LEVELS = 8
SMOOTHING_SIGMA = 1.0

# Probabilities below 2**-16 are not representable on the 16-bit
# accumulation path, so decoding past that point defines "invalid".
UNDERFLOW_BITS = 16


@dataclass(frozen=True)
class LogCodec:
    """Fixed-point logarithmic probability codec."""

    base: float = 0.15
    scale: int = 16
    width: int = 8

    def __post_init__(self):
        if not 0.0 < self.base < 1.0:
            raise ValueError("base must lie strictly between 0 and 1")
        if self.scale < 1 or self.width < 1:
            raise ValueError("scale and width must be positive")

    @property
    def code_max(self) -> int:
        return (1 << self.width) - 1


def encode_log(p: float, codec: LogCodec = LogCodec()) -> int:
    """Encode a probability as a clamped integer code."""
    if p <= 0.0:
        raise ValueError("probability must be positive")
    n = round(codec.scale * math.log(p) / math.log(codec.base))
    return min(max(int(n), 0), codec.code_max)


def decode_log(code: int, codec: LogCodec = LogCodec()) -> float:
    """Decode a code back to its representative probability base**(n/scale)."""
    return codec.base ** (code / codec.scale)


def invalid_threshold(codec: LogCodec = LogCodec(), underflow_bits: int = UNDERFLOW_BITS) -> int:
    """Smallest code whose decoded probability falls below 2**-underflow_bits."""
    # base**(n/scale) < 2**-k  <=>  n > k * scale * ln 2 / -ln(base)
    bound = underflow_bits * codec.scale * math.log(2.0) / -math.log(codec.base)
    return math.floor(bound) + 1


def fit_likelihoods(levels, labels, n_classes: int = N_CLASSES, n_levels: int = N_LEVELS,
                    sigma: float = SMOOTHING_SIGMA) -> np.ndarray:
    """Per-class, per-feature level histograms with Gaussian smoothing.

    Raw counts c_j are convolved with exp(-(l-j)^2 / (2 sigma^2)) and
    normalized, which keeps every level strictly positive for any class
    with at least one training beat.

    Returns probabilities of shape (n_classes, n_features, n_levels).
    """
    levels = np.asarray(levels, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if levels.ndim != 2:
        raise ValueError("levels must be (n_beats, n_features)")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    n_features = levels.shape[1]
    grid = np.arange(n_levels)
    kernel = np.exp(-((grid[:, None] - grid[None, :]) ** 2) / (2.0 * sigma * sigma))
    probs = np.empty((n_classes, n_features, n_levels))
    for c in range(n_classes):
        sel = levels[labels == c]
        if len(sel) == 0:
            raise ValueError(f"class {c} has no training beats")
        for f in range(n_features):
            counts = np.bincount(sel[:, f], minlength=n_levels).astype(np.float64)
            smoothed = kernel @ counts
            probs[c, f] = smoothed / smoothed.sum()
    return probs


@dataclass
class BayesModel:
    """Trained front-end model: bin choice, quantizers, and code table."""

    feature_bins: tuple[int, ...]
    quantizers: tuple[QuantizerSpec, ...]
    codes: np.ndarray  # (n_classes, n_features, n_levels), uint8
    codec: LogCodec
    class_names: tuple[str, ...] = CLASS_NAMES

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=np.uint8)
        expected = (len(self.class_names), len(self.feature_bins), N_LEVELS)
        if self.codes.shape != expected:
            raise ValueError(f"code table shape {self.codes.shape} != {expected}")

    @cached_property
    def invalid_threshold(self) -> int:
        return invalid_threshold(self.codec)

    @property
    def n_features(self) -> int:
        return len(self.feature_bins)

    def quantize_features(self, mags) -> list[int]:
        """Quantized level of each selected bin of one feature vector."""
        mags = np.asarray(mags, dtype=np.float64)
        return [quantize(float(mags[b]), q) for b, q in zip(self.feature_bins, self.quantizers)]


@dataclass(frozen=True)
class ClassScores:
    """Outcome of one front-end inference."""

    scores: tuple[int, ...]
    predicted: int
    tie_with_normal: bool
    invalid: bool


class IdealReader:
    """Fault-free word reader: returns stored codes unchanged."""

    def __init__(self, model: BayesModel):
        self._codes = model.codes

    def __call__(self, class_id: int, feature: int, level: int) -> int:
        return int(self._codes[class_id, feature, level])


def fit_bayes_model(mags, labels, ranked_bins, codec: LogCodec = LogCodec()) -> BayesModel:
    """Fit the front-end model on a training feature matrix.

    Takes the top-4 ranked bins, fits one 8-level quantizer per bin, builds
    smoothed likelihoods, and encodes them. Class priors are uniform and
    therefore omitted from the code table. Fitting is deterministic: the
    same inputs reproduce the same table bit for bit.
    """
    mags = np.asarray(mags, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    bins = tuple(int(b) for b, _ in ranked_bins[:N_FEATURES])
    if len(bins) < N_FEATURES:
        raise ValueError(f"need at least {N_FEATURES} ranked bins")
    quantizers = tuple(fit_quantizer(mags[:, b], labels, N_LEVELS) for b in bins)
    levels = np.stack(
        [quantize(mags[:, b], q) for b, q in zip(bins, quantizers)], axis=1
    )
    probs = fit_likelihoods(levels, labels)
    codes = np.empty_like(probs, dtype=np.uint8)
    for idx, p in np.ndenumerate(probs):
        codes[idx] = encode_log(float(p), codec)
    return BayesModel(bins, quantizers, codes, codec)


def bayes_infer(levels, model: BayesModel, reader) -> ClassScores:
    """Accumulate per-class codes through a word reader and pick the argmin.

    The reader is any callable (class_id, feature, level) -> code. A
    ReadFault from the reader is treated as a stuck-at-max read of every
    word, which lands the result in the invalid band.
    """
    n_classes = len(model.class_names)
    try:
        scores = [
            sum(int(reader(c, f, int(levels[f]))) for f in range(model.n_features))
            for c in range(n_classes)
        ]
    except ReadFault:
        scores = [model.codec.code_max * model.n_features] * n_classes
    smin = min(scores)
    predicted = scores.index(smin)
    tie_with_normal = scores[0] == smin and any(s == smin for s in scores[1:])
    return ClassScores(
        scores=tuple(scores),
        predicted=predicted,
        tie_with_normal=tie_with_normal,
        invalid=smin >= model.invalid_threshold,
    )


# ---------------------------------------------------------------------------
# Model file format: JSON with the code table in class-major order
# (class, then feature, then level). That order is normative.
# ---------------------------------------------------------------------------

def save_bayes_model(path: str, model: BayesModel) -> None:
    doc = {
        "codec": {"base": model.codec.base, "scale": model.codec.scale, "width": model.codec.width},
        "feature_bins": list(model.feature_bins),
        "quantizers": [
            {"clip_lo": q.clip_lo, "clip_hi": q.clip_hi, "levels": q.levels}
            for q in model.quantizers
        ],
        "codes": [int(v) for v in model.codes.reshape(-1)],
        "class_names": list(model.class_names),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_bayes_model(path: str) -> BayesModel:
    with open(path, "r") as fh:
        doc = json.load(fh)
    codec = LogCodec(**doc["codec"])
    quantizers = tuple(QuantizerSpec(**q) for q in doc["quantizers"])
    class_names = tuple(doc["class_names"])
    shape = (len(class_names), len(doc["feature_bins"]), N_LEVELS)
    codes = np.array(doc["codes"], dtype=np.uint8).reshape(shape)
    return BayesModel(tuple(doc["feature_bins"]), quantizers, codes, codec, class_names)
