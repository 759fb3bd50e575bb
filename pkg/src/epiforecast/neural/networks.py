"""The five recurrent architectures, their wiring, and weight checkpoints.

Every network maps a scaled window of ``n_s`` values to one scalar (the next
scaled value).  Architectures:

* ``vanilla``: one LSTM layer, last hidden state -> linear output.
* ``stacked``: two LSTM layers; the second consumes the first's full hidden
  sequence.
* ``bidirectional``: forward and reversed passes; final states concatenated.
* ``cnn_lstm``: the window is split into subsequences; a shared valid
  convolution + ReLU + max pooling turns each into one LSTM input step.
* ``conv_lstm``: the window is a single 1-d frame; gate pre-activations are
  same-padding convolutions and the final hidden map is flattened.

Windows are normalized per window by their last value before entering a
network; predictions are scaled back, so outputs live on the raw scale.

Checkpoint format (JSON, text): ``{"format": "epiforecast-weights",
"format_version": 1, "config": {...}, "scaler": ..., "weights": {name:
{"shape": [...], "data": [flat values]}}}``.  The flat values are written
with full float precision and round-trip exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..forecasting import WindowLengthMismatch
from .layers import (
    conv1d_valid,
    conv1d_valid_backward,
    convlstm_backward,
    convlstm_forward,
    lstm_backward,
    lstm_forward,
    maxpool_backward,
    maxpool_forward,
)

ARCHITECTURES = ("vanilla", "stacked", "bidirectional", "cnn_lstm", "conv_lstm")
VANILLA_UNITS = 100
DEFAULT_UNITS = 50
DEFAULT_FILTERS = 64
INIT_SCALE = 0.05

CHECKPOINT_FORMAT = "epiforecast-weights"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture choice plus all training hyperparameters."""

    architecture: str
    n_s: int
    seed: int
    n_n: int
    n_f: int = DEFAULT_FILTERS
    kernel_size: int | None = None
    pool_size: int | None = None
    learning_rate: float = 0.1
    epochs: int = 200

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if min(self.n_s, self.n_n, self.n_f, self.epochs) < 1:
            raise ValueError("n_s, n_n, n_f, and epochs must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")

    @classmethod
    def for_architecture(cls, architecture: str, n_s: int, seed: int, **overrides):
        """Defaults: 100 units for vanilla, 50 for the rest, 64 conv filters."""
        units = VANILLA_UNITS if architecture == "vanilla" else DEFAULT_UNITS
        overrides.setdefault("n_n", units)
        return cls(architecture=architecture, n_s=n_s, seed=seed, **overrides)


def _last_step_gradient(d_last: np.ndarray, steps: int) -> np.ndarray:
    """Hidden-sequence gradient that is zero everywhere but the final step."""
    batch, units = d_last.shape
    d_hs = np.zeros((batch, steps, units))
    d_hs[:, -1] = d_last
    return d_hs


class _VanillaNet:
    def __init__(self, config: NetworkConfig):
        self.n_s = config.n_s
        self.n_n = config.n_n

    def param_shapes(self):
        n = self.n_n
        return [
            ("lstm.wx", (1, 4 * n)),
            ("lstm.wh", (n, 4 * n)),
            ("lstm.b", (4 * n,)),
            ("out.w", (n, 1)),
            ("out.b", (1,)),
        ]

    def forward(self, p, x):
        hs, cache = lstm_forward(x[:, :, None], p["lstm.wx"], p["lstm.wh"], p["lstm.b"])
        h_last = hs[:, -1]
        y = h_last @ p["out.w"] + p["out.b"]
        return y[:, 0], {"lstm": cache, "h_last": h_last, "steps": x.shape[1]}

    def backward(self, p, cache, dy):
        d_last = dy[:, None] @ p["out.w"].T
        _, dwx, dwh, db = lstm_backward(
            _last_step_gradient(d_last, cache["steps"]), cache["lstm"], p["lstm.wx"], p["lstm.wh"]
        )
        return {
            "lstm.wx": dwx,
            "lstm.wh": dwh,
            "lstm.b": db,
            "out.w": cache["h_last"].T @ dy[:, None],
            "out.b": np.array([dy.sum()]),
        }


class _StackedNet:
    def __init__(self, config: NetworkConfig):
        self.n_s = config.n_s
        self.n_n = config.n_n

    def param_shapes(self):
        n = self.n_n
        return [
            ("lstm1.wx", (1, 4 * n)),
            ("lstm1.wh", (n, 4 * n)),
            ("lstm1.b", (4 * n,)),
            ("lstm2.wx", (n, 4 * n)),
            ("lstm2.wh", (n, 4 * n)),
            ("lstm2.b", (4 * n,)),
            ("out.w", (n, 1)),
            ("out.b", (1,)),
        ]

    def forward(self, p, x):
        hs1, cache1 = lstm_forward(x[:, :, None], p["lstm1.wx"], p["lstm1.wh"], p["lstm1.b"])
        hs2, cache2 = lstm_forward(hs1, p["lstm2.wx"], p["lstm2.wh"], p["lstm2.b"])
        h_last = hs2[:, -1]
        y = h_last @ p["out.w"] + p["out.b"]
        return y[:, 0], {"l1": cache1, "l2": cache2, "h_last": h_last, "steps": x.shape[1]}

    def backward(self, p, cache, dy):
        d_last = dy[:, None] @ p["out.w"].T
        d_hs1, dwx2, dwh2, db2 = lstm_backward(
            _last_step_gradient(d_last, cache["steps"]), cache["l2"], p["lstm2.wx"], p["lstm2.wh"]
        )
        _, dwx1, dwh1, db1 = lstm_backward(d_hs1, cache["l1"], p["lstm1.wx"], p["lstm1.wh"])
        return {
            "lstm1.wx": dwx1,
            "lstm1.wh": dwh1,
            "lstm1.b": db1,
            "lstm2.wx": dwx2,
            "lstm2.wh": dwh2,
            "lstm2.b": db2,
            "out.w": cache["h_last"].T @ dy[:, None],
            "out.b": np.array([dy.sum()]),
        }


class _BidirectionalNet:
    def __init__(self, config: NetworkConfig):
        self.n_s = config.n_s
        self.n_n = config.n_n

    def param_shapes(self):
        n = self.n_n
        return [
            ("fwd.wx", (1, 4 * n)),
            ("fwd.wh", (n, 4 * n)),
            ("fwd.b", (4 * n,)),
            ("bwd.wx", (1, 4 * n)),
            ("bwd.wh", (n, 4 * n)),
            ("bwd.b", (4 * n,)),
            ("out.w", (2 * n, 1)),
            ("out.b", (1,)),
        ]

    def forward(self, p, x):
        x3 = x[:, :, None]
        hs_f, cache_f = lstm_forward(x3, p["fwd.wx"], p["fwd.wh"], p["fwd.b"])
        hs_b, cache_b = lstm_forward(x3[:, ::-1], p["bwd.wx"], p["bwd.wh"], p["bwd.b"])
        h_cat = np.concatenate([hs_f[:, -1], hs_b[:, -1]], axis=1)
        y = h_cat @ p["out.w"] + p["out.b"]
        return y[:, 0], {"f": cache_f, "b": cache_b, "h_cat": h_cat, "steps": x.shape[1]}

    def backward(self, p, cache, dy):
        n = self.n_n
        d_cat = dy[:, None] @ p["out.w"].T
        _, dwx_f, dwh_f, db_f = lstm_backward(
            _last_step_gradient(d_cat[:, :n], cache["steps"]), cache["f"], p["fwd.wx"], p["fwd.wh"]
        )
        _, dwx_b, dwh_b, db_b = lstm_backward(
            _last_step_gradient(d_cat[:, n:], cache["steps"]), cache["b"], p["bwd.wx"], p["bwd.wh"]
        )
        return {
            "fwd.wx": dwx_f,
            "fwd.wh": dwh_f,
            "fwd.b": db_f,
            "bwd.wx": dwx_b,
            "bwd.wh": dwh_b,
            "bwd.b": db_b,
            "out.w": cache["h_cat"].T @ dy[:, None],
            "out.b": np.array([dy.sum()]),
        }


class _CnnLstmNet:
    """Subsequence conv features feeding an LSTM.

    The window splits into 2 subsequences when n_s is even, else stays
    whole; kernel and pool sizes shrink as needed so every window length
    down to 1 stays legal.
    """

    def __init__(self, config: NetworkConfig):
        self.n_s = config.n_s
        self.n_n = config.n_n
        self.n_f = config.n_f
        self.n_sub = 2 if config.n_s % 2 == 0 else 1
        self.len_sub = config.n_s // self.n_sub
        self.kernel = config.kernel_size or min(2, self.len_sub)
        self.len_conv = self.len_sub - self.kernel + 1
        if self.len_conv < 1:
            raise ValueError(f"kernel {self.kernel} too wide for subsequences of {self.len_sub}")
        self.pool = config.pool_size or min(2, self.len_conv)
        self.len_pool = math.ceil(self.len_conv / self.pool)
        self.features = self.len_pool * self.n_f

    def param_shapes(self):
        n = self.n_n
        return [
            ("conv.w", (self.kernel, 1, self.n_f)),
            ("conv.b", (self.n_f,)),
            ("lstm.wx", (self.features, 4 * n)),
            ("lstm.wh", (n, 4 * n)),
            ("lstm.b", (4 * n,)),
            ("out.w", (n, 1)),
            ("out.b", (1,)),
        ]

    def forward(self, p, x):
        batch = x.shape[0]
        subs = x.reshape(batch * self.n_sub, self.len_sub, 1)
        pre = conv1d_valid(subs, p["conv.w"], p["conv.b"])
        act = np.maximum(pre, 0.0)
        pooled, argmax = maxpool_forward(act, self.pool)
        feats = pooled.reshape(batch, self.n_sub, self.features)
        hs, lstm_cache = lstm_forward(feats, p["lstm.wx"], p["lstm.wh"], p["lstm.b"])
        h_last = hs[:, -1]
        y = h_last @ p["out.w"] + p["out.b"]
        return y[:, 0], {
            "subs": subs,
            "pre": pre,
            "argmax": argmax,
            "lstm": lstm_cache,
            "h_last": h_last,
        }

    def backward(self, p, cache, dy):
        batch = dy.shape[0]
        d_last = dy[:, None] @ p["out.w"].T
        d_feats, dwx, dwh, db = lstm_backward(
            _last_step_gradient(d_last, self.n_sub), cache["lstm"], p["lstm.wx"], p["lstm.wh"]
        )
        d_pooled = d_feats.reshape(batch * self.n_sub, self.len_pool, self.n_f)
        d_act = maxpool_backward(d_pooled, cache["argmax"], self.len_conv)
        d_pre = d_act * (cache["pre"] > 0.0)
        _, dconv_w, dconv_b = conv1d_valid_backward(d_pre, cache["subs"], p["conv.w"])
        return {
            "conv.w": dconv_w,
            "conv.b": dconv_b,
            "lstm.wx": dwx,
            "lstm.wh": dwh,
            "lstm.b": db,
            "out.w": cache["h_last"].T @ dy[:, None],
            "out.b": np.array([dy.sum()]),
        }


class _ConvLstmNet:
    """Single-frame convolutional-gate LSTM over the whole window.

    The window is one (n_s, 1) frame; the hidden map keeps the frame length
    (same padding) with n_f channels and is flattened into the output head.
    """

    def __init__(self, config: NetworkConfig):
        self.n_s = config.n_s
        self.n_f = config.n_f
        self.kernel = config.kernel_size or min(3, config.n_s)

    def param_shapes(self):
        f = self.n_f
        return [
            ("cell.wx", (self.kernel, 1, 4 * f)),
            ("cell.wh", (self.kernel, f, 4 * f)),
            ("cell.b", (4 * f,)),
            ("out.w", (self.n_s * f, 1)),
            ("out.b", (1,)),
        ]

    def forward(self, p, x):
        batch = x.shape[0]
        frames = x.reshape(batch, 1, self.n_s, 1)
        hs, cell_cache = convlstm_forward(frames, p["cell.wx"], p["cell.wh"], p["cell.b"])
        flat = hs[:, -1].reshape(batch, self.n_s * self.n_f)
        y = flat @ p["out.w"] + p["out.b"]
        return y[:, 0], {"cell": cell_cache, "flat": flat}

    def backward(self, p, cache, dy):
        batch = dy.shape[0]
        d_flat = dy[:, None] @ p["out.w"].T
        d_hs = d_flat.reshape(batch, 1, self.n_s, self.n_f)
        _, dwx, dwh, db = convlstm_backward(d_hs, cache["cell"], p["cell.wx"], p["cell.wh"])
        return {
            "cell.wx": dwx,
            "cell.wh": dwh,
            "cell.b": db,
            "out.w": cache["flat"].T @ dy[:, None],
            "out.b": np.array([dy.sum()]),
        }


_NETWORKS = {
    "vanilla": _VanillaNet,
    "stacked": _StackedNet,
    "bidirectional": _BidirectionalNet,
    "cnn_lstm": _CnnLstmNet,
    "conv_lstm": _ConvLstmNet,
}


def build_network(config: NetworkConfig):
    return _NETWORKS[config.architecture](config)


def init_params(config: NetworkConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """All weights (biases included) uniform in [-0.05, 0.05], in a fixed order."""
    net = build_network(config)
    return {
        name: rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)
        for name, shape in net.param_shapes()
    }


@dataclass(eq=False)
class NetworkModel:
    """Trained weights plus the per-window input scaling rule."""

    config: NetworkConfig
    params: dict[str, np.ndarray]
    scaler: str = "last_value"

    def __post_init__(self):
        if self.scaler != "last_value":
            raise ValueError(f"unknown scaler {self.scaler!r}")
        self._net = build_network(self.config)

    def forward_scaled(self, windows: np.ndarray):
        """Forward on already-scaled windows (batch, n_s); returns (preds, cache)."""
        return self._net.forward(self.params, windows)

    def backward_scaled(self, cache, d_preds: np.ndarray) -> dict[str, np.ndarray]:
        return self._net.backward(self.params, cache, d_preds)


def window_scale(windows: np.ndarray) -> np.ndarray:
    """Per-window divisor: the window's last value (1.0 where that is zero)."""
    scale = windows[..., -1].copy()
    if scale.ndim == 0:
        return np.array(1.0) if scale == 0 else scale
    scale[scale == 0.0] = 1.0
    return scale


def model_forward(model: NetworkModel, window) -> float:
    """Raw-scale next-value prediction for one window.

    The window is divided by its last value before entering the network and
    the output is multiplied back, so the prediction scales with the window.
    """
    window = np.asarray(window, dtype=float)
    if window.ndim != 1 or window.size != model.config.n_s:
        raise WindowLengthMismatch(
            f"expected window of length {model.config.n_s}, got shape {window.shape}"
        )
    scale = float(window_scale(window))
    preds, _ = model.forward_scaled(window[None, :] / scale)
    return float(preds[0]) * scale


class NeuralForecaster:
    """Forecaster adapter around a trained network."""

    def __init__(self, model: NetworkModel):
        self.model = model
        self.n_s = model.config.n_s

    def predict_next(self, window) -> float:
        return model_forward(self.model, window)


def save_checkpoint(model: NetworkModel, path) -> None:
    """Write weights as versioned JSON (exact float round-trip)."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "format_version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "scaler": model.scaler,
        "weights": {
            name: {"shape": list(array.shape), "data": array.ravel().tolist()}
            for name, array in model.params.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_checkpoint(path) -> NetworkModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a {CHECKPOINT_FORMAT} file: {path}")
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('format_version')}")
    config = NetworkConfig(**payload["config"])
    params = {
        name: np.array(entry["data"], dtype=float).reshape(entry["shape"])
        for name, entry in payload["weights"].items()
    }
    return NetworkModel(config=config, params=params, scaler=payload["scaler"])
