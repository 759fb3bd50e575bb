"""Full-batch training and the best-of-N-initializations protocol.

Each initialization trains on the per-window scaled space (window divided by
its last value, target likewise) with Adam and MSE, then is scored by the
recursive validation kMAPE; the initialization with the lowest score wins.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..forecasting import collect_forecasts
from ..metrics import LengthMismatch, kmape
from ..series import SupervisedSplit
from .networks import NetworkConfig, NetworkModel, NeuralForecaster, init_params, window_scale
from .optimizer import adam_init, adam_step


class NumericalDivergence(ArithmeticError):
    """Training or validation produced a non-finite value."""


class AllInitsDiverged(RuntimeError):
    """Every random initialization diverged."""


def mse_loss(predictions, targets) -> float:
    """Mean squared difference; training applies it on the scaled space."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise LengthMismatch(
            f"shapes {predictions.shape} and {targets.shape} do not pair up"
        )
    return float(np.mean((predictions - targets) ** 2))


def _scaled_batch(samples) -> tuple[np.ndarray, np.ndarray]:
    windows = np.stack([s.inputs for s in samples])
    targets = np.array([s.targets[0] for s in samples])
    scale = window_scale(windows)
    return windows / scale[:, None], targets / scale


def validation_kmape(model: NetworkModel, validation, horizon: int) -> float:
    """Recursive validation kMAPE; non-finite forecasts raise NumericalDivergence."""
    try:
        score = kmape(collect_forecasts(NeuralForecaster(model), validation, horizon))
    except ValueError as exc:
        raise NumericalDivergence(str(exc)) from exc
    if not np.isfinite(score):
        raise NumericalDivergence(f"validation kMAPE is {score}")
    return score


def train(
    config: NetworkConfig, split: SupervisedSplit, val_horizon: int = 1
) -> tuple[NetworkModel, float]:
    """Train one seeded initialization; returns the model and its validation kMAPE."""
    if not split.train:
        raise ValueError("training split is empty")
    rng = np.random.default_rng(config.seed)
    params = init_params(config, rng)
    model = NetworkModel(config=config, params=params)
    x, y = _scaled_batch(split.train)
    state = adam_init(params)
    d_scale = 2.0 / y.size
    for epoch in range(config.epochs):
        preds, cache = model.forward_scaled(x)
        loss = mse_loss(preds, y)
        if not np.isfinite(loss):
            raise NumericalDivergence(f"loss became {loss} at epoch {epoch}")
        grads = model.backward_scaled(cache, d_scale * (preds - y))
        adam_step(params, grads, state, config.learning_rate)
    for array in params.values():
        if not np.all(np.isfinite(array)):
            raise NumericalDivergence("weights became non-finite")
    return model, validation_kmape(model, split.validation, val_horizon)


def multi_init_train(
    config: NetworkConfig,
    split: SupervisedSplit,
    n_inits: int,
    val_horizon: int = 1,
) -> tuple[NetworkModel, float]:
    """Best of ``n_inits`` seeded runs by validation kMAPE.

    Seeds are ``config.seed + offset`` for offset 0..n_inits-1; ties break
    toward the lowest offset and diverged runs are skipped, so the outcome
    does not depend on the order the runs execute in.
    """
    if n_inits < 1:
        raise ValueError("n_inits must be at least 1")
    best_key = None
    best = None
    for offset in range(n_inits):
        try:
            model, score = train(replace(config, seed=config.seed + offset), split, val_horizon)
        except NumericalDivergence:
            continue
        key = (score, offset)
        if best_key is None or key < best_key:
            best_key, best = key, (model, score)
    if best is None:
        raise AllInitsDiverged(f"all {n_inits} initializations diverged")
    return best
