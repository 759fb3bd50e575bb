"""From-scratch recurrent forecasting networks, training, and checkpoints."""

from .layers import (
    KernelTooWide,
    conv1d_forward,
    convlstm_cell_forward,
    lstm_cell_forward,
    maxpool1d,
)
from .networks import (
    ARCHITECTURES,
    NetworkConfig,
    NetworkModel,
    NeuralForecaster,
    build_network,
    init_params,
    load_checkpoint,
    model_forward,
    save_checkpoint,
)
from .optimizer import AdamState, adam_init, adam_step
from .training import (
    AllInitsDiverged,
    NumericalDivergence,
    mse_loss,
    multi_init_train,
    train,
)

__all__ = [
    "ARCHITECTURES",
    "AdamState",
    "AllInitsDiverged",
    "KernelTooWide",
    "NetworkConfig",
    "NetworkModel",
    "NeuralForecaster",
    "NumericalDivergence",
    "adam_init",
    "adam_step",
    "build_network",
    "conv1d_forward",
    "convlstm_cell_forward",
    "init_params",
    "load_checkpoint",
    "lstm_cell_forward",
    "maxpool1d",
    "model_forward",
    "mse_loss",
    "multi_init_train",
    "save_checkpoint",
    "train",
]
