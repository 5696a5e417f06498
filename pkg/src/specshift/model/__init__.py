from .checkpoint import load_checkpoint, save_checkpoint
from .net import ConvNetConfig, Network, forward, init_params, loss_and_grad, softmax
from .train import (
    TrainConfig,
    evaluate,
    load_history,
    lr_at,
    nesterov_step,
    save_history,
    train,
)

__all__ = [
    "ConvNetConfig",
    "Network",
    "TrainConfig",
    "evaluate",
    "forward",
    "init_params",
    "load_checkpoint",
    "load_history",
    "loss_and_grad",
    "lr_at",
    "nesterov_step",
    "save_checkpoint",
    "save_history",
    "softmax",
    "train",
]
