"""Compact residual CNN: layers, network, optimizers, training, model I/O."""

from .gradcheck import check_layer, max_relative_error, numerical_gradient
from .layers import (
    BatchNorm,
    Conv2d,
    Dense,
    Dropout,
    GlobalMaxPool,
    Layer,
    MaxPool2d,
    ReLU,
    ResidualBlock,
    softmax,
)
from .net import ArchConfig, CnnModel, baseline_arch, default_arch
from .optim import Adam, Sgd, lr_at_epoch
from .serialize import load_model, save_model
from .training import (
    EarlyStopConfig,
    TrainHistory,
    TrainSchedule,
    cross_entropy,
    fit,
    load_schedule,
    loss,
    schedule_preset,
    train_step,
)

__all__ = [
    "Adam", "ArchConfig", "BatchNorm", "CnnModel", "Conv2d", "Dense", "Dropout",
    "EarlyStopConfig", "GlobalMaxPool", "Layer", "MaxPool2d", "ReLU",
    "ResidualBlock", "Sgd", "TrainHistory", "TrainSchedule", "baseline_arch",
    "check_layer", "cross_entropy", "default_arch", "fit", "load_model",
    "load_schedule", "loss", "lr_at_epoch", "max_relative_error",
    "numerical_gradient", "save_model", "schedule_preset", "softmax", "train_step",
]
