from .adversarial import adversarial_perturb, feature_range, fgsm, input_gradient, pgd
from .loop import (
    TrainConfig,
    TrainingDiverged,
    TrainResult,
    evaluate,
    flatness_report,
    mean_loss,
    mean_loss_grad,
    probe_params,
    train,
    train_erm,
)
from .optim import sgd_step
from .regularizers import EarlyStopper, SwaState, ema_update, mixup, mixup_batch, swa_update

__all__ = [
    "EarlyStopper",
    "SwaState",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "adversarial_perturb",
    "feature_range",
    "ema_update",
    "evaluate",
    "fgsm",
    "flatness_report",
    "input_gradient",
    "mean_loss",
    "mean_loss_grad",
    "mixup",
    "mixup_batch",
    "pgd",
    "probe_params",
    "sgd_step",
    "swa_update",
    "train",
    "train_erm",
]
