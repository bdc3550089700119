from .losses import LossBreakdown, predicting_loss, restoring_loss, total_loss
from .lm import LMTrainConfig, TrainingDivergedError, finetune_lm, masked_accuracy, pretrain_lm, train_masked_lm
from .trainer import TrainConfig, TrainResult, context_checksum, train_restorer, train_image_classifier, loss_ratio

__all__ = [
    "LossBreakdown",
    "predicting_loss",
    "restoring_loss",
    "total_loss",
    "LMTrainConfig",
    "TrainingDivergedError",
    "finetune_lm",
    "masked_accuracy",
    "pretrain_lm",
    "train_masked_lm",
    "TrainConfig",
    "TrainResult",
    "context_checksum",
    "train_restorer",
    "train_image_classifier",
    "loss_ratio",
]
