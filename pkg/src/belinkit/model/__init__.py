"""Desk-scale encoder-decoder generator trained from scratch."""

from .checkpoint import load_checkpoint, save_checkpoint
from .decoding import DecodeConfig, generate
from .training import SEARCH_SPACE, TrainingConfig, gradient_check, loss_csv, search_grid, train
from .transformer import (
    ModelConfig,
    ModelParameters,
    decode_logits,
    decode_step,
    encode,
    init_model,
    parameter_layout,
)

__all__ = [
    "DecodeConfig", "ModelConfig", "ModelParameters", "SEARCH_SPACE", "TrainingConfig",
    "decode_logits", "decode_step", "encode", "generate", "gradient_check", "init_model",
    "load_checkpoint", "loss_csv", "parameter_layout", "save_checkpoint", "search_grid", "train",
]
