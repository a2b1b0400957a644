"""Teacher-forced SGD training and a finite-difference gradient audit."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..errors import ConfigError, DataError, DivergenceError, LengthError, ParameterError
from ..preprocess import EOS_ID, id_list
from .transformer import ModelParameters, batch_loss, loss_and_grads, teacher_forcing_batch

log = logging.getLogger(__name__)

SEARCH_SPACE = {
    "learning_rate": (2e-5, 1e-4, 1e-3),
    "epochs": tuple(range(3, 11)),
    "batch_size": (4, 8),
    "input_token_length": (512, 1024),
    "target_token_length": (16, 32, 64, 128),
}


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 1e-4
    epochs: int = 5
    batch_size: int = 8
    input_token_length: int = 512
    target_token_length: int = 64
    seed: int = 0
    clip_norm: float | None = 1.0
    override_search_space: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("learning_rate must be > 0 and epochs, batch_size >= 1")
        if self.input_token_length < 1 or self.target_token_length < 1:
            raise ConfigError("token lengths must be >= 1")
        if self.override_search_space:
            return
        for name, allowed in SEARCH_SPACE.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(
                    f"{name}={getattr(self, name)!r} is outside the search space {allowed}; "
                    "set override_search_space to use it"
                )

    def to_dict(self) -> dict:
        return asdict(self)


def search_grid(seed: int = 0):
    """Every TrainingConfig in the hyperparameter search space."""
    keys = list(SEARCH_SPACE)
    for values in itertools.product(*(SEARCH_SPACE[k] for k in keys)):
        yield TrainingConfig(seed=seed, **dict(zip(keys, values)))


def _check_pairs(pairs, tconfig: TrainingConfig, max_positions: int):
    if not pairs:
        raise DataError("no training pairs")
    out = []
    for i, (x, y) in enumerate(pairs):
        x, y = id_list(x), id_list(y)
        if not x:
            raise DataError(f"pair {i}: empty input")
        if len(x) > min(tconfig.input_token_length, max_positions):
            raise LengthError(f"pair {i}: input length {len(x)} exceeds the limit")
        if not y or y[-1] != EOS_ID:
            raise DataError(f"pair {i}: target must end with EOS")
        if len(y) > tconfig.target_token_length:
            raise LengthError(f"pair {i}: target length {len(y)} exceeds {tconfig.target_token_length}")
        out.append((x, y))
    return out


def _clip(grads, max_norm):
    norm = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if max_norm is not None and norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def train(params: ModelParameters, pairs: Sequence, tconfig: TrainingConfig):
    """Minimize mean token cross-entropy with minibatch SGD.

    Pairs are ``(input, target)`` where targets end with EOS. Batches are
    drawn from a seeded shuffle each epoch; gradients are clipped to
    ``clip_norm`` when it is set. Returns a new ``ModelParameters`` and the
    per-epoch mean token loss. Raises ``DivergenceError`` on a non-finite
    loss.
    """
    data = _check_pairs(pairs, tconfig, params.config.max_positions)
    params = params.copy()
    rng = np.random.default_rng(tconfig.seed)
    losses = []
    step = 0
    # overflow shows up as a non-finite loss, reported below as divergence
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(tconfig.epochs):
            order = rng.permutation(len(data))
            total = 0.0
            tokens = 0
            for start in range(0, len(order), tconfig.batch_size):
                batch = [data[i] for i in order[start:start + tconfig.batch_size]]
                loss, grads, count = loss_and_grads(params, *teacher_forcing_batch(batch))
                step += 1
                if not math.isfinite(loss):
                    raise DivergenceError(step, loss)
                _clip(grads, tconfig.clip_norm)
                for name, g in grads.items():
                    params.weights[name] -= tconfig.learning_rate * g
                total += loss * count
                tokens += count
            losses.append(total / tokens)
            log.debug("epoch %d loss %.6f", epoch + 1, losses[-1])
    return params, losses


def loss_csv(losses: Sequence[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "loss"])
    w.writerows((i, repr(float(v))) for i, v in enumerate(losses, start=1))
    return buf.getvalue()


def gradient_check(
    params: ModelParameters,
    batch: Sequence,
    epsilon: float = 1e-4,
    samples_per_tensor: int = 4,
    seed: int = 0,
    floor: float = 1e-6,
) -> float:
    """Largest relative error between backprop gradients and central
    differences ``(L(w + eps) - L(w - eps)) / (2 eps)``.

    A few entries of every tensor are probed (chosen with ``seed``). The
    relative error is ``|a - n| / max(|a|, |n|, floor)``. Gradients smaller
    than ``floor`` are thus compared absolutely: attention key biases have an
    exactly zero gradient (softmax is shift invariant) and their difference
    quotient is pure rounding noise of order ``ulp(loss) / eps``.
    """
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    data = [(id_list(x), id_list(y)) for x, y in batch]
    arrays = teacher_forcing_batch(data)
    _, grads, _ = loss_and_grads(params, *arrays)
    probe = params.copy()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, w in probe.weights.items():
        flat = w.reshape(-1)
        analytic = grads[name].reshape(-1)
        k = min(samples_per_tensor, flat.size)
        for idx in rng.choice(flat.size, size=k, replace=False):
            orig = flat[idx]
            flat[idx] = orig + epsilon
            up = batch_loss(probe, *arrays)
            flat[idx] = orig - epsilon
            down = batch_loss(probe, *arrays)
            flat[idx] = orig
            numeric = (up - down) / (2 * epsilon)
            a = analytic[idx]
            worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), floor))
    return worst
