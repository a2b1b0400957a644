"""Pre-LayerNorm encoder-decoder transformer in float64 numpy.

The encoder maps an input id sequence to hidden states ``Z`` (one row per
position); the decoder reads ``Z`` through cross-attention and the target
prefix through causally masked self-attention, and a final projection gives
next-token logits.
"""

from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..errors import ConfigError, LengthError, StateError
from ..preprocess import BOS_ID, PAD_ID, id_list
from . import layers as L

ATTN_KEYS = ("Wq", "Wk", "Wv", "Wo", "bq", "bk", "bv", "bo")
FF_KEYS = ("W1", "b1", "W2", "b2")


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    d_model: int = 64
    n_heads: int = 4
    n_encoder_layers: int = 2
    n_decoder_layers: int = 2
    d_ff: int = 128
    max_positions: int = 1024
    seed: int = 0

    def __post_init__(self):
        for name in ("vocab_size", "d_model", "n_heads", "n_encoder_layers",
                     "n_decoder_layers", "d_ff", "max_positions"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.d_model % self.n_heads:
            raise ConfigError(
                f"d_model {self.d_model} is not divisible by n_heads {self.n_heads}"
            )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ModelParameters:
    config: ModelConfig
    weights: dict[str, np.ndarray]

    def copy(self) -> "ModelParameters":
        return ModelParameters(self.config, {k: v.copy() for k, v in self.weights.items()})

    def all_finite(self) -> bool:
        return all(np.isfinite(w).all() for w in self.weights.values())

    def n_parameters(self) -> int:
        return sum(w.size for w in self.weights.values())


def parameter_layout(config: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Tensor names and shapes in declaration order (also checkpoint order)."""
    d, f, V = config.d_model, config.d_ff, config.vocab_size

    def ln(prefix):
        return [(f"{prefix}.g", (d,)), (f"{prefix}.b", (d,))]

    def attn(prefix):
        return [(f"{prefix}.{k}", (d, d)) for k in ATTN_KEYS[:4]] + [
            (f"{prefix}.{k}", (d,)) for k in ATTN_KEYS[4:]
        ]

    def ff(prefix):
        return [(f"{prefix}.W1", (d, f)), (f"{prefix}.b1", (f,)),
                (f"{prefix}.W2", (f, d)), (f"{prefix}.b2", (d,))]

    layout = [("embed", (V, d))]
    for i in range(config.n_encoder_layers):
        p = f"enc.{i}"
        layout += ln(f"{p}.ln1") + attn(f"{p}.self") + ln(f"{p}.ln2") + ff(f"{p}.ff")
    layout += ln("enc.ln")
    for i in range(config.n_decoder_layers):
        p = f"dec.{i}"
        layout += (ln(f"{p}.ln1") + attn(f"{p}.self") + ln(f"{p}.ln2")
                   + attn(f"{p}.cross") + ln(f"{p}.ln3") + ff(f"{p}.ff"))
    layout += ln("dec.ln")
    layout += [("out.W", (d, V)), ("out.b", (V,))]
    return layout


def init_model(config: ModelConfig) -> ModelParameters:
    """Seeded scaled-uniform initialization: Glorot bounds for matrices,
    ``sqrt(3 / d_model)`` for embeddings, zeros for biases, ones for
    LayerNorm gains."""
    rng = np.random.default_rng(config.seed)
    weights = {}
    for name, shape in parameter_layout(config):
        leaf = name.rsplit(".", 1)[-1]
        if name == "embed":
            bound = math.sqrt(3.0 / config.d_model)
            w = rng.uniform(-bound, bound, size=shape)
        elif len(shape) == 2:
            bound = math.sqrt(6.0 / (shape[0] + shape[1]))
            w = rng.uniform(-bound, bound, size=shape)
        elif leaf == "g":
            w = np.ones(shape)
        else:
            w = np.zeros(shape)
        weights[name] = w
    return ModelParameters(config, weights)


@functools.lru_cache(maxsize=8)
def _positions(n: int, d: int) -> np.ndarray:
    pe = L.sinusoidal_positions(n, d)
    pe.setflags(write=False)
    return pe


def _view(W, prefix, keys):
    return {k: W[f"{prefix}.{k}"] for k in keys}


def _embed(params, ids):
    cfg = params.config
    T = ids.shape[1]
    if T > cfg.max_positions:
        raise LengthError(f"sequence length {T} exceeds max_positions {cfg.max_positions}")
    scale = math.sqrt(cfg.d_model)
    return params.weights["embed"][ids] * scale + _positions(cfg.max_positions, cfg.d_model)[:T]


def pad_batch(seqs: Sequence[Sequence[int]], pad_id: int = PAD_ID) -> np.ndarray:
    width = max(len(s) for s in seqs)
    out = np.full((len(seqs), width), pad_id, dtype=np.int64)
    for i, s in enumerate(seqs):
        out[i, :len(s)] = s
    return out


def encoder_forward(params: ModelParameters, src: np.ndarray):
    """``src`` is an int array (B, S). Returns ``(Z, key_mask, cache)``."""
    cfg, W = params.config, params.weights
    key_mask = (src != PAD_ID)[:, None, None, :]
    x = _embed(params, src)
    caches = []
    for i in range(cfg.n_encoder_layers):
        p = f"enc.{i}"
        h, c_ln1 = L.layernorm_forward(x, W[f"{p}.ln1.g"], W[f"{p}.ln1.b"])
        a, c_att = L.attention_forward(h, h, _view(W, f"{p}.self", ATTN_KEYS), key_mask, cfg.n_heads)
        x = x + a
        h, c_ln2 = L.layernorm_forward(x, W[f"{p}.ln2.g"], W[f"{p}.ln2.b"])
        f, c_ff = L.feedforward_forward(h, _view(W, f"{p}.ff", FF_KEYS))
        x = x + f
        caches.append((c_ln1, c_att, c_ln2, c_ff))
    Z, c_ln = L.layernorm_forward(x, W["enc.ln.g"], W["enc.ln.b"])
    return Z, key_mask, (src, caches, c_ln)


def decoder_forward(params: ModelParameters, Z: np.ndarray, key_mask: np.ndarray, tgt_in: np.ndarray):
    """Returns ``(logits, cache)`` with logits of shape (B, T, vocab)."""
    cfg, W = params.config, params.weights
    T = tgt_in.shape[1]
    causal = np.tril(np.ones((T, T), dtype=bool))[None, None]
    x = _embed(params, tgt_in)
    caches = []
    for i in range(cfg.n_decoder_layers):
        p = f"dec.{i}"
        h, c_ln1 = L.layernorm_forward(x, W[f"{p}.ln1.g"], W[f"{p}.ln1.b"])
        a, c_self = L.attention_forward(h, h, _view(W, f"{p}.self", ATTN_KEYS), causal, cfg.n_heads)
        x = x + a
        h, c_ln2 = L.layernorm_forward(x, W[f"{p}.ln2.g"], W[f"{p}.ln2.b"])
        a, c_cross = L.attention_forward(h, Z, _view(W, f"{p}.cross", ATTN_KEYS), key_mask, cfg.n_heads)
        x = x + a
        h, c_ln3 = L.layernorm_forward(x, W[f"{p}.ln3.g"], W[f"{p}.ln3.b"])
        f, c_ff = L.feedforward_forward(h, _view(W, f"{p}.ff", FF_KEYS))
        x = x + f
        caches.append((c_ln1, c_self, c_ln2, c_cross, c_ln3, c_ff))
    y, c_ln = L.layernorm_forward(x, W["dec.ln.g"], W["dec.ln.b"])
    logits, c_out = L.linear_forward(y, W["out.W"], W["out.b"])
    return logits, (tgt_in, caches, c_ln, c_out)


def _accumulate(grads, prefix, g):
    for k, v in g.items():
        grads[f"{prefix}.{k}"] += v


def backward(params: ModelParameters, enc_cache, dec_cache, dlogits: np.ndarray) -> dict[str, np.ndarray]:
    cfg, W = params.config, params.weights
    grads = {k: np.zeros_like(v) for k, v in W.items()}
    scale = math.sqrt(cfg.d_model)

    tgt_in, dec_caches, c_ln, c_out = dec_cache
    dy, grads["out.W"], grads["out.b"] = L.linear_backward(dlogits, c_out, W["out.W"])
    dx, grads["dec.ln.g"], grads["dec.ln.b"] = L.layernorm_backward(dy, c_ln)
    dZ = 0.0
    for i in reversed(range(cfg.n_decoder_layers)):
        p = f"dec.{i}"
        c_ln1, c_self, c_ln2, c_cross, c_ln3, c_ff = dec_caches[i]
        dh, g = L.feedforward_backward(dx, c_ff, _view(W, f"{p}.ff", FF_KEYS))
        _accumulate(grads, f"{p}.ff", g)
        dh, dg, db = L.layernorm_backward(dh, c_ln3)
        grads[f"{p}.ln3.g"] += dg
        grads[f"{p}.ln3.b"] += db
        dx = dx + dh
        dq, dkv, g = L.attention_backward(dx, c_cross, _view(W, f"{p}.cross", ATTN_KEYS))
        _accumulate(grads, f"{p}.cross", g)
        dZ = dZ + dkv
        dh, dg, db = L.layernorm_backward(dq, c_ln2)
        grads[f"{p}.ln2.g"] += dg
        grads[f"{p}.ln2.b"] += db
        dx = dx + dh
        dq, dkv, g = L.attention_backward(dx, c_self, _view(W, f"{p}.self", ATTN_KEYS))
        _accumulate(grads, f"{p}.self", g)
        dh, dg, db = L.layernorm_backward(dq + dkv, c_ln1)
        grads[f"{p}.ln1.g"] += dg
        grads[f"{p}.ln1.b"] += db
        dx = dx + dh
    np.add.at(grads["embed"], tgt_in, dx * scale)

    src, enc_caches, c_ln = enc_cache
    dx, grads["enc.ln.g"], grads["enc.ln.b"] = L.layernorm_backward(dZ, c_ln)
    for i in reversed(range(cfg.n_encoder_layers)):
        p = f"enc.{i}"
        c_ln1, c_att, c_ln2, c_ff = enc_caches[i]
        dh, g = L.feedforward_backward(dx, c_ff, _view(W, f"{p}.ff", FF_KEYS))
        _accumulate(grads, f"{p}.ff", g)
        dh, dg, db = L.layernorm_backward(dh, c_ln2)
        grads[f"{p}.ln2.g"] += dg
        grads[f"{p}.ln2.b"] += db
        dx = dx + dh
        dq, dkv, g = L.attention_backward(dx, c_att, _view(W, f"{p}.self", ATTN_KEYS))
        _accumulate(grads, f"{p}.self", g)
        dh, dg, db = L.layernorm_backward(dq + dkv, c_ln1)
        grads[f"{p}.ln1.g"] += dg
        grads[f"{p}.ln1.b"] += db
        dx = dx + dh
    np.add.at(grads["embed"], src, dx * scale)
    return grads


def teacher_forcing_batch(pairs):
    """Turn (input ids, target ids) pairs into padded ``src``, decoder input
    (BOS + target without its last token) and decoder output arrays."""
    src = pad_batch([list(x) for x, _ in pairs])
    tgt = [list(y) for _, y in pairs]
    tgt_in = pad_batch([[BOS_ID] + y[:-1] for y in tgt])
    tgt_out = pad_batch(tgt)
    return src, tgt_in, tgt_out


def cross_entropy(logits: np.ndarray, tgt_out: np.ndarray):
    """Mean token cross-entropy over non-PAD targets and its logit gradient."""
    mask = tgt_out != PAD_ID
    count = max(int(mask.sum()), 1)
    logp = L.log_softmax(logits)
    picked = np.take_along_axis(logp, tgt_out[..., None], axis=-1)[..., 0]
    loss = -(picked * mask).sum() / count
    dlogits = np.exp(logp)
    np.put_along_axis(dlogits, tgt_out[..., None],
                      np.take_along_axis(dlogits, tgt_out[..., None], axis=-1) - 1.0, axis=-1)
    dlogits *= (mask / count)[..., None]
    return float(loss), dlogits, count


def loss_and_grads(params: ModelParameters, src, tgt_in, tgt_out):
    Z, key_mask, enc_cache = encoder_forward(params, src)
    logits, dec_cache = decoder_forward(params, Z, key_mask, tgt_in)
    loss, dlogits, count = cross_entropy(logits, tgt_out)
    return loss, backward(params, enc_cache, dec_cache, dlogits), count


def batch_loss(params: ModelParameters, src, tgt_in, tgt_out) -> float:
    Z, key_mask, _ = encoder_forward(params, src)
    logits, _ = decoder_forward(params, Z, key_mask, tgt_in)
    return cross_entropy(logits, tgt_out)[0]


def _as_ids(seq) -> np.ndarray:
    return np.asarray(id_list(seq), dtype=np.int64)


def encode(params: ModelParameters, fusion_input) -> np.ndarray:
    """Hidden states ``Z`` of shape (L, d_model) for a single input."""
    ids = _as_ids(fusion_input)
    if ids.size == 0:
        raise LengthError("cannot encode an empty input")
    if ids.size > params.config.max_positions:
        raise LengthError(f"input length {ids.size} exceeds max_positions {params.config.max_positions}")
    Z, _, _ = encoder_forward(params, ids[None, :])
    return Z[0]


def decode_logits(params: ModelParameters, Z: np.ndarray, prefix) -> np.ndarray:
    """Logits for every prefix position, shape (len(prefix), vocab)."""
    Z = np.asarray(Z)
    if Z.ndim != 2 or Z.shape[0] == 0:
        raise StateError("encoder states are empty")
    ids = _as_ids(prefix)
    if ids.size == 0:
        ids = np.array([BOS_ID])
    key_mask = np.ones((1, 1, 1, Z.shape[0]), dtype=bool)
    logits, _ = decoder_forward(params, Z[None], key_mask, ids[None, :])
    return logits[0]


def decode_step(params: ModelParameters, Z: np.ndarray, prefix) -> np.ndarray:
    """Next-token distribution after ``prefix`` (which should start with BOS;
    an empty prefix is treated as ``[BOS]``)."""
    if len(_as_ids(prefix)) >= params.config.max_positions:
        raise LengthError("prefix reaches max_positions")
    return L.softmax(decode_logits(params, Z, prefix)[-1])
