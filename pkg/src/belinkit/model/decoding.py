"""Greedy and beam-search generation."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigError
from ..preprocess import BOS_ID, EOS_ID, TARGET_MAX_LEN, TokenSequence
from . import layers as L
from .transformer import ModelParameters, decode_logits, encode


@dataclass(frozen=True)
class DecodeConfig:
    strategy: str = "greedy"
    beam_width: int = 1
    max_target_length: int = TARGET_MAX_LEN

    def __post_init__(self):
        if self.strategy not in ("greedy", "beam"):
            raise ConfigError(f"unknown decoding strategy {self.strategy!r}")
        if self.beam_width < 1:
            raise ConfigError(f"beam_width must be >= 1, got {self.beam_width}")
        if self.max_target_length < 1:
            raise ConfigError("max_target_length must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


def _greedy(params, Z, limit):
    out = []
    while len(out) < limit:
        logits = decode_logits(params, Z, [BOS_ID] + out)[-1]
        nxt = int(np.argmax(logits))  # first maximum, i.e. lowest id on ties
        out.append(nxt)
        if nxt == EOS_ID:
            break
    return out


def _beam(params, Z, width, limit):
    beams = [(0.0, [])]
    finished = []
    while beams:
        candidates = []
        for score, toks in beams:
            logp = L.log_softmax(decode_logits(params, Z, [BOS_ID] + toks)[-1])
            for tok in np.argsort(-logp, kind="stable")[:width]:
                candidates.append((score + float(logp[tok]), toks + [int(tok)]))
        candidates.sort(key=lambda c: (-c[0], c[1]))
        beams = []
        for score, toks in candidates[:width]:
            if toks[-1] == EOS_ID or len(toks) >= limit:
                finished.append((score, toks))
            else:
                beams.append((score, toks))
        if finished and beams and max(s for s, _ in finished) >= beams[0][0]:
            # log-probabilities only decrease, so no open beam can win
            break
    finished.sort(key=lambda c: (-c[0], c[1]))
    return finished[0][1]


def generate(params: ModelParameters, fusion_input, dconfig: DecodeConfig = DecodeConfig()) -> TokenSequence:
    """Decode a headline starting from BOS. The result excludes BOS, keeps the
    terminating EOS when one is produced, and never exceeds
    ``max_target_length`` ids."""
    Z = encode(params, fusion_input)
    if dconfig.strategy == "greedy" or dconfig.beam_width == 1:
        return TokenSequence(_greedy(params, Z, dconfig.max_target_length))
    return TokenSequence(_beam(params, Z, dconfig.beam_width, dconfig.max_target_length))
