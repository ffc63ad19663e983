"""Harness run configuration, loadable from a JSON file."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class HarnessConfig:
    base_model: str
    family: str = "sentence_encoder"  # or "masked_lm"
    data: str = ""                    # pairs file or masked file
    output_dir: str = "finetuned"
    epochs: int = 5
    learning_rate: float = 2e-5
    batch_size: int = 64
    validation_fraction: float = 0.1
    seed: int = 0
    max_length: int = 64
    extras: dict = field(default_factory=dict)

    def validate(self):
        if self.family not in ("sentence_encoder", "masked_lm"):
            raise ValueError("family must be sentence_encoder or masked_lm")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie strictly between 0 and 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")

    @classmethod
    def from_json(cls, path) -> "HarnessConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f for f in cls.__dataclass_fields__ if f != "extras"}
        kwargs = {k: v for k, v in raw.items() if k in known}
        extras = {k: v for k, v in raw.items() if k not in known}
        cfg = cls(**kwargs, extras=extras)
        cfg.validate()
        return cfg
