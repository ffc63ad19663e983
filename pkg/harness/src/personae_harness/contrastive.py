"""Cosine-similarity regression fine-tuning on exported pair files.

Each pair row supplies two texts and a 0/1 label; the objective is the
mean squared error between the cosine of the pooled embeddings and the
label. Validation loss is logged before training (epoch 0) and after
every epoch.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .config import HarnessConfig
from .formats import read_pairs
from .models import POOLING_BY_FAMILY, load_encoder, pool


def _split_rows(rows, validation_fraction: float, seed: int):
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(rows))
    n_val = max(1, int(len(rows) * validation_fraction))
    val_idx = set(order[:n_val].tolist())
    train = [rows[i] for i in range(len(rows)) if i not in val_idx]
    val = [rows[i] for i in sorted(val_idx)]
    return train, val


def _batch_cosine(tokenizer, model, rows, rule, max_length):
    anchors = tokenizer(
        [r.anchor for r in rows], padding=True, truncation=True,
        max_length=max_length, return_tensors="pt",
    )
    others = tokenizer(
        [r.other for r in rows], padding=True, truncation=True,
        max_length=max_length, return_tensors="pt",
    )
    u = pool(model(**anchors).last_hidden_state, anchors["attention_mask"], rule)
    v = pool(model(**others).last_hidden_state, others["attention_mask"], rule)
    return torch.nn.functional.cosine_similarity(u, v)


def _epoch_loss(tokenizer, model, rows, rule, batch_size, max_length) -> float:
    model.eval()
    total = 0.0
    with torch.no_grad():
        for i in range(0, len(rows), batch_size):
            batch = rows[i: i + batch_size]
            cos = _batch_cosine(tokenizer, model, batch, rule, max_length)
            labels = torch.tensor([r.label for r in batch], dtype=cos.dtype)
            total += float(((cos - labels) ** 2).sum())
    return total / len(rows)


def train_contrastive(pairs_path, config: HarnessConfig) -> dict:
    """Fine-tune the configured encoder; returns the loss curve.

    The returned dict has ``val_loss`` indexed by epoch (entry 0 is the
    pre-training loss) and ``train_loss`` per completed epoch. The tuned
    model and tokenizer are saved to ``config.output_dir``.
    """
    config.validate()
    rows = read_pairs(pairs_path)
    torch.manual_seed(config.seed)
    tokenizer, model = load_encoder(config.base_model)
    rule = POOLING_BY_FAMILY[config.family]
    train_rows, val_rows = _split_rows(rows, config.validation_fraction, config.seed)

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    val_losses = [_epoch_loss(tokenizer, model, val_rows, rule, config.batch_size, config.max_length)]
    train_losses = []
    rng = np.random.default_rng(config.seed + 1)

    for _ in range(config.epochs):
        model.train()
        order = rng.permutation(len(train_rows))
        running = 0.0
        for i in range(0, len(order), config.batch_size):
            batch = [train_rows[j] for j in order[i: i + config.batch_size]]
            optimizer.zero_grad()
            cos = _batch_cosine(tokenizer, model, batch, rule, config.max_length)
            labels = torch.tensor([r.label for r in batch], dtype=cos.dtype)
            loss = ((cos - labels) ** 2).mean()
            loss.backward()
            optimizer.step()
            running += float(loss.detach()) * len(batch)
        train_losses.append(running / len(train_rows))
        val_losses.append(
            _epoch_loss(tokenizer, model, val_rows, rule, config.batch_size, config.max_length)
        )

    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(outdir)
    tokenizer.save_pretrained(outdir)
    return {
        "val_loss": val_losses,
        "train_loss": train_losses,
        "n_train": len(train_rows),
        "n_val": len(val_rows),
        "model_dir": str(outdir),
    }
