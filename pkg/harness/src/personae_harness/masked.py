"""Masked-identity fine-tuning: the span's tokens all become mask tokens.

The exported records give character spans over the comma-joined bio. Any
token overlapping the span is replaced by the mask token (one mask per
subtoken), so models must reconstruct the whole identity; loss is
computed only on masked positions. Spans that do not line up with token
boundaries are covered whole by taking every overlapping token.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .config import HarnessConfig
from .formats import read_masked
from .models import load_masked_lm


def mask_encoding(tokenizer, row, max_length: int):
    """Token ids with the span masked, plus MLM labels (-100 off-span)."""
    enc = tokenizer(
        row.sentence, truncation=True, max_length=max_length,
        return_offsets_mapping=True, return_special_tokens_mask=True,
    )
    input_ids = list(enc["input_ids"])
    labels = [-100] * len(input_ids)
    covered = []
    for pos, ((a, b), special) in enumerate(zip(enc["offset_mapping"], enc["special_tokens_mask"])):
        if special or a == b:
            continue
        if a < row.span_end and b > row.span_start:
            labels[pos] = input_ids[pos]
            input_ids[pos] = tokenizer.mask_token_id
            covered.append((a, b))
    return input_ids, labels, covered


def span_fully_masked(row, covered) -> bool:
    """True when the masked tokens jointly cover the whole identity span."""
    if not covered:
        return False
    return min(a for a, _ in covered) <= row.span_start and max(b for _, b in covered) >= row.span_end


def _collate(batch, pad_id):
    width = max(len(ids) for ids, _ in batch)
    input_ids = torch.full((len(batch), width), pad_id, dtype=torch.long)
    labels = torch.full((len(batch), width), -100, dtype=torch.long)
    attention = torch.zeros((len(batch), width), dtype=torch.long)
    for i, (ids, labs) in enumerate(batch):
        input_ids[i, : len(ids)] = torch.tensor(ids)
        labels[i, : len(labs)] = torch.tensor(labs)
        attention[i, : len(ids)] = 1
    return input_ids, attention, labels


def train_masked(masked_path, config: HarnessConfig) -> dict:
    """Fine-tune a masked LM on the exported records; returns loss curves."""
    config.validate()
    rows = read_masked(masked_path)
    torch.manual_seed(config.seed)
    tokenizer, model = load_masked_lm(config.base_model)

    encoded = []
    skipped = 0
    for row in rows:
        input_ids, labels, covered = mask_encoding(tokenizer, row, config.max_length)
        if not covered:
            skipped += 1  # span fell beyond max_length truncation
            continue
        encoded.append((input_ids, labels))
    if not encoded:
        raise ValueError("no masked record survived tokenization")

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(encoded))
    n_val = max(1, int(len(encoded) * config.validation_fraction))
    val = [encoded[i] for i in order[:n_val]]
    train = [encoded[i] for i in order[n_val:]] or val

    def eval_loss(split):
        model.eval()
        total = n = 0.0
        with torch.no_grad():
            for i in range(0, len(split), config.batch_size):
                ids, attention, labels = _collate(split[i: i + config.batch_size], tokenizer.pad_token_id)
                out = model(input_ids=ids, attention_mask=attention, labels=labels)
                total += float(out.loss) * len(ids)
                n += len(ids)
        return total / n

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    val_losses = [eval_loss(val)]
    train_losses = []
    for _ in range(config.epochs):
        model.train()
        perm = rng.permutation(len(train))
        running = 0.0
        for i in range(0, len(perm), config.batch_size):
            batch = [train[j] for j in perm[i: i + config.batch_size]]
            ids, attention, labels = _collate(batch, tokenizer.pad_token_id)
            optimizer.zero_grad()
            out = model(input_ids=ids, attention_mask=attention, labels=labels)
            out.loss.backward()
            optimizer.step()
            running += float(out.loss.detach()) * len(ids)
        train_losses.append(running / len(train))
        val_losses.append(eval_loss(val))

    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(outdir)
    tokenizer.save_pretrained(outdir)
    return {
        "val_loss": val_losses,
        "train_loss": train_losses,
        "n_train": len(train),
        "n_val": len(val),
        "n_skipped_truncation": skipped,
        "model_dir": str(outdir),
    }
