import json

import pytest

from personae_harness.config import HarnessConfig
from personae_harness.contrastive import train_contrastive
from personae_harness.formats import FormatError


def write_pairs(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for anchor, other, label in rows:
            fh.write(f"{json.dumps(anchor)}\t{json.dumps(other)}\t{label}\n")


def test_identical_texts_all_positive_loss_zero(tmp_path, encoder_dir):
    # cosine of a text with itself is exactly 1, so the epoch-0 loss is 0
    pairs = tmp_path / "pairs.tsv"
    write_pairs(pairs, [(f"c0{i} id00{i}", f"c0{i} id00{i}", 1.0) for i in range(6)] * 4)
    config = HarnessConfig(
        base_model=encoder_dir, data=str(pairs), output_dir=str(tmp_path / "out"),
        epochs=1, learning_rate=0.0, batch_size=8, validation_fraction=0.25, seed=0,
    )
    result = train_contrastive(pairs, config)
    assert result["val_loss"][0] == pytest.approx(0.0, abs=1e-10)


def test_frozen_encoder_flat_loss(tmp_path, workspace, encoder_dir):
    config = HarnessConfig(
        base_model=encoder_dir, data=str(workspace / "ft" / "pairs.tsv"),
        output_dir=str(tmp_path / "out"), epochs=2, learning_rate=0.0,
        batch_size=128, validation_fraction=0.1, seed=0,
    )
    result = train_contrastive(config.data, config)
    base = result["val_loss"][0]
    assert all(v == pytest.approx(base, rel=1e-9) for v in result["val_loss"][1:])


def test_training_reduces_validation_loss(tuned):
    _, result = tuned
    assert result["val_loss"][-1] < result["val_loss"][0]


def test_malformed_pairs_abort_before_training(tmp_path, encoder_dir):
    pairs = tmp_path / "pairs.tsv"
    pairs.write_text("just one field\n", encoding="utf-8")
    config = HarnessConfig(
        base_model=encoder_dir, data=str(pairs), output_dir=str(tmp_path / "out"),
    )
    with pytest.raises(FormatError):
        train_contrastive(pairs, config)


def test_model_and_tokenizer_saved(tuned):
    config, result = tuned
    from pathlib import Path

    out = Path(result["model_dir"])
    assert (out / "config.json").exists()
    assert (out / "tokenizer_config.json").exists()
