import json

import pytest

from personae_harness.config import HarnessConfig
from personae_harness.formats import FormatError, read_masked
from personae_harness.masked import mask_encoding, span_fully_masked, train_masked
from personae_harness.models import load_masked_lm


def test_whole_span_masked_audit(workspace, mlm_dir):
    # every record's masked tokens must jointly cover the full identity
    tokenizer, _ = load_masked_lm(mlm_dir)
    rows = read_masked(workspace / "ft" / "masked.tsv")[:1000]
    covered_ok = 0
    for row in rows:
        input_ids, labels, covered = mask_encoding(tokenizer, row, max_length=64)
        assert sum(1 for l in labels if l != -100) == len(covered)
        mask_id = tokenizer.mask_token_id
        assert all(
            input_ids[i] == mask_id for i, l in enumerate(labels) if l != -100
        )
        covered_ok += span_fully_masked(row, covered)
    assert covered_ok == len(rows)


def test_loss_only_on_masked_positions(mlm_dir):
    tokenizer, _ = load_masked_lm(mlm_dir)
    from personae_harness.formats import MaskedRow

    row = MaskedRow(sentence="c00 id000, c01 id001", span_start=0, span_end=9,
                    identity="c00 id000")
    input_ids, labels, covered = mask_encoding(tokenizer, row, max_length=32)
    unmasked = [i for i, l in enumerate(labels) if l == -100]
    enc = tokenizer(row.sentence)
    for i in unmasked:
        assert input_ids[i] == enc["input_ids"][i]
    assert covered and span_fully_masked(row, covered)


def test_single_record_loss_decreases(tmp_path, mlm_dir):
    path = tmp_path / "masked.tsv"
    sentence = "c00 id000, c00 id001, c00 id002"
    with open(path, "w", encoding="utf-8") as fh:
        for _ in range(32):
            fh.write(f"{json.dumps(sentence)}\t0\t9\t{json.dumps('c00 id000')}\n")
    config = HarnessConfig(
        base_model=mlm_dir, family="masked_lm", data=str(path),
        output_dir=str(tmp_path / "out"), epochs=3, learning_rate=5e-3,
        batch_size=8, validation_fraction=0.25, seed=0,
    )
    result = train_masked(path, config)
    t = result["train_loss"]
    assert t[0] > t[1] > t[2]


def test_empty_masked_file_errors_before_training(tmp_path, mlm_dir):
    path = tmp_path / "masked.tsv"
    path.write_text("", encoding="utf-8")
    config = HarnessConfig(base_model=mlm_dir, family="masked_lm", data=str(path),
                           output_dir=str(tmp_path / "out"))
    with pytest.raises(FormatError):
        train_masked(path, config)


def test_masked_training_on_corpus(tmp_path, workspace, mlm_dir):
    config = HarnessConfig(
        base_model=mlm_dir, family="masked_lm",
        data=str(workspace / "ft" / "masked.tsv"),
        output_dir=str(tmp_path / "out"), epochs=1, learning_rate=1e-3,
        batch_size=64, validation_fraction=0.1, seed=0,
    )
    result = train_masked(config.data, config)
    assert result["val_loss"][1] < result["val_loss"][0]
