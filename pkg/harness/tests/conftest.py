"""Shared fixtures: a corpus produced by the core CLI plus tiny models.

The harness only ever consumes the core through its command line and
file formats; tests shell out to `python -m personae.cli` to produce
inputs and to score exported embeddings. (Importing the core package is
allowed in tests purely to read embedding files back for drift checks.)
"""

import json
import subprocess
import sys

import pytest

from personae_harness.config import HarnessConfig
from personae_harness.contrastive import train_contrastive
from personae_harness.formats import read_pairs
from personae_harness.models import build_tiny_model

SYNTH_SPEC = {
    "n_communities": 6,
    "identities_per_community": 20,
    "n_bios": 3000,
    "identities_per_bio": [3, 5],
    "noise_rate": 0.1,
    "seed": 19,
}


def run_core(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "personae.cli", *args],
        check=True, capture_output=True, text=True,
    )
    return proc.stdout


@pytest.fixture(scope="session")
def workspace(tmp_path_factory):
    ws = tmp_path_factory.mktemp("core_data")
    (ws / "synth.json").write_text(json.dumps(SYNTH_SPEC), encoding="utf-8")
    run_core("synth", "--spec", str(ws / "synth.json"), "--out", str(ws / "bios.tsv"))
    run_core(
        "corpus", "build", "--in", str(ws / "bios.tsv"), "--min-freq", "3",
        "--test-frac", "0.2", "--seed", "2", "--outdir", str(ws / "corpus"),
    )
    run_core(
        "finetune-data", "--corpus", str(ws / "corpus"), "--seed", "3",
        "--outdir", str(ws / "ft"),
    )
    return ws


@pytest.fixture(scope="session")
def encoder_dir(workspace, tmp_path_factory):
    rows = read_pairs(workspace / "ft" / "pairs.tsv")
    texts = [r.anchor for r in rows] + [r.other for r in rows]
    out = tmp_path_factory.mktemp("models") / "base_encoder"
    return build_tiny_model(texts, out, kind="sentence_encoder", hidden_size=64, seed=0)


@pytest.fixture(scope="session")
def mlm_dir(workspace, tmp_path_factory):
    from personae_harness.formats import read_masked

    rows = read_masked(workspace / "ft" / "masked.tsv")
    out = tmp_path_factory.mktemp("models") / "base_mlm"
    return build_tiny_model(
        [r.sentence for r in rows], out, kind="masked_lm", hidden_size=64, seed=0
    )


@pytest.fixture(scope="session")
def tuned(workspace, encoder_dir, tmp_path_factory):
    """Five-epoch contrastive fine-tune shared across tests."""
    outdir = tmp_path_factory.mktemp("models") / "tuned_encoder"
    config = HarnessConfig(
        base_model=encoder_dir, family="sentence_encoder",
        data=str(workspace / "ft" / "pairs.tsv"), output_dir=str(outdir),
        epochs=5, learning_rate=1e-3, batch_size=64,
        validation_fraction=0.1, seed=1,
    )
    result = train_contrastive(config.data, config)
    return config, result
