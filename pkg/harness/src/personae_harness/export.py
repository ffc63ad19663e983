"""Export vocabulary and instance embeddings in the core's file formats."""

from __future__ import annotations

from pathlib import Path

from .formats import (
    read_instances,
    read_vocabulary,
    write_instance_embeddings,
    write_vocab_embeddings,
)
from .models import POOLING_BY_FAMILY, encode_texts, load_encoder


def export_embeddings(
    model_dir: str,
    vocab_path,
    outdir,
    instances_paths=(),
    family: str = "sentence_encoder",
    batch_size: int = 64,
    max_length: int = 64,
) -> dict:
    """Embed every vocabulary phrase and every instance remainder text.

    Writes ``vocab_embeddings.txt`` and, per instances file, a matching
    ``instances_<stem>_embeddings.txt`` keyed by ``bio_id#k``. Pooling
    follows the model family: mean of token embeddings for sentence
    encoders, first-token embedding for masked LMs.
    """
    rule = POOLING_BY_FAMILY[family]
    tokenizer, model = load_encoder(model_dir)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    phrases = read_vocabulary(vocab_path)
    vocab_matrix = encode_texts(tokenizer, model, phrases, rule, batch_size, max_length)
    vocab_out = outdir / "vocab_embeddings.txt"
    write_vocab_embeddings(vocab_out, phrases, vocab_matrix)

    written = {"vocab": str(vocab_out), "dim": int(vocab_matrix.shape[1]), "instances": {}}
    for path in instances_paths:
        path = Path(path)
        rows = read_instances(path)
        if not rows:
            continue
        matrix = encode_texts(tokenizer, model, [r.text for r in rows], rule, batch_size, max_length)
        out = outdir / f"instances_{path.stem}_embeddings.txt"
        write_instance_embeddings(out, [r.key for r in rows], matrix)
        written["instances"][path.stem] = str(out)
    return written
