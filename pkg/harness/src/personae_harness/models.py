"""Model loading, pooling rules, and an offline tiny-model factory.

``base_model`` in a config may be any local directory saved by
``save_pretrained`` (or a Hugging Face model id when downloads are
available). For hermetic runs, ``build_tiny_model`` creates a small
randomly initialized BERT-style model with a word-level WordPiece
tokenizer built from the training texts themselves.

Pooling follows the model family: sentence encoders average all token
embeddings under the attention mask; masked LMs use the first ([CLS])
token embedding.
"""

from __future__ import annotations

import re
from pathlib import Path

import torch
from tokenizers import Tokenizer, models as tok_models, normalizers, pre_tokenizers, processors
from transformers import AutoModel, AutoTokenizer, BertConfig, BertForMaskedLM, BertModel, BertTokenizerFast

POOLING_BY_FAMILY = {"sentence_encoder": "mean", "masked_lm": "cls"}

_SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
_WORD_RE = re.compile(r"\w+|[^\w\s]")


def _word_vocab(texts) -> dict[str, int]:
    words = sorted({w.lower() for t in texts for w in _WORD_RE.findall(t)})
    return {w: i for i, w in enumerate(_SPECIALS + words)}


def build_tokenizer(texts) -> BertTokenizerFast:
    """Word-level WordPiece tokenizer covering every token in ``texts``."""
    vocab = _word_vocab(texts)
    backend = Tokenizer(tok_models.WordPiece(vocab=vocab, unk_token="[UNK]"))
    backend.normalizer = normalizers.BertNormalizer(lowercase=True)
    backend.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    backend.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return BertTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]", pad_token="[PAD]", cls_token="[CLS]",
        sep_token="[SEP]", mask_token="[MASK]",
    )


def build_tiny_model(
    texts, outdir, kind: str = "sentence_encoder",
    hidden_size: int = 64, layers: int = 2, heads: int = 2, seed: int = 0,
) -> str:
    """Write a small randomly initialized model + tokenizer to ``outdir``."""
    outdir = Path(outdir)
    tokenizer = build_tokenizer(texts)
    config = BertConfig(
        vocab_size=len(tokenizer),
        hidden_size=hidden_size,
        num_hidden_layers=layers,
        num_attention_heads=heads,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=128,
    )
    torch.manual_seed(seed)
    model = BertForMaskedLM(config) if kind == "masked_lm" else BertModel(config)
    model.save_pretrained(outdir)
    tokenizer.save_pretrained(outdir)
    return str(outdir)


def load_encoder(model_dir: str):
    """Tokenizer plus the base encoder (heads stripped if present)."""
    tokenizer = AutoTokenizer.from_pretrained(model_dir)
    model = AutoModel.from_pretrained(model_dir)
    return tokenizer, model


def load_masked_lm(model_dir: str):
    tokenizer = AutoTokenizer.from_pretrained(model_dir)
    model = BertForMaskedLM.from_pretrained(model_dir)
    return tokenizer, model


def pool(last_hidden: torch.Tensor, attention_mask: torch.Tensor, rule: str) -> torch.Tensor:
    if rule == "cls":
        return last_hidden[:, 0]
    if rule == "mean":
        mask = attention_mask.unsqueeze(-1).to(last_hidden.dtype)
        return (last_hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1e-9)
    raise ValueError(f"unknown pooling rule {rule!r}")


def encode_texts(tokenizer, model, texts, rule: str, batch_size: int = 64, max_length: int = 64):
    """Batched eval-mode embedding of a text list."""
    model.eval()
    out = []
    with torch.no_grad():
        for i in range(0, len(texts), batch_size):
            enc = tokenizer(
                texts[i: i + batch_size],
                padding=True, truncation=True, max_length=max_length, return_tensors="pt",
            )
            hidden = model(input_ids=enc["input_ids"], attention_mask=enc["attention_mask"])
            out.append(pool(hidden.last_hidden_state, enc["attention_mask"], rule))
    return torch.cat(out, dim=0).numpy()
