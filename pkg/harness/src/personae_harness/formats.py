"""Readers and writers for the core toolchain's file formats.

The harness talks to the core exclusively through these files, so the
parsers live here rather than importing the core package:

* pair file: anchor_text <TAB> other_text <TAB> label, fields JSON-escaped
* masked file: sentence <TAB> span_start <TAB> span_end <TAB> identity
* vocabulary: phrase <TAB> id <TAB> doc_frequency
* instances: bio_id <TAB> split <TAB> target <TAB> remainder JSON array;
  an instance's key is "bio_id#k", k counting that bio's occurrences
  within the file
* embeddings (text): header "N dim", one line per phrase with spaces
  replaced by underscores, then the vector components
* instance embeddings: header "N dim", then instance_id and components
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass
class PairRow:
    anchor: str
    other: str
    label: float


@dataclass
class MaskedRow:
    sentence: str
    span_start: int
    span_end: int
    identity: str


@dataclass
class InstanceRow:
    key: str
    text: str


class FormatError(ValueError):
    pass


def read_pairs(path) -> list[PairRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(f"{path}:{ln}: expected 3 fields, got {len(parts)}")
            try:
                anchor = json.loads(parts[0])
                other = json.loads(parts[1])
                label = float(parts[2])
            except (json.JSONDecodeError, ValueError) as exc:
                raise FormatError(f"{path}:{ln}: {exc}") from exc
            if label not in (0.0, 1.0):
                raise FormatError(f"{path}:{ln}: label must be 0.0 or 1.0, got {label}")
            rows.append(PairRow(anchor=anchor, other=other, label=label))
    if not rows:
        raise FormatError(f"{path}: no pair records")
    return rows


def read_masked(path) -> list[MaskedRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise FormatError(f"{path}:{ln}: expected 4 fields, got {len(parts)}")
            try:
                sentence = json.loads(parts[0])
                start, end = int(parts[1]), int(parts[2])
                identity = json.loads(parts[3])
            except (json.JSONDecodeError, ValueError) as exc:
                raise FormatError(f"{path}:{ln}: {exc}") from exc
            if not 0 <= start < end <= len(sentence) or sentence[start:end] != identity:
                raise FormatError(f"{path}:{ln}: span does not cover the identity")
            rows.append(MaskedRow(sentence=sentence, span_start=start, span_end=end, identity=identity))
    if not rows:
        raise FormatError(f"{path}: no masked records")
    return rows


def read_vocabulary(path) -> list[str]:
    phrases = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh):
            phrase, ident, _freq = line.rstrip("\n").split("\t")
            if int(ident) != ln:
                raise FormatError(f"{path}: ids not dense at line {ln + 1}")
            phrases.append(phrase)
    if not phrases:
        raise FormatError(f"{path}: empty vocabulary")
    return phrases


def read_instances(path) -> list[InstanceRow]:
    rows = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            bio_id, _split, _target, remainder = line.split("\t", 3)
            k = seen.get(bio_id, 0)
            seen[bio_id] = k + 1
            rows.append(InstanceRow(key=f"{bio_id}#{k}", text=", ".join(json.loads(remainder))))
    return rows


def _format_real(x: float) -> str:
    return np.format_float_positional(
        float(x), precision=8, unique=False, fractional=False, trim="0"
    )


def write_vocab_embeddings(path, phrases: list[str], matrix: np.ndarray):
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(phrases)} {matrix.shape[1]}\n")
        for phrase, row in zip(phrases, matrix):
            fh.write(phrase.replace(" ", "_") + " " + " ".join(_format_real(v) for v in row) + "\n")


def write_instance_embeddings(path, keys: list[str], matrix: np.ndarray):
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(keys)} {matrix.shape[1]}\n")
        for key, row in zip(keys, matrix):
            if " " in key:
                raise FormatError(f"instance key may not contain spaces: {key!r}")
            fh.write(key + " " + " ".join(_format_real(v) for v in row) + "\n")
