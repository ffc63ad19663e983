"""Embedding providers and the on-disk vector formats.

Two provider kinds share one query surface:

* ``TableProvider`` wraps vocabulary vectors (a trained table or an
  imported file). A phrase set is embedded as the mean of its members'
  vectors, where out-of-vocabulary phrases contribute the zero vector and
  still count in the denominator. Dividing by the known-phrase count
  instead is available behind ``denominator="known"``.
* ``InstanceProvider`` adds precomputed per-instance vectors (produced by
  an external encoder over the joined remainder text). Phrase-set queries
  are answered by instance-id lookup; a miss is a hard error.

Text format: header line ``N dim``, then one line per phrase with spaces
replaced by underscores, followed by ``dim`` reals. Reading maps
underscores back to spaces, so phrases containing literal underscores do
not survive the text format; the binary format length-prefixes raw UTF-8
phrases and is lossless.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .corpus import Vocabulary
from .errors import DimMismatch, MissingInstanceEmbedding, UnknownPhrase
from .sgns import EmbeddingTable


@dataclass
class PhraseSetEmbedding:
    """Mean vector of a phrase set plus coverage bookkeeping."""

    vector: np.ndarray
    n_known: int
    is_zero: bool


def similarity(u, v) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimMismatch(f"{u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v / (nu * nv))


def cosine_to_all(q, matrix) -> np.ndarray:
    """Cosine of ``q`` against every matrix row, zero-norm rows scoring 0.0."""
    q = np.asarray(q, dtype=float)
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape[1] != q.shape[0]:
        raise DimMismatch(f"{matrix.shape[1]} vs {q.shape[0]}")
    qn = np.linalg.norm(q)
    if qn == 0.0:
        return np.zeros(matrix.shape[0])
    norms = np.linalg.norm(matrix, axis=1)
    dots = matrix @ q
    return np.divide(dots, norms * qn, out=np.zeros_like(dots), where=norms > 0)


class TableProvider:
    """Vocabulary-vector provider backed by an in-memory matrix."""

    kind = "internal_table"

    def __init__(self, phrases: list[str], matrix: np.ndarray, denominator: str = "all"):
        if denominator not in ("all", "known"):
            raise ValueError("denominator must be 'all' or 'known'")
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(phrases):
            raise ValueError("matrix shape does not match phrase list")
        if not np.isfinite(matrix).all():
            raise ValueError("non-finite embedding entries")
        self.phrases = list(phrases)
        self.matrix = matrix
        self.index = {p: i for i, p in enumerate(self.phrases)}
        self.denominator = denominator

    @classmethod
    def from_table(cls, table: EmbeddingTable, denominator: str = "all"):
        return cls(table.vocabulary.phrases, table.input_vectors, denominator=denominator)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.phrases)

    def has(self, phrase) -> bool:
        return phrase in self.index

    def vector(self, phrase) -> np.ndarray:
        i = self.index.get(phrase)
        if i is None:
            raise UnknownPhrase(phrase)
        return self.matrix[i]

    def embed_phrase_set(self, phrases: list[str], instance_id: str | None = None) -> PhraseSetEmbedding:
        if not phrases:
            raise ValueError("phrase set must be non-empty")
        acc = np.zeros(self.dim)
        n_known = 0
        for p in phrases:
            i = self.index.get(p)
            if i is not None:
                acc += self.matrix[i]
                n_known += 1
        denom = len(phrases) if self.denominator == "all" else max(n_known, 1)
        return PhraseSetEmbedding(vector=acc / denom, n_known=n_known, is_zero=n_known == 0)

    def aligned_matrix(self, vocabulary: Vocabulary) -> np.ndarray:
        """Rows of this provider reordered to the vocabulary's ids.

        Hard error when a vocabulary phrase is missing; evaluation must
        never silently skip candidates.
        """
        rows = np.empty(len(vocabulary), dtype=np.int64)
        for i, phrase in enumerate(vocabulary.phrases):
            j = self.index.get(phrase)
            if j is None:
                raise UnknownPhrase(f"provider does not cover vocabulary phrase {phrase!r}")
            rows[i] = j
        return self.matrix[rows]


class InstanceProvider(TableProvider):
    """Vocabulary vectors plus precomputed instance vectors."""

    kind = "external_vocab_plus_instances"

    def __init__(self, phrases, matrix, instance_ids, instance_matrix, denominator="all"):
        super().__init__(phrases, matrix, denominator=denominator)
        instance_matrix = np.asarray(instance_matrix, dtype=np.float64)
        if instance_matrix.ndim != 2 or instance_matrix.shape[0] != len(instance_ids):
            raise ValueError("instance matrix shape does not match id list")
        if instance_matrix.shape[1] != self.dim:
            raise DimMismatch("instance vectors differ in dimension from vocabulary vectors")
        if not np.isfinite(instance_matrix).all():
            raise ValueError("non-finite instance embedding entries")
        self.instance_ids = list(instance_ids)
        self.instance_matrix = instance_matrix
        self.instance_index = {k: i for i, k in enumerate(self.instance_ids)}

    def embed_phrase_set(self, phrases: list[str], instance_id: str | None = None) -> PhraseSetEmbedding:
        if not phrases:
            raise ValueError("phrase set must be non-empty")
        if instance_id is None:
            raise MissingInstanceEmbedding("external provider needs an instance id")
        i = self.instance_index.get(instance_id)
        if i is None:
            raise MissingInstanceEmbedding(instance_id)
        return PhraseSetEmbedding(
            vector=self.instance_matrix[i], n_known=len(phrases), is_zero=False
        )


def random_provider(vocabulary: Vocabulary, dim: int, seed: int) -> TableProvider:
    """Unit-norm random vectors per phrase; the chance baseline."""
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((len(vocabulary), dim))
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    return TableProvider(vocabulary.phrases, m)


def nearest_neighbors(provider: TableProvider, phrase: str, k: int) -> list[tuple[str, float]]:
    """Top-k phrases by cosine similarity, query excluded.

    Ordering is total: descending similarity, ties broken by row id.
    """
    if not 1 <= k < len(provider):
        raise ValueError(f"k must lie in [1, {len(provider) - 1}]")
    q = provider.vector(phrase)
    sims = cosine_to_all(q, provider.matrix)
    self_row = provider.index[phrase]
    order = np.lexsort((np.arange(len(sims)), -sims))
    out = []
    for row in order:
        if row == self_row:
            continue
        out.append((provider.phrases[int(row)], float(sims[row])))
        if len(out) == k:
            break
    return out


# ---------------------------------------------------------------------------
# File formats

def _format_real(x: float) -> str:
    return np.format_float_positional(
        float(x), precision=8, unique=False, fractional=False, trim="0"
    )


def write_embeddings_text(path, phrases: list[str], matrix: np.ndarray):
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(phrases)} {matrix.shape[1]}\n")
        for phrase, row in zip(phrases, matrix):
            token = phrase.replace(" ", "_")
            fh.write(token + " " + " ".join(_format_real(x) for x in row) + "\n")


def read_embeddings_text(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        n, dim = int(header[0]), int(header[1])
        phrases, rows = [], np.empty((n, dim), dtype=np.float64)
        for i in range(n):
            parts = fh.readline().rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ValueError(f"{path}: row {i} has {len(parts) - 1} values, expected {dim}")
            phrases.append(parts[0].replace("_", " "))
            rows[i] = [float(x) for x in parts[1:]]
    return phrases, rows


_BIN_MAGIC = b"PEMB\x01"


def write_embeddings_binary(path, phrases: list[str], matrix: np.ndarray):
    """Lossless binary variant: length-prefixed UTF-8 phrases, float32 rows."""
    matrix = np.asarray(matrix, dtype=np.float32)
    with open(path, "wb") as fh:
        fh.write(_BIN_MAGIC)
        fh.write(struct.pack("<qq", len(phrases), matrix.shape[1]))
        for phrase, row in zip(phrases, matrix):
            raw = phrase.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(row.tobytes())


def read_embeddings_binary(path) -> tuple[list[str], np.ndarray]:
    with open(path, "rb") as fh:
        if fh.read(len(_BIN_MAGIC)) != _BIN_MAGIC:
            raise ValueError(f"{path}: not a personae binary embedding file")
        n, dim = struct.unpack("<qq", fh.read(16))
        phrases, matrix = [], np.empty((n, dim), dtype=np.float32)
        for i in range(n):
            (ln,) = struct.unpack("<H", fh.read(2))
            phrases.append(fh.read(ln).decode("utf-8"))
            matrix[i] = np.frombuffer(fh.read(4 * dim), dtype="<f4")
    return phrases, matrix.astype(np.float64)


def write_instance_embeddings(path, ids: list[str], matrix: np.ndarray):
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(ids)} {matrix.shape[1]}\n")
        for key, row in zip(ids, matrix):
            if " " in key:
                raise ValueError(f"instance id may not contain spaces: {key!r}")
            fh.write(key + " " + " ".join(_format_real(x) for x in row) + "\n")


def read_instance_embeddings(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        n, dim = int(header[0]), int(header[1])
        ids, rows = [], np.empty((n, dim), dtype=np.float64)
        for i in range(n):
            parts = fh.readline().rstrip("\n").split(" ")
            ids.append(parts[0])
            rows[i] = [float(x) for x in parts[1:]]
    return ids, rows


def save_table(table: EmbeddingTable, path: str, binary: bool = False):
    """Persist input vectors at ``path``, output vectors at ``path.ctx``,
    and provenance metadata at ``path.meta.json``."""
    writer = write_embeddings_binary if binary else write_embeddings_text
    writer(path, table.vocabulary.phrases, table.input_vectors)
    writer(str(path) + ".ctx", table.vocabulary.phrases, table.output_vectors)
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(table.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_vocab_provider(path, binary: bool = False, denominator: str = "all") -> TableProvider:
    reader = read_embeddings_binary if binary else read_embeddings_text
    phrases, matrix = reader(path)
    return TableProvider(phrases, matrix, denominator=denominator)


def load_instance_provider(
    vocab_path, instances_path, binary: bool = False, denominator: str = "all"
) -> InstanceProvider:
    reader = read_embeddings_binary if binary else read_embeddings_text
    phrases, matrix = reader(vocab_path)
    ids, imat = read_instance_embeddings(instances_path)
    return InstanceProvider(phrases, matrix, ids, imat, denominator=denominator)
