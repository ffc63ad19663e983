"""Vocabulary, splits, and the co-occurrence index over extracted bios.

Counting semantics: an identity repeated inside one bio counts once
(document frequency), and duplicates are removed from a bio before any
other processing. The train/test split is by bio, so one person's profile
never leaks across splits. The vocabulary is always built from the
training side only.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSplit, EmptyVocabulary
from .extraction import Bio

TEST_SPLITS = ("main", "general")


def dedupe(identities: list[str]) -> list[str]:
    """Remove duplicates, keeping first-occurrence order."""
    return list(dict.fromkeys(identities))


class Vocabulary:
    """Frequency-thresholded identity lexicon with dense integer ids.

    Ids are assigned by descending document frequency, ties broken
    lexicographically, so id order is a pure function of the counts.
    Lookups are total: ``id_of`` returns None for out-of-vocabulary
    phrases instead of guessing.
    """

    def __init__(self, phrases: list[str], doc_freq):
        self.phrases = list(phrases)
        self.doc_freq = np.asarray(doc_freq, dtype=np.int64)
        if len(self.phrases) != len(self.doc_freq):
            raise ValueError("phrase/count length mismatch")
        self.index = {p: i for i, p in enumerate(self.phrases)}
        if len(self.index) != len(self.phrases):
            raise ValueError("duplicate phrases in vocabulary")

    def __len__(self):
        return len(self.phrases)

    def __contains__(self, phrase):
        return phrase in self.index

    def __eq__(self, other):
        return (
            isinstance(other, Vocabulary)
            and self.phrases == other.phrases
            and bool(np.array_equal(self.doc_freq, other.doc_freq))
        )

    def id_of(self, phrase) -> int | None:
        return self.index.get(phrase)

    def freq_of(self, phrase) -> int:
        i = self.index.get(phrase)
        return int(self.doc_freq[i]) if i is not None else 0

    def to_tsv(self, path):
        """Write phrase, id, doc_frequency rows, sorted by id."""
        with open(path, "w", encoding="utf-8") as fh:
            for i, phrase in enumerate(self.phrases):
                fh.write(f"{phrase}\t{i}\t{int(self.doc_freq[i])}\n")

    @classmethod
    def from_tsv(cls, path):
        phrases, freqs = [], []
        with open(path, encoding="utf-8") as fh:
            for ln, line in enumerate(fh):
                phrase, ident, freq = line.rstrip("\n").split("\t")
                if int(ident) != ln:
                    raise ValueError(f"{path}: ids not dense at line {ln + 1}")
                phrases.append(phrase)
                freqs.append(int(freq))
        return cls(phrases, freqs)


def build_vocabulary(bios: list[Bio], min_doc_freq: int) -> Vocabulary:
    """Count distinct-bio occurrences and keep phrases at or above the threshold."""
    if min_doc_freq < 1:
        raise ValueError("min_doc_freq must be >= 1")
    counts = Counter()
    for bio in bios:
        counts.update(dedupe(bio.identities))
    kept = [(p, c) for p, c in counts.items() if c >= min_doc_freq]
    if not kept:
        raise EmptyVocabulary(f"no identity reaches doc frequency {min_doc_freq}")
    kept.sort(key=lambda pc: (-pc[1], pc[0]))
    return Vocabulary([p for p, _ in kept], [c for _, c in kept])


def filter_trainable(bios: list[Bio], vocabulary: Vocabulary) -> list[Bio]:
    """Training view: drop out-of-vocabulary identities and duplicates,
    then keep only bios that still have at least two identities."""
    out = []
    for bio in bios:
        ids = [x for x in dedupe(bio.identities) if x in vocabulary]
        if len(ids) >= 2:
            out.append(Bio(id=bio.id, identities=ids, source=bio.source))
    return out


class CooccurrenceIndex:
    """Symmetric set of vocabulary-id pairs that co-occur in some training bio."""

    def __init__(self, vocab_size: int):
        self.vocab_size = vocab_size
        self.neighbors: list[set[int]] = [set() for _ in range(vocab_size)]

    def add(self, a: int, b: int):
        if a == b:
            return
        self.neighbors[a].add(b)
        self.neighbors[b].add(a)

    def co(self, a: int, b: int) -> bool:
        if a == b:
            return False
        return b in self.neighbors[a]

    def neighbor_count(self, a: int) -> int:
        return len(self.neighbors[a])

    def pair_set(self) -> set[tuple[int, int]]:
        """All pairs as (min, max) tuples; mainly for audits."""
        return {(a, b) for a in range(self.vocab_size) for b in self.neighbors[a] if a < b}

    @property
    def n_pairs(self) -> int:
        return sum(len(s) for s in self.neighbors) // 2


def build_cooccurrence(train: list[Bio], vocabulary: Vocabulary) -> CooccurrenceIndex:
    """Index every unordered in-vocabulary pair seen inside one bio."""
    index = CooccurrenceIndex(len(vocabulary))
    for bio in train:
        ids = [vocabulary.id_of(x) for x in dedupe(bio.identities)]
        ids = [i for i in ids if i is not None]
        for k, a in enumerate(ids):
            for b in ids[k + 1:]:
                index.add(a, b)
    return index


@dataclass
class EvalInstance:
    """One held-out prediction case: guess ``target`` given ``remainder``.

    ``ordinal`` numbers the instances generated from the same bio, so
    ``bio_id`` plus ``ordinal`` is a unique key (used to join externally
    computed instance embeddings).
    """

    bio_id: str
    remainder: list[str]
    target: str
    split: str
    ordinal: int = 0

    @property
    def instance_id(self) -> str:
        return f"{self.bio_id}#{self.ordinal}"


@dataclass
class SplitCorpus:
    """Everything the training and evaluation stages consume."""

    train: list[Bio]
    test_main: list[EvalInstance]
    test_general: list[EvalInstance]
    vocabulary: Vocabulary
    stats: dict = field(default_factory=dict)


def partition_bios(bios: list[Bio], test_fraction: float, seed: int) -> tuple[list[Bio], list[Bio]]:
    """Deterministic by-bio holdout: floor(n * fraction) bios become the
    test side via a seeded permutation; original order is kept within
    each side."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    n = len(bios)
    n_test = int(n * test_fraction)
    if n_test == 0 or n_test == n:
        raise DegenerateSplit(f"{n} bios at fraction {test_fraction} leaves an empty side")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    test_pick = np.zeros(n, dtype=bool)
    test_pick[rng.permutation(n)[:n_test]] = True
    train_raw = [bios[i] for i in range(n) if not test_pick[i]]
    test_raw = [bios[i] for i in range(n) if test_pick[i]]
    return train_raw, test_raw


def split_corpus(
    bios: list[Bio],
    test_fraction: float,
    vocabulary_threshold: int,
    seed: int,
    instances_per_bio: int = 1,
) -> SplitCorpus:
    """Hold out a fraction of bios, build the vocabulary from the rest,
    and turn eligible held-out bios into evaluation instances.

    A held-out bio is eligible when it has at least two distinct
    identities and at least one of them is in the vocabulary. Each
    eligible bio yields up to ``instances_per_bio`` instances with
    distinct targets, drawn uniformly without replacement from its
    in-vocabulary identities. An instance lands in the main set when its
    remainder keeps at least one in-vocabulary identity, otherwise in the
    generalizability set.

    Deterministic for fixed inputs and seed.
    """
    if instances_per_bio < 1:
        raise ValueError("instances_per_bio must be >= 1")
    train_raw, test_raw = partition_bios(bios, test_fraction, seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))

    vocabulary = build_vocabulary(train_raw, vocabulary_threshold)
    train = filter_trainable(train_raw, vocabulary)
    if not train:
        raise DegenerateSplit("no trainable bios survive vocabulary filtering")

    test_main: list[EvalInstance] = []
    test_general: list[EvalInstance] = []
    n_eligible = 0
    for bio in test_raw:
        ids = dedupe(bio.identities)
        if len(ids) < 2:
            continue
        in_vocab = [x for x in ids if x in vocabulary]
        if not in_vocab:
            continue
        n_eligible += 1
        k = min(instances_per_bio, len(in_vocab))
        targets = rng.choice(len(in_vocab), size=k, replace=False)
        per_split_seen = {"main": 0, "general": 0}
        for t in targets:
            target = in_vocab[int(t)]
            remainder = [x for x in ids if x != target]
            split = "main" if any(x in vocabulary for x in remainder) else "general"
            # Ordinal counts within the split so instance ids survive the
            # one-file-per-split round trip.
            inst = EvalInstance(
                bio_id=bio.id,
                remainder=remainder,
                target=target,
                split=split,
                ordinal=per_split_seen[split],
            )
            per_split_seen[split] += 1
            (test_main if split == "main" else test_general).append(inst)

    if not test_main and not test_general:
        raise DegenerateSplit("no held-out bio is eligible for evaluation")

    stats = {
        "n_bios": len(bios),
        "n_train_cut": len(train_raw),
        "n_test_cut": len(test_raw),
        "n_train": len(train),
        "n_test_eligible": n_eligible,
        "n_instances_main": len(test_main),
        "n_instances_general": len(test_general),
        "vocab_size": len(vocabulary),
        "vocabulary_threshold": vocabulary_threshold,
        "test_fraction": test_fraction,
        "instances_per_bio": instances_per_bio,
        "seed": seed,
    }
    return SplitCorpus(
        train=train,
        test_main=test_main,
        test_general=test_general,
        vocabulary=vocabulary,
        stats=stats,
    )


# Instance file I/O: bio_id <TAB> split <TAB> target <TAB> remainder JSON

def write_instances(path, instances: list[EvalInstance]):
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(
                f"{inst.bio_id}\t{inst.split}\t{inst.target}\t"
                f"{json.dumps(inst.remainder, ensure_ascii=False)}\n"
            )


def read_instances(path) -> list[EvalInstance]:
    instances = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            bio_id, split, target, remainder = line.split("\t", 3)
            ordinal = seen.get(bio_id, 0)
            seen[bio_id] = ordinal + 1
            instances.append(
                EvalInstance(
                    bio_id=bio_id,
                    remainder=json.loads(remainder),
                    target=target,
                    split=split,
                    ordinal=ordinal,
                )
            )
    return instances
