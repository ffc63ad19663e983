"""Contrastive triplet and masked-identity dataset construction.

Triplets: one per eligible training bio. A positive identity is drawn
uniformly from the bio's in-vocabulary identities, the rest of the bio
becomes the anchor, and the negative is drawn uniformly from the
vocabulary identities that never co-occur with the positive anywhere in
the training corpus. Bios whose positive co-occurs with every other
vocabulary identity are skipped and counted.

Masked records: the bio's identities joined by ", " with the character
span of one uniformly chosen identity recorded, so a fine-tuning harness
can mask exactly that phrase.

Pair records restate each triplet as two regression rows, anchor/positive
labeled 1.0 and anchor/negative labeled 0.0, for a cosine-similarity
mean-squared-error objective.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import CooccurrenceIndex, Vocabulary, dedupe
from .errors import NoValidNegative
from .extraction import Bio

ANCHOR_JOIN = ", "


@dataclass
class Triplet:
    anchor: list[str]
    positive: str
    negative: str
    bio_id: str

    @property
    def anchor_text(self) -> str:
        return ANCHOR_JOIN.join(self.anchor)


@dataclass
class MaskedBio:
    sentence: str
    span_start: int
    span_end: int
    masked_identity: str
    bio_id: str


def eligible_for_triplet(bio: Bio, vocabulary: Vocabulary) -> bool:
    return sum(1 for x in dedupe(bio.identities) if x in vocabulary) >= 2


def make_triplet(
    bio: Bio, index: CooccurrenceIndex, vocabulary: Vocabulary, rng: np.random.Generator
) -> Triplet:
    """Build one triplet from a bio with >= 2 in-vocabulary identities.

    The negative is uniform over {v in V : (v, positive) never co-occur,
    v != positive}. Raises NoValidNegative when that set is empty.
    """
    ids = dedupe(bio.identities)
    in_vocab = [x for x in ids if x in vocabulary]
    if len(in_vocab) < 2:
        raise ValueError(f"bio {bio.id!r} has fewer than 2 in-vocabulary identities")
    positive = in_vocab[int(rng.integers(len(in_vocab)))]
    anchor = [x for x in ids if x != positive]
    pos_id = vocabulary.id_of(positive)

    n_vocab = len(vocabulary)
    n_candidates = n_vocab - 1 - index.neighbor_count(pos_id)
    if n_candidates <= 0:
        raise NoValidNegative(positive)

    # Rejection sampling is cheap while co-occurrence coverage is sparse;
    # fall back to materializing the complement when it is not.
    if n_candidates >= n_vocab // 4:
        while True:
            cand = int(rng.integers(n_vocab))
            if cand != pos_id and not index.co(cand, pos_id):
                break
    else:
        blocked = index.neighbors[pos_id]
        candidates = [v for v in range(n_vocab) if v != pos_id and v not in blocked]
        cand = candidates[int(rng.integers(len(candidates)))]
    return Triplet(
        anchor=anchor,
        positive=positive,
        negative=vocabulary.phrases[cand],
        bio_id=bio.id,
    )


def make_masked(bio: Bio, rng: np.random.Generator) -> MaskedBio:
    """Join the bio's identities and record the span of one chosen identity."""
    identities = bio.identities
    if len(identities) < 2:
        raise ValueError(f"bio {bio.id!r} needs >= 2 identities to mask one")
    pick = int(rng.integers(len(identities)))
    start = sum(len(x) for x in identities[:pick]) + len(ANCHOR_JOIN) * pick
    chosen = identities[pick]
    return MaskedBio(
        sentence=ANCHOR_JOIN.join(identities),
        span_start=start,
        span_end=start + len(chosen),
        masked_identity=chosen,
        bio_id=bio.id,
    )


def export_datasets(
    train: list[Bio],
    index: CooccurrenceIndex,
    vocabulary: Vocabulary,
    seed: int,
    outdir,
) -> dict:
    """Write triplets.tsv, pairs.tsv, masked.tsv and a manifest.

    One triplet and one masked record per eligible bio, in input order;
    deterministic for a fixed seed. The manifest carries counts and skip
    reasons. Fields in the TSVs are JSON-escaped so tabs cannot corrupt
    records.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rng_triplet = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    rng_masked = np.random.default_rng(np.random.SeedSequence([seed, 1]))

    counts = {
        "bios": len(train),
        "triplets": 0,
        "masked": 0,
        "skipped_no_valid_negative": 0,
        "skipped_too_few_in_vocab": 0,
        "skipped_too_few_identities": 0,
    }

    def esc(s: str) -> str:
        return json.dumps(s, ensure_ascii=False)

    with open(outdir / "triplets.tsv", "w", encoding="utf-8") as ftrip, \
         open(outdir / "pairs.tsv", "w", encoding="utf-8") as fpair, \
         open(outdir / "masked.tsv", "w", encoding="utf-8") as fmask:
        for bio in train:
            if eligible_for_triplet(bio, vocabulary):
                try:
                    t = make_triplet(bio, index, vocabulary, rng_triplet)
                    ftrip.write(
                        f"{esc(t.anchor_text)}\t{esc(t.positive)}\t{esc(t.negative)}\t{esc(t.bio_id)}\n"
                    )
                    fpair.write(f"{esc(t.anchor_text)}\t{esc(t.positive)}\t1.0\n")
                    fpair.write(f"{esc(t.anchor_text)}\t{esc(t.negative)}\t0.0\n")
                    counts["triplets"] += 1
                except NoValidNegative:
                    counts["skipped_no_valid_negative"] += 1
            else:
                counts["skipped_too_few_in_vocab"] += 1

            if len(bio.identities) >= 2:
                m = make_masked(bio, rng_masked)
                fmask.write(
                    f"{esc(m.sentence)}\t{m.span_start}\t{m.span_end}\t{esc(m.masked_identity)}\n"
                )
                counts["masked"] += 1
            else:
                counts["skipped_too_few_identities"] += 1

    manifest = {"seed": seed, "counts": counts, "anchor_join": ANCHOR_JOIN}
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def read_triplets(path) -> list[Triplet]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            anchor_text, positive, negative, bio_id = (json.loads(f) for f in line.split("\t"))
            out.append(
                Triplet(
                    anchor=anchor_text.split(ANCHOR_JOIN),
                    positive=positive,
                    negative=negative,
                    bio_id=bio_id,
                )
            )
    return out


def read_pairs(path) -> list[tuple[str, str, float]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            anchor, other, label = line.split("\t")
            out.append((json.loads(anchor), json.loads(other), float(label)))
    return out


def read_masked(path) -> list[MaskedBio]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            sentence, start, end, identity = line.split("\t")
            out.append(
                MaskedBio(
                    sentence=json.loads(sentence),
                    span_start=int(start),
                    span_end=int(end),
                    masked_identity=json.loads(identity),
                    bio_id=f"masked-{i}",
                )
            )
    return out
