"""Build the fine-tuning datasets: contrastive triplets, cosine-regression
pairs, and masked-identity records."""

import tempfile
from pathlib import Path

from personae.corpus import build_cooccurrence, split_corpus
from personae.extraction import SyntheticSpec, generate_synthetic
from personae.finetune_data import export_datasets, read_masked, read_pairs, read_triplets

spec = SyntheticSpec(
    n_communities=5,
    identities_per_community=20,
    n_bios=4000,
    identities_per_bio=(3, 5),
    noise_rate=0.1,
    seed=8,
)
split = split_corpus(generate_synthetic(spec), 0.2, 3, seed=2)
index = build_cooccurrence(split.train, split.vocabulary)

outdir = Path(tempfile.mkdtemp(prefix="personae_demo_"))
manifest = export_datasets(split.train, index, split.vocabulary, seed=5, outdir=outdir)
print("export counts:", manifest["counts"])

triplets = read_triplets(outdir / "triplets.tsv")
t = triplets[0]
print("\nfirst triplet:")
print(f"  anchor:   {t.anchor}")
print(f"  positive: {t.positive!r} (from the same bio)")
print(f"  negative: {t.negative!r} (never co-occurs with the positive)")
assert not index.co(split.vocabulary.id_of(t.positive), split.vocabulary.id_of(t.negative))

pairs = read_pairs(outdir / "pairs.tsv")
print("\nregression rows for that triplet:")
for anchor, other, label in pairs[:2]:
    print(f"  ({anchor!r}, {other!r}) -> {label}")

masked = read_masked(outdir / "masked.tsv")
m = masked[0]
print("\nfirst masked record:")
print(f"  sentence: {m.sentence!r}")
print(f"  span [{m.span_start}:{m.span_end}] covers {m.masked_identity!r}")
print(f"  files under {outdir}")
