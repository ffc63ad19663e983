"""Train identity embeddings on a planted corpus and inspect the space."""

import numpy as np

from personae.corpus import split_corpus
from personae.extraction import SyntheticSpec, community_of, generate_synthetic
from personae.sgns import TrainConfig, train
from personae.store import TableProvider, nearest_neighbors

spec = SyntheticSpec(
    n_communities=6,
    identities_per_community=25,
    n_bios=8000,
    identities_per_bio=(3, 6),
    noise_rate=0.1,
    seed=42,
)
split = split_corpus(generate_synthetic(spec), 0.2, 3, seed=1)

config = TrainConfig(dim=32, epochs=20, window=8, mode="skipgram", seed=0, batch_size=512)
table = train(split.train, split.vocabulary, config)
losses = table.metadata["epoch_loss"]
print(f"trained {len(split.vocabulary)} x {table.dim} in {config.epochs} epochs")
print(f"epoch loss: {losses[0]:.4f} -> {losses[-1]:.4f}")

vecs = table.input_vectors / np.linalg.norm(table.input_vectors, axis=1, keepdims=True)
labels = np.array([community_of(p) for p in split.vocabulary.phrases])
sims = vecs @ vecs.T
same = labels[:, None] == labels[None, :]
off_diag = ~np.eye(len(vecs), dtype=bool)
print(f"mean cosine within community: {sims[same & off_diag].mean():+.3f}")
print(f"mean cosine across communities: {sims[~same].mean():+.3f}")

provider = TableProvider.from_table(table)
query = split.vocabulary.phrases[0]
print(f"\nnearest neighbours of {query!r} (community {community_of(query)}):")
for phrase, sim in nearest_neighbors(provider, query, k=8):
    print(f"  {sim:+.3f}  {phrase}  (community {community_of(phrase)})")
