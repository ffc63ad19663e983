"""Rank held-out identities against the whole vocabulary: trained
embeddings versus the random baseline."""

from personae.corpus import split_corpus
from personae.eval_predict import evaluate, top_percent_cutoff
from personae.extraction import SyntheticSpec, generate_synthetic
from personae.sgns import TrainConfig, train
from personae.store import TableProvider, random_provider

spec = SyntheticSpec(
    n_communities=6,
    identities_per_community=25,
    n_bios=10_000,
    identities_per_bio=(3, 6),
    noise_rate=0.1,
    seed=3,
)
split = split_corpus(generate_synthetic(spec), 0.2, 3, seed=4)
vocab = split.vocabulary
print(f"|V| = {len(vocab)}, top-1% cutoff = rank {top_percent_cutoff(len(vocab))}")
print(f"main test instances: {len(split.test_main)}")

table = train(split.train, vocab, TrainConfig(dim=32, epochs=20, seed=0, batch_size=512))

for name, provider in (
    ("trained", TableProvider.from_table(table)),
    ("random", random_provider(vocab, 32, seed=1)),
):
    report, _ = evaluate(provider, split.test_main, vocab)
    print(f"\n{name} provider:")
    print(f"  average rank:     {report.avg_rank:8.1f}   (1 is best, chance ~ {(len(vocab) + 1) / 2:.0f})")
    print(f"  mean log softmax: {report.mean_log_softmax:8.4f}")
    print(f"  top-1% accuracy:  {report.top1pct_accuracy:8.4f}")
    print("  by target training frequency:")
    for label, bucket in report.buckets.items():
        print(f"    {label:>9}: n={bucket['n_instances']:<5} avg_rank={bucket['avg_rank']:.1f}")
