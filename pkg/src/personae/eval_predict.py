"""Held-out identity prediction: rank the target among all of V.

For each evaluation instance the remainder's embedding is compared to
every vocabulary vector, producing |V| similarity scores. Three metrics
summarize the scores: the 1-based rank of the target (ties broken by
vocabulary id so results are reproducible), the log softmax of the
target's score, and whether the target lands in the top 1% of the
vocabulary. A zero remainder vector (possible for generalizability
instances under a vocabulary-only provider) yields all-equal similarities
and is scored like any other instance rather than erroring.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import EvalInstance, Vocabulary
from .store import TableProvider, cosine_to_all

DEFAULT_BUCKET_EDGES = (300, 10_000)


def top_percent_cutoff(vocab_size: int, fraction: float = 0.01) -> int:
    """Smallest rank still inside the top ``fraction``; at least 1."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie strictly between 0 and 1")
    return max(1, math.ceil(fraction * vocab_size))


def rank_with_tiebreak(sims: np.ndarray, target_id: int) -> int:
    """1-based rank under descending similarity with id tie-break."""
    s_t = sims[target_id]
    higher = int(np.count_nonzero(sims > s_t))
    tied_before = int(np.count_nonzero(sims[:target_id] == s_t))
    return 1 + higher + tied_before


def log_softmax_of(sims: np.ndarray, target_id: int, temperature: float = 1.0) -> float:
    """log softmax of the target's similarity, computed overflow-safe."""
    z = np.asarray(sims, dtype=np.float64) / temperature
    m = z.max()
    return float(z[target_id] - m - np.log(np.exp(z - m).sum()))


@dataclass
class PredictionResult:
    instance: EvalInstance
    rank: int
    log_softmax: float
    in_top_1pct: bool
    similarity_of_target: float


@dataclass
class EvalReport:
    split: str
    n_instances: int
    avg_rank: float
    mean_log_softmax: float
    top1pct_accuracy: float
    buckets: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "split": self.split,
                "n_instances": self.n_instances,
                "avg_rank": self.avg_rank,
                "mean_log_softmax": self.mean_log_softmax,
                "top1pct_accuracy": self.top1pct_accuracy,
                "buckets": self.buckets,
            },
            indent=2,
            sort_keys=True,
        )


def standardize_scores(sims: np.ndarray) -> np.ndarray:
    """Z-score a similarity vector; ranks are unchanged (monotone map)."""
    sd = sims.std()
    if sd == 0.0:
        return sims - sims.mean()
    return (sims - sims.mean()) / sd


def score_instance(
    provider: TableProvider,
    instance: EvalInstance,
    vocabulary: Vocabulary,
    candidate_matrix: np.ndarray | None = None,
    cutoff: int | None = None,
    temperature: float = 1.0,
    standardize: bool = False,
) -> PredictionResult:
    """Score one instance; ``candidate_matrix`` lets callers reuse the
    vocabulary-aligned provider matrix across many instances.

    ``standardize`` z-scores the similarity vector before the softmax;
    it never changes ranks and is off by default.
    """
    target_id = vocabulary.id_of(instance.target)
    if target_id is None:
        raise ValueError(f"instance target {instance.target!r} not in vocabulary")
    if candidate_matrix is None:
        candidate_matrix = provider.aligned_matrix(vocabulary)
    if cutoff is None:
        cutoff = top_percent_cutoff(len(vocabulary))
    remainder = provider.embed_phrase_set(instance.remainder, instance_id=instance.instance_id)
    sims = cosine_to_all(remainder.vector, candidate_matrix)
    if standardize:
        sims = standardize_scores(sims)
    rank = rank_with_tiebreak(sims, target_id)
    return PredictionResult(
        instance=instance,
        rank=rank,
        log_softmax=log_softmax_of(sims, target_id, temperature=temperature),
        in_top_1pct=rank <= cutoff,
        similarity_of_target=float(sims[target_id]),
    )


def _bucket_label(freq: int, edges) -> str:
    prev = 1
    for edge in edges:
        if freq < edge:
            return f"{prev}-{edge - 1}"
        prev = edge
    return f"{prev}+"


def evaluate(
    provider: TableProvider,
    instances: list[EvalInstance],
    vocabulary: Vocabulary,
    bucket_edges=DEFAULT_BUCKET_EDGES,
    fraction: float = 0.01,
    temperature: float = 1.0,
    standardize: bool = False,
) -> tuple[EvalReport, list[PredictionResult]]:
    """Aggregate metrics over one split's instances.

    Returns the report plus the per-instance results for error analysis.
    The per-frequency buckets are keyed by the target's training document
    frequency.
    """
    if not instances:
        raise ValueError("no instances to evaluate")
    splits = {inst.split for inst in instances}
    if len(splits) > 1:
        raise ValueError(f"instances mix splits: {sorted(splits)}")
    matrix = provider.aligned_matrix(vocabulary)
    cutoff = top_percent_cutoff(len(vocabulary), fraction)

    results = [
        score_instance(
            provider, inst, vocabulary,
            candidate_matrix=matrix, cutoff=cutoff, temperature=temperature,
            standardize=standardize,
        )
        for inst in instances
    ]

    ranks = np.array([r.rank for r in results], dtype=float)
    logs = np.array([r.log_softmax for r in results])
    tops = np.array([r.in_top_1pct for r in results], dtype=float)

    buckets: dict[str, dict] = {}
    for r in results:
        label = _bucket_label(vocabulary.freq_of(r.instance.target), bucket_edges)
        b = buckets.setdefault(label, {"n": 0, "rank_sum": 0.0, "log_sum": 0.0, "top_sum": 0.0})
        b["n"] += 1
        b["rank_sum"] += r.rank
        b["log_sum"] += r.log_softmax
        b["top_sum"] += float(r.in_top_1pct)
    bucket_stats = {
        label: {
            "n_instances": b["n"],
            "avg_rank": b["rank_sum"] / b["n"],
            "mean_log_softmax": b["log_sum"] / b["n"],
            "top1pct_accuracy": b["top_sum"] / b["n"],
        }
        for label, b in sorted(buckets.items())
    }

    report = EvalReport(
        split=instances[0].split,
        n_instances=len(instances),
        avg_rank=float(ranks.mean()),
        mean_log_softmax=float(logs.mean()),
        top1pct_accuracy=float(tops.mean()),
        buckets=bucket_stats,
    )
    return report, results


def write_per_instance_tsv(path, results: list[PredictionResult]):
    """Per-instance dump for error analysis."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("instance_id\ttarget\trank\tlog_softmax\tin_top_1pct\tsimilarity\n")
        for r in results:
            fh.write(
                f"{r.instance.instance_id}\t{r.instance.target}\t{r.rank}\t"
                f"{r.log_softmax:.6f}\t{int(r.in_top_1pct)}\t{r.similarity_of_target:.6f}\n"
            )
