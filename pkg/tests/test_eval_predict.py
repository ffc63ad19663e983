import math

import numpy as np
import pytest

from personae.corpus import EvalInstance, build_vocabulary
from personae.eval_predict import (
    evaluate,
    log_softmax_of,
    rank_with_tiebreak,
    score_instance,
    top_percent_cutoff,
)
from personae.extraction import Bio
from personae.store import TableProvider, random_provider


def small_vocab(n=4):
    phrases = [f"p{i} z" for i in range(n)]
    bios = [Bio(f"b{i}", [phrases[i], phrases[(i + 1) % n]], "synthetic") for i in range(n)]
    return build_vocabulary(bios, 1)


class TestCutoff:
    @pytest.mark.parametrize(
        "size,fraction,expected",
        [(100, 0.01, 1), (22_516, 0.01, 226), (50, 0.02, 1), (500, 0.01, 5), (1, 0.01, 1)],
    )
    def test_values(self, size, fraction, expected):
        assert top_percent_cutoff(size, fraction) == expected

    def test_fraction_bounds(self):
        with pytest.raises(ValueError):
            top_percent_cutoff(100, 0.0)
        with pytest.raises(ValueError):
            top_percent_cutoff(100, 1.0)


class TestRank:
    def test_strictly_greatest_is_rank_one(self):
        sims = np.array([0.1, 0.9, 0.3])
        assert rank_with_tiebreak(sims, 1) == 1

    def test_tiebreak_by_id(self):
        sims = np.array([0.5, 0.5, 0.5])
        assert rank_with_tiebreak(sims, 0) == 1
        assert rank_with_tiebreak(sims, 1) == 2
        assert rank_with_tiebreak(sims, 2) == 3

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            sims = rng.standard_normal(30)
            target = int(rng.integers(30))
            base = rank_with_tiebreak(sims, target)
            transformed = rank_with_tiebreak(3.0 * sims + 11.0, target)
            exped = rank_with_tiebreak(np.exp(sims), target)
            assert base == transformed == exped


class TestLogSoftmax:
    def test_uniform_four(self):
        sims = np.zeros(4)
        assert log_softmax_of(sims, 2) == pytest.approx(math.log(0.25), abs=1e-12)

    def test_shift_invariance(self):
        rng = np.random.default_rng(1)
        sims = rng.standard_normal(100)
        base = log_softmax_of(sims, 7)
        assert abs(log_softmax_of(sims + 1000.0, 7) - base) < 1e-9
        assert abs(log_softmax_of(sims - 1000.0, 7) - base) < 1e-9

    def test_overflow_safe(self):
        sims = np.array([1e4, -1e4, 0.0])
        out = log_softmax_of(sims, 0)
        assert np.isfinite(out) and out <= 0.0


class TestScoreInstance:
    def test_perfect_target(self):
        vocab = small_vocab()
        # remainder mean points exactly at the target's vector
        matrix = np.array([
            [1.0, 0.0, 0.0],   # p0: remainder member
            [0.0, 1.0, 0.0],   # p1: remainder member
            [1.0, 1.0, 0.0],   # p2: target, parallel to the mean
            [0.0, 0.0, 1.0],   # p3: orthogonal distractor
        ])
        provider = TableProvider(vocab.phrases, matrix)
        inst = EvalInstance("b0", [vocab.phrases[0], vocab.phrases[1]], vocab.phrases[2], "main")
        res = score_instance(provider, inst, vocab)
        assert res.rank == 1
        assert res.in_top_1pct
        assert res.similarity_of_target == pytest.approx(1.0)

    def test_zero_remainder_uniform_softmax(self):
        vocab = small_vocab(4)
        provider = TableProvider(vocab.phrases, np.eye(4))
        inst = EvalInstance("b0", ["totally unknown"], vocab.phrases[2], "general")
        res = score_instance(provider, inst, vocab)
        assert res.log_softmax == pytest.approx(math.log(0.25), abs=1e-9)
        assert res.similarity_of_target == 0.0

    def test_unknown_target_rejected(self):
        vocab = small_vocab()
        provider = TableProvider(vocab.phrases, np.eye(4))
        inst = EvalInstance("b0", ["x"], "not in vocab", "main")
        with pytest.raises(ValueError):
            score_instance(provider, inst, vocab)


class TestEvaluate:
    def test_single_instance_aggregates(self):
        vocab = small_vocab()
        provider = TableProvider(vocab.phrases, np.eye(4))
        inst = EvalInstance("b0", [vocab.phrases[0]], vocab.phrases[0], "main")
        report, results = evaluate(provider, [inst], vocab)
        assert report.n_instances == 1
        assert report.avg_rank == results[0].rank
        assert report.mean_log_softmax == pytest.approx(results[0].log_softmax)
        assert report.top1pct_accuracy == float(results[0].in_top_1pct)

    def test_perfect_provider(self):
        vocab = small_vocab(8)
        provider = TableProvider(vocab.phrases, np.eye(8))
        instances = [
            EvalInstance(f"b{i}", [vocab.phrases[i]], vocab.phrases[i], "main")
            for i in range(8)
        ]
        report, _ = evaluate(provider, instances, vocab)
        assert report.avg_rank == 1.0
        assert report.top1pct_accuracy == 1.0

    def test_mixed_splits_rejected(self):
        vocab = small_vocab()
        provider = TableProvider(vocab.phrases, np.eye(4))
        insts = [
            EvalInstance("b0", [vocab.phrases[0]], vocab.phrases[1], "main"),
            EvalInstance("b1", [vocab.phrases[0]], vocab.phrases[1], "general"),
        ]
        with pytest.raises(ValueError):
            evaluate(provider, insts, vocab)

    def test_order_independence(self):
        rng = np.random.default_rng(3)
        vocab = small_vocab(10)
        provider = random_provider(vocab, 8, seed=1)
        instances = [
            EvalInstance(f"b{i}", [vocab.phrases[int(rng.integers(10))]],
                         vocab.phrases[int(rng.integers(10))], "main")
            for i in range(40)
        ]
        a, _ = evaluate(provider, instances, vocab)
        b, _ = evaluate(provider, list(reversed(instances)), vocab)
        assert a.avg_rank == pytest.approx(b.avg_rank)
        assert a.mean_log_softmax == pytest.approx(b.mean_log_softmax)
        assert a.top1pct_accuracy == pytest.approx(b.top1pct_accuracy)

    def test_random_provider_mean_rank(self):
        # Monte Carlo oracle via exchangeability: targets not contained in
        # the remainder rank uniformly, so the mean sits near (|V|+1)/2.
        phrases = [f"w{i} q" for i in range(60)]
        bios = [Bio(f"b{i}", [phrases[i], phrases[(i + 1) % 60]], "synthetic") for i in range(60)]
        vocab = build_vocabulary(bios, 1)
        provider = random_provider(vocab, 16, seed=9)
        rng = np.random.default_rng(4)
        instances = []
        for i in range(3000):
            t = int(rng.integers(60))
            r = int(rng.integers(60))
            if r == t:
                r = (r + 1) % 60
            instances.append(EvalInstance(f"b{i}", [phrases[r]], phrases[t], "main"))
        report, _ = evaluate(provider, instances, vocab)
        centre = (len(vocab) + 1) / 2
        assert abs(report.avg_rank - centre) / centre < 0.05

    def test_standardize_keeps_ranks(self):
        rng = np.random.default_rng(5)
        vocab = small_vocab(10)
        provider = random_provider(vocab, 8, seed=2)
        instances = [
            EvalInstance(f"b{i}", [vocab.phrases[(i + 1) % 10]], vocab.phrases[i], "main")
            for i in range(10)
        ]
        plain, _ = evaluate(provider, instances, vocab)
        z, _ = evaluate(provider, instances, vocab, standardize=True)
        assert z.avg_rank == plain.avg_rank
        assert z.top1pct_accuracy == plain.top1pct_accuracy
        assert z.mean_log_softmax != plain.mean_log_softmax

    def test_frequency_buckets(self):
        vocab = small_vocab(6)
        provider = TableProvider(vocab.phrases, np.eye(6))
        instances = [
            EvalInstance(f"b{i}", [vocab.phrases[(i + 1) % 6]], vocab.phrases[i], "main")
            for i in range(6)
        ]
        report, _ = evaluate(provider, instances, vocab, bucket_edges=(2, 10))
        assert sum(b["n_instances"] for b in report.buckets.values()) == 6
        for label in report.buckets:
            assert label in ("1-1", "2-9", "10+")
