import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from personae.corpus import build_vocabulary
from personae.errors import DimMismatch, MissingInstanceEmbedding, UnknownPhrase
from personae.extraction import Bio, SyntheticSpec, community_of, generate_synthetic
from personae.sgns import TrainConfig, train
from personae.store import (
    InstanceProvider,
    TableProvider,
    nearest_neighbors,
    random_provider,
    read_embeddings_binary,
    read_embeddings_text,
    read_instance_embeddings,
    similarity,
    write_embeddings_binary,
    write_embeddings_text,
    write_instance_embeddings,
)


def provider_from(rows: dict[str, list[float]], **kw) -> TableProvider:
    phrases = list(rows)
    return TableProvider(phrases, np.array([rows[p] for p in phrases], dtype=float), **kw)


class TestSimilarity:
    def test_self_similarity(self):
        v = np.array([1.0, 2.0, -3.0])
        assert similarity(v, v) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert similarity([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)

    def test_zero_vector_rule(self):
        assert similarity([0.0, 0.0], [1.0, 2.0]) == 0.0

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            similarity([1.0, 0.0], [1.0, 0.0, 0.0])

    @settings(max_examples=200)
    @given(
        st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3),
        st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3),
    )
    def test_symmetric_and_bounded(self, u, v):
        s = similarity(u, v)
        assert s == pytest.approx(similarity(v, u))
        assert -1.0 - 1e-9 <= s <= 1.0 + 1e-9


class TestEmbedPhraseSet:
    def test_singleton_mean(self):
        p = provider_from({"a": [1.0, 2.0], "b": [3.0, 4.0]})
        out = p.embed_phrase_set(["a"])
        assert np.allclose(out.vector, [1.0, 2.0])
        assert out.n_known == 1 and not out.is_zero

    def test_unknown_counts_in_denominator(self):
        p = provider_from({"a": [2.0, 4.0]})
        out = p.embed_phrase_set(["a", "unknown"])
        assert np.allclose(out.vector, [1.0, 2.0])
        assert out.n_known == 1 and not out.is_zero

    def test_known_denominator_mode(self):
        p = provider_from({"a": [2.0, 4.0]}, denominator="known")
        out = p.embed_phrase_set(["a", "unknown"])
        assert np.allclose(out.vector, [2.0, 4.0])

    def test_all_unknown_is_zero(self):
        p = provider_from({"a": [1.0, 1.0]})
        out = p.embed_phrase_set(["x", "y"])
        assert np.allclose(out.vector, 0.0)
        assert out.is_zero and out.n_known == 0

    def test_empty_set_rejected(self):
        p = provider_from({"a": [1.0, 1.0]})
        with pytest.raises(ValueError):
            p.embed_phrase_set([])

    @settings(max_examples=100)
    @given(st.permutations(["a", "b", "c", "unknown"]))
    def test_permutation_invariant(self, order):
        p = provider_from({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [2.0, 2.0]})
        base = p.embed_phrase_set(["a", "b", "c", "unknown"]).vector
        assert np.allclose(p.embed_phrase_set(list(order)).vector, base)


class TestInstanceProvider:
    def make(self):
        return InstanceProvider(
            ["a", "b"], np.eye(2), ["bio1#0", "bio2#0"], np.array([[1.0, 1.0], [2.0, 0.0]])
        )

    def test_lookup_by_instance_id(self):
        p = self.make()
        out = p.embed_phrase_set(["anything", "else"], instance_id="bio2#0")
        assert np.allclose(out.vector, [2.0, 0.0])
        assert out.n_known == 2 and not out.is_zero

    def test_missing_instance_is_hard_error(self):
        p = self.make()
        with pytest.raises(MissingInstanceEmbedding):
            p.embed_phrase_set(["x"], instance_id="nope#0")
        with pytest.raises(MissingInstanceEmbedding):
            p.embed_phrase_set(["x"])

    def test_dim_mismatch_rejected(self):
        with pytest.raises(DimMismatch):
            InstanceProvider(["a"], np.eye(2)[:1], ["i#0"], np.ones((1, 3)))


class TestAlignedMatrix:
    def test_alignment_reorders(self):
        vocab = build_vocabulary(
            [Bio("b0", ["hot", "cold"], "synthetic"), Bio("b1", ["hot", "mild"], "synthetic")], 1
        )
        p = provider_from({"mild": [1.0, 0.0], "hot": [0.0, 1.0], "cold": [1.0, 1.0]})
        m = p.aligned_matrix(vocab)
        assert np.allclose(m[vocab.id_of("mild")], [1.0, 0.0])
        assert np.allclose(m[vocab.id_of("hot")], [0.0, 1.0])

    def test_missing_phrase_is_hard_error(self):
        vocab = build_vocabulary([Bio("b0", ["hot", "cold"], "synthetic")], 1)
        p = provider_from({"hot": [1.0, 0.0]})
        with pytest.raises(UnknownPhrase):
            p.aligned_matrix(vocab)


class TestNearestNeighbors:
    def test_completeness(self):
        rng = np.random.default_rng(0)
        rows = {f"p{i}": rng.standard_normal(4).tolist() for i in range(10)}
        p = provider_from(rows)
        out = nearest_neighbors(p, "p3", k=9)
        assert sorted(ph for ph, _ in out) == sorted(ph for ph in rows if ph != "p3")

    def test_identical_vector_ranks_first(self):
        p = provider_from({"q": [1.0, 2.0], "twin": [2.0, 4.0], "other": [-1.0, 5.0]})
        out = nearest_neighbors(p, "q", k=2)
        assert out[0][0] == "twin"
        assert out[0][1] == pytest.approx(1.0)

    def test_tie_break_by_id(self):
        p = provider_from({"q": [1.0, 0.0], "t1": [2.0, 0.0], "t2": [3.0, 0.0]})
        out = nearest_neighbors(p, "q", k=2)
        assert [ph for ph, _ in out] == ["t1", "t2"]

    def test_unknown_query(self):
        p = provider_from({"a": [1.0, 0.0], "b": [0.0, 1.0]})
        with pytest.raises(UnknownPhrase):
            nearest_neighbors(p, "zzz", k=1)

    def test_k_bounds(self):
        p = provider_from({"a": [1.0, 0.0], "b": [0.0, 1.0]})
        with pytest.raises(ValueError):
            nearest_neighbors(p, "a", k=2)

    def test_planted_neighbors_same_community(self):
        spec = SyntheticSpec(
            n_communities=4, identities_per_community=12, n_bios=4000,
            identities_per_bio=(3, 5), noise_rate=0.0, seed=17,
        )
        bios = generate_synthetic(spec)
        vocab = build_vocabulary(bios, 1)
        table = train(bios, vocab, TrainConfig(dim=24, epochs=25, seed=3, batch_size=512))
        provider = TableProvider.from_table(table)
        query = vocab.phrases[0]
        out = nearest_neighbors(provider, query, k=5)
        matches = sum(community_of(ph) == community_of(query) for ph, _ in out)
        assert matches >= 4


class TestFileFormats:
    def test_text_roundtrip(self, tmp_path):
        phrases = ["proud canadian", "wife", "she/her"]
        matrix = np.random.default_rng(1).standard_normal((3, 5))
        path = tmp_path / "emb.txt"
        write_embeddings_text(path, phrases, matrix)
        header = path.read_text().splitlines()[0]
        assert header == "3 5"
        back_phrases, back = read_embeddings_text(path)
        assert back_phrases == phrases
        assert np.abs(back - matrix).max() < 1e-6

    def test_text_underscore_convention(self, tmp_path):
        path = tmp_path / "emb.txt"
        write_embeddings_text(path, ["proud canadian"], np.ones((1, 2)))
        line = path.read_text().splitlines()[1]
        assert line.startswith("proud_canadian ")

    def test_binary_roundtrip_lossless_phrases(self, tmp_path):
        phrases = ["with_underscore", "proud canadian"]
        matrix = np.random.default_rng(2).standard_normal((2, 4)).astype(np.float32)
        path = tmp_path / "emb.bin"
        write_embeddings_binary(path, phrases, matrix)
        back_phrases, back = read_embeddings_binary(path)
        assert back_phrases == phrases
        assert np.allclose(back, matrix)

    def test_instance_roundtrip(self, tmp_path):
        ids = ["bio1#0", "bio1#1", "bio9#0"]
        matrix = np.random.default_rng(3).standard_normal((3, 6))
        path = tmp_path / "inst.txt"
        write_instance_embeddings(path, ids, matrix)
        back_ids, back = read_instance_embeddings(path)
        assert back_ids == ids
        assert np.abs(back - matrix).max() < 1e-6

    def test_instance_id_with_space_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_instance_embeddings(tmp_path / "x.txt", ["bad id"], np.ones((1, 2)))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            provider_from({"a": [np.nan, 1.0]})


def test_random_provider_unit_norm():
    vocab = build_vocabulary([Bio("b", ["a x", "b y"], "synthetic")], 1)
    p = random_provider(vocab, 16, seed=0)
    assert np.allclose(np.linalg.norm(p.matrix, axis=1), 1.0)
