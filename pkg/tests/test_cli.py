import json

import numpy as np
import pytest

from personae.cli import (
    main,
    parse_run_config,
    run_pipeline,
    validate_config,
)
from personae.errors import PersonaeError

SYNTH_SPEC = {
    "n_communities": 3,
    "identities_per_community": 10,
    "n_bios": 500,
    "identities_per_bio": [2, 4],
    "noise_rate": 0.1,
    "seed": 5,
}


def run_config_text(outdir):
    return f"""
# smoke pipeline
stages = synth, corpus, train, finetune-data, eval-predict
outdir = {outdir}
seed = 5

synth.n_communities = 3
synth.identities_per_community = 10
synth.n_bios = 500
synth.min_identities = 2
synth.max_identities = 4
synth.noise_rate = 0.1

corpus.min_freq = 2
corpus.test_fraction = 0.2

train.dim = 16
train.epochs = 3
train.window = 8
train.batch_size = 256
"""


class TestSubcommands:
    def test_extract_roundtrip(self, tmp_path, capsys):
        raw = tmp_path / "raw.tsv"
        raw.write_text("u1\ttwitter\twife, runner | she/her\n", encoding="utf-8")
        out = tmp_path / "bios.tsv"
        assert main(["extract", "--source", "twitter", "--in", str(raw), "--out", str(out)]) == 0
        assert json.loads(out.read_text().split("\t")[2]) == ["wife", "runner", "she/her"]

    def test_extract_wikipedia_skips_no_copula(self, tmp_path, capsys):
        raw = tmp_path / "raw.tsv"
        raw.write_text(
            "w1\twikipedia\tJo Li is a French painter.\n"
            "w2\twikipedia\tThe bridge collapsed in 1994.\n",
            encoding="utf-8",
        )
        out = tmp_path / "bios.tsv"
        assert main(["extract", "--source", "wikipedia", "--in", str(raw), "--out", str(out)]) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["skipped_no_copula"] == 1
        assert len(out.read_text().splitlines()) == 1

    def test_synth_corpus_train_eval_chain(self, tmp_path, capsys):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(SYNTH_SPEC), encoding="utf-8")
        bios = tmp_path / "bios.tsv"
        assert main(["synth", "--spec", str(spec_path), "--out", str(bios)]) == 0

        corpus_dir = tmp_path / "corpus"
        assert main([
            "corpus", "build", "--in", str(bios), "--min-freq", "2",
            "--test-frac", "0.2", "--seed", "3", "--outdir", str(corpus_dir),
        ]) == 0
        assert (corpus_dir / "vocabulary.tsv").exists()

        emb = tmp_path / "emb.txt"
        assert main([
            "train", "--corpus", str(corpus_dir), "--dim", "16", "--epochs", "3",
            "--window", "8", "--seed", "1", "--batch-size", "256", "--out", str(emb),
        ]) == 0
        assert emb.exists() and (tmp_path / "emb.txt.ctx").exists()

        report = tmp_path / "report.json"
        assert main([
            "eval", "predict", "--embeddings", str(emb),
            "--instances", str(corpus_dir / "instances_main.tsv"),
            "--vocab", str(corpus_dir / "vocabulary.tsv"), "--out", str(report),
        ]) == 0
        data = json.loads(report.read_text())
        assert data["split"] == "main" and data["n_instances"] > 0

        ft = tmp_path / "ft"
        assert main([
            "finetune-data", "--corpus", str(corpus_dir), "--seed", "2", "--outdir", str(ft),
        ]) == 0
        assert (ft / "triplets.tsv").exists()

        capsys.readouterr()
        assert main([
            "neighbors", "--embeddings", str(emb), "--phrase", "c00 id000", "--k", "3",
        ]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 3

    def test_eval_dimension_command(self, tmp_path, capsys):
        phrases = ["hi end", "lo end"] + [f"id{i} x" for i in range(4)]
        vecs = np.array(
            [[1, 0], [-1, 0], [0.9, 0.1], [0.4, 0.3], [-0.2, 0.5], [-0.7, 0.2]], dtype=float
        )
        from personae.store import write_embeddings_text

        emb = tmp_path / "emb.txt"
        write_embeddings_text(emb, phrases, vecs)
        survey = tmp_path / "survey.tsv"
        survey.write_text(
            "".join(
                f"id{i} x\taxis\t{m}\t0.1\t5\n" for i, m in enumerate((4.0, 3.0, 2.0, 1.0))
            ),
            encoding="utf-8",
        )
        dims = tmp_path / "dims.json"
        dims.write_text(
            json.dumps([{"name": "axis", "pairs": [["hi end", "lo end"]]}]), encoding="utf-8"
        )
        out = tmp_path / "dim_report.json"
        assert main([
            "eval", "dimension", "--embeddings", str(emb), "--survey", str(survey),
            "--dims", str(dims), "--out", str(out), "--bootstrap", "100",
        ]) == 0
        data = json.loads(out.read_text())
        assert data["dimensions"]["axis"]["score"] == 1.0
        assert len(data["dimensions"]["axis"]["ci95"]) == 2

    def test_missing_file_exits_nonzero(self, tmp_path, capsys):
        assert main([
            "extract", "--source", "twitter", "--in", str(tmp_path / "nope.tsv"),
            "--out", str(tmp_path / "out.tsv"),
        ]) == 1
        assert "error" in capsys.readouterr().err


class TestValidateConfig:
    def base(self, tmp_path):
        return parse_run_config(self.write(tmp_path))

    def write(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text(run_config_text(tmp_path / "out"), encoding="utf-8")
        return p

    def test_valid_config_no_problems(self, tmp_path):
        assert validate_config(self.base(tmp_path)) == []

    def test_bad_fraction(self, tmp_path):
        cfg = self.base(tmp_path)
        cfg["corpus.test_fraction"] = "1.2"
        assert any("test_fraction" in p for p in validate_config(cfg))

    def test_unknown_stage(self, tmp_path):
        cfg = self.base(tmp_path)
        cfg["stages"] = "synth, warp"
        assert any("warp" in p for p in validate_config(cfg))

    def test_missing_extract_input(self, tmp_path):
        cfg = self.base(tmp_path)
        cfg["stages"] = "extract, corpus"
        cfg["extract.in"] = str(tmp_path / "missing.tsv")
        assert any("does not exist" in p for p in validate_config(cfg))

    def test_dim_mismatch_between_embedding_files(self, tmp_path):
        from personae.store import write_embeddings_text, write_instance_embeddings

        emb = tmp_path / "emb.txt"
        write_embeddings_text(emb, ["a b"], np.ones((1, 4)))
        inst = tmp_path / "inst.txt"
        write_instance_embeddings(inst, ["i#0"], np.ones((1, 6)))
        cfg = self.base(tmp_path)
        cfg["eval-predict.embeddings"] = str(emb)
        cfg["eval-predict.instance_embeddings"] = str(inst)
        assert any("dim" in p for p in validate_config(cfg))

    def test_validate_subcommand_exit_codes(self, tmp_path, capsys):
        path = self.write(tmp_path)
        assert main(["validate", "--config", str(path)]) == 0
        bad = tmp_path / "bad.cfg"
        bad.write_text("stages = synth\n", encoding="utf-8")
        assert main(["validate", "--config", str(bad)]) == 1
        assert "outdir" in capsys.readouterr().out


class TestRunPipeline:
    def test_stage_gating(self, tmp_path):
        cfg = parse_run_config_text(tmp_path, "synth, corpus")
        run_pipeline(cfg)
        out = tmp_path / "out"
        assert (out / "bios.tsv").exists()
        assert (out / "corpus" / "vocabulary.tsv").exists()
        assert not (out / "embeddings.txt").exists()

    def test_deterministic_artifacts(self, tmp_path):
        # identical config re-run into the same outdir: every artifact byte repeats
        cfg = parse_run_config_text(tmp_path, "synth, corpus, train, finetune-data, eval-predict")
        out = tmp_path / "out"

        def snapshot():
            return {
                str(p.relative_to(out)): p.read_bytes()
                for p in out.rglob("*") if p.is_file()
            }

        run_pipeline(cfg)
        first = snapshot()
        run_pipeline(cfg)
        second = snapshot()
        assert first.keys() == second.keys()
        for rel in first:
            assert first[rel] == second[rel], rel

    def test_invalid_config_rejected(self, tmp_path):
        cfg = parse_run_config_text(tmp_path, "synth, corpus")
        cfg["corpus.test_fraction"] = "2.0"
        with pytest.raises(PersonaeError):
            run_pipeline(cfg)


def parse_run_config_text(tmp_path, stages):
    tmp_path.mkdir(parents=True, exist_ok=True)
    text = run_config_text(tmp_path / "out").replace(
        "stages = synth, corpus, train, finetune-data, eval-predict", f"stages = {stages}"
    )
    path = tmp_path / "run.cfg"
    path.write_text(text, encoding="utf-8")
    return parse_run_config(path)
