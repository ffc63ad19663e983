"""Command-line entry point: one subcommand per stage plus an orchestrator.

Subcommands: extract, synth, corpus build, train, finetune-data,
neighbors, eval predict, eval dimension, run, validate.

The ``run`` command executes stages listed in a flat key=value config
file in dependency order. Every stage writes a ``<stage>.meta.json``
manifest recording the config hash and the content hashes of its inputs
and outputs, so identical configs and inputs reproduce identical
artifacts byte for byte (no timestamps are ever embedded).

Relative paths are resolved against --base-dir, or the PERSONAE_DATA
environment variable when set, or the working directory.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import eval_dimension as dim_mod
from . import eval_predict as pred_mod
from . import extraction, finetune_data, sgns, store
from .errors import NoCopulaFound, PersonaeError

STAGE_ORDER = ("synth", "extract", "corpus", "train", "finetune-data", "eval-predict", "eval-dimension")

ENV_DATA_DIR = "PERSONAE_DATA"


class StageError(PersonaeError):
    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


def file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def _write_meta(outdir: Path, stage: str, cfg_hash: str, inputs: dict, outputs: list[Path]):
    meta = {
        "stage": stage,
        "config_hash": cfg_hash,
        "inputs": {name: file_hash(p) for name, p in sorted(inputs.items())},
        "outputs": {p.name: file_hash(p) for p in sorted(outputs)},
    }
    with open(outdir / f"{stage}.meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Run-config files: flat "key = value" lines, '#' starts a comment.

def parse_run_config(path) -> dict:
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise ValueError(f"{path}:{ln}: expected 'key = value'")
            cfg[key.strip()] = value.strip()
    return cfg


def _resolve(base: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def _embedding_file_dim(path) -> int | None:
    try:
        with open(path, "rb") as fh:
            head = fh.read(64)
        if head.startswith(b"PEMB"):
            import struct

            with open(path, "rb") as fh:
                fh.read(5)
                _, dim = struct.unpack("<qq", fh.read(16))
            return int(dim)
        return int(head.split(b"\n", 1)[0].split()[1])
    except Exception:
        return None


def validate_config(cfg: dict, base_dir=None) -> list[str]:
    """All detectable problems, without side effects."""
    base = Path(base_dir or os.environ.get(ENV_DATA_DIR, "."))
    problems = []
    stages = [s.strip() for s in cfg.get("stages", "").split(",") if s.strip()]
    if not stages:
        problems.append("no stages listed (key 'stages')")
    for s in stages:
        if s not in STAGE_ORDER:
            problems.append(f"unknown stage {s!r}")
    if "synth" in stages and "extract" in stages:
        problems.append("choose either synth or extract as the source stage, not both")
    if "outdir" not in cfg:
        problems.append("missing key 'outdir'")

    def check_float(key, lo, hi, strict=True):
        if key in cfg:
            try:
                v = float(cfg[key])
            except ValueError:
                problems.append(f"{key} is not a number: {cfg[key]!r}")
                return
            inside = lo < v < hi if strict else lo <= v <= hi
            if not inside:
                problems.append(f"{key}={v} outside ({lo}, {hi})")

    def check_int(key, minimum):
        if key in cfg:
            try:
                v = int(cfg[key])
            except ValueError:
                problems.append(f"{key} is not an integer: {cfg[key]!r}")
                return
            if v < minimum:
                problems.append(f"{key}={v} below minimum {minimum}")

    check_float("corpus.test_fraction", 0.0, 1.0)
    check_float("synth.noise_rate", 0.0, 1.0, strict=False)
    check_int("corpus.min_freq", 1)
    check_int("train.dim", 2)
    check_int("train.epochs", 1)
    check_int("train.window", 1)
    if cfg.get("train.mode", "skipgram") not in sgns.MODES:
        problems.append(f"train.mode must be one of {sgns.MODES}")

    if "extract" in stages:
        src = cfg.get("extract.source", "twitter")
        if src not in ("twitter", "wikipedia"):
            problems.append(f"extract.source must be twitter or wikipedia, got {src!r}")
        path = cfg.get("extract.in")
        if path is None:
            problems.append("extract stage needs extract.in")
        elif not _resolve(base, path).exists():
            problems.append(f"extract.in does not exist: {path}")
    if "eval-dimension" in stages:
        path = cfg.get("eval-dimension.survey")
        if path is None:
            problems.append("eval-dimension stage needs eval-dimension.survey")
        elif not _resolve(base, path).exists():
            problems.append(f"eval-dimension.survey does not exist: {path}")

    emb = cfg.get("eval-predict.embeddings")
    inst = cfg.get("eval-predict.instance_embeddings")
    if emb and inst:
        d1 = _embedding_file_dim(_resolve(base, emb))
        d2 = _embedding_file_dim(_resolve(base, inst))
        if d1 is not None and d2 is not None and d1 != d2:
            problems.append(f"embedding dim {d1} != instance embedding dim {d2}")
    return problems


# ---------------------------------------------------------------------------
# Stage bodies shared by the subcommands and the pipeline.

def stage_synth(spec: extraction.SyntheticSpec, out_path: Path):
    bios = extraction.generate_synthetic(spec)
    extraction.write_bios(out_path, bios)
    return bios


def stage_extract(in_path: Path, source: str, out_path: Path, max_tokens: int) -> dict:
    raws = extraction.read_raw_bios(in_path)
    bios, skipped = [], 0
    extractor = extraction.extract_twitter if source == "twitter" else extraction.extract_wikipedia
    for raw in raws:
        try:
            bios.append(extractor(raw, max_tokens=max_tokens))
        except NoCopulaFound:
            skipped += 1
    extraction.write_bios(out_path, bios)
    return {"records": len(raws), "extracted": len(bios), "skipped_no_copula": skipped}


def stage_corpus(
    bios_path: Path, outdir: Path, min_freq: int, test_fraction: float, seed: int,
    instances_per_bio: int = 1,
) -> corpus_mod.SplitCorpus:
    bios = extraction.read_bios(bios_path)
    split = corpus_mod.split_corpus(
        bios, test_fraction=test_fraction, vocabulary_threshold=min_freq,
        seed=seed, instances_per_bio=instances_per_bio,
    )
    outdir.mkdir(parents=True, exist_ok=True)
    extraction.write_bios(outdir / "train.tsv", split.train)
    split.vocabulary.to_tsv(outdir / "vocabulary.tsv")
    corpus_mod.write_instances(outdir / "instances_main.tsv", split.test_main)
    corpus_mod.write_instances(outdir / "instances_general.tsv", split.test_general)
    with open(outdir / "stats.json", "w", encoding="utf-8") as fh:
        json.dump(split.stats, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return split


def load_corpus_dir(corpus_dir: Path):
    train = extraction.read_bios(corpus_dir / "train.tsv")
    vocabulary = corpus_mod.Vocabulary.from_tsv(corpus_dir / "vocabulary.tsv")
    return train, vocabulary


def stage_train(corpus_dir: Path, config: sgns.TrainConfig, out_path: Path, binary: bool = False):
    train_bios, vocabulary = load_corpus_dir(corpus_dir)
    table = sgns.train(train_bios, vocabulary, config)
    store.save_table(table, str(out_path), binary=binary)
    return table


def stage_finetune_data(corpus_dir: Path, seed: int, outdir: Path) -> dict:
    train_bios, vocabulary = load_corpus_dir(corpus_dir)
    index = corpus_mod.build_cooccurrence(train_bios, vocabulary)
    return finetune_data.export_datasets(train_bios, index, vocabulary, seed, outdir)


def _load_provider(embeddings: Path, instance_embeddings: Path | None, binary: bool, denominator: str):
    if instance_embeddings is not None:
        return store.load_instance_provider(
            embeddings, instance_embeddings, binary=binary, denominator=denominator
        )
    return store.load_vocab_provider(embeddings, binary=binary, denominator=denominator)


def stage_eval_predict(
    embeddings: Path, instances_path: Path, vocab_path: Path, out_path: Path,
    instance_embeddings: Path | None = None, per_instance: Path | None = None,
    binary: bool = False, denominator: str = "all", temperature: float = 1.0,
    standardize: bool = False,
) -> pred_mod.EvalReport:
    provider = _load_provider(embeddings, instance_embeddings, binary, denominator)
    vocabulary = corpus_mod.Vocabulary.from_tsv(vocab_path)
    instances = corpus_mod.read_instances(instances_path)
    if not instances:
        raise PersonaeError(f"no instances in {instances_path}")
    report, results = pred_mod.evaluate(
        provider, instances, vocabulary, temperature=temperature, standardize=standardize
    )
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    if per_instance is not None:
        pred_mod.write_per_instance_tsv(per_instance, results)
    return report


def stage_eval_dimension(
    embeddings: Path, survey_path: Path, dims_path: Path | None, out_path: Path,
    binary: bool = False, exclusion: str = "max", projection: str = "cosine",
    bootstrap: int = 0, seed: int = 0,
) -> dict:
    provider = store.load_vocab_provider(embeddings, binary=binary)
    survey = dim_mod.load_survey_tsv(survey_path)
    specs = (
        dim_mod.load_dimension_specs(dims_path)
        if dims_path is not None
        else dim_mod.default_dimension_specs()
    )
    use_cosine = projection == "cosine"
    out = {"dimensions": {}, "settings": {"exclusion": exclusion, "projection": projection}}
    race_reports = []
    for spec in specs:
        if not any(r.dimension == spec.name for r in survey):
            continue
        report = dim_mod.ranking_agreement(
            provider, spec, survey, exclusion=exclusion, use_cosine=use_cosine
        )
        entry = {
            "score": report.score,
            "n_identities_scored": report.n_identities_scored,
            "per_identity": report.per_identity,
        }
        if bootstrap > 0:
            lo, hi = dim_mod.bootstrap_ci(report, n_resamples=bootstrap, seed=seed)
            entry["ci95"] = [lo, hi]
        out["dimensions"][spec.name] = entry
        if spec.name.startswith("race:"):
            race_reports.append(report)
    if race_reports:
        out["race_aggregate"] = dim_mod.race_aggregate(race_reports)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


# ---------------------------------------------------------------------------
# Pipeline orchestration.

def run_pipeline(cfg: dict, base_dir=None) -> dict:
    """Execute the configured stages in dependency order.

    Every artifact lands under the configured outdir; each stage's meta
    file records the config hash and input/output content hashes.
    """
    problems = validate_config(cfg, base_dir=base_dir)
    if problems:
        raise PersonaeError("invalid config: " + "; ".join(problems))
    base = Path(base_dir or os.environ.get(ENV_DATA_DIR, "."))
    outdir = _resolve(base, cfg["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    stages = [s.strip() for s in cfg["stages"].split(",") if s.strip()]
    ordered = [s for s in STAGE_ORDER if s in stages]
    cfg_hash = config_hash(cfg)
    seed = int(cfg.get("seed", 0))
    artifacts: dict[str, Path] = {}

    def get(key, default=None):
        return cfg.get(key, default)

    for stage in ordered:
        try:
            if stage == "synth":
                spec = extraction.SyntheticSpec(
                    n_communities=int(get("synth.n_communities", 10)),
                    identities_per_community=int(get("synth.identities_per_community", 50)),
                    n_bios=int(get("synth.n_bios", 10000)),
                    identities_per_bio=(
                        int(get("synth.min_identities", 3)),
                        int(get("synth.max_identities", 6)),
                    ),
                    noise_rate=float(get("synth.noise_rate", 0.1)),
                    seed=int(get("synth.seed", seed)),
                    popularity_exponent=float(get("synth.popularity_exponent", 1.5)),
                )
                out = outdir / "bios.tsv"
                stage_synth(spec, out)
                artifacts["bios"] = out
                _write_meta(outdir, stage, cfg_hash, {}, [out])
            elif stage == "extract":
                src = _resolve(base, cfg["extract.in"])
                out = outdir / "bios.tsv"
                stage_extract(src, get("extract.source", "twitter"), out,
                              int(get("extract.max_tokens", extraction.DEFAULT_MAX_TOKENS)))
                artifacts["bios"] = out
                _write_meta(outdir, stage, cfg_hash, {"in": src}, [out])
            elif stage == "corpus":
                bios_path = artifacts.get("bios") or _resolve(base, cfg["corpus.in"])
                cdir = outdir / "corpus"
                stage_corpus(
                    bios_path, cdir,
                    min_freq=int(get("corpus.min_freq", 3)),
                    test_fraction=float(get("corpus.test_fraction", 0.2)),
                    seed=int(get("corpus.seed", seed)),
                    instances_per_bio=int(get("corpus.instances_per_bio", 1)),
                )
                artifacts["corpus"] = cdir
                _write_meta(
                    outdir, stage, cfg_hash, {"bios": bios_path},
                    sorted(cdir.glob("*.tsv")) + [cdir / "stats.json"],
                )
            elif stage == "train":
                cdir = artifacts.get("corpus") or _resolve(base, cfg["train.corpus"])
                config = sgns.TrainConfig(
                    dim=int(get("train.dim", 768)),
                    epochs=int(get("train.epochs", 300)),
                    window=int(get("train.window", 8)),
                    mode=get("train.mode", "skipgram"),
                    negatives_per_positive=int(get("train.negatives", 5)),
                    learning_rate=float(get("train.learning_rate", 0.025)),
                    subsample_threshold=float(get("train.subsample_threshold", 0.0)),
                    seed=int(get("train.seed", seed)),
                    deterministic=get("train.deterministic", "true").lower() != "false",
                    batch_size=int(get("train.batch_size", 1024)),
                    workers=int(get("train.workers", 1)),
                )
                out = outdir / "embeddings.txt"
                stage_train(cdir, config, out)
                artifacts["embeddings"] = out
                _write_meta(
                    outdir, stage, cfg_hash,
                    {"train": cdir / "train.tsv", "vocabulary": cdir / "vocabulary.tsv"},
                    [out, Path(str(out) + ".ctx")],
                )
            elif stage == "finetune-data":
                cdir = artifacts.get("corpus") or _resolve(base, cfg["finetune-data.corpus"])
                fdir = outdir / "finetune"
                stage_finetune_data(cdir, int(get("finetune-data.seed", seed)), fdir)
                artifacts["finetune"] = fdir
                _write_meta(
                    outdir, stage, cfg_hash,
                    {"train": cdir / "train.tsv", "vocabulary": cdir / "vocabulary.tsv"},
                    sorted(fdir.glob("*.tsv")) + [fdir / "manifest.json"],
                )
            elif stage == "eval-predict":
                cdir = artifacts.get("corpus") or _resolve(base, cfg["eval-predict.corpus"])
                emb = artifacts.get("embeddings") or _resolve(base, cfg["eval-predict.embeddings"])
                inst_emb = get("eval-predict.instance_embeddings")
                inst_emb = _resolve(base, inst_emb) if inst_emb else None
                outputs = []
                for split in ("main", "general"):
                    instances_path = cdir / f"instances_{split}.tsv"
                    if instances_path.stat().st_size == 0:
                        continue
                    out = outdir / f"predict_{split}.json"
                    stage_eval_predict(
                        emb, instances_path, cdir / "vocabulary.tsv", out,
                        instance_embeddings=inst_emb,
                        denominator=get("eval-predict.denominator", "all"),
                    )
                    outputs.append(out)
                inputs = {"embeddings": emb, "vocabulary": cdir / "vocabulary.tsv"}
                if inst_emb:
                    inputs["instance_embeddings"] = inst_emb
                _write_meta(outdir, stage, cfg_hash, inputs, outputs)
            elif stage == "eval-dimension":
                emb = artifacts.get("embeddings") or _resolve(base, cfg["eval-dimension.embeddings"])
                survey = _resolve(base, cfg["eval-dimension.survey"])
                dims = get("eval-dimension.dims")
                dims = _resolve(base, dims) if dims else None
                out = outdir / "dimension.json"
                stage_eval_dimension(
                    emb, survey, dims, out,
                    exclusion=get("eval-dimension.exclusion", "max"),
                    projection=get("eval-dimension.projection", "cosine"),
                    bootstrap=int(get("eval-dimension.bootstrap", 0)),
                    seed=seed,
                )
                inputs = {"embeddings": emb, "survey": survey}
                if dims:
                    inputs["dims"] = dims
                _write_meta(outdir, stage, cfg_hash, inputs, [out])
        except PersonaeError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc
    return artifacts


# ---------------------------------------------------------------------------
# Argument parsing.

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="personae", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    ext = sub.add_parser("extract", help="extract identities from raw bios")
    ext.add_argument("--source", choices=("twitter", "wikipedia"), required=True)
    ext.add_argument("--in", dest="in_path", required=True)
    ext.add_argument("--out", required=True)
    ext.add_argument("--max-tokens", type=int, default=extraction.DEFAULT_MAX_TOKENS)

    syn = sub.add_parser("synth", help="generate a planted-community corpus")
    syn.add_argument("--spec", required=True, help="JSON file of SyntheticSpec fields")
    syn.add_argument("--out", required=True)

    cor = sub.add_parser("corpus", help="corpus construction")
    cor_sub = cor.add_subparsers(dest="corpus_command", required=True)
    build = cor_sub.add_parser("build", help="vocabulary, splits, instances")
    build.add_argument("--in", dest="in_path", required=True)
    build.add_argument("--min-freq", type=int, default=3)
    build.add_argument("--test-frac", type=float, default=0.2)
    build.add_argument("--seed", type=int, default=0)
    build.add_argument("--instances-per-bio", type=int, default=1)
    build.add_argument("--outdir", required=True)

    tr = sub.add_parser("train", help="train identity embeddings")
    tr.add_argument("--corpus", required=True)
    tr.add_argument("--dim", type=int, default=768)
    tr.add_argument("--epochs", type=int, default=300)
    tr.add_argument("--window", type=int, default=8)
    tr.add_argument("--mode", choices=sgns.MODES, default="skipgram")
    tr.add_argument("--negatives", type=int, default=5)
    tr.add_argument("--lr", type=float, default=0.025)
    tr.add_argument("--batch-size", type=int, default=1024)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--workers", type=int, default=1)
    tr.add_argument("--fast", action="store_true", help="non-deterministic parallel updates")
    tr.add_argument("--binary", action="store_true")
    tr.add_argument("--out", required=True)

    ft = sub.add_parser("finetune-data", help="export triplet/pair/masked datasets")
    ft.add_argument("--corpus", required=True)
    ft.add_argument("--seed", type=int, default=0)
    ft.add_argument("--outdir", required=True)

    nb = sub.add_parser("neighbors", help="nearest neighbors of a phrase")
    nb.add_argument("--embeddings", required=True)
    nb.add_argument("--phrase", required=True)
    nb.add_argument("--k", type=int, default=10)
    nb.add_argument("--binary", action="store_true")

    ev = sub.add_parser("eval", help="evaluation tasks")
    ev_sub = ev.add_subparsers(dest="eval_command", required=True)

    evp = ev_sub.add_parser("predict", help="held-out identity ranking")
    evp.add_argument("--embeddings", required=True)
    evp.add_argument("--instance-embeddings")
    evp.add_argument("--instances", required=True)
    evp.add_argument("--vocab", required=True)
    evp.add_argument("--out", required=True)
    evp.add_argument("--per-instance")
    evp.add_argument("--denominator", choices=("all", "known"), default="all")
    evp.add_argument("--temperature", type=float, default=1.0)
    evp.add_argument("--standardize", action="store_true",
                     help="z-score similarities before the softmax (ranks unchanged)")
    evp.add_argument("--binary", action="store_true")

    evd = ev_sub.add_parser("dimension", help="dimension projection agreement")
    evd.add_argument("--embeddings", required=True)
    evd.add_argument("--survey", required=True)
    evd.add_argument("--dims", help="dimension spec JSON (default list used when omitted)")
    evd.add_argument("--out", required=True)
    evd.add_argument("--exclusion", choices=dim_mod.EXCLUSION_MODES, default="max")
    evd.add_argument("--projection", choices=("cosine", "dot"), default="cosine")
    evd.add_argument("--bootstrap", type=int, default=0)
    evd.add_argument("--seed", type=int, default=0)
    evd.add_argument("--binary", action="store_true")

    run = sub.add_parser("run", help="run configured stages in order")
    run.add_argument("--config", required=True)
    run.add_argument("--base-dir")

    val = sub.add_parser("validate", help="check a run config without side effects")
    val.add_argument("--config", required=True)
    val.add_argument("--base-dir")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    base = Path(os.environ.get(ENV_DATA_DIR, "."))
    try:
        if args.command == "extract":
            stats = stage_extract(
                _resolve(base, args.in_path), args.source, _resolve(base, args.out), args.max_tokens
            )
            print(json.dumps(stats))
        elif args.command == "synth":
            with open(_resolve(base, args.spec), encoding="utf-8") as fh:
                raw = json.load(fh)
            spec = extraction.SyntheticSpec(
                n_communities=raw["n_communities"],
                identities_per_community=raw["identities_per_community"],
                n_bios=raw["n_bios"],
                identities_per_bio=tuple(raw["identities_per_bio"]),
                noise_rate=raw["noise_rate"],
                seed=raw["seed"],
                popularity_exponent=raw.get("popularity_exponent", 1.5),
            )
            bios = stage_synth(spec, _resolve(base, args.out))
            print(f"wrote {len(bios)} bios")
        elif args.command == "corpus":
            split = stage_corpus(
                _resolve(base, args.in_path), _resolve(base, args.outdir),
                min_freq=args.min_freq, test_fraction=args.test_frac,
                seed=args.seed, instances_per_bio=args.instances_per_bio,
            )
            print(json.dumps(split.stats, sort_keys=True))
        elif args.command == "train":
            config = sgns.TrainConfig(
                dim=args.dim, epochs=args.epochs, window=args.window, mode=args.mode,
                negatives_per_positive=args.negatives, learning_rate=args.lr,
                seed=args.seed, deterministic=not args.fast,
                batch_size=args.batch_size, workers=args.workers,
            )
            table = stage_train(_resolve(base, args.corpus), config, _resolve(base, args.out),
                                binary=args.binary)
            losses = table.metadata["epoch_loss"]
            print(f"trained {len(table.vocabulary)} x {table.dim}; "
                  f"first epoch loss {losses[0]:.4f}, last {losses[-1]:.4f}")
        elif args.command == "finetune-data":
            manifest = stage_finetune_data(
                _resolve(base, args.corpus), args.seed, _resolve(base, args.outdir)
            )
            print(json.dumps(manifest["counts"], sort_keys=True))
        elif args.command == "neighbors":
            provider = store.load_vocab_provider(_resolve(base, args.embeddings), binary=args.binary)
            for phrase, sim in store.nearest_neighbors(provider, args.phrase, args.k):
                print(f"{sim:+.4f}\t{phrase}")
        elif args.command == "eval" and args.eval_command == "predict":
            report = stage_eval_predict(
                _resolve(base, args.embeddings), _resolve(base, args.instances),
                _resolve(base, args.vocab), _resolve(base, args.out),
                instance_embeddings=_resolve(base, args.instance_embeddings)
                if args.instance_embeddings else None,
                per_instance=_resolve(base, args.per_instance) if args.per_instance else None,
                binary=args.binary, denominator=args.denominator,
                temperature=args.temperature, standardize=args.standardize,
            )
            print(f"{report.split}: n={report.n_instances} avg_rank={report.avg_rank:.2f} "
                  f"log_softmax={report.mean_log_softmax:.4f} top1pct={report.top1pct_accuracy:.4f}")
        elif args.command == "eval" and args.eval_command == "dimension":
            out = stage_eval_dimension(
                _resolve(base, args.embeddings), _resolve(base, args.survey),
                _resolve(base, args.dims) if args.dims else None, _resolve(base, args.out),
                binary=args.binary, exclusion=args.exclusion, projection=args.projection,
                bootstrap=args.bootstrap, seed=args.seed,
            )
            for name, entry in sorted(out["dimensions"].items()):
                print(f"{name}\t{entry['score']:.4f}\t(n={entry['n_identities_scored']})")
            if "race_aggregate" in out:
                print(f"race_aggregate\t{out['race_aggregate']:.4f}")
        elif args.command == "run":
            cfg = parse_run_config(_resolve(base, args.config))
            run_pipeline(cfg, base_dir=args.base_dir)
            print("pipeline complete")
        elif args.command == "validate":
            cfg = parse_run_config(_resolve(base, args.config))
            problems = validate_config(cfg, base_dir=args.base_dir)
            for prob in problems:
                print(prob)
            return 1 if problems else 0
    except PersonaeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
