"""Skip-gram / CBOW training with negative sampling, one bio per context.

Each bio's identity list is treated as a single sentence: every identity
within the window of another forms a training pair, so identities applied
to the same person share contexts. Input vectors are the embeddings used
downstream; output vectors are the negative-sampling context matrix.

The trainer processes shuffled minibatches of (center, context) pairs and
applies the summed gradient of each batch in one step. With
``deterministic=True`` everything runs single-threaded off one seeded
generator and the resulting table is bit-identical across runs. With
``deterministic=False`` and ``workers > 1``, worker threads apply
unsynchronized sparse updates to the shared matrices; torn updates are
tolerated by design.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, asdict, field

import numpy as np

from .corpus import Vocabulary
from .errors import NonFiniteLoss
from .extraction import Bio

MODES = ("skipgram", "cbow")


@dataclass
class TrainConfig:
    dim: int = 768
    epochs: int = 300
    window: int = 8
    mode: str = "skipgram"
    negatives_per_positive: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    subsample_threshold: float = 0.0
    seed: int = 0
    deterministic: bool = True
    batch_size: int = 1024
    workers: int = 1

    def validate(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.negatives_per_positive < 1:
            raise ValueError("negatives_per_positive must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.subsample_threshold < 0:
            raise ValueError("subsample_threshold must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def content_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(asdict(self), sort_keys=True).encode()
        ).hexdigest()[:16]


@dataclass
class EmbeddingTable:
    """Learned vectors over a vocabulary plus provenance metadata."""

    vocabulary: Vocabulary
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    def check(self):
        n = len(self.vocabulary)
        if self.input_vectors.shape != (n, self.dim) or self.output_vectors.shape != (n, self.dim):
            raise ValueError("vector matrices do not match the vocabulary size")
        if not (np.isfinite(self.input_vectors).all() and np.isfinite(self.output_vectors).all()):
            raise ValueError("non-finite entries in embedding table")


def sigmoid(x):
    # tanh form is stable at both tails
    return 0.5 * (np.tanh(0.5 * np.asarray(x, dtype=float)) + 1.0)


def log_sigmoid(x):
    return -np.logaddexp(0.0, -np.asarray(x, dtype=float))


def initialize_table(vocabulary: Vocabulary, dim: int, seed: int, dtype=np.float32) -> EmbeddingTable:
    """Input rows uniform in [-0.5/dim, 0.5/dim], output rows zero."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x1417]))
    bound = 0.5 / dim
    vin = rng.uniform(-bound, bound, size=(len(vocabulary), dim)).astype(dtype)
    vout = np.zeros((len(vocabulary), dim), dtype=dtype)
    return EmbeddingTable(vocabulary=vocabulary, input_vectors=vin, output_vectors=vout)


def loss_and_gradient(center_id: int, context_id: int, negative_ids, table: EmbeddingTable):
    """Loss and exact gradients of one skip-gram negative-sampling case.

    loss = -log s(u_ctx . v_ctr) - sum_neg log s(-u_neg . v_ctr)

    Returns (loss, grad_center, grad_context, grad_negatives) where
    grad_negatives has one row per entry of ``negative_ids`` (duplicate
    ids contribute additively to the same table row).
    """
    v = table.input_vectors[center_id]
    u = table.output_vectors[context_id]
    un = table.output_vectors[np.asarray(negative_ids, dtype=int)]
    pos = float(v @ u)
    neg = un @ v
    loss = -(log_sigmoid(pos) + log_sigmoid(-neg).sum())
    gpos = sigmoid(pos) - 1.0
    gneg = sigmoid(neg)
    grad_center = gpos * u + gneg @ un
    grad_context = gpos * v
    grad_negatives = gneg[:, None] * v[None, :]
    return float(loss), grad_center, grad_context, grad_negatives


def cbow_loss_and_gradient(context_ids, center_id: int, negative_ids, table: EmbeddingTable):
    """CBOW variant: the mean of the context input vectors predicts the center.

    Returns (loss, grad_contexts, grad_center_out, grad_negatives);
    grad_contexts has one row per context id (the 1/C factor of the mean
    is included).
    """
    ctx = np.asarray(context_ids, dtype=int)
    h = table.input_vectors[ctx].mean(axis=0)
    u = table.output_vectors[center_id]
    un = table.output_vectors[np.asarray(negative_ids, dtype=int)]
    pos = float(h @ u)
    neg = un @ h
    loss = -(log_sigmoid(pos) + log_sigmoid(-neg).sum())
    gpos = sigmoid(pos) - 1.0
    gneg = sigmoid(neg)
    gh = gpos * u + gneg @ un
    grad_contexts = np.repeat(gh[None, :] / len(ctx), len(ctx), axis=0)
    grad_center_out = gpos * h
    grad_negatives = gneg[:, None] * h[None, :]
    return float(loss), grad_contexts, grad_center_out, grad_negatives


def _scatter_add(target: np.ndarray, rows: np.ndarray, grads: np.ndarray):
    """target[rows] += grads with duplicate rows accumulated.

    Sort + reduceat keeps this pure numpy and much faster than np.add.at.
    """
    if len(rows) == 0:
        return
    order = np.argsort(rows, kind="stable")
    rows_s = rows[order]
    grads_s = grads[order]
    starts = np.concatenate(([0], np.flatnonzero(np.diff(rows_s)) + 1))
    target[rows_s[starts]] += np.add.reduceat(grads_s, starts, axis=0)


def _noise_cdf(freqs: np.ndarray, power: float = 0.75) -> np.ndarray:
    p = freqs.astype(np.float64) ** power
    p /= p.sum()
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return cdf


def _draw_negatives(rng, cdf: np.ndarray, forbidden: np.ndarray, k: int, max_rounds: int = 64):
    """k negatives per row, redrawing any that hit the positive target."""
    negs = np.searchsorted(cdf, rng.random((len(forbidden), k)), side="right")
    for _ in range(max_rounds):
        bad = negs == forbidden[:, None]
        n_bad = int(bad.sum())
        if n_bad == 0:
            break
        negs[bad] = np.searchsorted(cdf, rng.random(n_bad), side="right")
    return negs


class _Examples:
    """Flattened training examples for one epoch's token streams."""

    def __init__(self, streams: list[np.ndarray], window: int, mode: str):
        centers, contexts = [], []
        ctx_flat, pos_start, pos_len, targets = [], [], [], []
        for ids in streams:
            L = len(ids)
            if L < 2:
                continue
            for i in range(L):
                lo, hi = max(0, i - window), min(L, i + window + 1)
                if mode == "skipgram":
                    for j in range(lo, hi):
                        if j != i:
                            centers.append(ids[i])
                            contexts.append(ids[j])
                else:
                    ctx = [ids[j] for j in range(lo, hi) if j != i]
                    if not ctx:
                        continue
                    targets.append(ids[i])
                    pos_start.append(len(ctx_flat))
                    pos_len.append(len(ctx))
                    ctx_flat.extend(ctx)
        if mode == "skipgram":
            self.centers = np.asarray(centers, dtype=np.int64)
            self.contexts = np.asarray(contexts, dtype=np.int64)
            self.n = len(self.centers)
        else:
            self.targets = np.asarray(targets, dtype=np.int64)
            self.pos_start = np.asarray(pos_start, dtype=np.int64)
            self.pos_len = np.asarray(pos_len, dtype=np.int64)
            self.ctx_flat = np.asarray(ctx_flat, dtype=np.int64)
            self.n = len(self.targets)


def _ragged_gather(starts, lens):
    """Indices of the concatenation of ranges [start, start+len)."""
    total = int(lens.sum())
    cum = np.cumsum(lens) - lens
    offsets = np.arange(total) - np.repeat(cum, lens)
    return np.repeat(starts, lens) + offsets


class _Trainer:
    def __init__(self, table: EmbeddingTable, config: TrainConfig, cdf: np.ndarray, total_steps: int):
        self.vin = table.input_vectors
        self.vout = table.output_vectors
        self.cfg = config
        self.cdf = cdf
        self.total_steps = max(1, total_steps)
        self.done = 0
        self._lock = threading.Lock()

    def _alpha(self) -> float:
        frac = min(1.0, self.done / self.total_steps)
        return max(self.cfg.min_learning_rate, self.cfg.learning_rate * (1.0 - frac))

    def skipgram_batch(self, rng, centers, contexts) -> float:
        k = self.cfg.negatives_per_positive
        alpha = self._alpha()
        negs = _draw_negatives(rng, self.cdf, contexts, k)
        vc = self.vin[centers]
        uo = self.vout[contexts]
        un = self.vout[negs]
        pos = np.einsum("bd,bd->b", vc, uo)
        neg = np.einsum("bd,bkd->bk", vc, un)
        loss = -(log_sigmoid(pos).sum() + log_sigmoid(-neg).sum())
        gpos = (sigmoid(pos) - 1.0).astype(vc.dtype)
        gneg = sigmoid(neg).astype(vc.dtype)
        gvc = gpos[:, None] * uo + np.einsum("bk,bkd->bd", gneg, un)
        guo = gpos[:, None] * vc
        gun = gneg[..., None] * vc[:, None, :]
        _scatter_add(self.vin, centers, (-alpha) * gvc)
        rows = np.concatenate([contexts, negs.ravel()])
        grads = np.concatenate([guo, gun.reshape(-1, vc.shape[1])], axis=0)
        _scatter_add(self.vout, rows, (-alpha) * grads)
        self.done += len(centers)
        return float(loss)

    def cbow_batch(self, rng, ex: _Examples, picks) -> float:
        k = self.cfg.negatives_per_positive
        alpha = self._alpha()
        targets = ex.targets[picks]
        lens = ex.pos_len[picks]
        flat = _ragged_gather(ex.pos_start[picks], lens)
        ctx_ids = ex.ctx_flat[flat]
        seg_starts = np.concatenate(([0], np.cumsum(lens)[:-1]))
        h = np.add.reduceat(self.vin[ctx_ids], seg_starts, axis=0) / lens[:, None]
        negs = _draw_negatives(rng, self.cdf, targets, k)
        ut = self.vout[targets]
        un = self.vout[negs]
        pos = np.einsum("bd,bd->b", h, ut)
        neg = np.einsum("bd,bkd->bk", h, un)
        loss = -(log_sigmoid(pos).sum() + log_sigmoid(-neg).sum())
        gpos = (sigmoid(pos) - 1.0).astype(h.dtype)
        gneg = sigmoid(neg).astype(h.dtype)
        gh = gpos[:, None] * ut + np.einsum("bk,bkd->bd", gneg, un)
        seg = np.repeat(np.arange(len(targets)), lens)
        gctx = gh[seg] / lens[seg][:, None]
        _scatter_add(self.vin, ctx_ids, (-alpha) * gctx)
        gut = gpos[:, None] * h
        gun = gneg[..., None] * h[:, None, :]
        rows = np.concatenate([targets, negs.ravel()])
        grads = np.concatenate([gut, gun.reshape(-1, h.shape[1])], axis=0)
        _scatter_add(self.vout, rows, (-alpha) * grads)
        self.done += len(targets)
        return float(loss)


def _subsample(streams, freqs, total, threshold, rng):
    out = []
    for ids in streams:
        rel = freqs[ids] / total
        keep_p = np.minimum(1.0, (np.sqrt(rel / threshold) + 1.0) * threshold / rel)
        kept = ids[rng.random(len(ids)) < keep_p]
        if len(kept) >= 2:
            out.append(kept)
    return out


def train(bios: list[Bio], vocabulary: Vocabulary, config: TrainConfig) -> EmbeddingTable:
    """Train an embedding table on the training view of a corpus.

    Bios with fewer than two in-vocabulary identities are skipped. Raises
    NonFiniteLoss if the loss diverges, with the offending epoch/batch.
    """
    config.validate()
    streams = []
    for bio in bios:
        ids = [vocabulary.id_of(x) for x in bio.identities]
        ids = np.asarray([i for i in ids if i is not None], dtype=np.int64)
        if len(ids) >= 2:
            streams.append(ids)
    if not streams:
        raise ValueError("no trainable bios: need >= 2 in-vocabulary identities each")

    freqs = np.zeros(len(vocabulary), dtype=np.int64)
    for ids in streams:
        np.add.at(freqs, ids, 1)
    cdf = _noise_cdf(np.maximum(freqs, 1))
    total_tokens = int(freqs.sum())

    table = initialize_table(vocabulary, config.dim, config.seed)
    base_examples = None
    if config.subsample_threshold == 0.0:
        base_examples = _Examples(streams, config.window, config.mode)

    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x90a5]))
    probe = _Examples(streams, config.window, config.mode) if base_examples is None else base_examples
    total_steps = probe.n * config.epochs
    trainer = _Trainer(table, config, cdf, total_steps)

    epoch_losses = []
    for epoch in range(config.epochs):
        if config.subsample_threshold > 0.0:
            ex = _Examples(
                _subsample(streams, freqs, total_tokens, config.subsample_threshold, rng),
                config.window,
                config.mode,
            )
        else:
            ex = base_examples
        if ex.n == 0:
            epoch_losses.append(float("nan"))
            continue
        order = rng.permutation(ex.n)
        batches = [order[i: i + config.batch_size] for i in range(0, ex.n, config.batch_size)]

        if config.deterministic or config.workers == 1:
            epoch_loss = _run_batches(trainer, rng, ex, batches, config.mode, epoch)
        else:
            epoch_loss = _run_parallel(trainer, rng, ex, batches, config, epoch)
        epoch_losses.append(epoch_loss / ex.n)

    table.metadata = {
        "config": asdict(config),
        "config_hash": config.content_hash(),
        "corpus_hash": _corpus_hash(streams, vocabulary),
        "epoch_loss": epoch_losses,
        "n_examples_per_epoch": probe.n,
        "n_training_bios": len(streams),
    }
    table.check()
    return table


def _run_batches(trainer, rng, ex, batches, mode, epoch) -> float:
    total = 0.0
    for step, picks in enumerate(batches):
        if mode == "skipgram":
            loss = trainer.skipgram_batch(rng, ex.centers[picks], ex.contexts[picks])
        else:
            loss = trainer.cbow_batch(rng, ex, picks)
        if not np.isfinite(loss):
            raise NonFiniteLoss(
                f"loss diverged at epoch {epoch} batch {step}", epoch=epoch, step=step
            )
        total += loss
    return total


def _run_parallel(trainer, rng, ex, batches, config, epoch) -> float:
    """Hogwild-style threaded updates; shared matrices, no locks."""
    shards = [batches[w:: config.workers] for w in range(config.workers)]
    child_rngs = [np.random.default_rng(s) for s in rng.bit_generator.seed_seq.spawn(config.workers)]
    losses = [0.0] * config.workers
    errors = []

    def run(w):
        try:
            losses[w] = _run_batches(trainer, child_rngs[w], ex, shards[w], config.mode, epoch)
        except Exception as exc:  # noqa: BLE001 - surfaced below
            errors.append(exc)

    threads = [threading.Thread(target=run, args=(w,)) for w in range(config.workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return sum(losses)


def _corpus_hash(streams, vocabulary: Vocabulary) -> str:
    h = hashlib.sha256()
    for phrase in vocabulary.phrases:
        h.update(phrase.encode())
        h.update(b"\x00")
    for ids in streams:
        h.update(ids.tobytes())
        h.update(b"\xff")
    return h.hexdigest()[:16]
