"""Skip-gram word embeddings trained with negative sampling."""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import kernels

FORMAT_TAG = "rumourseq-embeddings"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class EmbeddingConfig:
    dim: int = 300
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_count: int = 1
    seed: int = 1
    noise_power: float = 0.75
    workers: int = 1

    def __post_init__(self):
        if self.dim <= 0 or self.window <= 0 or self.epochs <= 0 or self.negatives < 0 or self.workers < 1:
            raise ValueError(f"invalid embedding config {self}")


@dataclass(frozen=True, eq=False)
class EmbeddingModel:
    vocabulary: dict[str, int]
    matrix: np.ndarray
    config: EmbeddingConfig = field(default_factory=EmbeddingConfig)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __contains__(self, token: str) -> bool:
        return token in self.vocabulary

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self.vocabulary[token]]

    def save(self, path) -> None:
        words = sorted(self.vocabulary, key=self.vocabulary.__getitem__)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{FORMAT_TAG} {FORMAT_VERSION} {len(words)} {self.dim}\n")
            fh.write(json.dumps(asdict(self.config), sort_keys=True) + "\n")
            for w in words:
                row = " ".join(repr(float(v)) for v in self.matrix[self.vocabulary[w]])
                fh.write(f"{w} {row}\n")

    @classmethod
    def load(cls, path) -> "EmbeddingModel":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 4 or header[0] != FORMAT_TAG:
                raise ValueError(f"{path}: not an embedding file")
            if int(header[1]) != FORMAT_VERSION:
                raise ValueError(f"{path}: unsupported version {header[1]}")
            n, d = int(header[2]), int(header[3])
            config = EmbeddingConfig(**json.loads(fh.readline()))
            vocab, matrix = {}, np.empty((n, d), dtype=np.float64)
            for i in range(n):
                word, *vals = fh.readline().rstrip("\n").split(" ")
                if len(vals) != d:
                    raise ValueError(f"{path}: row {i} has {len(vals)} values, expected {d}")
                vocab[word] = i
                matrix[i] = [float(v) for v in vals]
        return cls(vocab, matrix, config)


def build_vocabulary(corpus: Sequence[Sequence[str]], min_count: int) -> tuple[dict[str, int], np.ndarray]:
    counts = Counter(tok for sent in corpus for tok in sent)
    # frequency-descending, ties by token, so indices are reproducible
    kept = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
    return {t: i for i, t in enumerate(kept)}, np.array([counts[t] for t in kept], dtype=np.float64)


def _pairs(encoded: list[np.ndarray], window: int) -> tuple[np.ndarray, np.ndarray]:
    centers, contexts = [], []
    for ids in encoded:
        n = len(ids)
        for i in range(n):
            lo, hi = max(0, i - window), min(n, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(ids[i])
                    contexts.append(ids[j])
    return np.asarray(centers, dtype=np.int64), np.asarray(contexts, dtype=np.int64)


def train_embeddings(corpus: Sequence[Sequence[str]], config: EmbeddingConfig = EmbeddingConfig()) -> EmbeddingModel:
    """Train skip-gram vectors with negative sampling.

    With ``workers=1`` (the default) training is fully determined by
    ``config.seed``; more workers trade that for speed. Context pairs are
    enumerated in corpus order and negatives are drawn up front per epoch from
    the unigram distribution raised to ``noise_power``. The learning rate
    decays linearly over all pairs of all epochs.
    """
    if not corpus or not any(corpus):
        raise ValueError("cannot train embeddings on an empty corpus")
    vocab, counts = build_vocabulary(corpus, config.min_count)
    if not vocab:
        raise ValueError(f"no token reaches min_count={config.min_count}")
    rng = np.random.default_rng(config.seed)
    v, d = len(vocab), config.dim
    w_in = np.ascontiguousarray((rng.random((v, d)) - 0.5) / d)
    w_out = np.zeros((v, d), dtype=np.float64)

    encoded = [np.array([vocab[t] for t in sent if t in vocab], dtype=np.int64) for sent in corpus]
    centers, contexts = _pairs(encoded, config.window)
    n_pairs = len(centers)
    if n_pairs == 0:
        return EmbeddingModel(vocab, w_in, config)

    noise = counts ** config.noise_power
    noise /= noise.sum()
    cdf = np.cumsum(noise)
    cdf[-1] = 1.0
    total = n_pairs * config.epochs
    floor = config.learning_rate * 1e-4
    for epoch in range(config.epochs):
        done = epoch * n_pairs + np.arange(n_pairs, dtype=np.float64)
        rates = np.maximum(config.learning_rate * (1.0 - done / total), floor)
        draws = rng.random((n_pairs, config.negatives))
        negatives = np.ascontiguousarray(np.searchsorted(cdf, draws, side="right").astype(np.int64))
        np.minimum(negatives, v - 1, out=negatives)
        if config.workers == 1:
            kernels.sgns_update(w_in, w_out, centers, contexts, negatives, rates)
        else:
            _parallel_update(config.workers, w_in, w_out, centers, contexts, negatives, rates)
    if not np.all(np.isfinite(w_in)):
        raise FloatingPointError("embedding training diverged")
    return EmbeddingModel(vocab, w_in, config)


def _parallel_update(workers, w_in, w_out, centers, contexts, negatives, rates):
    # lock-free shared updates; the result depends on thread scheduling
    chunks = np.array_split(np.arange(len(centers)), workers)
    with ThreadPoolExecutor(workers) as pool:
        list(pool.map(
            lambda idx: kernels.sgns_update(
                w_in, w_out,
                np.ascontiguousarray(centers[idx]), np.ascontiguousarray(contexts[idx]),
                np.ascontiguousarray(negatives[idx]), np.ascontiguousarray(rates[idx]),
            ),
            chunks,
        ))


def tweet_vector(model: EmbeddingModel, tokens: Sequence[str]) -> np.ndarray:
    """Mean of the in-vocabulary token rows; zeros when none are known."""
    # sorted so the summation order, hence the result, ignores token order
    rows = sorted(model.vocabulary[t] for t in tokens if t in model.vocabulary)
    if not rows:
        return np.zeros(model.dim, dtype=np.float64)
    return model.matrix[rows].mean(axis=0)
