"""Content and social features, per-post vector assembly and standardization."""

from __future__ import annotations

import enum
import hashlib
import math
import re
from dataclasses import dataclass
from datetime import datetime
from typing import Optional, Sequence

import numpy as np

from . import tagger as tagging
from .data import AuthorMeta, Post
from .embeddings import EmbeddingModel, tweet_vector

SECONDS_PER_YEAR = 365.25 * 24 * 3600

CONTENT_FEATURES = (
    "word_vectors", "pos_tags", "capital_ratio", "word_count",
    "question_mark", "exclamation_mark", "period",
)
SOCIAL_FEATURES = ("tweet_count", "listed_count", "follow_ratio", "age", "verified")

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)


class FeatureGroup(enum.Enum):
    CONTENT = "content"
    SOCIAL = "social"
    CONTENT_AND_SOCIAL = "both"

    @property
    def uses_content(self) -> bool:
        return self is not FeatureGroup.SOCIAL

    @property
    def uses_social(self) -> bool:
        return self is not FeatureGroup.CONTENT


Layout = tuple[tuple[str, int], ...]


def layout_for(group: FeatureGroup, dim: int = 300) -> Layout:
    content = (("word_vectors", dim), ("pos_tags", len(tagging.TAGSET))) + tuple(
        (name, 1) for name in CONTENT_FEATURES[2:]
    )
    social = tuple((name, 1) for name in SOCIAL_FEATURES)
    return {
        FeatureGroup.CONTENT: content,
        FeatureGroup.SOCIAL: social,
        FeatureGroup.CONTENT_AND_SOCIAL: content + social,
    }[group]


def fingerprint(layout: Layout) -> str:
    text = ";".join(f"{name}:{width}" for name, width in layout)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class LayoutMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    layout: Layout

    def __post_init__(self):
        if sum(w for _, w in self.layout) != len(self.values):
            raise LayoutMismatch("layout widths do not sum to the vector length")

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.layout)

    def segment(self, name: str) -> np.ndarray:
        start = 0
        for n, w in self.layout:
            if n == name:
                return self.values[start:start + w]
            start += w
        raise KeyError(name)


def capital_ratio(text: str) -> float:
    letters = [ch for ch in text if ch.isalpha()]
    if not letters:
        return 0.0
    return sum(1 for ch in letters if ch.isupper()) / len(letters)


def word_count(text: str) -> int:
    return len(text.split())


def punctuation_flags(text: str) -> tuple[int, int, int]:
    return int("?" in text), int("!" in text), int("." in text)


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def social_features(author: AuthorMeta, post_time: datetime) -> np.ndarray:
    years = max(0.0, (post_time - author.created_at).total_seconds() / SECONDS_PER_YEAR)
    return np.array(
        [
            math.ceil(math.log10(max(1, author.statuses_count))),
            math.ceil(math.log10(max(1, author.listed_count))),
            round_half_away(math.log10((author.followers_count + 1) / (author.following_count + 1))),
            round_half_away(years),
            1.0 if author.verified else 0.0,
        ],
        dtype=np.float64,
    )


def embedding_tokens(text: str) -> list[str]:
    """Tokens fed to the word-vector model: lowercased, URLs collapsed."""
    return ["<url>" if _URL_RE.match(t) else t.lower() for t in tagging.tokenize(text)]


def content_features(post: Post, emb: EmbeddingModel, tagger: Optional[tagging.Tagger] = None) -> np.ndarray:
    text = post.text
    pos = tagging.pos_count_vector(tagging.tag(tagging.tokenize(text), tagger))
    return np.concatenate(
        [
            tweet_vector(emb, embedding_tokens(text)),
            pos.astype(np.float64),
            [capital_ratio(text), float(word_count(text))],
            np.array(punctuation_flags(text), dtype=np.float64),
        ]
    )


def assemble(
    post: Post,
    group: FeatureGroup,
    emb: Optional[EmbeddingModel] = None,
    tagger: Optional[tagging.Tagger] = None,
) -> FeatureVector:
    parts = []
    dim = 0
    if group.uses_content:
        if emb is None:
            raise ValueError("content features need an embedding model")
        dim = emb.dim
        parts.append(content_features(post, emb, tagger))
    if group.uses_social:
        parts.append(social_features(post.author, post.created_at))
    return FeatureVector(np.concatenate(parts), layout_for(group, dim))


def feature_matrix(posts: Sequence[Post], group, emb=None, tagger=None) -> tuple[np.ndarray, Layout]:
    vectors = [assemble(p, group, emb, tagger) for p in posts]
    layout = vectors[0].layout if vectors else layout_for(group, emb.dim if emb else 0)
    matrix = np.vstack([v.values for v in vectors]) if vectors else np.zeros((0, sum(w for _, w in layout)))
    return matrix, layout


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray
    layout: Layout

    def transform(self, matrix: np.ndarray, layout: Layout) -> np.ndarray:
        if tuple(layout) != tuple(self.layout):
            raise LayoutMismatch("standardizer fitted on a different layout")
        return (matrix - self.mean) / self.scale


def fit_standardizer(train, layout: Optional[Layout] = None) -> Standardizer:
    """Per-dimension z-scoring; constant dimensions are left untouched.

    ``train`` is either a list of FeatureVector or a 2-D array plus ``layout``.
    """
    if isinstance(train, np.ndarray):
        matrix = train
        if layout is None:
            raise ValueError("a layout is required when fitting on a raw matrix")
    else:
        train = list(train)
        if not train:
            raise ValueError("cannot fit a standardizer on zero vectors")
        layout = train[0].layout
        if any(v.layout != layout for v in train):
            raise LayoutMismatch("training vectors have mixed layouts")
        matrix = np.vstack([v.values for v in train])
    if len(matrix) == 0:
        raise ValueError("cannot fit a standardizer on zero vectors")
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    constant = std == 0
    return Standardizer(
        mean=np.where(constant, 0.0, mean),
        scale=np.where(constant, 1.0, std),
        layout=tuple(layout),
    )


def apply_standardizer(s: Standardizer, v: FeatureVector) -> FeatureVector:
    return FeatureVector(s.transform(v.values[None, :], v.layout)[0], v.layout)


def export_feature_matrix(path, post_ids, labels, matrix: np.ndarray, layout: Layout) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# layout\t" + "\t".join(f"{n}:{w}" for n, w in layout) + "\n")
        fh.write("post_id\tlabel\t" + "\t".join(f"f{i}" for i in range(matrix.shape[1])) + "\n")
        for pid, label, row in zip(post_ids, labels, matrix):
            wire = label.wire if label is not None else "-"
            fh.write(f"{pid}\t{wire}\t" + "\t".join(repr(float(x)) for x in row) + "\n")
