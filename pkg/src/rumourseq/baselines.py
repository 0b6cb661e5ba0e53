"""Non-sequential classifiers and the enquiry-regex baseline."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit, logsumexp

from .crf import FORMAT_TAG, FORMAT_VERSION, FingerprintMismatch, minimize_lbfgs
from .data import LABELS, DataError, Label, Post, Prediction, decision

N_LABELS = len(LABELS)

ENQUIRY_PATTERNS = (
    r"is (that|this|it) true",
    r"wh[a]*t[?!][?1]*",
    r"real\?|really ?|unconfirmed",
    r"rumor|debunk",
    r"(that|this|it) is not true",
)
# second pattern with the presumed typo in its last character class fixed
ENQUIRY_PATTERNS_CORRECTED = (
    ENQUIRY_PATTERNS[0], r"wh[a]*t[?!][?!]*", *ENQUIRY_PATTERNS[2:],
)


class Kind(enum.Enum):
    MAXENT = "maxent"
    NAIVE_BAYES = "nb"
    LINEAR_SVM = "svm"


@dataclass(frozen=True, eq=False)
class PointClassifier:
    kind: Kind
    params: dict = field(default_factory=dict)
    fingerprint: str = ""

    def check(self, fingerprint: Optional[str]) -> None:
        if fingerprint is not None and self.fingerprint and fingerprint != self.fingerprint:
            raise FingerprintMismatch(f"classifier expects layout {self.fingerprint}, got {fingerprint}")

    def scores(self, x: np.ndarray) -> np.ndarray:
        """P(RUMOUR) for each row of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        p = self.params
        if self.kind is Kind.MAXENT:
            logits = x @ p["weights"].T + p["bias"]
            return expit(logits[:, 1] - logits[:, 0])
        if self.kind is Kind.LINEAR_SVM:
            return expit(x @ p["weights"] + p["bias"])
        return _nb_posterior(p, x)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "version": FORMAT_VERSION,
            "kind": self.kind.value,
            "labels": [y.wire for y in LABELS],
            "layout_fingerprint": self.fingerprint,
            "params": {k: np.asarray(v).tolist() for k, v in sorted(self.params.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PointClassifier":
        if d.get("format") != FORMAT_TAG or d.get("version") != FORMAT_VERSION:
            raise ValueError("not a serialized model of a supported version")
        params = {k: np.array(v, dtype=np.float64) for k, v in d["params"].items()}
        return cls(Kind(d["kind"]), params, d["layout_fingerprint"])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "PointClassifier":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def predict(clf: PointClassifier, vector, post_id: str = "", fingerprint: Optional[str] = None) -> Prediction:
    clf.check(fingerprint)
    score = float(clf.scores(vector)[0])
    return Prediction(post_id, decision(score), score)


def predict_many(clf: PointClassifier, x: np.ndarray, post_ids: Sequence[str],
                 fingerprint: Optional[str] = None) -> list[Prediction]:
    clf.check(fingerprint)
    return [Prediction(pid, decision(float(s)), float(s)) for pid, s in zip(post_ids, clf.scores(x))]


# -- maximum entropy ---------------------------------------------------------

@dataclass(frozen=True)
class MaxEntConfig:
    l2_lambda: float = 1.0
    max_iter: int = 500
    tol: float = 1e-5


def _as_xy(vectors, labels):
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(vectors, dtype=np.float64)))
    y = np.asarray([int(v) for v in labels], dtype=np.intp)
    if len(x) != len(y):
        raise ValueError("vectors and labels differ in length")
    if len(x) == 0:
        raise ValueError("empty training set")
    return x, y


def maxent_objective(theta: np.ndarray, x: np.ndarray, y: np.ndarray, l2_lambda: float):
    """Multinomial logistic loss over the two labels plus (lambda/2)|theta|^2.

    ``theta`` packs a (K, F) weight matrix followed by K biases.
    """
    k, f = N_LABELS, x.shape[1]
    w = theta[: k * f].reshape(k, f)
    b = theta[k * f:]
    logits = x @ w.T + b
    log_norm = logsumexp(logits, axis=1)
    loss = float(np.sum(log_norm - logits[np.arange(len(y)), y]))
    probs = np.exp(logits - log_norm[:, None])
    probs[np.arange(len(y)), y] -= 1.0
    grad = np.concatenate([(probs.T @ x).ravel(), probs.sum(axis=0)])
    loss += 0.5 * l2_lambda * float(theta @ theta)
    return loss, grad + l2_lambda * theta


def train_maxent(vectors, labels, config: MaxEntConfig = MaxEntConfig(), fingerprint: str = "") -> PointClassifier:
    x, y = _as_xy(vectors, labels)
    f = x.shape[1]
    theta, _ = minimize_lbfgs(
        lambda th: maxent_objective(th, x, y, config.l2_lambda),
        np.zeros(N_LABELS * f + N_LABELS), config.max_iter, config.tol, "maxent",
    )
    return PointClassifier(
        Kind.MAXENT,
        {"weights": theta[: N_LABELS * f].reshape(N_LABELS, f), "bias": theta[N_LABELS * f:]},
        fingerprint,
    )


# -- gaussian naive bayes ----------------------------------------------------

def train_nb(vectors, labels, var_smoothing: float = 1e-9, fingerprint: str = "") -> PointClassifier:
    x, y = _as_xy(vectors, labels)
    present = np.unique(y)
    if len(present) < N_LABELS:
        raise DataError("naive Bayes needs training examples of both labels")
    floor = var_smoothing * float(np.var(x, axis=0).max())
    if floor <= 0.0:
        floor = var_smoothing
    means = np.vstack([x[y == k].mean(axis=0) for k in range(N_LABELS)])
    variances = np.vstack([np.maximum(x[y == k].var(axis=0), floor) for k in range(N_LABELS)])
    priors = np.array([np.mean(y == k) for k in range(N_LABELS)])
    return PointClassifier(
        Kind.NAIVE_BAYES, {"means": means, "variances": variances, "priors": priors}, fingerprint
    )


def _nb_posterior(p: dict, x: np.ndarray) -> np.ndarray:
    joint = np.empty((len(x), N_LABELS))
    for k in range(N_LABELS):
        var = p["variances"][k]
        joint[:, k] = (
            np.log(p["priors"][k])
            - 0.5 * np.sum(np.log(2.0 * np.pi * var))
            - 0.5 * np.sum((x - p["means"][k]) ** 2 / var, axis=1)
        )
    return expit(joint[:, 1] - joint[:, 0])


# -- linear svm --------------------------------------------------------------

@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    epochs: int = 50
    seed: int = 0


def svm_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, C: float) -> float:
    """0.5 (|w|^2 + b^2) + C * sum of hinge losses, with y in {-1, +1}."""
    margins = y * (x @ w + b)
    return 0.5 * (float(w @ w) + b * b) + C * float(np.maximum(0.0, 1.0 - margins).sum())


def train_svm(vectors, labels, config: SvmConfig = SvmConfig(), fingerprint: str = "") -> PointClassifier:
    """Pegasos-style stochastic subgradient descent on the primal.

    The bias is treated as a weight on a constant feature (and regularised),
    as in liblinear. The returned model is the average of the iterates over
    the second half of training.
    """
    x, labels_ = _as_xy(vectors, labels)
    y = np.where(labels_ == int(Label.RUMOUR), 1.0, -1.0)
    n, f = x.shape
    xa = np.hstack([x, np.ones((n, 1))])
    lam = 1.0 / (config.C * n)
    rng = np.random.default_rng(config.seed)
    w = np.zeros(f + 1)
    avg = np.zeros(f + 1)
    n_avg = 0
    step = 0
    burn_in = (config.epochs * n) // 2
    for _ in range(config.epochs):
        for i in rng.permutation(n):
            step += 1
            eta = 1.0 / (lam * step)
            violated = y[i] * float(xa[i] @ w) < 1.0
            w *= 1.0 - eta * lam
            if violated:
                w += eta * y[i] * xa[i]
            if step > burn_in:
                n_avg += 1
                avg += (w - avg) / n_avg
    final = avg if n_avg else w
    return PointClassifier(Kind.LINEAR_SVM, {"weights": final[:f].copy(), "bias": np.array(final[f])}, fingerprint)


# -- enquiry baseline --------------------------------------------------------

@dataclass(frozen=True)
class EnquiryRule:
    patterns: tuple[str, ...] = ENQUIRY_PATTERNS

    @classmethod
    def corrected(cls) -> "EnquiryRule":
        return cls(ENQUIRY_PATTERNS_CORRECTED)

    @cached_property
    def compiled(self) -> list[re.Pattern]:
        return [re.compile(p, re.IGNORECASE | re.ASCII) for p in self.patterns]

    def matches(self, text: str) -> bool:
        return any(rx.search(text) for rx in self.compiled)


def enquiry_baseline(post: Post, rule: EnquiryRule = EnquiryRule()) -> Prediction:
    """RUMOUR iff some reply to the post matches some enquiry pattern."""
    hit = any(rule.matches(reply) for reply in post.reply_texts)
    return Prediction(post.id, Label.RUMOUR if hit else Label.NON_RUMOUR, 1.0 if hit else 0.0)
