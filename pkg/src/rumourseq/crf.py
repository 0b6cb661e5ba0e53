"""Linear-chain conditional random field over event timelines.

Potentials are log-linear: a per-position unary score ``W[y] . x_i + b[y]``
and a position-independent transition score ``T[y_prev, y]``. Training
minimises the L2-regularised negative conditional log-likelihood with
L-BFGS; inference is exact (forward-backward, Viterbi). ``prefix_decode``
labels each position from the prefix ending there only.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .data import LABELS, Label, Prediction

log = logging.getLogger(__name__)

N_LABELS = len(LABELS)
FORMAT_TAG = "rumourseq-model"
FORMAT_VERSION = 1


class NumericalError(ArithmeticError):
    """Optimisation produced a non-finite objective."""


class FingerprintMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ChainCrfModel:
    unary_weights: np.ndarray  # (K, F)
    unary_bias: np.ndarray  # (K,)
    transitions: np.ndarray  # (K, K), [previous, current]
    l2_lambda: float = 1.0
    fingerprint: str = ""

    @classmethod
    def zeros(cls, n_features: int, l2_lambda: float = 1.0, fingerprint: str = "") -> "ChainCrfModel":
        return cls(
            np.zeros((N_LABELS, n_features)),
            np.zeros(N_LABELS),
            np.zeros((N_LABELS, N_LABELS)),
            l2_lambda,
            fingerprint,
        )

    @property
    def n_features(self) -> int:
        return self.unary_weights.shape[1]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.unary_weights.ravel(), self.unary_bias, self.transitions.ravel()])

    def with_vector(self, theta: np.ndarray) -> "ChainCrfModel":
        k, f = N_LABELS, self.n_features
        return ChainCrfModel(
            theta[: k * f].reshape(k, f).copy(),
            theta[k * f: k * f + k].copy(),
            theta[k * f + k:].reshape(k, k).copy(),
            self.l2_lambda,
            self.fingerprint,
        )

    def check(self, fingerprint: Optional[str]) -> None:
        if fingerprint is not None and self.fingerprint and fingerprint != self.fingerprint:
            raise FingerprintMismatch(
                f"model expects feature layout {self.fingerprint}, got {fingerprint}"
            )

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "version": FORMAT_VERSION,
            "kind": "crf",
            "labels": [y.wire for y in LABELS],
            "layout_fingerprint": self.fingerprint,
            "l2_lambda": self.l2_lambda,
            "unary_weights": self.unary_weights.tolist(),
            "unary_bias": self.unary_bias.tolist(),
            "transitions": self.transitions.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChainCrfModel":
        if d.get("format") != FORMAT_TAG or d.get("kind") != "crf":
            raise ValueError("not a serialized CRF model")
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')}")
        if d["labels"] != [y.wire for y in LABELS]:
            raise ValueError(f"unexpected label order {d['labels']}")
        return cls(
            np.array(d["unary_weights"], dtype=np.float64).reshape(N_LABELS, -1),
            np.array(d["unary_bias"], dtype=np.float64),
            np.array(d["transitions"], dtype=np.float64),
            float(d["l2_lambda"]),
            d["layout_fingerprint"],
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "ChainCrfModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class SequenceInstance:
    x: np.ndarray  # (n, F)
    y: Optional[np.ndarray] = None  # (n,) label indices
    fingerprint: Optional[str] = None
    post_ids: tuple = field(default=())

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        if x.ndim != 2 or len(x) == 0:
            raise ValueError("sequence features must be a non-empty (n, F) array")
        object.__setattr__(self, "x", x)
        if self.y is not None:
            y = np.asarray(self.y, dtype=np.intp)
            if y.shape != (len(x),):
                raise ValueError("label sequence length differs from feature sequence")
            object.__setattr__(self, "y", y)


class Marginals(NamedTuple):
    node: np.ndarray  # (n, K)
    pair: np.ndarray  # (n-1, K, K)
    log_z: float
    log_z_backward: float


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def log_potentials(model: ChainCrfModel, x, fingerprint: Optional[str] = None):
    model.check(fingerprint)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] != model.n_features:
        raise FingerprintMismatch(f"model has {model.n_features} features, input has {x.shape[1]}")
    # an explicit per-row reduction, unlike BLAS, gives each row the same
    # bits whatever the batch size, which keeps prefix decoding exactly causal
    unary = (x[:, None, :] * model.unary_weights[None, :, :]).sum(axis=2) + model.unary_bias
    return _c(unary), _c(model.transitions)


def chain_marginals(unary: np.ndarray, trans: np.ndarray) -> Marginals:
    """Forward-backward on raw log-potentials."""
    unary, trans = _c(unary), _c(trans)
    alpha = kernels.forward(unary, trans)
    beta = kernels.backward(unary, trans)
    log_z = float(np.logaddexp.reduce(alpha[-1]))
    log_z_b = float(np.logaddexp.reduce(unary[0] + beta[0]))
    node = np.exp(alpha + beta - log_z)
    pair = np.exp(
        alpha[:-1, :, None] + trans[None, :, :] + (unary[1:] + beta[1:])[:, None, :] - log_z
    )
    return Marginals(node, pair, log_z, log_z_b)


def forward_backward(model: ChainCrfModel, x, fingerprint: Optional[str] = None) -> Marginals:
    return chain_marginals(*log_potentials(model, x, fingerprint))


def chain_viterbi(unary: np.ndarray, trans: np.ndarray) -> tuple[list[int], float]:
    """MAP sequence; among tied maxima prefers label 0 at the last position, then earlier ones."""
    delta, bp = kernels.viterbi_forward(_c(unary), _c(trans))
    last = int(np.argmax(delta[-1]))
    path = [last]
    for i in range(len(delta) - 1, 0, -1):
        path.append(int(bp[i, path[-1]]))
    path.reverse()
    return path, float(delta[-1, last])


def sequence_score(unary: np.ndarray, trans: np.ndarray, path: Sequence[int]) -> float:
    s = float(unary[0, path[0]])
    for i in range(1, len(path)):
        s += float(trans[path[i - 1], path[i]] + unary[i, path[i]])
    return s


def viterbi(model: ChainCrfModel, x, fingerprint: Optional[str] = None) -> tuple[list[Label], float]:
    path, score = chain_viterbi(*log_potentials(model, x, fingerprint))
    return [LABELS[y] for y in path], score


def chain_prefix_decode(unary: np.ndarray, trans: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-position (label, P(RUMOUR)) using only positions up to and including each one.

    The label at i is the final label of the MAP sequence over the prefix
    ``0..i``, which is the argmax of the max-product forward message; the
    score is the filtered marginal from the sum-product forward message.
    """
    unary, trans = _c(unary), _c(trans)
    delta, _ = kernels.viterbi_forward(unary, trans)
    alpha = kernels.forward(unary, trans)
    labels = np.argmax(delta, axis=1)
    filtered = np.exp(alpha - np.logaddexp.reduce(alpha, axis=1)[:, None])
    return labels, filtered[:, Label.RUMOUR]


def prefix_decode(model: ChainCrfModel, x, post_ids: Optional[Sequence[str]] = None,
                  fingerprint: Optional[str] = None) -> list[Prediction]:
    labels, scores = chain_prefix_decode(*log_potentials(model, x, fingerprint))
    if post_ids is None:
        post_ids = [str(i) for i in range(len(labels))]
    return [
        Prediction(pid, LABELS[int(y)], float(min(1.0, max(0.0, s))))
        for pid, y, s in zip(post_ids, labels, scores)
    ]


def _empirical(seq: SequenceInstance):
    onehot = np.zeros((len(seq.y), N_LABELS))
    onehot[np.arange(len(seq.y)), seq.y] = 1.0
    trans = np.zeros((N_LABELS, N_LABELS))
    np.add.at(trans, (seq.y[:-1], seq.y[1:]), 1.0)
    return onehot, trans


def _objective(theta: np.ndarray, template: ChainCrfModel, batch: Sequence[SequenceInstance], cache):
    model = template.with_vector(theta)
    w, b, t = model.unary_weights, model.unary_bias, _c(model.transitions)
    loss = 0.0
    g_w = np.zeros_like(w)
    g_b = np.zeros_like(b)
    g_t = np.zeros_like(t)
    for seq, (onehot, emp_trans) in zip(batch, cache):
        unary = _c(seq.x @ w.T + b)
        m = chain_marginals(unary, t)
        gold = float(np.sum(unary * onehot) + np.sum(t * emp_trans))
        loss += m.log_z - gold
        diff = m.node - onehot
        g_w += diff.T @ seq.x
        g_b += diff.sum(axis=0)
        g_t += m.pair.sum(axis=0) - emp_trans
    lam = template.l2_lambda
    loss += 0.5 * lam * float(theta @ theta)
    grad = np.concatenate([g_w.ravel(), g_b, g_t.ravel()]) + lam * theta
    return loss, grad


def nll_and_gradient(model: ChainCrfModel, batch: Sequence[SequenceInstance]) -> tuple[float, np.ndarray]:
    """Regularised negative log-likelihood and its gradient.

    The gradient is laid out like ``model.to_vector()``.
    """
    for seq in batch:
        if seq.y is None:
            raise ValueError("training sequences must be labeled")
        model.check(seq.fingerprint)
    cache = [_empirical(s) for s in batch]
    return _objective(model.to_vector(), model, batch, cache)


@dataclass(frozen=True)
class CrfConfig:
    l2_lambda: float = 1.0
    max_iter: int = 500
    tol: float = 1e-5
    seed: int = 0  # the objective is convex and starts at zero; kept for config symmetry


@dataclass(frozen=True)
class TrainingTrace:
    initial_loss: float
    final_loss: float
    iterations: int
    grad_inf_norm: float
    converged: bool
    message: str


def minimize_lbfgs(fun, x0, max_iter: int, tol: float, what: str):
    """L-BFGS on a (loss, grad) callable, aborting on a non-finite objective."""
    evals = [0]

    def wrapped(theta):
        loss, grad = fun(theta)
        evals[0] += 1
        if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise NumericalError(
                f"{what}: non-finite objective at evaluation {evals[0]} "
                f"(loss={loss}, |theta|_inf={np.max(np.abs(theta)):.3g})"
            )
        return loss, grad

    initial, _ = wrapped(x0)
    res = minimize(
        wrapped, x0, jac=True, method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-14, "maxcor": 20},
    )
    _, grad = fun(res.x)
    gnorm = float(np.max(np.abs(grad))) if grad.size else 0.0
    trace = TrainingTrace(float(initial), float(res.fun), int(res.nit), gnorm, gnorm < tol, str(res.message))
    log.debug("%s: %s", what, trace)
    return res.x, trace


def train(sequences: Sequence[SequenceInstance], config: CrfConfig = CrfConfig(),
          init: Optional[np.ndarray] = None, return_trace: bool = False):
    """Fit a CRF by regularised maximum likelihood, starting from zero weights."""
    if not sequences:
        raise ValueError("need at least one labeled sequence")
    fps = {s.fingerprint for s in sequences}
    if len(fps) > 1:
        raise FingerprintMismatch(f"sequences carry several feature layouts: {sorted(map(str, fps))}")
    n_features = sequences[0].x.shape[1]
    if any(s.x.shape[1] != n_features for s in sequences):
        raise FingerprintMismatch("sequences have different feature widths")
    for s in sequences:
        if s.y is None:
            raise ValueError("training sequences must be labeled")
    template = ChainCrfModel.zeros(n_features, config.l2_lambda, next(iter(fps)) or "")
    cache = [_empirical(s) for s in sequences]
    x0 = template.to_vector() if init is None else np.array(init, dtype=np.float64)
    theta, trace = minimize_lbfgs(
        lambda th: _objective(th, template, sequences, cache), x0, config.max_iter, config.tol, "crf"
    )
    model = template.with_vector(theta)
    return (model, trace) if return_trace else model
