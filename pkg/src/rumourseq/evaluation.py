"""Leave-one-event-out experiments, rumour-class metrics and report files."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import baselines, crf
from .data import DataError, Dataset, Label, Prediction
from .embeddings import EmbeddingConfig, train_embeddings
from .features import FeatureGroup, embedding_tokens, feature_matrix, fingerprint, fit_standardizer
from .ingest import decile_bounds
from .tagger import Tagger

log = logging.getLogger(__name__)

REPORT_VERSION = 1
CLASSIFIERS = ("crf", "maxent", "nb", "svm", "enquiry")
STANDARDIZED = {"crf", "maxent", "svm"}
DECILE_HEADER = ("event", "decile", "tp", "fp", "fn", "tn", "f1", "flag")


class LeakageError(AssertionError):
    """A held-out post reached a training step."""


@dataclass(frozen=True)
class Fold:
    train: tuple[str, ...]
    test: str


def make_fold_plan(ds: Dataset) -> list[Fold]:
    ids = sorted(ds.event_ids)
    if len(ids) < 2:
        raise DataError(f"leave-one-event-out needs at least 2 events, got {len(ids)}")
    return [Fold(tuple(e for e in ids if e != test), test) for test in ids]


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def of(cls, gold: Sequence[Label], pred: Sequence[Label]) -> "Confusion":
        tp = fp = fn = tn = 0
        for g, p in zip(gold, pred, strict=True):
            if p is Label.RUMOUR:
                if g is Label.RUMOUR:
                    tp += 1
                else:
                    fp += 1
            elif g is Label.RUMOUR:
                fn += 1
            else:
                tn += 1
        return cls(tp, fp, fn, tn)


def prf(c: Confusion) -> tuple[float, float, float]:
    """Precision, recall and F1 for RUMOUR; any zero denominator gives 0."""
    p = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    r = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def micro_prf(confusions: Sequence[Confusion]) -> tuple[float, float, float]:
    total = Confusion()
    for c in confusions:
        total = total + c
    return prf(total)


@dataclass(frozen=True)
class DecileRow:
    event: str
    decile: int  # 1-based; 0 marks a whole-event fallback row
    confusion: Confusion
    f1: float
    flag: str  # "-", "no_positives" or "whole_event"


def decile_f1(event: str, gold: Sequence[Label], pred: Sequence[Label]) -> list[DecileRow]:
    """F1 of RUMOUR within each temporal decile of one event."""
    if len(gold) != len(pred):
        raise ValueError("gold and predicted sequences differ in length")
    if len(gold) < 10:
        log.warning("event %s has %d posts; reporting it whole instead of by decile", event, len(gold))
        c = Confusion.of(gold, pred)
        return [DecileRow(event, 0, c, prf(c)[2], "whole_event")]
    rows = []
    for d, (a, b) in enumerate(decile_bounds(len(gold)), 1):
        c = Confusion.of(gold[a:b], pred[a:b])
        flag = "no_positives" if c.tp + c.fn == 0 else "-"
        rows.append(DecileRow(event, d, c, prf(c)[2], flag))
    return rows


@dataclass(frozen=True)
class ExperimentSettings:
    """Everything that determines an experiment's outcome."""

    classifier: str = "crf"
    features: str = "both"
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    crf_lambda: float = 1.0
    maxent_lambda: float = 1.0
    max_iter: int = 500
    tol: float = 1e-5
    svm_c: float = 1.0
    svm_epochs: int = 50
    nb_var_smoothing: float = 1e-9
    enquiry_variant: str = "verbatim"
    seed: int = 1
    embedding_corpus: str = "source"

    def __post_init__(self):
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"unknown classifier {self.classifier!r}; choose from {CLASSIFIERS}")
        FeatureGroup(self.features)
        if self.enquiry_variant not in ("verbatim", "corrected"):
            raise ValueError("enquiry_variant must be 'verbatim' or 'corrected'")
        if self.embedding_corpus not in ("source", "source+replies"):
            raise ValueError("embedding_corpus must be 'source' or 'source+replies'")

    @property
    def group(self) -> FeatureGroup:
        return FeatureGroup(self.features)

    def snapshot(self) -> dict:
        snap = asdict(self)
        if self.classifier == "enquiry":
            snap = {k: snap[k] for k in ("classifier", "enquiry_variant", "seed")}
        return snap


@dataclass
class FoldResult:
    fold: Fold
    predictions: list[Prediction]
    gold: list[Label]
    trained_on: frozenset = frozenset()

    @property
    def confusion(self) -> Confusion:
        return Confusion.of(self.gold, [p.label for p in self.predictions])


def fold_seeds(root_seed: int, n_folds: int) -> list[tuple[int, int]]:
    """(embedding seed, classifier seed) per fold, all derived from one root seed."""
    children = np.random.SeedSequence(root_seed).spawn(n_folds)
    return [tuple(int(v) for v in c.generate_state(2)) for c in children]


def run_fold(ds: Dataset, fold: Fold, settings: ExperimentSettings, seeds: tuple[int, int],
             tagger: Optional[Tagger] = None) -> FoldResult:
    test_tl = ds.event(fold.test)
    gold = test_tl.require_labels()
    test_ids = {p.id for p in test_tl.posts}

    if settings.classifier == "enquiry":
        rule = baselines.EnquiryRule() if settings.enquiry_variant == "verbatim" else baselines.EnquiryRule.corrected()
        preds = [baselines.enquiry_baseline(p, rule) for p in test_tl.posts]
        return FoldResult(fold, preds, gold)

    train_tls = [ds.event(e) for e in fold.train]
    train_posts = [p for tl in train_tls for p in tl.posts]
    consumed: set[str] = set()
    group = settings.group

    emb = None
    if group.uses_content:
        corpus = []
        for p in train_posts:
            corpus.append(embedding_tokens(p.text))
            if settings.embedding_corpus == "source+replies":
                corpus.extend(embedding_tokens(r) for r in p.reply_texts)
        consumed.update(p.id for p in train_posts)
        emb = train_embeddings(corpus, replace(settings.embedding, seed=seeds[0]))

    x_train, layout = feature_matrix(train_posts, group, emb, tagger)
    x_test, _ = feature_matrix(test_tl.posts, group, emb, tagger)
    fp = fingerprint(layout)
    y_train = [p.label for p in train_posts]
    for tl in train_tls:
        tl.require_labels()

    if settings.classifier in STANDARDIZED:
        scaler = fit_standardizer(x_train, layout)
        consumed.update(p.id for p in train_posts)
        x_train = scaler.transform(x_train, layout)
        x_test = scaler.transform(x_test, layout)

    consumed.update(p.id for p in train_posts)
    leaked = consumed & test_ids
    if leaked:
        raise LeakageError(f"fold {fold.test}: {len(leaked)} test posts used in training, e.g. {sorted(leaked)[:3]}")

    test_post_ids = [p.id for p in test_tl.posts]
    if settings.classifier == "crf":
        sequences, start = [], 0
        for tl in train_tls:
            n = len(tl)
            sequences.append(crf.SequenceInstance(
                x_train[start:start + n], np.array([int(y) for y in tl.labels]), fp,
                tuple(p.id for p in tl.posts),
            ))
            start += n
        model = crf.train(sequences, crf.CrfConfig(settings.crf_lambda, settings.max_iter, settings.tol, seeds[1]))
        preds = crf.prefix_decode(model, x_test, test_post_ids, fp)
    else:
        if settings.classifier == "maxent":
            clf = baselines.train_maxent(
                x_train, y_train, baselines.MaxEntConfig(settings.maxent_lambda, settings.max_iter, settings.tol), fp
            )
        elif settings.classifier == "nb":
            clf = baselines.train_nb(x_train, y_train, settings.nb_var_smoothing, fp)
        else:
            clf = baselines.train_svm(
                x_train, y_train, baselines.SvmConfig(settings.svm_c, settings.svm_epochs, seeds[1] % 2**32), fp
            )
        preds = baselines.predict_many(clf, x_test, test_post_ids, fp)
    return FoldResult(fold, preds, gold, frozenset(consumed))


@dataclass
class EvalReport:
    settings: dict
    folds: list[dict]
    predictions: dict[str, list[list]]
    deciles: list[DecileRow]

    @property
    def confusions(self) -> list[Confusion]:
        return [Confusion(f["tp"], f["fp"], f["fn"], f["tn"]) for f in self.folds]

    @property
    def micro(self) -> tuple[float, float, float]:
        return micro_prf(self.confusions)

    def to_dict(self) -> dict:
        p, r, f = self.micro
        return {
            "format": "rumourseq-report",
            "version": REPORT_VERSION,
            "settings": self.settings,
            "conventions": {
                "positive_class": "rumour",
                "zero_denominator": "precision, recall and F1 are 0 when their denominator is 0",
                "decile_flags": {
                    "no_positives": "decile has no gold rumours; F1 reported as 0",
                    "whole_event": "event shorter than 10 posts; scored as one slice",
                },
            },
            "micro": {"precision": p, "recall": r, "f1": f},
            "folds": self.folds,
            "deciles": [
                {"event": d.event, "decile": d.decile, **asdict(d.confusion), "f1": d.f1, "flag": d.flag}
                for d in self.deciles
            ],
            "predictions": self.predictions,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        if d.get("format") != "rumourseq-report" or d.get("version") != REPORT_VERSION:
            raise ValueError("not a supported report file")
        deciles = [
            DecileRow(r["event"], r["decile"], Confusion(r["tp"], r["fp"], r["fn"], r["tn"]), r["f1"], r["flag"])
            for r in d["deciles"]
        ]
        return cls(d["settings"], d["folds"], d["predictions"], deciles)

    def recompute_from_predictions(self) -> tuple[float, float, float]:
        confusions = []
        for fold in self.folds:
            rows = self.predictions[fold["test"]]
            gold = [Label.from_wire(r[1]) for r in rows]
            pred = [Label.from_wire(r[2]) for r in rows]
            confusions.append(Confusion.of(gold, pred))
        return micro_prf(confusions)


def build_report(results: Sequence[FoldResult], settings: ExperimentSettings, ds: Dataset) -> EvalReport:
    folds, predictions, deciles = [], {}, []
    for res in results:
        c = res.confusion
        p, r, f = prf(c)
        folds.append({
            "test": res.fold.test, "train": list(res.fold.train),
            "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn,
            "precision": p, "recall": r, "f1": f,
        })
        predictions[res.fold.test] = [
            [pr.post_id, g.wire, pr.label.wire, pr.score] for pr, g in zip(res.predictions, res.gold)
        ]
        deciles.extend(decile_f1(res.fold.test, res.gold, [pr.label for pr in res.predictions]))
    snapshot = settings.snapshot()
    snapshot["events"] = sorted(ds.event_ids)
    snapshot["n_posts"] = len(ds)
    return EvalReport(snapshot, folds, predictions, deciles)


def _run_fold_job(args):
    ds, fold, settings, seeds, tagger = args
    return run_fold(ds, fold, settings, seeds, tagger)


def run_experiment(ds: Dataset, settings: ExperimentSettings, tagger: Optional[Tagger] = None,
                   jobs: int = 1) -> EvalReport:
    """Leave-one-event-out evaluation; every model is refit inside each fold."""
    ds.require_labels()
    plan = make_fold_plan(ds)
    seeds = fold_seeds(settings.seed, len(plan))
    jobs_args = [(ds, fold, settings, s, tagger) for fold, s in zip(plan, seeds)]
    if jobs > 1 and len(plan) > 1:
        with ProcessPoolExecutor(min(jobs, len(plan))) as pool:
            results = list(pool.map(_run_fold_job, jobs_args))
    else:
        results = [_run_fold_job(a) for a in jobs_args]
    for res in results:
        test_ids = {p.id for p in ds.event(res.fold.test).posts}
        if res.trained_on & test_ids:
            raise LeakageError(f"fold {res.fold.test}: training consumed held-out posts")
    return build_report(results, settings, ds)


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_report(report: EvalReport, out_dir) -> dict[str, Path]:
    """Write report.json plus folds.tsv, deciles.tsv and predictions.tsv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in ("report.json", "folds.tsv", "deciles.tsv", "predictions.tsv")}
    with open(paths["report.json"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(paths["folds.tsv"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("test_event\ttp\tfp\tfn\ttn\tprecision\trecall\tf1\n")
        for f in report.folds:
            fh.write(f"{f['test']}\t{f['tp']}\t{f['fp']}\t{f['fn']}\t{f['tn']}\t"
                     f"{_fmt(f['precision'])}\t{_fmt(f['recall'])}\t{_fmt(f['f1'])}\n")
    write_decile_table(paths["deciles.tsv"], report.deciles)
    with open(paths["predictions.tsv"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("event\tpost_id\tgold\tpredicted\tscore\n")
        for event in sorted(report.predictions):
            for pid, gold, pred, score in report.predictions[event]:
                fh.write(f"{event}\t{pid}\t{gold}\t{pred}\t{_fmt(score)}\n")
    return paths


def write_decile_table(path, rows: Sequence[DecileRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(DECILE_HEADER) + "\n")
        for d in rows:
            c = d.confusion
            fh.write(f"{d.event}\t{d.decile}\t{c.tp}\t{c.fp}\t{c.fn}\t{c.tn}\t{_fmt(d.f1)}\t{d.flag}\n")


def load_report(path) -> EvalReport:
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    with open(path, encoding="utf-8") as fh:
        return EvalReport.from_dict(json.load(fh))


def rumour_ratio_rows(ds: Dataset) -> list[tuple[str, int, int, int, float]]:
    """(event, decile, size, rumours, ratio) rows; short events get one decile-0 row."""
    rows = []
    for tl in ds.events:
        labels = tl.require_labels()
        if len(labels) < 10:
            log.warning("event %s has %d posts; reporting it whole instead of by decile", tl.event_id, len(labels))
            bounds = [(0, len(labels))]
            numbering = [0]
        else:
            bounds = decile_bounds(len(labels))
            numbering = range(1, 11)
        for d, (a, b) in zip(numbering, bounds):
            r = sum(1 for y in labels[a:b] if y is Label.RUMOUR)
            rows.append((tl.event_id, d, b - a, r, r / (b - a)))
    return rows


def write_ratio_table(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("event\tdecile\tsize\trumours\tratio\n")
        for event, d, size, r, ratio in rows:
            fh.write(f"{event}\t{d}\t{size}\t{r}\t{_fmt(ratio)}\n")


def decile_rows_from_report(report: EvalReport) -> list[DecileRow]:
    rows = []
    for event in sorted(report.predictions):
        recs = report.predictions[event]
        rows.extend(decile_f1(event, [Label.from_wire(r[1]) for r in recs], [Label.from_wire(r[2]) for r in recs]))
    return rows
