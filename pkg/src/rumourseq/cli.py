"""Command-line entry point: ``rumourseq ingest | run | analyze``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import shutil
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields, replace
from io import StringIO
from pathlib import Path
from typing import Optional

from . import evaluation, ingest
from .crf import NumericalError
from .data import DataError, Dataset
from .tagger import Tagger

log = logging.getLogger("rumourseq")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = ""
    format: str = "normalized"  # pheme | normalized
    output: str = "runs/latest"
    jobs: int = 1
    tag_file: str = ""
    settings: evaluation.ExperimentSettings = field(default_factory=evaluation.ExperimentSettings)

    def __post_init__(self):
        if self.format not in ("pheme", "normalized"):
            raise UsageError(f"dataset format must be 'pheme' or 'normalized', not {self.format!r}")
        if self.jobs < 1:
            raise UsageError("jobs must be >= 1")

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        s = asdict(self.settings)
        emb = s.pop("embedding")
        cp["experiment"] = {
            "dataset": self.dataset, "format": self.format, "output": self.output,
            "jobs": str(self.jobs), "tag_file": self.tag_file,
            **{k: str(v) for k, v in s.items()},
        }
        # per-fold embedding seeds derive from the root seed
        cp["embedding"] = {k: str(v) for k, v in emb.items() if k != "seed"}
        buf = StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, path) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        if not cp.read(path, encoding="utf-8"):
            raise UsageError(f"cannot read config file {path}")
        return cls.from_mapping(dict(cp["experiment"]) if cp.has_section("experiment") else {},
                                dict(cp["embedding"]) if cp.has_section("embedding") else {})

    @classmethod
    def from_mapping(cls, exp: dict, emb: dict, base: Optional["ExperimentConfig"] = None) -> "ExperimentConfig":
        base = base or cls()
        try:
            emb_cfg = _coerce(base.settings.embedding, emb)
            top_keys = {"dataset", "format", "output", "jobs", "tag_file"}
            settings = _coerce(base.settings, {k: v for k, v in exp.items() if k not in top_keys})
            settings = replace(settings, embedding=emb_cfg)
            top = _coerce(base, {k: v for k, v in exp.items() if k in top_keys})
            return replace(top, settings=settings)
        except (TypeError, ValueError) as exc:
            raise UsageError(str(exc)) from exc


def _coerce(obj, values: dict):
    known = {f.name: f for f in fields(obj)}
    updates = {}
    for key, raw in values.items():
        if key not in known:
            raise UsageError(f"unknown config key {key!r}")
        current = getattr(obj, key)
        if isinstance(current, bool):
            updates[key] = str(raw).lower() in ("1", "true", "yes", "on")
        elif isinstance(current, (int, float, str)):
            updates[key] = type(current)(raw)
        else:
            raise UsageError(f"config key {key!r} cannot be set directly")
    return replace(obj, **updates)


def _load_dataset(path: str, fmt: str) -> Dataset:
    if not path:
        raise UsageError("no dataset given")
    if not Path(path).exists():
        raise DataError(f"dataset path {path} does not exist")
    return ingest.load_pheme(path) if fmt == "pheme" else ingest.load_normalized(path)


def cmd_ingest(args) -> int:
    if bool(args.pheme) == bool(args.normalized):
        raise UsageError("give exactly one of --pheme or --normalized")
    ds = ingest.load_pheme(args.pheme) if args.pheme else ingest.load_normalized(args.normalized)
    if args.min_retweets:
        ds = ingest.filter_by_retweets(ds, args.min_retweets)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    ingest.export_normalized(ds, out)
    summary = ingest.format_summary(ingest.summary_table(ds))
    summary_path = Path(args.summary) if args.summary else out.with_name(out.name + ".summary.tsv")
    summary_path.write_text(summary, encoding="utf-8")
    sys.stdout.write(summary)
    return 0


_RUN_FLAGS = {
    "dataset": "dataset", "format": "format", "out": "output", "jobs": "jobs", "tag_file": "tag_file",
    "classifier": "classifier", "features": "features", "seed": "seed", "crf_lambda": "crf_lambda",
    "maxent_lambda": "maxent_lambda", "max_iter": "max_iter", "tol": "tol", "svm_c": "svm_c",
    "svm_epochs": "svm_epochs", "nb_var_smoothing": "nb_var_smoothing", "enquiry_variant": "enquiry_variant",
    "embedding_corpus": "embedding_corpus",
}
_EMB_FLAGS = {"dim": "dim", "window": "window", "negatives": "negatives", "epochs": "epochs",
              "learning_rate": "learning_rate", "min_count": "min_count", "workers": "workers"}


def resolve_run_config(args) -> ExperimentConfig:
    base = ExperimentConfig.from_ini(args.config) if args.config else ExperimentConfig()
    exp = {dst: getattr(args, src) for src, dst in _RUN_FLAGS.items() if getattr(args, src) is not None}
    emb = {dst: getattr(args, src) for src, dst in _EMB_FLAGS.items() if getattr(args, src) is not None}
    if args.fast:
        emb.setdefault("dim", 50)
    return ExperimentConfig.from_mapping(exp, emb, base)


def cmd_run(args) -> int:
    cfg = resolve_run_config(args)
    ds = _load_dataset(cfg.dataset, cfg.format)
    tagger = Tagger.from_file(cfg.tag_file) if cfg.tag_file else None
    report = evaluation.run_experiment(ds, cfg.settings, tagger, jobs=cfg.jobs)
    out = Path(cfg.output)
    # write into a scratch dir first so a failure leaves no partial output
    out.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=".partial-", dir=out.parent))
    try:
        evaluation.emit_report(report, scratch)
        (scratch / "config.ini").write_text(cfg.to_ini(), encoding="utf-8")
        if out.exists():
            shutil.rmtree(out)
        scratch.rename(out)
    finally:
        if scratch.exists():
            shutil.rmtree(scratch)
    p, r, f = report.micro
    print(f"classifier={cfg.settings.classifier} features={cfg.settings.features} P={p:.3f} R={r:.3f} F1={f:.3f}")
    return 0


def cmd_analyze(args) -> int:
    if not args.dataset and not args.report:
        raise UsageError("give --dataset and/or --report")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.dataset:
        ds = _load_dataset(args.dataset, args.format)
        rows = evaluation.rumour_ratio_rows(ds)
        evaluation.write_ratio_table(out / "rumour_ratios.tsv", rows)
        print(f"wrote {len(rows)} rumour-ratio rows to {out / 'rumour_ratios.tsv'}")
    if args.report:
        if not Path(args.report).exists():
            raise DataError(f"report {args.report} does not exist")
        rows = evaluation.decile_rows_from_report(evaluation.load_report(args.report))
        evaluation.write_decile_table(out / "decile_f1.tsv", rows)
        print(f"wrote {len(rows)} decile-F1 rows to {out / 'decile_f1.tsv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rumourseq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a dataset to the normalized format and summarise it")
    p.add_argument("--pheme", help="root of the PHEME rumour/non-rumour release")
    p.add_argument("--normalized", help="an existing normalized file")
    p.add_argument("--out", required=True, help="normalized output file")
    p.add_argument("--summary", help="per-event count table (default: <out>.summary.tsv)")
    p.add_argument("--min-retweets", type=int, default=0, help="keep posts with at least this many retweets")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("run", help="leave-one-event-out experiment")
    p.add_argument("--config", help="INI config file; flags override its values")
    p.add_argument("--dataset")
    p.add_argument("--format", choices=("pheme", "normalized"))
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="folds run in parallel")
    p.add_argument("--tag-file", dest="tag_file", help="token<TAB>tag overrides for the POS tagger")
    p.add_argument("--classifier", choices=evaluation.CLASSIFIERS)
    p.add_argument("--features", choices=("content", "social", "both"))
    p.add_argument("--seed", type=int)
    p.add_argument("--crf-lambda", dest="crf_lambda", type=float)
    p.add_argument("--maxent-lambda", dest="maxent_lambda", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--svm-c", dest="svm_c", type=float)
    p.add_argument("--svm-epochs", dest="svm_epochs", type=int)
    p.add_argument("--nb-var-smoothing", dest="nb_var_smoothing", type=float)
    p.add_argument("--enquiry-variant", dest="enquiry_variant", choices=("verbatim", "corrected"))
    p.add_argument("--embedding-corpus", dest="embedding_corpus", choices=("source", "source+replies"))
    p.add_argument("--dim", type=int, help="word-vector dimensionality (default 300)")
    p.add_argument("--window", type=int)
    p.add_argument("--negatives", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--workers", type=int, help="embedding threads; >1 is faster but not reproducible")
    p.add_argument("--fast", action="store_true", help="50-dimensional word vectors unless --dim is given")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="rumour-ratio and per-decile F1 tables")
    p.add_argument("--dataset")
    p.add_argument("--format", choices=("pheme", "normalized"), default="normalized")
    p.add_argument("--report", help="report.json or a run output directory")
    p.add_argument("--out", required=True, help="output directory for the tables")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
