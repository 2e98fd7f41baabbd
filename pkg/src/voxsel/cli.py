"""Command-line surface: synth / extract / rank / select / evaluate /
emotions / spectrogram.

Operational failures print machine-readable JSON on stderr and exit 1;
argparse usage errors exit 2. The VOXSEL_CONFIG environment variable
supplies a default extraction config file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import selection
from .audio import read_wav
from .catalog import label_of
from .classifiers import TrainConfig, make_classifier, save_model
from .dataset import (DEFAULT_SYNTH_CLASSES, build_dataset,
                      load_dataset_csv, load_manifest, save_dataset_csv,
                      synth_corpus)
from .errors import DataError, VoxselError
from .evaluation import CvConfig, cross_validate
from .extraction import ExtractionConfig, read_config
from .filters import FILTER_METHODS
from .spectro import export_image, spectrogram

CONFIG_ENV_VAR = "VOXSEL_CONFIG"

CLASSIFIER_CHOICES = ("knn", "msvm", "mlp", "adaboost", "pca_knn")


def _extraction_config(path_arg):
    if path_arg:
        return read_config(path_arg)
    env = os.environ.get(CONFIG_ENV_VAR)
    if env:
        return read_config(env)
    return ExtractionConfig()


def _train_config(args) -> TrainConfig:
    kwargs = {}
    for name in ("knn_k", "svm_lambda", "svm_epochs", "mlp_hidden", "mlp_lr",
                 "mlp_epochs", "boost_rounds", "pca_dims", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            kwargs[name] = value
    return TrainConfig(**kwargs)


def _parse_subset(text, n_columns):
    """'all', a selection-report JSON path, or comma-separated labels."""
    if text == "all":
        return list(range(1, n_columns + 1))
    if text.endswith(".json") and Path(text).exists():
        return selection.load_selection_report(text).sorted()
    labels = [label_of(part.strip()).index for part in text.split(",") if part.strip()]
    if not labels:
        raise DataError(f"empty feature subset: {text!r}", code="empty-subset")
    return sorted(set(labels))


def cmd_synth(args):
    classes = DEFAULT_SYNTH_CLASSES
    manifest = synth_corpus(args.out, classes=classes,
                            n_per_class=args.n_per_class, seed=args.seed,
                            sample_rate=args.sample_rate,
                            corpus_id=args.corpus_id, jobs=args.jobs)
    print(json.dumps({"corpus": manifest.corpus_id,
                      "files": len(manifest.entries),
                      "manifest": str(Path(args.out) / "manifest.csv")}))
    return 0


def cmd_extract(args):
    manifest = load_manifest(args.manifest, corpus_id=args.corpus_id)
    config = _extraction_config(args.config)
    dataset, errors = build_dataset(manifest, config, jobs=args.jobs)
    save_dataset_csv(args.out, dataset)
    summary = {"rows": len(dataset), "skipped": len(errors), "out": args.out}
    if errors:
        summary["errors"] = [{"path": p, "error": c, "message": m}
                             for p, c, m in errors]
    print(json.dumps(summary, indent=1))
    return 1 if errors else 0


def cmd_rank(args):
    dataset = load_dataset_csv(args.dataset)
    if args.method:
        table = selection.rank_filter(dataset.X, dataset.y, args.method,
                                      source=f"{dataset.corpus_id}/{args.method}")
    else:
        cv = CvConfig.parse(args.cv, seed=args.seed)
        clf = make_classifier(args.classifier, _train_config(args))
        table = selection.rank_individual(
            dataset.X, dataset.y, clf, cv,
            source=f"{dataset.corpus_id}/{args.classifier}")
    Path(args.out).write_text(selection.ranking_to_csv(table))
    if args.json:
        Path(args.json).write_text(
            selection.ranking_to_json(table, args.method or args.classifier) + "\n")
    print(json.dumps({"out": args.out, "entries": len(table)}))
    return 0


STRATEGIES = ("common", "lang-indep", "clf-indep", "special", "full")


def cmd_select(args):
    cfg = selection.SelectionConfig(m=args.m, p=args.p)
    if args.strategy == "full":
        sets = [selection.load_selection_report(p) for p in args.inputs]
        result = selection.fully_independent(sets)
    else:
        tables = [selection.load_ranking_csv(p) for p in args.inputs]
        if args.strategy == "special":
            result = selection.special_features(tables, cfg.p, cfg.m)
        else:
            # common / lang-indep / clf-indep share the same algebra; the
            # strategy name records what varied across the inputs
            if len(tables) < 2:
                raise DataError("need at least two rankings", code="bad-inputs")
            result = selection.common_features(
                [selection.top_m(t, cfg.m) for t in tables])
    report = selection.selection_report(result, args.strategy, args.inputs,
                                        m=cfg.m, p=cfg.p)
    Path(args.out).write_text(report + "\n")
    print(json.dumps({"out": args.out, "n_selected": len(result)}))
    return 0


def cmd_evaluate(args):
    dataset = load_dataset_csv(args.dataset)
    labels = _parse_subset(args.subset, dataset.X.shape[1])
    columns = [lab - 1 for lab in labels]
    cv = CvConfig.parse(args.cv, seed=args.seed)
    clf = make_classifier(args.classifier, _train_config(args))
    report = cross_validate(dataset.X, dataset.y, clf, cv, columns=columns,
                            meta={"classifier": args.classifier,
                                  "subset": [f"x{lab}" for lab in labels],
                                  "dataset": str(args.dataset)})
    Path(args.out).write_text(report.to_json() + "\n")
    if args.confusion:
        Path(args.confusion).write_text(report.confusion_csv())
    if args.save_model:
        model = clf.fit(dataset.X[:, columns], dataset.y)
        save_model(args.save_model, model, feature_subset=labels)
    print(json.dumps({"out": args.out, "accuracy": report.accuracy}))
    return 0


def cmd_emotions(args):
    dataset = load_dataset_csv(args.dataset)
    emotions = [args.emotion] if args.emotion else dataset.classes
    reports = [selection.per_emotion_analysis(dataset.X, dataset.y, emo,
                                              rounds=args.rounds)
               for emo in emotions]
    doc = {"dataset": str(args.dataset),
           "rounds": args.rounds,
           "emotions": [r.to_doc() for r in reports]}
    Path(args.out).write_text(json.dumps(doc, indent=1) + "\n")
    print(json.dumps({"out": args.out,
                      "loo_accuracy": {r.emotion: r.loo_accuracy
                                       for r in reports}}))
    return 0


def cmd_spectrogram(args):
    signal = read_wav(args.wav)
    sp = spectrogram(signal, frame_ms=args.frame_ms, hop_ms=args.hop_ms)
    export_image(sp, args.out, side=args.side)
    print(json.dumps({"out": args.out, "side": args.side}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxsel",
        description="Paralinguistic feature extraction and "
                    "language/classifier-independent feature selection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n-per-class", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample-rate", type=int, default=16000)
    p.add_argument("--corpus-id", default="synthetic")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="manifest of WAVs -> dataset CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--corpus-id", default="")
    p.add_argument("--config", default=None,
                   help=f"extraction config file (default ${CONFIG_ENV_VAR})")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("rank", help="rank features on a dataset")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--method", choices=FILTER_METHODS)
    group.add_argument("--classifier", choices=("knn", "msvm", "mlp"))
    p.add_argument("--dataset", required=True)
    p.add_argument("--cv", default="kfold:10")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--json", default=None, help="also write a JSON report")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("select", help="set algebra over ranking files")
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("-m", type=int, default=selection.DEFAULT_TOP_M)
    p.add_argument("-p", type=int, default=selection.DEFAULT_TOP_P)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("evaluate", help="cross-validated evaluation")
    p.add_argument("--dataset", required=True)
    p.add_argument("--subset", default="all",
                   help="'all', selection JSON, or comma-separated labels")
    p.add_argument("--classifier", choices=CLASSIFIER_CHOICES, required=True)
    p.add_argument("--cv", default="kfold:10")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--confusion", default=None, help="confusion matrix CSV")
    p.add_argument("--save-model", default=None,
                   help="also fit on the full dataset and save model JSON")
    for name, typ in (("knn_k", int), ("svm_lambda", float), ("svm_epochs", int),
                      ("mlp_hidden", int), ("mlp_lr", float), ("mlp_epochs", int),
                      ("boost_rounds", int), ("pca_dims", int)):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ,
                       default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("emotions", help="per-emotion boosted-stump analysis")
    p.add_argument("--dataset", required=True)
    p.add_argument("--emotion", default=None)
    p.add_argument("--rounds", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emotions)

    p = sub.add_parser("spectrogram", help="WAV -> grayscale PGM")
    p.add_argument("wav")
    p.add_argument("--out", required=True)
    p.add_argument("--side", type=int, default=227)
    p.add_argument("--frame-ms", type=float, default=25.0)
    p.add_argument("--hop-ms", type=float, default=10.0)
    p.set_defaults(func=cmd_spectrogram)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VoxselError as exc:
        json.dump({"error": exc.code, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
