"""Cross-validation, confusion matrices and recognition-rate reports.

Works on plain (X, y) arrays with 0-based columns; the selection layer
translates 1-based feature labels. Standardization happens inside each
estimator's ``fit``, so the statistics always come from the training fold
only.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .errors import DataError, TrainingError
from .validation import check_X_y

SCHEME_KFOLD = "kfold"
SCHEME_LOO = "leave_one_out"


@dataclass(frozen=True)
class CvConfig:
    scheme: str = SCHEME_KFOLD
    k: int = 10
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if self.scheme not in (SCHEME_KFOLD, SCHEME_LOO):
            raise DataError(f"unknown cv scheme: {self.scheme!r}", code="bad-cv")
        if self.scheme == SCHEME_KFOLD and self.k < 2:
            raise DataError("kfold needs k >= 2", code="bad-cv")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "CvConfig":
        """Parse 'kfold:10' or 'loo'."""
        text = text.strip().lower()
        if text in ("loo", "leave_one_out", "leave-one-out"):
            return cls(scheme=SCHEME_LOO, seed=seed)
        if text.startswith("kfold"):
            _, _, arg = text.partition(":")
            return cls(scheme=SCHEME_KFOLD, k=int(arg) if arg else 10, seed=seed)
        raise DataError(f"cannot parse cv spec: {text!r}", code="bad-cv")


def kfold_split(n: int, cv: CvConfig, labels=None) -> np.ndarray:
    """Fold id per sample.

    Stratified (the default): within each class the shuffled indices are
    dealt round-robin, so per-class fold sizes differ by at most one. A
    class smaller than k forces an unstratified fallback with a warning.
    """
    if cv.scheme == SCHEME_LOO:
        return np.arange(n)
    k = cv.k
    if n < k:
        raise DataError(f"cannot make {k} folds from {n} samples", code="bad-cv")
    rng = np.random.default_rng(cv.seed)
    folds = np.empty(n, dtype=np.intp)
    stratified = cv.stratified and labels is not None
    if stratified:
        labels = np.asarray(labels)
        _, codes = np.unique(labels, return_inverse=True)
        counts = np.bincount(codes)
        if counts.min() < k:
            warnings.warn("a class has fewer samples than folds; "
                          "falling back to unstratified splitting")
            stratified = False
    if stratified:
        for c in range(counts.size):
            idx = np.flatnonzero(codes == c)
            rng.shuffle(idx)
            folds[idx] = np.arange(idx.size) % k
    else:
        idx = rng.permutation(n)
        folds[idx] = np.arange(n) % k
    return folds


def per_class_rates(confusion: np.ndarray):
    """(per-class recall, macro average, empty-row flags) from a confusion
    matrix; empty classes report recall 0 with the flag set."""
    confusion = np.asarray(confusion, dtype=np.float64)
    row_sums = confusion.sum(axis=1)
    empty = row_sums == 0
    recalls = np.zeros(confusion.shape[0])
    np.divide(np.diag(confusion), row_sums, out=recalls, where=~empty)
    macro = float(recalls[~empty].mean()) if (~empty).any() else 0.0
    return recalls, macro, empty


@dataclass
class EvalReport:
    classes: list
    confusion: np.ndarray
    accuracy: float
    fold_accuracies: list[float]
    per_class_recall: np.ndarray
    macro_recall: float
    empty_classes: list
    skipped_folds: int = 0
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {
            "classes": [str(c) for c in self.classes],
            "confusion": self.confusion.astype(int).tolist(),
            "accuracy": self.accuracy,
            "fold_accuracies": self.fold_accuracies,
            "mean_fold_accuracy": (float(np.mean(self.fold_accuracies))
                                   if self.fold_accuracies else 0.0),
            "per_class_recall": self.per_class_recall.tolist(),
            "macro_recall": self.macro_recall,
            "empty_classes": [str(c) for c in self.empty_classes],
            "skipped_folds": self.skipped_folds,
            "meta": self.meta,
        }
        return json.dumps(doc, indent=1)

    def confusion_csv(self) -> str:
        names = [str(c) for c in self.classes]
        lines = ["true\\predicted," + ",".join(names)]
        for name, row in zip(names, self.confusion.astype(int)):
            lines.append(name + "," + ",".join(str(v) for v in row))
        return "\n".join(lines) + "\n"


def cross_validate(X, y, estimator, cv: CvConfig, columns=None,
                   meta=None) -> EvalReport:
    """Cross-validated evaluation of an (unfitted) estimator prototype.

    ``columns`` optionally restricts X to those 0-based columns before any
    fitting. Folds whose training split is single-class are skipped with a
    warning.
    """
    X, y = check_X_y(X, y)
    if columns is not None:
        columns = list(columns)
        if not columns:
            raise DataError("empty feature subset", code="empty-subset")
        X = X[:, columns]
    classes = np.unique(y)
    if classes.size < 2:
        raise DataError("need at least two classes", code="single-class")

    folds = kfold_split(X.shape[0], cv, labels=y)
    class_pos = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((classes.size, classes.size))
    fold_accuracies = []
    skipped = 0
    for f in np.unique(folds):
        test = folds == f
        train = ~test
        if np.unique(y[train]).size < 2:
            warnings.warn(f"fold {f}: single-class training split skipped")
            skipped += 1
            continue
        try:
            model = clone(estimator).fit(X[train], y[train])
        except TrainingError as exc:
            warnings.warn(f"fold {f}: {exc}")
            skipped += 1
            continue
        pred = model.predict(X[test])
        for yt, yp in zip(y[test], pred):
            confusion[class_pos[yt], class_pos[yp]] += 1
        fold_accuracies.append(float((pred == y[test]).mean()))

    total = confusion.sum()
    if total == 0:
        raise DataError("every fold failed to train", code="all-folds-failed")
    accuracy = float(np.trace(confusion) / total)
    recalls, macro, empty = per_class_rates(confusion)
    return EvalReport(
        classes=list(classes),
        confusion=confusion,
        accuracy=accuracy,
        fold_accuracies=fold_accuracies,
        per_class_recall=recalls,
        macro_recall=macro,
        empty_classes=[c for c, e in zip(classes, empty) if e],
        skipped_folds=skipped,
        meta=dict(meta or {}),
    )
