"""Feature ranking and the independence set algebra.

Rankings come from two routes: per-feature cross-validated accuracy of a
classifier (the wrapper route) or one of the filter methods. Top-m
truncation plus intersections across corpora/classifiers produce
language-independent, classifier-independent and fully independent
subsets; unions of top-p prefixes produce the "special" subsets.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import filters
from .catalog import N_FEATURES, FEATURE_NAMES, label_of
from .classifiers import StumpAdaBoost
from .errors import DataError, TrainingError
from .evaluation import CvConfig, cross_validate
from .validation import check_X_y

DEFAULT_TOP_M = 22
DEFAULT_TOP_P = 10


@dataclass(frozen=True)
class SelectionConfig:
    m: int = DEFAULT_TOP_M
    p: int = DEFAULT_TOP_P
    n_features: int = N_FEATURES

    def __post_init__(self):
        if not (0 < self.p < self.m <= self.n_features):
            raise DataError("require 0 < p < m <= n_features", code="bad-config")


@dataclass(frozen=True)
class FeatureSet:
    """Unordered set of 1-based feature labels with a derivation trace."""

    labels: frozenset
    provenance: str = ""

    def __post_init__(self):
        labels = frozenset(int(x) for x in self.labels)
        if any(not (1 <= x <= N_FEATURES) for x in labels):
            raise DataError("feature label out of range", code="bad-label")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    def __contains__(self, item):
        return int(item) in self.labels

    def sorted(self) -> list[int]:
        return sorted(self.labels)

    def names(self) -> list[str]:
        return [FEATURE_NAMES[i] for i in self.sorted()]


@dataclass(frozen=True)
class RankingTable:
    """Ordered (label, score) entries, scores non-increasing.

    Produced rankings cover all 84 labels; tables loaded from truncated
    fixture rows may be shorter. Ties always resolve by ascending label.
    """

    entries: tuple
    source: str = ""

    def __post_init__(self):
        entries = tuple((int(lab), float(score)) for lab, score in self.entries)
        labels = [lab for lab, _ in entries]
        if len(set(labels)) != len(labels):
            raise DataError("duplicate labels in ranking", code="bad-ranking")
        if any(not (1 <= lab <= N_FEATURES) for lab in labels):
            raise DataError("feature label out of range", code="bad-label")
        scores = [s for _, s in entries]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise DataError("ranking scores must be non-increasing",
                            code="bad-ranking")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    @property
    def labels(self) -> list[int]:
        return [lab for lab, _ in self.entries]

    @property
    def is_complete(self) -> bool:
        return len(self.entries) == N_FEATURES


def make_ranking(scores, source: str = "") -> RankingTable:
    """Build a full table from per-feature scores (index 0 is label 1),
    sorted by score descending with ties by ascending label."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (N_FEATURES,):
        raise DataError(f"expected {N_FEATURES} scores", code="bad-ranking")
    order = np.lexsort((np.arange(1, N_FEATURES + 1), -scores))
    return RankingTable(entries=tuple((int(i + 1), float(scores[i])) for i in order),
                        source=source)


def ranking_from_labels(labels, source: str = "") -> RankingTable:
    """Table from an ordered label list (positional placeholder scores)."""
    n = len(labels)
    return RankingTable(entries=tuple((lab, float(n - i)) for i, lab in enumerate(labels)),
                        source=source)


# --------------------------------------------------------------------------
# ranking routes
# --------------------------------------------------------------------------

def rank_individual(X, y, estimator, cv: CvConfig, source: str = "") -> RankingTable:
    """Rank every feature by the cross-validated accuracy a classifier
    reaches on that feature alone."""
    X, y = check_X_y(X, y)
    if X.shape[1] != N_FEATURES:
        raise DataError(f"expected {N_FEATURES} feature columns", code="bad-matrix")
    scores = np.zeros(N_FEATURES)
    for j in range(N_FEATURES):
        report = cross_validate(X, y, estimator, cv, columns=[j])
        scores[j] = report.accuracy
    return make_ranking(scores, source=source or "individual")


def rank_filter(X, y, method: str, source: str = "") -> RankingTable:
    """Rank every feature with one of the GR / IG / RF / SU filters."""
    X, y = check_X_y(X, y)
    if X.shape[1] != N_FEATURES:
        raise DataError(f"expected {N_FEATURES} feature columns", code="bad-matrix")
    scores = filters.filter_scores(X, y, method)
    return make_ranking(scores, source=source or f"filter:{method.upper()}")


# --------------------------------------------------------------------------
# set algebra
# --------------------------------------------------------------------------

def top_m(ranking: RankingTable, m: int) -> FeatureSet:
    """First m labels of the table."""
    if not (0 < m <= len(ranking)):
        raise DataError(f"m must be in 1..{len(ranking)}", code="bad-m")
    return FeatureSet(labels=frozenset(ranking.labels[:m]),
                      provenance=f"top{m}({ranking.source})")


def common_features(sets: list[FeatureSet]) -> FeatureSet:
    """Intersection of at least two feature sets."""
    if len(sets) < 2:
        raise DataError("need at least two sets to intersect", code="bad-inputs")
    labels = frozenset.intersection(*(s.labels for s in sets))
    prov = " & ".join(s.provenance or "?" for s in sets)
    return FeatureSet(labels=labels, provenance=f"common({prov})")


def special_features(rankings: list[RankingTable], p: int,
                     m: int = DEFAULT_TOP_M) -> FeatureSet:
    """Union of every table's top-p prefix (p below the top-m cutoff)."""
    if p >= m:
        raise DataError("require p < m", code="bad-p")
    if not rankings:
        raise DataError("need at least one ranking", code="bad-inputs")
    union = frozenset()
    provs = []
    for r in rankings:
        sub = top_m(r, p)
        union |= sub.labels
        provs.append(sub.provenance)
    return FeatureSet(labels=union, provenance=f"special({' | '.join(provs)})")


def language_independent(per_dataset: dict, m: int = DEFAULT_TOP_M) -> FeatureSet:
    """Intersect the top-m sets across datasets for one fixed classifier."""
    if len(per_dataset) < 2:
        raise DataError("need rankings for at least two datasets",
                        code="bad-inputs")
    return common_features([top_m(per_dataset[k], m) for k in sorted(per_dataset)])


def classifier_independent(per_classifier: dict, m: int = DEFAULT_TOP_M) -> FeatureSet:
    """Intersect the top-m sets across classifiers for one fixed dataset."""
    if len(per_classifier) < 2:
        raise DataError("need rankings for at least two classifiers",
                        code="bad-inputs")
    return common_features([top_m(per_classifier[k], m) for k in sorted(per_classifier)])


def fully_independent(sets: list[FeatureSet]) -> FeatureSet:
    """Intersect language-independent sets across classifiers (equal, by
    set algebra, to intersecting classifier-independent sets across
    datasets)."""
    if len(sets) < 2:
        raise DataError("need at least two sets", code="bad-inputs")
    return common_features(sets)


# --------------------------------------------------------------------------
# per-emotion analysis
# --------------------------------------------------------------------------

@dataclass
class EmotionReport:
    emotion: str
    weighted_features: list  # (label, cumulative alpha), descending
    loo_accuracy: float
    n_positive: int
    n_total: int

    def to_doc(self):
        return {
            "emotion": self.emotion,
            "weighted_features": [
                {"label": f"x{lab}", "name": FEATURE_NAMES[lab], "weight": w}
                for lab, w in self.weighted_features],
            "loo_accuracy": self.loo_accuracy,
            "n_positive": self.n_positive,
            "n_total": self.n_total,
        }


def per_emotion_analysis(X, y, emotion, rounds: int = 50) -> EmotionReport:
    """One-vs-rest AdaBoost picture of which features mark one emotion.

    Feature weights are the cumulative stump votes on the full relabeled
    dataset; the recognition rate comes from leave-one-out evaluation.
    """
    X, y = check_X_y(X, y)
    y = np.asarray([str(v) for v in y])
    emotion = str(emotion)
    mask = y == emotion
    if not mask.any():
        raise DataError(f"emotion {emotion!r} not present", code="unknown-class")
    if mask.all():
        raise DataError(f"emotion {emotion!r} covers every sample",
                        code="single-class")
    target = np.where(mask, 1, -1)

    full = StumpAdaBoost(rounds=rounds).fit(X, target)
    weights = full.feature_weights_
    picked = np.flatnonzero(weights > 0)
    order = picked[np.lexsort((picked, -weights[picked]))]
    weighted = [(int(j + 1), float(weights[j])) for j in order]

    correct = 0
    for i in range(X.shape[0]):
        keep = np.arange(X.shape[0]) != i
        try:
            model = StumpAdaBoost(rounds=rounds).fit(X[keep], target[keep])
        except TrainingError:
            warnings.warn(f"leave-one-out fold {i}: no useful stump; counted wrong")
            continue
        if model.predict(X[i:i + 1])[0] == target[i]:
            correct += 1
    return EmotionReport(
        emotion=emotion,
        weighted_features=weighted,
        loo_accuracy=correct / X.shape[0],
        n_positive=int(mask.sum()),
        n_total=int(X.shape[0]),
    )


# --------------------------------------------------------------------------
# fixture and report I/O
# --------------------------------------------------------------------------

def load_ranking_csv(path_or_text) -> RankingTable:
    """Load a ranking CSV with header rank,feature_label,score."""
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        text = path_or_text
        source = "<inline>"
    else:
        text = Path(path_or_text).read_text()
        source = Path(path_or_text).stem
    rows = list(csv.DictReader(text.splitlines()))
    if not rows:
        raise DataError("empty ranking file", code="bad-ranking")
    try:
        parsed = [(int(r["rank"]), label_of(r["feature_label"]).index,
                   float(r["score"])) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed ranking file: {exc}", code="bad-ranking") from exc
    parsed.sort(key=lambda t: t[0])
    # trust the file's rank order; scores must already be consistent with it
    return RankingTable(entries=tuple((lab, score) for _, lab, score in parsed),
                        source=source)


def ranking_to_csv(ranking: RankingTable) -> str:
    lines = ["rank,feature_label,score"]
    for rank, (lab, score) in enumerate(ranking.entries, start=1):
        lines.append(f"{rank},x{lab},{score:.9g}")
    return "\n".join(lines) + "\n"


def ranking_to_json(ranking: RankingTable, method: str = "") -> str:
    doc = {
        "method": method or ranking.source,
        "entries": [{"label": f"x{lab}", "name": FEATURE_NAMES[lab],
                     "score": score} for lab, score in ranking.entries],
    }
    return json.dumps(doc, indent=1)


def selection_report(result: FeatureSet, strategy: str, inputs: list,
                     m: int | None = None, p: int | None = None) -> str:
    doc = {
        "strategy": strategy,
        "inputs": [str(i) for i in inputs],
        "m": m,
        "p": p,
        "result_labels": [f"x{lab}" for lab in result.sorted()],
        "result_names": result.names(),
        "provenance": result.provenance,
    }
    return json.dumps(doc, indent=1)


def load_selection_report(path) -> FeatureSet:
    doc = json.loads(Path(path).read_text())
    labels = [label_of(lab).index for lab in doc["result_labels"]]
    return FeatureSet(labels=frozenset(labels),
                      provenance=doc.get("provenance", str(path)))


def fixture_dir() -> Path:
    return Path(resources.files("voxsel") / "fixtures")


def load_fixture_ranking(name: str) -> RankingTable:
    """Bundled ranking by name, e.g. 'polish_knn'."""
    return load_ranking_csv(fixture_dir() / "rankings" / f"{name}.csv")


def load_fixture_category(name: str) -> dict:
    """Bundled selection table by name, e.g. 'lang_indep_knn'."""
    return json.loads((fixture_dir() / "categories" / f"{name}.json").read_text())
