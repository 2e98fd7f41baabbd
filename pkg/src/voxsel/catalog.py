"""Canonical catalogue of the 84 paralinguistic features.

Feature indices are 1-based and fixed: downstream ranking files, selection
reports and dataset CSV columns all key off this table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DataError

N_FEATURES = 84
N_CEPSTRA = 13  # MFCC and filter-bank blocks both have 13 channels


@dataclass(frozen=True, order=True)
class FeatureLabel:
    index: int  # 1..84
    name: str


def _build_names():
    names = {}
    for i, stat in enumerate(("Max", "Min", "Std", "Mean", "Median")):
        for j, formant in enumerate(("F1", "F2", "F3")):
            names[3 * i + j + 1] = f"{stat}({formant})"
    for i, stat in enumerate(("Max", "Min", "Std", "Mean", "Median")):
        names[16 + i] = f"Mean({stat}(F))"
    names[21] = "Intensity"
    names[22] = "Std"
    names[23] = "Autocorrelation"
    names[24] = "Pitch"
    names[25] = "HNR"
    names[26] = "Min"
    names[27] = "Mean"
    names[28] = "Variance"
    names[29] = "Max"
    names[30] = "Percentile"
    names[31] = "ZCR"
    names[32] = "ZCR_density"
    for k in range(1, N_CEPSTRA + 1):
        names[32 + k] = f"MFCC_{k}"
        names[45 + k] = f"Mean(MFCC_{k})"
        names[58 + k] = f"FBE_{k}"
        names[71 + k] = f"Mean(FBE_{k})"
    assert sorted(names) == list(range(1, N_FEATURES + 1))
    return names


FEATURE_NAMES = _build_names()
_NAME_TO_INDEX = {name: idx for idx, name in FEATURE_NAMES.items()}

_XLABEL_RE = re.compile(r"^x(\d{1,2})$")


def label_of(name: str) -> FeatureLabel:
    """Look up a feature by its canonical name (or 'xNN' shorthand)."""
    if name in _NAME_TO_INDEX:
        idx = _NAME_TO_INDEX[name]
        return FeatureLabel(index=idx, name=name)
    m = _XLABEL_RE.match(name.strip())
    if m:
        return label_at(int(m.group(1)))
    raise DataError(f"unknown feature name: {name!r}", code="unknown-feature")


def label_at(index: int) -> FeatureLabel:
    """Look up a feature by its 1-based index."""
    if index not in FEATURE_NAMES:
        raise DataError(f"feature index out of range: {index}",
                        code="unknown-feature")
    return FeatureLabel(index=index, name=FEATURE_NAMES[index])


def all_labels() -> list[FeatureLabel]:
    return [label_at(i) for i in range(1, N_FEATURES + 1)]
