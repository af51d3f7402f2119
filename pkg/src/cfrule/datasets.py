"""Datasets: synthetic rule tasks, UCI promoter and hepatitis loaders, splits.

Everything is encoded bipolar: +1 true, -1 false, 0 for a missing value.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .encoder import RuleSet
from .model import Instance

BASES = "agct"
DEFAULT_PROMOTER_POSITIONS = tuple(range(-50, 0)) + tuple(range(1, 8))


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    provenance: str = ""
    row_ids: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=bool).ravel()
        if X.ndim != 2:
            raise ValueError("X must be two-dimensional")
        if X.shape[0] != y.size:
            raise ValueError(f"{X.shape[0]} rows but {y.size} labels")
        if X.shape[1] != len(self.feature_names):
            raise ValueError(f"{X.shape[1]} features but {len(self.feature_names)} names")
        if X.size and (X.min() < -1.0 or X.max() > 1.0):
            raise ValueError("features must lie in [-1, 1]")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "row_ids", tuple(self.row_ids))

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def instances(self) -> list[Instance]:
        return [Instance(x, bool(lab)) for x, lab in zip(self.X, self.y)]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        ids = tuple(self.row_ids[i] for i in idx) if self.row_ids else ()
        return Dataset(self.X[idx], self.y[idx], self.feature_names, self.provenance, ids)

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(list(self.feature_names) + ["label"])
        for x, lab in zip(self.X, self.y):
            out.writerow([_fmt(v) for v in x] + [int(lab)])
        return buf.getvalue()

    def save_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def load_csv(path, label_column: str = "label") -> Dataset:
    """Read the CSV layout written by :meth:`Dataset.save_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if label_column not in header:
        raise ValueError(f"{path}: no {label_column!r} column")
    li = header.index(label_column)
    names = [h for i, h in enumerate(header) if i != li]
    X, y = [], []
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            X.append([float(v) for i, v in enumerate(row) if i != li])
            y.append(int(float(row[li])) != 0)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return Dataset(np.array(X).reshape(len(X), len(names)), np.array(y, dtype=bool),
                   names, provenance=str(path))


def generate_synthetic(rules: RuleSet, n: int, d: Optional[int] = None, seed=0) -> Dataset:
    """``n`` uniform random bipolar instances labelled by ``rules``."""
    d = rules.dim if d is None else d
    if n < 1:
        raise ValueError("need n >= 1 instances")
    if any(r.max_index >= d for r in rules):
        raise ValueError(f"rule set references features beyond d={d}")
    rng = np.random.default_rng(seed)
    X = rng.choice(np.array([-1.0, 1.0]), size=(n, d))
    if rules.dim != d:
        rules = RuleSet(rules.rules, d)
    return Dataset(X, rules.label_many(X), [f"x{i + 1}" for i in range(d)],
                   provenance=f"synthetic(n={n}, d={d}, seed={seed})")


# -- promoters ----------------------------------------------------------------

def promoter_feature_names(positions: Sequence[int] = DEFAULT_PROMOTER_POSITIONS) -> list[str]:
    return [f"@{p:+d}={b.upper()}" for p in positions for b in BASES]


def _parse_promoter_line(line: str) -> tuple[str, str, str]:
    if "," in line:
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected 'class,name,sequence', got {len(parts)} fields")
    else:
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"expected class, name and sequence, got {len(parts)} fields")
    cls, name, seq = parts
    return cls, name, "".join(seq.split()).lower()


def load_promoters(path, positions: Sequence[int] = DEFAULT_PROMOTER_POSITIONS) -> Dataset:
    """UCI promoter file -> 4 bipolar bits per position (A, G, C, T order).

    The class symbol ``+`` marks a positive instance.  Positions default to
    -50..-1 then +1..+7, naming features like ``@-35=T``.
    """
    positions = tuple(positions)
    length = len(positions)
    X, y, ids = [], [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                cls, name, seq = _parse_promoter_line(line)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if cls not in ("+", "-"):
                raise ValueError(f"{path}:{lineno}: class must be '+' or '-', got {cls!r}")
            if len(seq) != length:
                raise ValueError(f"{path}:{lineno}: sequence has {len(seq)} bases, "
                                 f"expected {length}")
            bad = set(seq) - set(BASES)
            if bad:
                raise ValueError(f"{path}:{lineno}: unknown base(s) {sorted(bad)}")
            bits = -np.ones((length, 4))
            bits[np.arange(length), [BASES.index(b) for b in seq]] = 1.0
            X.append(bits.ravel())
            y.append(cls == "+")
            ids.append(name)
    if not X:
        raise ValueError(f"{path}: no instances")
    return Dataset(np.array(X), np.array(y), promoter_feature_names(positions),
                   provenance=str(path), row_ids=ids)


# -- hepatitis ----------------------------------------------------------------

HEPATITIS_ATTRIBUTES = (
    "AGE", "SEX", "STEROID", "ANTIVIRALS", "FATIGUE", "MALAISE", "ANOREXIA",
    "LIVER BIG", "LIVER FIRM", "SPLEEN PALPABLE", "SPIDERS", "ASCITES", "VARICES",
    "BILIRUBIN", "ALK PHOSPHATE", "SGOT", "ALBUMIN", "PROTIME", "HISTOLOGY",
)
HEPATITIS_CONTINUOUS = ("AGE", "BILIRUBIN", "ALK PHOSPHATE", "SGOT", "ALBUMIN", "PROTIME")
HEPATITIS_VALUE_NAMES = {
    "SEX": {"1": "MALE", "2": "FEMALE"},
    "STEROID": {"1": "NO STEROID", "2": "STEROID"},
}
DEFAULT_CUTS: dict[str, list[float]] = {"ALBUMIN": [3.7]}


def load_discretization(path) -> dict[str, list[float]]:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError("discretization file must be a JSON object {attribute: [cuts]}")
    return {str(k).upper(): sorted(float(c) for c in v) for k, v in doc.items()}


def equal_frequency_cuts(values: np.ndarray, bins: int = 2) -> list[float]:
    """Interior cut points splitting ``values`` into ``bins`` equal-count groups."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0 or bins < 2:
        return []
    cuts = np.quantile(values, np.arange(1, bins) / bins)
    return sorted(set(float(c) for c in cuts))


def _interval_names(attr: str, cuts: Sequence[float]) -> list[str]:
    def num(c):
        return f"{c:g}"

    names = [f"{attr}<{num(cuts[0])}"]
    for lo, hi in zip(cuts, cuts[1:]):
        names.append(f"{num(lo)}<={attr}<{num(hi)}")
    names.append(f"{attr}>={num(cuts[-1])}")
    return names


def load_hepatitis(path, cuts: Optional[Mapping[str, Sequence[float]]] = None,
                   bins: int = 2) -> Dataset:
    """UCI hepatitis CSV (class first, ``?`` missing) -> bipolar one-hot groups.

    Positive class is DIE (bad prognosis).  Continuous attributes are cut
    at ``cuts[attr]`` when given (ALBUMIN defaults to 3.7), otherwise at
    equal-frequency points over the observed values.  A missing value sets
    its whole feature group to 0.
    """
    cuts = {k.upper(): list(v) for k, v in (cuts if cuts is not None else DEFAULT_CUTS).items()}
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            row = [v.strip() for v in row]
            if not row or all(v == "" for v in row):
                continue
            if len(row) != len(HEPATITIS_ATTRIBUTES) + 1:
                raise ValueError(f"{path}:{lineno}: expected {len(HEPATITIS_ATTRIBUTES) + 1} "
                                 f"fields, got {len(row)}")
            if row[0] not in ("1", "2"):
                raise ValueError(f"{path}:{lineno}: class must be 1 (DIE) or 2 (LIVE)")
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no instances")

    table = np.array(rows, dtype=object)
    y = table[:, 0] == "1"
    blocks, names = [], []
    for a, attr in enumerate(HEPATITIS_ATTRIBUTES, start=1):
        col = table[:, a]
        present = col != "?"
        if attr in HEPATITIS_CONTINUOUS:
            try:
                vals = np.array([float(v) if p else np.nan for v, p in zip(col, present)])
            except ValueError as exc:
                raise ValueError(f"{path}: attribute {attr}: {exc}") from None
            attr_cuts = sorted(cuts.get(attr) or equal_frequency_cuts(vals[present], bins))
            if not attr_cuts:
                raise ValueError(f"{path}: no values to discretise {attr}")
            group = np.searchsorted(attr_cuts, np.where(present, vals, 0.0), side="right")
            width = len(attr_cuts) + 1
            labels = _interval_names(attr, attr_cuts)
        else:
            levels = sorted(set(col[present]))
            value_names = HEPATITIS_VALUE_NAMES.get(attr, {})
            labels = [value_names.get(v, f"{attr}={v}") for v in levels]
            group = np.array([levels.index(v) if p else 0 for v, p in zip(col, present)])
            width = len(levels)
        block = -np.ones((len(rows), width))
        block[np.arange(len(rows)), group] = 1.0
        block[~present] = 0.0
        blocks.append(block)
        names.extend(labels)
    return Dataset(np.hstack(blocks), y, names, provenance=str(path))


# -- splitting ----------------------------------------------------------------

def split_indices(n: int, seed=0) -> tuple[np.ndarray, np.ndarray]:
    if n < 2:
        raise ValueError("need at least two instances to split")
    perm = np.random.default_rng(seed).permutation(n)
    half = math.ceil(n / 2)
    return np.sort(perm[:half]), np.sort(perm[half:])


def split_two_fold(ds: Dataset, seed=0) -> tuple[Dataset, Dataset]:
    """Random halves of sizes ceil(n/2) and floor(n/2)."""
    first, second = split_indices(len(ds), seed)
    return ds.subset(first), ds.subset(second)
