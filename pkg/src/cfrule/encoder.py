"""Conjunctive rules, rule matching and the rule -> channel construction.

Rules are index based: feature ``i`` (0-based) appears either as a
positive literal (``x_i == +1`` required) or a negated one (``x_i == -1``
required).  Human-readable names come from an optional symbol table;
without one, feature ``i`` renders as ``x{i+1}`` so that the text matches
the usual 1-based notation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import Channel, CfModel, Instance


@dataclass(frozen=True)
class Rule:
    pos: frozenset[int]
    neg: frozenset[int] = frozenset()
    cf: float = 1.0

    def __post_init__(self):
        pos = frozenset(int(i) for i in self.pos)
        neg = frozenset(int(i) for i in self.neg)
        if pos & neg:
            raise ValueError(f"feature(s) {sorted(pos & neg)} both asserted and negated")
        if not pos and not neg:
            raise ValueError("rule premise must not be empty")
        if any(i < 0 for i in pos | neg):
            raise ValueError("feature indices must be nonnegative")
        if not 0.0 < self.cf <= 1.0:
            raise ValueError(f"rule CF must be in (0, 1], got {self.cf}")
        object.__setattr__(self, "pos", pos)
        object.__setattr__(self, "neg", neg)
        object.__setattr__(self, "cf", float(self.cf))

    @property
    def premise(self) -> tuple[frozenset[int], frozenset[int]]:
        return self.pos, self.neg

    @property
    def literals(self) -> frozenset[tuple[int, bool]]:
        return frozenset((i, True) for i in self.pos) | frozenset((i, False) for i in self.neg)

    @property
    def max_index(self) -> int:
        return max(self.pos | self.neg)

    def matches_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        p, n = sorted(self.pos), sorted(self.neg)
        return np.all(X[..., p] == 1, axis=-1) & np.all(X[..., n] == -1, axis=-1)

    def to_text(self, names: Sequence[str] | None = None) -> str:
        def name(i):
            return names[i] if names is not None else f"x{i + 1}"

        parts = []
        for i in sorted(self.pos | self.neg):
            parts.append(name(i) if i in self.pos else f"NOT {name(i)}")
        return f"IF {' AND '.join(parts)} THEN class CF={self.cf:.2f}"

    def to_dict(self) -> dict:
        return {"pos": sorted(self.pos), "neg": sorted(self.neg), "cf": self.cf}

    @classmethod
    def from_dict(cls, doc: dict) -> "Rule":
        return cls(frozenset(doc.get("pos", ())), frozenset(doc.get("neg", ())), doc.get("cf", 1.0))


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    dim: int
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        rules = tuple(self.rules)
        if self.dim < 1:
            raise ValueError("rule set dimensionality must be positive")
        for r in rules:
            if r.max_index >= self.dim:
                raise ValueError(f"rule references feature {r.max_index} but dim is {self.dim}")
        if self.names is not None and len(self.names) != self.dim:
            raise ValueError("symbol table length must equal dim")
        object.__setattr__(self, "rules", rules)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    @property
    def premises(self) -> frozenset:
        """Rule premises as a set, ignoring CFs and order."""
        return frozenset(r.premise for r in self.rules)

    def same_rules(self, other: "RuleSet") -> bool:
        return self.premises == other.premises

    def label_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        if X.shape[-1] != self.dim:
            raise ValueError(f"instances have {X.shape[-1]} features, rule set expects {self.dim}")
        out = np.zeros(X.shape[:-1], dtype=bool)
        for r in self.rules:
            out |= r.matches_many(X)
        return out

    def to_text(self) -> str:
        return "\n".join(r.to_text(self.names) for r in self.rules)

    def to_json(self) -> str:
        return json.dumps([r.to_dict() for r in self.rules], indent=2)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def from_json(cls, text: str, dim: int | None = None, names=None) -> "RuleSet":
        rules = [Rule.from_dict(d) for d in json.loads(text)]
        if dim is None:
            dim = max((r.max_index for r in rules), default=0) + 1
        return cls(tuple(rules), dim, names)

    @classmethod
    def load(cls, path, dim: int | None = None, names=None) -> "RuleSet":
        return cls.from_json(Path(path).read_text(), dim, names)


def table1_rules(dim: int = 20, cf: float = 0.9) -> RuleSet:
    """The three-rule synthetic target concept over ``dim`` binary inputs.

    x1 AND NOT x2 AND x7;  x1 AND NOT x4 AND x5;  x6 AND x11.
    """
    return RuleSet((
        Rule({0, 6}, {1}, cf),
        Rule({0, 4}, {3}, cf),
        Rule({5, 10}, set(), cf),
    ), dim)


def _features(inst) -> np.ndarray:
    return inst.features if isinstance(inst, Instance) else np.asarray(inst)


def matches(r: Rule, inst) -> bool:
    x = _features(inst)
    if r.max_index >= x.size:
        raise IndexError(f"rule references feature {r.max_index}, instance has {x.size}")
    return bool(r.matches_many(x))


def ruleset_label(rs: RuleSet, inst) -> bool:
    return bool(rs.label_many(_features(inst)))


def encode_rule(r: Rule, dim: int) -> Channel:
    """Channel whose activation is 1 on matching bipolar instances, else 0.

    Bias 1, weight +1 per positive literal, -1 per negated literal, 0
    elsewhere, output weight = rule CF.
    """
    if r.max_index >= dim:
        raise ValueError(f"rule references feature {r.max_index} but dim is {dim}")
    w = np.zeros(dim)
    w[sorted(r.pos)] = 1.0
    w[sorted(r.neg)] = -1.0
    return Channel(r.cf, 1.0, w)


def encode_ruleset(rs: RuleSet | Iterable[Rule], dim: int | None = None) -> CfModel:
    if not isinstance(rs, RuleSet):
        rules = tuple(rs)
        rs = RuleSet(rules, dim if dim is not None else max(r.max_index for r in rules) + 1)
    if not rs.rules:
        raise ValueError("cannot encode an empty rule set")
    return CfModel.from_channels([encode_rule(r, rs.dim) for r in rs.rules])
