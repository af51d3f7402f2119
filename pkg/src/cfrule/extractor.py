"""Threshold-based rule extraction from a trained model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .encoder import Rule, RuleSet
from .model import Channel, CfModel, to_arrays

CANDIDATE_THRESHOLDS = (0.35, 0.5, 0.65, 0.8)


@dataclass
class ExtractionConfig:
    threshold: float = 0.5
    low_cf_cutoff: float = 0.1
    candidate_thresholds: tuple[float, ...] = CANDIDATE_THRESHOLDS
    selection_slack: float = 0.02

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("extraction threshold must lie in (0, 1)")
        if not self.candidate_thresholds:
            raise ValueError("need at least one candidate threshold")


@dataclass
class Extraction:
    rules: RuleSet
    diagnostics: list[str] = field(default_factory=list)
    # channel index that produced each surviving rule
    sources: list[int] = field(default_factory=list)


def extract_channel(ch: Channel, r: float) -> Optional[Rule]:
    """Literals whose max-normalised input weight reaches ``+-r``; CF = ``u``.

    The bias takes no part.  Channels with all-zero input weights, or
    whose premise would be empty, give ``None``; so does ``u == 0``,
    since a rule CF must be positive.
    """
    w = ch.w
    top = np.max(np.abs(w)) if w.size else 0.0
    if top == 0.0 or ch.u <= 0.0:
        return None
    wn = w / top
    pos = np.flatnonzero(wn >= r)
    neg = np.flatnonzero(wn <= -r)
    if pos.size == 0 and neg.size == 0:
        return None
    return Rule(frozenset(pos.tolist()), frozenset(neg.tolist()), min(ch.u, 1.0))


def extract_detailed(m: CfModel, cfg: ExtractionConfig | None = None,
                     threshold: float | None = None, names=None) -> Extraction:
    cfg = cfg or ExtractionConfig()
    r = cfg.threshold if threshold is None else threshold
    diagnostics = []
    found: list[tuple[int, Rule]] = []
    for j, ch in enumerate(m.channels):
        rule = extract_channel(ch, r)
        if rule is None:
            diagnostics.append(f"channel {j + 1}: no rule (degenerate weights or u=0)")
            continue
        if rule.cf < cfg.low_cf_cutoff:
            diagnostics.append(f"channel {j + 1}: dropped, CF {rule.cf:.3f} below "
                               f"cutoff {cfg.low_cf_cutoff}")
            continue
        found.append((j, rule))

    # identical premises collapse onto the highest CF
    best: dict[tuple, tuple[int, Rule]] = {}
    for j, rule in found:
        key = rule.premise
        if key in best:
            other_j, other = best[key]
            keep, lose = ((j, rule), other_j) if rule.cf > other.cf else ((other_j, other), j)
            best[key] = keep
            diagnostics.append(f"channel {lose + 1}: duplicate of channel {keep[0] + 1}")
        else:
            best[key] = (j, rule)

    survivors = sorted(best.values(), key=lambda item: item[0])
    kept = []
    for j, rule in survivors:
        lits = rule.literals
        general = [oj for oj, other in survivors if other.literals < lits]
        if general:
            diagnostics.append(f"channel {j + 1}: subsumed by channel {general[0] + 1}")
        else:
            kept.append((j, rule))
    rules = RuleSet(tuple(rule for _, rule in kept), m.dim, names)
    return Extraction(rules, diagnostics, [j for j, _ in kept])


def extract_rules(m: CfModel, cfg: ExtractionConfig | None = None,
                  threshold: float | None = None, names=None) -> RuleSet:
    return extract_detailed(m, cfg, threshold, names).rules


def _rule_error(rs: RuleSet, data) -> float:
    X, y = to_arrays(data)
    if X.shape[0] == 0:
        return 0.0
    return float(np.mean(rs.label_many(X) != y))


def threshold_errors(m: CfModel, data, cfg: ExtractionConfig | None = None) -> dict[float, float]:
    cfg = cfg or ExtractionConfig()
    return {r: _rule_error(extract_rules(m, cfg, threshold=r), data)
            for r in cfg.candidate_thresholds}


def select_threshold(m: CfModel, train, validation=None,
                     cfg: ExtractionConfig | None = None) -> float:
    """Largest candidate threshold whose rule error is near the best one.

    Errors are measured by exact symbolic match on ``validation`` when it
    is given, else on ``train``.  A candidate qualifies if its error is
    within ``cfg.selection_slack`` of the lowest candidate error.
    """
    cfg = cfg or ExtractionConfig()
    errors = threshold_errors(m, validation if validation is not None else train, cfg)
    best = min(errors.values())
    for r in sorted(errors, reverse=True):
        if errors[r] <= best + cfg.selection_slack + 1e-12:
            return r
    raise AssertionError("unreachable: the best candidate always qualifies")


def threshold_sweep(m: CfModel, thresholds: Sequence[float] | None = None) -> dict:
    """Candidate threshold -> extracted rule set; handy for reporting."""
    cfg = ExtractionConfig()
    return {r: extract_rules(m, cfg, threshold=r)
            for r in (thresholds or cfg.candidate_thresholds)}
