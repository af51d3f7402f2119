import numpy as np
import pytest

import cfrule.extractor as extractor
from cfrule.datasets import generate_synthetic
from cfrule.encoder import Rule, RuleSet, encode_ruleset
from cfrule.extractor import (CANDIDATE_THRESHOLDS, ExtractionConfig, extract_channel,
                              extract_detailed, extract_rules, select_threshold,
                              threshold_errors, threshold_sweep)
from cfrule.model import Channel, CfModel

from conftest import random_ruleset


def model_of(*channels):
    return CfModel.from_channels(list(channels))


def subsumption_free(rs):
    lits = [r.literals for r in rs]
    return not any(a <= b for i, a in enumerate(lits) for j, b in enumerate(lits) if i != j)


def signature(rs):
    return sorted((sorted(r.pos), sorted(r.neg), round(r.cf, 12)) for r in rs)


class TestExtractChannel:
    def test_converged_channel(self):
        w = np.zeros(20)
        w[[0, 1, 6]] = [0.998, -0.995, 1.0]
        w[3] = 0.02
        rule = extract_channel(Channel(0.9, 0.7, w), 0.5)
        assert rule == Rule(frozenset({0, 6}), frozenset({1}), 0.9)

    def test_uniform_weights_normalise_to_one(self):
        rule = extract_channel(Channel(0.5, 0.0, np.full(4, 0.4)), 0.8)
        assert rule.pos == frozenset(range(4)) and not rule.neg

    def test_degenerate_channels(self):
        assert extract_channel(Channel(0.5, 0.9, np.zeros(5)), 0.5) is None
        assert extract_channel(Channel(0.0, 0.0, np.ones(5)), 0.5) is None

    def test_bias_ignored(self):
        a = extract_channel(Channel(0.5, -1.0, np.array([0.3, -0.1])), 0.5)
        b = extract_channel(Channel(0.5, 1.0, np.array([0.3, -0.1])), 0.5)
        assert a == b == Rule(frozenset({0}), frozenset(), 0.5)

    def test_threshold_boundary_inclusive(self):
        rule = extract_channel(Channel(0.5, 0.0, np.array([1.0, 0.5, -0.5, 0.49])), 0.5)
        assert rule.pos == {0, 1} and rule.neg == {2}

    def test_monotone_in_threshold(self, rng):
        for _ in range(200):
            ch = Channel(float(rng.uniform(0.1, 1)), 0.0, rng.uniform(-1, 1, int(rng.integers(1, 10))))
            previous = None
            for r in sorted(CANDIDATE_THRESHOLDS):
                rule = extract_channel(ch, r)
                if previous is not None:
                    assert rule is not None and rule.literals <= previous.literals
                previous = rule


class TestExtractRules:
    def test_duplicates_keep_highest_cf(self):
        w = np.array([1.0, -1.0, 0.0])
        m = model_of(Channel(0.6, 1.0, w), Channel(0.8, 1.0, w))
        ex = extract_detailed(m)
        assert len(ex.rules) == 1 and ex.rules.rules[0].cf == 0.8
        assert ex.sources == [1]
        assert any("duplicate" in msg for msg in ex.diagnostics)

    def test_subsumed_rule_removed(self):
        m = model_of(Channel(0.9, 1.0, np.array([1.0, 0.0, 0.0])),
                     Channel(0.7, 1.0, np.array([1.0, 0.0, 1.0])))
        ex = extract_detailed(m)
        assert [r.premise for r in ex.rules] == [(frozenset({0}), frozenset())]
        assert any("subsumed" in msg for msg in ex.diagnostics)

    def test_low_cf_dropped_with_diagnostic(self):
        m = model_of(Channel(0.05, 1.0, np.array([1.0, 0.0])),
                     Channel(0.5, 1.0, np.array([0.0, -1.0])))
        ex = extract_detailed(m)
        assert len(ex.rules) == 1 and ex.rules.rules[0].neg == {1}
        assert any("below cutoff" in msg for msg in ex.diagnostics)

    def test_empty_result_is_legal(self):
        rs = extract_rules(model_of(Channel(0.5, 1.0, np.zeros(3))))
        assert len(rs) == 0 and rs.dim == 3

    def test_names_passed_through(self):
        rs = extract_rules(model_of(Channel(0.9, 1.0, np.array([1.0, -1.0]))), names=["a", "b"])
        assert rs.to_text() == "IF a AND NOT b THEN class CF=0.90"

    def test_round_trip(self, rng):
        done = 0
        while done < 100:
            rs = random_ruleset(rng)
            if not subsumption_free(rs):
                continue
            done += 1
            m = encode_ruleset(rs)
            for r in CANDIDATE_THRESHOLDS:
                assert signature(extract_rules(m, threshold=r)) == signature(rs)

    def test_table1_round_trip(self, table1):
        assert extract_rules(encode_ruleset(table1)).same_rules(table1)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExtractionConfig(threshold=1.0)
        with pytest.raises(ValueError):
            ExtractionConfig(candidate_thresholds=())


class TestLinearCost:
    """Numpy element work in extraction grows linearly in k * d."""

    class CountingNumpy:
        def __init__(self):
            self.elements = 0

        def __getattr__(self, name):
            fn = getattr(np, name)
            if not callable(fn):
                return fn

            def counted(*args, **kwargs):
                self.elements += sum(np.size(a) for a in args if isinstance(a, np.ndarray))
                return fn(*args, **kwargs)
            return counted

    def work(self, monkeypatch, k, d, rng):
        counter = self.CountingNumpy()
        m = CfModel(rng.uniform(0.2, 1, k), rng.uniform(-1, 1, (k, d + 1)))
        monkeypatch.setattr(extractor, "np", counter)
        extract_detailed(m, threshold=0.99)   # near-1 threshold keeps premises tiny
        monkeypatch.setattr(extractor, "np", np)
        return counter.elements

    def test_linear(self, monkeypatch, rng):
        base = self.work(monkeypatch, 2, 50, rng)
        assert base > 0
        for factor in (2, 4, 8):
            assert self.work(monkeypatch, 2 * factor, 50, rng) == pytest.approx(factor * base, rel=0.1)
            assert self.work(monkeypatch, 2, 50 * factor, rng) == pytest.approx(factor * base, rel=0.1)


class TestSelectThreshold:
    def test_identical_rules_prefer_highest(self, table1):
        m = encode_ruleset(table1)
        data = generate_synthetic(table1, 100, seed=1)
        errors = threshold_errors(m, data)
        assert set(errors.values()) == {0.0}
        assert select_threshold(m, data) == 0.8

    def test_weak_weights_need_low_threshold(self, rng):
        target = RuleSet((Rule(frozenset({0, 1, 2})),), 5)
        m = model_of(Channel(0.9, 0.0, np.array([1.0, 0.4, 0.4, 0.05, -0.05])))
        data = generate_synthetic(target, 200, seed=3)
        errors = threshold_errors(m, data)
        assert errors[0.35] == 0.0
        assert min(errors[r] for r in (0.5, 0.65, 0.8)) > 0.2
        assert select_threshold(m, data) == 0.35

    def test_validation_set_is_used(self):
        target = RuleSet((Rule(frozenset({0, 1, 2})),), 5)
        other = RuleSet((Rule(frozenset({0})),), 5)
        m = model_of(Channel(0.9, 0.0, np.array([1.0, 0.4, 0.4, 0.05, -0.05])))
        train = generate_synthetic(target, 200, seed=3)
        validation = generate_synthetic(other, 200, seed=4)
        assert select_threshold(m, train, validation) == 0.8

    def test_slack(self):
        target = RuleSet((Rule(frozenset({0, 1, 2})),), 5)
        m = model_of(Channel(0.9, 0.0, np.array([1.0, 0.4, 0.4, 0.05, -0.05])))
        data = generate_synthetic(target, 200, seed=3)
        assert select_threshold(m, data, cfg=ExtractionConfig(selection_slack=1.0)) == 0.8

    def test_sweep(self, table1):
        sweep = threshold_sweep(encode_ruleset(table1))
        assert sorted(sweep) == sorted(CANDIDATE_THRESHOLDS)
        assert all(rs.same_rules(table1) for rs in sweep.values())
