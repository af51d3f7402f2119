import json

import numpy as np
import pytest

from cfrule.encoder import (Rule, RuleSet, encode_rule, encode_ruleset, matches,
                            ruleset_label, table1_rules)
from cfrule.model import channel_activation, classify, model_output

from conftest import bipolar, random_ruleset


def brute_label(rules, x):
    """Reference matcher: plain loops over literals."""
    for r in rules:
        if all(x[i] == 1 for i in r.pos) and all(x[i] == -1 for i in r.neg):
            return True
    return False


class TestRule:
    def test_invariants(self):
        with pytest.raises(ValueError):
            Rule({1}, {1})
        with pytest.raises(ValueError):
            Rule(set(), set())
        with pytest.raises(ValueError):
            Rule({1}, cf=0.0)
        with pytest.raises(ValueError):
            Rule({1}, cf=1.1)
        with pytest.raises(ValueError):
            RuleSet((Rule({5}),), dim=5)

    def test_text_rendering(self):
        r = Rule({6, 0}, {1}, 0.9)
        assert r.to_text() == "IF x1 AND NOT x2 AND x7 THEN class CF=0.90"
        names = [f"f{i}" for i in range(8)]
        assert r.to_text(names) == "IF f0 AND NOT f1 AND f6 THEN class CF=0.90"

    def test_json_round_trip(self, table1, tmp_path):
        path = tmp_path / "rules.json"
        table1.save(path)
        doc = json.loads(path.read_text())
        assert doc[0] == {"pos": [0, 6], "neg": [1], "cf": 0.9}
        back = RuleSet.load(path, dim=20)
        assert back.same_rules(table1)
        assert [r.cf for r in back] == [0.9, 0.9, 0.9]


class TestMatching:
    def test_table1_rule3(self, table1):
        rule3 = table1.rules[2]
        x = -np.ones(20)
        x[[5, 10]] = 1.0
        assert matches(rule3, x)
        x[10] = -1.0
        assert not matches(rule3, x)

    def test_negated_literal(self):
        x = np.ones(4)
        x[1] = -1.0
        assert matches(Rule(set(), {1}), x)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            matches(Rule({7}), np.ones(3))

    def test_ruleset_label_examples(self, table1, rng):
        x = bipolar(rng, 1, 20)[0]
        x[[0, 6]] = 1.0
        x[1] = -1.0
        assert ruleset_label(table1, x)
        x = -np.ones(20)
        x[[1, 3]] = 1.0
        assert brute_label(table1.rules, x) is False
        assert not ruleset_label(table1, x)
        assert not ruleset_label(RuleSet((), 20), np.ones(20))

    def test_vectorised_labels_match_brute_force(self, rng):
        for _ in range(50):
            rs = random_ruleset(rng)
            X = bipolar(rng, 100, rs.dim)
            expected = [brute_label(rs.rules, x) for x in X]
            assert rs.label_many(X).tolist() == expected


class TestEncoding:
    def test_encode_rule_construction(self):
        ch = encode_rule(Rule({0, 6}, {1}, 0.9), 20)
        assert ch.bias == 1.0 and ch.u == 0.9
        expected = np.zeros(20)
        expected[[0, 6]] = 1.0
        expected[1] = -1.0
        np.testing.assert_array_equal(ch.w, expected)

    def test_encode_rule_activation_is_indicator(self, rng):
        rule = Rule({0, 6}, {1}, 0.9)
        ch = encode_rule(rule, 20)
        for x in bipolar(rng, 200, 20):
            act = channel_activation(ch, x)
            assert act in (0.0, 1.0)
            assert (act == 1.0) == brute_label([rule], x)

    def test_single_antecedent(self):
        ch = encode_rule(Rule({2}), 5)
        x = -np.ones(5)
        assert channel_activation(ch, x) == 0.0
        x[2] = 1.0
        assert channel_activation(ch, x) == 1.0

    def test_encode_ruleset(self, table1, rng):
        m = encode_ruleset(table1)
        assert m.k == 3
        X = bipolar(rng, 300, 20)
        out = m.outputs(X)
        labels = table1.label_many(X)
        assert np.all(out[labels] >= 0.9)
        assert np.all(out[~labels] == 0.0)

    def test_single_rule_output_is_cf(self):
        m = encode_ruleset(RuleSet((Rule({1}, cf=0.7),), 3))
        assert model_output(m, np.array([-1.0, 1.0, -1.0])) == pytest.approx(0.7)

    def test_empty_ruleset_rejected(self):
        with pytest.raises(ValueError):
            encode_ruleset(RuleSet((), 4))

    def test_encoded_weights_are_ternary(self, rng):
        for _ in range(50):
            m = encode_ruleset(random_ruleset(rng))
            assert np.all(m.weights[:, 0] == 1.0)
            assert set(np.unique(m.weights[:, 1:])) <= {-1.0, 0.0, 1.0}

    def test_round_trip_property(self, rng):
        for _ in range(30):
            rs = random_ruleset(rng)
            theta = min(r.cf for r in rs) - 1e-3
            m = encode_ruleset(rs)
            X = bipolar(rng, 1000, rs.dim)
            assert np.array_equal(m.predict(X, theta), rs.label_many(X))
        x = bipolar(rng, 1, rs.dim)[0]
        assert classify(m, x, theta) == ruleset_label(rs, x)


def test_table1_definition():
    rs = table1_rules()
    assert rs.dim == 20
    texts = [r.to_text() for r in rs]
    assert texts == ["IF x1 AND NOT x2 AND x7 THEN class CF=0.90",
                     "IF x1 AND NOT x4 AND x5 THEN class CF=0.90",
                     "IF x6 AND x11 THEN class CF=0.90"]
