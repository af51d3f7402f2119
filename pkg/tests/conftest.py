import numpy as np
import pytest

from cfrule.encoder import Rule, RuleSet, table1_rules


@pytest.fixture
def table1():
    return table1_rules(20, cf=0.9)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_ruleset(rng, max_rules=5, max_dim=25, max_literals=4, cf_range=(0.3, 1.0)):
    """Random rule set with 1..max_rules rules, each with 1..max_literals literals."""
    d = int(rng.integers(4, max_dim + 1))
    rules = []
    for _ in range(int(rng.integers(1, max_rules + 1))):
        size = int(rng.integers(1, min(max_literals, d) + 1))
        idx = rng.choice(d, size=size, replace=False)
        signs = rng.random(size) < 0.5
        rules.append(Rule(frozenset(idx[signs].tolist()), frozenset(idx[~signs].tolist()),
                          float(rng.uniform(*cf_range))))
    return RuleSet(tuple(rules), d)


def bipolar(rng, n, d):
    return rng.choice(np.array([-1.0, 1.0]), size=(n, d))


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion, if any ran."""
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
