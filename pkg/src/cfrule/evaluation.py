"""Rule-error metrics, two-fold cross-validation and the MCRO comparison."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .datasets import Dataset, generate_synthetic, split_indices
from .encoder import RuleSet
from .extractor import ExtractionConfig, extract_rules, select_threshold
from .mcro import fit_linear, mcro_init
from .model import CfModel, to_arrays
from .trainer import TrainConfig, TrainTrace, random_init, train

log = logging.getLogger(__name__)

SIGNIFICANCE_LEVELS = (0.01, 0.025, 0.05)


def rule_error(rs: RuleSet, data) -> float:
    """Fraction of instances whose exact-match prediction disagrees with the label."""
    X, y = to_arrays(data)
    if X.shape[0] == 0:
        raise ValueError("cannot measure error on an empty dataset")
    if X.shape[1] != rs.dim:
        raise ValueError(f"data has {X.shape[1]} features, rules expect {rs.dim}")
    return float(np.mean(rs.label_many(X) != y))


# -- t test -------------------------------------------------------------------

@dataclass
class TTestResult:
    t_value: float
    degrees_of_freedom: int
    one_sided_p_below: list[float]
    p_value: float

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


def critical_value(df: int, alpha: float) -> float:
    """One-sided critical value of Student's t."""
    return float(stats.t.ppf(1.0 - alpha, df))


def t_test_one_sided(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Pooled-variance two-sample t test of ``mean(b) > mean(a)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    df = a.size + b.size - 2
    diff = b.mean() - a.mean()
    pooled = ((a.size - 1) * a.var(ddof=1) + (b.size - 1) * b.var(ddof=1)) / df
    se = math.sqrt(pooled * (1.0 / a.size + 1.0 / b.size))
    if se == 0.0:
        t = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    else:
        t = float(diff / se)
    levels = [alpha for alpha in SIGNIFICANCE_LEVELS if t > critical_value(df, alpha)]
    return TTestResult(t, df, levels, float(stats.t.sf(t, df)))


# -- model fitting shared by CV and the comparison ------------------------------

@dataclass
class FitResult:
    model: CfModel
    trace: TrainTrace
    threshold: float
    rules: RuleSet


def initial_model(train_data, k: int, cfg: TrainConfig, seed) -> CfModel:
    X, _ = to_arrays(train_data)
    rng = np.random.default_rng(seed)
    if cfg.init_mode == "mcro":
        return mcro_init(k, X.shape[1], fit_linear(train_data), rng)
    return random_init(k, X.shape[1], cfg, rng)


def fit_rules(train_data, k: int, cfg: TrainConfig, ecfg: ExtractionConfig, seed,
              threshold: Optional[float] = None, validation=None, names=None) -> FitResult:
    """Initialise, train and extract; ``threshold=None`` selects one automatically."""
    model, trace = train(initial_model(train_data, k, cfg, seed), train_data, cfg)
    r = threshold if threshold is not None else select_threshold(model, train_data, validation, ecfg)
    return FitResult(model, trace, r, extract_rules(model, ecfg, threshold=r, names=names))


# -- cross-validation ---------------------------------------------------------

@dataclass
class FoldResult:
    repeat: int
    fold: int
    train_rows: list[int]
    test_rows: list[int]
    threshold: float
    epochs: int
    converged: bool
    train_error: float
    test_error: float
    rules: list[str]


@dataclass
class EvalReport:
    train_error_rate: float
    test_error_rate: float
    folds: list[FoldResult] = field(default_factory=list)
    rule_set: Optional[RuleSet] = None

    def to_dict(self) -> dict:
        doc = {
            "train_error_rate": self.train_error_rate,
            "test_error_rate": self.test_error_rate,
            "folds": [asdict(f) for f in self.folds],
        }
        if self.rule_set is not None:
            doc["rules"] = json.loads(self.rule_set.to_json())
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_table(self) -> str:
        lines = [f"{'repeat':>6} {'fold':>4} {'thr':>5} {'epochs':>6} {'train':>7} {'test':>7}"]
        for f in self.folds:
            lines.append(f"{f.repeat:>6} {f.fold:>4} {f.threshold:>5.2f} {f.epochs:>6} "
                         f"{f.train_error:>7.3f} {f.test_error:>7.3f}")
        lines.append(f"mean train rule error {self.train_error_rate:.3f}, "
                     f"mean CV rule error {self.test_error_rate:.3f}")
        return "\n".join(lines)


def cross_validate(ds: Dataset, k_channels: int, cfg: TrainConfig | None = None,
                   ecfg: ExtractionConfig | None = None, repeats: int = 5, seed=0,
                   threshold: Optional[float] = None) -> EvalReport:
    """Repeated two-fold CV: train on one half, test extracted rules on the other.

    Each repeat draws a fresh split and fresh initial weights; all streams
    derive from ``seed``.  ``threshold=None`` picks the extraction threshold
    per fold from the training half.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    cfg = cfg or TrainConfig()
    ecfg = ecfg or ExtractionConfig()
    streams = np.random.SeedSequence(seed).spawn(repeats)
    folds = []
    for rep, stream in enumerate(streams):
        split_seed, *init_seeds = stream.spawn(3)
        halves = split_indices(len(ds), split_seed)
        for f, (train_idx, test_idx) in enumerate([halves, halves[::-1]]):
            tr, te = ds.subset(train_idx), ds.subset(test_idx)
            assert not set(train_idx.tolist()) & set(test_idx.tolist())
            fit = fit_rules(tr, k_channels, cfg, ecfg, init_seeds[f], threshold,
                            names=ds.feature_names)
            folds.append(FoldResult(
                rep, f, train_idx.tolist(), test_idx.tolist(), fit.threshold,
                fit.trace.epochs, fit.trace.converged,
                rule_error(fit.rules, tr), rule_error(fit.rules, te),
                [r.to_text(ds.feature_names) for r in fit.rules]))
            log.info("repeat %d fold %d: threshold %.2f, test error %.3f",
                     rep, f, fit.threshold, folds[-1].test_error)
    return EvalReport(float(np.mean([f.train_error for f in folds])),
                      float(np.mean([f.test_error for f in folds])), folds)


# -- MCRO vs random start -------------------------------------------------------

@dataclass
class TrialResult:
    trial: int
    strategy: str
    train_error: float
    test_error: float
    exact: bool
    epochs: int
    threshold: float


@dataclass
class ComparisonReport:
    trials: list[TrialResult]
    train_test: TTestResult
    test_test: TTestResult

    def errors(self, strategy: str, which: str) -> list[float]:
        return [getattr(t, f"{which}_error") for t in self.trials if t.strategy == strategy]

    def exact_rate(self, strategy: str) -> float:
        return float(np.mean([t.exact for t in self.trials if t.strategy == strategy]))

    def to_dict(self) -> dict:
        return {
            "trials": [asdict(t) for t in self.trials],
            "train_t_test": asdict(self.train_test),
            "test_t_test": asdict(self.test_test),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_table(self) -> str:
        def row(label, which, tt):
            levels = f"{min(tt.one_sided_p_below):g}" if tt.one_sided_p_below else "n.s."
            return (f"{label:<22} {np.mean(self.errors('mcro', which)):>7.3f} "
                    f"{np.mean(self.errors('random', which)):>13.3f} {tt.t_value:>8.2f} {levels:>8}")

        lines = [f"{'':<22} {'MCRO':>7} {'Random Start':>13} {'t-Value':>8} {'Signif.':>8}",
                 row("Train error rate mean", "train", self.train_test),
                 row("Test error rate mean", "test", self.test_test),
                 f"(one-sided pooled t test, df = {self.train_test.degrees_of_freedom}; "
                 f"exact recovery MCRO {self.exact_rate('mcro'):.0%}, "
                 f"random {self.exact_rate('random'):.0%})"]
        return "\n".join(lines)


def mcro_comparison(task: RuleSet, trials: int = 25, seed=0, k: int = 3,
                    n_train: int = 100, n_test: int = 100,
                    cfg: TrainConfig | None = None,
                    ecfg: ExtractionConfig | None = None) -> ComparisonReport:
    """Train MCRO and random-start models on the same data per trial.

    Returns one-sided t tests of ``mean(random) > mean(MCRO)`` for the
    training and test rule-error rates.
    """
    if trials < 2:
        raise ValueError("need at least two trials per strategy")
    cfg = cfg or TrainConfig()
    ecfg = ecfg or ExtractionConfig()
    results = []
    for trial, stream in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        train_seed, test_seed, mcro_seed, random_seed = stream.spawn(4)
        tr = generate_synthetic(task, n_train, task.dim, train_seed)
        te = generate_synthetic(task, n_test, task.dim, test_seed)
        for strategy, init_seed in (("mcro", mcro_seed), ("random", random_seed)):
            fit = fit_rules(tr, k, replace(cfg, init_mode=strategy), ecfg, init_seed)
            results.append(TrialResult(trial, strategy, rule_error(fit.rules, tr),
                                       rule_error(fit.rules, te), fit.rules.same_rules(task),
                                       fit.trace.epochs, fit.threshold))
    report = ComparisonReport(results, None, None)
    report.train_test = t_test_one_sided(report.errors("mcro", "train"),
                                         report.errors("random", "train"))
    report.test_test = t_test_one_sided(report.errors("mcro", "test"),
                                        report.errors("random", "test"))
    return report
