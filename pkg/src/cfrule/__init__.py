"""Certainty-factor multi-channel rule learning."""

from .cf import cf_combine, cf_negative, cf_partial, cf_positive
from .datasets import (Dataset, generate_synthetic, load_hepatitis, load_promoters,
                       split_two_fold)
from .encoder import Rule, RuleSet, encode_rule, encode_ruleset, matches, ruleset_label, table1_rules
from .evaluation import cross_validate, mcro_comparison, rule_error, t_test_one_sided
from .extractor import ExtractionConfig, extract_channel, extract_rules, select_threshold
from .mcro import RegressionFit, fit_linear, mcro_init
from .model import (CfModel, Channel, Instance, channel_activation, channel_influence,
                    classify, model_output)
from .trainer import (TrainConfig, TrainTrace, input_weight_gradient, instance_error,
                      output_weight_gradient, random_init, train, train_step)

__version__ = "0.1.0"
