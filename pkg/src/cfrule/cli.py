"""Command-line front end: ``cfrule {synth,train,extract,eval,cv,compare}``.

Exit codes: 0 success, 2 usage or input error, 3 training stopped at the
epoch limit without meeting the MSE criterion.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import datasets
from .encoder import RuleSet, table1_rules
from .evaluation import cross_validate, initial_model, mcro_comparison, rule_error
from .extractor import ExtractionConfig, extract_detailed, select_threshold
from .model import CfModel
from .trainer import TrainConfig, train

DEFAULT_SEED = 20060101

EXIT_OK, EXIT_INPUT, EXIT_NO_CONVERGENCE = 0, 2, 3


class InputError(Exception):
    pass


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError(f"config {path} must be a JSON object")
    return {k.replace("-", "_"): v for k, v in doc.items()}


def _opt(args, name, default=None):
    """Flag value, else config-file value, else ``default``."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    return args.config_values.get(name, default)


def _require_file(path, what: str) -> Path:
    if path is None:
        raise InputError(f"missing {what}")
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} not found: {p}")
    return p


def _load_dataset(args) -> datasets.Dataset:
    path = _require_file(_opt(args, "data"), "dataset (--data)")
    fmt = _opt(args, "format", "csv")
    try:
        if fmt == "csv":
            return datasets.load_csv(path)
        if fmt == "promoters":
            positions = _opt(args, "positions")
            if positions is None:
                return datasets.load_promoters(path)
            return datasets.load_promoters(path, [int(p) for p in str(positions).split(",")])
        if fmt == "hepatitis":
            cuts_path = _opt(args, "cuts")
            cuts = datasets.load_discretization(cuts_path) if cuts_path else None
            return datasets.load_hepatitis(path, cuts)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from None
    raise InputError(f"unknown dataset format {fmt!r}")


def _train_config(args) -> TrainConfig:
    try:
        return TrainConfig(
            learning_rate=float(_opt(args, "lr", 0.2)),
            max_epochs=int(_opt(args, "epochs", 1000)),
            mse_delta_epsilon=float(_opt(args, "epsilon", 1e-5)),
            shuffle_seed=_opt(args, "seed", DEFAULT_SEED) if _opt(args, "shuffle", False) else None,
            init_mode=_opt(args, "init", "mcro"),
            train_bias=not _opt(args, "pin_bias", False),
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _channels(args, default: int = 3) -> int:
    k = int(_opt(args, "channels", default))
    if k < 1:
        raise InputError("--channels must be at least 1")
    return k


def _seed(args) -> int:
    return int(_opt(args, "seed", DEFAULT_SEED))


def _load_rules(path, dim=None) -> RuleSet:
    p = _require_file(path, "rules file (--rules)")
    try:
        return RuleSet.load(p, dim)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad rules file {p}: {exc}") from None


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")


# -- subcommands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    d = int(_opt(args, "d", 20))
    rules_path = _opt(args, "rules")
    rules = table1_rules(d) if rules_path is None else _load_rules(rules_path, d)
    n = int(_opt(args, "n", 100))
    try:
        ds = datasets.generate_synthetic(rules, n, d, _seed(args))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _write(_opt(args, "out"), ds.to_csv())
    return EXIT_OK


def cmd_train(args) -> int:
    ds = _load_dataset(args)
    k = _channels(args)
    cfg = _train_config(args)
    if _opt(args, "trace_weights", False):
        cfg = replace(cfg, snapshot_stride=1)
    model, trace = train(initial_model(ds, k, cfg, _seed(args)), ds, cfg)
    model.save(_require_out(_opt(args, "model_out"), "--model-out"))
    trace_out = _opt(args, "trace_out")
    if trace_out:
        cols = ([(j, i) for j in range(1, k + 1) for i in range(1, ds.dim + 1)]
                if cfg.snapshot_stride else None)
        trace.write_csv(trace_out, cols)
    status = "converged" if trace.converged else "stopped at epoch limit"
    print(f"{status} after {trace.epochs} epochs, final MSE {trace.mse[-1]:.6g}", file=sys.stderr)
    return EXIT_OK if trace.converged else EXIT_NO_CONVERGENCE


def _require_out(path, flag: str):
    if path is None:
        raise InputError(f"{flag} is required")
    return path


def cmd_extract(args) -> int:
    try:
        model = CfModel.load(_require_file(_opt(args, "model"), "model file (--model)"))
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"bad model file: {exc}") from None
    threshold = str(_opt(args, "threshold", "0.5"))
    ds = _load_dataset(args) if _opt(args, "data") else None
    if ds is not None and ds.dim != model.dim:
        raise InputError(f"dataset has {ds.dim} features, model expects {model.dim}")
    ecfg = ExtractionConfig(low_cf_cutoff=float(_opt(args, "low_cf", 0.1)))
    if threshold == "auto":
        if ds is None:
            raise InputError("--threshold auto needs --data")
        r = select_threshold(model, ds, None, ecfg)
    else:
        try:
            r = float(threshold)
            ecfg = replace(ecfg, threshold=r)
        except ValueError as exc:
            raise InputError(f"bad --threshold: {exc}") from None
    names = ds.feature_names if ds is not None else None
    ex = extract_detailed(model, ecfg, threshold=r, names=names)
    theta = float(_opt(args, "theta", 0.5))
    print(f"threshold {r:g}", file=sys.stderr)
    for line in ex.diagnostics:
        print(f"diagnostic: {line}", file=sys.stderr)
    for rule in ex.rules:
        if rule.cf <= theta:
            print(f"warning: rule CF {rule.cf:.2f} <= theta {theta:g}: "
                  f"{rule.to_text(names)}", file=sys.stderr)
    _write(_opt(args, "out"), ex.rules.to_json())
    text_out = _opt(args, "text_out")
    if text_out:
        _write(text_out, ex.rules.to_text())
    else:
        print(ex.rules.to_text(), file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    ds = _load_dataset(args)
    rules = _load_rules(_opt(args, "rules"))
    if rules.rules and rules.dim > ds.dim:
        raise InputError(f"rules reference feature {rules.dim - 1}, dataset has {ds.dim}")
    rules = RuleSet(rules.rules, ds.dim)
    err = rule_error(rules, ds)
    _write(_opt(args, "out"), json.dumps({"n": len(ds), "rule_error": err}, indent=2))
    return EXIT_OK


def cmd_cv(args) -> int:
    ds = _load_dataset(args)
    threshold = str(_opt(args, "threshold", "auto"))
    report = cross_validate(
        ds, _channels(args), _train_config(args),
        ExtractionConfig(low_cf_cutoff=float(_opt(args, "low_cf", 0.1))),
        repeats=int(_opt(args, "repeats", 5)), seed=_seed(args),
        threshold=None if threshold == "auto" else float(threshold))
    _write(_opt(args, "out"), report.to_json())
    print(report.to_table(), file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    d = int(_opt(args, "d", 20))
    rules_path = _opt(args, "rules")
    task = table1_rules(d) if rules_path is None else _load_rules(rules_path, d)
    trials = int(_opt(args, "trials", 25))
    if trials < 2:
        raise InputError("--trials must be at least 2")
    report = mcro_comparison(task, trials, seed=_seed(args), k=_channels(args),
                             cfg=_train_config(args))
    _write(_opt(args, "out"), report.to_json())
    print(report.to_table(), file=sys.stderr)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfrule", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file of option defaults; flags win")
        sp.add_argument("--seed", type=int)
        return sp

    def data_opts(sp):
        sp.add_argument("--data", help="dataset file")
        sp.add_argument("--format", choices=["csv", "promoters", "hepatitis"])
        sp.add_argument("--positions", help="promoter positions, comma separated")
        sp.add_argument("--cuts", help="hepatitis discretisation JSON {attr: [cuts]}")

    def train_opts(sp):
        sp.add_argument("--channels", type=int)
        sp.add_argument("--init", choices=["random", "mcro"])
        sp.add_argument("--lr", type=float)
        sp.add_argument("--epochs", type=int)
        sp.add_argument("--epsilon", type=float)
        sp.add_argument("--shuffle", action="store_true", default=None)
        sp.add_argument("--pin-bias", dest="pin_bias", action="store_true", default=None)

    sp = common(sub.add_parser("synth", help="generate a synthetic rule task as CSV"))
    sp.add_argument("--rules", help="rules JSON (default: the three-rule benchmark)")
    sp.add_argument("--n", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_synth)

    sp = common(sub.add_parser("train", help="train a model"))
    data_opts(sp)
    train_opts(sp)
    sp.add_argument("--model-out", dest="model_out")
    sp.add_argument("--trace-out", dest="trace_out")
    sp.add_argument("--trace-weights", dest="trace_weights", action="store_true", default=None)
    sp.set_defaults(func=cmd_train)

    sp = common(sub.add_parser("extract", help="extract rules from a trained model"))
    sp.add_argument("--model")
    data_opts(sp)
    sp.add_argument("--threshold", help="0 < r < 1, or 'auto'")
    sp.add_argument("--low-cf", dest="low_cf", type=float)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--out", help="rules JSON (default stdout)")
    sp.add_argument("--text-out", dest="text_out")
    sp.set_defaults(func=cmd_extract)

    sp = common(sub.add_parser("eval", help="exact-match rule error of a rule file"))
    sp.add_argument("--rules")
    data_opts(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_eval)

    sp = common(sub.add_parser("cv", help="repeated two-fold cross-validation"))
    data_opts(sp)
    train_opts(sp)
    sp.add_argument("--repeats", type=int)
    sp.add_argument("--threshold", help="0 < r < 1, or 'auto' (default)")
    sp.add_argument("--low-cf", dest="low_cf", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_cv)

    sp = common(sub.add_parser("compare", help="MCRO vs random start on a synthetic task"))
    sp.add_argument("--rules")
    sp.add_argument("--d", type=int)
    sp.add_argument("--trials", type=int)
    train_opts(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.config_values = _load_config(args.config)
        return args.func(args)
    except InputError as exc:
        print(f"cfrule: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"cfrule: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
