"""Command-line interface.

Subcommands mirror the pipeline stages: ``ingest`` derives labeled
instances, ``train`` fits a classifier, ``explain`` produces highlight
masks, ``evaluate`` composes everything into a scored report, and
``correlate`` / ``report`` re-render stored reports.  Options come from a
flat ``key = value`` config file plus flags; flags win.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from complexity_lens import classify, features, report as report_mod
from complexity_lens.corpus import CorpusError, derive_labels, save_instances
from complexity_lens.pipeline import (
    ConfigError,
    RunConfig,
    domain_correlations,
    evaluate_dataset,
    load_config_file,
    load_splits,
)

FLAG_HELP = {
    "corpus": "single corpus file, split by --split-fractions",
    "train": "training corpus path (tsv file or two-file prefix)",
    "valid": "validation corpus path",
    "test": "test corpus path",
    "corpus_format": "tsv | two-file",
    "classifier": "lr | nb",
    "explainer": "random | lexicon | top_features | lime | shap | reference",
    "lexicon": "age-of-acquisition CSV path",
    "budget_preset": "newsela | wikilarge | biendata highlight budgets",
    "max_highlights": "highlight budget K (overrides preset)",
    "sub_costs": "comma-separated substitution costs, e.g. 1,1.5,2",
    "seed": "global random seed",
    "out": "output directory",
}


class Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    for spec in dataclasses.fields(RunConfig):
        flag = "--" + spec.name.replace("_", "-")
        help_text = FLAG_HELP.get(spec.name)
        if "bool" in spec.type:
            parser.add_argument(
                flag, dest=spec.name, action="store_const", const="true",
                default=None, help=help_text,
            )
        else:
            parser.add_argument(flag, dest=spec.name, default=None, help=help_text)


def _build_config(args: argparse.Namespace) -> RunConfig:
    values = load_config_file(args.config) if args.config else {}
    for spec in dataclasses.fields(RunConfig):
        flag_value = getattr(args, spec.name, None)
        if flag_value is not None:
            values[spec.name] = flag_value
    config = RunConfig.from_mapping(values)
    config.validate()
    return config


def cmd_ingest(args) -> int:
    config = _build_config(args)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    splits = load_splits(config)
    for name, pairs in splits.items():
        if not pairs:
            continue
        instances = derive_labels(pairs, case_sensitive=config.mask_case_sensitive)
        path = out / f"instances_{name}.jsonl"
        save_instances(instances, path)
        print(f"wrote {path} ({len(instances)} instances from {len(pairs)} pairs)")
    return 0


def cmd_train(args) -> int:
    config = _build_config(args)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    splits = load_splits(config)
    train_insts = derive_labels(splits["train"], case_sensitive=config.mask_case_sensitive)
    valid_insts = derive_labels(splits["valid"], case_sensitive=config.mask_case_sensitive)
    vocab = features.build_vocabulary(train_insts, config.max_n, config.min_df)
    lexicon = None
    if config.lexicon:
        lexicon = features.load_aoa_lexicon(
            config.lexicon, config.lexicon_word_col, config.lexicon_rating_col
        )
    if config.classifier == "nb":
        model = classify.train_naive_bayes(train_insts, vocab, alpha=config.nb_alpha)
    else:
        hyper = classify.Hyper(
            learning_rate=config.learning_rate,
            l2=config.l2,
            epochs=config.epochs,
            seed=config.seed,
            patience=config.patience,
            batch_size=config.batch_size,
        )
        model = classify.train_logistic_regression(
            train_insts, vocab, lexicon, hyper, validation=valid_insts or None
        )
    vocab.save(out / "vocab.json")
    classify.save_model(model, out / "model.json")
    if valid_insts:
        acc = classify.evaluate_accuracy(model, valid_insts, vocab, lexicon)
        print(f"validation accuracy: {acc:.4f}")
    print(f"wrote {out / 'model.json'} and {out / 'vocab.json'}")
    return 0


def cmd_evaluate(args) -> int:
    config = _build_config(args)
    rep = evaluate_dataset(config)
    written = report_mod.write_report(rep, config.out)
    macro = rep.macro.means
    parts = [f"{k}={macro[k]:.4f}" for k in ("P", "R", "F1", "TER") if k in macro]
    if rep.accuracy is not None:
        parts.append(f"accuracy={rep.accuracy:.4f}")
    print(f"{config.dataset}/{config.explainer}: " + " ".join(parts))
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_explain(args) -> int:
    config = _build_config(args)
    rep = evaluate_dataset(config)
    written = report_mod.write_report(rep, config.out, formats=("highlighted-text",))
    print(f"explained {rep.macro.n} sentences")
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_correlate(args) -> int:
    rep = json.loads(Path(args.report).read_text(encoding="utf-8"))
    correlations = domain_correlations(rep.get("per_domain") or [])
    if correlations is None:
        print("no per-domain data to correlate (need >= 2 domains)", file=sys.stderr)
        return 1
    rep["correlations"] = correlations
    out = Path(args.out or Path(args.report).parent)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "correlations.tsv"
    report_mod.write_correlations_tsv(rep, path)
    for metric, row in sorted(correlations.items()):
        for method, value in sorted(row.items()):
            print(f"classification_F1 vs {metric}\t{method}\t{value:.4f}")
    print(f"wrote {path}")
    return 0


def cmd_report(args) -> int:
    reports = [
        json.loads(Path(p).read_text(encoding="utf-8")) for p in args.reports
    ]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if len(reports) == 1:
        written = report_mod.write_report(
            reports[0], out, formats=("tsv", "highlighted-text", "figures")
        )
    else:
        report_mod.write_tsv(reports, out / "report.tsv")
        written = [out / "report.tsv"]
        written.extend(report_mod.render_figures(reports, out / "figures"))
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> Parser:
    parser = Parser(prog="complexity-lens", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, doc in (
        ("ingest", cmd_ingest, "derive labeled instances and reference masks"),
        ("train", cmd_train, "train a classifier and save model + vocabulary"),
        ("explain", cmd_explain, "write highlight masks for complex test sentences"),
        ("evaluate", cmd_evaluate, "one-shot run: ingest, train, explain, score, report"),
    ):
        p = sub.add_parser(name, help=doc)
        _add_config_flags(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("correlate", help="per-domain correlation table from a report")
    p.add_argument("--report", required=True, help="report.json from evaluate")
    p.add_argument("--out", help="output directory (default: next to the report)")
    p.set_defaults(fn=cmd_correlate)

    p = sub.add_parser("report", help="re-render tables and figures from report JSON")
    p.add_argument("reports", nargs="+", help="one or more report.json files")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, CorpusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
