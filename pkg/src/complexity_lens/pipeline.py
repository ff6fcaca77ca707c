"""End-to-end evaluation runs: ingest, train, explain, score, aggregate.

A run is described by a :class:`RunConfig` (built from a flat key=value
config file and/or CLI flags).  :func:`evaluate_dataset` executes the full
loop and returns an :class:`~complexity_lens.metrics.EvaluationReport`:
derive labels and reference masks, train (or load) the classifier, report
test accuracy, explain every gold-complex test sentence with the chosen
strategy, score the masks against the aligned simple sentences, and
aggregate overall, per domain, and across domains via rank correlations.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

from complexity_lens import classify, explain, features, metrics
from complexity_lens.corpus import (
    LabeledInstance,
    SentencePair,
    derive_labels,
    load_parallel_corpus,
)

log = logging.getLogger(__name__)

CLASSIFIERS = ("lr", "nb")
EXPLAINERS = ("random", "lexicon", "top_features", "lime", "shap", "reference")

# Sidecar suffix for per-pair domain tags, line-aligned with the corpus.
DOMAIN_SIDECAR_SUFFIX = ".domains"

# Explanation metrics correlated against per-domain classification F1.
CORRELATED_METRICS = ("F1", "TER", "ED_1.5")


class ConfigError(ValueError):
    """Invalid run configuration (bad value or missing path)."""


@dataclass
class RunConfig:
    """Everything a reproducible evaluation run needs."""

    # Corpus: either one file split by fractions, or pre-split paths.
    corpus: str | None = None
    train: str | None = None
    valid: str | None = None
    test: str | None = None
    corpus_format: str = "tsv"  # "tsv" or "two-file"
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    dataset: str = "corpus"

    tokenize_mode: str = "whitespace"
    mask_case_sensitive: bool = False

    max_n: int = 3
    min_df: int = 2
    lexicon: str | None = None
    lexicon_word_col: str = "Word"
    lexicon_rating_col: str = "Rating.Mean"
    hard_aoa_threshold: float = 10.0

    classifier: str = "lr"
    model: str | None = None  # load instead of training
    compare_classifiers: bool = False
    learning_rate: float = 0.1
    l2: float = 1e-4
    epochs: int = 50
    patience: int = 5
    batch_size: int = 32
    nb_alpha: float = 1.0

    explainer: str = "lime"
    budget_preset: str | None = None  # newsela / wikilarge / biendata
    max_highlights: int | None = None
    lime_samples: int = 1000
    lime_kernel_width: float | None = None
    lexicon_mode: str = "threshold"
    lexicon_threshold: float = 10.0

    sub_costs: tuple[float, ...] = (1.0, 1.5, 2.0)
    undefined_policy: str = "exclude"

    seed: int = 0
    out: str = "out"

    def validate(self) -> None:
        if self.corpus is None and not (self.train and self.test):
            raise ConfigError("provide either --corpus or --train and --test paths")
        if self.corpus_format not in ("tsv", "two-file"):
            raise ConfigError(f"unknown corpus format {self.corpus_format!r}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"unknown classifier {self.classifier!r}")
        if self.explainer not in EXPLAINERS:
            raise ConfigError(f"unknown explainer {self.explainer!r}")
        if self.explainer == "lexicon" and not self.lexicon:
            raise ConfigError("the lexicon explainer needs --lexicon")
        if self.budget_preset and self.budget_preset not in explain.HIGHLIGHT_BUDGETS:
            raise ConfigError(f"unknown budget preset {self.budget_preset!r}")
        if self.undefined_policy not in ("exclude", "zero"):
            raise ConfigError(f"unknown undefined policy {self.undefined_policy!r}")
        if len(self.split_fractions) != 3 or abs(sum(self.split_fractions) - 1) > 1e-9:
            raise ConfigError("split fractions must be three numbers summing to 1")
        for path in self._referenced_paths():
            if not Path(path).exists():
                raise ConfigError(f"path does not exist: {path}")

    def _referenced_paths(self) -> list[str]:
        paths = []
        for base in (self.corpus, self.train, self.valid, self.test):
            if base is None:
                continue
            if self.corpus_format == "two-file":
                paths.extend([base + ".complex", base + ".simple"])
            else:
                paths.append(base)
        if self.lexicon:
            paths.append(self.lexicon)
        if self.model:
            paths.append(self.model)
        return paths

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        """Build a config from string-valued settings, coercing field types."""
        kwargs = {}
        by_name = {f.name: f for f in dataclasses.fields(cls)}
        for key, raw in mapping.items():
            name = key.replace("-", "_")
            if name not in by_name:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[name] = _coerce(raw, by_name[name])
        return cls(**kwargs)


def _coerce(raw, spec: dataclasses.Field):
    if raw is None or not isinstance(raw, str):
        return raw
    text = raw.strip()
    if text.lower() in ("none", ""):
        return None
    hint = spec.type
    if "bool" in hint:
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"cannot parse boolean {raw!r} for {spec.name}")
    if "tuple" in hint:
        return tuple(float(part) for part in text.split(","))
    try:
        if "int" in hint:
            return int(text)
        if "float" in hint:
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {raw!r} for {spec.name}") from exc
    return text


def load_config_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` config file; # starts a comment."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno + 1}: expected key = value")
        key, value = stripped.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _sidecar(base: str) -> str | None:
    candidate = base + DOMAIN_SIDECAR_SUFFIX
    return candidate if Path(candidate).exists() else None


def _load_one(config: RunConfig, base: str, split: str, start_id: int):
    if config.corpus_format == "two-file":
        source = (base + ".complex", base + ".simple")
    else:
        source = base
    return load_parallel_corpus(
        source,
        fmt=config.corpus_format,
        split=split,
        tokenize_mode=config.tokenize_mode,
        domains_path=_sidecar(base),
        start_id=start_id,
    )


def load_splits(config: RunConfig) -> dict[str, list[SentencePair]]:
    """Load train/valid/test pairs with corpus-wide unique pair ids.

    Pre-split paths are used when given; otherwise the single corpus file
    is partitioned contiguously in file order by ``split_fractions``.
    """
    if config.train:
        splits: dict[str, list[SentencePair]] = {}
        offset = 0
        for split, base in (
            ("train", config.train),
            ("valid", config.valid),
            ("test", config.test),
        ):
            pairs = _load_one(config, base, split, offset) if base else []
            splits[split] = pairs
            offset += len(pairs)
        return splits

    pairs = _load_one(config, config.corpus, "train", 0)
    n = len(pairs)
    n_train = int(config.split_fractions[0] * n)
    n_valid = int(config.split_fractions[1] * n)
    return {
        "train": pairs[:n_train],
        "valid": [
            dataclasses.replace(p, split="valid")
            for p in pairs[n_train : n_train + n_valid]
        ],
        "test": [
            dataclasses.replace(p, split="test") for p in pairs[n_train + n_valid :]
        ],
    }


def _build_explainer_config(config: RunConfig) -> explain.ExplainerConfig:
    budget = config.max_highlights
    if budget is None and config.budget_preset:
        preset = explain.HIGHLIGHT_BUDGETS[config.budget_preset]
        budget = preset.get(config.explainer)
    if budget is None:
        budget = 200 if config.explainer == "top_features" else 10
    return explain.ExplainerConfig(
        max_highlights=budget,
        lime_samples=config.lime_samples,
        lime_kernel_width=config.lime_kernel_width,
        lexicon_mode=config.lexicon_mode,
        lexicon_threshold=config.lexicon_threshold,
        seed=config.seed,
    )


def _train_model(config, kind, train_insts, valid_insts, vocab, lexicon):
    if kind == "nb":
        return classify.train_naive_bayes(train_insts, vocab, alpha=config.nb_alpha)
    hyper = classify.Hyper(
        learning_rate=config.learning_rate,
        l2=config.l2,
        epochs=config.epochs,
        seed=config.seed,
        patience=config.patience,
        batch_size=config.batch_size,
    )
    return classify.train_logistic_regression(
        train_insts, vocab, lexicon, hyper, validation=valid_insts or None
    )


def _classification_f1(pairs_of_pred_gold) -> float | None:
    tp = fp = fn = 0
    for predicted, gold in pairs_of_pred_gold:
        if predicted == 1 and gold == 1:
            tp += 1
        elif predicted == 1 and gold == 0:
            fp += 1
        elif predicted == 0 and gold == 1:
            fn += 1
    denominator = 2 * tp + fp + fn
    return 2 * tp / denominator if denominator else None


def _make_explain_fn(config, expl_config, model, vocab, lexicon, background):
    """Bind the configured strategy to a (pair, ref_mask) -> mask callable.

    Per-sentence randomness uses the global seed XOR the pair id, so each
    sentence is reproducible independently of evaluation order.
    """
    kind = config.explainer
    if kind == "reference":
        return lambda pair, ref_mask: ref_mask
    if kind == "random":
        return lambda pair, ref_mask: explain.explain_random(
            pair.complex, config.seed ^ pair.id
        )
    if kind == "lexicon":
        return lambda pair, ref_mask: explain.explain_lexicon(
            pair.complex, lexicon, expl_config
        )
    if kind == "top_features":
        chosen = explain.top_feature_set(model, vocab, expl_config.max_highlights)
        return lambda pair, ref_mask: explain.mask_from_token_set(chosen, pair.complex)
    if kind == "shap":
        return lambda pair, ref_mask: explain.explain_shap_linear(
            model, vocab, pair.complex, background, lexicon
        )

    def lime_fn(pair, ref_mask):
        per_sentence = dataclasses.replace(expl_config, seed=config.seed ^ pair.id)
        return explain.explain_lime(
            lambda toks: classify.predict(model, toks, vocab, lexicon).score,
            pair.complex,
            per_sentence,
        )

    return lime_fn


def evaluate_dataset(config: RunConfig) -> metrics.EvaluationReport:
    """Run the full pipeline described by ``config``.

    Every test sentence with gold label 1 is explained exactly once, in
    pair-id order; per-sentence randomness is seeded with the global seed
    XOR the pair id, so reports are reproducible byte for byte.
    """
    config.validate()
    splits = load_splits(config)
    instances = {
        name: derive_labels(pairs, case_sensitive=config.mask_case_sensitive)
        for name, pairs in splits.items()
    }
    if not instances["train"]:
        raise ConfigError("training split is empty")
    if not instances["test"]:
        raise ConfigError("test split is empty")

    vocab = features.build_vocabulary(
        instances["train"], max_n=config.max_n, min_df=config.min_df
    )
    lexicon = None
    if config.lexicon:
        lexicon = features.load_aoa_lexicon(
            config.lexicon, config.lexicon_word_col, config.lexicon_rating_col
        )

    if config.model:
        model = classify.load_model(config.model)
        if model.vocab_fingerprint != vocab.fingerprint:
            raise classify.VocabularyMismatchError(
                f"{config.model} was trained against a different vocabulary"
            )
    else:
        model = _train_model(
            config, config.classifier, instances["train"], instances["valid"], vocab, lexicon
        )

    predictions = classify.predict_many(model, instances["test"], vocab, lexicon)
    gold = [inst.label for inst in instances["test"]]
    accuracy = sum(p.label == g for p, g in zip(predictions, gold)) / len(gold)
    confusion = {
        "tp": sum(1 for p, g in zip(predictions, gold) if p.label == 1 and g == 1),
        "fp": sum(1 for p, g in zip(predictions, gold) if p.label == 1 and g == 0),
        "fn": sum(1 for p, g in zip(predictions, gold) if p.label == 0 and g == 1),
        "tn": sum(1 for p, g in zip(predictions, gold) if p.label == 0 and g == 0),
    }

    z_test = None
    if config.compare_classifiers:
        other_kind = "nb" if config.classifier == "lr" else "lr"
        other = _train_model(
            config, other_kind, instances["train"], instances["valid"], vocab, lexicon
        )
        other_acc = classify.evaluate_accuracy(other, instances["test"], vocab, lexicon)
        result = classify.compare_accuracy_ztest(
            accuracy, len(gold), other_acc, len(gold)
        )
        z_test = {
            "classifier_a": config.classifier,
            "accuracy_a": accuracy,
            "classifier_b": other_kind,
            "accuracy_b": other_acc,
            "z": result.z,
            "p_two_tailed": result.p_two_tailed,
        }

    needs_linear = config.explainer in ("top_features", "shap")
    if needs_linear and not isinstance(model, classify.LinearModel):
        raise ConfigError(
            f"explainer {config.explainer!r} requires the lr classifier"
        )
    background = None
    if config.explainer == "shap":
        background = features.mean_feature_vector(instances["train"], vocab, lexicon)
    expl_config = _build_explainer_config(config)

    # Only gold-complex test sentences are explained.
    complex_instances = {
        inst.pair_id: inst for inst in instances["test"] if inst.side == "complex"
    }
    targets = [p for p in splits["test"] if complex_instances[p.id].label == 1]

    explain_fn = _make_explain_fn(
        config, expl_config, model, vocab, lexicon, background
    )
    per_sentence: list[dict] = []
    scored: list[metrics.SentenceScore] = []
    by_domain: dict[str, list[metrics.SentenceScore]] = {}
    for pair in targets:
        try:
            mask = explain_fn(pair, complex_instances[pair.id].ref_mask)
            score = metrics.score_sentence(
                mask,
                pair.complex,
                pair.simple,
                sub_costs=config.sub_costs,
                case_sensitive=config.mask_case_sensitive,
            )
        except Exception as exc:
            raise RuntimeError(f"while explaining pair {pair.id}: {exc}") from exc
        scored.append(score)
        if pair.domain:
            by_domain.setdefault(pair.domain, []).append(score)
        record = {
            "id": pair.id,
            "domain": pair.domain,
            "tokens": [t.surface for t in pair.complex],
            "mask": list(mask.bits),
            "n_highlights": mask.count,
        }
        record.update(metrics._metric_items(score))
        per_sentence.append(record)

    macro = metrics.macro_average(scored, undefined_policy=config.undefined_policy)

    per_domain: list[metrics.DomainReport] = []
    domain_predictions: dict[str, list[tuple[int, int]]] = {}
    for inst, pred in zip(instances["test"], predictions):
        if inst.domain:
            domain_predictions.setdefault(inst.domain, []).append(
                (pred.label, inst.label)
            )
    for domain in sorted(by_domain):
        per_domain.append(
            metrics.DomainReport(
                domain=domain,
                n_explained=len(by_domain[domain]),
                classification_f1=_classification_f1(domain_predictions.get(domain, [])),
                macro=metrics.macro_average(
                    by_domain[domain], undefined_policy=config.undefined_policy
                ),
            )
        )

    correlations = domain_correlations(
        [
            {"classification_f1": d.classification_f1, "macro": d.macro.means}
            for d in per_domain
        ]
    )

    return metrics.EvaluationReport(
        dataset=config.dataset,
        explainer=config.explainer,
        classifier=config.classifier,
        seed=config.seed,
        macro=macro,
        per_sentence=per_sentence,
        accuracy=accuracy,
        confusion=confusion,
        z_test=z_test,
        per_domain=per_domain,
        correlations=correlations,
    )


def domain_correlations(rows: list[dict]) -> dict[str, dict[str, float]] | None:
    """Correlate per-domain classification F1 with explanation metrics.

    ``rows`` follow the per-domain report shape: each carries a
    ``classification_f1`` value and a ``macro`` mean-per-metric map.
    Entries with fewer than two usable domains or zero variance are
    skipped.
    """
    if len(rows) < 2:
        return None
    out: dict[str, dict[str, float]] = {}
    for metric in CORRELATED_METRICS:
        xs, ys = [], []
        for row_data in rows:
            f1 = row_data["classification_f1"]
            if f1 is None or metric not in row_data["macro"]:
                continue
            xs.append(f1)
            ys.append(row_data["macro"][metric])
        if len(xs) < 2:
            continue
        row = {}
        for method in metrics.CORRELATION_METHODS:
            try:
                row[method] = metrics.correlate(xs, ys, method)
            except ValueError:
                log.warning("correlation %s vs %s undefined", metric, method)
        if row:
            out[metric] = row
    return out or None
