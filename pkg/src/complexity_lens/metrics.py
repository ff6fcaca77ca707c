"""Scoring of highlight masks against parallel simple sentences.

Tokenwise precision counts highlighted tokens of the complex sentence
that do not occur in the simple side; recall divides by all complex
tokens absent from the simple side.  Edit-based scores compare the
unhighlighted remainder of the complex sentence against the simple
reference: a plain word-level edit distance with a configurable
substitution cost, and a translation edit rate normalized by the
reference length.  Sentences where a denominator is empty leave that
metric undefined; macro averages run over defined values only and the
undefined counts are reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from complexity_lens.corpus import HighlightMask, Token

DEFAULT_SUB_COSTS = (1.0, 1.5, 2.0)

CORRELATION_METHODS = ("pearson", "spearman", "kendall_tau_b")


def _norm(item) -> str:
    return item.norm if isinstance(item, Token) else item


@dataclass(frozen=True)
class TokenwiseScores:
    """Precision/recall/F1 of a mask; None marks an undefined metric."""

    precision: float | None
    recall: float | None
    f1: float | None


@dataclass(frozen=True)
class SentenceScore:
    """All per-sentence metrics for one explained sentence."""

    precision: float | None
    recall: float | None
    f1: float | None
    edit_distances: dict[float, float]  # substitution cost -> ED
    ter: float


def score_highlights(
    predicted: HighlightMask,
    complex_tokens,
    simple_tokens,
    case_sensitive: bool = False,
) -> TokenwiseScores:
    """Tokenwise precision, recall, and F1 of a predicted mask.

    Precision is undefined when nothing is highlighted; recall is
    undefined when every complex token occurs in the simple side.  F1 is
    undefined when either is, and 0 when P + R = 0.  Membership follows
    the reference-mask rule: a type-level set of simple-side tokens,
    case-insensitive by default.
    """
    if len(predicted.bits) != len(complex_tokens):
        raise ValueError(
            f"mask length {len(predicted.bits)} != sentence length {len(complex_tokens)}"
        )
    def key(item) -> str:
        if isinstance(item, Token):
            return item.surface if case_sensitive else item.norm
        return item if case_sensitive else item.lower()

    present = {key(t) for t in simple_tokens}
    absent = [key(t) not in present for t in complex_tokens]

    highlighted = sum(predicted.bits)
    absent_total = sum(absent)
    hit = sum(1 for bit, miss in zip(predicted.bits, absent) if bit and miss)

    precision = hit / highlighted if highlighted else None
    recall = hit / absent_total if absent_total else None
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return TokenwiseScores(precision=precision, recall=recall, f1=f1)


def edit_distance(a, b, sub_cost: float = 1.0) -> float:
    """Minimal word-level edit cost between two token sequences.

    Insertions and deletions cost 1, substitutions cost ``sub_cost``;
    tokens compare equal on their norms.  Computed over the standard
    (|a|+1) x (|b|+1) dynamic-programming grid, two rows at a time.
    """
    if sub_cost <= 0:
        raise ValueError("sub_cost must be > 0")
    xs = [_norm(t) for t in a]
    ys = [_norm(t) for t in b]
    prev = [float(j) for j in range(len(ys) + 1)]
    for i, x in enumerate(xs, start=1):
        cur = [float(i)] + [0.0] * len(ys)
        for j, y in enumerate(ys, start=1):
            cur[j] = min(
                prev[j] + 1.0,
                cur[j - 1] + 1.0,
                prev[j - 1] + (0.0 if x == y else sub_cost),
            )
        prev = cur
    return prev[-1]


def unhighlighted_remainder(tokens, mask: HighlightMask):
    """Tokens whose mask bit is 0, original order preserved."""
    if len(mask.bits) != len(tokens):
        raise ValueError(
            f"mask length {len(mask.bits)} != sentence length {len(tokens)}"
        )
    return tuple(t for t, bit in zip(tokens, mask.bits) if bit == 0)


def ter(remainder, reference) -> float:
    """Unit edit count from the remainder to the reference, over |reference|.

    The simple sentence is the single reference, so the denominator is its
    length; edits are plain insertions/deletions/substitutions at cost 1.
    """
    if len(reference) == 0:
        raise ValueError("TER is undefined for an empty reference")
    return edit_distance(remainder, reference, sub_cost=1.0) / len(reference)


def score_sentence(
    predicted: HighlightMask,
    complex_tokens,
    simple_tokens,
    sub_costs=DEFAULT_SUB_COSTS,
    case_sensitive: bool = False,
) -> SentenceScore:
    """All metrics for one sentence: P/R/F1 plus ED variants and TER."""
    tok = score_highlights(predicted, complex_tokens, simple_tokens, case_sensitive)
    remainder = unhighlighted_remainder(complex_tokens, predicted)
    eds = {c: edit_distance(remainder, simple_tokens, c) for c in sub_costs}
    return SentenceScore(
        precision=tok.precision,
        recall=tok.recall,
        f1=tok.f1,
        edit_distances=eds,
        ter=ter(remainder, simple_tokens),
    )


def _metric_items(score: SentenceScore) -> dict[str, float | None]:
    items: dict[str, float | None] = {
        "P": score.precision,
        "R": score.recall,
        "F1": score.f1,
        "TER": score.ter,
    }
    for cost, value in score.edit_distances.items():
        items[f"ED_{cost:g}"] = value
    return items


@dataclass
class MacroAggregates:
    """Arithmetic means per metric plus counts of undefined sentences."""

    means: dict[str, float]
    undefined: dict[str, int]
    n: int


def macro_average(
    scores: list[SentenceScore], undefined_policy: str = "exclude"
) -> MacroAggregates:
    """Macro-average sentence scores.

    With the default ``exclude`` policy a metric's mean runs over the
    sentences where it is defined, and the number of undefined sentences
    is reported per metric.  The ``zero`` policy coerces undefined values
    to 0 instead (for sensitivity analysis); a metric defined nowhere is
    absent from the means either way.
    """
    if undefined_policy not in ("exclude", "zero"):
        raise ValueError(f"unknown undefined_policy {undefined_policy!r}")
    sums: dict[str, float] = {}
    defined: dict[str, int] = {}
    undefined: dict[str, int] = {}
    for score in scores:
        for name, value in _metric_items(score).items():
            undefined.setdefault(name, 0)
            if value is None:
                undefined[name] += 1
                if undefined_policy == "zero":
                    sums[name] = sums.get(name, 0.0)
                    defined[name] = defined.get(name, 0) + 1
            else:
                sums[name] = sums.get(name, 0.0) + value
                defined[name] = defined.get(name, 0) + 1
    means = {
        name: sums[name] / defined[name] for name in sums if defined.get(name, 0) > 0
    }
    return MacroAggregates(means=means, undefined=undefined, n=len(scores))


def correlate(x, y, method: str = "pearson") -> float:
    """Correlation coefficient between two equal-length vectors.

    Pearson is covariance over the product of standard deviations;
    Spearman is Pearson on average ranks; Kendall tau-b counts concordant
    minus discordant pairs with tie corrections.  Zero variance in either
    vector leaves the coefficient undefined and raises.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length vectors")
    if len(x) < 2:
        raise ValueError("correlation requires at least 2 points")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("correlation undefined for zero-variance input")
    if method == "pearson":
        coefficient = stats.pearsonr(x, y)[0]
    elif method == "spearman":
        coefficient = stats.spearmanr(x, y)[0]
    elif method == "kendall_tau_b":
        coefficient = stats.kendalltau(x, y, variant="b")[0]
    else:
        raise ValueError(f"unknown correlation method {method!r}")
    return float(coefficient)


@dataclass
class DomainReport:
    """Per-domain slice: classifier F1 plus explanation macro scores."""

    domain: str
    n_explained: int
    classification_f1: float | None
    macro: MacroAggregates


@dataclass
class EvaluationReport:
    """Everything one evaluation run produces.

    ``per_sentence`` records carry the sentence id, domain, token
    surfaces, the predicted mask, and each metric value (None where
    undefined) so that reports can be re-rendered without re-running the
    pipeline.
    """

    dataset: str
    explainer: str
    classifier: str
    seed: int
    macro: MacroAggregates
    per_sentence: list[dict] = field(default_factory=list)
    accuracy: float | None = None
    confusion: dict[str, int] | None = None
    z_test: dict | None = None
    per_domain: list[DomainReport] = field(default_factory=list)
    correlations: dict[str, dict[str, float]] | None = None
