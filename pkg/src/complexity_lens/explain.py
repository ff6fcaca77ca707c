"""Token-highlight explainers for complexity predictions.

Five strategies produce a binary highlight mask over the tokens of a
sentence judged complex: uniform-random highlights, lexicon lookup,
globally top-weighted classifier unigrams, a locally fitted perturbation
surrogate, and exact additive attributions for linear models.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from complexity_lens.classify import LinearModel
from complexity_lens.corpus import HighlightMask
from complexity_lens.features import NGRAM_SEP, Lexicon, Vocabulary, featurize, iter_ngrams

# Ridge strength for the local surrogate fit.
SURROGATE_RIDGE = 1.0

# Tuned highlight budgets per dataset: the number of top classifier
# unigrams to mark, and the per-sentence cap for the surrogate explainer.
HIGHLIGHT_BUDGETS = {
    "newsela": {"top_features": 200, "lime": 10},
    "wikilarge": {"top_features": 20000, "lime": 50},
    "biendata": {"top_features": 200, "lime": 10},
}


@dataclass
class ExplainerConfig:
    """Knobs shared by the explainers.

    ``max_highlights`` caps how many tokens the budgeted explainers mark.
    ``lime_kernel_width`` of None selects 0.75 * sqrt(sentence length).
    """

    max_highlights: int = 10
    lime_samples: int = 1000
    lime_kernel_width: float | None = None
    lexicon_mode: str = "threshold"  # "presence" or "threshold"
    lexicon_threshold: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_highlights < 0:
            raise ValueError("max_highlights must be >= 0")
        if self.lime_samples < 1:
            raise ValueError("lime_samples must be >= 1")
        if self.lime_kernel_width is not None and self.lime_kernel_width <= 0:
            raise ValueError("lime_kernel_width must be > 0")
        if self.lexicon_mode not in ("presence", "threshold"):
            raise ValueError(f"unknown lexicon_mode {self.lexicon_mode!r}")


def explain_random(tokens, seed: int) -> HighlightMask:
    """Draw a highlight count k uniformly from {0..n}, then k positions."""
    n = len(tokens)
    bits = [0] * n
    if n:
        rng = np.random.default_rng(seed)
        k = int(rng.integers(0, n + 1))
        for pos in rng.choice(n, size=k, replace=False):
            bits[pos] = 1
    return HighlightMask(bits=tuple(bits), kind="predicted")


def explain_lexicon(
    tokens, lexicon: Lexicon, config: ExplainerConfig
) -> HighlightMask:
    """Highlight tokens found in the lexicon.

    Presence mode marks every lexicon word; threshold mode marks only
    words whose rating reaches ``config.lexicon_threshold``.  Words absent
    from the lexicon are never highlighted in threshold mode.
    """
    bits = []
    for token in tokens:
        rating = lexicon.get(token.norm)
        if config.lexicon_mode == "presence":
            bits.append(int(rating is not None))
        else:
            bits.append(int(rating is not None and rating >= config.lexicon_threshold))
    return HighlightMask(bits=tuple(bits), kind="predicted")


def ranked_positive_unigrams(model: LinearModel, vocab: Vocabulary) -> list[str]:
    """Unigram keys with positive weight, heaviest first (ties by key)."""
    scored = [
        (key, model.weights[fid])
        for key, fid in vocab.entries.items()
        if NGRAM_SEP not in key and model.weights[fid] > 0
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return [key for key, _ in scored]


def top_feature_set(model: LinearModel, vocab: Vocabulary, k: int) -> set[str]:
    """The k heaviest positive unigrams; clips with a warning if k is too big."""
    if not isinstance(model, LinearModel):
        raise TypeError("top-feature explanation requires a linear model")
    ranked = ranked_positive_unigrams(model, vocab)
    if k > len(ranked):
        warnings.warn(
            f"requested {k} top unigrams but only {len(ranked)} have positive "
            "weight; clipping",
            stacklevel=2,
        )
        k = len(ranked)
    return set(ranked[:k])


def mask_from_token_set(chosen: set[str], tokens) -> HighlightMask:
    return HighlightMask(
        bits=tuple(int(t.norm in chosen) for t in tokens), kind="predicted"
    )


def explain_top_features(
    model: LinearModel, vocab: Vocabulary, tokens, k: int
) -> HighlightMask:
    """Highlight tokens whose unigram is among the k heaviest positive weights.

    The top-k set is global to the model: the same k unigrams are marked
    in every sentence.
    """
    return mask_from_token_set(top_feature_set(model, vocab, k), tokens)


def _top_positive_positions(coefs: np.ndarray, k: int) -> list[int]:
    # Largest positive coefficients win; equal coefficients break toward
    # the lower token index.
    positive = [(i, c) for i, c in enumerate(coefs) if c > 0]
    positive.sort(key=lambda item: (-item[1], item[0]))
    return [i for i, _ in positive[:k]]


def explain_lime(score_fn, tokens, config: ExplainerConfig) -> HighlightMask:
    """Fit a local linear surrogate to the model around one sentence.

    Perturbed copies keep each token with probability 0.5; dropped tokens
    are removed before the model scores the copy.  Samples are weighted by
    exp(-D^2 / width^2) where D is the fraction of dropped tokens, and a
    ridge regression from keep-masks to scores yields per-token
    coefficients.  The up-to-``max_highlights`` largest positive
    coefficients become highlights.
    """
    n = len(tokens)
    if n == 0:
        return HighlightMask(bits=(), kind="predicted")
    rng = np.random.default_rng(config.seed)
    Z = (rng.random((config.lime_samples, n)) < 0.5).astype(np.float64)
    if bool(np.all(Z == Z[0])):
        warnings.warn("degenerate surrogate design: all samples identical", stacklevel=2)
        return HighlightMask(bits=(0,) * n, kind="predicted")

    scores = np.array(
        [score_fn([tok for tok, keep in zip(tokens, row) if keep]) for row in Z]
    )
    width = config.lime_kernel_width or 0.75 * np.sqrt(n)
    distance = 1.0 - Z.mean(axis=1)
    sample_w = np.exp(-(distance**2) / width**2)

    # Weighted ridge with an unregularized intercept column.
    A = np.hstack([Z, np.ones((Z.shape[0], 1))])
    AW = A * sample_w[:, None]
    gram = A.T @ AW
    gram[np.arange(n), np.arange(n)] += SURROGATE_RIDGE
    beta = np.linalg.solve(gram, AW.T @ scores)
    coefs = beta[:n]

    bits = [0] * n
    for pos in _top_positive_positions(coefs, config.max_highlights):
        bits[pos] = 1
    return HighlightMask(bits=tuple(bits), kind="predicted")


def shap_values(
    model: LinearModel, x: dict[int, float], background: np.ndarray
) -> np.ndarray:
    """Per-feature attributions w_j * (x_j - mu_j) for a linear model.

    These are the exact Shapley values under feature independence, and
    they satisfy local accuracy: their sum equals the margin at x minus
    the margin at the background.
    """
    background = np.asarray(background, dtype=np.float64)
    if background.shape != model.weights.shape:
        raise ValueError(
            f"background dimension {background.shape} does not match model "
            f"dimension {model.weights.shape}"
        )
    dense = np.zeros_like(background)
    for fid, v in x.items():
        dense[fid] = v
    return model.weights * (dense - background)


def explain_shap_linear(
    model: LinearModel,
    vocab: Vocabulary,
    tokens,
    background: np.ndarray,
    lexicon: Lexicon | None = None,
) -> HighlightMask:
    """Highlight tokens with positive summed linear-Shapley attribution.

    A token's attribution is the sum of attributions of every
    in-vocabulary n-gram feature that covers it in this sentence; lexical
    features belong to no token.
    """
    x = featurize(tokens, vocab, lexicon)
    phi = shap_values(model, x, background)

    norms = tuple(t.norm for t in tokens)
    features_at: list[set[int]] = [set() for _ in norms]
    for key, start, length in iter_ngrams(norms, vocab.max_n):
        fid = vocab.entries.get(key)
        if fid is not None:
            for pos in range(start, start + length):
                features_at[pos].add(fid)
    attribution = [sum(phi[fid] for fid in fids) for fids in features_at]
    bits = tuple(int(a > 0) for a in attribution)
    return HighlightMask(bits=bits, kind="predicted")
