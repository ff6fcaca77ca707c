"""Complexity lens: predict whether text needs simplification and show why.

The library covers the full loop on parallel complex-simple corpora:
deriving binary complexity labels and token-level reference highlights,
training transparent classifiers (multinomial naive Bayes, logistic
regression), producing highlight masks with five explanation strategies,
and scoring masks with tokenwise precision/recall/F1, word-level edit
distance, translation edit rate, and rank correlations across domains.
"""

from complexity_lens.corpus import (
    HighlightMask,
    LabeledInstance,
    SentencePair,
    Token,
    derive_labels,
    derive_reference_mask,
    load_parallel_corpus,
    tokenize,
)
from complexity_lens.features import (
    LEXICAL_DIM,
    Lexicon,
    Vocabulary,
    build_vocabulary,
    featurize_lexical,
    featurize_ngrams,
    load_aoa_lexicon,
)
from complexity_lens.classify import (
    Hyper,
    LinearModel,
    NBModel,
    compare_accuracy_ztest,
    evaluate_accuracy,
    predict,
    train_logistic_regression,
    train_naive_bayes,
)
from complexity_lens.explain import (
    ExplainerConfig,
    explain_lexicon,
    explain_lime,
    explain_random,
    explain_shap_linear,
    explain_top_features,
)
from complexity_lens.metrics import (
    EvaluationReport,
    SentenceScore,
    correlate,
    edit_distance,
    macro_average,
    score_highlights,
    ter,
    unhighlighted_remainder,
)
from complexity_lens.pipeline import RunConfig, evaluate_dataset

__version__ = "0.1.0"
