"""Binary complexity classifiers: multinomial naive Bayes and logistic regression.

Both models are trained from scratch on sparse feature vectors.  Naive
Bayes works over n-gram counts only; logistic regression works over the
full n-gram + lexical feature space and is fitted by seeded mini-batch
gradient descent with early stopping on validation accuracy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.special import expit, logsumexp

from complexity_lens.corpus import LabeledInstance
from complexity_lens.features import (
    Lexicon,
    Vocabulary,
    design_matrix,
    feature_dim,
    featurize,
    featurize_ngrams,
)


class VocabularyMismatchError(ValueError):
    """Model and vocabulary fingerprints disagree."""


@dataclass
class Hyper:
    """Logistic-regression training knobs."""

    learning_rate: float = 0.1
    l2: float = 1e-4
    epochs: int = 50
    seed: int = 0
    patience: int = 5
    batch_size: int = 32

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


# Default random-search grid for hyperparameter tuning on a validation set.
DEFAULT_GRID = {
    "learning_rate": (0.01, 0.1),
    "l2": (1e-5, 1e-4, 1e-3),
}


@dataclass
class LinearModel:
    """Logistic-regression weights over n-gram ids plus the lexical block."""

    weights: np.ndarray
    bias: float
    vocab_fingerprint: str
    hyper: Hyper
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
            raise ValueError("model weights must be finite")


@dataclass
class NBModel:
    """Multinomial naive Bayes tables over n-gram counts."""

    priors: np.ndarray  # (2,) class priors, sum to 1
    log_likelihood: np.ndarray  # (2, vocab_size), Laplace-smoothed
    alpha: float
    vocab_fingerprint: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.priors = np.asarray(self.priors, dtype=np.float64)
        self.log_likelihood = np.asarray(self.log_likelihood, dtype=np.float64)
        if self.alpha <= 0:
            raise ValueError("smoothing alpha must be > 0")
        if not np.all((self.priors > 0) & (self.priors < 1)):
            raise ValueError("class priors must lie in (0, 1)")


@dataclass(frozen=True)
class Prediction:
    label: int
    score: float  # probability of label 1


def train_naive_bayes(
    instances: list[LabeledInstance], vocab: Vocabulary, alpha: float = 1.0
) -> NBModel:
    """Fit multinomial naive Bayes on n-gram counts.

    Priors are empirical label frequencies; per-feature likelihoods are
    Laplace-smoothed with ``alpha``.
    """
    if alpha <= 0:
        raise ValueError("smoothing alpha must be > 0")
    labels = {inst.label for inst in instances}
    if labels != {0, 1}:
        raise ValueError("training set must contain both labels")
    counts = np.zeros((2, len(vocab)), dtype=np.float64)
    docs = np.zeros(2, dtype=np.float64)
    for inst in instances:
        docs[inst.label] += 1
        for fid, v in featurize_ngrams(inst.tokens, vocab).items():
            counts[inst.label, fid] += v
    priors = docs / docs.sum()
    smoothed = counts + alpha
    log_likelihood = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    return NBModel(
        priors=priors,
        log_likelihood=log_likelihood,
        alpha=alpha,
        vocab_fingerprint=vocab.fingerprint,
        meta={"train_size": len(instances)},
    )


def logistic_loss(
    w: np.ndarray, b: float, X: sparse.csr_matrix, y: np.ndarray, l2: float
) -> float:
    """Mean logistic loss plus 0.5 * l2 * ||w||^2 (bias unregularized)."""
    z = X @ w + b
    per_example = y * np.logaddexp(0.0, -z) + (1.0 - y) * np.logaddexp(0.0, z)
    return float(per_example.mean() + 0.5 * l2 * np.dot(w, w))


def logistic_gradients(
    w: np.ndarray, b: float, X: sparse.csr_matrix, y: np.ndarray, l2: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of :func:`logistic_loss` w.r.t. weights and bias."""
    residual = expit(X @ w + b) - y
    grad_w = np.asarray(X.T @ residual).ravel() / X.shape[0] + l2 * w
    grad_b = float(residual.mean())
    return grad_w, grad_b


def _accuracy_from_scores(z: np.ndarray, y: np.ndarray) -> float:
    return float(((z >= 0.0).astype(np.int64) == y).mean())


def train_logistic_regression(
    instances: list[LabeledInstance],
    vocab: Vocabulary,
    lexicon: Lexicon | None = None,
    hyper: Hyper | None = None,
    validation: list[LabeledInstance] | None = None,
) -> LinearModel:
    """Fit L2-regularized logistic regression by mini-batch gradient descent.

    Shuffling is driven by ``hyper.seed``, so identical inputs reproduce
    identical weights.  After each epoch, accuracy on ``validation`` (or,
    when absent, on the training set) drives early stopping: training halts
    once ``hyper.patience`` epochs pass without improvement, and the
    best-scoring weights are returned.
    """
    hyper = hyper or Hyper()
    hyper.validate()
    if not instances:
        raise ValueError("empty training set")

    X = design_matrix(instances, vocab, lexicon)
    y = np.array([inst.label for inst in instances], dtype=np.float64)
    if validation is not None:
        X_val = design_matrix(validation, vocab, lexicon)
        y_val = np.array([inst.label for inst in validation], dtype=np.int64)
    else:
        X_val, y_val = X, y.astype(np.int64)

    dim = feature_dim(vocab)
    w = np.zeros(dim, dtype=np.float64)
    b = 0.0
    rng = np.random.default_rng(hyper.seed)
    n = X.shape[0]

    best_w, best_b = w.copy(), b
    best_acc = -1.0
    best_epoch = 0
    stale = 0
    epochs_run = 0

    for epoch in range(hyper.epochs):
        order = rng.permutation(n)
        for start in range(0, n, hyper.batch_size):
            idx = order[start : start + hyper.batch_size]
            Xb, yb = X[idx], y[idx]
            residual = expit(Xb @ w + b) - yb
            grad_w = np.asarray(Xb.T @ residual).ravel() / len(idx) + hyper.l2 * w
            w -= hyper.learning_rate * grad_w
            b -= hyper.learning_rate * residual.mean()
        epochs_run = epoch + 1

        loss = logistic_loss(w, b, X, y, hyper.l2)
        if not math.isfinite(loss):
            raise ArithmeticError(f"training diverged at epoch {epoch}: loss={loss}")
        acc = _accuracy_from_scores(X_val @ w + b, y_val)
        if acc > best_acc:
            best_acc = acc
            best_w, best_b = w.copy(), b
            best_epoch = epochs_run
            stale = 0
        else:
            stale += 1
            if stale >= hyper.patience:
                break

    return LinearModel(
        weights=best_w,
        bias=best_b,
        vocab_fingerprint=vocab.fingerprint,
        hyper=hyper,
        meta={
            "epochs_run": epochs_run,
            "best_epoch": best_epoch,
            "best_accuracy": best_acc,
            "validated_on": "validation" if validation is not None else "train",
            "train_size": len(instances),
        },
    )


def _dot_sparse(w: np.ndarray, vec: dict[int, float]) -> float:
    return float(sum(w[fid] * v for fid, v in vec.items()))


def predict(
    model: LinearModel | NBModel,
    tokens,
    vocab: Vocabulary,
    lexicon: Lexicon | None = None,
) -> Prediction:
    """Score one sentence; returns the label and the probability of label 1.

    Logistic regression labels 1 on scores >= 0.5 (the boundary counts as
    complex).  Naive Bayes breaks an exact posterior tie toward label 0.
    """
    if vocab.fingerprint != model.vocab_fingerprint:
        raise VocabularyMismatchError(
            "model was trained against a different vocabulary"
        )
    if isinstance(model, LinearModel):
        vec = featurize(tokens, vocab, lexicon)
        score = float(expit(_dot_sparse(model.weights, vec) + model.bias))
        return Prediction(label=int(score >= 0.5), score=score)
    vec = featurize_ngrams(tokens, vocab)
    log_joint = np.log(model.priors).copy()
    for fid, v in vec.items():
        log_joint += v * model.log_likelihood[:, fid]
    score = float(np.exp(log_joint[1] - logsumexp(log_joint)))
    return Prediction(label=int(log_joint[1] > log_joint[0]), score=score)


def predict_many(
    model: LinearModel | NBModel,
    instances: list[LabeledInstance],
    vocab: Vocabulary,
    lexicon: Lexicon | None = None,
) -> list[Prediction]:
    return [predict(model, inst.tokens, vocab, lexicon) for inst in instances]


def evaluate_accuracy(
    model: LinearModel | NBModel,
    instances: list[LabeledInstance],
    vocab: Vocabulary,
    lexicon: Lexicon | None = None,
) -> float:
    """Fraction of instances whose predicted label matches the gold label."""
    if not instances:
        raise ValueError("cannot evaluate on an empty instance set")
    preds = predict_many(model, instances, vocab, lexicon)
    return sum(p.label == inst.label for p, inst in zip(preds, instances)) / len(
        instances
    )


@dataclass(frozen=True)
class ZTestResult:
    z: float
    p_two_tailed: float


def compare_accuracy_ztest(
    acc_a: float, n_a: int, acc_b: float, n_b: int
) -> ZTestResult:
    """Two-proportion z-test on accuracies with a pooled proportion.

    Returns the signed z statistic and the two-tailed p-value from the
    standard normal distribution.
    """
    if n_a < 1 or n_b < 1:
        raise ValueError("sample sizes must be >= 1")
    for acc in (acc_a, acc_b):
        if not 0.0 <= acc <= 1.0:
            raise ValueError("accuracies must lie in [0, 1]")
    pooled = (acc_a * n_a + acc_b * n_b) / (n_a + n_b)
    if pooled in (0.0, 1.0):
        if acc_a == acc_b:
            return ZTestResult(z=0.0, p_two_tailed=1.0)
        return ZTestResult(z=math.copysign(math.inf, acc_a - acc_b), p_two_tailed=0.0)
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b))
    z = (acc_a - acc_b) / se
    return ZTestResult(z=z, p_two_tailed=math.erfc(abs(z) / math.sqrt(2.0)))


def save_model(model: LinearModel | NBModel, path: str | Path) -> None:
    """Serialize a trained model to JSON."""
    if isinstance(model, LinearModel):
        record = {
            "type": "lr",
            "hyper": asdict(model.hyper),
            "vocab_fingerprint": model.vocab_fingerprint,
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "meta": model.meta,
        }
    else:
        record = {
            "type": "nb",
            "alpha": model.alpha,
            "vocab_fingerprint": model.vocab_fingerprint,
            "priors": model.priors.tolist(),
            "log_likelihood": model.log_likelihood.tolist(),
            "meta": model.meta,
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, sort_keys=True)


def load_model(path: str | Path) -> LinearModel | NBModel:
    with open(path, encoding="utf-8") as fh:
        record = json.load(fh)
    if record["type"] == "lr":
        return LinearModel(
            weights=np.array(record["weights"], dtype=np.float64),
            bias=record["bias"],
            vocab_fingerprint=record["vocab_fingerprint"],
            hyper=Hyper(**record["hyper"]),
            meta=record.get("meta", {}),
        )
    if record["type"] == "nb":
        return NBModel(
            priors=np.array(record["priors"], dtype=np.float64),
            log_likelihood=np.array(record["log_likelihood"], dtype=np.float64),
            alpha=record["alpha"],
            vocab_fingerprint=record["vocab_fingerprint"],
            meta=record.get("meta", {}),
        )
    raise ValueError(f"unknown model type {record['type']!r}")
