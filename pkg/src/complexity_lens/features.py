"""Sparse feature extraction: n-gram counts plus lexical statistics.

Feature ids are laid out as a dense block of n-gram ids (assigned in
lexicographic key order, so rebuilding on the same data reproduces the
same ids) followed by a reserved block of ``LEXICAL_DIM`` lexical feature
ids.  Lexical features lean on an age-of-acquisition lexicon: a map from
word to the age (in years) at which the word is typically acquired.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

log = logging.getLogger(__name__)

# Joins the tokens of an n-gram key; cannot occur inside a token because
# tokens never contain whitespace or control characters.
NGRAM_SEP = "\x1f"

LEXICAL_FEATURES = (
    "token_count",
    "mean_chars",
    "max_chars",
    "mean_aoa",
    "max_aoa",
    "hard_word_count",
    "coverage",
    "covered_count",
)
LEXICAL_DIM = len(LEXICAL_FEATURES)

# Sparse vectors are plain id -> value maps; zero values are never stored.
SparseVector = dict[int, float]


@dataclass(frozen=True)
class Lexicon:
    """Word -> age-of-acquisition rating (years, finite and non-negative)."""

    ratings: dict[str, float]
    skipped: int = 0

    def __post_init__(self) -> None:
        for word, rating in self.ratings.items():
            if not math.isfinite(rating) or rating < 0:
                raise ValueError(f"invalid rating {rating!r} for {word!r}")

    def __contains__(self, word: str) -> bool:
        return word in self.ratings

    def __len__(self) -> int:
        return len(self.ratings)

    def get(self, word: str) -> float | None:
        return self.ratings.get(word)


EMPTY_LEXICON = Lexicon(ratings={})


def load_aoa_lexicon(
    path: str | Path,
    word_col: str = "Word",
    rating_col: str = "Rating.Mean",
) -> Lexicon:
    """Load an age-of-acquisition lexicon from a headered CSV.

    Words are lowercased; duplicate words keep the first rating; rows whose
    rating does not parse as a finite non-negative number are skipped and
    counted on the returned lexicon.
    """
    ratings: dict[str, float] = {}
    skipped = 0
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty lexicon file")
        missing = {word_col, rating_col} - set(reader.fieldnames)
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            word = (row[word_col] or "").strip().lower()
            try:
                rating = float(row[rating_col])
            except (TypeError, ValueError):
                skipped += 1
                continue
            if not word or not math.isfinite(rating) or rating < 0:
                skipped += 1
                continue
            ratings.setdefault(word, rating)
    if skipped:
        log.warning("%s: skipped %d unparseable lexicon rows", path, skipped)
    return Lexicon(ratings=ratings, skipped=skipped)


def iter_ngrams(norms: tuple[str, ...], max_n: int):
    """Yield (key, start, length) for every n-gram with 1 <= n <= max_n."""
    for n in range(1, max_n + 1):
        for i in range(len(norms) - n + 1):
            yield NGRAM_SEP.join(norms[i : i + n]), i, n


@dataclass
class Vocabulary:
    """Deterministic n-gram key -> dense feature id map."""

    entries: dict[str, int]
    max_n: int
    min_df: int
    fingerprint: str = field(default="")

    def __post_init__(self) -> None:
        if not self.fingerprint:
            payload = json.dumps(
                {
                    "entries": sorted(self.entries.items()),
                    "max_n": self.max_n,
                    "min_df": self.min_df,
                },
                ensure_ascii=False,
            )
            self.fingerprint = hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def __len__(self) -> int:
        return len(self.entries)

    def unigram_id(self, norm: str) -> int | None:
        return self.entries.get(norm)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                {"max_n": self.max_n, "min_df": self.min_df, "entries": self.entries},
                fh,
                ensure_ascii=False,
                sort_keys=True,
                indent=2,
            )

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(entries=data["entries"], max_n=data["max_n"], min_df=data["min_df"])


def build_vocabulary(instances, max_n: int = 3, min_df: int = 2) -> Vocabulary:
    """Collect n-grams from training instances into a vocabulary.

    Keeps every n-gram (1 <= n <= max_n) whose document frequency is at
    least ``min_df``; ids are assigned in lexicographic key order.
    """
    if max_n < 1 or min_df < 1:
        raise ValueError("max_n and min_df must be >= 1")
    if not instances:
        raise ValueError("cannot build a vocabulary from an empty training set")
    df: dict[str, int] = {}
    for inst in instances:
        norms = tuple(t.norm for t in inst.tokens)
        seen = {key for key, _, _ in iter_ngrams(norms, max_n)}
        for key in seen:
            df[key] = df.get(key, 0) + 1
    kept = sorted(key for key, count in df.items() if count >= min_df)
    return Vocabulary(
        entries={key: i for i, key in enumerate(kept)}, max_n=max_n, min_df=min_df
    )


def featurize_ngrams(tokens, vocab: Vocabulary) -> SparseVector:
    """Occurrence counts of in-vocabulary n-grams; OOV n-grams are dropped."""
    norms = tuple(t.norm for t in tokens)
    counts: SparseVector = {}
    for key, _, _ in iter_ngrams(norms, vocab.max_n):
        fid = vocab.entries.get(key)
        if fid is not None:
            counts[fid] = counts.get(fid, 0.0) + 1.0
    return counts


def featurize_lexical(
    tokens,
    lexicon: Lexicon | None = None,
    base: int = 0,
    hard_aoa_threshold: float = 10.0,
) -> SparseVector:
    """Length and age-of-acquisition statistics as a fixed 8-feature block.

    AoA aggregates run over lexicon-covered tokens only; with no coverage
    they are all zero.  ``base`` offsets the feature ids, normally by the
    n-gram vocabulary size.  Zero-valued features are not stored.
    """
    lexicon = lexicon or EMPTY_LEXICON
    values = dict.fromkeys(range(LEXICAL_DIM), 0.0)
    if tokens:
        lengths = [len(t.surface) for t in tokens]
        values[0] = float(len(tokens))
        values[1] = sum(lengths) / len(tokens)
        values[2] = float(max(lengths))
        covered = [r for t in tokens if (r := lexicon.get(t.norm)) is not None]
        if covered:
            values[3] = sum(covered) / len(covered)
            values[4] = max(covered)
            values[5] = float(sum(1 for r in covered if r >= hard_aoa_threshold))
            values[6] = len(covered) / len(tokens)
            values[7] = float(len(covered))
    return {base + i: v for i, v in values.items() if v != 0.0}


def featurize(
    tokens,
    vocab: Vocabulary,
    lexicon: Lexicon | None = None,
    include_lexical: bool = True,
    hard_aoa_threshold: float = 10.0,
) -> SparseVector:
    """Combined n-gram + lexical sparse vector over the full feature space."""
    vec = featurize_ngrams(tokens, vocab)
    if include_lexical:
        vec.update(
            featurize_lexical(
                tokens, lexicon, base=len(vocab), hard_aoa_threshold=hard_aoa_threshold
            )
        )
    return vec


def feature_dim(vocab: Vocabulary, include_lexical: bool = True) -> int:
    return len(vocab) + (LEXICAL_DIM if include_lexical else 0)


def mean_feature_vector(
    instances,
    vocab: Vocabulary,
    lexicon: Lexicon | None = None,
    include_lexical: bool = True,
) -> np.ndarray:
    """Column means of the design matrix (the attribution background)."""
    matrix = design_matrix(instances, vocab, lexicon, include_lexical)
    return np.asarray(matrix.mean(axis=0)).ravel()


def design_matrix(
    instances,
    vocab: Vocabulary,
    lexicon: Lexicon | None = None,
    include_lexical: bool = True,
) -> sparse.csr_matrix:
    """Stack instance feature vectors into a CSR matrix (rows in order)."""
    dim = feature_dim(vocab, include_lexical)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for r, inst in enumerate(instances):
        vec = featurize(inst.tokens, vocab, lexicon, include_lexical)
        for fid, v in vec.items():
            rows.append(r)
            cols.append(fid)
            vals.append(v)
    return sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(instances), dim), dtype=np.float64
    )
