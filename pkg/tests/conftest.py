"""Shared test helpers: tiny corpora and a synthetic pair generator."""

from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from complexity_lens.corpus import LabeledInstance, Token, tokenize

# Disjoint word pools so that substitutions always change the token type.
COMPLEX_POOL = [f"cx{i:02d}" for i in range(30)]
SIMPLE_POOL = [f"sp{i:02d}" for i in range(15)]


def toks(text: str) -> tuple[Token, ...]:
    return tokenize(text)


def make_instance(text: str, label: int, pair_id: int = 0, side: str = "complex"):
    return LabeledInstance(tokens=toks(text), label=label, pair_id=pair_id, side=side)


def make_synthetic_pairs(
    n: int,
    seed: int = 0,
    n_domains: int = 0,
    identical_frac: float = 0.1,
) -> list[tuple[str, str, str | None]]:
    """Generate (complex, simple, domain) line triples.

    Simple sides are built by keeping, deleting, or substituting each
    complex token, so non-identical pairs usually have a non-empty
    reference mask.
    """
    rng = random.Random(seed)
    domains = [f"domain{d}" for d in range(n_domains)] if n_domains else [None]
    rows = []
    for _ in range(n):
        length = rng.randint(5, 12)
        complex_side = [rng.choice(COMPLEX_POOL) for _ in range(length)]
        if rng.random() < identical_frac:
            simple_side = list(complex_side)
        else:
            simple_side = []
            for token in complex_side:
                roll = rng.random()
                if roll < 0.30:
                    continue
                if roll < 0.55:
                    simple_side.append(rng.choice(SIMPLE_POOL))
                else:
                    simple_side.append(token)
            if not simple_side:
                simple_side = [rng.choice(SIMPLE_POOL)]
        rows.append((" ".join(complex_side), " ".join(simple_side), rng.choice(domains)))
    return rows


def write_corpus_tsv(
    path: Path, rows: list[tuple[str, str, str | None]], domains: bool = False
) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for complex_side, simple_side, _ in rows:
            fh.write(f"{complex_side}\t{simple_side}\n")
    if domains:
        with open(str(path) + ".domains", "w", encoding="utf-8") as fh:
            for _, _, domain in rows:
                fh.write(f"{domain or ''}\n")
    return path


@pytest.fixture
def synth_corpus_tsv(tmp_path):
    rows = make_synthetic_pairs(120, seed=7, n_domains=3)
    return write_corpus_tsv(tmp_path / "pairs.tsv", rows, domains=True)
