"""Parallel corpus ingestion, tokenization, and ground-truth derivation.

A corpus is a list of aligned complex-simple sentence pairs.  From the
pairs we derive two kinds of ground truth: a binary complexity label per
sentence (a sentence whose aligned simpler version differs from it is
complex), and a per-token reference highlight mask over the complex
sentence (tokens whose lowercased form does not occur anywhere in the
simple side are candidates for deletion or substitution).
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path

SPLITS = ("train", "valid", "test")
MASK_KINDS = ("reference", "predicted")


class CorpusError(ValueError):
    """Malformed corpus input (misaligned files, bad lines, empty sides)."""


@dataclass(frozen=True)
class Token:
    """A single token: original surface form plus its lowercased norm."""

    surface: str
    norm: str

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValueError("token surface must be non-empty")

    @classmethod
    def from_surface(cls, surface: str) -> "Token":
        return cls(surface=surface, norm=surface.lower())


@dataclass(frozen=True)
class SentencePair:
    """An aligned complex-simple sentence pair with split and domain tags."""

    id: int
    complex: tuple[Token, ...]
    simple: tuple[Token, ...]
    split: str = "train"
    domain: str | None = None

    def __post_init__(self) -> None:
        if not self.complex or not self.simple:
            raise CorpusError(f"pair {self.id}: both sides must be non-empty")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")


@dataclass(frozen=True)
class HighlightMask:
    """Binary vector over the tokens of one sentence, one bit per token."""

    bits: tuple[int, ...]
    kind: str = "predicted"

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("mask bits must be 0 or 1")
        if self.kind not in MASK_KINDS:
            raise ValueError(f"unknown mask kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def count(self) -> int:
        return sum(self.bits)


@dataclass(frozen=True)
class LabeledInstance:
    """A single sentence with its binary complexity label.

    ``pair_id`` and ``side`` record which pair and which side of it the
    instance came from.  Complex-side instances carry the reference
    highlight mask derived from their pair; simple-side instances do not.
    """

    tokens: tuple[Token, ...]
    label: int
    pair_id: int
    side: str
    domain: str | None = None
    ref_mask: HighlightMask | None = None

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")
        if self.side not in ("complex", "simple"):
            raise ValueError(f"unknown side {self.side!r}")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _split_edge_punct(chunk: str) -> list[str]:
    # Peel leading and trailing punctuation marks one character at a time;
    # interior punctuation (hyphens, apostrophes) stays attached.
    lead: list[str] = []
    trail: list[str] = []
    i, j = 0, len(chunk)
    while i < j and _is_punct(chunk[i]):
        lead.append(chunk[i])
        i += 1
    while j > i and _is_punct(chunk[j - 1]):
        trail.append(chunk[j - 1])
        j -= 1
    core = chunk[i:j]
    return lead + ([core] if core else []) + trail[::-1]


def tokenize(text: str, mode: str = "whitespace") -> tuple[Token, ...]:
    """Split a raw sentence into tokens.

    ``whitespace`` splits on runs of whitespace only, suitable for corpora
    that ship pre-tokenized.  ``whitespace+punct`` additionally separates
    leading and trailing punctuation marks of each chunk into their own
    tokens, for raw text.  Empty input yields an empty sequence.
    """
    if mode not in ("whitespace", "whitespace+punct"):
        raise ValueError(f"unknown tokenize mode {mode!r}")
    chunks = text.split()
    if mode == "whitespace+punct":
        pieces: list[str] = []
        for chunk in chunks:
            pieces.extend(_split_edge_punct(chunk))
        chunks = pieces
    return tuple(Token.from_surface(c) for c in chunks)


def _read_lines(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def load_parallel_corpus(
    source: str | Path | tuple[str | Path, str | Path],
    fmt: str = "tsv",
    split: str = "train",
    tokenize_mode: str = "whitespace",
    domains_path: str | Path | None = None,
    start_id: int = 0,
) -> list[SentencePair]:
    """Load aligned complex-simple pairs from disk.

    ``tsv`` expects one pair per line as ``complex<TAB>simple``.
    ``two-file`` expects ``source`` to be a pair of line-aligned paths
    (complex file, simple file).  ``domains_path`` optionally names a
    line-aligned sidecar file with one domain tag per pair.  Pair ids are
    assigned sequentially in file order starting at ``start_id``.
    """
    if fmt == "tsv":
        lines = _read_lines(Path(source))  # type: ignore[arg-type]
        rows: list[tuple[str, str]] = []
        for lineno, line in enumerate(lines):
            if line.count("\t") != 1:
                raise CorpusError(
                    f"{source}:{lineno + 1}: expected exactly one tab, got {line.count(chr(9))}"
                )
            left, right = line.split("\t")
            rows.append((left, right))
    elif fmt == "two-file":
        cx_path, sp_path = source  # type: ignore[misc]
        cx_lines = _read_lines(Path(cx_path))
        sp_lines = _read_lines(Path(sp_path))
        if len(cx_lines) != len(sp_lines):
            raise CorpusError(
                f"line-count mismatch: {cx_path} has {len(cx_lines)} lines, "
                f"{sp_path} has {len(sp_lines)}"
            )
        rows = list(zip(cx_lines, sp_lines))
    else:
        raise ValueError(f"unknown corpus format {fmt!r}")

    domains: list[str | None]
    if domains_path is not None:
        domains = list(_read_lines(Path(domains_path)))
        if len(domains) != len(rows):
            raise CorpusError(
                f"domain sidecar {domains_path} has {len(domains)} lines "
                f"for {len(rows)} pairs"
            )
    else:
        domains = [None] * len(rows)

    pairs = []
    for offset, ((left, right), domain) in enumerate(zip(rows, domains)):
        cx = tokenize(left, tokenize_mode)
        sp = tokenize(right, tokenize_mode)
        if not cx or not sp:
            raise CorpusError(f"pair {start_id + offset}: empty sentence")
        pairs.append(
            SentencePair(
                id=start_id + offset,
                complex=cx,
                simple=sp,
                split=split,
                domain=domain or None,
            )
        )
    return pairs


def _norms(tokens: tuple[Token, ...]) -> tuple[str, ...]:
    return tuple(t.norm for t in tokens)


def derive_reference_mask(
    pair: SentencePair, case_sensitive: bool = False
) -> HighlightMask:
    """Reference highlights: complex tokens absent from the simple side.

    Membership is type-level (a set of simple-side tokens, not a multiset)
    and case-insensitive by default, so sentence-initial capitalization
    does not inflate the mask.  Duplicated complex tokens all receive the
    same bit.
    """
    if case_sensitive:
        present = {t.surface for t in pair.simple}
        bits = tuple(0 if t.surface in present else 1 for t in pair.complex)
    else:
        present = {t.norm for t in pair.simple}
        bits = tuple(0 if t.norm in present else 1 for t in pair.complex)
    return HighlightMask(bits=bits, kind="reference")


def derive_labels(
    pairs: list[SentencePair], case_sensitive: bool = False
) -> list[LabeledInstance]:
    """Expand pairs into labeled sentences.

    A pair whose sides differ (compared as norm sequences) yields the
    complex side with label 1 and the simple side with label 0.  A pair
    whose sides are identical yields a single label-0 instance.  Output
    preserves pair order; complex-side instances carry their reference
    mask.
    """
    instances = []
    for pair in pairs:
        mask = derive_reference_mask(pair, case_sensitive=case_sensitive)
        identical = _norms(pair.complex) == _norms(pair.simple)
        if identical:
            instances.append(
                LabeledInstance(
                    tokens=pair.complex,
                    label=0,
                    pair_id=pair.id,
                    side="complex",
                    domain=pair.domain,
                    ref_mask=mask,
                )
            )
        else:
            instances.append(
                LabeledInstance(
                    tokens=pair.complex,
                    label=1,
                    pair_id=pair.id,
                    side="complex",
                    domain=pair.domain,
                    ref_mask=mask,
                )
            )
            instances.append(
                LabeledInstance(
                    tokens=pair.simple,
                    label=0,
                    pair_id=pair.id,
                    side="simple",
                    domain=pair.domain,
                    ref_mask=None,
                )
            )
    return instances


def save_instances(instances: list[LabeledInstance], path: str | Path) -> None:
    """Write instances as JSON-lines, one record per instance."""
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            record = {
                "id": inst.pair_id,
                "side": inst.side,
                "tokens": [t.surface for t in inst.tokens],
                "label": inst.label,
                "ref_mask": list(inst.ref_mask.bits) if inst.ref_mask else None,
                "domain": inst.domain,
            }
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def load_instances(path: str | Path) -> list[LabeledInstance]:
    """Read instances written by :func:`save_instances`."""
    instances = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            mask = (
                HighlightMask(bits=tuple(rec["ref_mask"]), kind="reference")
                if rec["ref_mask"] is not None
                else None
            )
            instances.append(
                LabeledInstance(
                    tokens=tuple(Token.from_surface(s) for s in rec["tokens"]),
                    label=rec["label"],
                    pair_id=rec["id"],
                    side=rec["side"],
                    domain=rec["domain"],
                    ref_mask=mask,
                )
            )
    return instances
