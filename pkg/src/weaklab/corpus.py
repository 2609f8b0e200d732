"""Corpus loading, text normalization, and n-gram extraction."""

from __future__ import annotations

import csv
import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

MAX_TOKENS_FOR_NGRAMS = 512

_URL_RE = re.compile(r"https?://\S+|www\.\S+")
_WS_RE = re.compile(r"\s+")
# Apostrophes and hyphens survive only between word characters.
_INTRA_WORD_RE = re.compile(r"(?<=\w)(['\-])(?=\w)")
_PLACEHOLDER_APOS = "\x00"
_PLACEHOLDER_HYPH = "\x01"


class CorpusError(ValueError):
    """Raised for malformed corpus files or invariant violations at load."""


def normalize_text(raw: str) -> str:
    """Normalize raw text: NFC, lowercase, strip URLs and punctuation.

    Apostrophes and hyphens inside words are preserved; everything else
    that is not alphanumeric becomes whitespace, which is then collapsed.
    May return an empty string; callers reject empty documents.
    """
    text = unicodedata.normalize("NFC", raw)
    text = text.lower()
    text = _URL_RE.sub(" ", text)
    # Shield intra-word apostrophes/hyphens from the punctuation sweep.
    text = _INTRA_WORD_RE.sub(
        lambda m: _PLACEHOLDER_APOS if m.group(1) == "'" else _PLACEHOLDER_HYPH, text
    )
    keep = {_PLACEHOLDER_APOS, _PLACEHOLDER_HYPH}
    text = "".join(ch if ch.isalnum() or ch in keep else " " for ch in text)
    text = text.replace(_PLACEHOLDER_APOS, "'").replace(_PLACEHOLDER_HYPH, "-")
    return _WS_RE.sub(" ", text).strip()


def tokenize(normalized: str) -> list[str]:
    """Whitespace tokenization of already-normalized text."""
    return normalized.split()


@dataclass(frozen=True)
class LabelSet:
    """Ordered label names; label id equals position in the list."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        normalized = [normalize_text(n) for n in self.names]
        if any(not n for n in normalized):
            raise CorpusError("label surface names must be non-empty after normalization")
        if len(set(normalized)) != len(normalized):
            raise CorpusError("label surface names must be unique after normalization")

    @property
    def n(self) -> int:
        return len(self.names)

    def id_of(self, name: str) -> int:
        target = normalize_text(name)
        for i, existing in enumerate(self.names):
            if normalize_text(existing) == target:
                return i
        raise CorpusError(f"unknown label name: {name!r}")

    @classmethod
    def from_file(cls, path: str) -> "LabelSet":
        """Load from JSON: either ["name", ...] or {"labels": ["name", ...]}."""
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        if isinstance(data, dict):
            data = data["labels"]
        return cls(tuple(str(x) for x in data))


@dataclass(frozen=True)
class Document:
    id: str
    text: str  # normalized
    gold_labels: Optional[frozenset[int]] = None
    event_id: Optional[str] = None


@dataclass(frozen=True)
class Dataset:
    documents: tuple[Document, ...]
    label_set: LabelSet
    mode: str  # "single-label" | "multi-label"

    def __post_init__(self) -> None:
        if self.mode not in ("single-label", "multi-label"):
            raise CorpusError(f"unknown task mode: {self.mode!r}")
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id: {doc.id!r}")
            seen.add(doc.id)
            if doc.gold_labels is not None:
                for lid in doc.gold_labels:
                    if not 0 <= lid < self.label_set.n:
                        raise CorpusError(f"document {doc.id!r}: label id {lid} out of range")
                if self.mode == "single-label" and len(doc.gold_labels) != 1:
                    raise CorpusError(
                        f"document {doc.id!r}: single-label mode requires exactly one gold label"
                    )

    def __len__(self) -> int:
        return len(self.documents)


@dataclass(frozen=True)
class NGramIndex:
    """Per-document n-gram sets plus the global pool with document frequencies."""

    per_document: dict[str, frozenset[str]]
    global_pool: dict[str, int]
    n_max: int = 3


def _record_to_document(
    rec: dict, label_set: LabelSet, lineno: int, source: str
) -> Document:
    try:
        doc_id = str(rec["id"])
        raw_text = rec["text"]
    except KeyError as exc:
        raise CorpusError(f"{source}:{lineno}: missing field {exc}") from None
    text = normalize_text(raw_text)
    if not text:
        raise CorpusError(f"{source}:{lineno}: document {doc_id!r} is empty after normalization")
    gold: Optional[frozenset[int]] = None
    labels = rec.get("labels")
    if labels:
        gold = frozenset(label_set.id_of(name) for name in labels)
    return Document(id=doc_id, text=text, gold_labels=gold, event_id=rec.get("event"))


def load_corpus(path: str, format: str, label_set: LabelSet, mode: str) -> Dataset:
    """Load a JSONL or TSV corpus, normalizing and validating each record."""
    docs: list[Document] = []
    if format == "jsonl":
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
                docs.append(_record_to_document(rec, label_set, lineno, path))
    elif format == "tsv":
        with open(path, encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f, delimiter="\t")
            required = {"id", "text"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise CorpusError(f"{path}: TSV header must include columns id, text")
            for lineno, row in enumerate(reader, start=2):
                rec: dict = {"id": row["id"], "text": row["text"]}
                if row.get("labels"):
                    rec["labels"] = [x for x in row["labels"].split(",") if x]
                if row.get("event_id"):
                    rec["event"] = row["event_id"]
                docs.append(_record_to_document(rec, label_set, lineno, path))
    else:
        raise CorpusError(f"unknown corpus format: {format!r}")
    return Dataset(documents=tuple(docs), label_set=label_set, mode=mode)


def save_corpus(dataset: Dataset, path: str) -> None:
    """Write a dataset back out as JSONL (normalized text)."""
    with open(path, "w", encoding="utf-8") as f:
        for doc in dataset.documents:
            rec: dict = {"id": doc.id, "text": doc.text}
            if doc.gold_labels is not None:
                rec["labels"] = [dataset.label_set.names[i] for i in sorted(doc.gold_labels)]
            if doc.event_id is not None:
                rec["event"] = doc.event_id
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def ngrams_of_tokens(tokens: list[str], n_max: int) -> set[str]:
    """All contiguous token windows of width 1..n_max, as a set."""
    out: set[str] = set()
    for n in range(1, n_max + 1):
        for i in range(len(tokens) - n + 1):
            out.add(" ".join(tokens[i : i + n]))
    return out


def extract_ngrams(dataset: Dataset, n_max: int = 3) -> NGramIndex:
    """Build per-document n-gram sets and the corpus-wide pool.

    The pool maps each n-gram to its document frequency (set semantics
    within a document). Documents longer than MAX_TOKENS_FOR_NGRAMS tokens
    are truncated for mining.
    """
    if not dataset.documents:
        raise CorpusError("extract_ngrams requires a non-empty dataset")
    if not 1 <= n_max <= 3:
        raise CorpusError(f"n_max must be in [1, 3], got {n_max}")
    per_document: dict[str, frozenset[str]] = {}
    pool: Counter[str] = Counter()
    for doc in dataset.documents:
        tokens = tokenize(doc.text)[:MAX_TOKENS_FOR_NGRAMS]
        grams = ngrams_of_tokens(tokens, n_max)
        per_document[doc.id] = frozenset(grams)
        pool.update(grams)
    return NGramIndex(per_document=per_document, global_pool=dict(pool), n_max=n_max)
