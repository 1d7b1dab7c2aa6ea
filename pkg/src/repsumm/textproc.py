"""Sentence segmentation, tokenization, TFIDF vectors and cosine similarity.

Everything here is deliberately self-contained: the labeling step depends
on these exact formulas, so they are implemented from scratch rather than
borrowed from a library, and pinned by oracle tests.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import DimMismatch, EmptyCorpus

DEFAULT_TERMINATORS = "。．！？.!?"

# Hiragana/Katakana, CJK ideographs, CJK punctuation, full/half-width forms.
_CJK_RANGES = (
    (0x3000, 0x30FF),
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0xFF00, 0xFFEF),
)


@dataclass(frozen=True)
class Sentence:
    """A segmented sentence with its position inside the source document."""

    text: str
    source_doc: str = ""
    index: int = 0


def _terminator_ends_sentence(text: str, i: int, terminators: str) -> bool:
    # ASCII terminators need a following whitespace (or end of text) so that
    # "3.14" stays whole; full-width terminators end the sentence before any
    # non-terminator character. Runs of terminators stay glued together.
    if i + 1 >= len(text):
        return True
    nxt = text[i + 1]
    if nxt.isspace():
        return True
    return ord(text[i]) > 0x7F and nxt not in terminators


def segment(text: str, source_doc: str = "", terminators: str = DEFAULT_TERMINATORS) -> list[Sentence]:
    """Split text into sentences, keeping terminators attached.

    Whitespace between sentences is dropped; every non-whitespace character
    of the input survives in exactly one output sentence.
    """
    sentences: list[str] = []
    n = len(text)
    start = 0
    while start < n and text[start].isspace():
        start += 1
    i = start
    while i < n:
        if text[i] in terminators and _terminator_ends_sentence(text, i, terminators):
            piece = text[start : i + 1]
            if piece:
                sentences.append(piece)
            start = i + 1
            while start < n and text[start].isspace():
                start += 1
            i = start
        else:
            i += 1
    tail = text[start:].rstrip()
    if tail:
        sentences.append(tail)
    return [Sentence(text=s, source_doc=source_doc, index=k) for k, s in enumerate(sentences)]


class WhitespaceTokenizer:
    """Split on runs of Unicode whitespace."""

    def tokenize(self, text: str) -> list[str]:
        return text.split()

    @property
    def spec(self) -> str:
        return "whitespace"

    def __repr__(self):
        return "WhitespaceTokenizer()"

    def __eq__(self, other):
        return isinstance(other, WhitespaceTokenizer)


class CharNgramTokenizer:
    """Character n-grams of the text with all whitespace removed.

    Text shorter than n (after de-whitespacing) is emitted as a single term.
    """

    def __init__(self, n: int = 2):
        if n < 1:
            raise ValueError(f"n-gram order must be >= 1, got {n}")
        self.n = n

    def tokenize(self, text: str) -> list[str]:
        squeezed = "".join(text.split())
        if not squeezed:
            return []
        if len(squeezed) < self.n:
            return [squeezed]
        return [squeezed[i : i + self.n] for i in range(len(squeezed) - self.n + 1)]

    @property
    def spec(self) -> str:
        return f"char:{self.n}"

    def __repr__(self):
        return f"CharNgramTokenizer(n={self.n})"

    def __eq__(self, other):
        return isinstance(other, CharNgramTokenizer) and other.n == self.n


Tokenizer = WhitespaceTokenizer | CharNgramTokenizer


def tokenizer_from_spec(spec: str) -> Tokenizer:
    """Parse "whitespace" or "char:N" into a tokenizer instance."""
    if spec == "whitespace":
        return WhitespaceTokenizer()
    m = re.fullmatch(r"char:(\d+)", spec)
    if m:
        return CharNgramTokenizer(int(m.group(1)))
    raise ValueError(f"unknown tokenizer spec {spec!r}")


def cjk_ratio(text: str) -> float:
    chars = [c for c in text if not c.isspace()]
    if not chars:
        return 0.0
    hits = sum(1 for c in chars if any(lo <= ord(c) <= hi for lo, hi in _CJK_RANGES))
    return hits / len(chars)


def select_tokenizer(text: str, ngram: int = 2) -> Tokenizer:
    """Character n-grams for CJK-dominant text, whitespace terms otherwise."""
    if cjk_ratio(text) > 0.5:
        return CharNgramTokenizer(ngram)
    return WhitespaceTokenizer()


@dataclass
class TermVector:
    """Sparse vector: column index -> weight, with explicit dimensionality."""

    entries: dict[int, float]
    dim: int

    def __post_init__(self):
        if self.entries and max(self.entries) >= self.dim:
            raise ValueError(f"entry index {max(self.entries)} out of range for dim {self.dim}")

    @classmethod
    def from_dense(cls, values, dim: int | None = None) -> "TermVector":
        arr = np.asarray(values, dtype=float)
        entries = {int(i): float(v) for i, v in enumerate(arr) if v != 0.0}
        return cls(entries=entries, dim=dim if dim is not None else arr.shape[0])

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.entries.values()))

    def dot(self, other: "TermVector") -> float:
        a, b = self.entries, other.entries
        if len(b) < len(a):
            a, b = b, a
        return sum(v * b.get(i, 0.0) for i, v in a.items())


def cosine(a: TermVector, b: TermVector) -> float:
    """Cosine similarity; 0.0 whenever either vector has zero norm."""
    if a.dim != b.dim:
        raise DimMismatch(a.dim, b.dim)
    na = a.norm()
    nb = b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0
    return a.dot(b) / (na * nb)


class TfidfVectorizer(BaseEstimator):
    """TFIDF with raw term counts, smoothed idf and L2 normalization.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1, which is never negative.
    Column indices follow first occurrence across the fitted corpus, so the
    model is deterministic in document order.

    Parameters
    ----------
    tokenizer : Tokenizer or None
        None selects CharNgramTokenizer(2) for CJK-dominant corpora and
        WhitespaceTokenizer otherwise, decided at fit time.
    """

    def __init__(self, tokenizer: Tokenizer | None = None):
        self.tokenizer = tokenizer

    def fit(self, docs: list[str]) -> "TfidfVectorizer":
        docs = list(docs)
        if not docs:
            raise EmptyCorpus()
        self.tokenizer_ = self.tokenizer if self.tokenizer is not None else select_tokenizer("".join(docs))
        vocabulary: dict[str, int] = {}
        df: Counter[str] = Counter()
        for doc in docs:
            terms = self.tokenizer_.tokenize(doc)
            for t in terms:
                if t not in vocabulary:
                    vocabulary[t] = len(vocabulary)
            df.update(set(terms))
        n = len(docs)
        idf = np.empty(len(vocabulary))
        for t, col in vocabulary.items():
            idf[col] = math.log((1 + n) / (1 + df[t])) + 1.0
        self.vocabulary_ = vocabulary
        self.idf_ = idf
        self.n_docs_ = n
        return self

    def _check_fitted(self):
        if not hasattr(self, "vocabulary_"):
            raise NotFittedError("TfidfVectorizer is not fitted; call fit() first")

    @property
    def dim(self) -> int:
        self._check_fitted()
        return len(self.vocabulary_)

    def vector(self, text: str) -> TermVector:
        """Transform one text into an L2-normalized sparse TFIDF vector.

        Out-of-vocabulary terms are ignored; a text with no in-vocabulary
        terms maps to the zero vector.
        """
        self._check_fitted()
        counts = Counter(self.tokenizer_.tokenize(text))
        entries = {}
        for t, c in counts.items():
            col = self.vocabulary_.get(t)
            if col is not None:
                entries[col] = c * float(self.idf_[col])
        norm = math.sqrt(sum(v * v for v in entries.values()))
        if norm > 0.0:
            entries = {i: v / norm for i, v in entries.items()}
        return TermVector(entries=entries, dim=len(self.vocabulary_))

    def transform(self, texts: list[str]) -> list[TermVector]:
        return [self.vector(t) for t in texts]

    def fit_transform(self, docs: list[str]) -> list[TermVector]:
        return self.fit(docs).transform(docs)

    def save(self, path: str | Path) -> None:
        self._check_fitted()
        payload = {
            "tokenizer": self.tokenizer_.spec,
            "vocabulary": list(self.vocabulary_.keys()),
            "idf": [float(v) for v in self.idf_],
            "n_docs": self.n_docs_,
        }
        Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TfidfVectorizer":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        tok = tokenizer_from_spec(payload["tokenizer"])
        model = cls(tokenizer=tok)
        model.tokenizer_ = tok
        model.vocabulary_ = {t: i for i, t in enumerate(payload["vocabulary"])}
        model.idf_ = np.asarray(payload["idf"], dtype=float)
        model.n_docs_ = int(payload["n_docs"])
        return model

    def fingerprint(self) -> str:
        """Stable short hash of the fitted state, stored next to scorers."""
        self._check_fitted()
        h = hashlib.sha256()
        h.update(self.tokenizer_.spec.encode())
        for t in self.vocabulary_:
            h.update(t.encode("utf-8"))
            h.update(b"\x00")
        h.update(np.asarray(self.idf_).tobytes())
        return h.hexdigest()[:16]
