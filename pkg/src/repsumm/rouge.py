"""ROUGE-1, ROUGE-2 and ROUGE-L from scratch.

ROUGE-N uses clipped n-gram counts; ROUGE-L runs one LCS over the whole
token sequences (summary level). F1 is the headline number; precision and
recall are always kept alongside.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .textproc import Tokenizer, select_tokenizer

VARIANTS = ("r1", "r2", "rl")


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "RougeScore":
        s = precision + recall
        f1 = 2 * precision * recall / s if s > 0 else 0.0
        return cls(precision=precision, recall=recall, f1=f1)


ZERO_SCORE = RougeScore(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class RougeConfig:
    """tokenizer=None picks character unigrams for CJK-dominant pairs and
    whitespace terms otherwise, decided per candidate/reference pair."""

    tokenizer: Tokenizer | None = None


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    if len(tokens) < n:
        return Counter()
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _rouge_n_from_tokens(cand: list[str], ref: list[str], n: int) -> RougeScore:
    cand_counts = _ngram_counts(cand, n)
    ref_counts = _ngram_counts(ref, n)
    total_cand = sum(cand_counts.values())
    total_ref = sum(ref_counts.values())
    overlap = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
    precision = overlap / total_cand if total_cand > 0 else 0.0
    recall = overlap / total_ref if total_ref > 0 else 0.0
    return RougeScore.from_pr(precision, recall)


def _lcs_length(xs: list[str], ys: list[str]) -> int:
    # O(len(xs) * len(ys)) time, rolling single row.
    if not xs or not ys:
        return 0
    row = [0] * (len(ys) + 1)
    for x in xs:
        prev = 0
        for j, y in enumerate(ys, start=1):
            cur = row[j]
            row[j] = prev + 1 if x == y else max(row[j], row[j - 1])
            prev = cur
    return row[-1]


def _rouge_l_from_tokens(cand: list[str], ref: list[str]) -> RougeScore:
    if not cand or not ref:
        return ZERO_SCORE
    lcs = _lcs_length(cand, ref)
    return RougeScore.from_pr(lcs / len(cand), lcs / len(ref))


def _pair_tokens(candidate: str, reference: str, config: RougeConfig | None):
    config = config or RougeConfig()
    tok = config.tokenizer if config.tokenizer is not None else select_tokenizer(candidate + reference, ngram=1)
    return tok.tokenize(candidate), tok.tokenize(reference)


def rouge_n(candidate: str, reference: str, n: int, config: RougeConfig | None = None) -> RougeScore:
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    cand, ref = _pair_tokens(candidate, reference, config)
    return _rouge_n_from_tokens(cand, ref, n)


def rouge_l(candidate: str, reference: str, config: RougeConfig | None = None) -> RougeScore:
    cand, ref = _pair_tokens(candidate, reference, config)
    return _rouge_l_from_tokens(cand, ref)


def rouge_all(candidate: str, reference: str, config: RougeConfig | None = None) -> dict[str, RougeScore]:
    """ROUGE-1/2/L over a single shared tokenization pass."""
    cand, ref = _pair_tokens(candidate, reference, config)
    return {
        "r1": _rouge_n_from_tokens(cand, ref, 1),
        "r2": _rouge_n_from_tokens(cand, ref, 2),
        "rl": _rouge_l_from_tokens(cand, ref),
    }
