"""Similarity-based binary labels for extractive training data.

A monthly-report sentence is marked positive when its best cosine
similarity against the sentences of the group's investment report clears
the threshold. Vectors come either from a TFIDF model fitted on the
training split or from the remote embedding service.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .corpus import DatasetSplit, ReportGroup
from .errors import EmptyInvestment
from .textproc import Sentence, TermVector, TfidfVectorizer, Tokenizer, cosine, segment

VectorFn = Callable[[str], TermVector]

TFIDF_BACKEND = "tfidf"
REMOTE_BACKEND = "remote"


@dataclass(frozen=True)
class LabelingConfig:
    backend: str = TFIDF_BACKEND
    threshold: float = 0.6
    tokenizer: Tokenizer | None = None
    # Alternative labeling mode: mark the top fraction of each group's
    # sentences by max similarity instead of thresholding. Off by default.
    top_fraction: float | None = None

    def __post_init__(self):
        if self.backend not in (TFIDF_BACKEND, REMOTE_BACKEND):
            raise ValueError(f"unknown labeling backend {self.backend!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.top_fraction is not None and not 0.0 <= self.top_fraction <= 1.0:
            raise ValueError(f"top_fraction must be in [0, 1], got {self.top_fraction}")


@dataclass(frozen=True)
class LabeledSentence:
    sentence: Sentence
    group_key: tuple[str, str]
    label: bool
    max_similarity: float
    argmax_ref_index: int


def label_group(group: ReportGroup, config: LabelingConfig, vector_fn: VectorFn) -> list[LabeledSentence]:
    """Label every monthly sentence of a group against the investment report.

    Output order is (monthly date, sentence index); argmax ties go to the
    lowest reference index.
    """
    refs = segment(group.investment.text, source_doc=group.investment.doc_id)
    if not refs:
        raise EmptyInvestment(group.key)
    ref_vectors = [vector_fn(r.text) for r in refs]
    records: list[LabeledSentence] = []
    for monthly in group.monthlies:
        for sent in segment(monthly.text, source_doc=monthly.doc_id):
            v = vector_fn(sent.text)
            sims = [cosine(v, rv) for rv in ref_vectors]
            best = max(range(len(sims)), key=lambda i: (sims[i], -i))
            records.append(
                LabeledSentence(
                    sentence=sent,
                    group_key=group.key,
                    label=sims[best] >= config.threshold,
                    max_similarity=sims[best],
                    argmax_ref_index=best,
                )
            )
    if config.top_fraction is not None:
        k = int(config.top_fraction * len(records))
        ranked = sorted(range(len(records)), key=lambda i: (-records[i].max_similarity, i))
        keep = set(ranked[:k])
        records = [
            LabeledSentence(
                sentence=r.sentence,
                group_key=r.group_key,
                label=(i in keep),
                max_similarity=r.max_similarity,
                argmax_ref_index=r.argmax_ref_index,
            )
            for i, r in enumerate(records)
        ]
    return records


def group_sentence_texts(group: ReportGroup) -> list[str]:
    """All sentence texts of a group: investment first, then monthlies."""
    texts = [s.text for s in segment(group.investment.text)]
    for monthly in group.monthlies:
        texts.extend(s.text for s in segment(monthly.text))
    return texts


@dataclass
class LabelingResult:
    train: list[LabeledSentence]
    validation: list[LabeledSentence]
    model: TfidfVectorizer | None = None


def build_training_set(
    split: DatasetSplit,
    config: LabelingConfig,
    embed_fn: Callable[[list[str]], list[TermVector]] | None = None,
) -> LabelingResult:
    """Label the train and validation portions of a split.

    The TFIDF backend fits its model on the training split's sentence
    population only (monthly and investment alike), so validation text
    never shapes the vocabulary. The remote backend batch-embeds each
    group's sentences through embed_fn.
    """
    if config.backend == TFIDF_BACKEND:
        train_texts = [t for g in split.train for t in group_sentence_texts(g)]
        model = TfidfVectorizer(tokenizer=config.tokenizer).fit(train_texts)

        def make_vector_fn(group: ReportGroup) -> VectorFn:
            return model.vector

    else:
        if embed_fn is None:
            raise ValueError("remote backend needs an embed_fn")
        model = None

        def make_vector_fn(group: ReportGroup) -> VectorFn:
            texts = group_sentence_texts(group)
            vectors = embed_fn(texts)
            cache = dict(zip(texts, vectors))
            return lambda text: cache[text] if text in cache else embed_fn([text])[0]

    def run(groups) -> list[LabeledSentence]:
        out: list[LabeledSentence] = []
        for g in sorted(groups, key=lambda g: g.key):
            out.extend(label_group(g, config, make_vector_fn(g)))
        return out

    return LabelingResult(train=run(split.train), validation=run(split.validation), model=model)


def labeled_to_record(rec: LabeledSentence) -> dict:
    return {
        "doc_id": rec.sentence.source_doc,
        "index": rec.sentence.index,
        "group_key": list(rec.group_key),
        "text": rec.sentence.text,
        "label": rec.label,
        "max_similarity": rec.max_similarity,
        "argmax_ref_index": rec.argmax_ref_index,
    }


def write_labeled(records: list[LabeledSentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(labeled_to_record(rec), ensure_ascii=False))
            f.write("\n")


def read_labeled(path: str | Path) -> list[LabeledSentence]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            obj = json.loads(line)
            records.append(
                LabeledSentence(
                    sentence=Sentence(text=obj["text"], source_doc=obj["doc_id"], index=obj["index"]),
                    group_key=tuple(obj["group_key"]),
                    label=bool(obj["label"]),
                    max_similarity=float(obj["max_similarity"]),
                    argmax_ref_index=int(obj["argmax_ref_index"]),
                )
            )
    return records
