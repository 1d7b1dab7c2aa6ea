"""Binary sentence scorer and summary assembly.

The native scorer is logistic regression over TFIDF features, trained by
mini-batch gradient descent with an optional best-validation-epoch
snapshot. Extractive summaries connect the top-scored sentences under a
token or sentence budget; the abstractive path assembles a truncated
input and delegates generation to the remote service.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .corpus import ReportGroup
from .errors import (
    DegenerateFeatures,
    DimMismatch,
    EmptyGroup,
    EmptyInput,
    EmptyTrainingSet,
    GenerationTooLong,
)
from .labeling import LabeledSentence, VectorFn
from .textproc import (
    CharNgramTokenizer,
    Sentence,
    TermVector,
    TfidfVectorizer,
    Tokenizer,
    WhitespaceTokenizer,
    cosine,
    segment,
    select_tokenizer,
)

_PROB_EPS = 1e-12  # keeps probabilities strictly inside (0, 1)

DUPLICATE_COSINE = 0.95


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 9
    batch_size: int = 4
    learning_rate: float = 0.1
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0 or self.l2 < 0:
            raise ValueError("learning_rate must be positive and l2 non-negative")


@dataclass(frozen=True)
class ScoredSentence:
    sentence: Sentence
    probability: float


def loss_and_grad(w: np.ndarray, b: float, X, y: np.ndarray, l2: float):
    """Mean binary cross-entropy plus l2*||w||^2, with its analytic gradient."""
    z = X @ w + b
    p = np.clip(expit(z), _PROB_EPS, 1 - _PROB_EPS)
    loss = -np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)) + l2 * float(w @ w)
    resid = p - y
    grad_w = (X.T @ resid) / len(y) + 2 * l2 * w
    grad_b = float(np.mean(resid))
    return float(loss), np.asarray(grad_w).ravel(), grad_b


class LinearScorer(BaseEstimator):
    """Logistic sentence scorer trained by seeded mini-batch gradient descent.

    fit() minimizes mean cross-entropy with l2 regularization; when a
    validation set is given, the parameters with the best validation loss
    across epochs are kept, otherwise the final epoch's. Deterministic for
    a fixed seed.
    """

    def __init__(self, epochs: int = 9, batch_size: int = 4, learning_rate: float = 0.1,
                 l2: float = 1e-4, seed: int = 0):
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.l2 = l2
        self.seed = seed

    def fit(self, X, y, X_val=None, y_val=None) -> "LinearScorer":
        TrainConfig(self.epochs, self.batch_size, self.learning_rate, self.l2, self.seed)
        X = sparse.csr_matrix(X, dtype=float) if not sparse.issparse(X) else X.tocsr().astype(float)
        y = np.asarray(y, dtype=float)
        n, d = X.shape
        if n == 0:
            raise EmptyTrainingSet()
        if X.nnz == 0:
            raise DegenerateFeatures()
        rng = np.random.default_rng(self.seed)
        w = np.zeros(d)
        b = 0.0
        has_val = X_val is not None and y_val is not None and len(y_val) > 0
        self.train_loss_history_ = [loss_and_grad(w, b, X, y, self.l2)[0]]
        best = None  # (val_loss, w, b, epoch)
        for epoch in range(1, self.epochs + 1):
            perm = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = perm[start : start + self.batch_size]
                Xb = X[idx]
                resid = np.clip(expit(Xb @ w + b), _PROB_EPS, 1 - _PROB_EPS) - y[idx]
                w -= self.learning_rate * ((Xb.T @ resid) / len(idx) + 2 * self.l2 * w)
                b -= self.learning_rate * float(np.mean(resid))
            self.train_loss_history_.append(loss_and_grad(w, b, X, y, self.l2)[0])
            if has_val:
                val_loss = loss_and_grad(w, b, X_val, np.asarray(y_val, dtype=float), self.l2)[0]
                if best is None or val_loss < best[0]:
                    best = (val_loss, w.copy(), b, epoch)
        if best is not None:
            _, w, b, snapshot_epoch = best
            self.trained_epochs_ = snapshot_epoch
        else:
            self.trained_epochs_ = self.epochs
        self.weights_ = w
        self.bias_ = b
        self.n_features_in_ = d
        return self

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("LinearScorer is not fitted; call fit() first")

    def predict_proba(self, X) -> np.ndarray:
        """One probability per row, clipped strictly inside (0, 1)."""
        self._check_fitted()
        if X.shape[1] != self.n_features_in_:
            raise DimMismatch(X.shape[1], self.n_features_in_)
        return np.clip(expit(X @ self.weights_ + self.bias_), _PROB_EPS, 1 - _PROB_EPS)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X) >= 0.5

    def save(self, path: str | Path, feature_fingerprint: str = "") -> None:
        self._check_fitted()
        payload = {
            "weights": [float(v) for v in self.weights_],
            "bias": float(self.bias_),
            "trained_epochs": self.trained_epochs_,
            "feature_fingerprint": feature_fingerprint,
            "params": self.get_params(),
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LinearScorer":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        scorer = cls(**payload.get("params", {}))
        scorer.weights_ = np.asarray(payload["weights"], dtype=float)
        scorer.bias_ = float(payload["bias"])
        scorer.trained_epochs_ = int(payload.get("trained_epochs", 0))
        scorer.n_features_in_ = len(scorer.weights_)
        scorer.feature_fingerprint_ = payload.get("feature_fingerprint", "")
        return scorer


def to_feature_matrix(vectors: list[TermVector]) -> sparse.csr_matrix:
    rows, cols, vals = [], [], []
    dim = vectors[0].dim if vectors else 0
    for r, vec in enumerate(vectors):
        for c, v in vec.entries.items():
            rows.append(r)
            cols.append(c)
            vals.append(v)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(len(vectors), dim))


def featurize(texts: list[str], model: TfidfVectorizer) -> sparse.csr_matrix:
    return to_feature_matrix(model.transform(texts))


def train_scorer(
    train: list[LabeledSentence],
    val: list[LabeledSentence],
    model: TfidfVectorizer,
    config: TrainConfig | None = None,
) -> LinearScorer:
    """Fit the native scorer on labeled sentences featurized by `model`."""
    if not train:
        raise EmptyTrainingSet()
    config = config or TrainConfig()
    X = featurize([r.sentence.text for r in train], model)
    y = np.array([float(r.label) for r in train])
    X_val = y_val = None
    if val:
        X_val = featurize([r.sentence.text for r in val], model)
        y_val = np.array([float(r.label) for r in val])
    scorer = LinearScorer(
        epochs=config.epochs,
        batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        l2=config.l2,
        seed=config.seed,
    )
    return scorer.fit(X, y, X_val, y_val)


def score_sentences(scorer: LinearScorer, sentences: list[Sentence], model: TfidfVectorizer) -> list[ScoredSentence]:
    """Score sentences with the native scorer, preserving input order."""
    if not sentences:
        return []
    X = featurize([s.text for s in sentences], model)
    probs = scorer.predict_proba(X)
    return [ScoredSentence(sentence=s, probability=float(p)) for s, p in zip(sentences, probs)]


def score_sentences_remote(client, sentences: list[Sentence]) -> list[ScoredSentence]:
    """Score sentences through the remote service; scores pass through verbatim."""
    if not sentences:
        return []
    scores = client.score([s.text for s in sentences])
    return [ScoredSentence(sentence=s, probability=float(p)) for s, p in zip(sentences, scores)]


@dataclass(frozen=True)
class SummaryBudget:
    """Either a sentence cap or a tokenizer-term cap on the summary."""

    mode: str  # "sentences" | "tokens"
    limit: int

    def __post_init__(self):
        if self.mode not in ("sentences", "tokens"):
            raise ValueError(f"unknown budget mode {self.mode!r}")
        if self.limit < 1:
            raise ValueError("budget limit must be >= 1")

    @classmethod
    def max_sentences(cls, k: int) -> "SummaryBudget":
        return cls(mode="sentences", limit=k)

    @classmethod
    def max_tokens(cls, b: int) -> "SummaryBudget":
        return cls(mode="tokens", limit=b)

    @classmethod
    def parse(cls, spec: str) -> "SummaryBudget":
        mode, _, limit = spec.partition(":")
        if mode not in ("sentences", "tokens") or not limit.isdigit():
            raise ValueError(f"budget must look like tokens:256 or sentences:6, got {spec!r}")
        return cls(mode=mode, limit=int(limit))


DEFAULT_BUDGET = SummaryBudget.max_tokens(256)


def assemble_summary(
    scored: list[ScoredSentence],
    budget: SummaryBudget = DEFAULT_BUDGET,
    tokenizer: Tokenizer | None = None,
    vector_fn: VectorFn | None = None,
    duplicate_cosine: float = DUPLICATE_COSINE,
) -> str:
    """Connect top-probability sentences within the budget.

    `scored` must arrive in chronological (doc date, sentence index) order;
    ties on probability prefer the earlier position. A sentence whose token
    count would overflow the budget is skipped and selection continues.
    Near-duplicates of an accepted sentence (cosine >= duplicate_cosine
    under vector_fn) are skipped. Accepted sentences come back out in
    chronological order, concatenated without a separator.
    """
    if not scored:
        raise EmptyInput("scored sentence list")
    if tokenizer is None:
        tokenizer = select_tokenizer("".join(s.sentence.text for s in scored))
    order = sorted(range(len(scored)), key=lambda i: (-scored[i].probability, i))
    accepted: list[int] = []
    accepted_vectors: list[TermVector] = []
    used_tokens = 0
    for i in order:
        text = scored[i].sentence.text
        if budget.mode == "sentences":
            if len(accepted) >= budget.limit:
                break
        else:
            cost = len(tokenizer.tokenize(text))
            if used_tokens + cost > budget.limit:
                continue
        if vector_fn is not None:
            v = vector_fn(text)
            if any(cosine(v, av) >= duplicate_cosine for av in accepted_vectors):
                continue
            accepted_vectors.append(v)
        accepted.append(i)
        if budget.mode == "tokens":
            used_tokens += cost
    return "".join(scored[i].sentence.text for i in sorted(accepted))


def _truncate_to_terms(text: str, tokenizer: Tokenizer, max_terms: int) -> str:
    """Prefix of `text` covering its first max_terms tokenizer terms."""
    if isinstance(tokenizer, WhitespaceTokenizer):
        for count, m in enumerate(re.finditer(r"\S+", text), start=1):
            if count == max_terms:
                return text[: m.end()]
        return text
    if isinstance(tokenizer, CharNgramTokenizer):
        # The k-th n-gram ends at the (k + n - 1)-th non-whitespace character.
        needed = max_terms + tokenizer.n - 1
        seen = 0
        for pos, ch in enumerate(text):
            if not ch.isspace():
                seen += 1
                if seen == needed:
                    return text[: pos + 1]
        return text
    raise TypeError(f"unsupported tokenizer {tokenizer!r}")


def assemble_abstractive_input(
    group: ReportGroup,
    max_terms: int = 1024,
    tokenizer: Tokenizer | None = None,
) -> str:
    """Monthly texts joined by newlines in date order, cut to max_terms terms."""
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")
    if not group.monthlies:
        raise EmptyGroup(group.key)
    joined = "\n".join(m.text for m in group.monthlies)
    if tokenizer is None:
        tokenizer = select_tokenizer(joined)
    return _truncate_to_terms(joined, tokenizer, max_terms)


def summarize_extractive(
    group: ReportGroup,
    scorer: LinearScorer,
    model: TfidfVectorizer,
    budget: SummaryBudget = DEFAULT_BUDGET,
    tokenizer: Tokenizer | None = None,
) -> str:
    """Native extractive path: segment, score, assemble."""
    sentences = [s for m in group.monthlies for s in segment(m.text, source_doc=m.doc_id)]
    if not sentences:
        raise EmptyInput(f"group {group.key} monthly sentences")
    scored = score_sentences(scorer, sentences, model)
    return assemble_summary(scored, budget, tokenizer=tokenizer, vector_fn=model.vector)


def summarize_extractive_remote(
    group: ReportGroup,
    client,
    embed_client,
    budget: SummaryBudget = DEFAULT_BUDGET,
    tokenizer: Tokenizer | None = None,
) -> str:
    """Remote extractive path: service scores, service embeddings for dedup."""
    sentences = [s for m in group.monthlies for s in segment(m.text, source_doc=m.doc_id)]
    if not sentences:
        raise EmptyInput(f"group {group.key} monthly sentences")
    scored = score_sentences_remote(client, sentences)
    vectors = embed_client.embed([s.text for s in sentences])
    cache = {s.text: v for s, v in zip(sentences, vectors)}
    return assemble_summary(scored, budget, tokenizer=tokenizer, vector_fn=cache.__getitem__)


def summarize_abstractive(
    client,
    group: ReportGroup,
    max_input_terms: int = 1024,
    max_new_tokens: int = 256,
    tokenizer: Tokenizer | None = None,
) -> str:
    """Send the assembled monthly text to the generation service."""
    text = assemble_abstractive_input(group, max_terms=max_input_terms, tokenizer=tokenizer)
    result = client.generate(text, max_input_tokens=max_input_terms, max_new_tokens=max_new_tokens)
    if result.output_tokens > max_new_tokens:
        raise GenerationTooLong(result.output_tokens, max_new_tokens)
    return result.output
