"""Offline fine-tuning for the scoring and generation checkpoints.

Consumes the pipeline's JSONL file formats: labeled sentences
({doc_id, index, group_key, text, label, ...}) for the classifier and the
report corpus ({doc_id, fund_id, kind, period_key, date, text, ...}) for
the generator. Training is seeded and dropout-free, so loss histories are
reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .models import MiniEncoder, MiniSeq2Seq, save_checkpoint
from .vocab import PAD, CharVocab, pad_batch


def read_labeled_sentences(path: str | Path) -> tuple[list[str], list[float]]:
    texts, labels = [], []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            obj = json.loads(line)
            try:
                texts.append(str(obj["text"]))
                labels.append(1.0 if obj["label"] else 0.0)
            except KeyError as e:
                raise SystemExit(f"{path}:{line_no}: missing field {e}") from None
    if not texts:
        raise SystemExit(f"{path}: no labeled sentences")
    return texts, labels


def read_report_pairs(path: str | Path) -> list[tuple[str, str]]:
    """(concatenated monthlies, investment report) per fund/period."""
    monthlies: dict[tuple, list] = {}
    investments: dict[tuple, str] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            obj = json.loads(line)
            try:
                key = (obj["fund_id"], obj["period_key"])
                kind = obj["kind"]
                entry = (obj["date"], obj["doc_id"], obj["text"])
            except KeyError as e:
                raise SystemExit(f"{path}:{line_no}: missing field {e}") from None
            if kind == "investment":
                investments[key] = obj["text"]
            else:
                monthlies.setdefault(key, []).append(entry)
    pairs = []
    for key in sorted(investments):
        sources = sorted(monthlies.get(key, []))
        if sources:
            pairs.append(("\n".join(text for _, _, text in sources), investments[key]))
    if not pairs:
        raise SystemExit(f"{path}: no (monthlies, investment) pairs")
    return pairs


@dataclass
class FineTuneResult:
    checkpoint: Path
    epoch_losses: list[float]


def _epoch_batches(n: int, batch_size: int, generator: torch.Generator):
    perm = torch.randperm(n, generator=generator).tolist()
    for start in range(0, n, batch_size):
        yield perm[start : start + batch_size]


def finetune_classifier(
    labeled_path: str | Path,
    out_path: str | Path,
    epochs: int = 9,
    batch_size: int = 4,
    learning_rate: float = 1e-3,
    trainable_top_layers: int = 2,
    max_sentence_len: int = 128,
    seed: int = 0,
) -> FineTuneResult:
    texts, labels = read_labeled_sentences(labeled_path)
    vocab = CharVocab.from_texts(texts)
    torch.manual_seed(seed)
    config = {"max_len": max_sentence_len}
    model = MiniEncoder(len(vocab), **config)
    model.freeze_lower_layers(trainable_top_layers)
    encoded = [vocab.encode(t, max_len=max_sentence_len) or [PAD] for t in texts]
    y = torch.tensor(labels)
    opt = torch.optim.Adam((p for p in model.parameters() if p.requires_grad), lr=learning_rate)
    loss_fn = nn.BCEWithLogitsLoss()
    gen = torch.Generator().manual_seed(seed)

    def full_loss() -> float:
        model.eval()
        with torch.no_grad():
            total = 0.0
            for start in range(0, len(encoded), 64):
                ids, pad = pad_batch(encoded[start : start + 64])
                logits = model.logits(ids, pad)
                total += loss_fn(logits, y[start : start + 64]).item() * ids.size(0)
        model.train()
        return total / len(encoded)

    epoch_losses = []
    model.train()
    for _ in range(epochs):
        for idx in _epoch_batches(len(encoded), batch_size, gen):
            ids, pad = pad_batch([encoded[i] for i in idx])
            loss = loss_fn(model.logits(ids, pad), y[idx])
            opt.zero_grad()
            loss.backward()
            opt.step()
        epoch_losses.append(full_loss())
    model.eval()
    save_checkpoint(out_path, "classifier", model, vocab, config)
    return FineTuneResult(checkpoint=Path(out_path), epoch_losses=epoch_losses)


def finetune_generator(
    corpus_path: str | Path,
    out_path: str | Path,
    epochs: int = 10,
    batch_size: int = 8,
    learning_rate: float = 1e-3,
    max_input_tokens: int = 1024,
    max_new_tokens: int = 256,
    seed: int = 0,
) -> FineTuneResult:
    pairs = read_report_pairs(corpus_path)
    vocab = CharVocab.from_texts([t for pair in pairs for t in pair])
    torch.manual_seed(seed)
    config = {"max_src_len": max_input_tokens, "max_tgt_len": max_new_tokens + 2}
    model = MiniSeq2Seq(len(vocab), **config)
    sources = [vocab.encode(src, max_len=max_input_tokens) for src, _ in pairs]
    targets = [vocab.encode(tgt, max_len=max_new_tokens + 2, add_bos_eos=True) for _, tgt in pairs]
    opt = torch.optim.Adam(model.parameters(), lr=learning_rate)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)
    gen = torch.Generator().manual_seed(seed)

    def batch_loss(idx) -> torch.Tensor:
        src, src_pad = pad_batch([sources[i] for i in idx])
        tgt, _ = pad_batch([targets[i] for i in idx])
        tgt_in, tgt_out = tgt[:, :-1], tgt[:, 1:]
        logits = model(src, src_pad, tgt_in, tgt_in.eq(PAD))
        return loss_fn(logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1))

    def full_loss() -> float:
        model.eval()
        with torch.no_grad():
            total = sum(
                batch_loss(list(range(s, min(s + batch_size, len(pairs))))).item()
                * (min(s + batch_size, len(pairs)) - s)
                for s in range(0, len(pairs), batch_size)
            )
        model.train()
        return total / len(pairs)

    epoch_losses = []
    model.train()
    for _ in range(epochs):
        for idx in _epoch_batches(len(pairs), batch_size, gen):
            loss = batch_loss(idx)
            opt.zero_grad()
            loss.backward()
            opt.step()
        epoch_losses.append(full_loss())
    model.eval()
    save_checkpoint(out_path, "generator", model, vocab, config)
    return FineTuneResult(checkpoint=Path(out_path), epoch_losses=epoch_losses)
