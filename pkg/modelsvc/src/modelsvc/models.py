"""Small transformer models served by the API.

These follow the serving contracts exactly (shapes, determinism, budget
caps); they are intentionally tiny so that fine-tuning runs on CPU in
seconds. Dropout is zero everywhere, making training loss curves and
inference deterministic for a fixed seed.
"""

from __future__ import annotations

from pathlib import Path

import torch
from torch import nn

from .vocab import BOS, EOS, ByteVocab, CharVocab, pad_batch


class MiniEncoder(nn.Module):
    """Character/byte-level transformer encoder with mean pooling and a
    binary classification head."""

    def __init__(self, vocab_size: int, d_model: int = 64, nhead: int = 4,
                 num_layers: int = 2, dim_feedforward: int = 128, max_len: int = 4096):
        super().__init__()
        self.d_model = d_model
        self.max_len = max_len
        self.token_emb = nn.Embedding(vocab_size, d_model)
        self.pos_emb = nn.Embedding(max_len, d_model)
        layer = nn.TransformerEncoderLayer(
            d_model, nhead, dim_feedforward, dropout=0.0, batch_first=True
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers)
        self.head = nn.Linear(d_model, 1)

    def pooled(self, ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        x = self.token_emb(ids) + self.pos_emb(positions)
        states = self.encoder(x, src_key_padding_mask=pad_mask)
        keep = (~pad_mask).unsqueeze(-1).float()
        return (states * keep).sum(dim=1) / keep.sum(dim=1).clamp(min=1.0)

    def logits(self, ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        return self.head(self.pooled(ids, pad_mask)).squeeze(-1)

    def freeze_lower_layers(self, trainable_top: int) -> None:
        """Freeze embeddings and all but the top `trainable_top` encoder layers."""
        frozen = max(0, len(self.encoder.layers) - trainable_top)
        for p in (*self.token_emb.parameters(), *self.pos_emb.parameters()):
            p.requires_grad = False
        for layer in self.encoder.layers[:frozen]:
            for p in layer.parameters():
                p.requires_grad = False


class MiniSeq2Seq(nn.Module):
    """Character-level encoder-decoder with greedy decoding."""

    def __init__(self, vocab_size: int, d_model: int = 64, nhead: int = 4,
                 num_layers: int = 2, dim_feedforward: int = 128,
                 max_src_len: int = 1024, max_tgt_len: int = 258):
        super().__init__()
        self.max_src_len = max_src_len
        self.max_tgt_len = max_tgt_len
        self.token_emb = nn.Embedding(vocab_size, d_model)
        self.src_pos = nn.Embedding(max_src_len, d_model)
        self.tgt_pos = nn.Embedding(max_tgt_len, d_model)
        self.transformer = nn.Transformer(
            d_model, nhead, num_layers, num_layers, dim_feedforward,
            dropout=0.0, batch_first=True,
        )
        self.out = nn.Linear(d_model, vocab_size)

    def _embed_src(self, src: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(src.size(1), device=src.device).unsqueeze(0)
        return self.token_emb(src) + self.src_pos(positions)

    def _embed_tgt(self, tgt: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(tgt.size(1), device=tgt.device).unsqueeze(0)
        return self.token_emb(tgt) + self.tgt_pos(positions)

    @staticmethod
    def _causal_mask(size: int) -> torch.Tensor:
        return torch.triu(torch.ones(size, size, dtype=torch.bool), diagonal=1)

    def forward(self, src, src_pad, tgt_in, tgt_pad) -> torch.Tensor:
        causal = self._causal_mask(tgt_in.size(1))
        states = self.transformer(
            self._embed_src(src),
            self._embed_tgt(tgt_in),
            tgt_mask=causal,
            src_key_padding_mask=src_pad,
            tgt_key_padding_mask=tgt_pad,
            memory_key_padding_mask=src_pad,
        )
        return self.out(states)

    @torch.no_grad()
    def greedy_decode(self, src_ids: list[int], max_new_tokens: int) -> list[int]:
        """Generate up to max_new_tokens ids (EOS stops early, not counted)."""
        src, src_pad = pad_batch([src_ids])
        memory = self.transformer.encoder(self._embed_src(src), src_key_padding_mask=src_pad)
        ys = [BOS]
        for _ in range(max_new_tokens):
            tgt = torch.tensor([ys], dtype=torch.long)
            causal = self._causal_mask(tgt.size(1))
            states = self.transformer.decoder(
                self._embed_tgt(tgt), memory, tgt_mask=causal, memory_key_padding_mask=src_pad
            )
            next_id = int(self.out(states[:, -1]).argmax(dim=-1))
            if next_id == EOS:
                break
            ys.append(next_id)
            if len(ys) >= self.max_tgt_len:
                break
        return ys[1:]


def build_embedder(seed: int = 12345, dim: int = 64, max_len: int = 2048) -> tuple[MiniEncoder, ByteVocab]:
    """Deterministic byte-level embedder; same seed gives the same weights
    on every start, so embeddings are reproducible across restarts."""
    vocab = ByteVocab()
    with torch.random.fork_rng():
        torch.manual_seed(seed)
        model = MiniEncoder(len(vocab), d_model=dim, max_len=max_len)
    model.eval()
    return model, vocab


def save_checkpoint(path: str | Path, kind: str, model: nn.Module, vocab: CharVocab, config: dict) -> None:
    torch.save(
        {"kind": kind, "chars": vocab.chars, "config": config, "state_dict": model.state_dict()},
        path,
    )


def load_checkpoint(path: str | Path) -> tuple[str, nn.Module, CharVocab, dict]:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    vocab = CharVocab(payload["chars"])
    config = payload["config"]
    if payload["kind"] == "classifier":
        model: nn.Module = MiniEncoder(len(vocab), **config)
    elif payload["kind"] == "generator":
        model = MiniSeq2Seq(len(vocab), **config)
    else:
        raise ValueError(f"unknown checkpoint kind {payload['kind']!r}")
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return payload["kind"], model, vocab, config
