"""Fine-tuning smoke tests on the 50-fund synthetic corpus.

The corpus and labels come from the pipeline CLI (its documented external
interface); this package only reads the JSONL files it produces.
"""

import subprocess
import sys

import pytest
import torch
from fastapi.testclient import TestClient

from modelsvc.models import MiniEncoder
from modelsvc.service import create_app
from modelsvc.training import finetune_classifier, finetune_generator


def at_most_one_non_decreasing(losses):
    violations = sum(1 for a, b in zip(losses, losses[1:]) if b > a)
    return violations <= 1


@pytest.fixture(scope="session")
def synthetic_workdir(tmp_path_factory):
    work = tmp_path_factory.mktemp("synthetic")
    for args in (
        ["gen-synthetic", "--funds", "50", "--seed", "7", "--out", "corpus.jsonl"],
        ["split", "corpus.jsonl", "--ratios", "0.7,0.1,0.2", "--seed", "7"],
        ["label", "--tau", "0.6"],
    ):
        proc = subprocess.run(
            [sys.executable, "-m", "repsumm.cli", *args],
            cwd=work, capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
    return work


class TestClassifierSmoke:
    def test_completes_with_non_increasing_loss(self, synthetic_workdir, tmp_path):
        out = tmp_path / "classifier.pt"
        result = finetune_classifier(
            synthetic_workdir / "labeled" / "train_labeled.jsonl",
            out,
            epochs=9,
            batch_size=4,
        )
        assert out.exists()
        assert len(result.epoch_losses) == 9
        assert at_most_one_non_decreasing(result.epoch_losses), result.epoch_losses

        client = TestClient(create_app(classifier_ckpt=out))
        health = client.get("/v1/health").json()
        assert any(m["kind"] == "score" for m in health["models"])
        r = client.post("/v1/score", json={"texts": ["1月の米国株式は上昇しました。"]})
        assert r.status_code == 200
        assert 0.0 <= r.json()["scores"][0] <= 1.0

    def test_schema_mismatch_fails(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"text": "no label field"}\n', encoding="utf-8")
        with pytest.raises(SystemExit):
            finetune_classifier(bad, tmp_path / "c.pt", epochs=1)


class TestGeneratorSmoke:
    def test_completes_with_non_increasing_loss(self, synthetic_workdir, tmp_path):
        out = tmp_path / "generator.pt"
        result = finetune_generator(
            synthetic_workdir / "splits" / "train.jsonl",
            out,
            epochs=10,
            batch_size=8,
        )
        assert out.exists()
        assert len(result.epoch_losses) == 10
        assert at_most_one_non_decreasing(result.epoch_losses), result.epoch_losses

        client = TestClient(create_app(generator_ckpt=out))
        r = client.post("/v1/generate", json={"input": "1月の市況。", "max_new_tokens": 256})
        assert r.status_code == 200
        assert r.json()["output_tokens"] <= 256

    def test_schema_mismatch_fails(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"doc_id": "A"}\n', encoding="utf-8")
        with pytest.raises(SystemExit):
            finetune_generator(bad, tmp_path / "g.pt", epochs=1)


class TestFreezing:
    def test_lower_layers_frozen(self):
        model = MiniEncoder(vocab_size=30, num_layers=3)
        model.freeze_lower_layers(trainable_top=2)
        assert not any(p.requires_grad for p in model.token_emb.parameters())
        assert not any(p.requires_grad for p in model.encoder.layers[0].parameters())
        assert all(p.requires_grad for p in model.encoder.layers[1].parameters())
        assert all(p.requires_grad for p in model.encoder.layers[2].parameters())
        assert all(p.requires_grad for p in model.head.parameters())

    def test_training_updates_only_trainable(self):
        torch.manual_seed(0)
        model = MiniEncoder(vocab_size=30, num_layers=2)
        model.freeze_lower_layers(trainable_top=1)
        frozen_before = [p.detach().clone() for p in model.encoder.layers[0].parameters()]
        opt = torch.optim.Adam((p for p in model.parameters() if p.requires_grad), lr=1e-2)
        ids = torch.randint(4, 30, (4, 10))
        pad = torch.zeros(4, 10, dtype=torch.bool)
        loss = torch.nn.functional.binary_cross_entropy_with_logits(
            model.logits(ids, pad), torch.tensor([1.0, 0.0, 1.0, 0.0])
        )
        loss.backward()
        opt.step()
        for before, after in zip(frozen_before, model.encoder.layers[0].parameters()):
            assert torch.equal(before, after)
