"""Synthetic fund-report corpus with planted summaries.

Each synthetic group holds one investment report built by concatenating
one designated key sentence from each of its monthly reports (plus
optional closing noise). Key sentences use market-commentary vocabulary,
filler sentences use operational boilerplate, so the planted summary is
recoverable from term overlap by construction. Ground-truth key-sentence
positions are recorded for measuring labeling accuracy.
"""

from __future__ import annotations

import datetime as dt
import json
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import AssetClass, FundMeta, Region, ReportDocument, ReportKind

ASSETS = [
    "米国株式", "国内債券", "欧州株式", "新興国株式", "米国債券", "国内株式",
    "不動産投資信託", "欧州債券", "新興国債券", "米ドル建て社債", "国内リート", "豪州債券",
]

CAUSES = [
    "金利の低下", "原油価格の上昇", "企業業績の改善", "金融緩和への期待", "貿易摩擦の激化",
    "円安の進行", "景気後退への警戒", "雇用統計の改善", "物価上昇の鈍化", "地政学リスクの高まり",
    "中央銀行の利上げ", "半導体需要の拡大",
]

DIRECTIONS = ["上昇", "下落", "反発", "軟化"]

KEY_PATTERNS = [
    "{month}月の{asset}は{cause}を受けて{direction}しました。",
    "{month}月は{cause}が意識され{asset}が{direction}しました。",
    "{asset}は{month}月に{cause}を背景として{direction}する展開となりました。",
]

FILLER_PATTERNS = [
    "当月末の組入銘柄数は{num}銘柄です。",
    "純資産総額は{num}億円で推移しています。",
    "信託報酬等の費用控除後の基準価額を記載しています。",
    "売買高比率は{num}％でした。",
    "為替ヘッジの比率に変更はありません。",
    "分配金は運用実績により変動することがあります。",
    "お申込みの際は投資信託説明書をご覧ください。",
    "ベンチマークとの乖離は{num}ポイント以内に収まりました。",
]

NOISE_SENTENCES = [
    "今後も分散投資を基本に中長期的な観点から運用を行う方針です。",
    "引き続き規律ある運用に努めてまいります。",
]


@dataclass(frozen=True)
class KeyTruth:
    doc_id: str
    key_index: int


def _key_sentence(rng: random.Random, month: int, used: set[tuple]) -> str:
    # Distinct (asset, cause, direction) triples per group keep key
    # sentences well-separated, so near-duplicate suppression never
    # removes a planted sentence.
    while True:
        combo = (rng.randrange(len(ASSETS)), rng.randrange(len(CAUSES)), rng.randrange(len(DIRECTIONS)))
        if combo not in used:
            used.add(combo)
            break
    pattern = KEY_PATTERNS[month % len(KEY_PATTERNS)]
    return pattern.format(
        month=month, asset=ASSETS[combo[0]], cause=CAUSES[combo[1]], direction=DIRECTIONS[combo[2]]
    )


def _filler_sentence(rng: random.Random) -> str:
    pattern = rng.choice(FILLER_PATTERNS)
    return pattern.format(num=rng.randrange(10, 99))


def generate_corpus(
    n_funds: int,
    seed: int = 0,
    monthlies_per_fund: int = 6,
    fillers_per_monthly: tuple[int, int] = (2, 3),
    noise_probability: float = 0.5,
) -> tuple[list[ReportDocument], list[KeyTruth]]:
    """Build n_funds groups of monthlies plus their planted investment report."""
    rng = random.Random(seed)
    docs: list[ReportDocument] = []
    truth: list[KeyTruth] = []
    for i in range(n_funds):
        fund_id = f"F{i:03d}"
        fund = FundMeta(
            fund_id=fund_id,
            asset_class=rng.choice(list(AssetClass)),
            region=rng.choice(list(Region)),
        )
        period_key = "2023H1"
        used_combos: set[tuple] = set()
        key_sentences: list[str] = []
        for m in range(1, monthlies_per_fund + 1):
            key = _key_sentence(rng, m, used_combos)
            key_sentences.append(key)
            n_fillers = rng.randint(*fillers_per_monthly)
            sentences = [_filler_sentence(rng) for _ in range(n_fillers)]
            key_index = rng.randrange(n_fillers + 1)
            sentences.insert(key_index, key)
            doc_id = f"{fund_id}-M{m:02d}"
            docs.append(
                ReportDocument(
                    doc_id=doc_id,
                    fund=fund,
                    kind=ReportKind.MONTHLY,
                    period_key=period_key,
                    date=dt.date(2023 + (m - 1) // 12, (m - 1) % 12 + 1, 28),
                    text="".join(sentences),
                )
            )
            truth.append(KeyTruth(doc_id=doc_id, key_index=key_index))
        investment_text = "".join(key_sentences)
        if rng.random() < noise_probability:
            investment_text += rng.choice(NOISE_SENTENCES)
        docs.append(
            ReportDocument(
                doc_id=f"{fund_id}-INV",
                fund=fund,
                kind=ReportKind.INVESTMENT,
                period_key=period_key,
                date=dt.date(2023 + monthlies_per_fund // 12, monthlies_per_fund % 12 + 1, 15),
                text=investment_text,
            )
        )
    return docs, truth


def write_truth(truth: list[KeyTruth], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in truth:
            f.write(json.dumps({"doc_id": t.doc_id, "key_index": t.key_index}))
            f.write("\n")


def read_truth(path: str | Path) -> list[KeyTruth]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            obj = json.loads(line)
            out.append(KeyTruth(doc_id=obj["doc_id"], key_index=int(obj["key_index"])))
    return out


def labeling_accuracy(labeled, truth: list[KeyTruth]) -> float:
    """Fraction of labeled sentences whose label matches the planted truth."""
    key_by_doc = {t.doc_id: t.key_index for t in truth}
    hits = 0
    total = 0
    for rec in labeled:
        expected = key_by_doc.get(rec.sentence.source_doc)
        if expected is None:
            continue
        total += 1
        hits += int(rec.label == (rec.sentence.index == expected))
    return hits / total if total else 0.0
