"""Report corpus: data model, JSONL ingestion and grouped dataset splits.

All structures are immutable after load and safe to share across workers.
"""

from __future__ import annotations

import datetime as dt
import json
import math
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import (
    BadRatios,
    DuplicateId,
    DuplicateInvestment,
    MalformedLine,
    OrphanInvestment,
    OrphanMonthlies,
    SchemaViolation,
)


class AssetClass(str, Enum):
    STOCK = "stock"
    BOND = "bond"
    REAL_ESTATE = "real_estate"
    ASSET_COMBINATION = "asset_combination"
    OTHER = "other"


class Region(str, Enum):
    DOMESTIC = "domestic"
    FOREIGN = "foreign"
    DOMESTIC_FOREIGN = "domestic_foreign"


class ReportKind(str, Enum):
    MONTHLY = "monthly"
    INVESTMENT = "investment"


@dataclass(frozen=True)
class FundMeta:
    fund_id: str
    asset_class: AssetClass
    region: Region


@dataclass(frozen=True)
class ReportDocument:
    doc_id: str
    fund: FundMeta
    kind: ReportKind
    period_key: str
    date: dt.date
    text: str

    @property
    def group_key(self) -> tuple[str, str]:
        return (self.fund.fund_id, self.period_key)


@dataclass(frozen=True)
class ReportGroup:
    """One investment report plus its date-sorted monthly sources."""

    investment: ReportDocument
    monthlies: tuple[ReportDocument, ...]

    @property
    def key(self) -> tuple[str, str]:
        return self.investment.group_key


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[ReportGroup, ...]
    validation: tuple[ReportGroup, ...]
    test: tuple[ReportGroup, ...]
    seed: int


_FIELDS = ("doc_id", "fund_id", "asset_class", "region", "kind", "period_key", "date", "text")


def _parse_document(obj: dict, line_no: int) -> ReportDocument:
    for field_name in _FIELDS:
        if field_name not in obj:
            raise SchemaViolation(line_no, field_name, "missing")
        if not isinstance(obj[field_name], str):
            raise SchemaViolation(line_no, field_name, "not a string")
    try:
        asset_class = AssetClass(obj["asset_class"])
    except ValueError:
        raise SchemaViolation(line_no, "asset_class", obj["asset_class"]) from None
    try:
        region = Region(obj["region"])
    except ValueError:
        raise SchemaViolation(line_no, "region", obj["region"]) from None
    try:
        kind = ReportKind(obj["kind"])
    except ValueError:
        raise SchemaViolation(line_no, "kind", obj["kind"]) from None
    try:
        date = dt.date.fromisoformat(obj["date"])
    except ValueError:
        raise SchemaViolation(line_no, "date", obj["date"]) from None
    if not obj["doc_id"]:
        raise SchemaViolation(line_no, "doc_id", "empty")
    if not obj["text"].strip():
        raise SchemaViolation(line_no, "text", "empty after trimming")
    return ReportDocument(
        doc_id=obj["doc_id"],
        fund=FundMeta(fund_id=obj["fund_id"], asset_class=asset_class, region=region),
        kind=kind,
        period_key=obj["period_key"],
        date=date,
        text=obj["text"],
    )


def ingest(path: str | Path) -> list[ReportDocument]:
    """Read a JSONL corpus file, validating every line.

    Raises MalformedLine / SchemaViolation / DuplicateId; on success the
    result has one document per input line, in file order.
    """
    docs: list[ReportDocument] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedLine(line_no, str(e)) from None
            if not isinstance(obj, dict):
                raise MalformedLine(line_no, "not a JSON object")
            doc = _parse_document(obj, line_no)
            if doc.doc_id in seen:
                raise DuplicateId(doc.doc_id)
            seen.add(doc.doc_id)
            docs.append(doc)
    return docs


def document_to_record(doc: ReportDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "fund_id": doc.fund.fund_id,
        "asset_class": doc.fund.asset_class.value,
        "region": doc.fund.region.value,
        "kind": doc.kind.value,
        "period_key": doc.period_key,
        "date": doc.date.isoformat(),
        "text": doc.text,
    }


def serialize(docs: list[ReportDocument], path: str | Path) -> None:
    """Write documents as JSONL with keys in schema order."""
    with open(path, "w", encoding="utf-8") as f:
        for doc in docs:
            f.write(json.dumps(document_to_record(doc), ensure_ascii=False))
            f.write("\n")


def group(docs: list[ReportDocument]) -> list[ReportGroup]:
    """Pair each investment report with its monthlies by (fund_id, period_key).

    Groups come back sorted by key; monthlies within a group are sorted by
    (date, doc_id).
    """
    investments: dict[tuple[str, str], ReportDocument] = {}
    monthlies: dict[tuple[str, str], list[ReportDocument]] = {}
    for doc in docs:
        key = doc.group_key
        if doc.kind is ReportKind.INVESTMENT:
            if key in investments:
                raise DuplicateInvestment(*key)
            investments[key] = doc
        else:
            monthlies.setdefault(key, []).append(doc)
    for key in sorted(monthlies):
        if key not in investments:
            raise OrphanMonthlies(*key)
    groups = []
    for key in sorted(investments):
        members = monthlies.get(key, [])
        if not members:
            raise OrphanInvestment(*key)
        members.sort(key=lambda d: (d.date, d.doc_id))
        groups.append(ReportGroup(investment=investments[key], monthlies=tuple(members)))
    return groups


def split(
    groups: list[ReportGroup],
    ratios: tuple[float, float, float] = (0.7, 0.1, 0.2),
    seed: int = 0,
) -> DatasetSplit:
    """Seed-shuffled grouped split; floor-sized buckets, remainder to train.

    Splitting whole groups keeps a fund's monthlies in the same bucket as
    their investment report, so no reference text leaks across splits.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise BadRatios(ratios)
    order = list(groups)
    random.Random(seed).shuffle(order)
    n = len(order)
    n_val = math.floor(ratios[1] * n)
    n_test = math.floor(ratios[2] * n)
    n_train = n - n_val - n_test
    return DatasetSplit(
        train=tuple(order[:n_train]),
        validation=tuple(order[n_train : n_train + n_val]),
        test=tuple(order[n_train + n_val :]),
        seed=seed,
    )


def group_documents(g: ReportGroup) -> list[ReportDocument]:
    return [g.investment, *g.monthlies]


def write_split(ds: DatasetSplit, out_dir: str | Path, ratios: tuple[float, float, float]) -> None:
    """Persist a split as three JSONL files plus a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"seed": ds.seed, "ratios": list(ratios), "groups": {}}
    for name, part in (("train", ds.train), ("validation", ds.validation), ("test", ds.test)):
        docs = [d for g in part for d in group_documents(g)]
        serialize(docs, out / f"{name}.jsonl")
        manifest["groups"][name] = [list(g.key) for g in part]
    (out / "split.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )


def read_split(split_dir: str | Path) -> DatasetSplit:
    """Load a split written by write_split."""
    split_dir = Path(split_dir)
    manifest = json.loads((split_dir / "split.json").read_text(encoding="utf-8"))
    parts = {}
    for name in ("train", "validation", "test"):
        path = split_dir / f"{name}.jsonl"
        docs = ingest(path) if path.exists() else []
        parts[name] = tuple(group(docs)) if docs else ()
    return DatasetSplit(
        train=parts["train"],
        validation=parts["validation"],
        test=parts["test"],
        seed=int(manifest["seed"]),
    )
