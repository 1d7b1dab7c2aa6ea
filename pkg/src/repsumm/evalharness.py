"""Experiment runner: summarize the test split, aggregate ROUGE per fund
stratum (asset class x region) and emit CSV/Markdown reports plus a
per-group score dump so every aggregate can be recomputed independently.
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import json
from decimal import ROUND_HALF_EVEN, Decimal
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable

from .corpus import AssetClass, DatasetSplit, Region, ReportGroup
from .errors import ExperimentError, MissingArtifact
from .rouge import VARIANTS, RougeConfig, RougeScore, rouge_all


class MethodId(str, Enum):
    EX_NATIVE = "ex-native"
    EX_REMOTE = "ex-remote"
    AB_REMOTE = "ab-remote"


ALL = "all"

_ASSET_ORDER = {a.value: i for i, a in enumerate(AssetClass)}
_REGION_ORDER = {r.value: i for i, r in enumerate(Region)}

ASSET_DISPLAY = {
    "stock": "Stock",
    "bond": "Bond",
    "real_estate": "Real estate",
    "asset_combination": "Asset combination",
    "other": "Other",
    ALL: "All",
}
REGION_DISPLAY = {"domestic": "D", "foreign": "F", "domestic_foreign": "DF", ALL: ""}


@dataclass(frozen=True)
class GroupScore:
    group_key: tuple[str, str]
    asset_class: str
    region: str
    scores: dict[str, RougeScore]


@dataclass(frozen=True)
class StratumResult:
    asset_class: str
    region: str
    n_groups: int
    scores: dict[str, RougeScore]


@dataclass
class ExperimentReport:
    method: str
    overall: StratumResult
    strata: list[StratumResult]
    per_group: list[GroupScore] = field(default_factory=list)
    config_fingerprint: str = ""
    created_at: str = ""


def config_fingerprint(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _mean_scores(items: list[GroupScore]) -> dict[str, RougeScore]:
    n = len(items)
    out = {}
    for v in VARIANTS:
        out[v] = RougeScore(
            precision=sum(g.scores[v].precision for g in items) / n,
            recall=sum(g.scores[v].recall for g in items) / n,
            f1=sum(g.scores[v].f1 for g in items) / n,
        )
    return out


def aggregate(method: str, per_group: list[GroupScore], fingerprint: str = "") -> ExperimentReport:
    """Arithmetic per-stratum means plus the All row (mean over all groups)."""
    if not per_group:
        raise ValueError("cannot aggregate an empty result list")
    per_group = sorted(per_group, key=lambda g: g.group_key)
    strata: dict[tuple[str, str], list[GroupScore]] = {}
    for g in per_group:
        strata.setdefault((g.asset_class, g.region), []).append(g)
    stratum_results = [
        StratumResult(asset_class=a, region=r, n_groups=len(items), scores=_mean_scores(items))
        for (a, r), items in sorted(
            strata.items(), key=lambda kv: (_ASSET_ORDER[kv[0][0]], _REGION_ORDER[kv[0][1]])
        )
    ]
    overall = StratumResult(
        asset_class=ALL, region=ALL, n_groups=len(per_group), scores=_mean_scores(per_group)
    )
    return ExperimentReport(
        method=method,
        overall=overall,
        strata=stratum_results,
        per_group=per_group,
        config_fingerprint=fingerprint,
        created_at=dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
    )


Summarizer = Callable[[ReportGroup], str]


def run_experiment(
    split: DatasetSplit,
    method: MethodId,
    summarizer: Summarizer,
    rouge_config: RougeConfig | None = None,
    fingerprint: str = "",
    workers: int = 4,
) -> ExperimentReport:
    """Summarize every test group, score against its investment report,
    and aggregate. Any group failure aborts the experiment (silently
    dropping groups would bias stratum means)."""
    groups = sorted(split.test, key=lambda g: g.key)
    if not groups:
        raise MissingArtifact("test split has no groups")

    def evaluate(g: ReportGroup):
        summary = summarizer(g)
        return GroupScore(
            group_key=g.key,
            asset_class=g.investment.fund.asset_class.value,
            region=g.investment.fund.region.value,
            scores=rouge_all(summary, g.investment.text, rouge_config),
        )

    per_group: list[GroupScore] = []
    failures = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for g, outcome in zip(groups, pool.map(lambda g: _capture(evaluate, g), groups)):
            ok, value = outcome
            if ok:
                per_group.append(value)
            else:
                failures.append((g.key, value))
    if failures:
        raise ExperimentError(failures)
    return aggregate(method.value, per_group, fingerprint)


def _capture(fn, arg):
    try:
        return True, fn(arg)
    except Exception as e:  # collected per group, re-raised as ExperimentError
        return False, e


CSV_COLUMNS = [
    "method", "asset_class", "region", "n_groups",
    "r1_p", "r1_r", "r1_f", "r2_p", "r2_r", "r2_f", "rl_p", "rl_r", "rl_f",
]


def format3(x: float) -> str:
    """Three decimals with round-half-to-even on the shown precision."""
    return str(Decimal(repr(x)).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN))


def _rows(report: ExperimentReport):
    for s in [report.overall, *report.strata]:
        row = [report.method, s.asset_class, s.region, str(s.n_groups)]
        for v in VARIANTS:
            sc = s.scores[v]
            row.extend(format3(x) for x in (sc.precision, sc.recall, sc.f1))
        yield row


def emit_csv(report: ExperimentReport, path: str | Path) -> None:
    """All row first, three decimals, round-half-to-even."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(_rows(report))


def emit_markdown(report: ExperimentReport, path: str | Path) -> None:
    """Table shaped like the published per-fund-type results (F1 shown)."""
    lines = [
        f"### {report.method}",
        "",
        "| Fund type | Region | ROUGE-1 | ROUGE-2 | ROUGE-L |",
        "| --- | --- | ---: | ---: | ---: |",
    ]
    for s in [report.overall, *report.strata]:
        cells = [
            ASSET_DISPLAY.get(s.asset_class, s.asset_class),
            REGION_DISPLAY.get(s.region, s.region),
        ]
        cells.extend(format3(s.scores[v].f1) for v in VARIANTS)
        lines.append("| " + " | ".join(cells) + " |")
    if report.config_fingerprint:
        lines += ["", f"Config fingerprint: `{report.config_fingerprint}`"]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_group_dump(report: ExperimentReport, path: str | Path) -> None:
    """One JSON line per group with full-precision scores."""
    with open(path, "w", encoding="utf-8") as f:
        for g in report.per_group:
            obj = {
                "group_key": list(g.group_key),
                "asset_class": g.asset_class,
                "region": g.region,
            }
            for v in VARIANTS:
                obj[v] = {"p": g.scores[v].precision, "r": g.scores[v].recall, "f": g.scores[v].f1}
            f.write(json.dumps(obj, ensure_ascii=False))
            f.write("\n")


def read_group_dump(path: str | Path) -> list[GroupScore]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            obj = json.loads(line)
            out.append(
                GroupScore(
                    group_key=tuple(obj["group_key"]),
                    asset_class=obj["asset_class"],
                    region=obj["region"],
                    scores={
                        v: RougeScore(obj[v]["p"], obj[v]["r"], obj[v]["f"]) for v in VARIANTS
                    },
                )
            )
    return out


def load_baselines() -> list[ExperimentReport]:
    """Published benchmark tables, for rendering and comparison display.

    Group counts per stratum were not published; n_groups is stored as 0
    and the single published number per metric is mirrored into P/R/F1.
    """
    payload = json.loads(
        resources.files("repsumm.data").joinpath("baselines.json").read_text(encoding="utf-8")
    )
    reports = []
    for rep in payload["reports"]:
        def score_row(row) -> dict[str, RougeScore]:
            return {v: RougeScore(row[v], row[v], row[v]) for v in VARIANTS}

        overall = StratumResult(ALL, ALL, 0, score_row(rep["overall"]))
        strata = [
            StratumResult(s["asset_class"], s["region"], 0, score_row(s)) for s in rep["strata"]
        ]
        reports.append(ExperimentReport(method=rep["method"], overall=overall, strata=strata))
    return reports
