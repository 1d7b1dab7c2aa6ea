import datetime as dt
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stub_service import StubServer

from repsumm.corpus import AssetClass, FundMeta, Region, ReportDocument, ReportGroup, ReportKind


@pytest.fixture(scope="session")
def stub_server():
    server = StubServer().start()
    yield server
    server.shutdown()


def make_doc(
    doc_id: str,
    kind: ReportKind = ReportKind.MONTHLY,
    text: str = "text。",
    fund_id: str = "F0",
    period_key: str = "P0",
    date: dt.date = dt.date(2023, 1, 31),
    asset_class: AssetClass = AssetClass.STOCK,
    region: Region = Region.DOMESTIC,
) -> ReportDocument:
    return ReportDocument(
        doc_id=doc_id,
        fund=FundMeta(fund_id=fund_id, asset_class=asset_class, region=region),
        kind=kind,
        period_key=period_key,
        date=date,
        text=text,
    )


def make_group(
    investment_text: str,
    monthly_texts: list[str],
    fund_id: str = "F0",
    period_key: str = "P0",
) -> ReportGroup:
    investment = make_doc(
        f"{fund_id}-INV",
        kind=ReportKind.INVESTMENT,
        text=investment_text,
        fund_id=fund_id,
        period_key=period_key,
        date=dt.date(2023, 7, 15),
    )
    monthlies = tuple(
        make_doc(
            f"{fund_id}-M{i:02d}",
            text=text,
            fund_id=fund_id,
            period_key=period_key,
            date=dt.date(2023, i + 1, 28),
        )
        for i, text in enumerate(monthly_texts)
    )
    return ReportGroup(investment=investment, monthlies=monthlies)
