"""Shared fixtures: synthetic records, briefings and a post corpus."""

import random
from decimal import Decimal
from pathlib import Path

import pytest

from briefextract.corpus.cleaning import BriefingRecord
from briefextract.corpus.ingest import RawPost
from briefextract.schema.codes import TYPE_CODES
from briefextract.schema.record import (
    AmountClaim,
    CountedClaim,
    EventCharacteristics,
    ExtractionRecord,
    ImpactAssessment,
    LocationInfo,
)

FIXTURES = Path(__file__).parent / "fixtures"

PLACES = [
    ("北京市", "北京市"),
    ("山东省", "济南市"),
    ("广东省", "广州市"),
    ("四川省", "成都市"),
    ("浙江省", "杭州市"),
    ("", ""),
]
MEANS = ["冒充客服实施电信诈骗", "入户盗窃", "持刀抢劫", "", "网络赌博"]
HANDLING = ["已依法刑事拘留", "立案侦查", "", "行政拘留十日", "已移送检察机关"]


def random_record(rng: random.Random) -> ExtractionRecord:
    """A valid record with every field drawn at random."""
    province, city = rng.choice(PLACES)
    deaths = rng.random() < 0.2
    injuries = rng.random() < 0.3
    losses = rng.random() < 0.4
    return ExtractionRecord(
        location=LocationInfo(province, city),
        event=EventCharacteristics(
            type_codes=frozenset(rng.sample(sorted(TYPE_CODES), rng.randint(1, 2))),
            illegal_means=rng.choice(MEANS),
            cybercrime=rng.random() < 0.3,
            completed_illegal_act=rng.random() < 0.6,
            case_closure=rng.random() < 0.5,
            police_handling=rng.choice(HANDLING),
        ),
        impact=ImpactAssessment(
            deaths=CountedClaim(deaths, rng.randint(1, 3) if deaths else 0),
            injuries=CountedClaim(injuries, rng.randint(1, 5) if injuries else 0),
            economic_losses=AmountClaim(
                losses, Decimal(rng.randint(100, 5_000_000)) / 100 if losses else Decimal(0)
            ),
            social_impact=rng.random() < 0.5,
        ),
    )


def make_briefing(record_id: str, text: str = "某市公安局通报一起电信诈骗案件已破获") -> BriefingRecord:
    return BriefingRecord(
        record_id=record_id,
        text=text,
        source_post_id=record_id,
        cjk_count=len(text),
    )


def make_post(post_id: str, body: str, images: tuple[str, ...] = ()) -> RawPost:
    return RawPost(
        post_id=post_id,
        account_id="acct",
        posted_at="2020-01-01 08:00",
        reposts=1,
        likes=2,
        comments=3,
        body_text=body,
        image_texts=images,
    )


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def gold_records():
    """50 seeded synthetic (record_id, record) pairs."""
    rng = random.Random(20240601)
    return [(f"r{i:03d}", random_record(rng)) for i in range(50)]


@pytest.fixture
def briefings():
    return [make_briefing(f"r{i:03d}", f"第{i}号警情通报某地发生盗窃案件嫌疑人已被抓获") for i in range(50)]


@pytest.fixture
def cleaning_corpus():
    """
    40 posts: 5 exact duplicates, 4 posts under 15 ideographs, 6 posts with URLs.

    25 distinct long posts plus the 5 duplicates and 4 short ones make 34;
    the 6 URL posts are distinct long posts too, so 40 in total and 31 kept.
    """
    posts = []
    distinct = [f"某市公安局通报第{i}起案件经过嫌疑人已被依法刑事拘留" for i in range(25)]
    for i, text in enumerate(distinct):
        posts.append(make_post(f"p{i:02d}", text))
    for i in range(5):
        posts.append(make_post(f"d{i}", distinct[i]))
    for i in range(4):
        posts.append(make_post(f"s{i}", f"警情通报{i}号"))
    for i in range(6):
        posts.append(
            make_post(
                f"u{i}",
                f"网友举报第{i}条线索警方核查后已依法处置完毕 http://t.cn/A{i}x 详情见官网",
            )
        )
    return posts


def fraud_record() -> ExtractionRecord:
    """A telecom fraud case with losses and two type codes."""
    return ExtractionRecord(
        location=LocationInfo("山东省", "济南市"),
        event=EventCharacteristics(
            type_codes=frozenset({"05", "03"}),
            illegal_means="冒充客服实施电信诈骗",
            cybercrime=True,
            completed_illegal_act=True,
            case_closure=False,
            police_handling="立案侦查",
        ),
        impact=ImpactAssessment(
            economic_losses=AmountClaim(True, Decimal("12000.5")),
            social_impact=True,
        ),
    )
