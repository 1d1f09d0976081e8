"""Tests for the extraction record schema."""

import json
from decimal import Decimal

import pytest

from briefextract.errors import DataError
from briefextract.schema.codes import TYPE_CODES, UnknownTypeCode, code_label, coding_table_rows
from briefextract.schema.record import (
    FIELD_PATHS,
    CountedClaim,
    ExtractionRecord,
    ImpactAssessment,
    InvalidRecord,
    LocationInfo,
    ViolationKind,
    canonical_json,
    default_record,
    format_amount,
    get_field,
    gold_row,
    load_gold,
    parse_record,
    record_from_values,
    record_to_values,
    validate,
)

from .conftest import fraud_record, random_record

DEFAULT_JSON = (
    '{"Location":{"Province":"","City":""},'
    '"Event Characteristics":{"Type Code":[],"Illegal Means":"","Cybercrime":false,'
    '"Completed Illegal Act":false,"Case Closure":false,"Police Handling":""},'
    '"Impact Assessment":{"Deaths":{"Existence":false,"Number":0},'
    '"Injuries":{"Existence":false,"Number":0},'
    '"Economic Losses":{"Existence":false,"Amount":0},"Social Impact":false}}'
)


class TestCodes:
    """Tests for the case-type coding table."""

    def test_eleven_codes(self):
        assert list(TYPE_CODES) == [f"{i:02d}" for i in range(1, 12)]

    def test_labels(self):
        assert code_label("11") == "Suicide"
        assert code_label("11", "zh") == "自杀"

    def test_unknown_code(self):
        with pytest.raises(UnknownTypeCode):
            code_label("12")

    def test_table_rows(self):
        rows = coding_table_rows()
        assert len(rows) == 11
        assert rows[0] == "| 01 | Endangering national security |"


class TestRecord:
    """Tests for record flattening and validation."""

    def test_fifteen_fields(self):
        assert len(FIELD_PATHS) == 15
        assert set(record_to_values(default_record())) == set(FIELD_PATHS)

    def test_values_round_trip(self):
        record = fraud_record()
        assert record_from_values(record_to_values(record)) == record

    def test_get_field(self):
        assert get_field(fraud_record(), "impact.economic_losses.amount") == Decimal("12000.5")

    def test_default_record_valid(self):
        report = validate(default_record())
        assert report.valid
        assert report.has(ViolationKind.EMPTY_TYPE_CODES)

    def test_existence_mismatch(self):
        record = ExtractionRecord(impact=ImpactAssessment(deaths=CountedClaim(False, 2)))
        report = validate(record)
        assert not report.valid
        assert report.has(ViolationKind.EXISTENCE_MISMATCH)

    def test_existence_true_with_zero_is_allowed(self):
        """Deaths reported without a head count stay valid."""
        record = ExtractionRecord(impact=ImpactAssessment(deaths=CountedClaim(True, 0)))
        assert validate(record).valid

    @pytest.mark.parametrize(
        "path,value,kind",
        [
            ("event.type_codes", ["12"], ViolationKind.UNKNOWN_TYPE_CODE),
            ("event.type_codes", ["01", "01"], ViolationKind.DUPLICATE_TYPE_CODE),
            ("impact.injuries.number", -1, ViolationKind.NEGATIVE_COUNT),
            ("impact.economic_losses.amount", Decimal("-5"), ViolationKind.NEGATIVE_AMOUNT),
            ("impact.economic_losses.amount", Decimal("1.005"), ViolationKind.EXCESS_PRECISION),
            ("impact.economic_losses.amount", Decimal("1e30"), ViolationKind.AMOUNT_OUT_OF_RANGE),
            ("impact.economic_losses.amount", 10**26, ViolationKind.AMOUNT_OUT_OF_RANGE),
            ("event.cybercrime", "true", ViolationKind.WRONG_TYPE),
            ("location.city", 5, ViolationKind.WRONG_TYPE),
        ],
    )
    def test_violations(self, path, value, kind):
        values = record_to_values(default_record())
        values[path] = value
        if path == "impact.economic_losses.amount":
            values["impact.economic_losses.existence"] = True
        if path == "impact.injuries.number":
            values["impact.injuries.existence"] = True
        report = validate(values)
        assert report.has(kind)
        assert not report.valid

    def test_trailing_zero_decimals_allowed(self):
        values = record_to_values(default_record())
        values["impact.economic_losses.existence"] = True
        values["impact.economic_losses.amount"] = Decimal("12.500")
        assert validate(values).valid

    def test_place_canonicalized(self):
        assert LocationInfo(" 北京市 ", "").province == "北京市"


class TestCanonicalJson:
    """Tests for canonical serialization."""

    def test_default_record(self):
        assert canonical_json(default_record()) == DEFAULT_JSON

    def test_codes_sorted_and_amount(self):
        text = canonical_json(fraud_record())
        assert '"Type Code":["03","05"]' in text
        assert '"Amount":12000.5' in text
        assert ": " not in text and ", " not in text
        assert list(json.loads(text)) == ["Location", "Event Characteristics", "Impact Assessment"]

    def test_invalid_record_rejected(self):
        record = ExtractionRecord(impact=ImpactAssessment(deaths=CountedClaim(False, 2)))
        with pytest.raises(InvalidRecord):
            canonical_json(record)

    def test_parse_round_trip(self, rng):
        for _ in range(1000):
            record = random_record(rng)
            assert parse_record(canonical_json(record)) == record

    def test_serialize_is_stable(self, rng):
        record = random_record(rng)
        text = canonical_json(record)
        assert canonical_json(parse_record(text)) == text

    @pytest.mark.parametrize(
        "amount,expected",
        [
            (Decimal("100.00"), "100"),
            (Decimal("0.5"), "0.5"),
            (7, "7"),
            (Decimal("9" * 25 + ".5"), "9" * 25 + ".5"),
        ],
    )
    def test_format_amount(self, amount, expected):
        assert format_amount(amount) == expected


class TestParseRecord:
    """Tests for strict record parsing."""

    def test_default_record(self):
        assert parse_record(DEFAULT_JSON) == default_record()
        assert parse_record(canonical_json(default_record())) == default_record()

    def test_missing_key(self):
        obj = json.loads(DEFAULT_JSON)
        del obj["Location"]["City"]
        with pytest.raises(InvalidRecord) as exc_info:
            parse_record(obj)
        assert exc_info.value.report.has(ViolationKind.MISSING_FIELD)

    def test_null_is_wrong_type(self):
        obj = json.loads(DEFAULT_JSON)
        obj["Impact Assessment"]["Deaths"]["Number"] = None
        with pytest.raises(InvalidRecord) as exc_info:
            parse_record(obj)
        report = exc_info.value.report
        assert report.has(ViolationKind.WRONG_TYPE)
        assert not report.has(ViolationKind.MISSING_FIELD)

    def test_extra_key(self):
        obj = json.loads(DEFAULT_JSON)
        obj["Location"]["District"] = "历下区"
        with pytest.raises(InvalidRecord) as exc_info:
            parse_record(obj)
        assert exc_info.value.report.has(ViolationKind.UNKNOWN_KEY)


class TestLoadGold:
    """Tests for the gold JSONL reader."""

    def test_object_and_string_records(self, tmp_path):
        path = tmp_path / "gold.jsonl"
        rows = [gold_row("g1", fraud_record()), {"record_id": "g2", "record": DEFAULT_JSON}]
        path.write_text(
            "\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n", encoding="utf-8"
        )
        gold = load_gold(path)
        assert gold == [("g1", fraud_record()), ("g2", default_record())]

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "gold.jsonl"
        row = json.dumps({"record_id": "g1", "record": DEFAULT_JSON})
        path.write_text(row + "\n" + row + "\n")
        with pytest.raises(DataError, match="duplicate"):
            load_gold(path)

    def test_invalid_record_names_id(self, tmp_path):
        obj = json.loads(DEFAULT_JSON)
        obj["Event Characteristics"]["Type Code"] = ["99"]
        path = tmp_path / "gold.jsonl"
        path.write_text(json.dumps({"record_id": "bad", "record": obj}) + "\n")
        with pytest.raises(InvalidRecord, match="record bad"):
            load_gold(path)
