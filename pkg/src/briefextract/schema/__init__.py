"""Extraction record schema, case-type codes, validation and canonical JSON."""

from .codes import TYPE_CODES, TypeCode, UnknownTypeCode, code_label
from .record import (
    BOOLEAN_FIELDS,
    FIELD_PATHS,
    AmountClaim,
    CountedClaim,
    EventCharacteristics,
    ExtractionRecord,
    ImpactAssessment,
    InvalidRecord,
    Issue,
    LocationInfo,
    ValidationReport,
    ViolationKind,
    canonical_json,
    default_record,
    get_field,
    load_gold,
    parse_record,
    validate,
)

__all__ = [
    "TYPE_CODES",
    "TypeCode",
    "UnknownTypeCode",
    "code_label",
    "BOOLEAN_FIELDS",
    "FIELD_PATHS",
    "AmountClaim",
    "CountedClaim",
    "EventCharacteristics",
    "ExtractionRecord",
    "ImpactAssessment",
    "InvalidRecord",
    "Issue",
    "LocationInfo",
    "ValidationReport",
    "ViolationKind",
    "canonical_json",
    "default_record",
    "get_field",
    "load_gold",
    "parse_record",
    "validate",
]
