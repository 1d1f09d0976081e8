"""Case-type coding table (11 fixed categories)."""

from dataclasses import dataclass

from ..errors import DataError


@dataclass(frozen=True)
class TypeCode:
    """One row of the case-type coding table."""

    code: str
    label: str
    label_zh: str


TYPE_CODES: dict[str, TypeCode] = {
    row.code: row
    for row in (
        TypeCode("01", "Endangering national security", "危害国家安全"),
        TypeCode("02", "Endangering public safety", "危害公共安全"),
        TypeCode("03", "Economic and financial crimes", "破坏社会主义市场经济秩序"),
        TypeCode("04", "Infringement of personal rights", "侵犯公民人身权利"),
        TypeCode("05", "Infringement of property", "侵犯财产"),
        TypeCode("06", "Obstructing social management", "妨害社会管理秩序"),
        TypeCode("07", "Endangering national defense interests", "危害国防利益"),
        TypeCode("08", "Bribery and corruption", "贪污贿赂"),
        TypeCode("09", "Dereliction of duty", "渎职"),
        TypeCode("10", "Crimes committed by military personnel", "军人违反职责"),
        TypeCode("11", "Suicide", "自杀"),
    )
}


class UnknownTypeCode(DataError):
    """A code outside 01..11."""

    def __init__(self, code: object):
        super().__init__(f"unknown type code: {code!r}")
        self.code = code


def is_valid_code(code: object) -> bool:
    return isinstance(code, str) and code in TYPE_CODES


def code_label(code: str, lang: str = "en") -> str:
    """
    Look up the fixed label for a case-type code.

    Args:
        code: Two-digit code "01".."11"
        lang: "en" or "zh"

    Returns:
        The label text
    """
    if not is_valid_code(code):
        raise UnknownTypeCode(code)
    row = TYPE_CODES[code]
    return row.label_zh if lang == "zh" else row.label


def coding_table_rows(lang: str = "en") -> list[str]:
    """Render the table as "| code | label |" markdown rows, in code order."""
    return [f"| {code} | {code_label(code, lang)} |" for code in TYPE_CODES]
