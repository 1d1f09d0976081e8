"""Prompt templates: loading, rendering and few-shot augmentation."""

import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Sequence, Union

from ..corpus.cleaning import BriefingRecord
from ..errors import ConfigError, DataError
from ..schema.codes import TYPE_CODES, coding_table_rows

logger = logging.getLogger(__name__)

PLACEHOLDER = "{{briefing_text}}"
TEMPLATE_LANGUAGES = ("en", "zh")


class PlaceholderMissing(DataError):
    """The user template does not hold exactly one briefing placeholder."""


class InsufficientExemplars(DataError):
    """More few-shot exemplars requested than supplied."""


class TemplateError(ConfigError):
    """A template file is missing or lacks the coding table."""


@dataclass(frozen=True)
class PromptTemplates:
    """System and user prompt text for one template set."""

    system_template: str
    user_template: str
    lang: str = "en"

    def check(self) -> None:
        """Raise if the templates break their invariants."""
        count = self.user_template.count(PLACEHOLDER)
        if count != 1:
            raise PlaceholderMissing(
                f"user template must contain {PLACEHOLDER} exactly once (found {count})"
            )
        rows = coding_table_rows(self.lang if self.lang in TEMPLATE_LANGUAGES else "en")
        missing = [row for row in rows if row not in self.system_template]
        if missing:
            raise TemplateError(
                f"system template lacks {len(missing)} of {len(TYPE_CODES)} coding table rows"
            )


def _read(source: Any, name: str) -> str:
    target = source / name
    if not target.is_file():
        raise TemplateError(f"template file not found: {target}")
    return target.read_text(encoding="utf-8").rstrip("\n")


def load_templates(source: Union[str, Path] = "en") -> PromptTemplates:
    """
    Load a template set.

    Args:
        source: A shipped language ("en" or "zh") or a directory holding
            <lang>_system.txt and <lang>_user.txt (en files are looked up first)

    Returns:
        Checked PromptTemplates
    """
    if isinstance(source, str) and source in TEMPLATE_LANGUAGES:
        root = resources.files("briefextract.prompts") / "templates"
        lang = source
    else:
        root = Path(source)
        if not root.is_dir():
            raise TemplateError(f"template directory not found: {root}")
        lang = next(
            (code for code in TEMPLATE_LANGUAGES if (root / f"{code}_user.txt").is_file()),
            "en",
        )
    templates = PromptTemplates(
        system_template=_read(root, f"{lang}_system.txt"),
        user_template=_read(root, f"{lang}_user.txt"),
        lang=lang,
    )
    templates.check()
    logger.debug("loaded %s templates from %s", lang, root)
    return templates


def render_text(templates: PromptTemplates, text: str) -> str:
    """Put text into the placeholder slot; every other byte is unchanged."""
    count = templates.user_template.count(PLACEHOLDER)
    if count != 1:
        raise PlaceholderMissing(
            f"user template must contain {PLACEHOLDER} exactly once (found {count})"
        )
    before, after = templates.user_template.split(PLACEHOLDER)
    return before + text + after


def render_user_prompt(templates: PromptTemplates, briefing: BriefingRecord) -> str:
    """Render the user prompt for a kept briefing."""
    if briefing.dropped:
        raise DataError(f"briefing {briefing.record_id} was dropped ({briefing.drop_reason.value})")
    return render_text(templates, briefing.text)


def _exemplar_block(index: int, text: str, gold_json: str) -> str:
    return (
        f"### Example {index} Input\n{text}\n\n"
        f"### Example {index} Output\n```json\n{gold_json}\n```\n\n"
    )


def few_shot_augment(
    user_prompt: str,
    exemplars: Sequence[tuple[str, str]],
    k: int,
) -> str:
    """
    Prepend the first k exemplars as input/output blocks.

    Args:
        user_prompt: Rendered user prompt holding the target briefing
        exemplars: (briefing text, canonical gold JSON) pairs
        k: Number of exemplars to use

    Returns:
        Augmented prompt; the target briefing stays last
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > len(exemplars):
        raise InsufficientExemplars(f"asked for {k} exemplars, only {len(exemplars)} available")
    if k == 0:
        return user_prompt
    blocks = "".join(
        _exemplar_block(i, text, gold) for i, (text, gold) in enumerate(exemplars[:k], start=1)
    )
    return blocks + user_prompt
