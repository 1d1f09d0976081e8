"""API key lookup and secret redaction.

Keys are only ever read from the environment variable named in the
endpoint config. Nothing here writes a key to disk.
"""

import os
from typing import Optional


def resolve_api_key(env_var_name: str) -> Optional[str]:
    """Load the API key from the named environment variable.

    Returns:
        The key string, or None if the variable is unset or blank.
    """
    if not env_var_name:
        return None
    key = os.environ.get(env_var_name, "").strip()
    return key or None


def mask_key(key: str) -> str:
    """Mask an API key for safe display (show first 4 and last 4 chars)."""
    if len(key) <= 4:
        return "***"
    if len(key) <= 12:
        return key[:2] + "*" * (len(key) - 2)
    return key[:4] + "*" * (len(key) - 8) + key[-4:]


def redact(text: str, key: Optional[str]) -> str:
    """Replace every occurrence of the key in text with its masked form."""
    if not key or not text:
        return text
    return text.replace(key, mask_key(key))
