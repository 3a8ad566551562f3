"""JSON Schemas shipped with the package, plus the shared validation helper."""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any


def schema_path(name: str) -> Path:
    """Return the path of a bundled schema, e.g. ``schema_path("network")``."""
    return Path(__file__).parent / f"{name}.schema.json"


@lru_cache(maxsize=None)
def _load_schema(name: str) -> dict[str, Any]:
    path = schema_path(name)
    if not path.exists():
        raise FileNotFoundError(f"Schema file not found: {path}")
    return json.loads(path.read_text(encoding="utf-8"))


def validate_document(raw: Any, name: str, error_cls: type[ValueError]) -> None:
    """Validate `raw` against the bundled schema `name`, raising `error_cls` on failure."""
    try:
        from jsonschema import Draft202012Validator
    except Exception as exc:
        raise error_cls(
            "jsonschema package is required for schema validation. "
            "Install dependencies from pyproject."
        ) from exc

    validator = Draft202012Validator(_load_schema(name))
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if not errors:
        return

    first = errors[0]
    where = ".".join(str(x) for x in first.absolute_path) or "<root>"
    raise error_cls(f"Schema validation failed at {where}: {first.message}")
