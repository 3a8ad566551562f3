"""Result documents, CSV/JSON rendering and run manifests."""

from __future__ import annotations

import csv
import io
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from .models import ProtocolReport
from .schemas import validate_document

MANIFEST_SUFFIX = ".manifest.json"


class ReportError(ValueError):
    """Raised when a result or manifest cannot be rendered, written or read back."""


def build_document(
    command: str,
    version: str,
    rows: Sequence[Mapping[str, Any]],
    reports: Iterable[ProtocolReport] = (),
) -> dict[str, Any]:
    doc = {
        "command": command,
        "version": version,
        "rows": [dict(r) for r in rows],
        "reports": [r.as_dict() for r in reports],
    }
    validate_document(doc, "result", ReportError)
    return doc


def render_csv(rows: Sequence[Mapping[str, Any]]) -> str:
    """Rows as CSV; the header is the union of row keys in first-seen order."""
    header: list[str] = []
    for row in rows:
        header.extend(k for k in row if k not in header)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, restval="", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_value(v) for k, v in row.items()})
    return buf.getvalue()


def _csv_value(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def render_json(doc: Mapping[str, Any]) -> str:
    try:
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    except ValueError as exc:
        raise ReportError(f"Result contains a non-finite number: {exc}") from exc


def render(doc: Mapping[str, Any], fmt: str) -> str:
    if fmt == "json":
        return render_json(doc)
    if fmt == "csv":
        return render_csv(doc["rows"])
    raise ReportError(f"Unsupported output format '{fmt}'.")


def write_result(doc: Mapping[str, Any], path: str | Path, fmt: str) -> Path:
    out = Path(path).expanduser().resolve()
    text = render(doc, fmt)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise ReportError(f"Failed to write result file {out}: {exc}") from exc
    return out


def manifest_path(result_path: str | Path) -> Path:
    result = Path(result_path)
    return result.with_name(result.name + MANIFEST_SUFFIX)


def write_manifest(
    result_path: str | Path,
    *,
    command: str,
    version: str,
    config: Mapping[str, Any],
    fmt: str,
    created_at: Optional[datetime] = None,
) -> Path:
    result = Path(result_path).expanduser().resolve()
    stamp = (created_at or datetime.now(timezone.utc)).isoformat(timespec="seconds")
    manifest = {
        "command": command,
        "version": version,
        "seed": int(config["seed"]),
        "threads": int(config["threads"]),
        "config": dict(config),
        "result_file": result.name,
        "format": fmt,
        "created_at": stamp,
    }
    validate_document(manifest, "manifest", ReportError)
    out = manifest_path(result)
    try:
        out.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"Failed to write manifest {out}: {exc}") from exc
    return out


def load_result(path: str | Path) -> Any:
    """Read a result file back: a validated document for JSON, row dicts for CSV."""
    src = Path(path).expanduser().resolve()
    if not src.exists():
        raise ReportError(f"Result file not found: {src}")
    text = src.read_text(encoding="utf-8")
    if src.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ReportError(f"Failed to parse result JSON: {src}") from exc
        validate_document(doc, "result", ReportError)
        return doc
    return list(csv.DictReader(io.StringIO(text)))


def load_manifest(path: str | Path) -> dict[str, Any]:
    src = Path(path).expanduser().resolve()
    try:
        doc = json.loads(src.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportError(f"Failed to read manifest: {src}") from exc
    validate_document(doc, "manifest", ReportError)
    return doc
