"""CSV loading with schema checks shared by the plotting scripts."""

from __future__ import annotations

import csv


class SchemaError(Exception):
    """Input CSV does not match the expected analysis-CLI schema."""


def read_rows(path: str, required: tuple[str, ...]) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SchemaError(f"{path} is empty")
            missing = [c for c in required if c not in reader.fieldnames]
            if missing:
                raise SchemaError(f"{path} lacks columns {missing}")
            rows = list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise SchemaError(f"{path} has a header but no data rows")
    return rows


def parse_float(row: dict, column: str, path: str) -> float:
    try:
        return float(row[column])
    except (TypeError, ValueError):
        raise SchemaError(
            f"{path}: column '{column}' has non-numeric value {row[column]!r}"
        ) from None
