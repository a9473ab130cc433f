"""Writers for JSON reports and CSV tables."""

import csv
import logging
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, TextIO, Union

from pydantic import BaseModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _prepare(path: PathLike) -> Path:
    target = Path(path)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    return target


def to_json(report: BaseModel) -> str:
    return report.model_dump_json(indent=2) + "\n"


def write_json(report: BaseModel, path: PathLike) -> Path:
    """Write one report as indented JSON."""
    target = _prepare(path)
    target.write_text(to_json(report), encoding="utf-8")
    logger.debug(f"Wrote {type(report).__name__} to {target}")
    return target


def write_jsonl(reports: Iterable[BaseModel], path: PathLike) -> Path:
    """One compact JSON document per line, in the given order."""
    target = _prepare(path)
    count = 0
    with open(target, "w", encoding="utf-8") as f:
        for report in reports:
            f.write(report.model_dump_json() + "\n")
            count += 1
    logger.debug(f"Wrote {count} lines to {target}")
    return target


def write_csv_rows(
    stream: TextIO, headers: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(list(headers))
    for row in rows:
        writer.writerow([_cell(value) for value in row])


def write_csv(
    path: PathLike,
    headers: Sequence[str],
    rows: Iterable[Sequence[Any]],
    stream: Optional[TextIO] = None,
) -> Optional[Path]:
    """Write a header row and data rows; ``stream`` overrides ``path`` (e.g. stdout)."""
    if stream is not None:
        write_csv_rows(stream, headers, rows)
        return None
    target = _prepare(path)
    with open(target, "w", newline="", encoding="utf-8") as f:
        write_csv_rows(f, headers, rows)
    logger.debug(f"Wrote CSV table to {target}")
    return target


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return value.value
    return value
