"""
Reading and writing the CSV and JSON artifacts of the command-line tool.

CSV files start with a ``# manifest: {...}`` comment, then a header
``x1..xn`` (plus ``e1..e(n-1)`` for embeddings) and one row per sample with
17 significant digits. JSON reports have the shape {manifest, results, summary}.
"""
import csv
import io
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from src import __version__
from src.exceptions import ArtifactError

logger = logging.getLogger(__name__)

MANIFEST_PREFIX = "# manifest: "
NUMBER_FORMAT = ".17g"


@dataclass
class RunManifest:
    """What produced an artifact; everything but the timestamp is reproducible."""

    command: str
    flags: dict[str, Any]
    seed: int | None = None
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "flags": self.flags,
            "seed": self.seed,
            "version": self.version,
            "timestamp": self.timestamp,
        }


@dataclass
class SampleTable:
    values: np.ndarray
    header: list[str]
    manifest: dict | None = None


def format_number(value: float) -> str:
    return format(float(value), NUMBER_FORMAT)


def sample_header(n: int, embedding: int = 0) -> list[str]:
    return [f"x{k}" for k in range(1, n + 1)] + [f"e{k}" for k in range(1, embedding + 1)]


def write_samples_csv(path: str | Path, values: np.ndarray, manifest: RunManifest, embedding: np.ndarray | None = None) -> None:
    values = np.asarray(values, dtype=float)
    n = values.shape[1]
    extra = 0 if embedding is None else embedding.shape[1]
    buffer = io.StringIO()
    buffer.write(MANIFEST_PREFIX + json.dumps(manifest.to_dict(), sort_keys=True) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(sample_header(n, extra))
    for k, row in enumerate(values):
        cells = [format_number(v) for v in row]
        if embedding is not None:
            cells += [format_number(v) for v in embedding[k]]
        writer.writerow(cells)
    _write_text(path, buffer.getvalue())
    logger.info(f"Wrote {len(values)} rows to {path}")


def read_samples_csv(path: str | Path) -> SampleTable:
    """
    Parse a sample CSV. Only the ``x`` columns are returned as values.

    Raises:
        ArtifactError: unreadable file, missing header, or a malformed row
            (the message carries the 1-based line number).
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise ArtifactError(f"cannot read {path}: {e}") from e

    manifest = None
    header: list[str] | None = None
    width = 0
    rows: list[list[float]] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            if line.startswith(MANIFEST_PREFIX) and manifest is None:
                try:
                    manifest = json.loads(line[len(MANIFEST_PREFIX):])
                except json.JSONDecodeError as e:
                    raise ArtifactError(f"bad manifest: {e}", line=line_number) from e
            continue
        if not line.strip():
            continue
        cells = next(csv.reader([line]))
        if header is None:
            header = [c.strip() for c in cells]
            width = sum(1 for c in header if c.startswith("x"))
            if width < 2 or header[:width] != sample_header(width):
                raise ArtifactError(f"expected a header x1,...,xn, got {line!r}", line=line_number)
            continue
        if len(cells) != len(header):
            raise ArtifactError(f"expected {len(header)} fields, got {len(cells)}", line=line_number)
        try:
            rows.append([float(c) for c in cells[:width]])
        except ValueError as e:
            raise ArtifactError(f"not a number: {e}", line=line_number) from e

    if header is None:
        raise ArtifactError(f"{path} is empty: no header row")
    values = np.asarray(rows, dtype=float).reshape(len(rows), width)
    logger.debug(f"Read {len(rows)} rows of width {width} from {path}")
    return SampleTable(values=values, header=header, manifest=manifest)


def write_json_report(path: str | Path, manifest: RunManifest, results: Sequence[Any], summary: dict) -> dict:
    report = {"manifest": manifest.to_dict(), "results": list(results), "summary": summary}
    _write_text(path, json.dumps(report, indent=2) + "\n")
    logger.info(f"Wrote report to {path}")
    return report


def read_json_report(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ArtifactError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ArtifactError(f"malformed JSON: {e.msg}", line=e.lineno) from e


def _write_text(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        logger.error(f"Cannot write {path}: {e}")
        raise ArtifactError(f"cannot write {path}: {e}") from e
