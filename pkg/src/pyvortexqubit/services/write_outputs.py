"""
Artifact Writers

Atomic CSV/JSON emission for trajectories, sweep curves, density grids and
run summaries. Every artifact carries the config hash and package version,
and is written to a temporary file in the target directory before being
renamed into place.

Supported Formats
-----------------
- ".csv": `#`-prefixed provenance header, one column per quantity
- ".json": provenance, metadata and columns, keys sorted
"""

# Built-Ins
from collections.abc import Mapping
from dataclasses import asdict, dataclass, is_dataclass
from pathlib import Path
from typing import Any, Protocol
import io
import json
import logging
import os
import tempfile

# Dependencies
import numpy as np

# Local Imports
from pyvortexqubit.custom_types import OutputFormat, PathLike

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


@dataclass(eq=True, frozen=True)
class Provenance:
    """Identity of the run that produced an artifact."""

    config_hash: str
    version: str
    experiment: str

    def header_lines(self) -> list[str]:
        return [
            f"experiment: {self.experiment}",
            f"config_hash: {self.config_hash}",
            f"version: {self.version}",
        ]


def atomic_write_text(path: PathLike, text: str) -> Path:
    """
    Write `text` to `path` via a temporary sibling file and a rename.

    Readers never observe a partially written file.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        "w",
        encoding="utf-8",
        newline="\n",
        dir=target.parent,
        prefix=f".{target.name}.",
        suffix=".tmp",
        delete=False,
    )
    try:
        with handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(handle.name, target)
    except BaseException:
        Path(handle.name).unlink(missing_ok=True)
        raise
    logger.debug("Wrote %s", target)
    return target


def to_jsonable(value: Any) -> Any:
    """Convert numpy, complex and dataclass values to plain JSON types."""
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return value.as_posix()
    return value


def dumps_json(payload: Mapping[str, Any]) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


class TableWriter(Protocol):
    def __call__(
        self,
        path: Path,
        columns: Mapping[str, np.ndarray],
        provenance: Provenance,
        metadata: Mapping[str, Any],
    ) -> Path: ...


def _write_csv_table(
    path: Path,
    columns: Mapping[str, np.ndarray],
    provenance: Provenance,
    metadata: Mapping[str, Any],
) -> Path:
    """Columns as CSV with provenance and metadata in the comment header."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    header = provenance.header_lines()
    header += [
        f"{key}: {json.dumps(to_jsonable(metadata[key]), sort_keys=True)}"
        for key in sorted(metadata)
    ]
    header.append(",".join(names))
    buffer = io.StringIO()
    np.savetxt(
        buffer,
        data,
        fmt=CSV_FLOAT_FORMAT,
        delimiter=",",
        header="\n".join(header),
        comments="# ",
    )
    return atomic_write_text(path.with_suffix(".csv"), buffer.getvalue())


def _write_json_table(
    path: Path,
    columns: Mapping[str, np.ndarray],
    provenance: Provenance,
    metadata: Mapping[str, Any],
) -> Path:
    """Columns as a JSON object alongside provenance and metadata."""
    payload = {
        "provenance": asdict(provenance),
        "metadata": metadata,
        "columns": {
            name: np.asarray(values, dtype=float)
            for name, values in columns.items()
        },
    }
    return atomic_write_text(path.with_suffix(".json"), dumps_json(payload))


TABLE_WRITERS: dict[OutputFormat, TableWriter] = {
    "csv": _write_csv_table,
    "json": _write_json_table,
}


def write_table(
    path: PathLike,
    columns: Mapping[str, np.ndarray],
    fmt: OutputFormat,
    provenance: Provenance,
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    """
    Write equal-length columns in the requested format.

    Parameters
    ----------
    path: PathLike
        Target path; the suffix is replaced to match `fmt`.
    columns: Mapping[str, np.ndarray]
        Column name to 1-D values, all the same length.
    fmt: OutputFormat
        "csv" or "json".
    provenance: Provenance
        Config hash, version and experiment name.
    metadata: Mapping, optional
        Extra run information, JSON-serializable after `to_jsonable`.

    Returns
    -------
    path: Path
        The written file.
    """
    lengths = {len(np.asarray(v)) for v in columns.values()}
    if len(lengths) > 1:
        raise ValueError(f"Columns have different lengths: {sorted(lengths)}")
    return TABLE_WRITERS[fmt](
        Path(path), columns, provenance, dict(metadata or {})
    )


def write_summary(
    path: PathLike,
    summary: Mapping[str, Any],
    provenance: Provenance,
    key: str = "summary",
) -> Path:
    """
    JSON document with provenance, whatever the table format.

    `summary` is stored under `key`.
    """
    payload = {"provenance": asdict(provenance), key: summary}
    return atomic_write_text(Path(path).with_suffix(".json"), dumps_json(payload))
