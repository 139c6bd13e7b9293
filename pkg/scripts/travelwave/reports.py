"""
Artifact writer for CLI runs.

Files are written to a temporary sibling first, verified, then moved into
place. Output is deterministic: CSV numbers use 17 significant digits and JSON
keys are sorted, with no timestamps.
"""

import csv
import dataclasses
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np
from pydantic import BaseModel

from .errors import ConfigError

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """Recursively convert dataclasses, pydantic models, numpy values and enums to JSON types."""
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, Path):
        return str(value)
    return value


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


class ReportWriter:
    """Writes CSV and JSON artifacts under one output directory."""

    def __init__(self, base_dir):
        """
        Args:
            base_dir: Output directory; created if missing

        Raises:
            ConfigError: if the directory cannot be written
        """
        self.base_dir = Path(base_dir)
        self.written: List[Path] = []
        self._ensure_directory()

    def _ensure_directory(self):
        """Ensure the output directory exists and is writable."""
        try:
            self.base_dir.mkdir(parents=True, exist_ok=True)
            probe = self.base_dir / ".write_test"
            probe.write_text("test")
            probe.unlink()
        except OSError as e:
            raise ConfigError(f"Cannot write to output directory {self.base_dir}: {e}") from e
        logger.debug(f"Output directory ready: {self.base_dir}")

    def _commit(self, temp: Path, target: Path) -> Path:
        if not temp.exists() or temp.stat().st_size == 0:
            raise OSError(f"Temporary file missing or empty: {temp}")
        temp.replace(target)
        self.written.append(target)
        logger.info(f"Wrote {target} ({target.stat().st_size:,} bytes)")
        return target

    def write_json(self, name: str, data: Any) -> Path:
        """Write `data` as sorted, indented JSON and read it back once to verify."""
        target = self.base_dir / name
        temp = target.with_suffix(target.suffix + ".tmp")
        payload = to_jsonable(data)
        try:
            with open(temp, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2, sort_keys=True)
                f.write("\n")
            with open(temp, "r", encoding="utf-8") as f:
                json.load(f)
            return self._commit(temp, target)
        except (OSError, TypeError, ValueError):
            if temp.exists():
                temp.unlink()
            raise

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """Write rows under `header`; floats use 17 significant digits."""
        target = self.base_dir / name
        temp = target.with_suffix(target.suffix + ".tmp")
        try:
            with open(temp, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([_cell(v) for v in row])
            return self._commit(temp, target)
        except OSError:
            if temp.exists():
                temp.unlink()
            raise

    def write_columns(self, name: str, columns: Dict[str, Sequence[Any]]) -> Path:
        """Write equal-length columns side by side."""
        lengths = {len(v) for v in columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"column lengths differ: {sorted(lengths)}")
        return self.write_csv(name, list(columns), zip(*columns.values()))
