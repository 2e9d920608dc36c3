"""
JSON and CSV result files.

Every file written by a run is tied to its configuration through a short
hash of the canonical run configuration: JSON payloads carry it under
`config_hash`, CSV files start with a `# config_hash:` comment line.
"""

import csv
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

# keys that do not change any computed value
UNHASHED_KEYS = ("out", "log_level", "workers")


def to_plain(value: Any) -> Any:
    """Convert results to JSON-compatible values; non-finite floats become None."""
    if hasattr(value, "to_json"):
        return to_plain(value.to_json())
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (complex, np.complexfloating)):
        return [to_plain(value.real), to_plain(value.imag)]
    return value


def config_hash(config: Dict[str, Any]) -> str:
    """First 16 hex digits of the sha256 of the canonical configuration JSON."""
    relevant = {k: v for k, v in config.items() if k not in UNHASHED_KEYS}
    canonical = json.dumps(to_plain(relevant), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


class ResultStore:
    """Writes the JSON and CSV outputs of one run into an output directory."""

    def __init__(self, out_dir: str, config: Dict[str, Any]):
        """
        Initialize store.

        Args:
            out_dir: Output directory (created on first write)
            config: Run configuration, hashed into every file
        """
        self.out_dir = Path(out_dir)
        self.config = config
        self.hash = config_hash(config)

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        """
        Write a JSON file with sorted keys and the config hash.

        Args:
            name: File name inside the output directory
            payload: Result dictionary (objects with to_json() are converted)

        Returns:
            Path of the written file
        """
        data = to_plain(payload)
        data["config_hash"] = self.hash
        path = self._path(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, sort_keys=True, indent=2)
            f.write("\n")
        logger.info(f"wrote {path}")
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """
        Write a CSV file: comment line with the config hash, header row, data rows.

        Floats are written with repr precision so reruns are bit-identical.

        Returns:
            Path of the written file
        """
        path = self._path(name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(f"# config_hash: {self.hash}\n")
            writer = csv.writer(f)
            writer.writerow(list(header))
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        logger.info(f"wrote {path}")
        return path

    @staticmethod
    def read_csv(path: str):
        """Return (hash, header, rows) of a CSV written by write_csv; rows stay strings."""
        with open(path, encoding="utf-8", newline="") as f:
            first = f.readline().strip()
            digest = first.split(":", 1)[1].strip() if first.startswith("# config_hash:") else None
            reader = csv.reader(f)
            header = next(reader)
            rows = [row for row in reader]
        return digest, header, rows
