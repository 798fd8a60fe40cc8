"""Atomic file emission: CSV and JSON tables, manifest, config hash.

Output files carry the run's config hash in their names, so re-running
with a changed configuration can never silently clobber old results,
and numeric CSV cells use 17 significant digits for reproducible diffs.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path


def fmt17(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def config_hash(effective: dict) -> str:
    blob = json.dumps(effective, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp_", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, obj) -> Path:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return Path(path)


def write_table(base: Path, header: list, rows, fmt: str) -> Path:
    """Write rows either as CSV or as a JSON array of objects."""
    base = Path(base)
    if fmt == "json":
        path = base.with_suffix(".json")
        payload = [dict(zip(header, row)) for row in rows]
        return write_json(path, payload)
    path = base.with_suffix(".csv")
    lines = [",".join(header)]
    lines.extend(",".join(fmt17(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


def write_manifest(out_dir: Path, digest: str, payload: dict) -> Path:
    return write_json(Path(out_dir) / f"manifest_{digest}.json", payload)
