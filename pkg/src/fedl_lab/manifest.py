"""Provenance records for command-line runs.

Every run writes exactly one ``manifest.json`` in its output directory.
The manifest captures the command name, the config that drove it, content
hashes of every input and output file, and the wall time, so that a rerun
can be checked for byte-level reproduction by comparing digests.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

MANIFEST_NAME = "manifest.json"

_CHUNK = 1 << 20


def sha256_file(path: str | Path) -> str:
    """Hex digest of a file's bytes, streamed in 1 MiB chunks."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while True:
            block = fh.read(_CHUNK)
            if not block:
                break
            h.update(block)
    return h.hexdigest()


def hash_files(paths: list[str | Path], root: str | Path | None = None) -> dict[str, str]:
    """Map each file to its content digest.

    Keys are paths relative to root when given, else the plain string form.
    """
    out: dict[str, str] = {}
    for p in paths:
        key = str(Path(p).relative_to(root)) if root is not None else str(p)
        out[key] = sha256_file(p)
    return out


def combined_digest(digests: Mapping[str, str]) -> str:
    # hash of the sorted name:digest lines, so ordering never matters
    h = hashlib.sha256()
    for name in sorted(digests):
        h.update(f"{name}:{digests[name]}\n".encode())
    return h.hexdigest()


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write text via a temp file in the same directory plus os.replace."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path: str | Path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class RunManifest:
    """What a single CLI run consumed and produced."""

    command: str
    config_path: str | None
    seed: int | None
    inputs: dict[str, str]
    outputs: dict[str, str]
    wall_time_s: float

    @property
    def inputs_digest(self) -> str:
        return combined_digest(self.inputs)

    @property
    def outputs_digest(self) -> str:
        return combined_digest(self.outputs)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["inputs_digest"] = self.inputs_digest
        d["outputs_digest"] = self.outputs_digest
        return d


def write_run_manifest(
    out_dir: str | Path,
    manifest: RunManifest,
    extra: Mapping[str, object] | None = None,
) -> Path:
    """Write manifest.json, merging any extra sections (for example the
    dataset record) into the same document.  The manifest never hashes
    itself, so reruns of a deterministic command produce identical
    outputs_digest values even though wall time differs.
    """
    doc = dict(extra) if extra else {}
    doc["run"] = manifest.to_dict()
    path = Path(out_dir) / MANIFEST_NAME
    atomic_write_json(path, doc)
    return path


def read_manifest(out_dir: str | Path) -> dict:
    with open(Path(out_dir) / MANIFEST_NAME) as fh:
        return json.load(fh)
