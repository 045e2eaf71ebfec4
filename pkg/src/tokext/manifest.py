"""Run manifests: a sidecar record of what produced each output file.

The digest hashes the command, its semantic configuration, and the content
of every input file, so identical digests imply bit-identical outputs. The
manifest itself (which carries a timestamp) is written next to the output as
<output>.manifest.json and is not part of the deterministic output set.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

TOOL_VERSION = "0.1.0"


@dataclass(frozen=True)
class RunManifest:
    command: str
    inputs: dict[str, str]
    config: dict
    digest: str
    tool_version: str
    timestamp: str


def _file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(command: str, inputs: dict[str, str], config: dict) -> RunManifest:
    input_digests = {name: _file_sha256(path) for name, path in sorted(inputs.items())}
    canonical = json.dumps(
        {"command": command, "config": config, "inputs": input_digests},
        sort_keys=True,
        ensure_ascii=False,
    )
    return RunManifest(
        command=command,
        inputs=dict(inputs),
        config=dict(config),
        digest=hashlib.sha256(canonical.encode("utf-8")).hexdigest(),
        tool_version=TOOL_VERSION,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )


def write_manifest(manifest: RunManifest, output_path: str | Path) -> Path:
    path = Path(str(output_path) + ".manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "command": manifest.command,
                "inputs": manifest.inputs,
                "config": manifest.config,
                "digest": manifest.digest,
                "tool_version": manifest.tool_version,
                "timestamp": manifest.timestamp,
            },
            fh,
            ensure_ascii=False,
            indent=2,
        )
        fh.write("\n")
    return path
