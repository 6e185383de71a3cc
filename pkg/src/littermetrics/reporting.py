"""Run manifests and deterministic report writers.

Every command records a manifest (tool version, command line, resolved
configuration, sha256 of each input file, timestamp) and every report
embeds the manifest digest. The digest is computed over the canonical
manifest WITHOUT the timestamp, so reports are byte-identical across
reruns on identical inputs. The timestamp itself honours the standard
``SOURCE_DATE_EPOCH`` environment variable for fully reproducible runs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import __version__
from .ingest import SurveyConfig

MANIFEST_FILENAME = "run_manifest.json"


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _utc_timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = (
        datetime.fromtimestamp(int(epoch), tz=timezone.utc)
        if epoch
        else datetime.now(tz=timezone.utc)
    )
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class RunManifest:
    tool_version: str
    command: tuple[str, ...]
    config: dict
    input_digests: dict[str, str]
    timestamp: str

    @property
    def digest(self) -> str:
        """sha256 over the canonical manifest, timestamp excluded."""
        canonical = json.dumps(
            {
                "tool_version": self.tool_version,
                "command": list(self.command),
                "config": self.config,
                "input_digests": self.input_digests,
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(canonical.encode()).hexdigest()


def build_manifest(
    command: Sequence[str],
    config: SurveyConfig | Mapping | None,
    inputs: Mapping[str, str | Path],
) -> RunManifest:
    if config is None:
        config_dict: dict = {}
    elif isinstance(config, SurveyConfig):
        config_dict = asdict(config)
    else:
        config_dict = dict(config)
    return RunManifest(
        tool_version=__version__,
        command=tuple(command),
        config=config_dict,
        input_digests={name: file_digest(path) for name, path in sorted(inputs.items())},
        timestamp=_utc_timestamp(),
    )


def write_manifest(manifest: RunManifest, out_dir: str | Path) -> Path:
    path = Path(out_dir) / MANIFEST_FILENAME
    payload = {
        "manifest_digest": manifest.digest,
        "tool_version": manifest.tool_version,
        "command": list(manifest.command),
        "config": manifest.config,
        "input_digests": manifest.input_digests,
        "timestamp": manifest.timestamp,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def write_csv_report(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence],
    manifest_digest: str,
) -> Path:
    """CSV with a leading ``# manifest_digest=...`` comment line, then the header."""
    buffer = io.StringIO()
    buffer.write(f"# manifest_digest={manifest_digest}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    out = Path(path)
    out.write_text(buffer.getvalue())
    return out


def write_json_report(path: str | Path, payload: dict, manifest_digest: str) -> Path:
    document = {"manifest_digest": manifest_digest}
    document.update(payload)
    out = Path(path)
    out.write_text(json.dumps(document, indent=2) + "\n")
    return out


def read_csv_report(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Read a report CSV back, skipping ``#`` comment lines."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        return [], []
    return rows[0], rows[1:]
