"""
Run manifest sidecars for written reports.
Writes JSON and YAML sidecars next to outputs so that every report can be
traced back to the command, arguments, seed and input that produced it.
"""
from __future__ import annotations

import getpass
import hashlib
import json
import os
import platform
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

MANIFEST_VERSION = "1"
TOOL_VERSION = "suremap/0.1"


@dataclass
class InputInfo:
    file_path: str
    file_sha256: str


@dataclass
class OutputInfo:
    file_path: str
    file_size: int
    file_sha256: str


@dataclass
class RunManifest:
    manifest_version: str
    run_id: str
    created_on: str
    created_by: str
    host: str
    tool_version: str
    command: str
    arguments: Dict[str, Any]
    seed: Optional[int]
    output: OutputInfo
    inputs: List[InputInfo] = field(default_factory=list)


def sha256_file(path: Path, chunk_size: int = 1 << 20) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        while chunk := f.read(chunk_size):
            h.update(chunk)
    return h.hexdigest()


def get_user_host() -> Tuple[str, str]:
    try:
        user = getpass.getuser()
    except (KeyError, OSError):
        user = os.environ.get("USERNAME") or "unknown"
    return user, platform.node() or "unknown-host"


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _uuid7_str() -> str:
    # uuid.uuid7 exists from Python 3.14
    try:
        return str(uuid.uuid7())  # type: ignore[attr-defined]
    except AttributeError:
        return str(uuid.uuid4())


def sidecar_paths(output_path: Path) -> Tuple[Path, Path]:
    base = str(output_path) + ".run"
    return Path(base + ".json"), Path(base + ".yaml")


def _plain(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def create_for_run(
    output_path: Path,
    command: str,
    arguments: Dict[str, Any],
    seed: Optional[int] = None,
    input_paths: Optional[List[Path]] = None,
) -> RunManifest:
    user, host = get_user_host()
    out = Path(output_path)
    return RunManifest(
        manifest_version=MANIFEST_VERSION,
        run_id=_uuid7_str(),
        created_on=_now_iso(),
        created_by=user,
        host=host,
        tool_version=TOOL_VERSION,
        command=command,
        arguments={k: _plain(v) for k, v in sorted(arguments.items())},
        seed=seed,
        output=OutputInfo(
            file_path=str(out),
            file_size=int(out.stat().st_size),
            file_sha256=sha256_file(out),
        ),
        inputs=[InputInfo(str(p), sha256_file(Path(p))) for p in (input_paths or [])],
    )


def write_sidecars(manifest: RunManifest, output_path: Path, write_yaml: bool = True) -> List[Path]:
    json_path, yaml_path = sidecar_paths(Path(output_path))
    with open(json_path, 'w', encoding='utf-8') as f:
        json.dump(asdict(manifest), f, ensure_ascii=False, indent=2)
    written = [json_path]
    if write_yaml:
        with open(yaml_path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(json.loads(json.dumps(asdict(manifest))), f, sort_keys=False)
        written.append(yaml_path)
    return written
