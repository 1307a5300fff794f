"""Run manifests: what produced a report, and from which inputs."""

from __future__ import annotations

import hashlib
import json
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Iterable

import yaml
from pydantic import BaseModel


def tool_version() -> str:
    try:
        return version("nesphere")
    except PackageNotFoundError:
        return "0.0.0"


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class RunManifest(BaseModel):
    command: str
    parameters: dict[str, Any] = {}
    inputs: dict[str, str] = {}
    version: str = ""
    seed: int | None = None

    @classmethod
    def build(
        cls,
        command: str,
        parameters: dict[str, Any],
        inputs: Iterable[str | Path],
        seed: int | None = None,
    ) -> "RunManifest":
        return cls(
            command=command,
            parameters={k: _plain(v) for k, v in sorted(parameters.items())},
            inputs={str(p): file_digest(p) for p in sorted(set(map(str, inputs)))},
            version=tool_version(),
            seed=seed,
        )

    @property
    def digest(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def header(self) -> str:
        return f"# nesphere {self.command} manifest={self.digest}"

    def write(self, output: str | Path) -> Path:
        """Write ``<output>.manifest.yaml`` next to an output file."""
        path = Path(f"{output}.manifest.yaml")
        data = self.model_dump(mode="json") | {"digest": self.digest}
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(data, f, sort_keys=False)
        return path


def _plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value
