import logging
from functools import wraps
from pathlib import Path
from typing import Any, Iterable

import typer
import yaml
from pydantic import ValidationError
from rich.console import Console

from .display import ReportDisplay
from .errors import NesphereError, UsageError
from .manifest import RunManifest

logger = logging.getLogger(__name__)

console = Console(stderr=True)
display = ReportDisplay(console)


def handle_errors(f):
    """Map library exceptions onto CLI exit codes."""

    @wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except NesphereError as e:
            display.print_error(str(e))
            raise typer.Exit(e.exit_code)
        except ValidationError as e:
            display.print_error(f"Invalid parameters: {e}")
            raise typer.Exit(2)
        except yaml.YAMLError as e:
            display.print_error(f"Invalid YAML: {e}")
            raise typer.Exit(1)
        except OSError as e:
            display.print_error(str(e))
            raise typer.Exit(2)

    return wrapper


class Report:
    """One machine-readable output plus the manifest describing its run."""

    def __init__(
        self,
        command: str,
        parameters: dict[str, Any],
        inputs: Iterable[str | Path],
        seed: int | None = None,
    ):
        self.manifest = RunManifest.build(command, parameters, inputs, seed=seed)

    @property
    def header(self) -> str:
        return self.manifest.header()

    def emit(self, text: str, out: Path | None):
        """Write ``text`` (already headed) to ``out`` or stdout."""
        if out is None:
            typer.echo(text, nl=False)
            return
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        self.finish(out)

    def finish(self, out: Path):
        """Record the manifest next to a file already written."""
        path = self.manifest.write(out)
        logger.info("Wrote %s (manifest %s)", out, path)


def tsv(header: str, columns: str, rows: Iterable[str]) -> str:
    lines = [header, columns, *rows]
    return "\n".join(lines) + "\n"


def read_tokens(tokens: list[str] | None, tokens_file: Path | None) -> list[str]:
    collected = list(tokens or [])
    if tokens_file is not None:
        for line in tokens_file.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                collected.append(line)
    return collected


def count_option(flag: str, value: int | None, default: int) -> int:
    """A count flag, or its settings default when the flag is absent."""
    if value is None:
        return default
    if value < 1:
        raise UsageError(f"{flag} must be at least 1, got {value}")
    return value
