import logging
from pathlib import Path

import click
import typer

from . import config
from .commands import (
    candidates_command,
    config_app,
    emd_fit_command,
    eval_command,
    features_command,
    fit_command,
    map_command,
    neighbors_command,
    overlap_command,
    project2d_command,
    scan_dims_command,
    synth_command,
)

app = typer.Typer(
    name="nesphere",
    help="Model named entities as hyperspheres in word-embedding spaces.",
    no_args_is_help=True,
    pretty_exceptions_enable=False,
)


@app.callback()
def main_options(
    verbose: bool = typer.Option(False, "-v", "--verbose", help="Log progress (INFO)"),
    debug: bool = typer.Option(False, "--debug", help="Log solver internals (DEBUG)"),
    config_file: Path = typer.Option(None, "--config", help="Settings file to use instead of the default"),
):
    """Fit, map and evaluate NE hyperspheres."""
    if debug:
        logging.getLogger().setLevel(logging.DEBUG)
    elif verbose:
        logging.getLogger().setLevel(logging.INFO)
    if config_file is not None:
        config.config_path = config_file


app.add_typer(config_app, name="config")

COMMANDS = {
    "fit": fit_command,
    "eval": eval_command,
    "scan-dims": scan_dims_command,
    "map": map_command,
    "emd-fit": emd_fit_command,
    "candidates": candidates_command,
    "overlap": overlap_command,
    "features": features_command,
    "neighbors": neighbors_command,
    "project2d": project2d_command,
    "synth": synth_command,
}

for command_name, command in COMMANDS.items():
    app.command(name=command_name)(command)


def cli_dispatch(argv: list[str] | None = None) -> int:
    """Run one subcommand and return its exit code.

    Usage errors print the usage text to stderr and return 1.
    """
    try:
        result = app(args=argv, prog_name="nesphere", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 1
    except click.Abort:
        return 1
    return result if isinstance(result, int) else 0
