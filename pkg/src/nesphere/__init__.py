import logging
import os
import sys

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler

LOG_LEVEL_ENV = "NESPHERE_LOG_LEVEL"


def setup_logging() -> None:
    level = logging.getLevelNamesMapping().get(os.environ.get(LOG_LEVEL_ENV, "").upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def main() -> None:
    # .env may carry NESPHERE_CONFIG, so load it before the settings path is read
    load_dotenv()
    setup_logging()
    # Import the Typer app lazily to avoid side effects at package import time
    from . import config
    from .app import cli_dispatch

    config.config_path = config.default_config_path()
    sys.exit(cli_dispatch(sys.argv[1:]))
