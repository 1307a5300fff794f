import typer
import yaml
from rich import print as rprint

from .. import config
from ..config import Settings
from ..utils import handle_errors

app = typer.Typer(name="config", help="Inspect or create the settings file. (show/init)")


@app.command("show")
@handle_errors
def show_settings():
    """Print the resolved settings as YAML"""
    settings = Settings.load()
    typer.echo(f"# {config.config_path}")
    typer.echo(yaml.safe_dump(settings.model_dump(mode="json"), sort_keys=False), nl=False)


@app.command("init")
@handle_errors
def init_settings(force: bool = typer.Option(False, "--force", help="Overwrite without asking")):
    """Write the default settings file"""
    path = config.config_path
    confirm = True
    if path.exists() and not force:
        confirm = typer.confirm(f"{path} already exists. Overwrite it?")
    if confirm:
        Settings().save(path)
        rprint(f"Wrote default settings to {path}")
