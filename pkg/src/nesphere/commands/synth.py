from pathlib import Path

import typer
import yaml

from ..config import Settings
from ..synth import ClusterSpec, SynthSpec, TransformSpec, write_synth_bundle
from ..utils import Report, display, handle_errors


@handle_errors
def synth_command(
    out: Path = typer.Option(..., "--out", help="Directory for the generated files"),
    spec_file: Path = typer.Option(None, "--spec", help="YAML spec; flags below override it"),
    dim: int = typer.Option(None, "--dim", help="Embedding dimension"),
    members: int = typer.Option(None, "--members", help="Members per entity type"),
    background: int = typer.Option(None, "--background", help="Background words"),
    spread: float = typer.Option(None, "--spread", help="Cluster standard deviation"),
    scale: float = typer.Option(None, "--scale", help="Scale of the planted target map"),
    rotate: bool = typer.Option(None, "--rotate/--no-rotate", help="Rotate the target space"),
    permute: bool = typer.Option(None, "--permute/--no-permute", help="Shuffle target word order"),
    noise: float = typer.Option(None, "--noise", help="Gaussian noise on target vectors"),
    pairs: int = typer.Option(24, "--pairs", help="Seed pairs written for mapping"),
    seed: int = typer.Option(None, "--seed", help="Generator seed"),
):
    """Generate a synthetic benchmark with planted clusters and a known map."""
    settings = Settings.load()
    data = {}
    if spec_file is not None:
        with open(spec_file) as f:
            data = yaml.safe_load(f) or {}
    spec = SynthSpec(**data)

    clusters = {
        t: ClusterSpec(members=members or c.members, spread=spread or c.spread)
        for t, c in spec.clusters.items()
    }
    transform = (spec.transform or TransformSpec()).model_dump() | {
        k: v for k, v in {"scale": scale, "rotate": rotate, "permute": permute}.items() if v is not None
    }
    if seed is None:
        seed = spec.seed if spec_file is not None else settings.seed
    overrides = {"clusters": clusters, "transform": TransformSpec(**transform), "seed": seed}
    for key, value in {"dim": dim, "background": background, "noise_sigma": noise}.items():
        if value is not None:
            overrides[key] = value
    spec = SynthSpec(**(spec.model_dump() | overrides))

    paths = write_synth_bundle(spec, out, seed_count=pairs)
    Report("synth", {"spec": spec, "pairs": pairs}, [spec_file] if spec_file else [], seed=spec.seed).finish(paths["spec"])
    display.print_dim(f"{len(paths)} files written to {out}")
