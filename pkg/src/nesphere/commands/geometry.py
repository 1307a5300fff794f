from pathlib import Path

import typer

from ..config import Settings
from ..dictionary import NeType
from ..embeddings import load_embeddings
from ..errors import UsageError
from ..features import FEATURE_HEADER, compute_features, export_features
from ..hypersphere import load_sphere
from ..utils import Report, display, handle_errors
from ..volume import OVERLAP_HEADER, Sampler, analytic_overlap, mc_overlap


@handle_errors
def overlap_command(
    sphere_file: Path = typer.Option(..., "--sphere", help="True target-space sphere"),
    mapped_file: Path = typer.Option(..., "--mapped", help="Mapped sphere to evaluate"),
    samples: int = typer.Option(None, "--samples", help="Monte Carlo sample count"),
    seed: int = typer.Option(None, "--seed", help="Sampling seed"),
    sampler: Sampler = typer.Option(None, "--sampler", help="Where samples are drawn"),
    analytic: bool = typer.Option(False, "--analytic", help="Use the closed form instead of sampling"),
    out: Path = typer.Option(None, "--out", help="Overlap TSV (stdout if omitted)"),
):
    """Volume precision, recall and F1 of a mapped sphere against the target."""
    settings = Settings.load()
    mc = settings.mc.model_copy(
        update={
            k: v
            for k, v in {"samples": samples, "seed": seed, "sampler": sampler}.items()
            if v is not None
        }
    )
    target, mapped = load_sphere(sphere_file), load_sphere(mapped_file)
    report = analytic_overlap(target, mapped) if analytic else mc_overlap(target, mapped, mc)

    result = Report("overlap", {"mc": mc, "analytic": analytic}, [sphere_file, mapped_file], seed=mc.seed)
    result.emit(f"{result.header}\n{OVERLAP_HEADER}\n{report.to_row()}\n", out)
    display.show_overlap(report)


@handle_errors
def features_command(
    embeddings: Path = typer.Option(..., "--embeddings", help="Embedding file"),
    sphere_files: list[Path] = typer.Option(..., "--sphere", help="One sphere per entity type"),
    out: Path = typer.Option(..., "--out", help="Feature TSV"),
):
    """Write z-scored distances to each type's sphere for every word."""
    spheres = {}
    for path in sphere_files:
        sphere = load_sphere(path)
        if sphere.ne_type in spheres:
            raise UsageError(f"Two spheres of type {sphere.ne_type.value}")
        spheres[sphere.ne_type] = sphere
    missing = [t.value for t in NeType if t not in spheres]
    if missing:
        raise UsageError(f"Missing --sphere for: {', '.join(missing)}")

    space = load_embeddings(embeddings)
    table = compute_features(space, spheres)
    result = Report("features", {"columns": FEATURE_HEADER}, [embeddings, *sphere_files])
    export_features(table.rows, out, header=result.header)
    result.finish(out)
    if table.degenerate:
        display.print_dim("constant columns: " + ", ".join(sorted(t.value for t in table.degenerate)))
    display.print_dim(f"{len(table)} feature rows written to {out}")
