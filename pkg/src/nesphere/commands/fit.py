from pathlib import Path

import typer

from ..config import Settings
from ..dictionary import NeType, combine_dictionaries, coverage_report, load_dictionary
from ..embeddings import embedding_dim, load_embeddings
from ..errors import UsageError
from ..hypersphere import EVAL_HEADER, evaluate_hypersphere, load_sphere, save_sphere
from ..runner import DimensionScanner, fit_and_evaluate
from ..utils import Report, display, handle_errors, tsv


@handle_errors
def fit_command(
    embeddings: Path = typer.Option(..., "--embeddings", help="Embedding file (word2vec text format)"),
    dict_file: Path = typer.Option(..., "--dict", help="NE dictionary, one entry per line"),
    ne_type: NeType = typer.Option(..., "--type", case_sensitive=False, help="Entity type of the dictionary"),
    out: Path = typer.Option(..., "--out", help="Where to write the fitted sphere"),
    report: Path = typer.Option(None, "--report", help="Evaluation TSV (stdout if omitted)"),
    split: float = typer.Option(None, "--split", help="Train share of the dictionary"),
    seed: int = typer.Option(None, "--seed", help="Split seed"),
):
    """Fit a hypersphere to a dictionary and report train/test scores."""
    settings = Settings.load()
    split = settings.split_ratio if split is None else split
    seed = settings.seed if seed is None else seed

    space = load_embeddings(embeddings)
    dictionary = load_dictionary(dict_file, ne_type)
    coverage = coverage_report(dictionary, space)[ne_type]
    display.print_dim(f"{ne_type.value} coverage {coverage.covered}/{coverage.total}")

    outcome = fit_and_evaluate(space, dictionary, ne_type, settings.fit, split, seed)
    save_sphere(outcome.sphere, out)

    result = Report(
        "fit",
        {"type": ne_type, "split": split, "fit": settings.fit, "out": out},
        [embeddings, dict_file],
        seed=seed,
    )
    result.finish(out)
    rows = [outcome.train.to_row(f"{ne_type.value}/train"), outcome.test.to_row(f"{ne_type.value}/test")]
    result.emit(tsv(result.header, EVAL_HEADER, rows), report)
    display.show_eval({"train": outcome.train, "test": outcome.test}, title=f"{ne_type.value} sphere")


@handle_errors
def eval_command(
    sphere_file: Path = typer.Option(..., "--sphere", help="Sphere file to score"),
    embeddings: Path = typer.Option(..., "--embeddings", help="Embedding file"),
    dict_file: Path = typer.Option(..., "--dict", help="Dictionary to score against"),
    ne_type: NeType = typer.Option(None, "--type", case_sensitive=False, help="Defaults to the sphere's type"),
    out: Path = typer.Option(None, "--out", help="Evaluation TSV (stdout if omitted)"),
):
    """Score a sphere against a dictionary over the whole vocabulary."""
    sphere = load_sphere(sphere_file)
    ne_type = ne_type or sphere.ne_type
    space = load_embeddings(embeddings, expected_dim=sphere.dim)
    dictionary = load_dictionary(dict_file, ne_type)
    report = evaluate_hypersphere(sphere, space, dictionary[ne_type])

    result = Report("eval", {"type": ne_type}, [sphere_file, embeddings, dict_file])
    result.emit(tsv(result.header, EVAL_HEADER, [report.to_row(ne_type.value)]), out)
    display.show_eval({ne_type.value: report})


@handle_errors
def scan_dims_command(
    embeddings: list[Path] = typer.Option(..., "--embeddings", help="One embedding file per dimension"),
    dict_files: list[Path] = typer.Option(..., "--dict", help="Dictionary file, paired with --type"),
    types: list[NeType] = typer.Option(..., "--type", case_sensitive=False, help="Type of each --dict"),
    out: Path = typer.Option(None, "--out", help="Scan TSV (stdout if omitted)"),
    split: float = typer.Option(None, "--split", help="Train share of each dictionary"),
    seed: int = typer.Option(None, "--seed", help="Split seed"),
):
    """Fit every type in every dimension and pick the best dimension per type."""
    if len(dict_files) != len(types):
        raise UsageError(f"{len(dict_files)} --dict files but {len(types)} --type values")
    settings = Settings.load()
    split = settings.split_ratio if split is None else split
    seed = settings.seed if seed is None else seed

    files = {}
    for path in embeddings:
        dim = embedding_dim(path)
        if dim in files:
            raise UsageError(f"Two embedding files of dimension {dim}: {files[dim]} and {path}")
        files[dim] = path
    dictionary = combine_dictionaries(*(load_dictionary(p, t) for p, t in zip(dict_files, types)))

    scanner = DimensionScanner(settings.fit, split, seed)
    best = scanner.run(files, dictionary)

    rows = []
    for (dim, ne_type), outcome in sorted(scanner.results.items(), key=lambda kv: (kv[0][1].value, kv[0][0])):
        chosen = int(best[ne_type][0] == dim)
        rows.append(f"{ne_type.value}\t{dim}\t{outcome.test.f1:.6f}\t{chosen}")
    result = Report("scan-dims", {"types": types, "split": split, "fit": settings.fit}, [*embeddings, *dict_files], seed=seed)
    result.emit(tsv(result.header, "type\tdim\tf1\tbest", rows), out)
    display.show_scan({t.value: v for t, v in best.items()})
