from pathlib import Path

import typer

from ..config import Settings
from ..embeddings import load_embeddings, nearest_neighbors, project_2d
from ..errors import DataError, UsageError
from ..hypersphere import load_sphere
from ..utils import Report, count_option, handle_errors, read_tokens, tsv


@handle_errors
def neighbors_command(
    embeddings: Path = typer.Option(..., "--embeddings", help="Embedding file"),
    tokens: list[str] = typer.Option(None, "--token", help="Query word (repeatable)"),
    tokens_file: Path = typer.Option(None, "--tokens-file", help="Query words, one per line"),
    sphere_file: Path = typer.Option(None, "--sphere", help="Query the centre of this sphere"),
    k: int = typer.Option(None, "--k", help="Neighbours per query"),
    out: Path = typer.Option(None, "--out", help="Neighbour TSV (stdout if omitted)"),
):
    """Nearest words to query words or to a sphere centre."""
    settings = Settings.load()
    k = count_option("--k", k, settings.neighbors)
    queries = read_tokens(tokens, tokens_file)
    if not queries and sphere_file is None:
        raise UsageError("Give --token, --tokens-file or --sphere")

    space = load_embeddings(embeddings)
    rows = []
    inputs = [embeddings] + ([tokens_file] if tokens_file else [])
    if sphere_file is not None:
        sphere = load_sphere(sphere_file)
        inputs.append(sphere_file)
        for rank, (token, d) in enumerate(nearest_neighbors(space, sphere.center, k), start=1):
            rows.append(f"<center>\t{rank}\t{token}\t{d!r}")
    for query in queries:
        if query not in space:
            raise DataError(f"Query word not in the space: {query}")
        hits = nearest_neighbors(space, space.vector(query), k, exclude=[query])
        rows.extend(f"{query}\t{rank}\t{token}\t{d!r}" for rank, (token, d) in enumerate(hits, start=1))

    result = Report("neighbors", {"k": k, "tokens": queries}, inputs)
    result.emit(tsv(result.header, "query\trank\ttoken\tdistance", rows), out)


@handle_errors
def project2d_command(
    embeddings: Path = typer.Option(..., "--embeddings", help="Embedding file"),
    tokens: list[str] = typer.Option(None, "--token", help="Word to project (repeatable)"),
    tokens_file: Path = typer.Option(None, "--tokens-file", help="Words to project, one per line"),
    out: Path = typer.Option(None, "--out", help="Scatter TSV (stdout if omitted)"),
):
    """Principal-component scatter coordinates for a set of words."""
    selected = read_tokens(tokens, tokens_file)
    space = load_embeddings(embeddings)
    rows = [f"{token}\t{x!r}\t{y!r}" for token, x, y in project_2d(space, selected)]

    inputs = [embeddings] + ([tokens_file] if tokens_file else [])
    result = Report("project2d", {"tokens": selected}, inputs)
    result.emit(tsv(result.header, "token\tx\ty", rows), out)
