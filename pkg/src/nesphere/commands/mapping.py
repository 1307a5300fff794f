from pathlib import Path

import typer

from ..config import Settings
from ..dictionary import load_dictionary
from ..embeddings import load_embeddings
from ..errors import UsageError
from ..hypersphere import Hypersphere, load_sphere, save_sphere
from ..mapping import (
    CANDIDATE_HEADER,
    candidate_entities,
    candidate_precision,
    candidate_rows,
    learn_linear_map,
    load_linear_map,
    load_seed_pairs,
    map_center,
    map_hypersphere_linear,
    refine_affine,
    save_linear_map,
)
from ..transport import DiscreteDistribution, EmdInit, TransportMode, alternating_emd_fit
from ..utils import Report, count_option, display, handle_errors, tsv


@handle_errors
def map_command(
    embeddings: Path = typer.Option(..., "--embeddings", help="Source-language embeddings"),
    target_embeddings: Path = typer.Option(None, "--target-embeddings", help="Target-language embeddings"),
    seeds_file: Path = typer.Option(None, "--seeds-file", help="Seed pairs, 'source<TAB>target'"),
    sphere_file: Path = typer.Option(..., "--sphere", help="Source-space sphere"),
    out: Path = typer.Option(..., "--out", help="Where to write the mapped sphere"),
    ridge: float = typer.Option(None, "--ridge", help="Ridge penalty of the seed-pair map"),
    linear_map: Path = typer.Option(None, "--linear-map", help="Project through this map instead of fitting seeds"),
):
    """Project a source-language sphere into the target space."""
    settings = Settings.load()
    ridge = settings.ridge if ridge is None else ridge
    sphere = load_sphere(sphere_file)

    if linear_map is not None:
        mapped = map_hypersphere_linear(sphere, load_linear_map(linear_map))
        inputs = [sphere_file, linear_map]
    else:
        if target_embeddings is None or seeds_file is None:
            raise UsageError("--target-embeddings and --seeds-file are required unless --linear-map is given")
        source = load_embeddings(embeddings, expected_dim=sphere.dim)
        target = load_embeddings(target_embeddings)
        seeds = load_seed_pairs(seeds_file)
        w = learn_linear_map(source, target, seeds, ridge)
        refined = refine_affine(source, target, seeds, sphere, map_center(w, sphere.center))
        mapped = Hypersphere(refined.mapped_center, refined.mapped_radius, sphere.ne_type)
        display.print_dim(
            f"K={refined.ratio:.6g} radius={refined.mapped_radius:.6g} residual={refined.residual:.3g}"
            + (" (iterative fallback)" if refined.fallback else "")
        )
        inputs = [embeddings, target_embeddings, seeds_file, sphere_file]

    save_sphere(mapped, out)
    Report("map", {"ridge": ridge, "linear_map": linear_map, "out": out}, inputs).finish(out)


@handle_errors
def emd_fit_command(
    embeddings: Path = typer.Option(..., "--embeddings", help="Source-language embeddings"),
    target_embeddings: Path = typer.Option(..., "--target-embeddings", help="Target-language embeddings"),
    out: Path = typer.Option(..., "--out", help="Where to write the learned linear map"),
    trace: Path = typer.Option(None, "--trace", help="Objective trace TSV (stdout if omitted)"),
    mode: TransportMode = typer.Option(None, "--mode", help="Transport solver"),
    epsilon: float = typer.Option(None, "--epsilon", help="Entropic regularisation"),
    iterations: int = typer.Option(None, "--iterations", help="Outer alternation rounds"),
    max_words: int = typer.Option(None, "--max-words", help="Most frequent words used per space"),
    ridge: float = typer.Option(None, "--ridge", help="Pull of the map towards the identity"),
    seeds_file: Path = typer.Option(None, "--seeds-file", help="Seed pairs for an orthogonal start"),
):
    """Learn a linear map between two spaces by alternating transport and least squares."""
    settings = Settings.load()
    transport = settings.emd.transport.model_copy(
        update={k: v for k, v in {"mode": mode, "epsilon": epsilon}.items() if v is not None}
    )
    emd = settings.emd.model_copy(
        update={
            "transport": transport,
            "outer_iter": count_option("--iterations", iterations, settings.emd.outer_iter),
            "ridge": settings.emd.ridge if ridge is None else ridge,
            "init": EmdInit.PROCRUSTES if seeds_file else settings.emd.init,
        }
    )
    max_words = count_option("--max-words", max_words, settings.emd_max_words)

    source = load_embeddings(embeddings)
    target = load_embeddings(target_embeddings, expected_dim=source.dim)
    seed_vectors = load_seed_pairs(seeds_file).resolve(source, target) if seeds_file else None
    w, objective = alternating_emd_fit(
        DiscreteDistribution.from_space(source, max_words),
        DiscreteDistribution.from_space(target, max_words),
        emd,
        seed_vectors=seed_vectors,
    )
    save_linear_map(w, out)

    inputs = [embeddings, target_embeddings] + ([seeds_file] if seeds_file else [])
    result = Report("emd-fit", {"emd": emd, "max_words": max_words, "out": out}, inputs)
    result.finish(out)
    rows = [f"{i}\t{value!r}" for i, value in enumerate(objective)]
    result.emit(tsv(result.header, "iteration\tobjective", rows), trace)
    display.print_dim(f"{len(objective)} rounds, final objective {objective[-1]:.6g}")


@handle_errors
def candidates_command(
    embeddings: Path = typer.Option(..., "--embeddings", help="Target-language embeddings"),
    sphere_file: Path = typer.Option(..., "--sphere", help="Mapped sphere"),
    n: int = typer.Option(None, "--n", help="Number of candidates"),
    dict_file: Path = typer.Option(None, "--dict", help="Known entities, for precision@k"),
    out: Path = typer.Option(None, "--out", help="Candidate TSV (stdout if omitted)"),
):
    """List the words nearest a mapped sphere centre as NE candidates."""
    settings = Settings.load()
    n = count_option("--n", n, settings.candidates)
    sphere = load_sphere(sphere_file)
    space = load_embeddings(embeddings, expected_dim=sphere.dim)
    candidates = candidate_entities(space, sphere, n)

    precision = {}
    inputs = [embeddings, sphere_file]
    if dict_file is not None:
        precision = candidate_precision(candidates, load_dictionary(dict_file, sphere.ne_type)[sphere.ne_type])
        inputs.append(dict_file)

    rows = candidate_rows(candidates)
    result = Report("candidates", {"n": n}, inputs)
    result.emit(tsv(result.header, CANDIDATE_HEADER, rows), out)
    display.show_candidates(candidates, precision)
