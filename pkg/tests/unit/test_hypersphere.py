import math

import numpy as np
import pytest
from pydantic import ValidationError

from nesphere.dictionary import NeType, resolve_phrases
from nesphere.embeddings import EmbeddingSpace, distances
from nesphere.errors import DataError, DimensionMismatchError, FitError
from nesphere.hypersphere import (
    EvalReport,
    FitConfig,
    Hypersphere,
    RadiusCandidates,
    classify,
    contains,
    evaluate_hypersphere,
    fit_hypersphere,
    load_sphere,
    ne_likelihood,
    save_sphere,
)
from nesphere.synth import ClusterSpec, SynthSpec, generate_space


@pytest.fixture
def noisy_space():
    """Members and background overlap, so no radius separates them cleanly."""
    rng = np.random.default_rng(11)
    members = rng.normal(0.0, 1.0, (30, 3))
    background = rng.normal(0.0, 3.0, (60, 3))
    tokens = tuple(f"m{i}" for i in range(30)) + tuple(f"b{i}" for i in range(60))
    space = EmbeddingSpace(tokens=tokens, matrix=np.vstack([members, background]))
    return space, frozenset((f"m{i}",) for i in range(30))


class TestHypersphere:
    def test_rejects_negative_radius(self):
        with pytest.raises(DataError):
            Hypersphere(np.zeros(2), -1.0, NeType.PER)

    def test_rejects_non_finite_center(self):
        with pytest.raises(DataError):
            Hypersphere(np.array([0.0, np.nan]), 1.0, NeType.PER)

    def test_boundary_is_inside(self, unit_sphere_2d):
        assert contains(unit_sphere_2d, np.array([1.0, 0.0]))
        assert not contains(unit_sphere_2d, np.array([1.0 + 1e-9, 0.0]))

    def test_zero_radius_contains_only_center(self):
        sphere = Hypersphere(np.array([1.0, 1.0]), 0.0, NeType.LOC)
        assert contains(sphere, np.array([1.0, 1.0]))
        assert not contains(sphere, np.array([1.0, 1.0 + 1e-12]))

    def test_likelihood_is_distance(self, unit_sphere_2d):
        assert ne_likelihood(unit_sphere_2d, np.array([3.0, 4.0])) == 5.0

    def test_dimension_mismatch(self, unit_sphere_2d):
        with pytest.raises(DimensionMismatchError):
            contains(unit_sphere_2d, np.zeros(3))

    def test_classify_nearest_centre_first(self):
        spheres = {
            NeType.PER: Hypersphere(np.array([0.0, 0.0]), 2.0, NeType.PER),
            NeType.LOC: Hypersphere(np.array([1.0, 0.0]), 2.0, NeType.LOC),
            NeType.ORG: Hypersphere(np.array([10.0, 0.0]), 1.0, NeType.ORG),
        }
        assert classify(spheres, np.array([0.9, 0.0])) == [NeType.LOC, NeType.PER]
        assert classify(spheres, np.array([-5.0, 0.0])) == []


class TestEvalReport:
    def test_rates(self):
        report = EvalReport(true_positive=2, false_positive=1, false_negative=1)
        assert report.precision == pytest.approx(2 / 3)
        assert report.recall == pytest.approx(2 / 3)
        assert report.f1 == pytest.approx(2 / 3)

    def test_empty_counts(self):
        report = EvalReport(0, 0, 0)
        assert report.precision == report.recall == report.f1 == 0.0

    def test_row_format(self):
        assert EvalReport(1, 0, 1).to_row("PER") == "PER\t1\t0\t1\t1.000000\t0.500000\t0.666667"


class TestEvaluate:
    def test_counts(self, line_space):
        sphere = Hypersphere(np.zeros(2), 1.5, NeType.PER)
        report = evaluate_hypersphere(sphere, line_space, [("alpha",), ("beta",), ("epsilon",)])
        assert (report.true_positive, report.false_positive, report.false_negative) == (2, 0, 1)

    def test_vocabulary_words_inside_are_false_positives(self, line_space):
        sphere = Hypersphere(np.zeros(2), 2.0, NeType.PER)
        report = evaluate_hypersphere(sphere, line_space, [("alpha",), ("beta",)])
        assert report.false_positive == 1

    def test_ignored_phrases_are_not_scored(self, line_space):
        sphere = Hypersphere(np.zeros(2), 2.0, NeType.PER)
        report = evaluate_hypersphere(sphere, line_space, [("alpha",), ("beta",)], ignore=[("gamma",)])
        assert report.false_positive == 0

    def test_unresolved_entries(self, line_space):
        sphere = Hypersphere(np.zeros(2), 2.0, NeType.PER)
        report = evaluate_hypersphere(sphere, line_space, [("alpha",), ("unknown",)])
        assert report.unresolved == 1
        assert report.true_positive == 1
        assert report.false_negative == 0

    def test_dimension_mismatch(self, line_space):
        with pytest.raises(DimensionMismatchError):
            evaluate_hypersphere(Hypersphere(np.zeros(3), 1.0, NeType.PER), line_space, [("alpha",)])


class TestFitConfig:
    def test_quantile_range(self):
        with pytest.raises(ValidationError):
            FitConfig(q_quantiles=[0.0])

    def test_absolute_grid_overrides_quantiles(self):
        config = FitConfig(q_grid=[3.0, 1.0, 3.0])
        assert config.thresholds(np.array([0.5, 10.0])) == [1.0, 3.0]

    def test_uniform_grid(self):
        config = FitConfig(radius_candidates=RadiusCandidates.UNIFORM_GRID, grid_size=5)
        assert list(config.radii(np.array([1.0, 3.0, 2.0]))) == [1.0, 1.5, 2.0, 2.5, 3.0]


class TestFit:
    def test_separable_cluster_is_recovered(self, cluster_space):
        space, entries = cluster_space
        sphere, report = fit_hypersphere(space, entries, entries)
        assert report.f1 == 1.0
        assert report.false_positive == 0
        assert evaluate_hypersphere(sphere, space, entries) == report

    def test_single_pass_matches_exhaustive_search(self, noisy_space):
        """One iteration scores exactly the no-discard candidates plus one
        recentred candidate set per threshold; the best of them wins."""
        space, entries = noisy_space
        config = FitConfig(max_iterations=1)
        _, report = fit_hypersphere(space, entries, entries, config)

        _, points = resolve_phrases(space, entries)
        center = points.mean(axis=0)
        d0 = distances(points, center)
        candidates = [(center, r) for r in np.unique(d0)]
        best_f1 = max(
            evaluate_hypersphere(Hypersphere(c, r, NeType.PER), space, entries).f1 for c, r in candidates
        )
        # The first round recentres from the best iteration-0 centre, which is `center`.
        for q in config.thresholds(d0):
            kept = points[d0 <= q]
            c = kept.mean(axis=0)
            for r in np.unique(distances(kept, c)):
                best_f1 = max(best_f1, evaluate_hypersphere(Hypersphere(c, r, NeType.PER), space, entries).f1)
        assert report.f1 == best_f1

    def test_more_iterations_never_hurt(self, noisy_space):
        space, entries = noisy_space
        _, one = fit_hypersphere(space, entries, entries, FitConfig(max_iterations=1))
        _, many = fit_hypersphere(space, entries, entries, FitConfig(max_iterations=10))
        assert many.f1 >= one.f1
        assert 0.0 < many.f1 < 1.0

    def test_radius_is_a_train_distance(self, noisy_space):
        space, entries = noisy_space
        sphere, _ = fit_hypersphere(space, entries, entries, FitConfig(max_iterations=1))
        _, points = resolve_phrases(space, entries)
        assert np.min(np.abs(distances(points, sphere.center) - sphere.radius)) < 1e-12

    def test_deterministic(self, noisy_space):
        space, entries = noisy_space
        a, _ = fit_hypersphere(space, entries, entries)
        b, _ = fit_hypersphere(space, entries, entries)
        assert np.array_equal(a.center, b.center)
        assert a.radius == b.radius

    def test_needs_two_points(self, line_space):
        with pytest.raises(FitError):
            fit_hypersphere(line_space, [("alpha",), ("unknown",)], [("alpha",)])


class TestPersistence:
    def test_round_trip(self, temp_dir):
        sphere = Hypersphere(np.array([0.1, -2.5, 1e-17]), math.pi, NeType.ORG)
        save_sphere(sphere, temp_dir / "s.sphere")
        loaded = load_sphere(temp_dir / "s.sphere")
        assert loaded.ne_type is NeType.ORG
        assert loaded.radius == sphere.radius
        assert np.array_equal(loaded.center, sphere.center)

    def test_dimension_mismatch_in_file(self, temp_dir):
        (temp_dir / "s.sphere").write_text("PER 3 1.0\n0 0\n", encoding="utf-8")
        with pytest.raises(DimensionMismatchError):
            load_sphere(temp_dir / "s.sphere")

    def test_missing_centre_line(self, temp_dir):
        (temp_dir / "s.sphere").write_text("PER 2 1.0\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_sphere(temp_dir / "s.sphere")


@pytest.mark.slow
class TestPlantedRecovery:
    def test_recovers_planted_sphere(self):
        spec = SynthSpec(
            dim=16,
            clusters={NeType.PER: ClusterSpec(members=2000, spread=1.0)},
            background=20_000,
            seed=5,
        )
        space, dictionary, truth = generate_space(spec)
        planted = truth[NeType.PER]
        names, members = resolve_phrases(space, dictionary[NeType.PER])
        inside = distances(members, planted.center) <= planted.radius
        labels = [phrase for phrase, keep in zip(names, inside) if keep]

        sphere, report = fit_hypersphere(space, labels, labels)
        assert report.f1 >= 0.95
        assert np.linalg.norm(sphere.center - planted.center) <= 0.05 * planted.radius
        assert sphere.radius == pytest.approx(planted.radius, rel=0.05)
