import math

import numpy as np
import pytest

from nesphere.dictionary import NeType
from nesphere.errors import DataError, DimensionMismatchError
from nesphere.hypersphere import Hypersphere
from nesphere.volume import (
    BOX_MIN_FILL,
    OVERLAP_HEADER,
    McConfig,
    Sampler,
    analytic_overlap,
    analytic_two_ball_intersection,
    ball_volume,
    box_fill,
    mc_ball_volume,
    mc_overlap,
    resolve_sampler,
)

# Two unit discs one radius apart overlap in 2π/3 − √3/2.
LENS_2D_F1 = 2 / 3 - math.sqrt(3) / (2 * math.pi)


def ball(center, radius=1.0):
    return Hypersphere(np.asarray(center, dtype=np.float64), radius, NeType.PER)


def offset(dim, gap):
    center = np.zeros(dim)
    center[0] = gap
    return center


class TestBallVolume:
    @pytest.mark.parametrize(
        ("radius", "dim", "expected"),
        [
            (2.0, 2, 4 * math.pi),
            (1.0, 3, 4 * math.pi / 3),
            (1.0, 8, math.pi**4 / 24),
            (1.0, 16, math.pi**8 / math.factorial(8)),
        ],
    )
    def test_closed_form(self, radius, dim, expected):
        assert ball_volume(radius, dim) == pytest.approx(expected, rel=1e-12)

    def test_zero_radius(self):
        assert ball_volume(0.0, 5) == 0.0


class TestAnalyticIntersection:
    def test_disc_lens(self):
        v = analytic_two_ball_intersection(ball([0, 0]), ball([1, 0]))
        assert v == pytest.approx(2 * math.pi / 3 - math.sqrt(3) / 2, rel=1e-12)

    def test_three_dimensional_lens(self):
        v = analytic_two_ball_intersection(ball(offset(3, 0)), ball(offset(3, 1)))
        assert v == pytest.approx(5 * math.pi / 12, rel=1e-12)

    def test_unequal_radii(self):
        # Caps of heights 0.75 (radius 1) and 0.25 (radius 2) meet at x = 0.25.
        v = analytic_two_ball_intersection(ball(offset(3, 0), 1.0), ball(offset(3, 2), 2.0))
        caps = math.pi * 0.75**2 * (3 - 0.75) / 3 + math.pi * 0.25**2 * (6 - 0.25) / 3
        assert v == pytest.approx(caps, rel=1e-12)

    def test_disjoint_and_tangent(self):
        assert analytic_two_ball_intersection(ball([0, 0]), ball([5, 0])) == 0.0
        assert analytic_two_ball_intersection(ball([0, 0]), ball([2, 0])) == 0.0

    def test_containment(self):
        v = analytic_two_ball_intersection(ball(offset(4, 0), 2.0), ball(offset(4, 0.5), 1.0))
        assert v == ball_volume(1.0, 4)

    def test_overlap_rates(self):
        report = analytic_overlap(ball([0, 0]), ball([1, 0]))
        assert report.f1 == pytest.approx(LENS_2D_F1, rel=1e-12)
        assert report.precision == pytest.approx(report.recall)

    def test_zero_radius_rejected(self):
        with pytest.raises(DataError):
            analytic_overlap(ball([0, 0]), ball([1, 0], 0.0))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            analytic_overlap(ball([0, 0]), ball([0, 0, 0]))


class TestMonteCarloOverlap:
    config = McConfig(samples=200_000, seed=42, sampler=Sampler.BOUNDING_BOX, chunk_size=50_000)

    def test_identical_spheres(self):
        report = mc_overlap(ball([1, 2, 3]), ball([1, 2, 3]), self.config)
        assert report.precision == report.recall == report.f1 == 1.0
        assert not report.degenerate

    def test_disjoint_spheres(self):
        report = mc_overlap(ball([0, 0]), ball([10, 0]), self.config)
        assert report.precision == report.recall == report.f1 == 0.0
        assert report.v_intersection == 0.0

    def test_disc_lens_within_standard_error(self):
        report = mc_overlap(ball([0, 0]), ball([1, 0]), self.config)
        assert abs(report.f1 - LENS_2D_F1) < 4 * report.std_error["f1"]
        assert report.v_intersection == pytest.approx(2 * math.pi / 3 - math.sqrt(3) / 2, rel=0.02)

    def test_contained_mapped_sphere_has_full_precision(self):
        report = mc_overlap(ball(offset(3, 0), 2.0), ball(offset(3, 0.5), 1.0), self.config)
        assert report.precision == 1.0
        assert report.recall == pytest.approx(1 / 8, abs=0.01)

    def test_swapping_spheres_swaps_rates(self):
        a, b = ball([0, 0], 1.0), ball([0.8, 0.3], 1.4)
        forward = mc_overlap(a, b, self.config)
        backward = mc_overlap(b, a, self.config)
        assert forward.precision == backward.recall
        assert forward.recall == backward.precision
        assert forward.f1 == backward.f1

    def test_deterministic_for_a_seed(self):
        a, b = ball([0, 0]), ball([0.5, 0.5])
        assert mc_overlap(a, b, self.config) == mc_overlap(a, b, self.config)
        other = McConfig(samples=200_000, seed=7, sampler=Sampler.BOUNDING_BOX, chunk_size=50_000)
        assert mc_overlap(a, b, other).hits != mc_overlap(a, b, self.config).hits

    def test_uneven_chunks_use_every_sample(self):
        report = mc_overlap(ball([0, 0]), ball([1, 0]), McConfig(samples=1_001, sampler=Sampler.BOUNDING_BOX, chunk_size=300))
        assert report.hits["samples"] == 1_001

    def test_ball_sampler_in_eight_dimensions(self):
        target, mapped = ball(offset(8, 0)), ball(offset(8, 0.5))
        config = McConfig(samples=200_000, sampler=Sampler.BALL)
        report = mc_overlap(target, mapped, config)
        exact = analytic_overlap(target, mapped)
        assert abs(report.f1 - exact.f1) < 4 * report.std_error["f1"]
        assert report.precision == pytest.approx(exact.precision, abs=4 * report.std_error["precision"])

    def test_ball_sampler_contained(self):
        config = McConfig(samples=20_000, sampler=Sampler.BALL)
        report = mc_overlap(ball(offset(16, 0), 3.0), ball(offset(16, 0.1), 1.0), config)
        assert report.precision == 1.0
        assert report.recall == 0.0

    def test_row_matches_header(self):
        report = analytic_overlap(ball([0, 0]), ball([1, 0]))
        assert len(report.to_row().split("\t")) == len(OVERLAP_HEADER.split("\t"))


class TestSamplerChoice:
    def test_default_is_auto(self):
        assert McConfig().sampler is Sampler.AUTO

    def test_low_dimensions_keep_the_box(self):
        assert box_fill(ball([0, 0]), ball([1, 0])) == pytest.approx(math.pi / 6)
        assert resolve_sampler(ball([0, 0]), ball([1, 0]), Sampler.AUTO) is Sampler.BOUNDING_BOX
        report = mc_overlap(ball([0, 0]), ball([1, 0]), McConfig(samples=10_000))
        assert "both" in report.hits

    def test_high_dimensions_switch_to_balls(self):
        target, mapped = ball(offset(16, 0)), ball(offset(16, 0.3))
        assert box_fill(target, mapped) < BOX_MIN_FILL
        assert resolve_sampler(target, mapped, Sampler.AUTO) is Sampler.BALL
        report = mc_overlap(target, mapped, McConfig(samples=10_000))
        assert "mapped_in_target" in report.hits

    def test_explicit_sampler_is_kept(self, mocker):
        logger = mocker.patch("nesphere.volume.logger")
        target, mapped = ball(offset(16, 0)), ball(offset(16, 0.3))
        assert resolve_sampler(target, mapped, Sampler.BOUNDING_BOX) is Sampler.BOUNDING_BOX
        logger.warning.assert_called_once()
        assert resolve_sampler(ball([0, 0]), ball([1, 0]), Sampler.BALL) is Sampler.BALL

    def test_sixteen_dimensions_with_defaults(self):
        target, mapped = ball(offset(16, 0)), ball(offset(16, 0.3))
        report = mc_overlap(target, mapped)
        exact = analytic_overlap(target, mapped)
        assert exact.f1 == pytest.approx(0.54, abs=0.005)
        assert report.f1 == pytest.approx(exact.f1, abs=0.01)
        assert abs(report.f1 - exact.f1) < 4 * report.std_error["f1"]
        assert report.hits["samples"] == 1_000_000

    def test_box_intersection_in_two_dimensions(self):
        target, mapped = ball([0, 0]), ball([1, 0])
        report = mc_overlap(target, mapped, McConfig(samples=1_000_000, sampler=Sampler.BOUNDING_BOX))
        assert report.v_intersection == pytest.approx(analytic_two_ball_intersection(target, mapped), rel=0.01)

    @pytest.mark.slow
    def test_intersection_in_eight_dimensions(self):
        target, mapped = ball(offset(8, 0)), ball(offset(8, 0.3))
        report = mc_overlap(target, mapped)
        assert report.v_intersection == pytest.approx(analytic_two_ball_intersection(target, mapped), rel=0.01)


class TestMonteCarloVolume:
    @pytest.mark.parametrize("dim", [2, 8])
    def test_matches_closed_form(self, dim):
        estimate = mc_ball_volume(ball(np.ones(dim), 1.5), McConfig(samples=200_000))
        assert abs(estimate.volume - ball_volume(1.5, dim)) < 4 * estimate.std_error

    def test_positive_radius_required(self):
        with pytest.raises(DataError):
            mc_ball_volume(ball([0, 0], 0.0))

    def test_sixteen_dimensional_ball(self):
        estimate = mc_ball_volume(ball(np.zeros(16)), McConfig(samples=1_000_000))
        assert estimate.std_error > 0
        assert abs(estimate.volume - ball_volume(1.0, 16)) < 3 * estimate.std_error
