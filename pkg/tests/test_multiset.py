import math

import numpy as np
import pytest

import anglekit as ak
from anglekit import (
    AngleMultiset,
    ArcOverlap,
    PointConfig,
    circle_config,
    enumerate_angles,
    glue,
    realize_multiset,
    verify,
)


def triangle_with_angles(a1, a2):
    """Triangle on the unit base realizing a1 at one end and a2 at the other."""
    a3 = math.pi - a1 - a2
    r = math.sin(a2) / math.sin(a3)
    c = np.array([r * math.cos(a1), r * math.sin(a1)])
    return PointConfig(2, [[0.0, 0.0], [1.0, 0.0], c])


class TestCircleConfig:
    def count_hits(self, config, theta):
        return sum(1 for i in enumerate_angles(config) if abs(i.measured - theta) <= 1e-9)

    def test_t2_exact_multiplicity(self):
        config = circle_config(1.0, 2)
        assert len(config) == 4
        assert self.count_hits(config, 1.0) == 2

    @pytest.mark.parametrize("theta", [0.3, math.pi / 2, 2.5])
    @pytest.mark.parametrize("t", [2, 3, 4])
    def test_multiplicity_grid(self, t, theta):
        config = circle_config(theta, t)
        assert len(config) == 2 * t
        assert self.count_hits(config, theta) >= t * (t - 1)

    def test_points_on_unit_circle(self):
        config = circle_config(0.7, 4)
        radii = np.linalg.norm(config.points, axis=1)
        assert np.max(np.abs(radii - 1.0)) <= 1e-12

    def test_arc_overlap(self):
        with pytest.raises(ArcOverlap):
            circle_config(0.5, 4, spacing=0.2)  # 0.8 >= min(1.0, 2pi-1)/2


class TestGlue:
    def test_two_triangles(self):
        a = triangle_with_angles(0.5, 0.7)
        b = triangle_with_angles(0.9, 1.1)
        ta = AngleMultiset.from_values([0.5, 0.7])
        tb = AngleMultiset.from_values([0.9, 1.1])
        g = glue(a, b, ta, tb)
        assert len(g) == 4
        cert = verify(g, ta.combine(tb), 1e-9)
        assert len(cert.assignments) == 4

    def test_point_count(self):
        a, _ = ak.construct_five_points([1.5, 1.2, 1.0, 0.8, 0.6, 0.4])
        b, _ = ak.construct_five_points([1.45, 1.15, 0.95, 0.75, 0.55, 0.35])
        assert len(glue(a, b)) == 8

    def test_mirror_doubles_multiplicities(self):
        a = triangle_with_angles(0.5, 0.7)
        b = PointConfig(2, a.points * np.array([1.0, -1.0]))
        ms = AngleMultiset.from_values([0.5, 0.7])
        g = glue(a, b, ms, ms)
        doubled = AngleMultiset.from_pairs([(0.5, 2), (0.7, 2)])
        cert = verify(g, doubled, 1e-9)
        assert len(cert.assignments) == 4

    def test_halves_separated_by_axis(self):
        a = triangle_with_angles(0.4, 0.8)
        b = triangle_with_angles(1.2, 0.3)
        g = glue(a, b)
        ys = g.points[:, 1]
        on_axis = np.sum(np.abs(ys) < 1e-12)
        assert on_axis == 2
        assert np.sum(ys > 0) >= 1 and np.sum(ys < 0) >= 1


class TestRealizeMultiset:
    def test_two_angle_fan(self):
        config, cert = realize_multiset(AngleMultiset.from_values([0.4, 0.5]), 31)
        assert len(config) == 4
        assert len(cert.assignments) == 2

    def test_repeated_block(self):
        ms = AngleMultiset.from_pairs([(0.9, 13)])
        config, cert = realize_multiset(ms, 37)
        assert len(config) <= 37
        assert len(cert.assignments) == 13

    def test_mixed_recursion(self):
        rng = np.random.default_rng(8)
        vals = np.sort(rng.uniform(0.1, math.pi - 0.1, 12))
        ms = AngleMultiset.from_pairs([(float(v), 5) for v in vals])
        config, cert = realize_multiset(ms, 60)
        assert len(config) <= 60
        assert len(cert.assignments) == 60

    def test_single_angle_110_times_with_22_points(self):
        ms = AngleMultiset.from_pairs([(1.1, 110)])
        config, cert = realize_multiset(ms, 22)
        assert len(config) == 22
        assert len(cert.assignments) == 110

    def test_budget_error_is_honest(self):
        ms = AngleMultiset.from_pairs([(0.8, 30), (0.5, 9)])
        with pytest.raises(ak.BudgetExceeded):
            realize_multiset(ms, 12)

    def test_guaranteed_mode_random_sweep(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            k = int(rng.integers(1, 9))
            vals = np.sort(rng.uniform(0.05, math.pi - 0.05, k))
            pairs = [(float(v), int(rng.integers(1, 14))) for v in vals]
            ms = AngleMultiset.from_pairs(pairs)
            m = math.ceil(ms.total / 2) + 30
            config, cert = realize_multiset(ms, m)
            assert len(config) <= m
            assert len(cert.assignments) == ms.total
