import math

import numpy as np
import pytest

import anglekit as ak
from anglekit import (
    AngleMultiset,
    NotSorted,
    decide_triangle,
    estimate_p,
    impossible_four,
    solve_numeric,
)
from anglekit.solver import (
    _canonical_assignments,
    _sample_rng,
    _slot_list,
    objective_and_gradient,
)


class TestDecideTriangle:
    def test_realizable_pair(self):
        assert decide_triangle(0.3 * math.pi, 0.4 * math.pi)

    def test_unrealizable_pair(self):
        assert not decide_triangle(0.9 * math.pi, 0.2 * math.pi)

    def test_strict_boundary(self):
        assert decide_triangle(math.pi / 2, math.pi / 2 - 1e-9)
        assert not decide_triangle(math.pi / 2, math.pi / 2)


class TestImpossibleFour:
    def test_known_impossible(self):
        # smallest angle 2.2 > 2pi/3 ~ 2.094; 2.75 + 2.7 = 5.45 > pi + 2.2 ~ 5.342
        assert impossible_four([2.8, 2.75, 2.7, 2.2])

    def test_small_angles(self):
        assert not impossible_four([1.0, 0.8, 0.6, 0.4])

    def test_not_sorted(self):
        with pytest.raises(NotSorted):
            impossible_four([2.7, 2.75, 2.8, 2.2])


class TestSolveNumeric:
    def test_equilateral(self):
        report = solve_numeric(AngleMultiset.from_pairs([(math.pi / 3, 3)]), 3, 2,
                               restarts=5, seed=0)
        assert report.realized
        assert report.certificate is not None
        assert ak.check_certificate(report.config, report.certificate)

    def test_triangle_pair_unrealizable(self):
        report = solve_numeric(AngleMultiset.from_values([0.9 * math.pi, 0.2 * math.pi]),
                               3, 2, restarts=5, seed=0)
        assert not report.realized
        assert report.config is None

    def test_realized_configs_verify_independently(self):
        rng = np.random.default_rng(2)
        for k in range(10):
            pts = rng.standard_normal((4, 3))
            cfg = ak.PointConfig(3, pts)
            inst = ak.enumerate_angles(cfg)
            pick = rng.choice(len(inst), 4, replace=False)
            ms = AngleMultiset.from_values([inst[i].measured for i in pick])
            report = solve_numeric(ms, 4, 3, restarts=8, seed=k)
            assert report.realized
            cert = ak.verify(report.config, ms, 1e-6)
            assert len(cert.assignments) == 4

    def test_dimension_clamped(self):
        report = solve_numeric(AngleMultiset.from_pairs([(math.pi / 3, 3)]), 3, 9,
                               restarts=3, seed=1)
        assert report.realized
        assert report.config.dim == 2  # d capped at m - 1

    def test_sampling_disabled_raises(self):
        ms = AngleMultiset.from_values([0.4, 0.9, 1.3, 1.7])
        with pytest.raises(ak.BudgetExceeded):
            solve_numeric(ms, 8, 3, restarts=1, seed=0, allow_sampling=False)

    def test_more_targets_than_slots(self):
        ms = AngleMultiset.from_pairs([(1.0, 4)])
        report = solve_numeric(ms, 3, 2, restarts=1, seed=0)
        assert not report.realized


class TestAssignments:
    def test_orbit_reduction_count(self):
        reps = _canonical_assignments(4, 4)
        # 11880 ordered arrangements fall into at least 11880/24 orbits
        assert math.perm(12, 4) == 11880
        assert 495 <= len(reps) <= 540

    def test_slots_count(self):
        for m in (3, 4, 5):
            assert len(_slot_list(m)) == 3 * math.comb(m, 3)


class TestGradient:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(6)
        m, d = 4, 3
        nslots = len(_slot_list(m))
        ok = 0
        for _ in range(100):
            slot_ids = rng.choice(nslots, 4, replace=False).tolist()
            targets = rng.uniform(0.2, math.pi - 0.2, 4)
            x = rng.standard_normal(2 + (m - 3) * d)
            value, grad = objective_and_gradient(x, m, d, slot_ids, targets)
            fd = np.zeros_like(grad)
            h = 1e-6
            for j in range(len(x)):
                e = np.zeros_like(x)
                e[j] = h
                vp, _ = objective_and_gradient(x + e, m, d, slot_ids, targets)
                vm, _ = objective_and_gradient(x - e, m, d, slot_ids, targets)
                fd[j] = (vp - vm) / (2 * h)
            denom = max(np.linalg.norm(fd), 1e-10)
            assert np.linalg.norm(grad - fd) / denom < 1e-5
            ok += 1
        assert ok == 100


class TestEstimateP:
    def test_triangle_law_short(self):
        est = estimate_p(2, 3, 2, 20_000, seed=42)
        assert abs(est.p_hat - 0.5) < 0.02
        assert est.stderr == pytest.approx(
            math.sqrt(est.p_hat * (1 - est.p_hat) / 20_000)
        )
        assert not est.solver_limited

    def test_seed_determinism(self):
        a = estimate_p(2, 3, 2, 5_000, seed=7)
        b = estimate_p(2, 3, 2, 5_000, seed=7)
        assert a.p_hat == b.p_hat

    def test_measure_zero_triangle_triple(self):
        # three uniform angles must sum to pi exactly to fit one triangle
        est = estimate_p(2, 3, 3, 150, seed=3)
        assert est.p_hat == 0.0
        assert est.solver_limited

    def test_monotone_in_dimension(self):
        lo = estimate_p(2, 4, 4, 150, seed=11)
        hi = estimate_p(3, 4, 4, 150, seed=11)
        assert hi.p_hat >= lo.p_hat - 2 * (lo.stderr + hi.stderr)

    def test_sample_rng_is_stable(self):
        a = _sample_rng(42, 3).uniform(0, 1, 4)
        b = _sample_rng(42, 3).uniform(0, 1, 4)
        assert np.array_equal(a, b)
        c = _sample_rng(42, 4).uniform(0, 1, 4)
        assert not np.array_equal(a, c)

    def test_target_count_guard(self):
        with pytest.raises(ValueError):
            estimate_p(2, 3, 4, 10)
