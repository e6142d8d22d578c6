import math

import numpy as np
import pytest

import anglekit as ak
from anglekit import AngleMultiset, anchor_set, build_cover, place_point, realize_highdim
from anglekit.highdim import cos_angles, jacobian, leading_jacobian


def fd_jacobian(anchors, x, step=1e-6):
    d = anchors.d
    out = np.zeros((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        out[:, j] = (cos_angles(anchors, x + e) - cos_angles(anchors, x - e)) / (2 * step)
    return out


class TestAnchorSet:
    def test_right_angle_d2(self):
        a = anchor_set(math.pi / 2, 2, 1e3)
        c = cos_angles(a, np.zeros(2))
        assert np.max(np.abs(c - math.cos(math.pi / 2))) <= 1e-12

    def test_every_pair_subtends_theta_d5(self):
        a = anchor_set(0.7, 5, 1e3)
        ang = np.arccos(np.clip(cos_angles(a, np.zeros(5)), -1, 1))
        assert np.max(np.abs(ang - 0.7)) <= 1e-10

    def test_identity_is_scale_free(self):
        a = anchor_set(1.3, 3, 1.0)
        ang = np.arccos(np.clip(cos_angles(a, np.zeros(3)), -1, 1))
        assert np.max(np.abs(ang - 1.3)) <= 1e-10

    def test_identity_on_grid(self):
        for d in (2, 3, 6):
            for theta in (0.2, 1.0, math.pi / 2, 2.4, 3.0):
                a = anchor_set(theta, d, 1e3)
                c = cos_angles(a, np.zeros(d))
                assert np.max(np.abs(c - math.cos(theta))) <= 1e-12


class TestJacobian:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            d = int(rng.integers(2, 6))
            theta = float(rng.uniform(0.2, math.pi - 0.2))
            a = anchor_set(theta, d, 1e3)
            x = rng.uniform(-0.3, 0.3, d)
            ja = jacobian(a, x)
            jf = fd_jacobian(a, x)
            denom = max(np.max(np.abs(jf)), 1e-12)
            assert np.max(np.abs(ja - jf)) / denom < 1e-5

    def test_limit_structure_rate(self):
        # deviation from the lam -> infinity limit matrix shrinks like 1/lam
        theta, d = 0.9, 3
        devs = []
        for lam in (1e2, 1e3, 1e4):
            a = anchor_set(theta, d, lam)
            devs.append(np.max(np.abs(jacobian(a, np.zeros(d)) - leading_jacobian(a))))
        assert devs[0] < 10.0 / 1e2
        assert devs[1] < 10.0 / 1e3
        for k in (0, 1):
            ratio = devs[k] / devs[k + 1]
            assert 5.0 <= ratio <= 15.0


class TestPlacePoint:
    def test_fixed_point_at_center(self):
        a = anchor_set(1.0, 3, 1e3)
        x = place_point(a, [1.0, 1.0, 1.0])
        assert np.allclose(x, 0.0, atol=1e-12)

    def test_small_spread(self):
        a = anchor_set(1.0, 3, 1e3)
        x = place_point(a, [1.01, 0.99, 1.0])
        ang = np.arccos(np.clip(cos_angles(a, x), -1, 1))
        assert np.max(np.abs(ang - np.array([1.01, 0.99, 1.0]))) <= 1e-8

    def test_padding_with_center_angle(self):
        a = anchor_set(0.8, 4, 1e3)
        x = place_point(a, [0.82])
        ang = np.arccos(np.clip(cos_angles(a, x), -1, 1))
        assert ang[0] == pytest.approx(0.82, abs=1e-8)
        assert np.max(np.abs(ang[1:] - 0.8)) <= 1e-8

    def test_too_many_targets(self):
        a = anchor_set(0.8, 2, 1e3)
        with pytest.raises(ValueError):
            place_point(a, [0.8, 0.8, 0.8])


class TestBuildCover:
    def test_reference_center_count(self):
        cover = build_cover(0.3, 2, 1e3, r0=0.05)
        assert len(cover) == 26  # ceil((pi - 0.6) / 0.1)

    def test_cover_property(self):
        cover = build_cover(0.3, 3, 1e3, r0=0.05)
        for target in np.linspace(0.3, math.pi - 0.3, 200):
            assert any(abs(target - c.theta_c) <= c.radius + 1e-12 for c in cover)

    def test_probe_endpoints_converge(self):
        cover = build_cover(0.4, 2, 1e3, r0=0.05)
        for c in cover[:5]:
            for sign in (1.0, -1.0):
                place_point(c.anchors, [c.theta_c + sign * c.radius] * c.anchors.d)


class TestRealizeHighdim:
    def test_thirty_targets_d3(self):
        rng = np.random.default_rng(11)
        targets = np.sort(rng.uniform(0.3, math.pi - 0.3, 30)).tolist()
        config, cert = realize_highdim(targets, 3, 1e3, eps=0.3)
        assert len(cert.assignments) == 30
        assert cert.tolerance == 1e-8
        # every block is 6 anchors + 1 movable point
        assert len(config) % 7 == 0
        assert len(config) // 7 <= 10

    def test_single_group(self):
        config, cert = realize_highdim([1.0, 1.02, 1.05], 3, 1e3, eps=0.3)
        assert len(config) == 7  # 6 anchors + 1 movable
        assert len(cert.assignments) == 3

    def test_repeated_angles_peeled_via_circle(self):
        d = 2
        cap = 2 * d * (2 * d + 1)  # 20
        ms = AngleMultiset.from_pairs([(1.2, cap + 1)])
        config, cert = realize_highdim(ms, d, 1e3, eps=0.3)
        assert len(cert.assignments) == cap + 1

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            realize_highdim([0.1, 1.0], 3, 1e3, eps=0.3)


def test_budget_scales_with_target_count():
    rng = np.random.default_rng(29)
    for n in (6, 12, 24):
        targets = np.sort(rng.uniform(0.4, math.pi - 0.4, n)).tolist()
        config, cert = realize_highdim(targets, 3, 1e3, eps=0.4)
        groups = len(config) // 7
        assert groups <= math.ceil(n / 3)
        assert len(cert.assignments) == n
