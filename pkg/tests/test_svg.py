import math
from pathlib import Path

import numpy as np
import pytest

import anglekit as ak
from anglekit import AngleMultiset, PointConfig, render_svg, verify

GOLDEN = Path(__file__).parent / "data" / "triangle.svg"


def triangle():
    return PointConfig(2, [[0.0, 0.0], [1.0, 0.0], [0.5, -math.sqrt(3) / 2]])


class TestRenderSvg:
    def test_golden_file(self):
        svg = render_svg(triangle())
        assert svg == GOLDEN.read_text()

    def test_scale_invariance(self):
        scaled = PointConfig(2, triangle().points * 2.0)
        assert render_svg(scaled) == render_svg(triangle())

    def test_deterministic_bytes(self):
        cfg = PointConfig(2, np.random.default_rng(5).standard_normal((6, 2)))
        assert render_svg(cfg).encode() == render_svg(cfg).encode()

    def test_arc_count_matches_assignments(self):
        cfg = triangle()
        cert = verify(cfg, AngleMultiset.from_pairs([(math.pi / 3, 3)]), 1e-9)
        svg = render_svg(cfg, cert)
        assert svg.count('class="angle-arc"') == len(cert.assignments)
        assert svg.count('class="config-point"') == 3

    def test_dimension_guard(self):
        cfg = PointConfig(3, [[0, 0, 0], [1, 0, 0], [0, 1, 0.3]])
        with pytest.raises(ak.DimensionUnsupported):
            render_svg(cfg)
        svg = render_svg(cfg, project_first_two=True)
        assert svg.startswith("<?xml")
