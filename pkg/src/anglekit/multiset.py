"""Repeated-angle machinery: circle constructions, gluing, recursive planner.

A chord of a circle is seen at the same angle from every point of the arc on
one side, which realizes one angle with quadratically many distinct ray pairs.
Gluing joins two planar realizations along a shared hull edge so that two
points are reused and no certified ray pair is lost. The planner peels work
off a multiset with these two tools plus the five-point construction until a
small fan chain finishes the job.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArcOverlap,
    BudgetExceeded,
    SharedRayCollision,
    UnmatchedTargets,
    VerificationFailed,
)
from .geom import (
    DEFAULT_TOL,
    SEP_MIN,
    AngleMultiset,
    PointConfig,
    check_angle,
    convex_hull_indices,
    verify,
)
from .planar import construct_five_points

# Angular clearance when the fan chain picks a fresh ray direction.
MIN_RAY_GAP = 1e-6


def circle_config(theta, t, spacing=None):
    """2t points on the unit circle realizing ``theta`` at least t(t-1) times.

    Points come in two clusters: x_i at arc position -i*eta and y_i at
    2*theta - i*eta for i = 1..t. Every chord x_i y_i spans the same central
    angle 2*theta, so each of the t-1 cluster points outside that arc sees it
    at exactly theta. The default spacing eta keeps the clusters well clear
    of each other for any theta, obtuse included.
    """
    theta = check_angle(theta)
    if t < 2:
        raise ValueError("t must be at least 2")
    window = min(2.0 * theta, 2.0 * math.pi - 2.0 * theta)
    eta = window / (8.0 * t) if spacing is None else float(spacing)
    if eta * t >= window / 2.0:
        raise ArcOverlap(f"spacing {eta!r} makes the point clusters collide for theta={theta!r}")

    positions = []
    for i in range(1, t + 1):
        positions.append(-i * eta)
    for i in range(1, t + 1):
        positions.append(2.0 * theta - i * eta)
    pts = np.array([[math.cos(a), math.sin(a)] for a in positions])
    config = PointConfig(2, pts)
    try:
        verify(config, AngleMultiset.from_pairs([(theta, t * (t - 1))]), DEFAULT_TOL)
    except UnmatchedTargets as exc:
        raise VerificationFailed(f"circle construction failed its multiplicity check: {exc}") from exc
    return config


@dataclass(frozen=True)
class GluePlan:
    """Chosen hull edges and orientations for one glue placement."""

    edge_a: tuple[int, int]
    edge_b: tuple[int, int]


def _hull_edges(config):
    hull = convex_hull_indices(config.points)
    if len(config) == 2:
        return [(0, 1), (1, 0)]
    edges = []
    for k in range(len(hull)):
        i, j = hull[k], hull[(k + 1) % len(hull)]
        edges.append((i, j))
        edges.append((j, i))
    return edges


def _place_edge_on_axis(config, edge, above):
    """Similarity-place ``edge`` on the unit segment with the rest of the
    points strictly on one side of the x-axis; returns None if any point ends
    up too close to the axis line."""
    p = config.points
    i, j = edge
    origin = p[i]
    u = p[j] - origin
    length = float(np.linalg.norm(u))
    u = u / length
    rot = np.array([[u[0], u[1]], [-u[1], u[0]]])
    new = (p - origin) @ rot.T / length
    new[i] = (0.0, 0.0)
    new[j] = (1.0, 0.0)

    others = [k for k in range(len(new)) if k not in (i, j)]
    if others:
        ys = new[others, 1]
        if np.min(np.abs(ys)) <= SEP_MIN:
            return None
        if not (np.all(ys > 0) or np.all(ys < 0)):
            return None
        if (ys[0] > 0) != above:
            new = new * np.array([1.0, -1.0])
    return new, (i, j)


def glue(a, b, targets_a=None, targets_b=None, tol=DEFAULT_TOL):
    """Join two planar configurations into one with ``len(a)+len(b)-2`` points.

    ``a`` is placed with a hull edge on the unit segment and everything else
    below the x-axis, ``b`` likewise above, so the two edge points are shared
    and every ray not contained in the axis stays distinct.

    When target multisets are supplied the union is verified; if a placement
    loses a certified ray pair the next hull edge pairing is tried, and
    SharedRayCollision is raised only after all pairings fail.
    """
    if a.dim != 2 or b.dim != 2:
        raise ValueError("glue works on planar configurations")
    union_targets = None
    if targets_a is not None or targets_b is not None:
        ta = targets_a if targets_a is not None else AngleMultiset(())
        tb = targets_b if targets_b is not None else AngleMultiset(())
        union_targets = ta.combine(tb)

    last_error = None
    for edge_a in _hull_edges(a):
        placed_a = _place_edge_on_axis(a, edge_a, above=False)
        if placed_a is None:
            continue
        for edge_b in _hull_edges(b):
            placed_b = _place_edge_on_axis(b, edge_b, above=True)
            if placed_b is None:
                continue
            pts_a, (ia, ja) = placed_a
            pts_b, (ib, jb) = placed_b
            keep_b = [k for k in range(len(pts_b)) if k not in (ib, jb)]
            merged = np.vstack([pts_a, pts_b[keep_b]])
            try:
                config = PointConfig(2, merged)
            except Exception as exc:
                last_error = exc
                continue
            if union_targets is None:
                return config
            try:
                verify(config, union_targets, tol)
                return config
            except UnmatchedTargets as exc:
                last_error = exc
                continue
    raise SharedRayCollision(f"no hull edge pairing preserved all certified rays: {last_error}")


def _fan_chain(targets):
    """Naive chain: one shared apex, one fresh ray per target occurrence.

    Places a unit-circle point per ray. Each occurrence of an angle anchors on
    some existing ray, offset by the angle on either side, skipping directions
    that come within MIN_RAY_GAP of an existing ray so no two realizations
    share a ray pair.
    """
    def circular_gap(x, y):
        g = abs(x - y) % (2.0 * math.pi)
        return min(g, 2.0 * math.pi - g)

    occurrences = targets.occurrences()
    dirs = [0.0]
    for theta in occurrences:
        placed = False
        for anchor in reversed(dirs):
            for sign in (1.0, -1.0):
                cand = (anchor + sign * theta) % (2.0 * math.pi)
                if min(circular_gap(cand, d) for d in dirs) >= MIN_RAY_GAP:
                    dirs.append(cand)
                    placed = True
                    break
            if placed:
                break
        if not placed:
            raise BudgetExceeded("fan chain could not find a free ray direction")
    pts = [np.zeros(2)] + [np.array([math.cos(d), math.sin(d)]) for d in dirs]
    return PointConfig(2, np.array(pts))


def _six_largest_distinct(ms):
    return ms.values()[:6]


def _peel_blocks(ms, big_circles=False):
    """Decompose a multiset into independently constructible blocks.

    Peeling order: angles repeated 110+ times become 22-point circle blocks
    (only when ``big_circles`` is set); any six distinct angles become a
    five-point block; an angle repeated 12+ times becomes an 8-point circle
    block; the remainder (at most five distinct values, multiplicities below
    twelve, so at most 55 occurrences) becomes one fan chain.
    """
    blocks = []
    rest = ms
    if big_circles:
        while True:
            big = [v for v, mult in rest.entries if mult >= 110]
            if not big:
                break
            blocks.append((circle_config(big[0], 11), AngleMultiset.from_pairs([(big[0], 110)])))
            rest = rest.without(big[0], 110)
    while rest.total > 0:
        if len(rest.entries) >= 6:
            six = _six_largest_distinct(rest)
            for v in six:
                rest = rest.without(v, 1)
            head, _ = construct_five_points(six)
            blocks.append((head, AngleMultiset.from_values(six)))
            continue
        max_value, max_mult = max(rest.entries, key=lambda e: e[1])
        if max_mult >= 12:
            blocks.append(
                (circle_config(max_value, 4), AngleMultiset.from_pairs([(max_value, 12)]))
            )
            rest = rest.without(max_value, 12)
            continue
        blocks.append((_fan_chain(rest), rest))
        break
    return blocks


def _glue_tree(blocks, check):
    """Glue blocks pairwise in a balanced tree.

    A linear chain would re-transform the accumulated configuration once per
    block and the rounding noise of thirty-odd similarities approaches the
    1e-9 certificate tolerance; a tree keeps every point within O(log k)
    transforms. With ``check`` set each glue verifies its union multiset and
    retries other hull edges on a ray collision.
    """
    items = list(blocks)
    while len(items) > 1:
        merged = []
        for i in range(0, len(items) - 1, 2):
            (ca, ma), (cb, mb) = items[i], items[i + 1]
            out = glue(ca, cb, ma, mb) if check else glue(ca, cb)
            merged.append((out, ma.combine(mb)))
        if len(items) % 2:
            merged.append(items[-1])
        items = merged
    return items[0][0]


def _plan(ms, budget, check=False, big_circles=False):
    """Blocks plus balanced gluing, with the exact point budget enforced."""
    if ms.total == 0:
        raise ValueError("empty multiset")
    blocks = _peel_blocks(ms, big_circles=big_circles)
    used = sum(len(cfg) for cfg, _ in blocks) - 2 * (len(blocks) - 1)
    if used > budget:
        raise BudgetExceeded(f"construction needs {used} points but only {budget} are allowed")
    return _glue_tree(blocks, check)


def realize_multiset(targets, m, m0=200):
    """Realize an angle multiset with at most ``m`` points.

    Guaranteed for m >= n/2 + 30: the planner peels six distinct angles with a
    five-point block (net three points after gluing) or twelve copies of one
    angle with a circle block (net six points), and finishes small leftovers
    with a fan chain of at most n+2 points.

    Below that threshold, angles occurring at least 110 times are first peeled
    with 22-point circle blocks; the remainder is attempted with the same
    recursion and failures surface as BudgetExceeded. ``m0`` marks the point
    count above which this mode is expected to succeed; below it the
    certificate carries a warning.
    """
    if not isinstance(targets, AngleMultiset):
        targets = AngleMultiset.from_values(targets)
    n = targets.total
    if n == 0:
        raise ValueError("empty target multiset")
    if m < 4:
        raise ValueError("realize_multiset needs m >= 4")

    warnings = []
    guaranteed = m >= n / 2.0 + 30.0

    config = _plan(targets, m, check=False, big_circles=not guaranteed)
    try:
        cert = verify(config, targets, DEFAULT_TOL)
    except UnmatchedTargets:
        # rare ray-quantum collision during some glue; rebuild with per-glue
        # verification, which retries other hull edges on a collision
        config = _plan(targets, m, check=True, big_circles=not guaranteed)
        try:
            cert = verify(config, targets, DEFAULT_TOL)
        except UnmatchedTargets as exc:
            raise VerificationFailed(
                f"multiset construction failed its certificate: {exc}"
            ) from exc

    if not guaranteed and m < m0:
        warnings.append(f"point budget {m} below m0={m0}; success is not guaranteed here")
    if warnings:
        cert = cert.with_warnings(warnings)
    return config, cert
