"""Deterministic planar constructions.

Three layers:

* ``construct_five_points`` realizes any six distinct angles with five points
  by a closed-form fan of rays from a common base point, sized triangle by
  triangle with the law of sines.
* ``add_point_two_angles`` extends a configuration by one point realizing two
  further angles, using the continuity of the subtended angle along a ray.
* ``realize_planar`` drives both to realize up to 2m-4 distinct angles with m
  points, optionally in convex position.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import (
    BracketingFailed,
    BudgetExceeded,
    ConvexityFailed,
    MaxAngleViolated,
    NotDistinct,
    VerificationFailed,
    UnmatchedTargets,
)
from .geom import (
    DEFAULT_TOL,
    AngleMultiset,
    PointConfig,
    angle_at,
    check_angle,
    is_convex_position,
    verify,
)

# Gap thresholds between sorted input angles: below NOT_DISTINCT_GAP two
# inputs count as equal; below WARN_GAP the construction is attempted but the
# certificate carries a conditioning warning.
NOT_DISTINCT_GAP = 1e-12
WARN_GAP = 1e-9

# Point order of the five-point construction. The fan apex is C; the widest
# angle is realized at C between the rays toward A and E.
FIVE_POINT_LABELS = ("A", "B", "C", "D", "E")
_A, _B, _C, _D, _E = range(5)

# (ray_end, apex, ray_end) index triples paired with the sorted angle they
# realize (position in the descending 6-tuple).
FIVE_POINT_ROLES = (
    ((_A, _C, _E), 0),
    ((_B, _C, _E), 1),
    ((_A, _B, _D), 2),
    ((_A, _B, _C), 3),
    ((_B, _C, _D), 4),
    ((_C, _D, _E), 5),
)


class FivePointLayout:
    """Labeled coordinates and realized roles of the five-point construction."""

    __slots__ = ("coords", "angles")

    def __init__(self, coords, angles):
        self.coords = dict(coords)
        self.angles = tuple(angles)

    def to_config(self):
        return PointConfig(2, np.array([self.coords[label] for label in FIVE_POINT_LABELS]))

    def feasibility_sums(self):
        """The three derived triangle angle sums; each must stay below pi."""
        t1, t2, t3, t4, t5, t6 = self.angles
        return (t2 - t5 + t6, t5 + t3 - t4, t1 - t2 + t4)


def _unit(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def _check_distinct_sorted(angles, n):
    if len(angles) != n:
        raise ValueError(f"expected {n} angles, got {len(angles)}")
    ths = sorted((check_angle(v) for v in angles), reverse=True)
    warnings = []
    for i in range(n - 1):
        gap = ths[i] - ths[i + 1]
        if gap <= NOT_DISTINCT_GAP:
            raise NotDistinct(f"angles {ths[i]!r} and {ths[i + 1]!r} are not distinct")
        if gap < WARN_GAP:
            warnings.append(f"angle gap {gap:.3e} below {WARN_GAP:.0e}; conditioning may suffer")
    return ths, warnings


def five_point_layout(angles):
    """Closed-form coordinates realizing six distinct angles with five points.

    The six angles, sorted decreasing as t1 > ... > t6, are realized as
    t1 at C (rays to A, E), t2 at C (rays to B, E), t3 at B (rays to A, D),
    t4 at B (rays to A, C), t5 at C (rays to B, D) and t6 at D (rays to C, E).
    C sits at the origin, E at (1, 0); D, B, A sit on rays from C at angles
    t2 - t5 < t2 < t1 above the base line, with radii fixed by the law of
    sines so the remaining apex angles come out right. The three triangle
    feasibility sums are automatically below pi for sorted distinct input.
    """
    ths, _ = _check_distinct_sorted(angles, 6)
    t1, t2, t3, t4, t5, t6 = ths

    ray_d = t2 - t5
    cd = math.sin(ray_d + t6) / math.sin(t6)
    d = cd * _unit(ray_d)
    cb = cd * math.sin(t5 + t3 - t4) / math.sin(t3 - t4)
    b = cb * _unit(t2)
    ca = cb * math.sin(t4) / math.sin(t1 - t2 + t4)
    a = ca * _unit(t1)

    coords = {"A": a, "B": b, "C": np.zeros(2), "D": d, "E": np.array([1.0, 0.0])}
    return FivePointLayout(coords, ths)


def construct_five_points(angles):
    """Five points realizing six distinct angles, plus a verified certificate.

    Raises NotDistinct for duplicate inputs and VerificationFailed if the
    closed-form output does not certify (which would be an internal bug).
    """
    ths, warnings = _check_distinct_sorted(angles, 6)
    layout = five_point_layout(ths)
    config = layout.to_config()
    try:
        cert = verify(config, AngleMultiset.from_values(ths), DEFAULT_TOL)
    except UnmatchedTargets as exc:
        raise VerificationFailed(f"five-point construction failed its certificate: {exc}") from exc
    if warnings:
        cert = cert.with_warnings(warnings)
    return config, cert


def _angle_between(u, w):
    nu = np.linalg.norm(u)
    nw = np.linalg.norm(w)
    return math.acos(max(-1.0, min(1.0, float(u @ w) / (nu * nw))))


def _ray_line_parameter(origin, direction, p, q):
    """Parameter t with origin + t*direction on line pq, or None if parallel."""
    e = q - p
    denom = direction[0] * (-e[1]) + direction[1] * e[0]
    if abs(denom) < 1e-300:
        return None
    rhs = p - origin
    return (rhs[0] * (-e[1]) + rhs[1] * e[0]) / denom


def _rotate(v, theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def _slide_point_to_angle(origin, direction, pa, pc, target, t_low, t_high=None):
    """Find t > t_low on the ray so the angle subtended by pa, pc equals target.

    The subtended angle falls continuously from pi at the line crossing toward
    0 at infinity, but is not assumed monotone: the bracket is grown by
    doubling from t_low until a sign change appears, then bisected.
    """

    def f(t):
        x = origin + t * direction
        return _angle_between(pa - x, pc - x) - target

    step = max(1e-9 * max(t_low, 1.0), 1e-12)
    lo = t_low + step
    f_lo = f(lo)
    if f_lo < 0.0:
        raise BracketingFailed("angle already below target at the bracket start")

    if t_high is not None and t_high > lo and f(t_high) < 0.0:
        hi, f_hi = t_high, f(t_high)
    else:
        hi = lo
        f_hi = f_lo
        for _ in range(200):
            step *= 2.0
            hi = t_low + step
            f_hi = f(hi)
            if f_hi < 0.0:
                break
            lo, f_lo = hi, f_hi
        if f_hi >= 0.0:
            raise BracketingFailed("no sign change found after bracket expansion")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < 1e-13:
            lo = hi = mid
            break
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def add_point_two_angles(config, triple, theta_new1, theta_new2):
    """Append one point realizing two further angles.

    ``triple`` is (a, b, c) where the angle at b between the rays toward a and
    c is the maximum angle of the whole target set. The new point d goes on
    the ray from b that makes ``theta_new1`` with the ray b->a (strictly
    between b->a and b->c), positioned so the angle at d between a and c is
    ``theta_new2``. Sliding d from the ac line crossing to infinity moves that
    angle continuously from pi to 0, so any value is reachable.
    """
    theta_new1 = check_angle(theta_new1, "theta_new1")
    theta_new2 = check_angle(theta_new2, "theta_new2")
    ai, bi, ci = triple
    base = angle_at(config, ai, bi, ci)
    if theta_new1 >= base - NOT_DISTINCT_GAP:
        raise MaxAngleViolated(
            f"new angle {theta_new1!r} must stay below the anchor angle {base!r}"
        )
    p = config.points
    pa, pb, pc = p[ai], p[bi], p[ci]
    ua = (pa - pb) / np.linalg.norm(pa - pb)
    uc = (pc - pb) / np.linalg.norm(pc - pb)
    side = 1.0 if ua[0] * uc[1] - ua[1] * uc[0] >= 0 else -1.0
    direction = _rotate(ua, side * theta_new1)

    t_cross = _ray_line_parameter(pb, direction, pa, pc)
    if t_cross is None or t_cross <= 0:
        raise BracketingFailed("ray does not cross the segment side of ac")
    t = _slide_point_to_angle(pb, direction, pa, pc, theta_new2, t_cross)
    new_point = pb + t * direction
    return PointConfig(2, np.vstack([p, new_point]))


def _pad_angles(values, count):
    """Synthesize ``count`` distinct pad angles strictly inside (min/2, min)."""
    if count <= 0:
        return []
    tmin = min(values)
    pads = [tmin * (0.5 + (j + 1) / (2.0 * (count + 1))) for j in range(count)]
    return pads


def _build_plain(full_desc):
    """Non-convex driver: five-point seed, then pairwise ray extensions.

    The seed takes the largest angle together with the five smallest; the
    remaining angles are consumed two at a time in decreasing order, the
    larger of each pair giving the new ray direction at the seed apex.
    """
    seed = [full_desc[0]] + full_desc[-5:]
    rest = full_desc[1:-5]
    layout = five_point_layout(seed)
    config = layout.to_config()
    for i in range(0, len(rest), 2):
        config = add_point_two_angles(config, (_A, _C, _E), rest[i], rest[i + 1])
    return config


def _build_convex(full_desc):
    """Convex driver: same seed, remaining angles added on rays inside the fan.

    Remaining angles come in increasing pairs (phi_ray, phi_apex). Each step
    places F on the ray from C at phi_ray above the base line; along that ray
    the angle subtended by A and the current B falls from pi (at the AB
    crossing) to below phi_apex (at the crossing with the current BD line), so
    the bisection bracket stays inside the convex bound. Afterwards the old B
    takes over the D role and F becomes B.
    """
    seed = [full_desc[0]] + full_desc[-5:]
    rest = sorted(full_desc[1:-5])
    layout = five_point_layout(seed)
    config = layout.to_config()
    a_idx, b_idx, d_idx = _A, _B, _D
    origin = config.points[_C]

    for i in range(0, len(rest), 2):
        phi_ray, phi_apex = rest[i], rest[i + 1]
        direction = _unit(phi_ray)
        p = config.points
        t_cross = _ray_line_parameter(origin, direction, p[a_idx], p[b_idx])
        if t_cross is None or t_cross <= 0:
            raise ConvexityFailed("fan ray misses the current ab segment")
        t_bound = _ray_line_parameter(origin, direction, p[b_idx], p[d_idx])
        if t_bound is not None and t_bound <= t_cross:
            t_bound = None
        t = _slide_point_to_angle(origin, direction, p[a_idx], p[b_idx], phi_apex, t_cross, t_bound)
        new_point = origin + t * direction
        config = PointConfig(2, np.vstack([p, new_point]))
        d_idx, b_idx = b_idx, len(config) - 1
    return config


def realize_planar(targets, m, convex=False):
    """Realize distinct target angles with exactly ``m`` points in the plane.

    Requires m >= 5 and n <= 2m-4 targets. Shorter target lists (and odd
    counts) are padded internally with synthetic angles below the smallest
    target so the pairwise extension always consumes angles two at a time;
    the output always has exactly m points and only the real targets are
    certified.

    One case beyond the budget is accepted: n == 2m-3 where the smallest
    target equals the difference of the two largest. The first n-1 targets
    are constructed (non-convex path) and the last one is certified from the
    instance the fan produces for free at the seed apex.
    """
    if m < 5:
        raise ValueError("realize_planar needs m >= 5")
    ths, warnings = _check_distinct_sorted(targets, len(targets))
    n = len(ths)
    budget = 2 * m - 4
    if n > budget:
        diff_ok = abs(ths[-1] - (ths[0] - ths[1])) <= NOT_DISTINCT_GAP
        if n == budget + 1 and diff_ok and not convex:
            construct = ths[:-1]
        elif n == budget + 1 and diff_ok and convex:
            raise BudgetExceeded(
                "difference-angle overflow is only supported on the non-convex path"
            )
        else:
            raise BudgetExceeded(f"{n} angles exceed the budget 2m-4 = {budget}")
    else:
        construct = ths

    pads = _pad_angles(construct, budget - len(construct))
    full = sorted(construct + pads, reverse=True)
    for i in range(len(full) - 1):
        if full[i] - full[i + 1] <= NOT_DISTINCT_GAP:
            raise NotDistinct("padding collided with a target; adjust targets")

    config = _build_convex(full) if convex else _build_plain(full)
    try:
        cert = verify(config, AngleMultiset.from_values(ths), DEFAULT_TOL)
    except UnmatchedTargets as exc:
        raise VerificationFailed(f"planar construction failed its certificate: {exc}") from exc
    if convex and not is_convex_position(config):
        raise ConvexityFailed("convex construction produced a non-convex configuration")
    if warnings:
        cert = cert.with_warnings(warnings)
    return config, cert
