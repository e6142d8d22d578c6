"""High-dimensional constructions: anchor sets and Newton placement.

An anchor set for an angle theta in R^d is the 2d points {e_1..e_d} and
{f_1..f_d} with f_j = b*(1,..,1) + (a-b)*e_j for a = lam*cos(theta) and
b = lam*sin(theta)/sqrt(d-1); every pair (e_i, f_i) subtends exactly theta at
the origin, independent of lam. Moving a single point x near the origin
perturbs those d angles almost independently: the Jacobian of the cosine map
at 0 is -(sin(theta)/sqrt(d-1)) (J - I) + O(1/lam) with J the all-ones
matrix, which is invertible, so Newton iteration can steer x to any nearby
d-tuple of target angles. One movable point therefore buys d angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoverFailed, NewtonDiverged, UnmatchedTargets, VerificationFailed
from .geom import AngleMultiset, PointConfig, check_angle, verify
from .multiset import circle_config

DEFAULT_LAMBDA = 1e3
HIGHDIM_TOL = 1e-8
_NEWTON_RESIDUAL = 1e-12
_MIN_RADIUS = 1e-4


@dataclass(frozen=True)
class AnchorSet:
    """The 2d fixed points subtending ``theta`` at the origin, d times over."""

    theta: float
    d: int
    lam: float
    points: np.ndarray  # (2d, d); rows 0..d-1 are e_i, rows d..2d-1 are f_i

    @property
    def e(self):
        return self.points[: self.d]

    @property
    def f(self):
        return self.points[self.d :]


def anchor_set(theta, d, lam):
    """Build an anchor set; self-checks the d subtended angles to 1e-10."""
    theta = check_angle(theta)
    if d < 2:
        raise ValueError("d must be at least 2")
    if lam <= 0:
        raise ValueError("lam must be positive")
    a = lam * math.cos(theta)
    b = lam * math.sin(theta) / math.sqrt(d - 1)
    e = np.eye(d)
    f = np.full((d, d), b) + (a - b) * np.eye(d)
    anchors = AnchorSet(theta=theta, d=d, lam=float(lam), points=np.vstack([e, f]))
    measured = np.arccos(np.clip(cos_angles(anchors, np.zeros(d)), -1.0, 1.0))
    if np.max(np.abs(measured - theta)) > 1e-10:
        raise VerificationFailed("anchor set self-check failed")
    return anchors


def cos_angles(anchors, x):
    """cos of the angle at x between e_i and f_i, for each i."""
    u = anchors.e - x[None, :]
    w = anchors.f - x[None, :]
    nu = np.linalg.norm(u, axis=1)
    nw = np.linalg.norm(w, axis=1)
    return np.einsum("ij,ij->i", u, w) / (nu * nw)


def jacobian(anchors, x):
    """Analytic Jacobian of ``cos_angles`` with respect to x; shape (d, d)."""
    u = anchors.e - x[None, :]
    w = anchors.f - x[None, :]
    nu = np.linalg.norm(u, axis=1)[:, None]
    nw = np.linalg.norm(w, axis=1)[:, None]
    uh = u / nu
    wh = w / nw
    c = np.einsum("ij,ij->i", uh, wh)[:, None]
    return -((wh - c * uh) / nu + (uh - c * wh) / nw)


def leading_jacobian(anchors):
    """Limit of ``jacobian`` at x = 0 as lam grows: -(sin(theta)/sqrt(d-1))(J - I)."""
    d = anchors.d
    s = math.sin(anchors.theta) / math.sqrt(d - 1)
    return -s * (np.ones((d, d)) - np.eye(d))


def _newton_from(anchors, goal, x0, max_iter):
    """Damped Newton on the cosine residuals; None when this start stalls.

    The merit is the squared residual norm: the Newton direction always
    descends it while the Jacobian stays nonsingular, so a stall means the
    iterate reached a fold of the angle map.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = cos_angles(anchors, x) - goal
    merit = float(r @ r)
    for _ in range(max_iter):
        if float(np.max(np.abs(r))) < _NEWTON_RESIDUAL:
            return x
        try:
            step = np.linalg.solve(jacobian(anchors, x), -r)
        except np.linalg.LinAlgError:
            return None
        scale = 1.0
        for _ in range(50):
            x_try = x + scale * step
            r_try = cos_angles(anchors, x_try) - goal
            merit_try = float(r_try @ r_try)
            if math.isfinite(merit_try) and merit_try < merit * (1.0 - 1e-4 * scale):
                x, r, merit = x_try, r_try, merit_try
                break
            scale *= 0.5
        else:
            return None
        if np.linalg.norm(x) > anchors.lam / 2.0:
            return None
    return x if float(np.max(np.abs(r))) < _NEWTON_RESIDUAL else None


def place_point(anchors, targets, max_iter=60, starts=24):
    """Newton-place one point so the i-th anchor pair subtends ``targets[i]``.

    Short target lists are padded with the anchor angle. The iteration starts
    at the origin, where the padded tuple is exact; target tuples near a fold
    of the angle map can have their solution branch disconnected from the
    origin, so fixed pseudo-random starts of growing spread are tried before
    giving up with NewtonDiverged (callers then shrink their radius).
    """
    d = anchors.d
    t = [check_angle(v) for v in targets]
    if len(t) > d:
        raise ValueError(f"at most {d} targets per movable point")
    t = np.array(t + [anchors.theta] * (d - len(t)))
    goal = np.cos(t)

    x = _newton_from(anchors, goal, np.zeros(d), max_iter)
    if x is not None:
        return x
    rng = np.random.Generator(np.random.Philox(key=np.array([7, 0], dtype=np.uint64)))
    scales = (0.1, 0.3, 1.0, 3.0)
    for attempt in range(starts):
        spread = scales[min(attempt // 6, len(scales) - 1)]
        x = _newton_from(anchors, goal, rng.normal(0.0, spread, d), max_iter)
        if x is not None:
            return x
    raise NewtonDiverged(
        f"no Newton start converged for targets around {anchors.theta:.4f}"
    )


@dataclass(frozen=True)
class CoverCenter:
    """A validated neighbourhood: targets within ``radius`` of ``theta_c`` are
    reachable by Newton placement against ``anchors``."""

    theta_c: float
    radius: float
    anchors: AnchorSet


def _probe_tuples(theta_c, radius, d):
    probes = [
        [theta_c + radius] * d,
        [theta_c - radius] * d,
        [theta_c + (radius if i % 2 == 0 else -radius) for i in range(d)],
    ]
    for i in range(min(d, 2)):
        tup = [theta_c] * d
        tup[i] = theta_c + radius
        probes.append(tup)
    return probes


def _validate_radius(theta_c, radius, d, lam):
    anchors = anchor_set(theta_c, d, lam)
    for tup in _probe_tuples(theta_c, radius, d):
        if not all(0.0 < v < math.pi for v in tup):
            return None
        try:
            place_point(anchors, tup)
        except NewtonDiverged:
            return None
    return anchors


def build_cover(eps, d, lam=DEFAULT_LAMBDA, r0=0.05):
    """Greedy cover of [eps, pi - eps] by validated Newton neighbourhoods.

    Centers are spaced two radii apart; each candidate radius is probed by
    actually running the placement at the radius endpoints and halved until
    the probes converge. Raises CoverFailed when the radius underflows, which
    signals that lam is too small.
    """
    if not 0.0 < eps < math.pi / 2.0:
        raise ValueError("eps must lie in (0, pi/2)")
    centers = []
    cursor = eps
    upper = math.pi - eps
    while cursor < upper:
        r = r0
        while True:
            if r < _MIN_RADIUS:
                raise CoverFailed(f"validated radius underflowed at {cursor:.4f}")
            theta_c = min(cursor + r, upper)
            anchors = _validate_radius(theta_c, r, d, lam)
            if anchors is not None:
                centers.append(CoverCenter(theta_c=theta_c, radius=r, anchors=anchors))
                cursor = theta_c + r
                break
            r *= 0.5
    return centers


def _group_targets(values, d, lam):
    """Split sorted targets into runs of at most d, each with a placed point.

    Greedy: try the largest window first and shrink it until Newton placement
    accepts it. The anchor angle sits at the window edge farthest from pi/2,
    so every deviation points toward pi/2: the reachable neighbourhood of the
    angle map is widest in that direction, while antisymmetric deviations
    around a midpoint center fold much earlier. Returns (center, window,
    solved point) triples.
    """
    groups = []
    i = 0
    while i < len(values):
        size = min(d, len(values) - i)
        placed = None
        while size >= 1 and placed is None:
            window = values[i : i + size]
            mid = 0.5 * (window[0] + window[-1])
            radius = max(window[-1] - window[0], _MIN_RADIUS)
            near, far = (window[0], window[-1]) if mid <= math.pi / 2.0 else (window[-1], window[0])
            for theta_c in (near, mid, far):
                try:
                    anchors = anchor_set(theta_c, d, lam)
                    x = place_point(anchors, window)
                    placed = (CoverCenter(theta_c, radius, anchors), window, x)
                    break
                except NewtonDiverged:
                    continue
            if placed is None:
                size -= 1
        if placed is None:
            raise CoverFailed(f"no window size accepted target {values[i]:.6f}")
        groups.append(placed)
        i += len(placed[1])
    return groups


def realize_highdim(targets, d, lam=DEFAULT_LAMBDA, eps=None):
    """Realize angles bounded away from 0 and pi with anchor blocks in R^d.

    Distinct targets are sorted and packed into groups of at most d; each
    group gets its own anchor set (translated far from the others along the
    first axis so the blocks cannot interact) plus a single Newton-placed
    movable point realizing the whole group. Angles repeated more than
    2d(2d+1) times are first peeled with planar circle blocks; leftover
    multiplicities are handled by running one grouped construction per
    multiplicity layer.

    Returns the configuration and a certificate at tolerance 1e-8.
    """
    if not isinstance(targets, AngleMultiset):
        targets = AngleMultiset.from_values(targets)
    if targets.total == 0:
        raise ValueError("empty target multiset")
    if d < 2:
        raise ValueError("d must be at least 2")

    values = targets.values()
    if eps is None:
        eps = min(min(values), math.pi - max(values)) * 0.999
    for v in values:
        if not eps <= v <= math.pi - eps:
            raise ValueError(f"target {v!r} lies outside [eps, pi - eps]")

    blocks = []
    cap = 2 * d * (2 * d + 1)
    rest = targets
    for v, mult in list(targets.entries):
        while rest.multiplicity(v) > cap:
            blocks.append(("circle", circle_config(v, 2 * d + 1)))
            rest = rest.without(v, cap)

    layer = 0
    while rest.total > 0:
        layer_values = sorted(rest.values())
        for group in _group_targets(layer_values, d, lam):
            blocks.append(("anchor", group))
        for v in layer_values:
            rest = rest.without(v, 1)
        layer += 1

    offset_step = 10.0 * lam
    all_points = []
    movable = 0
    anchors_total = 0
    for k, (kind, payload) in enumerate(blocks):
        shift = np.zeros(d)
        shift[0] = (k + 1) * offset_step
        if kind == "circle":
            pts = np.zeros((len(payload), d))
            pts[:, :2] = payload.points
            all_points.append(pts + shift)
        else:
            center, window, x = payload
            all_points.append(center.anchors.points + shift)
            all_points.append(x[None, :] + shift)
            movable += 1
            anchors_total += len(center.anchors.points)

    config = PointConfig(d, np.vstack(all_points))
    try:
        cert = verify(config, targets, HIGHDIM_TOL)
    except UnmatchedTargets as exc:
        raise VerificationFailed(f"high-dimensional construction failed its certificate: {exc}") from exc
    return config, cert
