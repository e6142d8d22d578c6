"""Core geometry: point configurations, angle enumeration, certificates.

Conventions used throughout the package:

* Angles are plain floats in radians. Realization targets always lie strictly
  inside (0, pi). The angle of a point triple ``(a, apex, c)`` is measured at
  ``apex`` between the rays ``apex -> a`` and ``apex -> c``.
* An angle with multiplicity k needs k realizations by pairwise *distinct ray
  pairs*. Ray identity is decided after quantizing unit directions to
  ``RAY_TOL`` (an angular quantum of 1e-8); collinear points on the same side
  of an apex therefore count as one ray. Floating point has no canonical
  notion of "same ray", so this quantum is a documented choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import DegenerateRay, DimensionUnsupported, UnmatchedTargets

SEP_MIN = 1e-9       # minimum point separation (at normalized scale)
RAY_TOL = 1e-8       # angular quantum for ray identity
DEFAULT_TOL = 1e-9   # certificate tolerance for closed-form constructions
SOLVER_TOL = 1e-6    # certificate tolerance for numerically solved configs

# Flat-instance cutoff: arccos loses sqrt(machine eps) ~ 2e-8 of accuracy at
# the interval ends, so exactly collinear triples can measure pi - 2e-8.
# Instances this close to 0 or pi are treated as flat and dropped.
FLAT_TOL = 1e-7

_FNV_OFFSET = np.uint64(14695981039346656037)
_FNV_PRIME = np.uint64(1099511628211)


def check_angle(value, name="angle"):
    """Validate a target angle: finite and strictly inside (0, pi)."""
    v = float(value)
    if not math.isfinite(v) or not 0.0 < v < math.pi:
        raise ValueError(f"{name} must lie strictly between 0 and pi, got {value!r}")
    return v


@dataclass(frozen=True)
class AngleMultiset:
    """Target angles with multiplicities, sorted by strictly decreasing angle."""

    entries: tuple[tuple[float, int], ...]

    def __post_init__(self):
        prev = math.pi
        for value, mult in self.entries:
            check_angle(value)
            if not (isinstance(mult, int) and mult >= 1):
                raise ValueError(f"multiplicity must be a positive integer, got {mult!r}")
            if value >= prev:
                raise ValueError("entries must be strictly decreasing by angle")
            prev = value

    @classmethod
    def from_pairs(cls, pairs):
        """Build from (angle, multiplicity) pairs; equal angles are merged."""
        acc = {}
        for value, mult in pairs:
            v = float(value)
            acc[v] = acc.get(v, 0) + int(mult)
        return cls(tuple(sorted(acc.items(), key=lambda e: -e[0])))

    @classmethod
    def from_values(cls, values):
        """Build from raw angle values; exact duplicates become multiplicities."""
        return cls.from_pairs((v, 1) for v in values)

    @property
    def total(self):
        return sum(mult for _, mult in self.entries)

    def occurrences(self):
        """All target occurrences expanded, in decreasing order."""
        out = []
        for value, mult in self.entries:
            out.extend([value] * mult)
        return out

    def values(self):
        return [value for value, _ in self.entries]

    def multiplicity(self, value):
        for v, mult in self.entries:
            if v == value:
                return mult
        return 0

    def combine(self, other):
        return AngleMultiset.from_pairs(list(self.entries) + list(other.entries))

    def without(self, value, count):
        """Remove ``count`` occurrences of ``value``; drops the entry at zero."""
        out = []
        found = False
        for v, mult in self.entries:
            if v == value and not found:
                found = True
                if mult < count:
                    raise ValueError("cannot remove more occurrences than present")
                if mult > count:
                    out.append((v, mult - count))
            else:
                out.append((v, mult))
        if not found:
            raise ValueError(f"angle {value!r} not present")
        return AngleMultiset(tuple(out))


class PointConfig:
    """Immutable ordered point configuration in R^d.

    ``points`` is an (m, dim) float array, write-protected after construction.
    Pairwise separation below ``SEP_MIN`` is rejected: arccos conditioning
    degrades badly for nearly coincident points.
    """

    __slots__ = ("dim", "points")

    def __init__(self, dim, points, *, validate=True):
        pts = np.array(points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-d array of shape (m, dim)")
        m, d = pts.shape
        if d != dim:
            raise ValueError(f"point rows have length {d}, expected dim={dim}")
        if validate:
            if dim < 2:
                raise ValueError("dim must be at least 2")
            if m < 2:
                raise ValueError("a configuration needs at least 2 points")
            if not np.all(np.isfinite(pts)):
                raise ValueError("points must be finite")
            diff = pts[:, None, :] - pts[None, :, :]
            d2 = np.einsum("ijk,ijk->ij", diff, diff)
            np.fill_diagonal(d2, np.inf)
            if d2.min() <= SEP_MIN * SEP_MIN:
                i, j = np.unravel_index(int(d2.argmin()), d2.shape)
                raise DegenerateRay(f"points {i} and {j} are closer than {SEP_MIN}")
        pts.setflags(write=False)
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "points", pts)

    def __setattr__(self, name, value):
        raise AttributeError("PointConfig is immutable")

    @property
    def m(self):
        return self.points.shape[0]

    def __len__(self):
        return self.points.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, PointConfig)
            and self.dim == other.dim
            and np.array_equal(self.points, other.points)
        )

    def __repr__(self):
        return f"PointConfig(dim={self.dim}, m={self.m})"


@dataclass(frozen=True)
class AngleInstance:
    """One realized angle: apex index plus a canonical unordered ray pair."""

    apex: int
    ray_a: tuple[float, ...]
    ray_b: tuple[float, ...]
    measured: float

    def key(self):
        """Quantized identity of the ray pair; equal keys mean the same realization."""
        qa = tuple(int(round(c / RAY_TOL)) for c in self.ray_a)
        qb = tuple(int(round(c / RAY_TOL)) for c in self.ray_b)
        return (self.apex,) + tuple(sorted((qa, qb)))


@dataclass(frozen=True)
class CertificateAssignment:
    occurrence: int
    target: float
    instance: AngleInstance


@dataclass(frozen=True)
class Certificate:
    """Witness matching every target occurrence to a distinct realized angle."""

    assignments: tuple[CertificateAssignment, ...]
    tolerance: float
    warnings: tuple[str, ...] = ()

    def with_warnings(self, extra):
        return Certificate(self.assignments, self.tolerance, self.warnings + tuple(extra))


def angle_at(config, a, apex, c):
    """Angle at ``apex`` between the rays toward points ``a`` and ``c``.

    Returns a value in [0, pi]; exactly collinear triples give 0 or pi, which
    callers filter. The arccos argument is clamped into [-1, 1] since rounding
    can push it out by about 1e-16.
    """
    if len({a, apex, c}) < 3:
        raise ValueError("a, apex, c must be three distinct indices")
    p = config.points
    u = p[a] - p[apex]
    w = p[c] - p[apex]
    nu = math.sqrt(float(u @ u))
    nw = math.sqrt(float(w @ w))
    if nu < SEP_MIN or nw < SEP_MIN:
        raise DegenerateRay(f"ray from {apex} shorter than {SEP_MIN}")
    return math.acos(max(-1.0, min(1.0, float(u @ w) / (nu * nw))))


class _InstanceTable:
    """Columnar store of deduplicated angle instances for one configuration.

    Kept as flat arrays because glued and high-dimensional configurations can
    produce hundreds of thousands of instances; building Python objects for
    each would dominate runtime. ``AngleInstance`` objects are materialized
    lazily for certificate assignments and for ``enumerate_angles``.
    """

    __slots__ = ("config", "apex", "ia", "ic", "measured", "keys", "_unit", "_quant", "raw_count")

    def __init__(self, config):
        p = config.points
        m = len(p)
        dim = config.dim
        diff = p[None, :, :] - p[:, None, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        np.fill_diagonal(dist, 1.0)
        unit = diff / dist[:, :, None]
        quant = np.rint(unit / RAY_TOL).astype(np.int64)
        with np.errstate(over="ignore"):
            h = np.full((m, m), _FNV_OFFSET, dtype=np.uint64)
            for k in range(dim):
                h = (h ^ quant[:, :, k].astype(np.uint64)) * _FNV_PRIME

        per_apex = (m - 1) * (m - 2) // 2
        total = m * per_apex
        apex_col = np.empty(total, dtype=np.int64)
        ia_col = np.empty(total, dtype=np.int64)
        ic_col = np.empty(total, dtype=np.int64)
        meas = np.empty(total, dtype=float)
        ha = np.empty(total, dtype=np.uint64)
        hc = np.empty(total, dtype=np.uint64)
        if m >= 3:
            iu, jv = np.triu_indices(m - 1, 1)
            pos = 0
            for apex in range(m):
                others = np.concatenate((np.arange(apex), np.arange(apex + 1, m)))
                u = unit[apex, others]
                g = np.clip(u @ u.T, -1.0, 1.0)
                sl = slice(pos, pos + per_apex)
                apex_col[sl] = apex
                ia_col[sl] = others[iu]
                ic_col[sl] = others[jv]
                meas[sl] = np.arccos(g[iu, jv])
                ha[sl] = h[apex, others[iu]]
                hc[sl] = h[apex, others[jv]]
                pos += per_apex

        keep = (ha != hc) & (meas > FLAT_TOL) & (meas < math.pi - FLAT_TOL)
        with np.errstate(over="ignore"):
            lo = np.minimum(ha, hc)
            hi = np.maximum(ha, hc)
            key = _FNV_OFFSET
            for part in (apex_col.astype(np.uint64), lo, hi):
                key = (key ^ part) * _FNV_PRIME
        kept = np.nonzero(keep)[0]
        _, first = np.unique(key[kept], return_index=True)
        rows = np.sort(kept[first])

        self.config = config
        self.apex = apex_col[rows]
        self.ia = ia_col[rows]
        self.ic = ic_col[rows]
        self.measured = meas[rows]
        self.keys = key[rows]
        self._unit = unit
        self._quant = quant
        self.raw_count = total

    @property
    def size(self):
        return len(self.measured)

    def instance(self, row):
        apex = int(self.apex[row])
        ia = int(self.ia[row])
        ic = int(self.ic[row])
        qa = tuple(int(v) for v in self._quant[apex, ia])
        qc = tuple(int(v) for v in self._quant[apex, ic])
        ra = tuple(float(v) for v in self._unit[apex, ia])
        rc = tuple(float(v) for v in self._unit[apex, ic])
        if qc < qa:
            ra, rc = rc, ra
        return AngleInstance(apex=apex, ray_a=ra, ray_b=rc, measured=float(self.measured[row]))


def enumerate_angles(config):
    """All realized angles of ``config`` as deduplicated instances.

    Before deduplication there are exactly 3*C(m,3) apex/pair combinations.
    Instances whose canonical ray pairs coincide at the same apex are merged,
    and flat instances (measured angle at 0 or pi within ``RAY_TOL``) are
    dropped.
    """
    table = _InstanceTable(config)
    return [table.instance(i) for i in range(table.size)]


def verify(config, targets, tol=DEFAULT_TOL):
    """Match every target occurrence to a distinct realized angle within ``tol``.

    Runs maximum bipartite matching rather than a greedy sweep: repeated
    targets close to several instances must not fail due to match order.
    Raises :class:`UnmatchedTargets` if any occurrence cannot be matched;
    never reports success on a partial match.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(targets, AngleMultiset):
        occ = targets.occurrences()
    else:
        occ = sorted((check_angle(v) for v in targets), reverse=True)
    if not occ:
        return Certificate((), float(tol))

    table = _InstanceTable(config)
    order = np.argsort(table.measured, kind="stable")
    sorted_meas = table.measured[order]

    col_index = {}
    cols = []
    indices = []
    indptr = [0]
    for target in occ:
        lo = np.searchsorted(sorted_meas, target - tol, side="left")
        hi = np.searchsorted(sorted_meas, target + tol, side="right")
        for row in order[lo:hi]:
            r = int(row)
            j = col_index.get(r)
            if j is None:
                j = len(cols)
                col_index[r] = j
                cols.append(r)
            indices.append(j)
        indptr.append(len(indices))

    n_occ = len(occ)
    n_cols = len(cols)
    if n_cols == 0:
        raise UnmatchedTargets(list(enumerate(occ)))
    graph = csr_matrix(
        (np.ones(len(indices), dtype=np.int8), np.array(indices), np.array(indptr)),
        shape=(n_occ, n_cols),
    )
    match = maximum_bipartite_matching(graph, perm_type="column")
    unmatched = [(i, occ[i]) for i in range(n_occ) if match[i] < 0]
    if unmatched:
        raise UnmatchedTargets(unmatched)

    assignments = tuple(
        CertificateAssignment(occurrence=i, target=occ[i], instance=table.instance(cols[int(match[i])]))
        for i in range(n_occ)
    )
    return Certificate(assignments, float(tol))


def check_certificate(config, certificate):
    """Recompute every assigned instance from coordinates and re-assert the match.

    Returns True when all assignments hold within the certificate tolerance and
    the assigned ray pairs are pairwise distinct.
    """
    seen = set()
    p = config.points
    for a in certificate.assignments:
        inst = a.instance
        k = inst.key()
        if k in seen:
            return False
        seen.add(k)
        if abs(inst.measured - a.target) > certificate.tolerance:
            return False
        # the stored rays must match some pair of actual points at that apex
        apex = inst.apex
        dirs = p - p[apex]
        norms = np.linalg.norm(dirs, axis=1)
        norms[apex] = 1.0
        units = dirs / norms[:, None]
        qa = np.rint(np.array(inst.ray_a) / RAY_TOL).astype(np.int64)
        qb = np.rint(np.array(inst.ray_b) / RAY_TOL).astype(np.int64)
        q = np.rint(units / RAY_TOL).astype(np.int64)
        ok_a = np.any(np.all(q == qa, axis=1))
        ok_b = np.any(np.all(q == qb, axis=1))
        if not (ok_a and ok_b):
            return False
    return True


def plane_gauge(points):
    """Similarity parameters mapping a planar point list to the canonical frame.

    Returns (origin, rotation, inv_scale, flip): a point p maps to
    ``((p - origin) @ rotation.T) * inv_scale`` followed by a y sign flip when
    ``flip`` is negative. Directions transform with the rotation and the flip
    only.
    """
    pts = np.asarray(points, dtype=float)
    origin = pts[0]
    u = pts[1] - origin
    length = float(np.linalg.norm(u))
    if length < SEP_MIN:
        raise DegenerateRay("first two points coincide")
    u = u / length
    rot = np.array([[u[0], u[1]], [-u[1], u[0]]])
    mapped = (pts - origin) @ rot.T / length
    flip = 1.0
    for i in range(2, len(mapped)):
        if abs(mapped[i, 1]) > SEP_MIN:
            if mapped[i, 1] > 0:
                flip = -1.0
            break
    return origin, rot, 1.0 / length, flip


def normalize_similarity(config):
    """Map the configuration by a similarity sending point 0 to the origin and
    point 1 to the first unit vector.

    For dim == 2 the output is additionally reflected, when necessary, so the
    lowest-index point off the new x-axis has negative second coordinate; this
    gives a canonical representative of the similarity class.
    """
    p = config.points
    if config.dim == 2:
        origin, rot, inv_scale, flip = plane_gauge(p)
        new = (p - origin) @ rot.T * inv_scale
        new[:, 1] *= flip
    else:
        v1 = p[0]
        u = p[1] - v1
        length = float(np.linalg.norm(u))
        if length < SEP_MIN:
            raise DegenerateRay("first two points coincide")
        u = u / length
        e1 = np.zeros(config.dim)
        e1[0] = 1.0
        w = u - e1
        wn = float(np.linalg.norm(w))
        if wn < 1e-12:
            q = np.eye(config.dim)
        else:
            w = w / wn
            q = np.eye(config.dim) - 2.0 * np.outer(w, w)
        new = (p - v1) @ q.T / length

    new[0] = 0.0
    new[1] = 0.0
    new[1, 0] = 1.0
    return PointConfig(config.dim, new)


def convex_hull_indices(points):
    """Indices of strict convex hull vertices in counterclockwise order.

    Collinear points interior to a hull edge are not vertices. Uses the
    monotone chain with a cross-product threshold relative to the bounding-box
    scale, so exact edge midpoints are classified as non-vertices.
    """
    pts = np.asarray(points, dtype=float)
    m = len(pts)
    if m < 3:
        return list(range(m))
    scale = max(float(np.ptp(pts[:, 0])), float(np.ptp(pts[:, 1])), 1e-300)
    eps = 1e-12 * scale * scale
    order = sorted(range(m), key=lambda i: (pts[i, 0], pts[i, 1]))

    def cross(o, a, b):
        return (pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1]) - (
            pts[a, 1] - pts[o, 1]
        ) * (pts[b, 0] - pts[o, 0])

    lower = []
    for i in order:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) <= eps:
            lower.pop()
        lower.append(i)
    upper = []
    for i in reversed(order):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], i) <= eps:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def is_convex_position(config):
    """True iff every point is a strict vertex of the convex hull (dim 2 only)."""
    if config.dim != 2:
        raise DimensionUnsupported("convex position test requires dim == 2")
    if len(config) < 3:
        raise ValueError("convex position needs at least 3 points")
    return len(convex_hull_indices(config.points)) == len(config)
