"""Realizability decisions: closed-form criteria, numerical search, Monte Carlo.

``solve_numeric`` searches for a configuration of m points in R^d whose
angles match a target multiset. Targets are assigned to distinct apex/ray-pair
slots; for each assignment a damped least-squares descent (Levenberg style)
runs on gauge-fixed coordinates, minimizing the sum of squared cosine errors.
Objectives live in cosines, not radians: the arccos derivative blows up near
0 and pi while the cosine stays smooth.

A "Realized" answer always carries a certificate re-verified from the
returned coordinates by independent enumeration. "NotFound" is *not* a proof
of unrealizability; the search is a semi-decision and its misses can only
depress the Monte Carlo estimates below.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .errors import BudgetExceeded, NotSorted, UnmatchedTargets
from .geom import SOLVER_TOL, AngleMultiset, PointConfig, check_angle, verify

EXHAUSTIVE_CAP = 100_000     # max ordered target->slot arrangements to enumerate
SAMPLED_PER_WAVE = 512       # assignments drawn per wave when sampling
BATCH_CAP = 8192             # LM items iterated simultaneously
MAX_LM_ITER = 60
_SUM_SLACK = 2e-6            # tolerance slack in structural pruning


@dataclass(frozen=True)
class SolverReport:
    """Outcome of a numerical realizability search."""

    status: str                      # "Realized" or "NotFound"
    best_residual: float             # smallest sum of squared cosine errors seen
    config: PointConfig | None
    certificate: object | None
    restarts_used: int

    @property
    def realized(self):
        return self.status == "Realized"


@dataclass(frozen=True)
class ProbEstimate:
    """Monte Carlo probability estimate with binomial standard error.

    ``solver_limited`` flags estimates that routed through the numerical
    search: its misses are one-sided, so the true probability can only be
    higher than reported, never lower.
    """

    p_hat: float
    stderr: float
    samples: int
    seed: int
    solver_limited: bool = False


def decide_triangle(theta1, theta2):
    """Two angles fit in one triangle iff their sum stays below pi (strictly)."""
    return check_angle(theta1) + check_angle(theta2) < math.pi


def impossible_four(angles):
    """Sufficient test that four strictly decreasing angles cannot be realized
    by four points, in the plane or in space: the smallest exceeds 2*pi/3 and
    the middle two sum past pi plus the smallest."""
    if len(angles) != 4:
        raise ValueError("expected exactly four angles")
    t = [check_angle(v) for v in angles]
    if not (t[0] > t[1] > t[2] > t[3]):
        raise NotSorted("angles must be strictly decreasing")
    return t[3] > 2.0 * math.pi / 3.0 and t[1] + t[2] > math.pi + t[3]


# ---------------------------------------------------------------------------
# slot bookkeeping


def _slot_list(m):
    """All (a, apex, c) ray-pair slots with a < c; there are 3*C(m,3) of them."""
    slots = []
    for apex in range(m):
        others = [i for i in range(m) if i != apex]
        for a, c in itertools.combinations(others, 2):
            slots.append((a, apex, c))
    return slots


def _perm_slot_table(m, slots):
    """slot index -> permuted slot index, for every relabeling of the points."""
    index = {}
    for k, (a, apex, c) in enumerate(slots):
        index[(apex, a, c)] = k
        index[(apex, c, a)] = k
    table = []
    for perm in itertools.permutations(range(m)):
        row = [index[(perm[apex], perm[a], perm[c])] for (a, apex, c) in slots]
        table.append(row)
    return np.array(table, dtype=np.int32)


_ASSIGNMENT_CACHE = {}


def _canonical_assignments(m, n):
    """Ordered injective target->slot assignments, one per point-relabeling orbit.

    Relabeling the m points permutes the slots without changing which target
    multisets are realizable, so only one representative per orbit needs to be
    searched. Cached per (m, n).
    """
    key = (m, n)
    if key in _ASSIGNMENT_CACHE:
        return _ASSIGNMENT_CACHE[key]
    slots = _slot_list(m)
    k = len(slots)
    table = _perm_slot_table(m, slots)
    reps = []
    for combo in itertools.permutations(range(k), n):
        arr = np.array(combo, dtype=np.int32)
        images = table[:, arr]
        canon_ok = True
        for row in images:
            if tuple(row) < combo:
                canon_ok = False
                break
        if canon_ok:
            reps.append(combo)
    out = np.array(reps, dtype=np.int32)
    _ASSIGNMENT_CACHE[key] = out
    return out


def _assignment_structure(assignments, slots):
    """Index arrays describing which assigned positions share triangles/apexes.

    Used for cheap per-sample pruning: positions whose slots form the three
    angles of one triangle must sum to pi; two angles of one triangle must sum
    below pi; three pairwise-sharing rays at one apex obey spherical triangle
    inequalities (planar: one must be the sum of the other two, or all three
    close up to 2*pi).
    """
    tri_pairs = []
    tri_triples = []
    apex_triples = []
    for row, assign in enumerate(assignments):
        tris = {}
        apexes = {}
        for pos, sid in enumerate(assign):
            a, apex, c = slots[sid]
            tris.setdefault(frozenset((a, apex, c)), []).append(pos)
            apexes.setdefault(apex, []).append((pos, frozenset((a, c))))
        for members in tris.values():
            if len(members) >= 2:
                for i, j in itertools.combinations(members, 2):
                    tri_pairs.append((row, i, j))
            if len(members) == 3:
                tri_triples.append((row, members[0], members[1], members[2]))
        for members in apexes.values():
            if len(members) == 3:
                rays = frozenset().union(*(pairs for _, pairs in members))
                if len(rays) == 3:
                    apex_triples.append(tuple([row] + [pos for pos, _ in members]))
    return (
        np.array(tri_pairs, dtype=np.int64).reshape(-1, 3),
        np.array(tri_triples, dtype=np.int64).reshape(-1, 4),
        np.array(apex_triples, dtype=np.int64).reshape(-1, 4),
    )


def _structural_filter(structure, n_assign, t, d):
    """Boolean mask of assignments not excluded by exact angle identities."""
    tri_pairs, tri_triples, apex_triples = structure
    alive = np.ones(n_assign, dtype=bool)
    if len(tri_pairs):
        s = t[tri_pairs[:, 1]] + t[tri_pairs[:, 2]]
        alive[tri_pairs[s >= math.pi + _SUM_SLACK, 0]] = False
    if len(tri_triples):
        s = t[tri_triples[:, 1]] + t[tri_triples[:, 2]] + t[tri_triples[:, 3]]
        alive[tri_triples[np.abs(s - math.pi) > 3.0 * _SUM_SLACK, 0]] = False
    if len(apex_triples):
        x = t[apex_triples[:, 1]]
        y = t[apex_triples[:, 2]]
        z = t[apex_triples[:, 3]]
        total = x + y + z
        big = np.maximum(np.maximum(x, y), z)
        if d >= 3:
            bad = (big > total - big + 3.0 * _SUM_SLACK) & (
                np.abs(total - 2.0 * math.pi) > 3.0 * _SUM_SLACK
            )
            bad |= total > 2.0 * math.pi + 3.0 * _SUM_SLACK
        else:
            composed = np.abs(big - (total - big)) <= 3.0 * _SUM_SLACK
            closed = np.abs(total - 2.0 * math.pi) <= 3.0 * _SUM_SLACK
            bad = ~(composed | closed)
        alive[apex_triples[bad, 0]] = False
    return alive


# ---------------------------------------------------------------------------
# batched damped least squares


def _pack_points(x, m, d):
    """Gauge-fixed coordinates: point0 at the origin, point1 at unit distance on
    the first axis, point2 confined to the first coordinate plane."""
    b = x.shape[0]
    pts = np.zeros((b, m, d))
    pts[:, 1, 0] = 1.0
    pts[:, 2, 0] = x[:, 0]
    pts[:, 2, 1] = x[:, 1]
    if m > 3:
        pts[:, 3:, :] = x[:, 2:].reshape(b, m - 3, d)
    return pts


def _var_count(m, d):
    return 2 + (m - 3) * d


def _residuals(x, m, d, slot_abc, tcos, with_jacobian):
    """Residual vector (and Jacobian) of cos(slot angles) - cos(targets)."""
    pts = _pack_points(x, m, d)
    b, n, _ = slot_abc.shape
    bi = np.arange(b)[:, None]
    pa = pts[bi, slot_abc[:, :, 0]]
    pb = pts[bi, slot_abc[:, :, 1]]
    pc = pts[bi, slot_abc[:, :, 2]]
    u = pa - pb
    w = pc - pb
    nu = np.sqrt(np.einsum("bnd,bnd->bn", u, u))
    nw = np.sqrt(np.einsum("bnd,bnd->bn", w, w))
    dead = np.any((nu < 1e-12) | (nw < 1e-12), axis=1)
    nu = np.maximum(nu, 1e-12)
    nw = np.maximum(nw, 1e-12)
    uh = u / nu[..., None]
    wh = w / nw[..., None]
    cosv = np.einsum("bnd,bnd->bn", uh, wh)
    r = cosv - tcos
    r[dead] = 1e6  # finite sentinel keeps the batched linear algebra clean
    if not with_jacobian:
        return r, None, dead

    ga = (wh - cosv[..., None] * uh) / nu[..., None]
    gc = (uh - cosv[..., None] * wh) / nw[..., None]
    gb = -(ga + gc)
    if dead.any():
        ga[dead] = 0.0
        gb[dead] = 0.0
        gc[dead] = 0.0
    nvar = _var_count(m, d)
    jac = np.zeros((b, n, nvar))
    rows = np.broadcast_to(np.arange(n)[None, :], (b, n))
    cols_base = np.arange(d)[None, None, :]
    for role, grad in ((0, ga), (1, gb), (2, gc)):
        pidx = slot_abc[:, :, role]
        plane = pidx == 2
        if plane.any():
            bp, np_ = np.nonzero(plane)
            jac[bp, np_, 0] += grad[bp, np_, 0]
            jac[bp, np_, 1] += grad[bp, np_, 1]
        free = pidx >= 3
        if free.any():
            bf, nf = np.nonzero(free)
            col0 = 2 + (pidx[bf, nf] - 3) * d
            jac[bf[:, None], rows[bf, nf][:, None], col0[:, None] + cols_base[0]] += grad[bf, nf]
    return r, jac, dead


def _lm_wave(x0, m, d, slot_abc, tcos, thr, max_iter=MAX_LM_ITER):
    """Run damped least squares on a batch; returns (x, cost, success mask).

    Items stop early once every residual clears its component threshold; items
    whose damping explodes, whose rays collapse, or whose cost stalls are
    abandoned (a collapsed sample restarts implicitly via the next wave).
    """
    x = x0.copy()
    b, nvar = x.shape
    lam = np.full(b, 1e-3)
    r, jac, dead = _residuals(x, m, d, slot_abc, tcos, True)
    cost = np.einsum("bn,bn->b", r, r)
    cost[dead] = np.inf
    success = np.all(r * r <= thr[None, :], axis=1) & ~dead
    alive = ~dead & ~success
    stall = np.zeros(b, dtype=np.int32)
    best_cost = cost.copy()

    eye = np.eye(nvar)
    for _ in range(max_iter):
        if not alive.any():
            break
        idx = np.nonzero(alive)[0]
        ji = jac[idx]
        ri = r[idx]
        a = np.einsum("bnw,bnv->bwv", ji, ji)
        g = np.einsum("bnw,bn->bw", ji, ri)
        # damping keeps the normal matrix positive definite in exact
        # arithmetic; wildly scaled items can still defeat it numerically,
        # and those items are simply abandoned
        a = a + (lam[idx, None, None] + 1e-12) * eye[None, :, :]
        try:
            delta = np.linalg.solve(a, -g[..., None])[..., 0]
        except np.linalg.LinAlgError:
            delta = np.zeros_like(g)
            for pos in range(len(idx)):
                try:
                    delta[pos] = np.linalg.solve(a[pos], -g[pos])
                except np.linalg.LinAlgError:
                    alive[idx[pos]] = False
        x_try = x[idx] + delta
        r_try, jac_try, dead_try = _residuals(x_try, m, d, slot_abc[idx], tcos, True)
        cost_try = np.einsum("bn,bn->b", r_try, r_try)
        cost_try[dead_try] = np.inf

        improved = cost_try < cost[idx]
        acc = idx[improved]
        x[acc] = x_try[improved]
        r[acc] = r_try[improved]
        jac[acc] = jac_try[improved]
        cost[acc] = cost_try[improved]
        lam[acc] = np.maximum(lam[acc] * 0.3, 1e-10)
        rej = idx[~improved]
        lam[rej] *= 10.0
        stall[acc] = 0
        stall[rej] += 1
        best_cost = np.minimum(best_cost, cost)

        got = np.all(r[idx] * r[idx] <= thr[None, :], axis=1)
        success[idx[got]] = True
        alive[idx[got]] = False
        alive[rej[lam[rej] > 1e9]] = False
        alive &= stall <= 10
        if success.any():
            break
    return x, best_cost, success


# ---------------------------------------------------------------------------
# public search


def _solver_rng(seed, wave):
    return Generator(Philox(key=np.array([seed & (2**64 - 1), wave], dtype=np.uint64)))


def _flip_gauge(points):
    """Reflect the second coordinate so the plane-confined point sits above the
    first axis; a similarity, so all angles survive."""
    if points.shape[0] >= 3 and points[2, 1] < 0:
        points = points.copy()
        points[:, 1] *= -1.0
    return points


def solve_numeric(targets, m, d, restarts=40, seed=0, allow_sampling=True):
    """Search for m points in R^d realizing the target multiset at 1e-6.

    Assignments of targets to distinct ray-pair slots are enumerated
    exhaustively (orbit-reduced under point relabeling) when the arrangement
    count stays under ``EXHAUSTIVE_CAP``, and sampled otherwise; with sampling
    disabled that situation raises BudgetExceeded. Each wave pairs every
    surviving assignment with a fresh Gaussian start. The first candidate
    whose re-verified certificate passes wins.
    """
    if not isinstance(targets, AngleMultiset):
        targets = AngleMultiset.from_values(targets)
    occ = targets.occurrences()
    n = len(occ)
    if n == 0:
        raise ValueError("empty target multiset")
    if m < 3:
        raise ValueError("m must be at least 3")
    d = max(2, min(int(d), m - 1))

    slots = _slot_list(m)
    k = len(slots)
    if n > k:
        return SolverReport("NotFound", math.inf, None, None, 0)

    arrangements = 1
    for i in range(n):
        arrangements *= k - i
    if arrangements <= EXHAUSTIVE_CAP:
        assignments = _canonical_assignments(m, n)
        structure = _assignment_structure(assignments, slots)
        sampled = False
    elif allow_sampling:
        assignments = None
        sampled = True
    else:
        raise BudgetExceeded(
            f"{arrangements} slot arrangements exceed the exhaustive cap and sampling is disabled"
        )

    t = np.array(occ)
    tcos = np.cos(t)
    # component threshold: cosine error well inside what a 1e-6 radian
    # certificate needs, scaled by the local arccos conditioning
    thr = (0.5 * SOLVER_TOL * np.maximum(np.sin(t), 1e-9)) ** 2
    slot_arr = np.array(slots, dtype=np.int64)
    nvar = _var_count(m, d)

    if not sampled:
        alive = _structural_filter(structure, len(assignments), t, d)
        enumerated = assignments[alive]
        if len(enumerated) == 0:
            return SolverReport("NotFound", math.inf, None, None, 0)

    best_residual = math.inf
    waves_used = 0
    for wave in range(max(1, int(restarts))):
        waves_used = wave + 1
        rng = _solver_rng(seed, wave)
        if sampled:
            assign_batch = np.array(
                [rng.choice(k, size=n, replace=False) for _ in range(SAMPLED_PER_WAVE)],
                dtype=np.int32,
            )
        else:
            assign_batch = enumerated

        for start in range(0, len(assign_batch), BATCH_CAP):
            chunk = assign_batch[start : start + BATCH_CAP]
            b = len(chunk)
            slot_abc = slot_arr[chunk]
            x0 = rng.standard_normal((b, nvar))
            x, cost, success = _lm_wave(x0, m, d, slot_abc, tcos, thr)
            finite = cost[np.isfinite(cost)]
            if finite.size:
                best_residual = min(best_residual, float(finite.min()))
            if success.any():
                for item in np.nonzero(success)[0]:
                    pts = _flip_gauge(_pack_points(x[item : item + 1], m, d)[0])
                    try:
                        config = PointConfig(d, pts)
                        cert = verify(config, targets, SOLVER_TOL)
                    except Exception:
                        continue
                    return SolverReport(
                        "Realized", float(cost[item]), config, cert, waves_used
                    )
    return SolverReport("NotFound", best_residual, None, None, waves_used)


def objective_and_gradient(x, m, d, slot_ids, targets):
    """Sum of squared cosine errors and its analytic gradient at ``x``.

    Exposed so the analytic derivatives can be checked against finite
    differences; ``slot_ids`` index into the slot list for ``m`` points.
    """
    slots = _slot_list(m)
    slot_abc = np.array([slots[s] for s in slot_ids], dtype=np.int64)[None, :, :]
    tcos = np.cos(np.asarray(targets, dtype=float))
    r, jac, dead = _residuals(x[None, :], m, d, slot_abc, tcos[None, :], True)
    if dead[0]:
        raise ValueError("degenerate configuration")
    value = float(np.einsum("bn,bn->b", r, r)[0])
    grad = 2.0 * np.einsum("bnw,bn->bw", jac, r)[0]
    return value, grad


# ---------------------------------------------------------------------------
# Monte Carlo


def _sample_rng(seed, index):
    return Generator(Philox(key=np.array([seed & (2**64 - 1), index], dtype=np.uint64)))


def _draw_angles(rng, n):
    th = rng.uniform(0.0, math.pi, size=n)
    return np.clip(th, 1e-12, math.pi - 1e-12)


def estimate_p(d, m, n, samples, seed=42, solver_restarts=6):
    """Monte Carlo estimate of the probability that n independent uniform
    (0, pi) angles are realizable by m points in R^d.

    Per-sample randomness is keyed by (seed, sample index), so the estimate is
    bit-identical for a given seed regardless of execution order. Dispatch:
    the two-angle triangle case is decided in closed form; four points first
    go through the closed-form impossibility test, then the numerical search;
    everything else runs the numerical search directly.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    if n > 3 * math.comb(m, 3):
        raise ValueError("more targets than available ray-pair slots")

    solver_used = False
    hits = 0
    for i in range(samples):
        rng = _sample_rng(seed, i)
        th = _draw_angles(rng, n)
        if m == 3 and n == 2:
            ok = decide_triangle(th[0], th[1])
        else:
            desc = np.sort(th)[::-1]
            if m == 4 and n == 4 and len(set(desc.tolist())) == 4 and impossible_four(desc):
                ok = False
            else:
                solver_used = True
                sub_seed = (seed * 1_000_003 + i) & (2**63 - 1)
                report = solve_numeric(
                    AngleMultiset.from_values(th.tolist()),
                    m,
                    d,
                    restarts=solver_restarts,
                    seed=sub_seed,
                )
                ok = report.realized
        hits += bool(ok)

    p_hat = hits / samples
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / samples)
    return ProbEstimate(
        p_hat=p_hat, stderr=stderr, samples=samples, seed=seed, solver_limited=solver_used
    )
