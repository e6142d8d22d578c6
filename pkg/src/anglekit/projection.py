"""Random subspace sampling and empirical projection tail bounds.

Instead of sampling subspaces from the rotation-invariant measure, the
projection is fixed onto the leading coordinates and the vectors are drawn
uniformly at random; by symmetry the distributions agree, and no Grassmannian
machinery is needed.

Two experiments are exposed: the probability that a fixed projection nearly
kills a random unit vector (bounded by sqrt(eps) + d*eps), and the
probability that projecting a pair of unit vectors at angle theta < pi/3
distorts their angle outside [theta*eps, theta/eps] (bounded by
3*sqrt(eps) + 5*d*eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

_BLOCK = 20000
_NORM_FLOOR = 1e-30
_PROJ_FLOOR = 1e-14


def _block_rng(seed, block):
    return Generator(Philox(key=np.array([seed, block], dtype=np.uint64)))


@dataclass(frozen=True)
class TailReport:
    """Empirical tail frequency next to its analytic bound."""

    d: int
    eps: float
    theta: float | None
    empirical: float
    bound: float
    samples: int
    seed: int

    @property
    def stderr(self):
        p = self.empirical
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.samples)

    @property
    def passed(self):
        return self.empirical <= self.bound + 3.0 * self.stderr


def random_unit_vector(d, rng):
    """Uniform random unit vector: normalized standard Gaussian coordinates."""
    if d < 1:
        raise ValueError("d must be at least 1")
    while True:
        x = rng.standard_normal(d)
        n = float(np.linalg.norm(x))
        if n > _NORM_FLOOR:
            return x / n


def _unit_rows(rng, count, d):
    x = rng.standard_normal((count, d))
    n = np.linalg.norm(x, axis=1)
    bad = n <= _NORM_FLOOR
    while np.any(bad):
        x[bad] = rng.standard_normal((int(bad.sum()), d))
        n = np.linalg.norm(x, axis=1)
        bad = n <= _NORM_FLOOR
    return x / n[:, None]


def tail_1d(d, eps, samples, seed=42):
    """Frequency of |first coordinate| < eps over random unit vectors in R^d."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if d < 1 or samples < 1:
        raise ValueError("d and samples must be positive")
    hits = 0
    done = 0
    block = 0
    while done < samples:
        count = min(_BLOCK, samples - done)
        v = _unit_rows(_block_rng(seed, block), count, d)
        hits += int(np.count_nonzero(np.abs(v[:, 0]) < eps))
        done += count
        block += 1
    bound = math.sqrt(eps) + d * eps
    return TailReport(d=d, eps=float(eps), theta=None, empirical=hits / samples,
                      bound=bound, samples=samples, seed=seed)


def angle_distortion(d, theta, eps, samples, seed=42):
    """Frequency of the projected angle leaving [theta*eps, theta/eps].

    Per sample: draw a unit vector v and a unit vector u orthogonal to it
    (Gram-Schmidt on a fresh Gaussian, orthogonalized twice), set the pair
    (v, cos(theta) v + sin(theta) u), project onto the first two coordinates
    and measure the angle with atan2(|cross|, dot). Samples where either
    projection nearly vanishes count as out-of-range events, never dropped.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    theta = float(theta)
    if not 0.0 < theta < math.pi / 3.0:
        raise ValueError("theta must lie in (0, pi/3)")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if samples < 1:
        raise ValueError("samples must be positive")

    lo, hi = theta * eps, theta / eps
    out = 0
    done = 0
    block = 0
    while done < samples:
        count = min(_BLOCK, samples - done)
        rng = _block_rng(seed, block)
        v = _unit_rows(rng, count, d)
        y = rng.standard_normal((count, d))
        for _ in range(2):
            y -= np.einsum("ij,ij->i", y, v)[:, None] * v
        ny = np.linalg.norm(y, axis=1)
        retry = ny <= _NORM_FLOOR
        while np.any(retry):
            y[retry] = rng.standard_normal((int(retry.sum()), d))
            for _ in range(2):
                y[retry] -= np.einsum("ij,ij->i", y[retry], v[retry])[:, None] * v[retry]
            ny = np.linalg.norm(y, axis=1)
            retry = ny <= _NORM_FLOOR
        u = y / ny[:, None]

        v2 = math.cos(theta) * v + math.sin(theta) * u
        a = v[:, :2]
        b = v2[:, :2]
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        degenerate = (na < _PROJ_FLOOR) | (nb < _PROJ_FLOOR)
        cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        dot = np.einsum("ij,ij->i", a, b)
        phi = np.arctan2(cross, dot)
        out += int(np.count_nonzero(degenerate | (phi < lo) | (phi > hi)))
        done += count
        block += 1

    bound = 3.0 * math.sqrt(eps) + 5.0 * d * eps
    return TailReport(d=d, eps=float(eps), theta=theta, empirical=out / samples,
                      bound=bound, samples=samples, seed=seed)
