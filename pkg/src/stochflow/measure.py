"""Weighted-particle probability measures on R^d.

Measures are immutable value objects.  The weak-convergence metric is the
energy distance ``2 E|X-Y| - E|X-X'| - E|Y-Y'|`` evaluated exactly on the
weighted particle sets; it is zero iff the two discrete distributions
coincide, and its square root satisfies the triangle inequality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist

from .dyadic import DyadicTime
from .errors import ConfigError, EvaluationError, StateError
from .keyed import chain, chain_offsets, gauss_from_keys

_WEIGHT_TOL = 1e-12
DEFAULT_PARTICLES = 1 << 10

_TAG_SAMPLE = 0x53414D50


@dataclass(frozen=True)
class EmpiricalMeasure:
    particles: np.ndarray  # (n, d)
    weights: np.ndarray  # (n,)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.particles, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.shape[0] != w.shape[0] or pts.shape[0] < 1:
            raise ConfigError("particles and weights must have equal length >= 1")
        if not np.all(np.isfinite(pts)):
            raise StateError("particles contain non-finite entries")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ConfigError("weights must be finite and nonnegative")
        total = w.sum()
        if total <= 0:
            raise ConfigError("weights must not all vanish")
        if abs(total - 1.0) > _WEIGHT_TOL:
            w = w / total
        pts = pts.copy()
        w = w.copy()
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "particles", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, x) -> "EmpiricalMeasure":
        pt = np.atleast_1d(np.asarray(x, dtype=float))
        return cls(pt[None, :], np.array([1.0]))

    @classmethod
    def equal_weight(cls, points) -> "EmpiricalMeasure":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(pts, np.full(pts.shape[0], 1.0 / pts.shape[0]))

    @property
    def dim(self) -> int:
        return self.particles.shape[1]

    @property
    def size(self) -> int:
        return self.particles.shape[0]

    def mean(self) -> np.ndarray:
        return self.weights @ self.particles

    def spread(self) -> float:
        """Weighted rms distance from the mean."""
        centered = self.particles - self.mean()
        return float(np.sqrt(self.weights @ np.sum(centered * centered, axis=1)))


def pushforward(mu: EmpiricalMeasure, g: Callable) -> EmpiricalMeasure:
    """Image measure under a state map; weights are untouched."""
    out = np.stack([np.atleast_1d(np.asarray(g(x), dtype=float)) for x in mu.particles])
    if not np.all(np.isfinite(out)):
        raise StateError("state map produced non-finite output")
    return EmpiricalMeasure(out, mu.weights)


def expect(mu: EmpiricalMeasure, f: Callable) -> float:
    vals = np.array([f(x) for x in mu.particles], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("test function produced non-finite values")
    return float(mu.weights @ vals)


def _mean_abs_1d(x, wx, y, wy) -> float:
    """sum_ij wx_i wy_j |x_i - y_j| by sorted prefix sums (exact, n log n)."""
    order = np.argsort(x, kind="stable")
    xs, ws = x[order], wx[order]
    cum_w = np.concatenate(([0.0], np.cumsum(ws)))
    cum_s = np.concatenate(([0.0], np.cumsum(ws * xs)))
    k = np.searchsorted(xs, y, side="right")
    below = y * cum_w[k] - cum_s[k]
    above = (cum_s[-1] - cum_s[k]) - y * (cum_w[-1] - cum_w[k])
    return float(np.dot(wy, below + above))


def distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Energy distance between two weighted particle measures."""
    if mu.dim != nu.dim:
        raise StateError(f"dimension mismatch: {mu.dim} vs {nu.dim}")
    if mu.dim == 1:
        x, y = mu.particles[:, 0], nu.particles[:, 0]
        cross = _mean_abs_1d(x, mu.weights, y, nu.weights)
        within_mu = _mean_abs_1d(x, mu.weights, x, mu.weights)
        within_nu = _mean_abs_1d(y, nu.weights, y, nu.weights)
    else:
        cross = mu.weights @ cdist(mu.particles, nu.particles) @ nu.weights
        within_mu = mu.weights @ cdist(mu.particles, mu.particles) @ mu.weights
        within_nu = nu.weights @ cdist(nu.particles, nu.particles) @ nu.weights
    return float(2.0 * cross - within_mu - within_nu)


def mixture(measures, mix_weights) -> EmpiricalMeasure:
    measures = list(measures)
    w = np.asarray(mix_weights, dtype=float)
    if len(measures) != w.shape[0]:
        raise ConfigError("one mixing weight per measure required")
    if np.any(w < 0) or abs(w.sum() - 1.0) > _WEIGHT_TOL:
        raise ConfigError("mixing weights must be nonnegative and sum to 1")
    pts = np.concatenate([m.particles for m in measures])
    ws = np.concatenate([wi * m.weights for wi, m in zip(w, measures)])
    return EmpiricalMeasure(pts, ws)


@dataclass(frozen=True)
class RandomMeasure:
    """Finite ensemble standing in for a realization-indexed measure family."""

    assignment: dict
    ensemble_size: int

    def __post_init__(self):
        for i in range(self.ensemble_size):
            if i not in self.assignment:
                raise ConfigError(f"assignment missing realization index {i}")

    def members(self):
        return [self.assignment[i] for i in range(self.ensemble_size)]


# -- serialization ----------------------------------------------------------

def to_table(mu: EmpiricalMeasure) -> str:
    """Columnar text: one particle per row, weight first, 17 significant digits."""
    lines = []
    for w, x in zip(mu.weights, mu.particles):
        cols = [f"{w:.17g}"] + [f"{c:.17g}" for c in x]
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"


def from_table(text: str) -> EmpiricalMeasure:
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    w = np.array([float(r[0]) for r in rows])
    pts = np.array([[float(c) for c in r[1:]] for r in rows])
    return EmpiricalMeasure(pts, w)


def save_measure(path, mu: EmpiricalMeasure):
    with open(path, "w") as fh:
        fh.write(to_table(mu))


def load_measure(path) -> EmpiricalMeasure:
    with open(path) as fh:
        return from_table(fh.read())


# -- deterministic time-indexed samplers ------------------------------------

class MeasureFamily:
    """A time-indexed source of particle measures; sampling is deterministic."""

    def sample(self, t: DyadicTime, n: int) -> EmpiricalMeasure:
        raise NotImplementedError


class ConstantFamily(MeasureFamily):
    def __init__(self, measure: EmpiricalMeasure):
        self.measure = measure

    def sample(self, t: DyadicTime, n: int) -> EmpiricalMeasure:
        return self.measure


class GaussianFamily(MeasureFamily):
    """One-dimensional Gaussian family with time-dependent mean.

    ``salt`` separates independent sampling streams; two families with
    different salts draw independent particles even at equal times.
    """

    def __init__(self, mean_fn: Callable[[float], float], std: float, salt: int = 0):
        self.mean_fn = mean_fn
        self.std = float(std)
        self.salt = int(salt)

    def sample(self, t: DyadicTime, n: int) -> EmpiricalMeasure:
        base = chain(_TAG_SAMPLE, self.salt, t.numerator, t.level)
        z = gauss_from_keys(chain_offsets(base, np.arange(n)))
        pts = self.mean_fn(t.value) + self.std * z
        return EmpiricalMeasure(pts[:, None], np.full(n, 1.0 / n))


def gaussian_draw(mean: float, std: float, n: int, salt: int) -> EmpiricalMeasure:
    """Fixed-time deterministic Gaussian sample (1D)."""
    z = gauss_from_keys(chain_offsets(chain(_TAG_SAMPLE, salt), np.arange(n)))
    return EmpiricalMeasure((mean + std * z)[:, None], np.full(n, 1.0 / n))
