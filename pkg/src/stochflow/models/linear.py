"""Scalar linear SDE with periodic forcing, solved in closed form.

dX = (-rate * X + forcing(t)) dt + sigma dW

The flow map is affine: decay factor times the state plus a quadrature of the
forcing and a decay-weighted sum of path increments on the model grid.  The
deterministic part uses the trapezoid rule on the grid, the noise part weights
each increment by the decay at its left endpoint, so composed and direct runs
evaluate the same quadrature nodes and differ only by rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dyadic import DyadicTime
from ..errors import ConfigError
from ..flow_core import FlowModelBase
from ..wiener import increments


@dataclass(frozen=True)
class FourierForcing:
    """Trigonometric polynomial in t with period 2*pi; picklable callable."""

    constant: float = 0.0
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.constant, dtype=float)
        for k, c in enumerate(self.cos_coeffs, start=1):
            out = out + c * np.cos(k * t)
        for k, c in enumerate(self.sin_coeffs, start=1):
            out = out + c * np.sin(k * t)
        return out

    @property
    def is_zero(self):
        return self.constant == 0 and not self.cos_coeffs and not self.sin_coeffs


ZERO_FORCING = FourierForcing()
COSINE_FORCING = FourierForcing(cos_coeffs=(1.0,))


@dataclass(frozen=True)
class LinearOUModel(FlowModelBase):
    rate: float = 1.0
    sigma: float = 0.0
    forcing: FourierForcing = ZERO_FORCING
    grid_level: int = 6
    component: int = 0
    state_dim: int = field(default=1, init=False)

    def __post_init__(self):
        if self.rate <= 0:
            raise ConfigError("rate must be positive")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")

    def periodic_mean(self, t: float) -> float:
        """The unique 2*pi-periodic solution of m' = -rate*m + forcing, for
        forcing = c*cos + s*sin series (closed form)."""
        a = self.rate
        m = self.forcing.constant / a
        for k, c in enumerate(self.forcing.cos_coeffs, start=1):
            m += c * (a * np.cos(k * t) + k * np.sin(k * t)) / (a * a + k * k)
        for k, c in enumerate(self.forcing.sin_coeffs, start=1):
            m += c * (a * np.sin(k * t) - k * np.cos(k * t)) / (a * a + k * k)
        return float(m)

    @property
    def stationary_std(self) -> float:
        return self.sigma / np.sqrt(2.0 * self.rate)

    def evolve_batch(self, omega, s: DyadicTime, t: DyadicTime, states):
        states = np.asarray(states, dtype=float)
        if s == t:
            return states.copy()
        lv = self.grid_level
        i0, i1 = s.at_level(lv), t.at_level(lv)
        h = 2.0**-lv
        grid = np.arange(i0, i1 + 1, dtype=np.float64) * h
        tv = t.value
        decay = np.exp(-self.rate * (tv - grid))
        shift = 0.0
        if not self.forcing.is_zero:
            integrand = decay * self.forcing(grid)
            shift += h * (np.sum(integrand) - 0.5 * (integrand[0] + integrand[-1]))
        if self.sigma != 0.0:
            dw = increments(omega, self.component, s, t, lv)
            shift += self.sigma * float(np.dot(decay[:-1], dw))
        return states * decay[0] + shift


@dataclass(frozen=True)
class LinearDrift:
    """Vectorized drift -rate*x + forcing(t), for the generic stepper."""

    rate: float
    forcing: FourierForcing = ZERO_FORCING

    def __call__(self, t, states):
        return -self.rate * states + self.forcing(t)
