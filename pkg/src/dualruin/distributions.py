"""Jump-size laws for the profit process: closed-form Laplace transforms,
moments, and seedable samplers.

Each law also exposes the complement 1 - L(beta) in a cancellation-free form
(``one_minus_laplace``), which is what the characteristic equations actually
consume through g(beta) = (1 - L(beta)) / beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Exponential",
    "Gamma",
    "Deterministic",
    "JumpLaw",
    "GEvaluator",
    "laplace",
    "g_of_beta",
    "sample",
]


def _require_positive(name: str, value: float) -> None:
    if not (value > 0.0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class Exponential:
    """Exponential jump sizes with rate ``rate`` (mean 1/rate)."""

    rate: float

    def __post_init__(self):
        _require_positive("rate", self.rate)

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def second_moment(self) -> float:
        return 2.0 / (self.rate * self.rate)

    def pdf(self, y: float) -> float:
        if y < 0.0:
            return 0.0
        return self.rate * math.exp(-self.rate * y)

    def laplace(self, beta: float) -> float:
        return self.rate / (self.rate + beta)

    def one_minus_laplace(self, beta: float) -> float:
        return beta / (self.rate + beta)

    def sample_n(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # Inverse CDF, so the draw count alone fixes the stream position.
        return -np.log1p(-rng.random(n)) / self.rate


@dataclass(frozen=True)
class Gamma:
    """Gamma jump sizes with shape k and rate theta (mean k/theta)."""

    shape: float
    rate: float

    def __post_init__(self):
        _require_positive("shape", self.shape)
        _require_positive("rate", self.rate)

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def second_moment(self) -> float:
        return self.shape * (self.shape + 1.0) / (self.rate * self.rate)

    def pdf(self, y: float) -> float:
        if y <= 0.0:
            return 0.0
        k, th = self.shape, self.rate
        return math.exp(
            k * math.log(th) + (k - 1.0) * math.log(y) - th * y - math.lgamma(k)
        )

    def laplace(self, beta: float) -> float:
        return math.exp(-self.shape * math.log1p(beta / self.rate))

    def one_minus_laplace(self, beta: float) -> float:
        return -math.expm1(-self.shape * math.log1p(beta / self.rate))

    def sample_n(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # numpy's generator implements the standard rejection sampler.
        return rng.gamma(self.shape, 1.0 / self.rate, n)


@dataclass(frozen=True)
class Deterministic:
    """Point mass at ``value``: every jump has the same size."""

    value: float

    def __post_init__(self):
        _require_positive("value", self.value)

    @property
    def mean(self) -> float:
        return self.value

    @property
    def second_moment(self) -> float:
        return self.value * self.value

    def pdf(self, y: float) -> float:
        raise ValueError("a point mass has no density; use laplace() directly")

    def laplace(self, beta: float) -> float:
        return math.exp(-beta * self.value)

    def one_minus_laplace(self, beta: float) -> float:
        return -math.expm1(-beta * self.value)

    def sample_n(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.value)


JumpLaw = Union[Exponential, Gamma, Deterministic]


def laplace(law: JumpLaw, beta: float) -> float:
    """Laplace transform E[exp(-beta Y)] of the jump size, beta >= 0."""
    if beta < 0.0 or not math.isfinite(beta):
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    return law.laplace(beta)


@dataclass(frozen=True)
class GEvaluator:
    """Evaluates g(beta) = (1 - L(beta)) / beta without a 0/0 at the origin.

    Below ``beta_switch`` the ratio is replaced by its two-term Taylor
    expansion E[Y] - (beta/2) E[Y^2]; above it the cancellation-free
    complement form is used.  g is strictly decreasing from E[Y] at 0 and
    bounded by 1/beta, which is what makes every characteristic equation in
    this package monotone.
    """

    law: JumpLaw
    beta_switch: float = 1e-8

    def __call__(self, beta: float) -> float:
        if beta < 0.0 or math.isnan(beta):
            raise ValueError(f"beta must be >= 0, got {beta}")
        if beta <= self.beta_switch:
            return self.law.mean - 0.5 * beta * self.law.second_moment
        return self.law.one_minus_laplace(beta) / beta


def g_of_beta(ev: GEvaluator, beta: float) -> float:
    """Convenience wrapper around GEvaluator.__call__."""
    return ev(beta)


def sample(law: JumpLaw, rng: np.random.Generator) -> float:
    """Draw a single jump size."""
    return float(law.sample_n(rng, 1)[0])
