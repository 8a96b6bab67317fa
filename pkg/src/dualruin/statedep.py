"""Wealth-dependent model coefficients: pointwise optimal spending, a
quadrature for the ruin probability under exponential jumps, and two families
with closed-form solutions used as benchmarks.

For exponential jump sizes the minimal ruin probability under a spending
policy C(.) reduces to the ratio of two integrals of
r(y) * exp(nu*y - int_0^y r), where r is the intensity-to-drift ratio
(lam(y) + delta(y) C(y)**gamma) / (rho(y) + C(y)).  ``StateRuinEvaluator``
evaluates that ratio with the inner integral cached on an eagerly built knot
grid, so repeated outer evaluations are read-only and cheap.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

from .numerics import NumericsError, erfc, integrate_semiinf
from .solver import WrongRegime

__all__ = [
    "StateModel",
    "BangBang",
    "BangBangPolicy",
    "Policy",
    "NonIntegrable",
    "c_star_pointwise",
    "c_star_bangbang",
    "StateRuinEvaluator",
    "ruin_probability_quadrature",
    "StateExampleIParams",
    "closed_form_state_ex1",
    "StateExampleIIParams",
    "closed_form_state_ex2",
    "state_ex2_no_investment",
]

_KNOT_TOL = 1e-9  # max linear-interpolation error allowed for the cached exponent
_DECAY_MARGIN = 80.0  # stop once the exponent sits this far below its peak
_Y_LIMIT = 1e5


class NonIntegrable(Exception):
    """The outer integrand failed its decay bound before the horizon cap.

    Under exponential jumps this means nu*y outruns the accumulated
    intensity-to-drift integral, so the representation does not converge
    (or converges only with a polynomial tail, which this quadrature does
    not chase)."""


CoefFn = Callable[[Union[float, np.ndarray]], Union[float, np.ndarray]]


@dataclass(frozen=True)
class StateModel:
    """Coefficient functions rho(x), lam(x), delta(x) plus the curvature.

    The functions must be positive on [0, inf), bounded on compacts, and
    vectorized over numpy arrays.  ``lam_floor`` records a known positive
    lower bound for lam; the catalog constructors compute it, for ad-hoc
    callables the caller asserts it.
    """

    rho_fn: CoefFn
    lam_fn: CoefFn
    delta_fn: CoefFn
    gamma: float
    lam_floor: float

    def __post_init__(self):
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.lam_floor > 0.0:
            raise ValueError("lam_floor must be positive")

    @classmethod
    def constant(cls, rho: float, lam: float, delta: float, gamma: float) -> StateModel:
        for name, value in (("rho", rho), ("lam", lam), ("delta", delta)):
            if not value > 0.0:
                raise ValueError(f"{name} must be positive, got {value}")
        return cls(
            rho_fn=lambda x: rho + 0.0 * x,
            lam_fn=lambda x: lam + 0.0 * x,
            delta_fn=lambda x: delta + 0.0 * x,
            gamma=gamma,
            lam_floor=lam,
        )

    @classmethod
    def affine(
        cls,
        rho0: float,
        lam0: float,
        delta0: float,
        c1: float,
        c2: float,
        gamma: float,
    ) -> StateModel:
        """Constant drift, profit coefficients scaled by the affine factor
        c1*x + c2 (the factor cancels from the pointwise optimum)."""
        if not (rho0 > 0.0 and lam0 > 0.0 and delta0 > 0.0):
            raise ValueError("rho0, lam0, delta0 must be positive")
        if c1 < 0.0 or c2 <= 0.0:
            raise ValueError("need c1 >= 0 and c2 > 0 so coefficients stay positive")
        scale = lambda x: c1 * x + c2
        return cls(
            rho_fn=lambda x: rho0 + 0.0 * x,
            lam_fn=lambda x: lam0 * scale(x),
            delta_fn=lambda x: delta0 * scale(x),
            gamma=gamma,
            lam_floor=lam0 * c2,
        )

    @classmethod
    def rational(
        cls,
        rho0: float,
        c1: float,
        c2: float,
        lam0: float,
        delta0: float,
        nu: float,
    ) -> StateModel:
        """Affine drift, intensity (nu + lam0/(1+x)) * rho(x), constant
        efficiency; gamma is pinned to 1 (the bang-bang family)."""
        if not (rho0 > 0.0 and lam0 > 0.0 and delta0 > 0.0 and nu > 0.0):
            raise ValueError("rho0, lam0, delta0, nu must be positive")
        if c1 < 0.0 or c2 <= 0.0:
            raise ValueError("need c1 >= 0 and c2 > 0 so coefficients stay positive")
        drift = lambda x: rho0 * (c1 * x + c2)
        return cls(
            rho_fn=drift,
            lam_fn=lambda x: (nu + lam0 / (1.0 + x)) * drift(x),
            delta_fn=lambda x: delta0 + 0.0 * x,
            gamma=1.0,
            lam_floor=rho0 * min(c1, c2) * (nu + lam0),
        )


def c_star_pointwise(model: StateModel, x):
    """Pointwise optimal spending rate for gamma < 1, vectorized over x.

    At each wealth level C solves
    lam(x) + (1-gamma) delta(x) C^gamma = rho(x) delta(x) gamma C^(gamma-1).
    Multiplying through by C^(1-gamma) makes the left side strictly
    increasing from a negative value, so a vectorized bisection on
    [0, rho(x) gamma/(1-gamma)] nails the unique root.
    """
    gamma = model.gamma
    if not 0.0 < gamma < 1.0:
        raise WrongRegime(f"pointwise optimum requires 0 < gamma < 1, got {gamma}")
    arr = np.asarray(x, dtype=float)
    ones = np.ones_like(arr)
    lam = model.lam_fn(arr) * ones
    delta = model.delta_fn(arr) * ones
    rho = model.rho_fn(arr) * ones
    if np.any(lam <= 0.0) or np.any(delta <= 0.0) or np.any(rho <= 0.0):
        raise ValueError("coefficient functions must be positive")

    target = rho * delta * gamma
    lo = np.zeros_like(arr)
    hi = rho * gamma / (1.0 - gamma)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        phi = lam * mid ** (1.0 - gamma) + (1.0 - gamma) * delta * mid - target
        below = phi < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    result = 0.5 * (lo + hi)
    if np.ndim(x) == 0:
        return float(result)
    return result


class BangBang(Enum):
    ZERO = "zero"
    MAX = "max"


def c_star_bangbang(model: StateModel, x: float) -> BangBang:
    """gamma = 1 optimal action at wealth x: spend nothing where
    delta(x) <= lam(x)/rho(x), spend maximally where it exceeds it."""
    if model.gamma != 1.0:
        raise WrongRegime(f"bang-bang policy requires gamma = 1, got {model.gamma}")
    if _max_region_mask(model, np.asarray(float(x))):
        return BangBang.MAX
    return BangBang.ZERO


def _max_region_mask(model: StateModel, x: np.ndarray) -> np.ndarray:
    return np.asarray(
        model.delta_fn(x) * model.rho_fn(x) > model.lam_fn(x) + 0.0 * x
    )


@dataclass(frozen=True)
class BangBangPolicy:
    """Spend-nothing / spend-maximally policy for a gamma = 1 model.

    ``cap`` is the finite rate used on the Max region; None means the
    infinite-rate limit, where the intensity-to-drift ratio tends to
    delta(x) (quadrature only — a simulation always needs a finite cap).
    ``threshold`` optionally names the single switch wealth, which lets the
    quadrature place a knot there and the simulator split steps across it.
    """

    cap: Optional[float] = None
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.cap is not None and not self.cap > 0.0:
            raise ValueError("cap must be positive when given")


Policy = Union[float, CoefFn, BangBangPolicy]


def _ratio_function(model: StateModel, policy: Policy) -> CoefFn:
    """Intensity-to-drift ratio r(y) under the given spending policy."""
    gamma = model.gamma
    if isinstance(policy, BangBangPolicy):
        if gamma != 1.0:
            raise WrongRegime("bang-bang policies require gamma = 1")

        def ratio(y):
            lam = model.lam_fn(y) + 0.0 * y
            rho = model.rho_fn(y) + 0.0 * y
            delta = model.delta_fn(y) + 0.0 * y
            zero_side = lam / rho
            if policy.cap is None:
                max_side = delta
            else:
                max_side = (lam + delta * policy.cap) / (rho + policy.cap)
            return np.where(_max_region_mask(model, np.asarray(y)), max_side, zero_side)

        return ratio

    if callable(policy):
        c_fn = policy
    else:
        c_const = float(policy)
        if c_const < 0.0:
            raise ValueError("constant spending rate must be >= 0")
        c_fn = lambda y: c_const + 0.0 * y

    def ratio(y):
        c = c_fn(y) + 0.0 * y
        return (model.lam_fn(y) + model.delta_fn(y) * c**gamma) / (model.rho_fn(y) + c)

    return ratio


class StateRuinEvaluator:
    """Ruin probability under a fixed policy, exponential jumps with rate nu.

    Builds the inner-exponent cache eagerly at construction: knots are laid
    down with spacing chosen from the local curvature of r so that linear
    interpolation of int_0^y r stays within 1e-9, marching until the outer
    exponent nu*y - int r has dropped 80 below its running peak with a
    strictly negative slope.  After construction, evaluation is read-only
    (safe to share across threads).
    """

    def __init__(
        self,
        model: StateModel,
        nu: float,
        policy: Policy,
        rel_tol: float = 1e-10,
    ):
        if not nu > 0.0:
            raise ValueError(f"nu must be positive, got {nu}")
        self.model = model
        self.nu = nu
        self.policy = policy
        self.rel_tol = rel_tol
        self._ratio = _ratio_function(model, policy)
        threshold = policy.threshold if isinstance(policy, BangBangPolicy) else None
        self._knots, self._exponent_values, self.horizon = self._build_cache(threshold)
        self._denominator = integrate_semiinf(self._integrand, 0.0, rel_tol)
        if not self._denominator > 0.0:
            raise NonIntegrable("normalization integral is not positive")

    def _build_cache(self, threshold: Optional[float]):
        knots = [np.array([0.0])]
        values = [np.array([0.0])]
        y = 0.0
        acc = 0.0
        peak = 0.0
        block = 1.0
        while True:
            length = block
            if threshold is not None and y < threshold < y + length:
                length = threshold - y
            h = self._knot_spacing(y, y + length)
            n = max(2, int(math.ceil(length / h)))
            ys = y + (length / n) * np.arange(n + 1)
            mids = 0.5 * (ys[:-1] + ys[1:])
            r_nodes = np.asarray(self._ratio(ys), dtype=float)
            r_mids = np.asarray(self._ratio(mids), dtype=float)
            if np.any(r_nodes < 0.0) or not np.all(np.isfinite(r_nodes)):
                raise NumericsError("intensity-to-drift ratio must be finite and >= 0")
            seg = (length / n) / 6.0 * (r_nodes[:-1] + 4.0 * r_mids + r_nodes[1:])
            segment_values = acc + np.concatenate(([0.0], np.cumsum(seg)))
            knots.append(ys[1:])
            values.append(segment_values[1:])
            acc = float(segment_values[-1])
            y = float(ys[-1])
            phi = self.nu * ys - segment_values
            peak = max(peak, float(phi.max()))
            tail_slope = self.nu - float(r_nodes[-1])
            if self.nu * y - acc <= peak - _DECAY_MARGIN and tail_slope < -1e-6:
                return np.concatenate(knots), np.concatenate(values), y
            if y > _Y_LIMIT:
                raise NonIntegrable(
                    f"outer exponent has not decayed {_DECAY_MARGIN} below its "
                    f"peak by y = {y:.3g} (slope {tail_slope:.3g}); the "
                    "representation needs nu < r(y) at large wealth"
                )
            block = min(block * 1.5, 64.0)

    def _knot_spacing(self, a: float, b: float) -> float:
        probe = np.linspace(a, b, 5)
        r = np.asarray(self._ratio(probe), dtype=float)
        curvature = float(np.max(np.abs(np.diff(r)))) / ((b - a) / 4.0)
        if curvature <= 0.0:
            return (b - a) / 2.0
        return min(max(math.sqrt(8.0 * _KNOT_TOL / curvature), 1e-5), (b - a) / 2.0)

    def exponent_integral(self, y: float) -> float:
        """Cached int_0^y r(w) dw (linear interpolation between knots)."""
        return float(np.interp(y, self._knots, self._exponent_values))

    def _integrand(self, y: float) -> float:
        if y >= self.horizon:
            return 0.0
        phi = self.nu * y - self.exponent_integral(y)
        return float(self._ratio(y)) * math.exp(phi)

    def value(self, x: float) -> float:
        """Ruin probability starting from wealth x under the fixed policy."""
        if x < 0.0:
            raise ValueError("wealth must be >= 0")
        if x == 0.0:
            return 1.0
        if x >= self.horizon:
            return 0.0
        raw = integrate_semiinf(self._integrand, x, self.rel_tol) / self._denominator
        if raw > 1.0 + 1e-6 or raw < -1e-6:
            warnings.warn(
                f"quadrature ruin probability {raw:.6g} clamped to [0, 1]",
                RuntimeWarning,
                stacklevel=2,
            )
        return min(max(raw, 0.0), 1.0)


def ruin_probability_quadrature(
    model: StateModel, nu: float, c_policy: Policy, x: float
) -> float:
    """One-shot wrapper around StateRuinEvaluator for a single wealth level.

    Building the exponent cache dominates the cost, so evaluate a grid of x
    values through a shared StateRuinEvaluator instead of calling this in a
    loop.
    """
    return StateRuinEvaluator(model, nu, c_policy).value(x)


def _c_star_constant(rho: float, lam: float, delta: float, gamma: float) -> float:
    return float(c_star_pointwise(StateModel.constant(rho, lam, delta, gamma), 0.0))


@dataclass(frozen=True)
class StateExampleIParams:
    """Affine-scaled profit family with a closed-form ruin probability.

    The affine factor cancels from the pointwise optimum, so the optimal
    spending rate is the constant ``c0`` and the ruin probability is a ratio
    of Gaussian-type integrals expressible through erfc.
    """

    rho0: float
    lam0: float
    delta0: float
    c1: float
    c2: float
    nu: float
    gamma: float = 0.5

    def __post_init__(self):
        for name in ("rho0", "lam0", "delta0", "c1", "c2", "nu"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")

    def model(self) -> StateModel:
        return StateModel.affine(
            self.rho0, self.lam0, self.delta0, self.c1, self.c2, self.gamma
        )

    @cached_property
    def c0(self) -> float:
        return _c_star_constant(self.rho0, self.lam0, self.delta0, self.gamma)

    @cached_property
    def drift_ratio(self) -> float:
        """(lam0 + delta0 c0^gamma) / (rho0 + c0), the constant that scales
        the affine factor inside the exponent."""
        return (self.lam0 + self.delta0 * self.c0**self.gamma) / (self.rho0 + self.c0)

    @cached_property
    def coefficients(self) -> tuple[float, float, float, float]:
        """(a, b, c, d) of the integrand (a*y + b) * exp(c*y - d*y^2)."""
        k = self.drift_ratio
        return self.c1, self.c2, self.nu - k * self.c2, 0.5 * k * self.c1


def closed_form_state_ex1(params: StateExampleIParams, x: float) -> float:
    """Closed-form ruin probability for the affine-scaled profit family.

    Both integrals of (a*y + b) exp(c*y - d*y^2) evaluate to
    2 a sqrt(d) exp(c*x - d*x^2) + sqrt(pi) exp(c^2/(4d)) (a*c + 2*b*d)
    erfc((2*d*x - c) / (2 sqrt(d))), and the value is their ratio (the
    denominator is the numerator at x = 0).  Uses the conventional erfc
    normalization; any constant prefactor cancels in the ratio.
    """
    if x < 0.0:
        raise ValueError("wealth must be >= 0")
    a, b, c, d = params.coefficients
    sqrt_d = math.sqrt(d)

    def upper_integral(z: float) -> float:
        gauss = math.exp(c * z - d * z * z)
        tail = erfc((2.0 * d * z - c) / (2.0 * sqrt_d))
        return 2.0 * a * sqrt_d * gauss + math.sqrt(math.pi) * math.exp(
            c * c / (4.0 * d)
        ) * (a * c + 2.0 * b * d) * tail

    return upper_integral(x) / upper_integral(0.0)


@dataclass(frozen=True)
class StateExampleIIParams:
    """Rational-intensity bang-bang family (gamma = 1) with a closed form.

    Needs nu < delta0 < nu + lam0 so the switch wealth ``x_star`` is positive
    and the Max region can actually outrun the drift.  lam0 = 1 is rejected
    because the antiderivative coefficient 1/(1 - lam0) is singular there.
    """

    rho0: float
    c1: float
    c2: float
    lam0: float
    delta0: float
    nu: float

    def __post_init__(self):
        for name in ("rho0", "lam0", "delta0", "nu"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.c1 < 0.0 or self.c2 <= 0.0:
            raise ValueError("need c1 >= 0 and c2 > 0")
        if not self.nu < self.delta0 < self.nu + self.lam0:
            raise ValueError(
                f"need nu < delta0 < nu + lam0, got nu={self.nu}, "
                f"delta0={self.delta0}, lam0={self.lam0}"
            )
        if self.lam0 == 1.0:
            raise ValueError(
                "lam0 = 1 makes the closed-form coefficient 1/(1 - lam0) singular"
            )

    def model(self) -> StateModel:
        return StateModel.rational(
            self.rho0, self.c1, self.c2, self.lam0, self.delta0, self.nu
        )

    @property
    def x_star(self) -> float:
        """Switch wealth: spend nothing below, spend maximally above."""
        return (self.lam0 - self.delta0 + self.nu) / (self.delta0 - self.nu)

    def policy(self, cap: Optional[float] = None) -> BangBangPolicy:
        return BangBangPolicy(cap=cap, threshold=self.x_star)


def _ex2_upper_integral(p: StateExampleIIParams, x: float) -> float:
    xs = p.x_star
    gap = p.delta0 - p.nu
    if x > xs:
        return (
            math.exp(gap * xs)
            * (1.0 + xs) ** (-p.lam0)
            * (p.delta0 / gap)
            * math.exp(-gap * x)
        )
    t = 1.0 + x
    ts = 1.0 + xs
    return (
        (p.nu / (1.0 - p.lam0)) * (ts ** (1.0 - p.lam0) - t ** (1.0 - p.lam0))
        + t ** (-p.lam0)
        - ts ** (-p.lam0)
        + ts ** (-p.lam0) * p.delta0 / gap
    )


def closed_form_state_ex2(params: StateExampleIIParams, x: float) -> float:
    """Closed-form ruin probability for the rational bang-bang family.

    Piecewise: power-law-type decay below the switch wealth, pure
    exponential decay with rate delta0 - nu above it; the two branches agree
    at the switch point.
    """
    if x < 0.0:
        raise ValueError("wealth must be >= 0")
    return _ex2_upper_integral(params, x) / _ex2_upper_integral(params, 0.0)


def state_ex2_no_investment(params: StateExampleIIParams, x: float) -> float:
    """Never-spend comparator for the rational family; finite only for
    lam0 > 1 (otherwise the no-spending ruin probability is 1)."""
    if x < 0.0:
        raise ValueError("wealth must be >= 0")
    if not params.lam0 > 1.0:
        raise ValueError("the no-spending comparator needs lam0 > 1")
    t = 1.0 + x
    return (
        params.nu * t ** (1.0 - params.lam0)
        + (params.lam0 - 1.0) * t ** (-params.lam0)
    ) / (params.lam0 + params.nu - 1.0)
