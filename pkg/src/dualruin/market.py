"""R&D spending combined with investment in a log-normal market index.

Holding an amount A of the index adds A*mu*dt + A*sigma*dW to the surplus.
The optimal exposure turns out to be A* = mu / (sigma^2 * beta), and its
effect on the characteristic equation is a single extra term
-mu^2 / (2 sigma^2 beta).  That term tends to -inf at 0+, which is why the
sublinear market model is feasible for every parameter set: the equation
always crosses zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .distributions import GEvaluator, JumpLaw
from .numerics import Tolerance, expand_bracket, find_root
from .solver import (
    ModelParams,
    WrongRegime,
    c_star_from_beta,
    c_star_implicit_residual,
    _characteristic_sublinear,
)

__all__ = [
    "MarketParams",
    "MarketRegime",
    "MarketRuinSolution",
    "solve_market_sublinear",
    "solve_market_singular",
    "beta_of_capped_c",
]

_SOLVER_TOL = Tolerance(abs_x=1e-15, abs_f=1e-14, max_iter=200)


@dataclass(frozen=True)
class MarketParams:
    """Index excess drift mu and volatility sigma (both > 0)."""

    mu: float
    sigma: float

    def __post_init__(self):
        for name in ("mu", "sigma"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    @property
    def pressure(self) -> float:
        """The constant mu^2/(2 sigma^2) the market contributes to every
        characteristic equation here."""
        return self.mu * self.mu / (2.0 * self.sigma * self.sigma)


class MarketRegime(Enum):
    SUB_LINEAR_MARKET = "sublinear_market"
    SINGULAR_MARKET_NO_INVEST = "singular_market_no_invest"
    SINGULAR_MARKET_MAX_INVEST = "singular_market_max_invest"


@dataclass(frozen=True)
class MarketRuinSolution:
    """Exponent, spending rate, and index exposure for the market model.

    Always feasible: the minimal ruin probability is exp(-beta x) with
    beta > 0.  In the gamma = 1 case ``beta1``/``beta2`` record the two
    candidate exponents (no spending with investment, maximal spending) whose
    maximum wins.
    """

    regime: MarketRegime
    beta: float
    a_star: float
    c_star: Optional[float] = None
    max_invest: bool = False
    beta1: Optional[float] = None
    beta2: Optional[float] = None
    residual: float = 0.0
    c_star_residual: Optional[float] = None

    def value_at(self, x: float) -> float:
        if x < 0.0:
            raise ValueError("wealth must be >= 0")
        if x == 0.0:
            return 1.0
        return math.exp(-self.beta * x)


def solve_market_sublinear(
    law: JumpLaw, p: ModelParams, m: MarketParams
) -> MarketRuinSolution:
    """gamma < 1 with index investment: solve the shifted characteristic
    equation; no feasibility condition is needed."""
    if not 0.0 < p.gamma < 1.0:
        raise WrongRegime(f"requires 0 < gamma < 1, got {p.gamma}")
    big_g = _characteristic_sublinear(law, p)
    h = lambda beta: big_g(beta) - m.pressure / beta
    beta = find_root(h, expand_bracket(h), _SOLVER_TOL)
    c_star = c_star_from_beta(law, p, beta)
    return MarketRuinSolution(
        regime=MarketRegime.SUB_LINEAR_MARKET,
        beta=beta,
        a_star=m.mu / (m.sigma * m.sigma * beta),
        c_star=c_star,
        residual=h(beta),
        c_star_residual=c_star_implicit_residual(p, c_star),
    )


def solve_market_singular(
    law: JumpLaw, p: ModelParams, m: MarketParams
) -> MarketRuinSolution:
    """gamma = 1 with index investment.

    Two candidate exponents compete: beta1 from investing without spending
    (rho b + lam (L(b) - 1) - mu^2/(2 sigma^2) = 0, strictly convex in b with
    a negative value at 0, hence a unique positive root) and beta2 from
    maximal spending (b + delta (L(b) - 1) = 0, positive root iff
    delta E[Y] > 1, else 0).  The larger one is the decay exponent; a tie
    goes to maximal spending.
    """
    if p.gamma != 1.0:
        raise WrongRegime(f"requires gamma = 1, got {p.gamma}")
    ev = GEvaluator(law)
    pressure = m.pressure

    f1 = lambda b: p.rho * b - p.lam * law.one_minus_laplace(b) - pressure
    beta1 = find_root(f1, expand_bracket(f1), _SOLVER_TOL)

    if p.delta * law.mean > 1.0:
        f2 = lambda b: 1.0 - p.delta * ev(b)
        beta2 = find_root(f2, expand_bracket(f2), _SOLVER_TOL)
    else:
        beta2 = 0.0

    if beta1 > beta2:
        beta = beta1
        regime = MarketRegime.SINGULAR_MARKET_NO_INVEST
        c_star: Optional[float] = 0.0
        max_invest = False
        residual = f1(beta)
    else:
        beta = beta2
        regime = MarketRegime.SINGULAR_MARKET_MAX_INVEST
        c_star = None
        max_invest = True
        residual = beta + p.delta * (law.laplace(beta) - 1.0)
    return MarketRuinSolution(
        regime=regime,
        beta=beta,
        a_star=m.mu / (m.sigma * m.sigma * beta),
        c_star=c_star,
        max_invest=max_invest,
        beta1=beta1,
        beta2=beta2,
        residual=residual,
    )


def beta_of_capped_c(law: JumpLaw, p: ModelParams, m: MarketParams, c: float) -> float:
    """Decay exponent when gamma = 1 spending is capped at the finite rate c
    (with index investment).

    Solves (rho + c) b - (lam + delta c)(1 - L(b)) - mu^2/(2 sigma^2) = 0,
    which reduces to the no-spending equation at c = 0 and whose root climbs
    toward the maximal-spending exponent as c grows (when delta E[Y] > 1).
    """
    if p.gamma != 1.0:
        raise WrongRegime(f"requires gamma = 1, got {p.gamma}")
    if c < 0.0:
        raise ValueError("cap must be >= 0")
    pressure = m.pressure
    f = lambda b: (p.rho + c) * b - (p.lam + p.delta * c) * law.one_minus_laplace(
        b
    ) - pressure
    return find_root(f, expand_bracket(f), _SOLVER_TOL)
