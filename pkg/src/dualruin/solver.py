"""Optimal constant R&D spending for the dual risk model without a market.

The surplus drifts down at rate rho, spending at rate C raises the profit
arrival intensity from lam to lam + delta * C**gamma, and the minimal ruin
probability is exp(-beta * x) whenever the model is feasible.  The curvature
gamma splits the problem into three regimes:

* gamma < 1: a single interior spending rate C* is optimal and beta solves a
  monotone characteristic equation (``solve_sublinear``).
* gamma = 1: the optimum is bang-bang in delta versus lam/rho — spend nothing
  or spend as much as possible (``solve_singular``).
* gamma > 1: spending scales superlinearly and ruin can be made arbitrarily
  rare, so the minimal ruin probability degenerates to zero
  (``classify_superlinear``).

``asymptotic_report`` tabulates the solver against its known limiting
behaviour along several parameter sweeps, which is the cheapest independent
check that the root finding is wired up correctly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Optional

from .distributions import GEvaluator, JumpLaw
from .numerics import Bracket, NoBracketFound, Tolerance, expand_bracket, find_root

if TYPE_CHECKING:
    from .market import MarketParams

__all__ = [
    "ModelParams",
    "Regime",
    "RuinSolution",
    "WrongRegime",
    "AsymptoticRow",
    "condition_lhs",
    "check_condition_one",
    "alpha_no_investment",
    "alpha_constant_c",
    "solve_sublinear",
    "solve_singular",
    "classify_superlinear",
    "c_star_from_beta",
    "c_star_implicit_residual",
    "gamma_one_balanced_limit",
    "asymptotic_report",
    "ASYMPTOTIC_KNOBS",
]

# Tight abs_x pushes bisection to the ulp floor so equation residuals stay
# below 1e-9 even for stiff parameter sets (gamma near 1).
_SOLVER_TOL = Tolerance(abs_x=1e-15, abs_f=1e-14, max_iter=200)
_EXP_OVERFLOW = 709.0


class WrongRegime(ValueError):
    """Raised when an operation is called outside its gamma regime."""


class Regime(Enum):
    SUB_LINEAR = "sublinear"
    SINGULAR_NO_INVEST = "singular_no_invest"
    SINGULAR_MAX_INVEST = "singular_max_invest"
    SINGULAR_INDIFFERENT = "singular_indifferent"
    SUPER_LINEAR_DEGENERATE = "superlinear_degenerate"


@dataclass(frozen=True)
class ModelParams:
    """Constant model coefficients: drift rho, base intensity lam,
    spending efficiency delta, curvature gamma."""

    rho: float
    lam: float
    delta: float
    gamma: float

    def __post_init__(self):
        for name in ("rho", "lam", "delta", "gamma"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class RuinSolution:
    """Outcome of a solve: decay exponent, optimal spending, diagnostics.

    ``feasible`` False means the minimal ruin probability is identically 1
    and beta/c_star are absent.  ``max_invest`` True marks the regimes whose
    optimum is "spend as much as possible"; c_star is None there because no
    finite rate attains it.  ``beta`` is math.inf in the degenerate
    superlinear regime where the value function vanishes.
    """

    feasible: bool
    regime: Regime
    beta: Optional[float] = None
    c_star: Optional[float] = None
    max_invest: bool = False
    residual: float = 0.0
    c_star_residual: Optional[float] = None
    diagnostic: Optional[str] = None

    def value_at(self, x: float) -> float:
        """Minimal ruin probability started from wealth x >= 0."""
        if x < 0.0:
            raise ValueError("wealth must be >= 0")
        if x == 0.0:
            return 1.0
        if not self.feasible:
            return 1.0
        if self.beta is None:
            raise ValueError("feasible solution without an exponent")
        if math.isinf(self.beta):
            return 0.0
        return math.exp(-self.beta * x)


def _exp_or_inf(t: float) -> float:
    if t > _EXP_OVERFLOW:
        return math.inf
    return math.exp(t)


def _power_term(p: ModelParams, g_value: float) -> float:
    """(delta*gamma*g)^(1/(1-gamma)) * (1/gamma - 1), evaluated in log space.

    Overflows deliberately saturate to +inf: the term appears subtracted in
    the characteristic function, so +inf just means "deep negative side",
    which bisection handles.
    """
    exponent = 1.0 / (1.0 - p.gamma)
    t = exponent * math.log(p.delta * p.gamma * g_value)
    return (1.0 / p.gamma - 1.0) * _exp_or_inf(t)


def condition_lhs(law: JumpLaw, p: ModelParams) -> float:
    """Left-hand side of the feasibility condition for gamma < 1.

    Negative means the optimally controlled surplus drifts upward and a
    positive decay exponent exists; >= 0 means ruin is certain no matter the
    spending rate.
    """
    if not p.gamma < 1.0:
        raise WrongRegime("feasibility condition applies to gamma < 1 only")
    return (p.rho - p.lam * law.mean) - _power_term(p, law.mean)


def check_condition_one(law: JumpLaw, p: ModelParams) -> bool:
    """True when the gamma < 1 model is feasible (condition LHS < 0).

    Exact equality sits on the boundary where the exponent degenerates to 0,
    and is reported as infeasible.
    """
    return condition_lhs(law, p) < 0.0


def _characteristic_sublinear(law: JumpLaw, p: ModelParams) -> Callable[[float], float]:
    ev = GEvaluator(law)

    def big_g(beta: float) -> float:
        g = ev(beta)
        return p.rho - _power_term(p, g) - p.lam * g

    return big_g


def c_star_from_beta(law: JumpLaw, p: ModelParams, beta: float) -> float:
    """Optimal spending rate recovered from the solved exponent,
    C* = (delta * gamma * g(beta))^(1/(1-gamma))."""
    g = GEvaluator(law)(beta)
    return _exp_or_inf(math.log(p.delta * p.gamma * g) / (1.0 - p.gamma))


def c_star_implicit_residual(p: ModelParams, c: float) -> float:
    """Residual of the first-order condition
    lam + (1-gamma) delta C^gamma - rho delta gamma C^(gamma-1),
    kept as a free cross-check on ``c_star_from_beta``."""
    return (
        p.lam
        + (1.0 - p.gamma) * p.delta * c**p.gamma
        - p.rho * p.delta * p.gamma * c ** (p.gamma - 1.0)
    )


def alpha_no_investment(law: JumpLaw, rho: float, lam: float) -> Optional[float]:
    """Decay exponent of the uncontrolled dual model, or None if infeasible.

    Solves rho - lam * g(alpha) = 0; a positive root exists iff
    lam * E[Y] > rho (profit inflow beats the drift).
    """
    if rho <= 0.0 or lam <= 0.0:
        raise ValueError("rho and lam must be positive")
    if lam * law.mean <= rho:
        return None
    ev = GEvaluator(law)
    f = lambda a: rho - lam * ev(a)
    return find_root(f, expand_bracket(f), _SOLVER_TOL)


def alpha_constant_c(law: JumpLaw, p: ModelParams, c: float) -> Optional[float]:
    """Decay exponent under a fixed spending rate c >= 0, or None if that
    rate cannot keep the surplus drifting upward."""
    if c < 0.0:
        raise ValueError("spending rate must be >= 0")
    intensity = p.lam + p.delta * c**p.gamma
    drift = p.rho + c
    if intensity * law.mean <= drift:
        return None
    ev = GEvaluator(law)
    f = lambda a: drift - intensity * ev(a)
    return find_root(f, expand_bracket(f), _SOLVER_TOL)


def solve_sublinear(law: JumpLaw, p: ModelParams) -> RuinSolution:
    """Solve the gamma < 1 model: exponent beta and interior optimum C*."""
    if not 0.0 < p.gamma < 1.0:
        raise WrongRegime(f"solve_sublinear requires 0 < gamma < 1, got {p.gamma}")
    if not check_condition_one(law, p):
        return RuinSolution(
            feasible=False,
            regime=Regime.SUB_LINEAR,
            diagnostic="feasibility condition fails: "
            f"condition LHS = {condition_lhs(law, p):.6g} >= 0",
        )
    big_g = _characteristic_sublinear(law, p)
    try:
        bracket = expand_bracket(big_g)
    except NoBracketFound:
        # Cannot happen when the condition holds (the function is negative
        # near 0 and tends to rho > 0), but degrade gracefully if it does.
        return RuinSolution(
            feasible=False,
            regime=Regime.SUB_LINEAR,
            diagnostic="characteristic function never changes sign",
        )
    beta = find_root(big_g, bracket, _SOLVER_TOL)
    c_star = c_star_from_beta(law, p, beta)
    return RuinSolution(
        feasible=True,
        regime=Regime.SUB_LINEAR,
        beta=beta,
        c_star=c_star,
        residual=big_g(beta),
        c_star_residual=c_star_implicit_residual(p, c_star),
    )


def solve_singular(law: JumpLaw, p: ModelParams) -> RuinSolution:
    """Solve the gamma = 1 model, where the optimum is bang-bang.

    delta < lam/rho: spending never pays, the no-investment exponent rules.
    delta > lam/rho: spend maximally; the exponent solves
    beta + delta (L(beta) - 1) = 0 and exists iff delta E[Y] > 1.
    delta = lam/rho: every constant rate yields the same exponent; c_star is
    reported as 0 as a representative.
    """
    if p.gamma != 1.0:
        raise WrongRegime(f"solve_singular requires gamma = 1, got {p.gamma}")
    threshold = p.lam / p.rho
    ev = GEvaluator(law)

    if p.delta < threshold:
        alpha = alpha_no_investment(law, p.rho, p.lam)
        if alpha is None:
            return RuinSolution(
                feasible=False,
                regime=Regime.SINGULAR_NO_INVEST,
                diagnostic="lam * E[Y] <= rho: ruin certain without spending, "
                "and spending is not worth it here",
            )
        return RuinSolution(
            feasible=True,
            regime=Regime.SINGULAR_NO_INVEST,
            beta=alpha,
            c_star=0.0,
            residual=p.rho * alpha + p.lam * (law.laplace(alpha) - 1.0),
        )

    if p.delta > threshold:
        if p.delta * law.mean <= 1.0:
            return RuinSolution(
                feasible=False,
                regime=Regime.SINGULAR_MAX_INVEST,
                max_invest=True,
                diagnostic="delta * E[Y] <= 1: even unlimited spending cannot "
                "turn the drift around",
            )
        f = lambda b: 1.0 - p.delta * ev(b)
        beta = find_root(f, expand_bracket(f), _SOLVER_TOL)
        return RuinSolution(
            feasible=True,
            regime=Regime.SINGULAR_MAX_INVEST,
            beta=beta,
            max_invest=True,
            residual=beta + p.delta * (law.laplace(beta) - 1.0),
        )

    alpha = alpha_no_investment(law, p.rho, p.lam)
    if alpha is None:
        return RuinSolution(
            feasible=False,
            regime=Regime.SINGULAR_INDIFFERENT,
            diagnostic="boundary case delta = lam/rho with lam * E[Y] <= rho",
        )
    return RuinSolution(
        feasible=True,
        regime=Regime.SINGULAR_INDIFFERENT,
        beta=alpha,
        c_star=0.0,
        residual=p.rho * alpha + p.lam * (law.laplace(alpha) - 1.0),
        diagnostic="delta = lam/rho: every constant spending rate attains "
        "the same exponent",
    )


def classify_superlinear(law: JumpLaw, p: ModelParams) -> RuinSolution:
    """gamma > 1: the minimal ruin probability is 0 for any positive wealth,
    approached by spending ever harder; no finite rate attains it."""
    if not p.gamma > 1.0:
        raise WrongRegime(f"classify_superlinear requires gamma > 1, got {p.gamma}")
    return RuinSolution(
        feasible=True,
        regime=Regime.SUPER_LINEAR_DEGENERATE,
        beta=math.inf,
        max_invest=True,
        diagnostic="value identically 0 for x > 0, approached as C grows; "
        "see alpha_constant_c for the exponent at a fixed rate",
    )


def gamma_one_balanced_limit(p: ModelParams) -> tuple[float, bool]:
    """Limit of C* as gamma -> 1 when rho * delta = lam exactly.

    The limit solves delta * x + lam * (1 + log x) = 0, which is increasing
    on (0, 1] with a sign change from -inf to delta + lam, so the root is
    unique.  Returns (root, True); the flag goes False in the defensive case
    where no sign change is found on (0, 1].
    """
    f = lambda x: p.delta * x + p.lam * (1.0 + math.log(x))
    lo = 1.0
    for _ in range(60):
        lo *= 0.5
        if f(lo) < 0.0:
            return find_root(f, Bracket(lo, 1.0), _SOLVER_TOL), True
    return math.nan, False


ASYMPTOTIC_KNOBS = (
    "rho_to_zero",
    "delta_to_infinity",
    "delta_to_zero",
    "lambda_to_infinity",
    "boundary",
    "gamma_to_zero",
    "gamma_to_one",
)


@dataclass(frozen=True)
class AsymptoticRow:
    """One sweep point: solved values next to the predicted asymptote.

    ``quantity`` names which of beta/c_star the prediction is for, and
    ``ratio`` is solved/predicted (None when that sweep point is infeasible
    or the solve degenerates).
    """

    knob: str
    param: float
    beta: Optional[float]
    c_star: Optional[float]
    quantity: str
    predicted: float
    ratio: Optional[float]


def _geom(a: float, b: float, n: int) -> list[float]:
    r = (b / a) ** (1.0 / (n - 1))
    return [a * r**i for i in range(n)]


def _solve_point(
    law: JumpLaw, p: ModelParams, market: Optional["MarketParams"]
) -> tuple[Optional[float], Optional[float]]:
    if market is not None:
        from .market import solve_market_sublinear

        sol = solve_market_sublinear(law, p, market)
        return sol.beta, sol.c_star
    sol = solve_sublinear(law, p)
    if not sol.feasible:
        return None, None
    return sol.beta, sol.c_star


def asymptotic_report(
    law: JumpLaw,
    p: ModelParams,
    knob: str,
    market: Optional["MarketParams"] = None,
) -> list[AsymptoticRow]:
    """Sweep one parameter toward its limit and compare against the known
    asymptote.

    Knobs and their predictions (ratio of solved quantity to prediction
    tends to 1):

    * rho_to_zero:        beta ~ lam_eff / rho, where lam_eff = lam plus the
                          market pressure mu^2/(2 sigma^2) when investing.
    * delta_to_infinity:  C* -> rho / (1/gamma - 1).
    * delta_to_zero:      beta -> the no-spending exponent.
    * lambda_to_infinity: C* ~ (delta gamma)^(1/(1-gamma)) (rho/lam)^(1/(1-gamma)).
    * boundary:           rho approaches the feasibility boundary from below;
                          beta vanishes linearly with the documented slope.
                          (No-market only.)
    * gamma_to_zero:      C* ~ gamma * rho * delta / (lam + delta) without a
                          market; with one, the limit drift equation is
                          solved for the prefactor.
    * gamma_to_one:       dispatches on sign(rho*delta - lam); no-market only.
    """
    if knob not in ASYMPTOTIC_KNOBS:
        raise ValueError(f"unknown knob {knob!r}; choose from {ASYMPTOTIC_KNOBS}")
    if market is not None and knob in ("boundary", "gamma_to_one"):
        raise WrongRegime(f"knob {knob!r} is only available without a market")

    ev = GEvaluator(law)
    pressure = 0.0
    if market is not None:
        pressure = market.mu**2 / (2.0 * market.sigma**2)
    rows: list[AsymptoticRow] = []

    def emit(knob_name, param, beta, c_star, quantity, predicted):
        solved = beta if quantity == "beta" else c_star
        ratio = None if (solved is None or predicted == 0.0) else solved / predicted
        rows.append(
            AsymptoticRow(knob_name, param, beta, c_star, quantity, predicted, ratio)
        )

    if knob == "rho_to_zero":
        for rho in _geom(min(p.rho, 0.1), 1e-4, 7):
            q = ModelParams(rho, p.lam, p.delta, p.gamma)
            beta, c_star = _solve_point(law, q, market)
            emit(knob, rho, beta, c_star, "beta", (p.lam + pressure) / rho)

    elif knob == "delta_to_infinity":
        for delta in _geom(max(p.delta, 1.0), 1e4, 7):
            q = ModelParams(p.rho, p.lam, delta, p.gamma)
            beta, c_star = _solve_point(law, q, market)
            emit(knob, delta, beta, c_star, "c_star", p.rho / (1.0 / p.gamma - 1.0))

    elif knob == "delta_to_zero":
        if market is None:
            alpha = alpha_no_investment(law, p.rho, p.lam)
            if alpha is None:
                raise WrongRegime(
                    "delta_to_zero needs a feasible no-spending model "
                    "(lam * E[Y] > rho)"
                )
        else:
            f = lambda a: p.rho - p.lam * ev(a) - pressure / a
            alpha = find_root(f, expand_bracket(f), _SOLVER_TOL)
        for delta in _geom(min(p.delta, 1.0), 1e-8, 7):
            q = ModelParams(p.rho, p.lam, delta, p.gamma)
            beta, c_star = _solve_point(law, q, market)
            emit(knob, delta, beta, c_star, "beta", alpha)

    elif knob == "lambda_to_infinity":
        for lam in _geom(max(p.lam, 1.0), 1e4, 7):
            q = ModelParams(p.rho, lam, p.delta, p.gamma)
            beta, c_star = _solve_point(law, q, market)
            predicted = _exp_or_inf(
                math.log(p.delta * p.gamma * p.rho / lam) / (1.0 - p.gamma)
            )
            emit(knob, lam, beta, c_star, "c_star", predicted)

    elif knob == "boundary":
        if not p.gamma < 1.0:
            raise WrongRegime("boundary knob requires gamma < 1")
        ey = law.mean
        ey2 = law.second_moment
        rho_crit = p.lam * ey + _power_term(p, ey)
        lead = _exp_or_inf(math.log(p.delta * p.gamma * ey) / (1.0 - p.gamma))
        slope = lead / (2.0 * p.gamma) * (ey2 / ey) + 0.5 * p.lam * ey2
        for s in _geom(0.3, 1e-3, 7):
            rho = rho_crit * (1.0 - s)
            q = ModelParams(rho, p.lam, p.delta, p.gamma)
            beta, c_star = _solve_point(law, q, None)
            emit(knob, rho, beta, c_star, "beta", (rho_crit - rho) / slope)

    elif knob == "gamma_to_zero":
        for gamma in (0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3):
            q = ModelParams(p.rho, p.lam, p.delta, gamma)
            beta, c_star = _solve_point(law, q, market)
            if market is None:
                predicted = gamma * p.rho * p.delta / (p.lam + p.delta)
            else:
                # Limit system: iota solves rho - (1 + lam/delta) g(iota)
                #               - pressure/iota = 0, and C* ~ gamma * g(iota).
                f = lambda i: p.rho - (1.0 + p.lam / p.delta) * ev(i) - pressure / i
                iota = find_root(f, expand_bracket(f), _SOLVER_TOL)
                predicted = gamma * ev(iota)
            emit(knob, gamma, beta, c_star, "c_star", predicted)

    elif knob == "gamma_to_one":
        sign = p.rho * p.delta - p.lam
        balanced_root = None
        if sign == 0.0:
            balanced_root, ok = gamma_one_balanced_limit(p)
            if not ok:
                raise WrongRegime("balanced gamma -> 1 limit equation has no root")
        for gamma in (0.9, 0.97, 0.99, 0.997, 0.999):
            q = ModelParams(p.rho, p.lam, p.delta, gamma)
            beta, c_star = _solve_point(law, q, None)
            if sign > 0.0:
                predicted = sign / (p.delta * (1.0 - gamma))
            elif sign == 0.0:
                predicted = balanced_root
            else:
                predicted = (1.0 / math.e) * _exp_or_inf(
                    math.log(p.rho * p.delta / p.lam) / (1.0 - gamma)
                )
            emit(knob, gamma, beta, c_star, "c_star", predicted)

    return rows
