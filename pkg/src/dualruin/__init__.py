"""Ruin probabilities for a firm that spends on discovery and invests.

The surplus drains at a constant rate and is replenished by random profit
jumps; spending raises the jump intensity with diminishing returns, and an
optional position in a risky index adds drift and noise.  The package
computes the minimal ruin probability exp(-beta * x) together with the
optimal spending rate and index position in every tractable regime, handles
wealth-dependent coefficients by quadrature, and cross-checks all of it by
direct simulation.
"""

from .distributions import Deterministic, Exponential, Gamma, GEvaluator, JumpLaw
from .market import (
    MarketParams,
    MarketRegime,
    MarketRuinSolution,
    beta_of_capped_c,
    solve_market_singular,
    solve_market_sublinear,
)
from .montecarlo import (
    ConfigError,
    EnvelopeError,
    MCEstimate,
    SimConfig,
    StepWarning,
    choose_barrier,
    simulate_constant,
    simulate_market,
    simulate_state,
)
from .numerics import (
    Bracket,
    NoBracketFound,
    NumericsError,
    Tolerance,
    erfc,
    expand_bracket,
    find_root,
    integrate_semiinf,
)
from .solver import (
    ASYMPTOTIC_KNOBS,
    AsymptoticRow,
    ModelParams,
    Regime,
    RuinSolution,
    WrongRegime,
    alpha_constant_c,
    alpha_no_investment,
    asymptotic_report,
    c_star_from_beta,
    check_condition_one,
    classify_superlinear,
    condition_lhs,
    solve_singular,
    solve_sublinear,
)
from .statedep import (
    BangBang,
    BangBangPolicy,
    NonIntegrable,
    StateExampleIIParams,
    StateExampleIParams,
    StateModel,
    StateRuinEvaluator,
    c_star_bangbang,
    c_star_pointwise,
    closed_form_state_ex1,
    closed_form_state_ex2,
    ruin_probability_quadrature,
    state_ex2_no_investment,
)

__version__ = "0.1.0"

__all__ = [
    "ASYMPTOTIC_KNOBS",
    "AsymptoticRow",
    "BangBang",
    "BangBangPolicy",
    "Bracket",
    "ConfigError",
    "Deterministic",
    "EnvelopeError",
    "Exponential",
    "GEvaluator",
    "Gamma",
    "JumpLaw",
    "MCEstimate",
    "MarketParams",
    "MarketRegime",
    "MarketRuinSolution",
    "ModelParams",
    "NoBracketFound",
    "NonIntegrable",
    "NumericsError",
    "Regime",
    "RuinSolution",
    "SimConfig",
    "StateExampleIIParams",
    "StateExampleIParams",
    "StateModel",
    "StateRuinEvaluator",
    "StepWarning",
    "Tolerance",
    "WrongRegime",
    "alpha_constant_c",
    "alpha_no_investment",
    "asymptotic_report",
    "beta_of_capped_c",
    "c_star_bangbang",
    "c_star_from_beta",
    "c_star_pointwise",
    "check_condition_one",
    "choose_barrier",
    "classify_superlinear",
    "closed_form_state_ex1",
    "closed_form_state_ex2",
    "condition_lhs",
    "erfc",
    "expand_bracket",
    "find_root",
    "integrate_semiinf",
    "ruin_probability_quadrature",
    "simulate_constant",
    "simulate_market",
    "simulate_state",
    "solve_market_singular",
    "solve_market_sublinear",
    "solve_singular",
    "solve_sublinear",
    "state_ex2_no_investment",
    "__version__",
]
