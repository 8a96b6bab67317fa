"""Monte Carlo oracle for the controlled dual risk process.

Three engines, all estimating the probability of hitting 0 before a high
survival barrier B:

* ``simulate_constant`` — pure jump dynamics, simulated exactly event by
  event (ruin between jumps is resolved analytically, so there is no time
  discretization at all).
* ``simulate_market`` — adds the Brownian market position; jump times are
  still drawn exactly, the diffusion between them is Euler-Maruyama with
  ruin checked at every substep, and a step-halving re-run on a tenth of the
  paths reports the discretization drift.
* ``simulate_state`` — wealth-dependent coefficients; jump times come from
  thinning against a monotone-interval envelope and the drift ODE is
  integrated with small steps.

Declaring survival at B instead of at infinity biases the estimate downward
by at most the ruin probability from B, so B is chosen from a decay-rate
hint via ``choose_barrier`` and the bound is reported on the estimate.
Everything is vectorized across paths; worker w draws from generators seeded
(base_seed + w, stream), so a run is reproducible given its config and seed.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distributions import Exponential, JumpLaw
from .market import MarketParams
from .solver import ModelParams
from .statedep import BangBangPolicy, Policy, StateModel, _max_region_mask

__all__ = [
    "SimConfig",
    "MCEstimate",
    "ConfigError",
    "EnvelopeError",
    "StepWarning",
    "choose_barrier",
    "jump_interarrivals",
    "simulate_constant",
    "simulate_market",
    "simulate_state",
]

_JUMP_STREAM = 1
_DIFFUSION_STREAM = 2
_THINNING_STREAM = 3
_DIAG_SEED_OFFSET = 10_000_019
_CAP_SEED_OFFSET = 20_000_003
_ENVELOPE_SAFETY = 1.05
_CHUNK_PATHS = 2_500


class ConfigError(ValueError):
    """Simulation configuration is internally inconsistent."""


class EnvelopeError(RuntimeError):
    """The thinning envelope was exceeded by the true intensity.

    A violated envelope invalidates the whole estimator (accepted jumps are
    no longer a thinning of the true process), so this aborts the run rather
    than the single offending path.
    """


class StepWarning(UserWarning):
    """Discretization drift looks large relative to the statistical error."""


@dataclass(frozen=True)
class SimConfig:
    survival_barrier: float
    n_paths: int = 10_000
    base_seed: int = 0
    barrier_tail: float = 1e-4
    t_max: float = 500.0
    euler_dt: float = 1e-3
    cap_m: float = 1e3
    n_workers: int = 1

    def __post_init__(self):
        if not self.survival_barrier > 0.0:
            raise ConfigError("survival_barrier must be positive")
        if self.n_paths < 1000:
            raise ConfigError("n_paths below 1000 gives meaningless error bars")
        if not 0.0 < self.barrier_tail < 1.0:
            raise ConfigError("barrier_tail must lie in (0, 1)")
        if not self.t_max > 0.0:
            raise ConfigError("t_max must be positive")
        if not self.euler_dt > 0.0:
            raise ConfigError("euler_dt must be positive")
        if not self.cap_m > 0.0:
            raise ConfigError("cap_m must be positive")
        if self.n_workers < 1:
            raise ConfigError("n_workers must be at least 1")


@dataclass(frozen=True)
class MCEstimate:
    """Ruin-probability estimate with its accounting.

    p_hat counts ruined paths over all paths; std_err is the exact Bernoulli
    standard error sqrt(p(1-p)/n).  bias_bound adds the barrier tail to the
    censored fraction: paths that reached B are declared survivors (wrong
    with probability at most the tail) and paths cut at t_max are counted as
    non-ruined.  step_drift / cap_drift carry the engine-specific
    discretization diagnostics when they apply.
    """

    p_hat: float
    std_err: float
    n_ruined: int
    n_survived: int
    n_censored: int
    bias_bound: float
    step_drift: Optional[float] = None
    cap_drift: Optional[float] = None

    def to_json_dict(self) -> dict:
        out = {
            "p_hat": self.p_hat,
            "std_err": self.std_err,
            "n_ruined": self.n_ruined,
            "n_survived": self.n_survived,
            "n_censored": self.n_censored,
            "bias_bound": self.bias_bound,
        }
        if self.step_drift is not None:
            out["step_drift"] = self.step_drift
        if self.cap_drift is not None:
            out["cap_drift"] = self.cap_drift
        return out


def choose_barrier(beta_hint: float, tail: float) -> float:
    """Barrier height B with exp(-beta_hint * B) = tail."""
    if not beta_hint > 0.0:
        raise ValueError("beta_hint must be positive")
    if not 0.0 < tail < 1.0:
        raise ValueError("tail must lie in (0, 1)")
    return math.log(1.0 / tail) / beta_hint


def jump_interarrivals(rng: np.random.Generator, rate: float, n: int) -> np.ndarray:
    """Exponential inter-arrival times by inverse CDF (the form every engine
    here uses, so its law can be tested directly)."""
    if not rate > 0.0:
        raise ValueError("rate must be positive")
    return -np.log1p(-rng.random(n)) / rate


def _split_paths(cfg: SimConfig) -> list[tuple[int, int]]:
    # chunk size is fixed so the seed layout, and hence the estimate, does
    # not depend on n_workers; workers only set the thread pool width
    n_chunks = -(-cfg.n_paths // _CHUNK_PATHS)
    base = cfg.n_paths // n_chunks
    sizes = [base + (1 if i < cfg.n_paths % n_chunks else 0) for i in range(n_chunks)]
    return [(cfg.base_seed + i, size) for i, size in enumerate(sizes) if size > 0]


def _run_workers(
    cfg: SimConfig, worker: Callable[[int, int], tuple[int, int, int]]
) -> tuple[int, int, int]:
    tasks = _split_paths(cfg)
    if cfg.n_workers == 1 or len(tasks) == 1:
        results = [worker(*task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=min(cfg.n_workers, len(tasks))) as pool:
            results = list(pool.map(lambda args: worker(*args), tasks))
    ruined = sum(r for r, _, _ in results)
    survived = sum(s for _, s, _ in results)
    censored = sum(c for _, _, c in results)
    return ruined, survived, censored


def _estimate(
    cfg: SimConfig,
    counts: tuple[int, int, int],
    step_drift: Optional[float] = None,
    cap_drift: Optional[float] = None,
) -> MCEstimate:
    ruined, survived, censored = counts
    n = cfg.n_paths
    p = ruined / n
    return MCEstimate(
        p_hat=p,
        std_err=math.sqrt(p * (1.0 - p) / n),
        n_ruined=ruined,
        n_survived=survived,
        n_censored=censored,
        bias_bound=cfg.barrier_tail + censored / n,
        step_drift=step_drift,
        cap_drift=cap_drift,
    )


def _check_start(x0: float, cfg: SimConfig) -> None:
    if not x0 > 0.0:
        raise ValueError("starting wealth must be positive")
    if cfg.survival_barrier <= x0:
        raise ConfigError(
            f"survival barrier {cfg.survival_barrier} must exceed the "
            f"starting wealth {x0}"
        )


def simulate_constant(
    law: JumpLaw, p: ModelParams, c: float, x0: float, cfg: SimConfig
) -> MCEstimate:
    """Exact event-driven estimate for constant coefficients and spending c.

    Between jumps the wealth falls at rate rho + c, so ruin happens before
    the next jump exactly when the inter-arrival exceeds wealth/(rho + c);
    no discretization enters anywhere.
    """
    if c < 0.0:
        raise ValueError("spending rate must be >= 0")
    _check_start(x0, cfg)
    rate = p.lam + p.delta * c**p.gamma
    drift = p.rho + c

    def worker(seed: int, n: int) -> tuple[int, int, int]:
        rng = np.random.default_rng([seed, _JUMP_STREAM])
        x = np.full(n, x0)
        t = np.zeros(n)
        ruined = survived = censored = 0
        while x.size:
            w = jump_interarrivals(rng, rate, x.size)
            ruin_gap = x / drift
            is_ruin = w >= ruin_gap
            event_t = t + np.where(is_ruin, ruin_gap, w)
            timed_out = event_t > cfg.t_max
            censored += int(np.count_nonzero(timed_out))
            live = ~timed_out
            ruined += int(np.count_nonzero(is_ruin & live))
            cont = live & ~is_ruin
            jumps = law.sample_n(rng, int(np.count_nonzero(cont)))
            x = x[cont] - drift * w[cont] + jumps
            t = event_t[cont]
            going = x < cfg.survival_barrier
            survived += int(np.count_nonzero(~going))
            x = x[going]
            t = t[going]
        return ruined, survived, censored

    return _estimate(cfg, _run_workers(cfg, worker))


def _market_engine(
    seed: int,
    n: int,
    law: JumpLaw,
    rate: float,
    drift_a: float,
    vol_b: float,
    x0: float,
    cfg: SimConfig,
    dt: float,
) -> tuple[int, int, int]:
    """One batch of the hybrid scheme: exact jump times, Euler between them.

    Jump inter-arrivals and sizes are pre-drawn in fixed-width blocks from a
    dedicated stream, so two runs with the same seed but different dt see
    identical jump skeletons — that is what makes the step-halving drift a
    discretization measurement rather than fresh Monte Carlo noise.
    """
    jump_rng = np.random.default_rng([seed, _JUMP_STREAM])
    diff_rng = np.random.default_rng([seed, _DIFFUSION_STREAM])
    block = 16
    w_blocks = jump_interarrivals(jump_rng, rate, n * block).reshape(n, block)
    y_blocks = law.sample_n(jump_rng, n * block).reshape(n, block)

    idx = np.arange(n)
    x = np.full(n, x0)
    t = np.zeros(n)
    jcount = np.zeros(n, dtype=np.int64)
    next_jump = w_blocks[:, 0].copy()
    ruined = survived = censored = 0

    while idx.size:
        rem_jump = next_jump - t
        rem_horizon = cfg.t_max - t
        h = np.minimum(dt, np.minimum(rem_jump, rem_horizon))
        np.maximum(h, 0.0, out=h)
        z = diff_rng.standard_normal(idx.size)
        x = x + drift_a * h + vol_b * np.sqrt(h) * z
        t = t + h

        ruin_mask = x <= 0.0
        jump_mask = (h == rem_jump) & ~ruin_mask
        if np.any(jump_mask):
            rows = idx[jump_mask]
            cols = jcount[jump_mask]
            needed = int(cols.max()) + 2
            while needed > w_blocks.shape[1]:
                w_new = jump_interarrivals(jump_rng, rate, n * block).reshape(n, block)
                y_new = law.sample_n(jump_rng, n * block).reshape(n, block)
                w_blocks = np.concatenate([w_blocks, w_new], axis=1)
                y_blocks = np.concatenate([y_blocks, y_new], axis=1)
            x[jump_mask] += y_blocks[rows, cols]
            jcount[jump_mask] = cols + 1
            next_jump[jump_mask] = t[jump_mask] + w_blocks[rows, cols + 1]
        surv_mask = (x >= cfg.survival_barrier) & ~ruin_mask
        horizon_mask = (h == rem_horizon) & ~ruin_mask & ~surv_mask
        ruined += int(np.count_nonzero(ruin_mask))
        survived += int(np.count_nonzero(surv_mask))
        censored += int(np.count_nonzero(horizon_mask))
        keep = ~(ruin_mask | surv_mask | horizon_mask)
        idx = idx[keep]
        x = x[keep]
        t = t[keep]
        jcount = jcount[keep]
        next_jump = next_jump[keep]
    return ruined, survived, censored


def simulate_market(
    law: JumpLaw,
    p: ModelParams,
    m: MarketParams,
    c: float,
    a: float,
    x0: float,
    cfg: SimConfig,
) -> MCEstimate:
    """Estimate under constant spending c and constant index position a.

    The wealth follows dX = (-(rho + c) + a*mu) dt + a*sigma dW between
    profit jumps of intensity lam + delta * c**gamma.  Ruin is checked at
    every Euler substep; the reported ``step_drift`` is the change in p_hat
    when a tenth of the paths are re-run at euler_dt/2 on the same jump
    skeleton, and a StepWarning fires if it exceeds twice the standard
    error.
    """
    if c < 0.0:
        raise ValueError("spending rate must be >= 0")
    _check_start(x0, cfg)
    rate = p.lam + p.delta * c**p.gamma
    drift_a = -(p.rho + c) + a * m.mu
    vol_b = a * m.sigma
    if cfg.euler_dt * abs(drift_a) * rate > 0.1:
        warnings.warn(
            "euler_dt looks coarse: drift moves a noticeable fraction of the "
            "typical inter-jump distance per step",
            StepWarning,
            stacklevel=2,
        )

    counts = _run_workers(
        cfg,
        lambda seed, n: _market_engine(
            seed, n, law, rate, drift_a, vol_b, x0, cfg, cfg.euler_dt
        ),
    )

    n_diag = max(100, cfg.n_paths // 10)
    diag_seed = cfg.base_seed + _DIAG_SEED_OFFSET
    coarse = _market_engine(
        diag_seed, n_diag, law, rate, drift_a, vol_b, x0, cfg, cfg.euler_dt
    )
    fine = _market_engine(
        diag_seed, n_diag, law, rate, drift_a, vol_b, x0, cfg, 0.5 * cfg.euler_dt
    )
    step_drift = abs(coarse[0] - fine[0]) / n_diag

    est = _estimate(cfg, counts, step_drift=step_drift)
    # the probe pair shares only the jump skeleton, so its difference
    # carries fresh diffusion noise of order sqrt(2 p q / n_diag); warn
    # only when the drift clears both that and the main standard error
    probe_noise = math.sqrt(2.0 * est.p_hat * (1.0 - est.p_hat) / n_diag)
    if est.std_err > 0.0 and step_drift > 2.0 * max(est.std_err, probe_noise):
        warnings.warn(
            f"step-halving drift {step_drift:.3g} exceeds twice the standard "
            f"error {est.std_err:.3g}; reduce euler_dt",
            StepWarning,
            stacklevel=2,
        )
    return est


def _state_dynamics(
    model: StateModel, policy: Policy, cap_m: float
) -> tuple[Callable, Callable, Optional[float]]:
    """Vectorized drift rho(x)+C(x) and intensity lam(x)+delta(x)C(x)^gamma
    for the simulator, plus the known policy switch wealth if any."""
    if isinstance(policy, BangBangPolicy):
        if model.gamma != 1.0:
            raise ValueError("bang-bang policies require gamma = 1")
        cap = policy.cap if policy.cap is not None else cap_m

        def drift(x):
            on = _max_region_mask(model, x)
            return model.rho_fn(x) + cap * on

        def intensity(x):
            on = _max_region_mask(model, x)
            return model.lam_fn(x) + model.delta_fn(x) * cap * on

        return drift, intensity, policy.threshold

    if callable(policy):
        c_fn = policy
    else:
        c_const = float(policy)
        if c_const < 0.0:
            raise ValueError("constant spending rate must be >= 0")
        c_fn = lambda x: c_const + 0.0 * x

    def drift(x):
        return model.rho_fn(x) + c_fn(x)

    def intensity(x):
        return model.lam_fn(x) + model.delta_fn(x) * np.asarray(c_fn(x)) ** model.gamma

    return drift, intensity, None


def simulate_state(
    model: StateModel, nu: float, policy: Policy, x0: float, cfg: SimConfig
) -> MCEstimate:
    """Estimate for wealth-dependent coefficients and exponential jumps.

    Jump times come from thinning: candidate times are drawn at an envelope
    rate of 1.05 times the larger of the intensities at the current wealth
    and at 0 (the wealth only falls between jumps, and the catalog intensity
    functions are monotone, so the interval endpoints bound the supremum).
    The envelope is re-evaluated after every candidate.  A candidate whose
    true intensity exceeds the envelope aborts the run with EnvelopeError.
    The drift ODE is integrated with explicit Euler steps of euler_dt; for
    bang-bang policies with a known switch wealth, steps are split exactly
    at the switch.  For a capped Max policy the estimate is re-run at twice
    the cap on a tenth of the paths and the change reported as
    ``cap_drift``.
    """
    _check_start(x0, cfg)
    if not nu > 0.0:
        raise ValueError("nu must be positive")
    law = Exponential(nu)

    def make_worker(drift_fn, intensity_fn, threshold):
        floor_intensity = float(np.max(intensity_fn(np.asarray(0.0))))

        def worker(seed: int, n: int) -> tuple[int, int, int]:
            rng = np.random.default_rng([seed, _THINNING_STREAM])
            x = np.full(n, x0)
            t = np.zeros(n)
            env = _ENVELOPE_SAFETY * np.maximum(
                floor_intensity, np.asarray(intensity_fn(x), dtype=float)
            )
            cand = -np.log1p(-rng.random(n)) / env
            ruined = survived = censored = 0
            dt = cfg.euler_dt
            while x.size:
                rem_c = cand - t
                rem_h = cfg.t_max - t
                h = np.minimum(dt, np.minimum(rem_c, rem_h))
                np.maximum(h, 0.0, out=h)
                rate_now = np.asarray(drift_fn(x), dtype=float)
                snap = None
                if threshold is not None:
                    above = x > threshold
                    h_cross = np.where(above, (x - threshold) / rate_now, np.inf)
                    snap = h_cross < h
                    h = np.where(snap, h_cross, h)
                x = x - rate_now * h
                if snap is not None and np.any(snap):
                    x[snap] = threshold
                t = t + h

                ruin_mask = x <= 0.0
                cand_mask = (h == rem_c) & ~ruin_mask
                surv_now = np.zeros_like(ruin_mask)
                if np.any(cand_mask):
                    x_c = x[cand_mask]
                    inten = np.asarray(intensity_fn(x_c), dtype=float)
                    if np.any(inten > env[cand_mask]):
                        worst = float(x_c[np.argmax(inten - env[cand_mask])])
                        raise EnvelopeError(
                            f"true intensity exceeds the thinning envelope near "
                            f"wealth {worst:.6g}; the intensity is not monotone "
                            "on the traversed interval"
                        )
                    u = rng.random(x_c.size)
                    accept = u * env[cand_mask] <= inten
                    jumps = np.where(accept, law.sample_n(rng, x_c.size), 0.0)
                    x_c = x_c + jumps
                    x[cand_mask] = x_c
                    new_env = _ENVELOPE_SAFETY * np.maximum(
                        floor_intensity, np.asarray(intensity_fn(x_c), dtype=float)
                    )
                    env[cand_mask] = new_env
                    cand[cand_mask] = t[cand_mask] - np.log1p(
                        -rng.random(x_c.size)
                    ) / new_env
                    surv_now[cand_mask] = x_c >= cfg.survival_barrier
                surv_mask = surv_now & ~ruin_mask
                horizon_mask = (h == rem_h) & ~ruin_mask & ~surv_mask
                ruined += int(np.count_nonzero(ruin_mask))
                survived += int(np.count_nonzero(surv_mask))
                censored += int(np.count_nonzero(horizon_mask))
                keep = ~(ruin_mask | surv_mask | horizon_mask)
                x = x[keep]
                t = t[keep]
                env = env[keep]
                cand = cand[keep]
            return ruined, survived, censored

        return worker

    drift_fn, intensity_fn, threshold = _state_dynamics(model, policy, cfg.cap_m)
    counts = _run_workers(cfg, make_worker(drift_fn, intensity_fn, threshold))

    cap_drift = None
    if isinstance(policy, BangBangPolicy):
        cap = policy.cap if policy.cap is not None else cfg.cap_m
        n_diag = max(100, cfg.n_paths // 10)
        diag_cfg_counts = []
        for cap_k in (cap, 2.0 * cap):
            doubled = BangBangPolicy(cap=cap_k, threshold=policy.threshold)
            d_fn, i_fn, thr = _state_dynamics(model, doubled, cfg.cap_m)
            w = make_worker(d_fn, i_fn, thr)
            diag_cfg_counts.append(w(cfg.base_seed + _CAP_SEED_OFFSET, n_diag))
        cap_drift = abs(diag_cfg_counts[0][0] - diag_cfg_counts[1][0]) / n_diag

    return _estimate(cfg, counts, cap_drift=cap_drift)
