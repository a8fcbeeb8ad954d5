"""
Efficient Market Model
Log-normal geometric random walk whose drift is tied to the risk-free rate,
its sign probabilities, and path simulators for oracles and power studies
"""

import logging
import math
from datetime import date

import numpy as np
from scipy import special

from models.models import GrwParams, PriceSeries, SignSeries
from src.errors import DomainError, SizeError

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


def mu_from(r_f: float, sigma: float) -> float:
    """mu = log(1 + r_f) - sigma**2 / 2, so that E(Q) = 1 + r_f"""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    return math.log1p(r_f) - sigma ** 2 / 2


def lognormal_cdf(u: float, mu: float, sigma: float) -> float:
    """P(Q <= u) = 1/2 + 1/2 erf((log u - mu) / sqrt(2 sigma**2))"""
    if u <= 0:
        raise DomainError(f"log-normal cdf is defined for u > 0, got {u}")
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    # erfc keeps full relative precision in the lower tail
    return float(0.5 * special.erfc(-(math.log(u) - mu) / (sigma * SQRT2)))


def down_probability(r_f: float, sigma: float) -> float:
    """
    q = P(Q <= 1) = 1/2 + 1/2 erf(sigma / (2 sqrt 2) - log(1 + r_f) / (sigma sqrt 2)).

    Equals 1/2 exactly when r_f = exp(sigma**2 / 2) - 1.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    x = sigma / (2.0 * SQRT2) - math.log1p(r_f) / (sigma * SQRT2)
    return float(0.5 * special.erfc(-x))


def _ordinal_dates(count: int) -> list:
    """Pseudo-dates for synthetic series: trading day i is date.fromordinal(i + 1)"""
    return [date.fromordinal(i + 1) for i in range(count)]


def simulate_steps(params: GrwParams, rng_seed: int) -> np.ndarray:
    """t_max i.i.d. log-normal factors Q_i with log Q ~ N(mu, sigma)"""
    rng = np.random.default_rng(rng_seed)
    return np.exp(rng.normal(params.mu, params.sigma, size=params.t_max))


def simulate_grw(params: GrwParams, rng_seed: int, label: str = "GRW") -> PriceSeries:
    """S(t) = s0 * prod_{i<=t} Q_i for t = 0..t_max, on ordinal pseudo-dates"""
    log_q = np.log(simulate_steps(params, rng_seed))
    values = params.s0 * np.exp(np.concatenate(([0.0], np.cumsum(log_q))))
    logger.debug("Simulated %d GRW steps (mu=%.3g, sigma=%.3g)", params.t_max, params.mu, params.sigma)
    return PriceSeries(label=label, dates=_ordinal_dates(params.t_max + 1), values=values.tolist())


def simulate_persistent_signs(length: int, persistence: float, rng_seed: int) -> SignSeries:
    """
    Two-state Markov sign chain: each sign repeats the previous one with
    probability `persistence`. 0.5 gives the memoryless Bernoulli(1/2) process.
    """
    if length < 1:
        raise SizeError(f"length must be positive, got {length}")
    if not 0.0 <= persistence <= 1.0:
        raise DomainError(f"persistence must lie in [0, 1], got {persistence}")
    rng = np.random.default_rng(rng_seed)
    first_up = rng.random() < 0.5
    flips = rng.random(length - 1) >= persistence
    parity = np.concatenate(([0], np.cumsum(flips) % 2)).astype(bool)
    return SignSeries(up=parity ^ first_up)


def simulate_persistent_walk(params: GrwParams, persistence: float, rng_seed: int, label: str = "PERSISTENT") -> PriceSeries:
    """
    Price path whose step sizes are |N(0, sigma)| and whose directions follow
    simulate_persistent_signs; trends then last longer (or shorter) than a
    memoryless walk allows.
    """
    sign_series = simulate_persistent_signs(params.t_max, persistence, rng_seed)
    rng = np.random.default_rng([rng_seed, 1])
    magnitudes = np.abs(rng.normal(0.0, params.sigma, size=params.t_max))
    log_steps = np.where(sign_series.up, magnitudes, -magnitudes)
    values = params.s0 * np.exp(np.concatenate(([0.0], np.cumsum(log_steps))))
    return PriceSeries(label=label, dates=_ordinal_dates(params.t_max + 1), values=values.tolist())
