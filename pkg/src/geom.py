"""
Geometric Null Model
Memoryless duration law P(k) = (1 - theta) * theta**k with its estimator and sampler
"""

from typing import Union

import numpy as np

from models.models import Direction, GeometricModel, SignSeries
from src.errors import DegenerateParameterError, DomainError, SizeError

ArrayLike = Union[int, np.ndarray]


def _support(k: ArrayLike) -> np.ndarray:
    arr = np.asarray(k)
    if np.any(arr < 0):
        raise DomainError("durations must be non-negative")
    return arr


def _scalar_or_array(values: np.ndarray, k: ArrayLike):
    return float(values) if np.ndim(k) == 0 else values


def pmf(model: GeometricModel, k: ArrayLike):
    """P(N = k) = (1 - theta) * theta**k"""
    ks = _support(k)
    return _scalar_or_array((1.0 - model.theta) * model.theta ** ks, k)


def cdf(model: GeometricModel, k: ArrayLike):
    """P(N <= k) = 1 - theta**(k + 1)"""
    ks = _support(k)
    return _scalar_or_array(-np.expm1((ks + 1) * np.log(model.theta)), k)


def survival(model: GeometricModel, k: ArrayLike):
    """P(N >= k) = theta**k"""
    ks = _support(k)
    return _scalar_or_array(model.theta ** ks, k)


def mean(model: GeometricModel) -> float:
    return model.theta / (1.0 - model.theta)


def continuation_ratio(n_match, n_total: int):
    """
    n_match / n_total, with the majority side computed as 1 - minority so that
    the UP and DOWN estimates of one window sum to exactly 1.
    """
    n_match = np.asarray(n_match)
    minority = np.minimum(n_match, n_total - n_match) / n_total
    ratio = np.where(n_match <= n_total - n_match, minority, 1.0 - minority)
    return float(ratio) if ratio.ndim == 0 else ratio


def estimate_theta_from_signs(sign_series: SignSeries, direction: Direction) -> GeometricModel:
    """
    Continuation probability from the share of changes in the given direction.

    Raises:
        DegenerateParameterError: every change goes the same way
    """
    total = len(sign_series)
    if total < 1:
        raise SizeError("cannot estimate theta from an empty sign series")
    n_match = sign_series.n_up if direction is Direction.UP else sign_series.n_down
    if n_match in (0, total):
        raise DegenerateParameterError(
            f"{direction.value} share is {n_match}/{total}; theta would be {n_match // total}"
        )
    return GeometricModel(theta=continuation_ratio(n_match, total))


def sample(model: GeometricModel, n: int, rng_seed: int) -> np.ndarray:
    """n independent draws by inversion: floor(log(1 - u) / log(theta))"""
    if n < 1:
        raise SizeError(f"n must be positive, got {n}")
    rng = np.random.default_rng(rng_seed)
    u = rng.random(n)
    return np.floor(np.log1p(-u) / np.log(model.theta)).astype(np.int64)
