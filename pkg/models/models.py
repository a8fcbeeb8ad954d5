from datetime import date
from enum import Enum
from typing import Dict, List, Optional

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ============================================================================
# Enumerations
# ============================================================================

class Direction(str, Enum):
    """Direction of a daily price change"""
    UP = "UP"
    DOWN = "DOWN"

    @property
    def code(self) -> int:
        """Stable integer used when deriving seeds"""
        return 0 if self is Direction.UP else 1

    @property
    def symbol(self) -> str:
        return "+" if self is Direction.UP else "-"


class CensorPolicy(str, Enum):
    """What to do with a waiting time whose run is cut by the window edge"""
    DISCARD = "discard"
    KEEP_TRUNCATED = "keep-truncated"


# ============================================================================
# Ingest Models
# ============================================================================

class PriceSeries(BaseModel):
    """Dated daily closing values, nominal or deflated"""
    model_config = ConfigDict(frozen=True)

    label: str = Field(default="INDEX", description="Series identifier, e.g. DJIA")
    dates: List[date] = Field(..., description="Trading days, strictly increasing")
    values: List[float] = Field(..., description="Closing values, all positive")

    @model_validator(mode="after")
    def _check_entries(self) -> "PriceSeries":
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values must have the same length")
        values = np.asarray(self.values, dtype=float)
        if values.size and (not np.all(np.isfinite(values)) or np.any(values <= 0)):
            raise ValueError("every value must be finite and > 0")
        ordinals = np.fromiter((d.toordinal() for d in self.dates), dtype=np.int64, count=len(self.dates))
        if np.any(np.diff(ordinals) <= 0):
            raise ValueError("dates must be strictly increasing")
        return self

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


class CpiSeries(BaseModel):
    """Monthly consumer price index, each month anchored to its first calendar day"""
    model_config = ConfigDict(frozen=True)

    months: List[date] = Field(..., description="First day of each month, consecutive")
    values: List[float] = Field(..., description="Index levels, all positive")

    @model_validator(mode="after")
    def _check_entries(self) -> "CpiSeries":
        if len(self.months) != len(self.values):
            raise ValueError("months and values must have the same length")
        if not self.months:
            raise ValueError("CPI series is empty")
        if any(m.day != 1 for m in self.months):
            raise ValueError("months must be anchored to the first calendar day")
        for prev, cur in zip(self.months, self.months[1:]):
            expected = date(prev.year + prev.month // 12, prev.month % 12 + 1, 1)
            if cur != expected:
                raise ValueError(f"months must be consecutive, {expected:%Y-%m} missing")
        if any(not math.isfinite(v) or v <= 0 for v in self.values):
            raise ValueError("every CPI value must be finite and > 0")
        return self

    def __len__(self) -> int:
        return len(self.values)


class ReturnSeries(BaseModel):
    """One-trading-day log and simple returns, labelled by the date the change starts"""
    model_config = ConfigDict(frozen=True)

    dates: List[date]
    log_returns: List[float]
    simple_returns: List[float]
    horizon: int = Field(default=1, ge=1, description="Trading days per return")

    @model_validator(mode="after")
    def _check_lengths(self) -> "ReturnSeries":
        if not len(self.dates) == len(self.log_returns) == len(self.simple_returns):
            raise ValueError("return columns must have the same length")
        return self

    def __len__(self) -> int:
        return len(self.dates)


# ============================================================================
# Trend Models
# ============================================================================

class SignSeries(BaseModel):
    """Direction of each consecutive price change; True marks an UP day"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    up: np.ndarray = Field(..., description="Boolean mask, True where S(t+1) > S(t)")

    @field_validator("up", mode="before")
    @classmethod
    def _as_mask(cls, value) -> np.ndarray:
        mask = np.array(value, dtype=bool).reshape(-1)
        mask.setflags(write=False)
        return mask

    @classmethod
    def from_string(cls, text: str) -> "SignSeries":
        """Build from a string such as '--+++++-'"""
        if set(text) - {Direction.UP.symbol, Direction.DOWN.symbol}:
            raise ValueError(f"sign string may only contain '+' and '-': {text!r}")
        return cls(up=[c == Direction.UP.symbol for c in text])

    def to_string(self) -> str:
        return "".join(Direction.UP.symbol if u else Direction.DOWN.symbol for u in self.up)

    def __len__(self) -> int:
        return int(self.up.size)

    @property
    def n_up(self) -> int:
        return int(np.count_nonzero(self.up))

    @property
    def n_down(self) -> int:
        return len(self) - self.n_up

    def matches(self, direction: Direction) -> np.ndarray:
        return self.up if direction is Direction.UP else ~self.up


class Run(BaseModel):
    """Elemental trend: maximal block of same-direction changes"""
    model_config = ConfigDict(frozen=True)

    direction: Direction
    start: int = Field(..., ge=0, description="Trading-day ordinal of the first change")
    duration: int = Field(..., ge=1, description="Number of consecutive changes")


class WaitingTimeSample(BaseModel):
    """Histogram of waiting times drawn from one window for one direction"""
    direction: Direction
    counts: Dict[int, int] = Field(..., description="Waiting time k -> observed count")
    n: int = Field(..., ge=1, description="Total number of draws")

    @model_validator(mode="after")
    def _check_total(self) -> "WaitingTimeSample":
        if sum(self.counts.values()) != self.n:
            raise ValueError("counts must sum to n")
        return self

    @classmethod
    def from_durations(cls, direction: Direction, durations: np.ndarray) -> "WaitingTimeSample":
        ks, counts = np.unique(np.asarray(durations, dtype=np.int64), return_counts=True)
        return cls(
            direction=direction,
            counts={int(k): int(c) for k, c in zip(ks, counts)},
            n=int(counts.sum()),
        )

    @property
    def normalized(self) -> Dict[int, float]:
        return {k: c / self.n for k, c in sorted(self.counts.items())}


# ============================================================================
# Null Model
# ============================================================================

class GeometricModel(BaseModel):
    """Memoryless duration law P(k) = (1 - theta) * theta**k, k = 0, 1, 2, ..."""
    model_config = ConfigDict(frozen=True)

    theta: float = Field(..., gt=0.0, lt=1.0, description="Continuation probability")


class GrwParams(BaseModel):
    """Log-normal geometric random walk whose drift is fixed by the risk-free rate"""
    model_config = ConfigDict(frozen=True)

    s0: float = Field(default=100.0, gt=0.0, description="Initial price")
    sigma: float = Field(..., gt=0.0, description="Daily log-step standard deviation")
    r_f: float = Field(default=0.0, ge=0.0, description="Risk-free rate per trading day")
    t_max: int = Field(..., ge=1, description="Number of steps")

    @property
    def mu(self) -> float:
        return math.log1p(self.r_f) - self.sigma ** 2 / 2


# ============================================================================
# Goodness of Fit Models
# ============================================================================

class CellPartition(BaseModel):
    """Cells {0}, {1}, ..., {K-1}, {>=K} with their null probabilities"""
    model_config = ConfigDict(frozen=True)

    theta: float = Field(..., gt=0.0, lt=1.0)
    n: int = Field(..., ge=1, description="Sample size the partition was built for")
    boundaries: List[int] = Field(..., description="Lower bound of each cell; the last cell is open")
    null_probs: List[float] = Field(..., description="Probability of each cell under the null")

    @model_validator(mode="after")
    def _check_cells(self) -> "CellPartition":
        if len(self.boundaries) != len(self.null_probs):
            raise ValueError("one probability per cell is required")
        if len(self.boundaries) < 3:
            raise ValueError("at least 3 cells are required")
        if self.boundaries != list(range(len(self.boundaries))):
            raise ValueError("cells must be singletons 0..K-1 followed by the tail cell")
        if abs(sum(self.null_probs) - 1.0) > 1e-12:
            raise ValueError("cell probabilities must sum to 1")
        return self

    @property
    def k_tail(self) -> int:
        return self.boundaries[-1]

    @property
    def n_cells(self) -> int:
        return len(self.boundaries)


class AdTestResult(BaseModel):
    """Anderson-Darling statistic with its Monte Carlo pi-value for one sample"""
    model_config = ConfigDict(frozen=True)

    direction: Direction
    a2: float = Field(..., ge=0.0, description="Observed statistic")
    pi_value: float = Field(..., gt=0.0, le=1.0, description="Add-one bootstrap tail probability")
    n: int = Field(..., ge=1, description="Sample size")
    theta_hat: float = Field(..., gt=0.0, lt=1.0, description="Estimated continuation probability")
    m_replicates: int = Field(..., ge=1, description="Non-degenerate bootstrap replicates used")
    seed: int = Field(..., ge=0, description="Seed the replicates were drawn from")


class McConfig(BaseModel):
    """Monte Carlo calibration settings"""
    model_config = ConfigDict(frozen=True)

    m_replicates: int = Field(default=999, ge=99)
    n_points: int = Field(default=500, ge=50, description="Random points drawn per window")
    min_expected: float = Field(default=5.0, gt=0.0, description="Minimum expected count of the tail cell")
    master_seed: int = Field(..., ge=0, lt=2 ** 64)
    censor_policy: CensorPolicy = Field(default=CensorPolicy.DISCARD)
    replicate_block: int = Field(default=1000, ge=1, description="Replicates simulated per generator block")


# ============================================================================
# Window Models
# ============================================================================

class WindowSpec(BaseModel):
    """Sliding window length and step, both in trading days"""
    model_config = ConfigDict(frozen=True)

    length: int = Field(default=1000, ge=100)
    step: int = Field(default=1, ge=1)


class WindowReport(BaseModel):
    """Outcome of testing one window in both directions"""
    start_ordinal: int = Field(..., ge=0)
    start_date: date = Field(..., description="First trading day of the window")
    skipped: bool = Field(default=False)
    skip_reason: Optional[str] = Field(default=None)
    up_ratio: Optional[float] = Field(default=None)
    up_result: Optional[AdTestResult] = Field(default=None)
    down_result: Optional[AdTestResult] = Field(default=None)
    up_histogram: Optional[WaitingTimeSample] = Field(default=None)
    down_histogram: Optional[WaitingTimeSample] = Field(default=None)

    @model_validator(mode="after")
    def _check_consistency(self) -> "WindowReport":
        if self.skipped:
            return self
        if None in (self.up_ratio, self.up_result, self.down_result, self.up_histogram, self.down_histogram):
            raise ValueError("an analyzed window needs both results and histograms")
        if self.up_ratio != self.up_result.theta_hat:
            raise ValueError("up_ratio must equal the UP parameter estimate")
        return self


class RunConfig(BaseModel):
    """Resolved settings for one CLI invocation"""
    prices_path: Optional[str] = None
    cpi_path: Optional[str] = None
    base_date: Optional[date] = None
    window: WindowSpec = Field(default_factory=WindowSpec)
    monte_carlo: Optional[McConfig] = None
    out_dir: str = "."
    threads: int = Field(default=1, ge=1)
    histograms: bool = False

    @model_validator(mode="after")
    def _check_files(self) -> "RunConfig":
        from pathlib import Path

        for path in (self.prices_path, self.cpi_path):
            if path is not None and not Path(path).is_file():
                raise ValueError(f"file not found: {path}")
        return self


# ============================================================================
# API Request/Response Models
# ============================================================================

class DownProbabilityResponse(BaseModel):
    """Sign probabilities of the efficient-market random walk"""
    r_f: float
    sigma: float
    mu: float = Field(description="Log-step mean implied by E(Q) = 1 + r_f")
    down_probability: float = Field(description="Probability of a non-positive change")
    up_probability: float


class WaitingTimeRequest(BaseModel):
    """Request model for the worked waiting-time example"""
    signs: str = Field(..., description="Sign string such as '--+++++-'")
    position: int = Field(..., ge=1, description="1-based position of the drawn day")
    direction: Direction = Field(default=Direction.UP)


class WaitingTimeResponse(BaseModel):
    runs: List[Run]
    waiting_time: int


class UpRatioRequest(BaseModel):
    """Request model for the up-ratio series"""
    csv_text: str = Field(..., description="Price CSV in Yahoo or Date,Close layout")
    label: str = Field(default="INDEX")
    window: WindowSpec = Field(default_factory=WindowSpec)
    z: float = Field(default=3.0, ge=0.0, description="Band half-width in binomial standard errors")


class UpRatioPoint(BaseModel):
    start_date: date
    up_ratio: float


class UpRatioResponse(BaseModel):
    band_low: float
    band_high: float
    points: List[UpRatioPoint]


class GofRequest(BaseModel):
    """Request model for a single-sample test with a known parameter"""
    durations: List[int] = Field(..., description="Observed waiting times")
    theta: float = Field(..., gt=0.0, lt=1.0)
    direction: Direction = Field(default=Direction.UP)
    seed: int = Field(..., ge=0)
    m_replicates: int = Field(default=999, ge=99)
    min_expected: float = Field(default=5.0, gt=0.0)


class AnalyzeWindowRequest(BaseModel):
    """Request model for testing a single window"""
    csv_text: str = Field(..., description="Price CSV in Yahoo or Date,Close layout")
    label: str = Field(default="INDEX")
    start: int = Field(default=0, ge=0, description="Trading-day ordinal of the window start")
    window: WindowSpec = Field(default_factory=WindowSpec)
    seed: int = Field(..., ge=0)
    m_replicates: int = Field(default=999, ge=99)
    n_points: int = Field(default=500, ge=50)
    min_expected: float = Field(default=5.0, gt=0.0)
