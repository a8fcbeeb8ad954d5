"""
Trend Durations API
FastAPI application exposing the trend duration pipeline: sign probabilities,
waiting times, up-ratio series and Anderson-Darling tests
"""

import logging

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import ValidationError

from models.models import (
    AdTestResult, AnalyzeWindowRequest, DownProbabilityResponse, GeometricModel, GofRequest, McConfig,
    SignSeries, UpRatioPoint, UpRatioRequest, UpRatioResponse, WaitingTimeRequest, WaitingTimeResponse,
    WaitingTimeSample, WindowReport
)
from src import emh, gof, trends, window
from src.data_access import get_data_access
from src.errors import DegeneracyError, TrendAnalysisError
from src.ingest import parse_prices

logger = logging.getLogger(__name__)

# Initialize data access layer
data_access = get_data_access()
config = data_access.config


def _http_error(e: Exception) -> HTTPException:
    """Input problems are the caller's (400); a degenerate sample cannot be tested (422)"""
    if isinstance(e, DegeneracyError):
        return HTTPException(status_code=422, detail=str(e))
    if isinstance(e, ValidationError):
        return HTTPException(status_code=400, detail=e.errors(include_url=False, include_context=False))
    return HTTPException(status_code=400, detail=str(e))


# Initialize FastAPI app
app = FastAPI(
    title="Trend Durations API",
    description="Tests whether elemental price trend durations follow the memoryless geometric law",
    version="0.1.0"
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.get("/health")
async def health():
    return {"status": "ok"}


# Endpoint 1: Sign probabilities of the efficient-market random walk
@app.get("/emh/down-probability", response_model=DownProbabilityResponse)
async def get_down_probability(sigma: float, r_f: float = 0.0):
    """Probability that a log-normal step does not increase the price"""
    try:
        q = emh.down_probability(r_f, sigma)
        return DownProbabilityResponse(
            r_f=r_f,
            sigma=sigma,
            mu=emh.mu_from(r_f, sigma),
            down_probability=q,
            up_probability=1.0 - q,
        )
    except TrendAnalysisError as e:
        raise _http_error(e)


# Endpoint 2: Runs and the waiting time at one position of a sign string
@app.post("/trends/waiting-times", response_model=WaitingTimeResponse)
async def post_waiting_times(request: WaitingTimeRequest):
    """Split a sign string such as '--+++++-' into runs and read one waiting time"""
    try:
        sign_series = SignSeries.from_string(request.signs)
        return WaitingTimeResponse(
            runs=trends.runs(sign_series),
            waiting_time=trends.waiting_time_at(sign_series, request.position, request.direction),
        )
    except (TrendAnalysisError, ValueError) as e:
        raise _http_error(e)


# Endpoint 3: Up-ratio series with its Bernoulli band
@app.post("/upratio", response_model=UpRatioResponse)
async def post_upratio(request: UpRatioRequest):
    try:
        prices = parse_prices(request.csv_text, request.label)
        band = trends.bernoulli_band(request.window.length, request.z)
        return UpRatioResponse(
            band_low=0.5 - band,
            band_high=0.5 + band,
            points=[
                UpRatioPoint(start_date=day, up_ratio=ratio)
                for day, ratio in window.up_ratio_series(prices, request.window)
            ],
        )
    except (TrendAnalysisError, ValidationError) as e:
        raise _http_error(e)


# Endpoint 4: Test one duration sample against a known parameter
@app.post("/gof", response_model=AdTestResult)
def post_gof(request: GofRequest):
    try:
        model = GeometricModel(theta=request.theta)
        sample = WaitingTimeSample.from_durations(request.direction, request.durations)
        cells = gof.build_cells(model, sample.n, request.min_expected)
        cfg = McConfig(
            m_replicates=request.m_replicates,
            min_expected=request.min_expected,
            master_seed=request.seed,
        )
        return gof.mc_pi_value_iid(model, sample.n, gof.ad_statistic(sample, cells), cfg, direction=request.direction)
    except (TrendAnalysisError, ValidationError) as e:
        raise _http_error(e)


# Endpoint 5: Full test of a single window
@app.post("/analyze/window", response_model=WindowReport)
def post_analyze_window(request: AnalyzeWindowRequest):
    """Histograms, estimates, A^2 and pi-values of one window in both directions"""
    try:
        prices = parse_prices(request.csv_text, request.label)
        cfg = McConfig(
            m_replicates=request.m_replicates,
            n_points=request.n_points,
            min_expected=request.min_expected,
            master_seed=request.seed,
        )
        return window.analyze_window(prices, request.start, request.window, cfg)
    except (TrendAnalysisError, ValidationError) as e:
        raise _http_error(e)


if __name__ == "__main__":
    import uvicorn

    # Get config values
    api_config = config['api']

    logging.basicConfig(level=config.get("logging", {}).get("level", "INFO"))
    logger.info("Starting Trend Durations API on %s:%s", api_config['host'], api_config['port'])

    uvicorn.run(
        "main:app",
        host=api_config['host'],
        port=api_config['port'],
        reload=api_config['debug'],
        log_level="info"
    )
