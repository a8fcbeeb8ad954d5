import math
from datetime import date, timedelta

import numpy as np
import pytest

from models.models import GrwParams, McConfig, PriceSeries, WindowSpec
from src.data_access import DEFAULT_CONFIG_PATH, get_data_access
from src.emh import simulate_grw
from src.ingest import format_prices_csv

YAHOO_HEADER = "Date,Open,High,Low,Close,Adj Close,Volume"


@pytest.fixture(autouse=True)
def default_config():
    """Every test starts from the repository config.yaml"""
    yield get_data_access(DEFAULT_CONFIG_PATH)
    get_data_access(DEFAULT_CONFIG_PATH)


@pytest.fixture
def yahoo_csv():
    return (
        f"{YAHOO_HEADER}\n"
        "2011-01-05,11670.75,11742.68,11652.89,11722.89,11722.89,219460000\n"
        "2011-01-03,11577.43,11711.47,11577.35,11670.75,11670.75,203420000\n"
        "2011-01-04,11670.90,11735.19,11599.65,11691.18,11691.18,178630000\n"
    )


@pytest.fixture
def cpi_csv():
    return "Month,Value\n2000-01,100\n2000-02,103\n2000-03,104\n"


def _make_prices(values, start=date(2000, 1, 3), label="TEST") -> PriceSeries:
    """Daily series on consecutive calendar days"""
    return PriceSeries(
        label=label,
        dates=[start + timedelta(days=i) for i in range(len(values))],
        values=[float(v) for v in values],
    )


@pytest.fixture
def make_prices():
    return _make_prices


@pytest.fixture
def monotone_prices():
    return _make_prices(np.arange(1, 1001))


@pytest.fixture
def martingale_params():
    """Random walk whose up and down probabilities are exactly 1/2"""
    sigma = 0.01
    return GrwParams(sigma=sigma, r_f=math.expm1(sigma ** 2 / 2), t_max=999)


@pytest.fixture
def grw_prices():
    return simulate_grw(GrwParams(sigma=0.01, r_f=0.0, t_max=1099), rng_seed=2024)


@pytest.fixture
def small_cfg():
    return McConfig(m_replicates=99, n_points=200, master_seed=12345)


@pytest.fixture
def window_1000():
    return WindowSpec(length=1000, step=1)


@pytest.fixture
def write_file(tmp_path):
    def _write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write


@pytest.fixture
def prices_file(write_file):
    def _prices_file(prices: PriceSeries, name: str = "prices.csv"):
        return write_file(name, format_prices_csv(prices))
    return _prices_file
