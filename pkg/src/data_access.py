"""
Data Access Layer
Shared configuration loading and file operations for price, CPI and result files
"""

import logging
import os
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd
import yaml
from dotenv import load_dotenv

from models.models import CpiSeries, PriceSeries
from src.errors import TrendAnalysisError
from src.ingest import FLOAT_FORMAT, parse_cpi, parse_durations, parse_prices

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "config.yaml"

PathLike = Union[str, Path]


class DataAccessLayer:
    """Centralized access to configuration and CSV files"""

    def __init__(self, config_path: Optional[PathLike] = None):
        """Initialize with configuration"""
        # Load environment variables from .env file
        load_dotenv()

        config_path = config_path or os.getenv("TREND_DURATIONS_CONFIG") or DEFAULT_CONFIG_PATH
        self.config_path = Path(config_path)
        self.config = self._load_config(self.config_path)

        env_level = os.getenv("TREND_DURATIONS_LOG_LEVEL")
        if env_level:
            self.config.setdefault("logging", {})["level"] = env_level

    def _load_config(self, config_path: Path) -> Dict:
        """Load configuration from YAML file"""
        if not config_path.exists():
            raise FileNotFoundError(f"{config_path} not found")

        with open(config_path, "r", encoding="utf-8") as file:
            return yaml.safe_load(file) or {}

    def read_text(self, filename: PathLike) -> str:
        """Read a whole text file"""
        path = Path(filename)
        if not path.is_file():
            raise FileNotFoundError(f"{path} not found")
        with open(path, "r", encoding="utf-8") as file:
            return file.read()

    def read_prices(self, filename: PathLike, label: str) -> PriceSeries:
        """Parse a daily price CSV, naming the file in any error"""
        return self._parse(filename, lambda text: parse_prices(text, label))

    def read_cpi(self, filename: PathLike) -> CpiSeries:
        """Parse a monthly CPI CSV, naming the file in any error"""
        return self._parse(filename, parse_cpi)

    def read_durations(self, filename: PathLike) -> np.ndarray:
        """Parse a one-column duration CSV, naming the file in any error"""
        return self._parse(filename, parse_durations)

    def _parse(self, filename: PathLike, parser):
        text = self.read_text(filename)
        try:
            return parser(text)
        except TrendAnalysisError as e:
            e.source = str(filename)
            raise

    def write_text(self, filename: PathLike, text: str) -> Path:
        """Write text, creating parent directories"""
        path = Path(filename)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as file:
            file.write(text)
        return path

    def write_frame(self, filename: PathLike, frame: pd.DataFrame) -> Path:
        """Write a DataFrame as CSV with 12 significant digits"""
        text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        path = self.write_text(filename, text)
        logger.debug("Wrote %d rows to %s", len(frame), path)
        return path


# Global instance
_data_access_instance = None


def get_data_access(config_path: Optional[PathLike] = None) -> DataAccessLayer:
    """Get global data access instance; passing a path reloads it"""
    global _data_access_instance
    if _data_access_instance is None or config_path is not None:
        _data_access_instance = DataAccessLayer(config_path)
    return _data_access_instance
