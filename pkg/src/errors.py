"""
Error Types
Exceptions raised by the analysis pipeline, grouped by the CLI exit code they map to
"""

from datetime import date
from typing import Optional


class TrendAnalysisError(Exception):
    """Base class for every pipeline error"""

    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message
        self.source: Optional[str] = None

    def __str__(self) -> str:
        if self.source:
            return f"{self.source}: {self.message}"
        return self.message


# ============================================================================
# Input and format errors (exit code 2)
# ============================================================================

class InputError(TrendAnalysisError):
    exit_code = 2


class UsageError(InputError):
    """Missing or conflicting command options"""


class FormatError(InputError):
    """Malformed file layout: header, column count, empty body"""


class DataError(InputError):
    """A well-formed row carrying an invalid value"""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message)
        self.row = row


class GapError(InputError):
    """A month is missing from the CPI series"""

    def __init__(self, message: str, month: Optional[date] = None):
        super().__init__(message)
        self.month = month


class RangeError(InputError):
    """A date or position lies outside the supported range"""


class SizeError(InputError):
    """An input is too short for the requested operation"""


class DomainError(InputError):
    """An argument lies outside the domain of a function"""


class PartitionError(InputError):
    """Sample mass falls outside the cells of a partition"""


# ============================================================================
# Analysis degeneracy (exit code 3)
# ============================================================================

class DegeneracyError(TrendAnalysisError):
    exit_code = 3


class DegenerateWindowError(DegeneracyError):
    """A window cannot yield a usable waiting-time sample or cell partition"""


class DegenerateParameterError(DegeneracyError):
    """The estimated continuation probability is 0 or 1"""


class CalibrationError(DegeneracyError):
    """Too many bootstrap replicates were degenerate"""
