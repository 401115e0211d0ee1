"""Standalone chart tool for parsim sample CSV exports.

Deliberately decoupled from the simulator package: the CSV schema is the
only contract between the two.
"""

from .core import EXPECTED_HEADER, Samples, SchemaError, moving_average, read_samples

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_HEADER",
    "Samples",
    "SchemaError",
    "moving_average",
    "read_samples",
    "__version__",
]
