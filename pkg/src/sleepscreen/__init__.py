"""From-scratch tabular ML toolkit and experiment harness for sleep-disorder screening."""

__version__ = "0.1.0"

from .table import Column, DataTable

__all__ = ["Column", "DataTable", "__version__"]
