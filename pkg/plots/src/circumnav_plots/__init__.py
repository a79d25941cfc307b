"""Figure rendering for circumnav run logs."""

__version__ = "0.1.0"

from .figures import PlotSpec, plot
from .io import EmptyDataError, PlotSchemaError, read_log

__all__ = ["PlotSpec", "plot", "read_log", "PlotSchemaError", "EmptyDataError", "__version__"]
