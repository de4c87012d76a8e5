"""Figure rendering for exported town-simulation batches."""

from .loading import Batch, BatchError, load_batch, load_empirical
from .plots import band_plot, compare_plot, sweep_panel

__version__ = "0.1.0"

__all__ = ["Batch", "BatchError", "load_batch", "load_empirical",
           "band_plot", "compare_plot", "sweep_panel", "__version__"]
