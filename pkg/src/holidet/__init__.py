"""Holiday detection and periodic-load extraction for half-hourly household electricity data."""

__version__ = "0.1.0"

from .changepoint import Segmentation, StopRule, bottom_up
from .config import PipelineConfig, load_config
from .errors import ConfigError, HolidetError, InputError
from .occupancy import ClassifierSpec, classify_windows, fit_ratio, merge_holidays, score
from .pipeline import AnalysisReport, evaluate, run_pipeline
from .series import TimeSeries
from .spikes import extract_all

__all__ = [
    "AnalysisReport", "ClassifierSpec", "ConfigError", "HolidetError", "InputError",
    "PipelineConfig", "Segmentation", "StopRule", "TimeSeries", "bottom_up",
    "classify_windows", "evaluate", "extract_all", "fit_ratio", "load_config",
    "merge_holidays", "run_pipeline", "score",
]
