"""Offline analysis of gaze-typing sessions: EEG beta-band cognitive
load, text-entry metrics and the statistics to compare keyboard designs.
"""

from .model import (
    EPOC14_CHANNELS,
    EegRecording,
    Event,
    EventKind,
    EventLog,
    GazeSample,
    KeyClass,
    SessionMeta,
    SessionRecord,
    ValidationReport,
    reconstruct_transcription,
    validate_session,
)
from .spectral import (
    AnalysisConfig,
    Band,
    LoadSeries,
    Spectrum,
    WindowFn,
    band_ratios,
    cognitive_load_series,
    default_bands,
    dft,
    make_windows,
    spectral_power,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "Band",
    "EPOC14_CHANNELS",
    "EegRecording",
    "Event",
    "EventKind",
    "EventLog",
    "GazeSample",
    "KeyClass",
    "LoadSeries",
    "SessionMeta",
    "SessionRecord",
    "Spectrum",
    "ValidationReport",
    "WindowFn",
    "band_ratios",
    "cognitive_load_series",
    "default_bands",
    "dft",
    "make_windows",
    "reconstruct_transcription",
    "spectral_power",
    "validate_session",
    "__version__",
]
