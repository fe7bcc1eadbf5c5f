"""Scattering transform with generalized Morse wavelets."""

from ._core import (
    CORPUS_RATE,
    SEGMENT_LENGTH,
    ConfigError,
    DataError,
    Error,
    NumericError,
    ScatteringNetwork,
    decode_audio,
    filter_bank,
    gmw_spectrum,
    morlet_center_for_quality,
    peak_frequency,
    soft_threshold,
    stratified_folds,
    write_wav,
)

__all__ = [
    "CORPUS_RATE",
    "SEGMENT_LENGTH",
    "ConfigError",
    "DataError",
    "Error",
    "NumericError",
    "ScatteringNetwork",
    "decode_audio",
    "filter_bank",
    "gmw_spectrum",
    "morlet_center_for_quality",
    "peak_frequency",
    "soft_threshold",
    "stratified_folds",
    "write_wav",
]
