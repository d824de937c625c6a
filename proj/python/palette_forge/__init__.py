"""Python access to the palette-forge toolkit."""

from ._palette_forge import (
    CONDITION_FORMAT_VERSION,
    HISTOGRAM_FORMAT_VERSION,
    Error,
    FormatError,
    Histogram,
    IoError,
    __version__,
    decode_condition,
    emd,
    encode_condition,
    entropy,
    extract_palette,
    histogram_of_image,
    quadratic_chi,
)

__all__ = [
    "CONDITION_FORMAT_VERSION",
    "HISTOGRAM_FORMAT_VERSION",
    "Error",
    "FormatError",
    "Histogram",
    "IoError",
    "__version__",
    "decode_condition",
    "emd",
    "encode_condition",
    "entropy",
    "extract_palette",
    "histogram_of_image",
    "quadratic_chi",
]
