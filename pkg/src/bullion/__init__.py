"""Bullion: columnar storage for ML training data.

Cascading lightweight encodings, deletion-compliant in-place updates,
sliding-window delta coding for long sparse sequences, a flat footer for
wide-table projection, and storage quantization.
"""

from .encoding import MASK, EncodedBlock, EncodingConfig, SchemeId, ValueKind

__version__ = "0.1.0"

__all__ = [
    "MASK",
    "EncodedBlock",
    "EncodingConfig",
    "SchemeId",
    "ValueKind",
    "__version__",
]
