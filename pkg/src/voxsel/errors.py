"""Error types shared across the package.

Every operational failure carries a short machine-readable ``code`` so the
CLI can emit structured error JSON on stderr.
"""


class VoxselError(Exception):
    """Base error with a stable machine-readable code."""

    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class WavError(VoxselError):
    """WAV ingestion failure (missing file, bad container, bad encoding)."""

    code = "wav-error"


class DataError(VoxselError):
    """Malformed dataset, manifest, config or fixture input."""

    code = "data-error"


class TrainingError(VoxselError):
    """A classifier could not be trained on the given data."""

    code = "training-error"
