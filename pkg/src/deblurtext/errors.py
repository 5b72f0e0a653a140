"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: configuration problems exit 1, data
problems exit 2, detector failures past the budget exit 3.
"""


class ConfigurationError(ValueError):
    """A knob or config value is out of its accepted range."""


class DataError(ValueError):
    """An input file or dataset is unusable."""


class ParseError(DataError):
    """A ground-truth or detection file line could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DeconvolutionError(RuntimeError):
    """Deconvolution hit a degenerate state (NaN, all-zero PSF)."""


class DetectorError(RuntimeError):
    """An external detector invocation failed."""
