"""
Structured errors raised by the SPROCKET toolkit.

Every error carries a stable ``code`` and a ``context`` dictionary so the CLI,
the Streamlit app and the benchmark runner can report it in machine-readable
form instead of crashing.
"""
from typing import Any, Dict, Optional


class SprocketError(Exception):
    """Base class for all structured errors."""

    code = "sprocket_error"

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = {k: v for k, v in context.items() if v is not None}

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert the error to a JSON-serializable dictionary.

        Returns:
            Dictionary with code, message and context
        """
        return {
            "code": self.code,
            "message": self.message,
            "context": {k: _plain(v) for k, v in self.context.items()},
        }

    def __str__(self) -> str:
        line = self.context.get("line")
        if line is not None:
            return f"{self.message} (line {line})"
        return self.message


def _plain(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    # numpy scalars
    if getattr(value, "ndim", None) == 0 and hasattr(value, "item"):
        return value.item()
    return str(value)


# -- datasets and files --------------------------------------------------------

class DatasetError(SprocketError):
    code = "dataset_error"


class MalformedHeader(DatasetError):
    code = "malformed_header"


class RaggedLengths(DatasetError):
    code = "ragged_lengths"


class UnknownClassLabel(DatasetError):
    code = "unknown_class_label"


class NonNumericCell(DatasetError):
    code = "non_numeric_cell"


class InvalidDataset(DatasetError):
    code = "invalid_dataset"


class ManifestError(SprocketError):
    code = "manifest_error"


class ConfigError(SprocketError):
    code = "config_error"


class ModelFormatError(SprocketError):
    code = "model_format_error"


class MissingColumns(SprocketError):
    code = "missing_columns"


class OutputError(SprocketError, ValueError):
    """Unsupported output format or an output file that cannot be written."""

    code = "output_error"


# -- kernels -------------------------------------------------------------------

class KernelError(SprocketError):
    code = "kernel_error"


class InputTooShort(KernelError):
    code = "input_too_short"


class KernelTooWide(KernelError):
    code = "kernel_too_wide"


class EmptyActivation(KernelError):
    code = "empty_activation"


# -- distances -----------------------------------------------------------------

class DistanceError(SprocketError):
    code = "distance_error"


class LengthMismatch(DistanceError):
    code = "length_mismatch"


class EmptySeries(DistanceError):
    code = "empty_series"


class BandTooNarrow(DistanceError):
    code = "band_too_narrow"


class InvalidMeasure(DistanceError):
    code = "invalid_measure"


# -- prototypes and transform --------------------------------------------------

class SelectionError(SprocketError):
    code = "selection_error"


class TooFewInstances(SelectionError):
    code = "too_few_instances"


class DegenerateDistances(SelectionError, UserWarning):
    """Every remaining candidate sits at distance 0 from the chosen centers."""

    code = "degenerate_distances"


class ShapeMismatch(SprocketError):
    code = "shape_mismatch"


class RowMismatch(SprocketError):
    code = "row_mismatch"


# -- ridge and analysis --------------------------------------------------------

class SingleClass(SprocketError):
    code = "single_class"


class DegenerateAlphas(SprocketError):
    code = "degenerate_alphas"


class EmptyTable(SprocketError):
    code = "empty_table"


def describe(error: Exception, context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Describe any exception as a dictionary, structured or not.

    Args:
        error: The exception to describe
        context: Extra context merged into the description (optional)

    Returns:
        Dictionary with code, message and context
    """
    if isinstance(error, SprocketError):
        info = error.to_dict()
    else:
        info = {"code": "internal_error", "message": str(error), "context": {}}
    if context:
        info["context"].update({k: _plain(v) for k, v in context.items()})
    return info
