"""
Utility for logging errors during benchmark and evaluation runs.
"""
import os
import logging
import traceback
from datetime import datetime
from typing import Dict, List, Optional

from utils.errors import describe

logger = logging.getLogger(__name__)


class ErrorLogger:
    """Logger for recording and displaying per-dataset errors."""

    def __init__(self, log_file: Optional[str] = None):
        """
        Initialize the error logger.

        Args:
            log_file: Path to the log file (optional)
        """
        self.errors = []
        self.log_file = log_file

        if log_file:
            directory = os.path.dirname(log_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            handler = logging.FileHandler(log_file)
            handler.setLevel(logging.WARNING)
            handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s'))
            logger.addHandler(handler)

    def log_error(self, error_type: str, message: str, context: Optional[Dict] = None) -> Dict:
        """
        Log an error with context information.

        Args:
            error_type: Type of error (e.g., 'parsing', 'manifest', 'evaluation')
            message: Error message
            context: Additional context information (optional)

        Returns:
            Dictionary with error information
        """
        context = dict(context or {})

        # Structured errors carry their own code and context
        exception = context.pop("exception", None)
        if isinstance(exception, Exception):
            details = describe(exception)
            context.setdefault("code", details["code"])
            context.update(details["context"])
            context["exception"] = str(exception)
            if exception.__traceback__ is not None:
                context["traceback"] = "".join(traceback.format_exception(
                    type(exception), exception, exception.__traceback__))

        error_info = {
            "timestamp": datetime.now().isoformat(),
            "type": error_type,
            "message": message,
            "context": context,
        }
        self.errors.append(error_info)

        logger.error("Error Type: %s, Message: %s, Context: %s", error_type, message,
                     {k: v for k, v in context.items() if k != "traceback"})
        return error_info

    def get_errors(self, error_type: Optional[str] = None) -> List[Dict]:
        """
        Get all logged errors, optionally filtered by type.

        Args:
            error_type: Type of errors to filter (optional)

        Returns:
            List of error dictionaries
        """
        if error_type:
            return [e for e in self.errors if e.get('type') == error_type]
        return self.errors

    def has_errors(self, error_type: Optional[str] = None) -> bool:
        return bool(self.get_errors(error_type))

    def format_errors_for_display(self) -> str:
        """
        Format errors as markdown for the terminal or the Streamlit app.

        Returns:
            Formatted string representation of errors
        """
        if not self.errors:
            return "No errors logged."

        result = ""
        for i, error in enumerate(self.errors, 1):
            result += f"**Error {i}** ({error.get('type', 'unknown')}) - {error.get('timestamp', '')}\n"
            result += f"{error.get('message', '')}\n\n"

            context = error.get('context', {})
            shown = {k: v for k, v in context.items() if k != 'traceback'}
            if shown:
                result += "Context:\n"
                for key, value in shown.items():
                    result += f"- {key}: {value}\n"
                result += "\n"

        return result

    def clear_errors(self) -> None:
        """Clear all logged errors."""
        self.errors = []
