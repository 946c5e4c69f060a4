"""
Exception hierarchy for the library and its command-line surface.
Every error carries the process exit code the CLI reports for it.
"""

import logging
from collections.abc import Callable
from functools import wraps
from typing import Any, ParamSpec

from pydantic import ValidationError

logger = logging.getLogger(__name__)

P = ParamSpec("P")

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_NUMERICAL_FAILURE = 2


# -------------------------
# Base application errors
# -------------------------
class GmidError(Exception):
    """Base exception for library errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = EXIT_USER_ERROR,
        details: dict[str, Any] | None = None,
    ):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(message)


class InvalidArgumentError(GmidError):
    """A precondition on an argument was violated."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message=message, exit_code=EXIT_USER_ERROR, details=details)


class ConfigError(GmidError):
    """The run configuration could not be read or validated."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message=message, exit_code=EXIT_USER_ERROR, details=details)


class DataFileError(GmidError):
    """An input artifact is malformed."""

    def __init__(self, path: Any, reason: str):
        super().__init__(
            message=f"{path}: {reason}",
            exit_code=EXIT_USER_ERROR,
            details={"path": str(path)},
        )


class NotFoundError(GmidError):
    """An input artifact does not exist."""

    def __init__(self, resource: str, path: Any):
        super().__init__(
            message=f"{resource} not found: {path}",
            exit_code=EXIT_USER_ERROR,
            details={"resource": resource, "path": str(path)},
        )


# -------------------------
# Numerical failures
# -------------------------
class NumericalError(GmidError):
    """Base class for numerical failures."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message=message, exit_code=EXIT_NUMERICAL_FAILURE, details=details)


class FactorizationError(NumericalError):
    """Cholesky factorization failed even after jitter escalation."""

    def __init__(
        self,
        message: str,
        time_index: int | None = None,
        details: dict[str, Any] | None = None,
    ):
        self.time_index = time_index
        info = dict(details or {})
        if time_index is not None:
            info["time_index"] = time_index
            message = f"{message} (time index {time_index})"
        super().__init__(message=message, details=info)


class InstabilityError(NumericalError):
    """A time integrator produced non-finite values."""

    def __init__(self, bound: str, details: dict[str, Any] | None = None):
        self.bound = bound
        super().__init__(
            message=f"solver became unstable; violated bound: {bound}",
            details={"bound": bound, **(details or {})},
        )


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge."""


class NonFiniteError(NumericalError):
    """An objective or its gradient evaluated to a non-finite value."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        details = {} if index is None else {"parameter_index": index}
        if index is not None:
            message = f"{message} (parameter index {index})"
        super().__init__(message=message, details=details)


class SamplerError(NumericalError):
    """The sampler could not produce a usable chain."""


class OptimizationError(NumericalError):
    """The optimizer failed to make progress."""


# -------------------------
# CLI error handling
# -------------------------
def handle_command_errors(func: Callable[P, int]) -> Callable[P, int]:
    """Translate exceptions raised by a command into exit codes."""

    @wraps(func)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except GmidError as exc:
            logger.warning(exc.message, extra={"details": exc.details})
            return exc.exit_code
        except ValidationError as exc:
            errors = [
                {
                    "field": " -> ".join(map(str, err["loc"])),
                    "message": err["msg"],
                    "type": err["type"],
                }
                for err in exc.errors()
            ]
            logger.warning("Validation failed", extra={"errors": errors})
            return EXIT_USER_ERROR
        except OSError as exc:
            logger.warning("I/O error: %s", exc)
            return EXIT_USER_ERROR
        except Exception:
            logger.error("Unhandled exception", exc_info=True)
            return EXIT_NUMERICAL_FAILURE

    return wrapper
