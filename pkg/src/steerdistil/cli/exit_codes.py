"""Mapping between steerdistil exceptions and process exit codes.

Codes tell apart bad input, a numerical failure and a violated property.
Every other error, including errors raised by numpy, exits with
`EXIT_FAILURE`.
"""
from __future__ import annotations

import typing as t

from steerdistil.core import errors

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_CERTIFICATION = 4

# Checked in order; the first matching base class wins.
_EXIT_CODE_MAP: t.Tuple[t.Tuple[t.Type[BaseException], int], ...] = (
    (errors.ValidationError, EXIT_VALIDATION),
    (errors.FilterError, EXIT_VALIDATION),
    (errors.UnrepresentableNoiseModelError, EXIT_VALIDATION),
    (errors.TooManyStrategiesError, EXIT_VALIDATION),
    (errors.SolverError, EXIT_SOLVER),
    (errors.CertificationError, EXIT_CERTIFICATION),
)


def exit_code_for(error: BaseException) -> int:
    """Exit code of the command that raised the given error.

    Args:
        error: The exception that ended the command.

    Returns:
        2 for validation errors (including rejected witnesses and noise
        models), 3 for solver errors, 4 for certification errors and 1 for
        anything else.
    """
    for error_class, code in _EXIT_CODE_MAP:
        if isinstance(error, error_class):
            return code
    return EXIT_FAILURE
