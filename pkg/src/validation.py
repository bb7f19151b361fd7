"""
Input Validation Module

Range and format checks for solver parameters. Every check returns
(is_valid, error_message) and leaves raising to the caller.
"""

import math
import os
from pathlib import Path
from typing import Optional, Sequence, Tuple


def validate_positive_real(value: float) -> Tuple[bool, str]:
    """
    Validate a strictly positive, finite real.

    Args:
        value: Number to validate

    Returns:
        Tuple of (is_valid, error_message)
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return False, "must be a number"

    if not math.isfinite(value):
        return False, "must be finite"

    if value <= 0:
        return False, f"must be > 0 (got {value})"

    return True, ""


def validate_int_at_least(value: int, minimum: int) -> Tuple[bool, str]:
    if isinstance(value, bool) or not isinstance(value, int):
        return False, "must be an integer"

    if value < minimum:
        return False, f"must be >= {minimum} (got {value})"

    return True, ""


def validate_grading_factor(value: float, bound: float) -> Tuple[bool, str]:
    is_valid, message = validate_positive_real(value)
    if not is_valid:
        return is_valid, message

    if not 1.0 / bound <= value <= bound:
        return False, f"must be in [{1.0 / bound:g}, {bound:g}] (got {value:g})"

    return True, ""


def validate_choice(value: str, choices: Sequence[str]) -> Tuple[bool, str]:
    if value not in choices:
        return False, f"must be one of {{{', '.join(choices)}}} (got {value!r})"
    return True, ""


def validate_smoother_omega(kind: str, omega: Optional[float]) -> Tuple[bool, str]:
    """
    Validate the C-construction omega against the admissible range of a smoother.

    Ranges:
    - richardson: > 0 (the 1/lambda_max bound is enforced at setup)
    - jacobi, ilu0: > 0
    - gauss_seidel, sor: (0, 2)
    - tri_x, tri_y, adi, gstri_x, gstri_y, gsadi: (0, 1]

    Args:
        kind: Smoother kind tag
        omega: Relaxation parameter, None selects the kind's default

    Returns:
        Tuple of (is_valid, error_message)
    """
    if omega is None:
        return True, ""

    is_valid, message = validate_positive_real(omega)
    if not is_valid:
        return False, message

    if kind in ("gauss_seidel", "sor") and not omega < 2.0:
        return False, f"must lie in (0, 2) for {kind} (got {omega})"

    if kind in ("tri_x", "tri_y", "adi", "gstri_x", "gstri_y", "gsadi") and omega > 1.0:
        return False, f"must lie in (0, 1] for {kind} (got {omega})"

    return True, ""


def validate_output_path(path: str) -> Tuple[bool, str]:
    """
    Validate that an output file path is writable.

    Args:
        path: Target file path

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not path:
        return False, "output path cannot be empty"

    if '\x00' in path:
        return False, "output path contains null bytes"

    target = Path(path)
    if target.exists() and target.is_dir():
        return False, f"{path} is a directory"

    parent = target.parent if str(target.parent) else Path(".")
    if parent.exists() and not os.access(parent, os.W_OK):
        return False, f"directory {parent} is not writable"

    return True, ""


def sanitize_value_token(token: str) -> str:
    """File-name-safe form of a sweep value (used in history_<value>.csv)."""
    safe = "".join(c if c.isalnum() or c in ".-_" else "_" for c in token)
    if not safe or safe.startswith("."):
        safe = "_" + safe
    return safe
