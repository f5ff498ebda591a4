"""
Input validation utilities
"""
import math

import numpy as np


def validate_exponent(p, low=0.0, high=math.inf, low_inclusive=False, high_inclusive=True, name='p'):
    """
    Validate a Schatten/Lebesgue exponent.

    Requirements:
    - A real number (math.inf allowed when high is inf and inclusive)
    - Inside the interval described by low/high and the inclusive flags

    Returns:
        tuple: (is_valid: bool, error_message: str)
    """
    try:
        value = float(p)
    except (TypeError, ValueError):
        return False, f"{name} must be a number, got {p!r}"

    if math.isnan(value):
        return False, f"{name} must not be NaN"

    above = value >= low if low_inclusive else value > low
    below = value <= high if high_inclusive else value < high
    if not (above and below):
        left = '[' if low_inclusive else '('
        right = ']' if high_inclusive else ')'
        return False, f"{name}={value} outside {left}{low}, {high}{right}"

    return True, ""


def validate_exponent_pair(p, q):
    """
    Validate an exponent pair for S_p -> S_q embeddings.

    Requirements:
    - 1 <= p < q < inf

    Returns:
        tuple: (is_valid: bool, error_message: str)
    """
    is_valid, error = validate_exponent(p, low=1.0, low_inclusive=True, high=math.inf, high_inclusive=False)
    if not is_valid:
        return False, error
    is_valid, error = validate_exponent(q, low=1.0, low_inclusive=True, high=math.inf, high_inclusive=False, name='q')
    if not is_valid:
        return False, error
    if not p < q:
        return False, f"need p < q, got p={p}, q={q}"
    return True, ""


def validate_finite(T):
    """Returns (is_valid, error_message); rejects NaN/Inf entries."""
    if not np.all(np.isfinite(T)):
        return False, "matrix has non-finite entries"
    return True, ""


def validate_square(T):
    """
    Validate a dense real operand.

    Requirements:
    - Two-dimensional
    - rows == cols, at least 1x1

    Returns:
        tuple: (is_valid: bool, error_message: str)
    """
    if T.ndim != 2:
        return False, f"expected a matrix, got an array with {T.ndim} dimensions"
    rows, cols = T.shape
    if rows != cols or rows == 0:
        return False, f"expected a non-empty square matrix, got {rows}x{cols}"
    return True, ""


def validate_symmetric_psd(T, eigenvalues=None):
    """
    Validate symmetric positive semidefiniteness.

    Requirements:
    - ||T - T^T||_F <= 1e-10 (1 + ||T||_F)
    - every eigenvalue >= -1e-10 (1 + lambda_max)

    Returns:
        tuple: (is_valid: bool, error_message: str)
    """
    scale = 1.0 + np.linalg.norm(T)
    asymmetry = np.linalg.norm(T - T.T)
    if asymmetry > 1e-10 * scale:
        return False, f"matrix is not symmetric (||T - T^T||_F = {asymmetry:.3e})"

    if eigenvalues is None:
        eigenvalues = np.linalg.eigvalsh((T + T.T) / 2)
    lam_max = float(np.max(eigenvalues))
    lam_min = float(np.min(eigenvalues))
    if lam_min < -1e-10 * (1.0 + max(lam_max, 0.0)):
        return False, f"matrix has negative eigenvalue {lam_min:.3e}"
    return True, ""


def validate_probability_vector(v, tol=1e-12):
    """Returns (is_valid, error_message) for a nonnegative vector summing to 1."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        return False, "initial law must be a vector"
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        return False, "initial law has negative or non-finite entries"
    if abs(v.sum() - 1.0) > tol:
        return False, f"initial law sums to {v.sum():.15g}, not 1"
    return True, ""


def validate_stochastic_matrix(P, tol=1e-12):
    """
    Validate a transition matrix.

    Requirements:
    - square, finite, entries >= 0
    - every row sums to 1 within tol

    Returns:
        tuple: (is_valid: bool, error_message: str)
    """
    P = np.asarray(P, dtype=float)
    is_valid, error = validate_square(P)
    if not is_valid:
        return False, f"transition matrix: {error}"
    if not np.all(np.isfinite(P)) or np.any(P < 0):
        return False, "transition matrix has negative or non-finite entries"
    worst = np.max(np.abs(P.sum(axis=1) - 1.0))
    if worst > tol:
        return False, f"transition matrix row sums deviate from 1 by {worst:.3e}"
    return True, ""


def validate_level(k, minimum=1):
    """Returns (is_valid, error_message) for a recursion level k >= minimum."""
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        return False, f"level must be an integer, got {k!r}"
    if k < minimum:
        return False, f"level must be >= {minimum}, got {k}"
    return True, ""


def validate_positive_int(n, name='value'):
    """Returns (is_valid, error_message) for an integer >= 1."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        return False, f"{name} must be an integer, got {n!r}"
    if n < 1:
        return False, f"{name} must be >= 1, got {n}"
    return True, ""


def validate_tolerance(tol):
    """Returns (is_valid, error_message) for a finite positive tolerance."""
    try:
        value = float(tol)
    except (TypeError, ValueError):
        return False, f"tolerance must be a number, got {tol!r}"
    if not math.isfinite(value) or value <= 0:
        return False, f"tolerance must be positive and finite, got {tol}"
    return True, ""
