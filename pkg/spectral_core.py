"""
Spectral toolkit for real square matrices.

Schatten norms, the PSD order and fractional powers of symmetric positive
semidefinite matrices under the kernel convention: eigenvalues that are zero
(after clamping everything below ``CLAMP_REL * lambda_max``) stay zero under
every power, negative ones included. ``sym_power(T, 0)`` is therefore the
orthogonal projection onto the range of ``T``.

All functions are pure; inputs are copied to float arrays before use.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import ortho_group

from errors import DimensionMismatch, InvalidExponent, NonFiniteInput, NotPsd, OrderViolated
from validators import validate_exponent, validate_finite, validate_square, validate_symmetric_psd

logger = logging.getLogger('geolab.spectral')

CLAMP_REL = 1e-12
ORTH_TOL = 1e-10
CHECK_REL = 1e-9


@dataclass(frozen=True)
class SpectralForm:
    """T = left @ diag(singulars) @ right, singulars nonincreasing."""
    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def reconstruct(self):
        return (self.left * self.singulars) @ self.right


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    holds: bool

    @property
    def slack(self):
        return self.rhs - self.lhs

    def as_dict(self):
        return {'lhs': self.lhs, 'rhs': self.rhs, 'holds': self.holds}


@dataclass(frozen=True)
class ContractionCheck:
    value: float
    holds: bool


@dataclass(frozen=True)
class CounterexampleSearch:
    found: bool
    value: float
    trials: int
    S: np.ndarray = None
    T: np.ndarray = None


def within(lhs, rhs, rel=CHECK_REL):
    """lhs <= rhs up to a tolerance relative to 1 + |rhs|."""
    return bool(lhs <= rhs + rel * (1.0 + abs(rhs)))


def as_square(T):
    """Copy T to a finite square float matrix or raise."""
    T = np.array(T, dtype=float)
    is_valid, error = validate_square(T)
    if not is_valid:
        raise DimensionMismatch(error)
    is_valid, error = validate_finite(T)
    if not is_valid:
        raise NonFiniteInput(error)
    return T


def _same_shape(A, B):
    if A.shape != B.shape:
        raise DimensionMismatch(f"operands have shapes {A.shape} and {B.shape}")


def _check_exponent(p, **bounds):
    is_valid, error = validate_exponent(p, **bounds)
    if not is_valid:
        raise InvalidExponent(error)
    return float(p)


def _clamp(values):
    values = np.array(values, dtype=float)
    top = float(np.max(values)) if values.size else 0.0
    values[values < CLAMP_REL * max(top, 0.0)] = 0.0
    values[values < 0.0] = 0.0
    return values


def svd(T):
    """
    Singular value decomposition with clamped, nonincreasing singular values.

    The zero matrix returns identity factors. Deterministic: LAPACK gesdd on
    the given input, no randomisation.
    """
    T = as_square(T)
    m = T.shape[0]
    if not np.any(T):
        eye = np.eye(m)
        return SpectralForm(eye, np.zeros(m), eye.copy())
    U, s, Vt = np.linalg.svd(T)
    return SpectralForm(U, _clamp(s), Vt)


def singular_values(T):
    T = as_square(T)
    return _clamp(np.linalg.svd(T, compute_uv=False))


def schatten_norm(T, p):
    """
    Schatten p-norm (sum of sigma_j^p)^(1/p); p = inf gives sigma_1.

    For p < 1 this is the usual quasi-norm.
    """
    p = _check_exponent(p)
    s = singular_values(T)
    top = s[0]
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return float(top)
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def schatten_norms(stack, p):
    """schatten_norm over a (n, m, m) stack of matrices, vectorised."""
    p = _check_exponent(p)
    stack = np.asarray(stack, dtype=float)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise DimensionMismatch(f"expected a stack of square matrices, got shape {stack.shape}")
    if stack.shape[0] == 0:
        return np.zeros(0)
    s = np.linalg.svd(stack, compute_uv=False)
    top = s[:, 0]
    if math.isinf(p):
        return top
    s = np.where(s < CLAMP_REL * top[:, None], 0.0, s)
    safe = np.where(top > 0, top, 1.0)
    return np.where(top > 0, top * np.sum((s / safe[:, None]) ** p, axis=1) ** (1.0 / p), 0.0)


def operator_norm(T):
    return schatten_norm(T, math.inf)


def psd_eigh(T):
    """
    Validated symmetric eigendecomposition with clamped eigenvalues.

    Returns:
        tuple: (eigenvalues ascending, eigenvectors as columns)
    """
    T = as_square(T)
    sym = (T + T.T) / 2
    w, V = np.linalg.eigh(sym)
    is_valid, error = validate_symmetric_psd(T, eigenvalues=w)
    if not is_valid:
        raise NotPsd(error)
    return _clamp(w), V


def sym_power(T, beta):
    """T^beta on range(T), 0 on ker(T)."""
    w, V = psd_eigh(T)
    powered = np.zeros_like(w)
    positive = w > 0
    powered[positive] = w[positive] ** float(beta)
    out = (V * powered) @ V.T
    return (out + out.T) / 2


def psd_leq(S, T, tol=1e-10):
    """S <= T in the PSD order, up to tol * (1 + ||T||_inf)."""
    S, T = as_square(S), as_square(T)
    _same_shape(S, T)
    gap = T - S
    lam_min = float(np.linalg.eigvalsh((gap + gap.T) / 2)[0])
    return lam_min >= -tol * (1.0 + operator_norm(T))


def loewner_contraction_check(S, T, beta):
    """
    ||S^beta T^(-beta)||_inf for PSD S <= T.

    Guaranteed to be at most 1 when beta <= 1/2; larger beta can fail
    (see find_contraction_counterexample).
    """
    beta = _check_exponent(beta, name='beta')
    if not psd_leq(S, T, 1e-10):
        raise OrderViolated("S is not below T in the PSD order")
    value = operator_norm(sym_power(S, beta) @ sym_power(T, -beta))
    return ContractionCheck(value=value, holds=value <= 1.0 + 1e-9)


def find_contraction_counterexample(beta=1.0, trials=2000, seed=0, dim=2):
    """
    Random search for PSD S <= T with ||S^beta T^(-beta)||_inf > 1.

    T is S plus a rank-one PSD increment, which keeps S and T far from
    commuting.
    """
    rng = np.random.default_rng(seed)
    best = 0.0
    for trial in range(1, trials + 1):
        G = rng.standard_normal((dim, dim))
        h = rng.standard_normal((dim, 1))
        S = G @ G.T
        T = S + h @ h.T
        check = loewner_contraction_check(S, T, beta)
        best = max(best, check.value)
        if not check.holds:
            logger.info(f"contraction counterexample at beta={beta} after {trial} trials: {check.value:.6f}")
            return CounterexampleSearch(True, check.value, trial, S, T)
    return CounterexampleSearch(False, best, trials)


def von_neumann_check(S, T):
    """trace(ST) <= sum_j sigma_j(S) sigma_j(T)."""
    S, T = as_square(S), as_square(T)
    _same_shape(S, T)
    lhs = float(np.trace(S @ T))
    rhs = float(np.dot(singular_values(S), singular_values(T)))
    return InequalityCheck(lhs, rhs, within(lhs, rhs))


def holder_check(A, B, a, b):
    """||AB||_c <= ||A||_a ||B||_b with 1/c = 1/a + 1/b, a, b in [1, inf]."""
    bounds = dict(low=1.0, low_inclusive=True, high=math.inf, high_inclusive=True)
    a = _check_exponent(a, name='a', **bounds)
    b = _check_exponent(b, name='b', **bounds)
    A, B = as_square(A), as_square(B)
    _same_shape(A, B)
    inv_c = (0.0 if math.isinf(a) else 1.0 / a) + (0.0 if math.isinf(b) else 1.0 / b)
    c = math.inf if inv_c == 0.0 else 1.0 / inv_c
    lhs = schatten_norm(A @ B, c)
    rhs = schatten_norm(A, a) * schatten_norm(B, b)
    return InequalityCheck(lhs, rhs, within(lhs, rhs))


def ideal_property_check(S, T):
    """trace(ST) <= ||T||_inf trace(S) for PSD S."""
    S, T = as_square(S), as_square(T)
    _same_shape(S, T)
    w, _ = psd_eigh(S)
    lhs = float(np.trace(S @ T))
    rhs = operator_norm(T) * float(np.sum(w))
    return InequalityCheck(lhs, rhs, within(lhs, rhs))


def triangle_check(A, B, p):
    p = _check_exponent(p, low=1.0, low_inclusive=True)
    A, B = as_square(A), as_square(B)
    _same_shape(A, B)
    lhs = schatten_norm(A + B, p)
    rhs = schatten_norm(A, p) + schatten_norm(B, p)
    return InequalityCheck(lhs, rhs, within(lhs, rhs))


def random_orthogonal(m, rng):
    """Haar-distributed orthogonal m x m matrix."""
    if m == 1:
        return np.array([[rng.choice([-1.0, 1.0])]])
    return ortho_group.rvs(m, random_state=rng)


def unitary_invariance_check(T, U, V, p):
    """Compares ||U T V||_p with ||T||_p; U and V must be orthogonal."""
    T, U, V = as_square(T), as_square(U), as_square(V)
    _same_shape(T, U)
    _same_shape(T, V)
    m = T.shape[0]
    for name, Q in (('U', U), ('V', V)):
        if np.linalg.norm(Q @ Q.T - np.eye(m)) > ORTH_TOL:
            raise DimensionMismatch(f"{name} is not orthogonal")
    lhs = schatten_norm(U @ T @ V, p)
    rhs = schatten_norm(T, p)
    return InequalityCheck(lhs, rhs, abs(lhs - rhs) <= 1e-8 * (1.0 + rhs))
