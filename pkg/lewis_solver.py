"""
Lewis-type bases for subspaces of S_p^m.

A subspace is given by a basis W_1..W_k of m x m matrices. For a coefficient
matrix A (k x k) write S_j(A) = sum_u A[j, u] W_u and

    Lambda(A) = (sum_j S_j(A)^T S_j(A))^(1/2),    psi(A) = trace Lambda(A)^p.

A Lewis basis T_1..T_k of the same subspace satisfies, with M = sum T_i^T T_i,

    trace[ (T_i^T T_j + T_j^T T_i)/2 * M^(p/2 - 1) ] = delta_ij

and consequently trace M^(p/2) = k. It is obtained by maximising det A on the
set psi(A) = 1; two solvers are provided (fixed_point and gradient_ascent).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from errors import (
    DegenerateBasis, DimensionMismatch, InvalidExponent, NoConvergence,
    NonFiniteInput, SingularCoefficient, UsageError,
)
from io_utils import matrix_from_json, matrix_to_json
from spectral_core import psd_eigh, sym_power
from validators import validate_exponent, validate_finite, validate_positive_int, validate_square, validate_tolerance

logger = logging.getLogger('geolab.lewis')

MODES = ('fixed_point', 'gradient_ascent')
# gradient ascent needs more steps on ill-conditioned p = 1 subspaces
DEFAULT_MAX_ITERS = {'fixed_point': 10000, 'gradient_ascent': 50000}

INDEPENDENCE_REL = 1e-8
SINGULAR_REL = 1e-12
GAP_REL = 1e-10
MAX_RESTARTS = 5
PERTURBATION = 1e-3

ARMIJO = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-12
NOISE_REL = 1e-13


class SubspaceBasis:
    """
    Ordered, linearly independent list of k square matrices of size m.

    The elements are stored as one read-only (k, m, m) array.
    """

    def __init__(self, elements, p):
        is_valid, error = validate_exponent(p)
        if not is_valid or math.isinf(float(p)):
            raise InvalidExponent(error or f"p must be finite, got {p}")
        self.p = float(p)

        matrices = [np.array(W, dtype=float) for W in elements]
        if not matrices:
            raise DimensionMismatch("a subspace basis needs at least one element")
        for W in matrices:
            is_valid, error = validate_square(W)
            if not is_valid:
                raise DimensionMismatch(error)
            is_valid, error = validate_finite(W)
            if not is_valid:
                raise NonFiniteInput(error)
        shapes = {W.shape for W in matrices}
        if len(shapes) != 1:
            raise DimensionMismatch(f"basis elements have different shapes: {sorted(shapes)}")

        stack = np.stack(matrices)
        k, m = stack.shape[0], stack.shape[1]
        if k > m * m:
            raise DegenerateBasis(f"{k} elements cannot be independent in a space of dimension {m * m}")
        sv = np.linalg.svd(stack.reshape(k, -1), compute_uv=False)
        if sv[0] == 0.0 or sv[-1] < INDEPENDENCE_REL * sv[0]:
            raise DegenerateBasis(f"basis is numerically dependent (sigma_min/sigma_max = {sv[-1] / max(sv[0], 1e-300):.3e})")

        stack.flags.writeable = False
        self.elements = stack

    @property
    def k(self):
        return self.elements.shape[0]

    @property
    def m(self):
        return self.elements.shape[1]

    def combine(self, A):
        """Stack of S_j(A) = sum_u A[j, u] W_u, shape (k, m, m)."""
        return np.einsum('ju,umn->jmn', A, self.elements)

    def transformed(self, R):
        """Basis sum_j R[i, j] W_j of the same subspace; R must be invertible."""
        R = np.asarray(R, dtype=float)
        if R.shape != (self.k, self.k):
            raise DimensionMismatch(f"change of basis must be {self.k}x{self.k}, got {R.shape}")
        return SubspaceBasis(self.combine(R), self.p)

    def conjugated(self, U, V):
        """Basis {U W_i V}."""
        return SubspaceBasis([U @ W @ V for W in self.elements], self.p)

    def coordinates(self, A):
        """
        Least-squares coordinates of A in this basis.

        Returns:
            tuple: (coefficients: ndarray of length k, residual: Frobenius norm of the misfit)
        """
        A = np.asarray(A, dtype=float)
        if A.shape != (self.m, self.m):
            raise DimensionMismatch(f"expected a {self.m}x{self.m} matrix, got {A.shape}")
        design = self.elements.reshape(self.k, -1).T
        coefficients, *_ = np.linalg.lstsq(design, A.ravel(), rcond=None)
        residual = float(np.linalg.norm(design @ coefficients - A.ravel()))
        return coefficients, residual

    def __repr__(self):
        return f"<SubspaceBasis k={self.k} m={self.m} p={self.p}>"


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    max_iters: int = None
    mode: str = 'fixed_point'
    seed: int = 0

    def __post_init__(self):
        is_valid, error = validate_tolerance(self.tol)
        if not is_valid:
            raise UsageError(error)
        if self.mode not in MODES:
            raise UsageError(f"unknown solver mode '{self.mode}' (expected one of {list(MODES)})")
        if self.max_iters is None:
            object.__setattr__(self, 'max_iters', DEFAULT_MAX_ITERS[self.mode])
        is_valid, error = validate_positive_int(self.max_iters, 'max_iters')
        if not is_valid:
            raise UsageError(error)

    @classmethod
    def from_experiment(cls, exp):
        return cls(tol=exp.tol, max_iters=exp.max_iters, mode=exp.params.get('mode', 'fixed_point'), seed=exp.seed)


@dataclass(frozen=True)
class LewisResiduals:
    gram_residual: float
    trace_residual: float

    @property
    def worst(self):
        return max(self.gram_residual, self.trace_residual)

    def as_dict(self):
        return {'gram_residual': self.gram_residual, 'trace_residual': self.trace_residual}


@dataclass(frozen=True)
class LewisCertificate:
    """
    A Lewis basis T (shape (k, m, m)) with M = sum T_i^T T_i and its residuals.

    ``coefficients`` is the maximiser normalised to psi = 1 and ``scale`` the
    factor with T = scale * S(coefficients).
    """
    p: float
    basis: np.ndarray
    M: np.ndarray
    gram_residual: float
    trace_residual: float
    coefficients: np.ndarray = None
    scale: float = 1.0
    iters: int = 0
    restarts: int = 0
    mode: str = 'fixed_point'
    seed: int = 0

    @property
    def k(self):
        return self.basis.shape[0]

    @property
    def m(self):
        return self.basis.shape[1]

    def to_dict(self):
        data = {
            'p': self.p,
            'k': self.k,
            'm': self.m,
            'T': [matrix_to_json(T) for T in self.basis],
            'M': matrix_to_json(self.M),
            'gram_residual': self.gram_residual,
            'trace_residual': self.trace_residual,
            'iters': self.iters,
            'restarts': self.restarts,
            'mode': self.mode,
            'seed': self.seed,
            'scale': self.scale,
        }
        if self.coefficients is not None:
            data['coefficients'] = matrix_to_json(self.coefficients)
        return data

    @classmethod
    def from_dict(cls, data):
        try:
            basis = np.stack([matrix_from_json(T) for T in data['T']])
            M = matrix_from_json(data['M'])
            coefficients = matrix_from_json(data['coefficients']) if 'coefficients' in data else None
            return cls(
                p=float(data['p']), basis=basis, M=M,
                gram_residual=float(data['gram_residual']), trace_residual=float(data['trace_residual']),
                coefficients=coefficients, scale=float(data.get('scale', 1.0)),
                iters=int(data.get('iters', 0)), restarts=int(data.get('restarts', 0)),
                mode=data.get('mode', 'fixed_point'), seed=int(data.get('seed', 0)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"malformed certificate: {e}")


def random_subspace(k, m, p, seed=0):
    """Gaussian basis of a random k-dimensional subspace of S_p^m."""
    rng = np.random.default_rng(seed)
    return SubspaceBasis(rng.standard_normal((k, m, m)), p)


def diagonal_subspace(k, p):
    """Matrix units E_11..E_kk in S_p^k."""
    return SubspaceBasis([np.diag(np.eye(k)[i]) for i in range(k)], p)


def _coefficients(A, basis):
    A = np.array(A, dtype=float)
    if A.shape != (basis.k, basis.k):
        raise DimensionMismatch(f"coefficient matrix must be {basis.k}x{basis.k}, got {A.shape}")
    is_valid, error = validate_finite(A)
    if not is_valid:
        raise NonFiniteInput(error)
    return A


def m_matrix(T):
    """sum_i T_i^T T_i for a (k, m, m) stack."""
    M = np.einsum('jam,jan->mn', T, T)
    return (M + M.T) / 2


def lambda_squared(A, basis):
    return m_matrix(basis.combine(_coefficients(A, basis)))


def lambda_of(A, basis):
    """Lambda(A) = (sum_j S_j(A)^T S_j(A))^(1/2)."""
    return sym_power(lambda_squared(A, basis), 0.5)


def _trace_power(M, p):
    w, _ = psd_eigh(M)
    positive = w[w > 0]
    return float(np.sum(positive ** (p / 2)))


def psi(A, basis):
    """trace Lambda(A)^p."""
    return _trace_power(lambda_squared(A, basis), basis.p)


def grad_psi(B, basis):
    """
    Gradient of psi at an invertible B.

    Entry (u, t) is (p/2) trace[(S_u^T W_t + W_t^T S_u) Lambda^(p-2)], which
    equals p * <S_u, W_t Lambda^(p-2)> since Lambda^(p-2) is symmetric.
    """
    B = _coefficients(B, basis)
    s = np.linalg.svd(B, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= SINGULAR_REL * s[0]:
        raise SingularCoefficient("coefficient matrix is singular")
    p = basis.p
    S = basis.combine(B)
    Z = sym_power(m_matrix(S), (p - 2) / 2)
    return p * np.einsum('uab,tab->ut', S, basis.elements @ Z)


def gram_matrix(T, M, p):
    """G_ij = trace[(T_i^T T_j + T_j^T T_i)/2 * M^(p/2 - 1)]."""
    Z = sym_power(M, p / 2 - 1)
    G = np.einsum('iab,jab->ij', T, T @ Z)
    return (G + G.T) / 2


def _residuals(G, M, p):
    k = G.shape[0]
    gram = float(np.max(np.abs(G - np.eye(k))))
    trace = abs(_trace_power(M, p) - k)
    return LewisResiduals(gram, trace)


def residuals_of(T, p, M=None):
    """Gram and trace residuals of a candidate Lewis basis."""
    T = np.asarray(T, dtype=float)
    if M is None:
        M = m_matrix(T)
    return _residuals(gram_matrix(T, M, p), M, p)


def certify_lewis(cert, p):
    """Recompute both residuals from the certificate's T_i alone."""
    return residuals_of(cert.basis, float(p))


def _eigen_gap_ok(M):
    w, _ = psd_eigh(M)
    positive = w[w > 0]
    return positive.size == 0 or positive[0] >= GAP_REL * positive[-1]


def _start(k, rng):
    return np.eye(k) + PERTURBATION * rng.standard_normal((k, k))


def _restart(restarts, iters, best, mode):
    restarts += 1
    if restarts > MAX_RESTARTS:
        raise NoConvergence(f"{mode}: eigenvalue gap collapsed after {MAX_RESTARTS} restarts", best_residual=best, iters=iters)
    logger.warning(f"{mode}: eigenvalue gap of M below {GAP_REL:g}, restarting ({restarts}/{MAX_RESTARTS})")
    return restarts


def _fixed_point(basis, config, rng):
    """
    Iterate B <- G^(-theta/2) B with G the Gram matrix of T = S(B).

    theta = 1 for p <= 2 and 2/p above, which keeps the scaling mode
    contracting for every p.

    Returns:
        tuple: (coefficients with psi = 1, scale, iters, restarts)
    """
    k, p = basis.k, basis.p
    theta = 1.0 if p <= 2 else 2.0 / p
    B = _start(k, rng)
    iters = restarts = 0
    best = math.inf
    while iters < config.max_iters:
        iters += 1
        T = basis.combine(B)
        M = m_matrix(T)
        if not _eigen_gap_ok(M):
            restarts = _restart(restarts, iters, best, 'fixed_point')
            B = _start(k, rng)
            continue
        G = gram_matrix(T, M, p)
        residual = _residuals(G, M, p).worst
        best = min(best, residual)
        if residual <= config.tol:
            scale = k ** (1.0 / p)
            return B / scale, scale, iters, restarts
        B = sym_power(G, -theta / 2) @ B
    raise NoConvergence(f"fixed_point: no convergence in {config.max_iters} iterations", best_residual=best, iters=iters)


def _objective(B, basis):
    """log|det B| - (k/p) log psi(B); -inf off the positive-determinant cone."""
    sign, logdet = np.linalg.slogdet(B)
    value = psi(B, basis)
    if sign <= 0 or value <= 0:
        return -math.inf
    return logdet - basis.k / basis.p * math.log(value)


def _normalise(B, basis):
    value = psi(B, basis)
    if value <= 0:
        raise SingularCoefficient("psi vanished during the ascent")
    return B / value ** (1.0 / basis.p)


def _lagrange_scale(B, grad, p):
    """(lambda p)^(1/p) with lambda the multiplier of B^-T = lambda grad psi."""
    lam = float(np.sum(np.linalg.inv(B).T * grad) / np.sum(grad * grad))
    if lam <= 0:
        return None
    return (lam * p) ** (1.0 / p)


def _gradient_ascent(basis, config, rng):
    """
    Preconditioned gradient ascent of log det on psi = 1 with Armijo backtracking.

    Returns:
        tuple: (coefficients with psi = 1, scale, iters, restarts)
    """
    k, p = basis.k, basis.p
    B = _normalise(_start(k, rng), basis)
    iters = restarts = 0
    best = math.inf
    last_step = 1.0
    while iters < config.max_iters:
        iters += 1
        if not _eigen_gap_ok(lambda_squared(B, basis)):
            restarts = _restart(restarts, iters, best, 'gradient_ascent')
            B = _normalise(_start(k, rng), basis)
            continue

        grad = grad_psi(B, basis)
        scale = _lagrange_scale(B, grad, p)
        residual = math.inf if scale is None else residuals_of(scale * basis.combine(B), p).worst
        best = min(best, residual)
        if residual <= config.tol:
            return B, scale, iters, restarts

        euclidean = np.linalg.inv(B).T - k / (p * psi(B, basis)) * grad
        direction = euclidean @ B.T @ B
        slope = float(np.sum(euclidean * direction))
        f0 = _objective(B, basis)

        if slope <= NOISE_REL * (1.0 + abs(f0)):
            # Armijo is meaningless at rounding level
            step = last_step
        else:
            step = 1.0
            while _objective(B + step * direction, basis) < f0 + ARMIJO * step * slope:
                step *= BACKTRACK
                if step < MIN_STEP:
                    logger.warning(f"gradient_ascent: line search exhausted at iteration {iters}")
                    raise NoConvergence("gradient_ascent: line search exhausted", best_residual=best, iters=iters)
            last_step = step
        B = _normalise(B + step * direction, basis)
    raise NoConvergence(f"gradient_ascent: no convergence in {config.max_iters} iterations", best_residual=best, iters=iters)


def solve_lewis(basis, config=None):
    """
    Compute a Lewis basis of the subspace spanned by ``basis``.

    Deterministic given (basis, config.seed).

    Raises:
        NoConvergence: iteration cap or restart cap reached
    """
    config = config or SolverConfig()
    rng = np.random.default_rng(config.seed)
    solver = _fixed_point if config.mode == 'fixed_point' else _gradient_ascent
    coefficients, scale, iters, restarts = solver(basis, config, rng)

    if np.linalg.det(coefficients) < 0:
        coefficients = coefficients.copy()
        coefficients[0] *= -1

    T = scale * basis.combine(coefficients)
    M = m_matrix(T)
    residuals = residuals_of(T, basis.p, M)
    logger.info(
        f"{config.mode}: k={basis.k} m={basis.m} p={basis.p:g} converged in {iters} iterations "
        f"(restarts={restarts}, gram={residuals.gram_residual:.2e}, trace={residuals.trace_residual:.2e})"
    )
    return LewisCertificate(
        p=basis.p, basis=T, M=M,
        gram_residual=residuals.gram_residual, trace_residual=residuals.trace_residual,
        coefficients=coefficients, scale=scale, iters=iters, restarts=restarts,
        mode=config.mode, seed=config.seed,
    )
