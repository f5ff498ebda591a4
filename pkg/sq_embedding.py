"""
Linear embeddings of k-dimensional subspaces of S_p into S_q^m, 1 <= p < q.

The map is Phi(A) = J(A) * M^((p-q)/(2q)), where J compresses the ambient
matrices onto the dominant singular subspaces of X and M comes from a Lewis
basis of J(X). Its distortion is certified against

    (1 - eps) ||A||_p <= k^(1/p - 1/q) ||Phi A||_q
    ||Phi A||_q <= max(k^((p-2)/2 (1/p - 1/q)), 1) ||A||_p

on seeded probe sets.
"""
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from errors import InvalidExponent, InvalidExponents, NotInSubspace, SampleTooSmall, TooLarge, UsageError
from lewis_solver import SolverConfig, SubspaceBasis, solve_lewis
from spectral_core import as_square, psd_leq, schatten_norm, schatten_norms, svd, sym_power, within
from validators import validate_exponent, validate_exponent_pair, validate_positive_int

logger = logging.getLogger('geolab.embedding')

SLACK = 1e-8
SPAN_REL = 1e-8
KERNEL_TOL = 1e-9
HYPERCUBE_PROBE_MAX_K = 8
HYPERCUBE_EXHAUSTIVE_MAX_K = 10


@dataclass(frozen=True)
class Truncation:
    """
    Compression J(A) = left^T A right onto m-dimensional singular subspaces.

    ``left`` and ``right`` have orthonormal columns (N x m).
    """
    left: np.ndarray
    right: np.ndarray
    worst_defect: float
    expansion_violations: int
    sample_size: int
    identity: bool

    @property
    def m(self):
        return self.left.shape[1]

    def apply(self, A):
        if self.identity:
            return np.asarray(A, dtype=float)
        return self.left.T @ A @ self.right


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool

    @property
    def slack(self):
        return self.rhs - self.lhs

    def as_dict(self):
        return {'lhs': self.lhs, 'rhs': self.rhs, 'holds': self.holds, 'slack': self.slack}


@dataclass(frozen=True)
class BetaBoundCheck:
    lhs: float
    rhs: float
    holds: bool
    psd_order_holds: bool


@dataclass(frozen=True)
class EmbeddingMap:
    p: float
    q: float
    k: int
    truncation: Truncation
    weight: np.ndarray
    lewis: object
    basis: SubspaceBasis

    @property
    def m(self):
        return self.weight.shape[0]

    def apply(self, A):
        return self.truncation.apply(A) @ self.weight


@dataclass(frozen=True)
class DistortionCertificate:
    upper_const: float
    lower_const: float
    empirical_distortion: float
    sample_size: int
    violations: int
    lower_violations: int
    upper_violations: int
    worst_defect: float
    eps_effective: float
    theorem_bound: float

    @property
    def certified_bound(self):
        return self.upper_const * self.lower_const / (1.0 - self.eps_effective)

    def to_dict(self):
        return {
            'upper_const': self.upper_const,
            'lower_const': self.lower_const,
            'empirical_distortion': self.empirical_distortion,
            'sample_size': self.sample_size,
            'violations': self.violations,
            'lower_checks': {'checked': self.sample_size, 'violations': self.lower_violations},
            'upper_checks': {'checked': self.sample_size, 'violations': self.upper_violations},
            'worst_defect': self.worst_defect,
            'certified_bound': self.certified_bound,
            'theorem_bound': self.theorem_bound,
        }


def _check_pair(p, q):
    is_valid, error = validate_exponent_pair(p, q)
    if not is_valid:
        raise InvalidExponents(error)
    return float(p), float(q)


def upper_constant(p, q, k):
    """max(k^((p-2)/2 (1/p - 1/q)), 1)."""
    return max(k ** ((p - 2) / 2 * (1 / p - 1 / q)), 1.0)


def lower_constant(p, q, k):
    return k ** (1 / p - 1 / q)


def theorem_bound(p, q, k):
    """
    Distortion guaranteed for k-dimensional subspaces of S_p in S_q.

    k^(1/p - 1/q) for p in [1, 2], k^((p/2)(1/p - 1/q)) for p > 2.
    """
    p, q = _check_pair(p, q)
    is_valid, error = validate_positive_int(k, 'k')
    if not is_valid:
        raise UsageError(error)
    if p <= 2:
        return k ** (1 / p - 1 / q)
    return k ** ((p / 2) * (1 / p - 1 / q))


def _cutoff_rank(s, p, target):
    """Smallest r with (sum_{j>r} s_j^p)^(1/p) <= target."""
    tails = np.concatenate([np.cumsum((s ** p)[::-1])[::-1], [0.0]])
    return int(np.argmax(tails <= target ** p))


def _pad(Q, n, m):
    """Extend orthonormal columns Q (n x r) to n x m."""
    if Q.shape[1] >= m:
        return Q
    complement = scipy.linalg.null_space(Q.T) if Q.shape[1] else np.eye(n)
    return np.hstack([Q, complement[:, :m - Q.shape[1]]])


def truncate_subspace(basis, eps, sample_size, seed=0):
    """
    Compress X onto the singular subspaces that carry all but eps/4 of the
    S_p mass of every sampled element.

    The sample is the basis itself plus ``sample_size`` seeded Gaussian
    directions in coefficient space, normalised to ||A||_p = 1.

    Raises:
        SampleTooSmall: sample_size < k
    """
    if not 0 < eps < 1:
        raise InvalidExponent(f"eps must lie in (0,1), got {eps}")
    if sample_size < basis.k:
        raise SampleTooSmall(f"sample of {sample_size} cannot cover a {basis.k}-dimensional subspace")

    rng = np.random.default_rng(seed)
    p, N = basis.p, basis.m
    coefficients = np.vstack([np.eye(basis.k), rng.standard_normal((sample_size, basis.k))])
    samples = np.tensordot(coefficients, basis.elements, axes=1)
    norms = schatten_norms(samples, p)
    samples = samples / norms[:, None, None]

    lefts, rights = [], []
    for A in samples:
        form = svd(A)
        r = max(_cutoff_rank(form.singulars, p, eps / 4), 1)
        lefts.append(form.left[:, :r])
        rights.append(form.right[:r].T)
    left = scipy.linalg.orth(np.hstack(lefts))
    right = scipy.linalg.orth(np.hstack(rights))

    if left.shape[1] == N and right.shape[1] == N:
        eye = np.eye(N)
        return Truncation(eye, eye.copy(), 0.0, 0, len(samples), True)

    m = max(left.shape[1], right.shape[1])
    left, right = _pad(left, N, m), _pad(right, N, m)
    compressed = np.einsum('am,nab,bc->nmc', left, samples, right)
    ratios = schatten_norms(compressed, p)
    worst = float(max(0.0, np.max(1.0 - ratios)))
    expansions = int(np.sum(ratios > 1.0 + 1e-12))
    logger.info(f"truncated S_{p:g}^{N} subspace to m={m} (worst defect {worst:.3e} over {len(samples)} samples)")
    return Truncation(left, right, worst, expansions, len(samples), False)


def _hypercube_directions(k):
    """Nonzero vectors of {-1,0,1}^k with first nonzero entry +1."""
    rows = [d for d in itertools.product((-1, 0, 1), repeat=k) if any(d) and next(x for x in d if x) == 1]
    return np.array(rows, dtype=float)


def _ratios(emb, coefficients):
    originals = np.tensordot(coefficients, emb.basis.elements, axes=1)
    images = np.stack([emb.apply(A) for A in originals])
    return schatten_norms(originals, emb.p), schatten_norms(images, emb.q)


def build_embedding(basis, q, solver=None, eps=0.01, sample_size=200, probes=10000, seed=None):
    """
    Build Phi for the subspace spanned by ``basis`` and certify it on probes.

    Probes: all hypercube difference directions (k <= 8) plus ``probes``
    seeded Gaussian coefficient vectors.

    Returns:
        tuple: (EmbeddingMap, DistortionCertificate)
    """
    p, q = _check_pair(basis.p, q)
    solver = solver or SolverConfig()
    seed = solver.seed if seed is None else seed
    k = basis.k

    truncation = truncate_subspace(basis, eps, max(sample_size, k), seed)
    compressed = SubspaceBasis([truncation.apply(W) for W in basis.elements], p)
    lewis = solve_lewis(compressed, solver)
    emb = EmbeddingMap(
        p=p, q=q, k=k, truncation=truncation,
        weight=sym_power(lewis.M, (p - q) / (2 * q)),
        lewis=lewis, basis=basis,
    )

    rng = np.random.default_rng(seed + 1)
    blocks = [rng.standard_normal((probes, k))]
    if k <= HYPERCUBE_PROBE_MAX_K:
        blocks.insert(0, _hypercube_directions(k))
    source, target = _ratios(emb, np.vstack(blocks))

    upper, lower = upper_constant(p, q, k), lower_constant(p, q, k)
    eps_effective = 0.0 if truncation.identity else eps
    lower_bad = (1 - eps_effective) * source > lower * target + SLACK * (1 + source)
    upper_bad = target > upper * source + SLACK * (1 + source)
    ratio = target / source
    cert = DistortionCertificate(
        upper_const=upper,
        lower_const=lower,
        empirical_distortion=float(np.max(ratio) / np.min(ratio)),
        sample_size=len(ratio),
        violations=int(np.sum(lower_bad) + np.sum(upper_bad)),
        lower_violations=int(np.sum(lower_bad)),
        upper_violations=int(np.sum(upper_bad)),
        worst_defect=truncation.worst_defect,
        eps_effective=eps_effective,
        theorem_bound=theorem_bound(p, q, k),
    )
    if cert.violations:
        logger.warning(f"embedding S_{p:g} -> S_{q:g} (k={k}): {cert.violations} bound violations")
    logger.info(f"embedding S_{p:g} -> S_{q:g} (k={k}, m={emb.m}): empirical distortion {cert.empirical_distortion:.6f}")
    return emb, cert


def hypercube_distortion(emb):
    """Exact distortion of Phi over all differences of the points sum_i e_i W_i, e in {-1,1}^k."""
    if emb.k > HYPERCUBE_EXHAUSTIVE_MAX_K:
        raise TooLarge(f"exhaustive hypercube check limited to k <= {HYPERCUBE_EXHAUSTIVE_MAX_K}")
    source, target = _ratios(emb, _hypercube_directions(emb.k))
    ratio = target / source
    return float(np.max(ratio) / np.min(ratio))


def _in_span(A, cert):
    A = as_square(A)
    if A.shape != (cert.m, cert.m):
        raise NotInSubspace(f"expected a {cert.m}x{cert.m} matrix, got {A.shape}")
    design = cert.basis.reshape(cert.k, -1).T
    coefficients, *_ = np.linalg.lstsq(design, A.ravel(), rcond=None)
    residual = float(np.linalg.norm(design @ coefficients - A.ravel()))
    if residual > SPAN_REL * (1.0 + np.linalg.norm(A)):
        raise NotInSubspace(f"A is off the span of the Lewis basis by {residual:.3e}")
    return A, coefficients


def certify_lower(A, cert, p, q):
    """||A||_p <= k^(1/p - 1/q) ||A M^((p-q)/(2q))||_q."""
    p, q = _check_pair(p, q)
    A, _ = _in_span(A, cert)
    lhs = schatten_norm(A, p)
    rhs = lower_constant(p, q, cert.k) * schatten_norm(A @ sym_power(cert.M, (p - q) / (2 * q)), q)
    return BoundCheck(lhs, rhs, within(lhs, rhs, SLACK))


def certify_upper(A, cert, p, q):
    """||A M^((p-q)/(2q))||_q <= max(k^((p-2)/2 (1/p - 1/q)), 1) ||A||_p, p >= 1."""
    is_valid, error = validate_exponent(p, low=1.0, low_inclusive=True)
    if not is_valid:
        raise InvalidExponent(error)
    p, q = _check_pair(p, q)
    A, _ = _in_span(A, cert)
    lhs = schatten_norm(A @ sym_power(cert.M, (p - q) / (2 * q)), q)
    rhs = upper_constant(p, q, cert.k) * schatten_norm(A, p)
    return BoundCheck(lhs, rhs, within(lhs, rhs, SLACK))


def beta_bound_check(A, cert, p, beta):
    """
    ||(A^T A)^beta M^(-beta)||_inf <= (trace[A^T A M^(p/2-1)])^beta for A in the span.

    Also reports the order step A^T A <= (sum a_i^2) M, with a the
    coordinates of A in the Lewis basis.
    """
    is_valid, error = validate_exponent(beta, low=0.0, high=0.5, name='beta')
    if not is_valid:
        raise InvalidExponent(error)
    A, coefficients = _in_span(A, cert)
    gram = A.T @ A
    gram = (gram + gram.T) / 2
    lhs = schatten_norm(sym_power(gram, beta) @ sym_power(cert.M, -beta), math.inf)
    trace = max(float(np.trace(gram @ sym_power(cert.M, p / 2 - 1))), 0.0)
    rhs = trace ** beta
    order = psd_leq(gram, float(np.sum(coefficients ** 2)) * cert.M, 1e-9)
    return BetaBoundCheck(lhs, rhs, within(lhs, rhs), order)


def kernel_identity_check(A, cert, p, q):
    """A M^((p-q)/(2q)) M^((q-p)/(2q)) = A on the span."""
    p, q = _check_pair(p, q)
    A, _ = _in_span(A, cert)
    roundtrip = A @ sym_power(cert.M, (p - q) / (2 * q)) @ sym_power(cert.M, (q - p) / (2 * q))
    error = float(np.linalg.norm(roundtrip - A))
    bound = KERNEL_TOL * (1.0 + float(np.linalg.norm(A)))
    return BoundCheck(error, bound, error <= bound)
