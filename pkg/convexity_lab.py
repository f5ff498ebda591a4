"""
Markov 2-convexity and diamond 2-convexity functionals, the S_q inequality
suite and dimension-reduction impossibility certificates.

Markov convexity of a map f along a chain chi is measured by

    lhs = sum_{k' >= 1} 4^(-k') sum_t E d(f(chi~_t(t - 2^k')), f(chi_t))^2
    rhs = sum_t E d(f(chi_{t-1}), f(chi_t))^2

where chi~(s) agrees with chi up to time s and then evolves independently.
The chain is frozen at its initial law for t <= 0 and after the horizon T,
which makes both sums finite in t; the sum over k' is evaluated exactly up to
scale_cap and in closed form beyond it.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from errors import CollapsedPair, DimensionMismatch, InvalidChain, InvalidExponent, NotAMartingale, TooLarge, UsageError
from graph_factory import (
    DEFAULT_BUDGET_EDGES, DEFAULT_MAX_POINTS, CoordinateEmbedding, FiniteMetric, distortion_between,
    hypercube_metric, hypercube_points, l1_embed, laakso, metric_from_embedding, shortest_path_metric,
    source_distances,
)
from graph_factory import diamond as diamond_graph
from spectral_core import InequalityCheck, as_square, schatten_norm, schatten_norms, within
from validators import validate_exponent, validate_level, validate_probability_vector, validate_stochastic_matrix

logger = logging.getLogger('geolab.convexity')

DEFAULT_SCALE_MARGIN = 10
MARTINGALE_TOL = 1e-10
HYPERCUBE_MAX_K = 12
DEFAULT_DIMS = (2, 4, 16, 256, 4096, 65536, 2 ** 20)


@dataclass(frozen=True)
class ChainSpec:
    """Row-stochastic P, initial law, horizon T >= 1 and the largest scale k' summed explicitly."""
    P: np.ndarray
    initial: np.ndarray
    horizon: int
    scale_cap: int

    def __post_init__(self):
        is_valid, error = validate_stochastic_matrix(self.P)
        if not is_valid:
            raise InvalidChain(error)
        is_valid, error = validate_probability_vector(self.initial)
        if not is_valid:
            raise InvalidChain(error)
        if len(self.initial) != self.P.shape[0]:
            raise InvalidChain(f"initial law has {len(self.initial)} entries for {self.P.shape[0]} states")
        if isinstance(self.horizon, bool) or int(self.horizon) != self.horizon or self.horizon < 1:
            raise InvalidChain(f"horizon must be an integer >= 1, got {self.horizon}")
        if int(self.scale_cap) != self.scale_cap or self.scale_cap < 0:
            raise InvalidChain(f"scale_cap must be an integer >= 0, got {self.scale_cap}")

    @property
    def n_states(self):
        return self.P.shape[0]


@dataclass(frozen=True)
class PointMap:
    """images[state] = index of the state's image point in a FiniteMetric."""
    images: np.ndarray

    @classmethod
    def identity(cls, n):
        return cls(np.arange(n))

    def squared_distances(self, metric, n_states):
        if len(self.images) != n_states:
            raise DimensionMismatch(f"point map covers {len(self.images)} of {n_states} states")
        if np.any(self.images < 0) or np.any(self.images >= metric.n):
            raise DimensionMismatch("point map refers to points outside the metric")
        D = metric.dist[np.ix_(self.images, self.images)].astype(float)
        return D * D


@dataclass(frozen=True)
class ConvexityReport:
    lhs: float
    rhs: float
    truncation_error_bound: float
    scale_cap_used: int
    horizon: int
    n_states: int

    @property
    def pi2_lower(self):
        """sqrt(lhs/rhs) with the truncated lhs: a certified lower bound."""
        return _ratio_root(self.lhs, self.rhs)

    @property
    def pi2_exact(self):
        return _ratio_root(self.lhs + self.truncation_error_bound, self.rhs)

    def to_dict(self):
        return {
            'lhs': self.lhs,
            'rhs': self.rhs,
            'pi2_lower': self.pi2_lower,
            'pi2_exact': self.pi2_exact,
            'truncation_error_bound': self.truncation_error_bound,
            'scale_cap_used': self.scale_cap_used,
            'horizon': self.horizon,
            'n_states': self.n_states,
        }


@dataclass(frozen=True)
class MonteCarloEstimate:
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    samples: int


@dataclass(frozen=True)
class CanonicalChain:
    chain: ChainSpec
    f: PointMap
    graph: object
    metric: FiniteMetric


@dataclass(frozen=True)
class RatioReport:
    lhs: float
    rhs: float

    @property
    def ratio(self):
        if self.rhs > 0:
            return self.lhs / self.rhs
        return 0.0 if self.lhs == 0 else math.inf

    def as_dict(self):
        return {'lhs': self.lhs, 'rhs': self.rhs, 'ratio': self.ratio}


@dataclass(frozen=True)
class CotypeCheck:
    lhs: float
    rhs_bound: float
    holds: bool


@dataclass(frozen=True)
class HypercubeBound:
    implied: float
    universal: float
    actual: float


@dataclass(frozen=True)
class ImpossibilityReport:
    k: int
    alpha: float
    n: int
    pi2_lower: float
    constant: float
    convexity: ConvexityReport

    @property
    def log_dim_lower_bound(self):
        """(pi / (C alpha))^2, so that dim X >= exp of this."""
        return (self.pi2_lower / (self.constant * self.alpha)) ** 2

    @property
    def exponent(self):
        """c with dim X >= n^(c / alpha^2)."""
        return self.pi2_lower ** 2 / (self.constant ** 2 * math.log(self.n))

    @property
    def dim_lower_bound(self):
        return math.exp(self.log_dim_lower_bound)

    def statement(self):
        return (
            f"Any subspace X of S_1 into which the {self.n}-point l1 image of L_{self.k} embeds "
            f"with quotient distortion <= {self.alpha:g} must satisfy C*sqrt(log dim X) >= "
            f"{self.pi2_lower:.6f}/{self.alpha:g}; with C = {self.constant:.6f} this reads "
            f"dim X >= exp({self.log_dim_lower_bound:.6g}) = {self.n}^({self.exponent:.6g}/alpha^2)."
        )

    def to_dict(self):
        return {
            'k': self.k,
            'alpha': self.alpha,
            'n': self.n,
            'pi2_lower': self.pi2_lower,
            'constant': self.constant,
            'log_dim_lower_bound': self.log_dim_lower_bound,
            'dim_lower_bound': self.dim_lower_bound,
            'exponent': self.exponent,
            'statement': self.statement(),
            'convexity': self.convexity.to_dict(),
        }


def _ratio_root(lhs, rhs):
    if rhs > 0:
        return math.sqrt(lhs / rhs)
    return 0.0 if lhs == 0 else math.inf


class MatrixPowerCache:
    """P^(2^j) by repeated squaring; rows of P^n as products of cached powers."""

    def __init__(self, P):
        self._powers = [np.asarray(P, dtype=float)]

    def power_of_two(self, j):
        while len(self._powers) <= j:
            last = self._powers[-1]
            self._powers.append(last @ last)
        return self._powers[j]

    def rows(self, states, n):
        """P^n[states, :]."""
        N = self._powers[0].shape[0]
        out = np.eye(N)[states]
        j = 0
        while n:
            if n & 1:
                out = out @ self.power_of_two(j)
            n >>= 1
            j += 1
        return out


def fork_weights(horizon, scale_cap):
    """
    Weights omega(sigma, n) of the fork terms mu_sigma . F_n in lhs for
    scales k' = 1..scale_cap, where sigma is the (clipped) fork time and n
    the number of active steps after it.
    """
    T = horizon
    weights = {}

    def add(key, w):
        weights[key] = weights.get(key, 0.0) + w

    for kp in range(1, scale_cap + 1):
        ell, w = 2 ** kp, 4.0 ** -kp
        for sigma in range(1, T):
            add((sigma, min(ell, T - sigma)), w)
        for n in range(1, min(ell, T - 1) + 1):
            add((0, n), w)
        if ell >= T:
            add((0, T), w * (ell - T + 1))
    return weights


class _ForkEvaluator:
    """Exact fork terms mu_sigma . F_n with F_n(w) = sum_{u,v} P^n(w,u) P^n(w,v) d(u,v)^2."""

    def __init__(self, chain, D2):
        self.D2 = D2
        self.cache = MatrixPowerCache(chain.P)
        self.laws = [np.asarray(chain.initial, dtype=float)]
        for _ in range(chain.horizon):
            self.laws.append(self.laws[-1] @ chain.P)
        self._terms = {}

    def term(self, sigma, n):
        key = (sigma, n)
        if key not in self._terms:
            law = self.laws[sigma]
            support = np.flatnonzero(law > 0)
            rows = self.cache.rows(support, n)
            F = np.sum((rows @ self.D2) * rows, axis=1)
            self._terms[key] = math.fsum(law[support] * F)
        return self._terms[key]

    def scale_term(self, ell, T):
        """sum_t of the fork expectations at scale 2^k' = ell."""
        parts = [self.term(sigma, min(ell, T - sigma)) for sigma in range(1, T)]
        parts.extend(self.term(0, n) for n in range(1, min(ell, T - 1) + 1))
        if ell >= T:
            parts.append((ell - T + 1) * self.term(0, T))
        return math.fsum(parts)


def _tail(evaluator, T, scale_cap):
    """
    Exact sum over k' > scale_cap. Once 2^k' >= T each scale contributes
    a + (2^k' - T + 1) c, which sums in closed form.
    """
    start = max(scale_cap + 1, math.ceil(math.log2(T)) if T > 1 else 0, 1)
    explicit = [4.0 ** -kp * evaluator.scale_term(2 ** kp, T) for kp in range(scale_cap + 1, start)]
    a = evaluator.scale_term(T, T) - evaluator.term(0, T)
    c = evaluator.term(0, T)
    geometric4 = 4.0 ** -start * 4 / 3
    geometric2 = 2.0 ** -start * 2
    return math.fsum(explicit + [(a - c * (T - 1)) * geometric4, c * geometric2])


def markov_convexity_ratio(chain, f, metric):
    """
    Exact Markov 2-convexity functional of f along chain.

    lhs sums scales k' <= scale_cap; truncation_error_bound is the exact
    remainder over k' > scale_cap.
    """
    T = int(chain.horizon)
    D2 = f.squared_distances(metric, chain.n_states)
    evaluator = _ForkEvaluator(chain, D2)

    weights = fork_weights(T, int(chain.scale_cap))
    lhs = math.fsum(w * evaluator.term(sigma, n) for (sigma, n), w in sorted(weights.items()))
    tail = max(_tail(evaluator, T, int(chain.scale_cap)), 0.0)

    step = np.sum(chain.P * D2, axis=1)
    rhs = math.fsum(float(evaluator.laws[t - 1] @ step) for t in range(1, T + 1))

    report = ConvexityReport(lhs, rhs, tail, int(chain.scale_cap), T, chain.n_states)
    logger.info(
        f"markov convexity: n={chain.n_states} T={T} cap={chain.scale_cap} "
        f"pi2_lower={report.pi2_lower:.6f} tail={tail:.3e}"
    )
    return report


def _sample_steps(cumulative, states, rng):
    u = rng.random(len(states))
    nxt = np.sum(u[:, None] >= cumulative[states], axis=1)
    return np.minimum(nxt, cumulative.shape[1] - 1)


def markov_convexity_monte_carlo(chain, f, metric, samples=100000, seed=0, chunk=100000):
    """
    Monte Carlo estimate of (lhs, rhs) with the weights of the exact
    evaluator: one main trajectory per sample plus an independent fork from
    every time sigma in [0, T-1].
    """
    T = int(chain.horizon)
    D2 = f.squared_distances(metric, chain.n_states)
    weights = fork_weights(T, int(chain.scale_cap))
    by_sigma = {}
    for (sigma, n), w in weights.items():
        by_sigma.setdefault(sigma, {})[n] = w
    cumulative = np.cumsum(chain.P, axis=1)
    cumulative[:, -1] = 1.0
    rng = np.random.default_rng(seed)

    lhs_values, rhs_values = [], []
    remaining = samples
    while remaining > 0:
        size = min(chunk, remaining)
        remaining -= size
        path = np.empty((T + 1, size), dtype=np.int64)
        path[0] = rng.choice(chain.n_states, size=size, p=chain.initial)
        for t in range(1, T + 1):
            path[t] = _sample_steps(cumulative, path[t - 1], rng)
        rhs_values.append(np.sum(D2[path[:-1], path[1:]], axis=0))

        acc = np.zeros(size)
        for sigma in range(T):
            state = path[sigma].copy()
            for n in range(1, T - sigma + 1):
                state = _sample_steps(cumulative, state, rng)
                w = by_sigma.get(sigma, {}).get(n)
                if w:
                    acc += w * D2[path[sigma + n], state]
        lhs_values.append(acc)

    lhs_values = np.concatenate(lhs_values)
    rhs_values = np.concatenate(rhs_values)
    root = math.sqrt(samples)
    return MonteCarloEstimate(
        lhs=float(lhs_values.mean()), lhs_se=float(lhs_values.std(ddof=1) / root),
        rhs=float(rhs_values.mean()), rhs_se=float(rhs_values.std(ddof=1) / root),
        samples=samples,
    )


def _forward_walk(g, scale_margin, max_points):
    heights = source_distances(g)
    P = np.zeros((g.n, g.n))
    for w in range(g.n):
        if w == g.sink:
            P[w, w] = 1.0
            continue
        forward = [u for u in g.graph.neighbors(w) if heights[u] > heights[w]]
        P[w, forward] = 1.0 / len(forward)
    initial = np.zeros(g.n)
    initial[g.source] = 1.0
    T = int(heights[g.sink])
    chain = ChainSpec(P, initial, T, math.ceil(math.log2(T)) + scale_margin)
    return CanonicalChain(chain, PointMap.identity(g.n), g, shortest_path_metric(g, max_points))


def _check_chain_level(k):
    is_valid, error = validate_level(k, minimum=2)
    if not is_valid:
        raise UsageError(error)


def laakso_canonical_chain(k, scale_margin=DEFAULT_SCALE_MARGIN, budget_edges=DEFAULT_BUDGET_EDGES,
                           max_points=DEFAULT_MAX_POINTS):
    """Uniform forward walk on L_k from the source, sink absorbing, horizon 4^(k-1)."""
    _check_chain_level(k)
    return _forward_walk(laakso(k, budget_edges), scale_margin, max_points)


def diamond_canonical_chain(k, scale_margin=DEFAULT_SCALE_MARGIN, budget_edges=DEFAULT_BUDGET_EDGES,
                            max_points=DEFAULT_MAX_POINTS):
    """Uniform forward walk on D_k, horizon 2^(k-1)."""
    _check_chain_level(k)
    return _forward_walk(diamond_graph(k, budget_edges), scale_margin, max_points)


def pushforward(f, embedding, max_points=DEFAULT_MAX_POINTS):
    """
    Compose a PointMap with a coordinate embedding of the target points.

    Returns:
        tuple: (identity PointMap on the states, FiniteMetric of the images)
    """
    images = np.asarray(embedding.images)[f.images]
    composed = CoordinateEmbedding(embedding.target_norm, images, embedding.q, embedding.scale)
    return PointMap.identity(len(f.images)), metric_from_embedding(composed, max_points)


def height_map(g):
    """Source-distance map of g into the real line, as (PointMap, FiniteMetric)."""
    h = source_distances(g).astype(float)
    return PointMap.identity(g.n), FiniteMetric(np.abs(h[:, None] - h[None, :]))


def diamond_convexity_ratio(f, g, metric):
    """Anti-edge squared distances over edge squared distances."""
    if g.kind != 'diamond':
        raise UsageError(f"diamond convexity needs a diamond graph, got {g.kind}")
    D2 = f.squared_distances(metric, g.n)
    lhs = math.fsum(D2[a, b] for a, b in g.all_anti_edges())
    rhs = math.fsum(D2[u, v] for u, v in g.edges)
    return RatioReport(lhs, rhs)


def _check_q(q, low_inclusive=True):
    is_valid, error = validate_exponent(q, low=1.0, high=2.0, low_inclusive=low_inclusive, name='q')
    if not is_valid:
        raise InvalidExponent(error)
    return float(q)


def _hypercube_stack(f, k=None):
    """Images of {-1,1}^k in itertools.product order as an (2^k, m, m) array."""
    if callable(f):
        if k is None:
            raise UsageError("a callable hypercube map needs the dimension k")
        return np.stack([np.asarray(f(tuple(e)), dtype=float) for e in hypercube_points(k)])
    stack = np.asarray(f, dtype=float)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise DimensionMismatch(f"expected an array of square images, got shape {stack.shape}")
    size = stack.shape[0]
    if size & (size - 1):
        raise DimensionMismatch(f"hypercube map needs 2^k images, got {size}")
    return stack


def _cube_dim(stack):
    k = stack.shape[0].bit_length() - 1
    if k > HYPERCUBE_MAX_K:
        raise TooLarge(f"hypercube of dimension {k} exceeds the cap of {HYPERCUBE_MAX_K}")
    return k


def _antipodal_and_edge_norms(stack, q):
    k = _cube_dim(stack)
    index = np.arange(stack.shape[0])
    anti = schatten_norms(stack - stack[index ^ (stack.shape[0] - 1)], q)
    edges = np.stack([schatten_norms(stack - stack[index ^ (1 << (k - 1 - j))], q) for j in range(k)])
    return k, anti, edges


def enflo_type_check(q, f, k=None):
    """sum ||f(e) - f(-e)||_q^q <= sum_j sum_e ||f(e) - f(e^j)||_q^q, q in [1, 2]."""
    q = _check_q(q)
    stack = _hypercube_stack(f, k)
    _, anti, edges = _antipodal_and_edge_norms(stack, q)
    lhs = math.fsum(anti ** q)
    rhs = math.fsum((edges ** q).ravel())
    return InequalityCheck(lhs, rhs, within(lhs, rhs))


def _same_shapes(*matrices):
    matrices = [as_square(C) for C in matrices]
    if len({C.shape for C in matrices}) != 1:
        raise DimensionMismatch("operands have different shapes")
    return matrices


def roundness_check(q, C1, C2, C3, C4):
    """Diagonals^q <= sides^q for the quadrilateral C1 C2 C3 C4 in S_q."""
    q = _check_q(q)
    C1, C2, C3, C4 = _same_shapes(C1, C2, C3, C4)
    def norm(X):
        return schatten_norm(X, q) ** q

    rhs = math.fsum([norm(C1 - C2), norm(C2 - C3), norm(C3 - C4), norm(C4 - C1)])
    lhs = math.fsum([norm(C1 - C3), norm(C2 - C4)])
    return InequalityCheck(lhs, rhs, within(lhs, rhs))


def clarkson_check(q, A, B):
    """(||A+B||^q + ||A-B||^q)/2 <= ||A||^q + ||B||^q in S_q."""
    q = _check_q(q)
    A, B = _same_shapes(A, B)
    lhs = (schatten_norm(A + B, q) ** q + schatten_norm(A - B, q) ** q) / 2
    rhs = schatten_norm(A, q) ** q + schatten_norm(B, q) ** q
    return InequalityCheck(lhs, rhs, within(lhs, rhs))


def ball_convexity_check(q, x, y):
    """2||x||^2 + 2(q-1)||y||^2 <= ||x+y||^2 + ||x-y||^2 in S_q, q in (1, 2]."""
    q = _check_q(q, low_inclusive=False)
    x, y = _same_shapes(x, y)
    lhs = 2 * schatten_norm(x, q) ** 2 + 2 * (q - 1) * schatten_norm(y, q) ** 2
    rhs = schatten_norm(x + y, q) ** 2 + schatten_norm(x - y, q) ** 2
    return InequalityCheck(lhs, rhs, within(lhs, rhs))


def martingale_cotype_check(q, stages):
    """
    Martingale cotype 2 of S_q with constant 1/sqrt(q-1).

    stages[i] has shape (2^i, m, m): the values of M_i on the 2^i sign
    patterns of the first i signs; node j has children 2j and 2j+1.
    """
    q = _check_q(q, low_inclusive=False)
    stages = [np.asarray(S, dtype=float) for S in stages]
    if not stages:
        raise NotAMartingale("empty martingale")
    for i, S in enumerate(stages):
        if S.ndim != 3 or S.shape[0] != 2 ** i or S.shape[1:] != stages[0].shape[1:]:
            raise NotAMartingale(f"stage {i} must have shape (2^{i}, m, m), got {S.shape}")
    scale = 1.0 + max(float(np.max(np.abs(S))) for S in stages)
    increments = []
    for i in range(len(stages) - 1):
        parent, child = stages[i], stages[i + 1]
        averaged = (child[0::2] + child[1::2]) / 2
        gap = float(np.max(np.abs(averaged - parent)))
        if gap > MARTINGALE_TOL * scale:
            raise NotAMartingale(f"stage {i + 1} does not average to stage {i} (gap {gap:.3e})")
        increments.append(float(np.mean(schatten_norms(child - np.repeat(parent, 2, axis=0), q) ** 2)))
    lhs = math.fsum(increments)
    sup = max(float(np.mean(schatten_norms(S, q) ** 2)) for S in stages)
    bound = sup / (q - 1)
    return CotypeCheck(lhs, bound, lhs <= bound * (1 + 1e-6) + 1e-12)


def random_martingale(depth, m, rng):
    """Dyadic matrix martingale: every node splits into parent +/- a Gaussian increment."""
    stages = [rng.standard_normal((1, m, m))]
    for _ in range(depth):
        parent = stages[-1]
        increment = rng.standard_normal(parent.shape) * rng.uniform(0.1, 2.0)
        child = np.empty((2 * parent.shape[0], m, m))
        child[0::2] = parent + increment
        child[1::2] = parent - increment
        stages.append(child)
    return stages


def enflo_implied_alpha(p, q, k):
    """k^(1/p - 1/q): the distortion of {-1,1}^k in l_p forced by Enflo type q."""
    return k ** (1 / p - 1 / q)


def hypercube_lower_bound(f, p, q, k=None):
    """
    Distortion lower bound for f: ({-1,1}^k, l_p) -> S_q read off the
    Enflo-type inequality, next to the exhaustive actual distortion.

    implied = k^(1/p) (E_edge / E_anti)^(1/q), E being averages of q-th
    powers of image distances over edges and antipodal pairs.
    """
    is_valid, error = validate_exponent(p, low=1.0, low_inclusive=True)
    if not is_valid:
        raise InvalidExponent(error)
    q = _check_q(q)
    if not q > p:
        raise InvalidExponent(f"need q > p, got p={p}, q={q}")
    stack = _hypercube_stack(f, k)
    k, anti, edges = _antipodal_and_edge_norms(stack, q)
    if np.any(anti == 0) or np.any(edges == 0):
        raise CollapsedPair("hypercube map identifies two points")
    implied = k ** (1 / p) * (np.mean(edges ** q) / np.mean(anti ** q)) ** (1 / q)
    target = metric_from_embedding(CoordinateEmbedding('schatten', stack, q))
    actual = distortion_between(hypercube_metric(k, p), target).value
    return HypercubeBound(float(implied), enflo_implied_alpha(p, q, k), actual)


def _q_objective(dim):
    return lambda q: dim ** (1 - 1 / q) / math.sqrt(q - 1)


def optimize_q(dim):
    """
    Minimise dim^(1-1/q)/sqrt(q-1) over q in (1, 2].

    Returns:
        tuple: (q, value)
    """
    if dim < 2:
        raise UsageError(f"dimension must be >= 2, got {dim}")
    objective = _q_objective(dim)
    result = minimize_scalar(objective, bounds=(1 + 1e-9, 2.0), method='bounded', options={'xatol': 1e-10})
    q = float(result.x)
    if objective(2.0) < result.fun:
        q = 2.0
    return q, objective(q)


def sqrt_log_constant(dims=DEFAULT_DIMS, optimal=False):
    """
    Measured C with min_q dim^(1-1/q)/sqrt(q-1) <= C sqrt(log dim) on dims.

    By default q is instantiated at 1 + 1/log(dim) (clipped to 2); with
    optimal=True the numerical minimiser is used.
    """
    worst = 0.0
    for dim in dims:
        if optimal:
            _, value = optimize_q(dim)
        else:
            value = _q_objective(dim)(min(1 + 1 / math.log(dim), 2.0))
        worst = max(worst, value / math.sqrt(math.log(dim)))
    return worst


def impossibility_certificate(k, alpha, scale_margin=DEFAULT_SCALE_MARGIN, budget_edges=DEFAULT_BUDGET_EDGES,
                              max_points=DEFAULT_MAX_POINTS, dims=DEFAULT_DIMS):
    """
    Dimension lower bound for subspaces of S_1 receiving the l1 image of L_k.

    pi is the certified Markov 2-convexity lower bound of the image along the
    canonical chain; the bound reads dim X >= exp((pi/(C alpha))^2).
    """
    _check_chain_level(k)
    if not alpha >= 1:
        raise UsageError(f"alpha must be >= 1, got {alpha}")
    canonical = laakso_canonical_chain(k, scale_margin, budget_edges, max_points)
    f, metric = pushforward(canonical.f, l1_embed(canonical.graph), max_points)
    report = markov_convexity_ratio(canonical.chain, f, metric)
    certificate = ImpossibilityReport(
        k=k, alpha=float(alpha), n=canonical.graph.n, pi2_lower=report.pi2_lower,
        constant=sqrt_log_constant(dims), convexity=report,
    )
    logger.info(f"impossibility certificate k={k} alpha={alpha:g}: dim >= exp({certificate.log_dim_lower_bound:.6g})")
    return certificate
