"""
Diamond and Laakso graphs, their shortest-path metrics and explicit l1 embeddings.

D_1 = L_1 is a single edge. D_{k+1} replaces every edge of D_k by two
parallel paths of length 2; L_{k+1} subdivides every edge of L_k into a path
of length 4 and replaces its middle two edges by two parallel paths of
length 2. The midpoints of the two parallel paths form an anti-edge.

Vertex ids are assigned in order of creation while the edge list of the
previous level is walked front to back, so every construction is
reproducible.
"""
import itertools
import logging
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.spatial.distance import pdist, squareform

from errors import CollapsedPair, Disconnected, DimensionMismatch, TooLarge, UsageError
from io_utils import atomic_write, write_json
from spectral_core import schatten_norms
from validators import validate_exponent, validate_level

logger = logging.getLogger('geolab.graphs')

KINDS = ('diamond', 'laakso')
BRANCHING = {'diamond': 4, 'laakso': 6}
REFINEMENT = {'diamond': 2, 'laakso': 4}

DEFAULT_BUDGET_EDGES = 1000000
DEFAULT_MAX_POINTS = 5000
HYPERCUBE_MAX_K = 12


@dataclass(frozen=True)
class LevelGraph:
    """
    A generated diamond or Laakso graph.

    edges are oriented (tail nearer the source); anti_edges maps the level
    j >= 2 that created a pair to the pairs of that level; generators maps each
    anti-edge to the opposite diagonal of its quadrilateral.
    """
    kind: str
    level: int
    graph: nx.Graph
    source: int
    sink: int
    edges: tuple
    anti_edges: dict
    generators: dict
    provenance: tuple

    @property
    def n(self):
        return len(self.provenance)

    @property
    def vertices(self):
        return list(range(self.n))

    def all_anti_edges(self):
        return [pair for level in sorted(self.anti_edges) for pair in self.anti_edges[level]]


@dataclass(frozen=True)
class FiniteMetric:
    dist: np.ndarray
    labels: tuple = None

    def __post_init__(self):
        D = self.dist
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise DimensionMismatch(f"distance matrix must be square, got shape {D.shape}")
        if np.any(np.diag(D) != 0) or np.any(D < 0) or not np.array_equal(D, D.T):
            raise UsageError("distance matrix must be symmetric, nonnegative, with zero diagonal")

    @property
    def n(self):
        return self.dist.shape[0]

    def triangle_violation(self):
        """Largest d(x,z) - d(x,y) - d(y,z) over all triples (<= 0 for a metric)."""
        D = self.dist.astype(float)
        worst = -np.inf
        for y in range(self.n):
            worst = max(worst, float(np.max(D - D[:, y, None] - D[None, y, :])))
        return worst

    def satisfies_triangle(self, tol=1e-12):
        return self.triangle_violation() <= tol


@dataclass(frozen=True)
class CoordinateEmbedding:
    """
    Images of points 0..n-1: rows of an (n, d) array for 'l1', matrices of an
    (n, m, m) array for 'schatten' (with exponent q).
    """
    target_norm: str
    images: np.ndarray
    q: float = None
    scale: float = 1.0

    @property
    def n(self):
        return self.images.shape[0]

    def scaled(self, factor):
        return CoordinateEmbedding(self.target_norm, self.images, self.q, self.scale * factor)

    def to_json(self):
        return {str(v): np.asarray(self.images[v]).tolist() for v in range(self.n)}


@dataclass(frozen=True)
class DistortionResult:
    value: float
    argmax_expand: tuple
    argmax_contract: tuple
    expansion: float
    contraction: float

    def as_dict(self):
        return {
            'value': self.value,
            'argmax_expand': list(self.argmax_expand),
            'argmax_contract': list(self.argmax_contract),
            'expansion': self.expansion,
            'contraction': self.contraction,
        }


def _check_budget(kind, k, budget_edges):
    is_valid, error = validate_level(k)
    if not is_valid:
        raise UsageError(error)
    edges = BRANCHING[kind] ** (k - 1)
    if edges > budget_edges:
        raise TooLarge(f"{kind}({k}) has {edges} edges, over the budget of {budget_edges}")


def _construct(kind, k, track_cuts=False):
    """
    Run the recursion.

    Every edge carries the ground element its endpoints' cut sets differ by;
    refining a level multiplies the ground set by 2 (diamond) or 4 (Laakso).

    Returns:
        tuple: (edges, provenance, anti_edges, generators, cuts or None)
    """
    edges = [(0, 1)]
    atoms = [0]
    provenance = [1, 1]
    anti_edges, generators = {}, {}
    cuts = {0: set(), 1: {0}} if track_cuts else None
    factor = REFINEMENT[kind]

    for level in range(2, k + 1):
        if track_cuts:
            cuts = {v: {factor * w + i for w in S for i in range(factor)} for v, S in cuts.items()}
        new_edges, new_atoms, pairs = [], [], []
        for (u, v), w in zip(edges, atoms):
            nid = len(provenance)
            if kind == 'diamond':
                a, b = nid, nid + 1
                provenance.extend([level] * 2)
                new_edges.extend([(u, a), (a, v), (u, b), (b, v)])
                new_atoms.extend([2 * w, 2 * w + 1, 2 * w + 1, 2 * w])
                pairs.append((a, b))
                generators[(a, b)] = (u, v)
                if track_cuts:
                    cuts[a] = cuts[u] | {2 * w}
                    cuts[b] = cuts[u] | {2 * w + 1}
            else:
                x1, y, z, x3 = nid, nid + 1, nid + 2, nid + 3
                provenance.extend([level] * 4)
                new_edges.extend([(u, x1), (x1, y), (y, x3), (x1, z), (z, x3), (x3, v)])
                base = 4 * w
                new_atoms.extend([base, base + 1, base + 2, base + 2, base + 1, base + 3])
                pairs.append((y, z))
                generators[(y, z)] = (x1, x3)
                if track_cuts:
                    cuts[x1] = cuts[u] | {base}
                    cuts[y] = cuts[x1] | {base + 1}
                    cuts[z] = cuts[x1] | {base + 2}
                    cuts[x3] = cuts[x1] | {base + 1, base + 2}
        anti_edges[level] = pairs
        edges, atoms = new_edges, new_atoms
    return edges, provenance, anti_edges, generators, cuts


def _level_graph(kind, k, budget_edges):
    if kind not in KINDS:
        raise UsageError(f"unknown graph kind '{kind}'")
    _check_budget(kind, k, budget_edges)
    edges, provenance, anti_edges, generators, _ = _construct(kind, k)
    graph = nx.Graph()
    graph.add_nodes_from(range(len(provenance)))
    graph.add_edges_from(edges)
    logger.debug(f"{kind}({k}): {graph.number_of_nodes()} vertices, {graph.number_of_edges()} edges")
    return LevelGraph(
        kind=kind, level=k, graph=graph, source=0, sink=1, edges=tuple(edges),
        anti_edges=anti_edges, generators=generators, provenance=tuple(provenance),
    )


def diamond(k, budget_edges=DEFAULT_BUDGET_EDGES):
    """D_k: 4^(k-1) edges."""
    return _level_graph('diamond', k, budget_edges)


def laakso(k, budget_edges=DEFAULT_BUDGET_EDGES):
    """L_k: 6^(k-1) edges."""
    return _level_graph('laakso', k, budget_edges)


def is_series_parallel(g):
    """Two-terminal series/parallel reduction down to the single edge source-sink."""
    H = nx.MultiGraph(g.graph)
    terminals = {g.source, g.sink}
    changed = True
    while changed:
        changed = False
        for u, v in set(H.edges()):
            extra = H.number_of_edges(u, v) - 1
            for _ in range(extra):
                H.remove_edge(u, v)
                changed = True
        for w in list(H.nodes):
            if w in terminals or H.degree(w) != 2:
                continue
            ends = [x for _, x in H.edges(w)]
            if ends[0] == ends[1]:
                continue
            H.remove_node(w)
            H.add_edge(ends[0], ends[1])
            changed = True
    return H.number_of_nodes() == 2 and H.number_of_edges(g.source, g.sink) == 1


def shortest_path_metric(g, max_points=DEFAULT_MAX_POINTS):
    """All-pairs unit-weight BFS distances (integer matrix)."""
    if g.n > max_points:
        raise TooLarge(f"all-pairs metric on {g.n} points exceeds the cap of {max_points}")
    if not nx.is_connected(g.graph):
        raise Disconnected(f"{g.kind}({g.level}) is not connected")
    dist = np.zeros((g.n, g.n), dtype=np.int64)
    for u, lengths in nx.all_pairs_shortest_path_length(g.graph):
        for v, d in lengths.items():
            dist[u, v] = d
    return FiniteMetric(dist)


def source_distances(g):
    """BFS height of every vertex above the source."""
    lengths = nx.single_source_shortest_path_length(g.graph, g.source)
    return np.array([lengths[v] for v in range(g.n)], dtype=np.int64)


def l1_embed(g):
    """
    Cut embedding of a generated graph into l1.

    Vertex v maps to the indicator vector of a subset A_v of a ground set of
    size 2^(k-1) (diamond) or 4^(k-1) (Laakso). Adjacent vertices differ in
    exactly one element and the two parallel branches of every quadrilateral
    take complementary halves of the parent edge's element, so the map is
    1-Lipschitz and contracts distances by at most 2.
    """
    _, provenance, _, _, cuts = _construct(g.kind, g.level, track_cuts=True)
    ground = REFINEMENT[g.kind] ** (g.level - 1)
    images = np.zeros((len(provenance), ground), dtype=np.int64)
    for v, members in cuts.items():
        images[v, sorted(members)] = 1
    return CoordinateEmbedding('l1', images)


def metric_from_embedding(f, max_points=DEFAULT_MAX_POINTS):
    """FiniteMetric of the images of f (l1 or Schatten-q distances, times f.scale)."""
    if f.n > max_points:
        raise TooLarge(f"all-pairs metric on {f.n} points exceeds the cap of {max_points}")
    if f.target_norm == 'l1':
        flat = pdist(np.asarray(f.images, dtype=float).reshape(f.n, -1), 'cityblock')
    elif f.target_norm == 'schatten':
        i, j = np.triu_indices(f.n, 1)
        images = np.asarray(f.images, dtype=float)
        flat = np.concatenate([
            schatten_norms(images[i[s:s + 4096]] - images[j[s:s + 4096]], f.q)
            for s in range(0, len(i), 4096)
        ]) if len(i) else np.zeros(0)
    else:
        raise UsageError(f"unknown target norm '{f.target_norm}'")
    return FiniteMetric(squareform(flat * f.scale))


def distortion_between(source, target):
    """
    Distortion of the identity map source -> target on the same point set.

    value = max(d_t/d_s) * max(d_s/d_t) over all pairs, exact.
    """
    if source.n != target.n:
        raise DimensionMismatch(f"metrics on {source.n} and {target.n} points")
    if source.n < 2:
        return DistortionResult(1.0, (), (), 1.0, 1.0)
    i, j = np.triu_indices(source.n, 1)
    ds = source.dist[i, j].astype(float)
    dt = target.dist[i, j].astype(float)
    collapsed = np.flatnonzero(dt == 0)
    if collapsed.size:
        a, b = int(i[collapsed[0]]), int(j[collapsed[0]])
        raise CollapsedPair(f"points {a} and {b} have identical images")
    expand = dt / ds
    contract = ds / dt
    e, c = int(np.argmax(expand)), int(np.argmax(contract))
    return DistortionResult(
        value=float(expand[e] * contract[c]),
        argmax_expand=(int(i[e]), int(j[e])),
        argmax_contract=(int(i[c]), int(j[c])),
        expansion=float(expand[e]),
        contraction=float(contract[c]),
    )


def distortion(f, source_metric, max_points=DEFAULT_MAX_POINTS):
    """Distortion of the coordinate embedding f relative to source_metric."""
    if f.n != source_metric.n:
        raise DimensionMismatch(f"embedding has {f.n} images for {source_metric.n} points")
    return distortion_between(source_metric, metric_from_embedding(f, max_points))


def hypercube_points(k):
    """{-1,1}^k in itertools.product order."""
    return np.array(list(itertools.product((-1, 1), repeat=k)), dtype=np.int64)


def hypercube_metric(k, p):
    """||e - e'||_p = 2 * Hamming^(1/p) on {-1,1}^k."""
    is_valid, error = validate_level(k)
    if not is_valid:
        raise UsageError(error)
    if k > HYPERCUBE_MAX_K:
        raise TooLarge(f"hypercube of dimension {k} exceeds the cap of {HYPERCUBE_MAX_K}")
    is_valid, error = validate_exponent(p, high=math.inf, high_inclusive=False)
    if not is_valid:
        raise UsageError(error)
    points = hypercube_points(k)
    hamming = squareform(pdist(points, 'hamming')) * k
    labels = tuple(tuple(int(x) for x in row) for row in points)
    return FiniteMetric(2.0 * np.rint(hamming) ** (1.0 / float(p)), labels)


def write_edge_list(path, g):
    """Header '# kind k |V| |E|' then one 'u v' line per edge."""
    with atomic_write(path) as fh:
        fh.write(f"# {g.kind} {g.level} {g.n} {len(g.edges)}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def write_embedding(path, f):
    write_json(path, f.to_json())
