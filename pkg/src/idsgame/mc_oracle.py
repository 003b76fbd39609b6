"""Monte-Carlo cascade estimates on configuration-model graphs.

Randomness comes from numpy's PCG64 bit generator. Trial ``i`` of a run
with seed ``s`` uses ``SeedSequence(s).spawn(trials)[i]``, so results do
not depend on the order in which trials execute.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from .exposure import SocialState
from .model import DegreeDistribution, InvalidParameters, ModelParams


@dataclass(frozen=True)
class SimConfig:
    n: int
    trials: int
    cascade_fraction: float = 0.01
    seed: int = 0
    erase_multi_edges: bool = False

    def __post_init__(self):
        if self.n < 2 or self.trials < 1:
            raise InvalidParameters("need n >= 2 and trials >= 1")
        if not 0.0 < self.cascade_fraction < 1.0:
            raise InvalidParameters("cascade_fraction must lie in (0, 1)")

    def check(self, dist: DegreeDistribution):
        if self.n < dist.d_max + 1:
            raise InvalidParameters(f"n must be at least d_max + 1 = {dist.d_max + 1}")


@dataclass
class Graph:
    """Undirected multigraph stored as an edge list plus CSR adjacency.

    A self-loop appears twice in its node's adjacency list, so row lengths
    equal node degrees.
    """

    degrees: np.ndarray
    edges: np.ndarray  # (E, 2)

    @property
    def n(self) -> int:
        return self.degrees.size

    def csr(self):
        u, v = self.edges[:, 0], self.edges[:, 1]
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        return indptr, dst[order], order

    def neighbors(self, i: int) -> np.ndarray:
        indptr, indices, _ = self.csr()
        return indices[indptr[i]:indptr[i + 1]]


def sample_configuration_graph(dist: DegreeDistribution, n: int, rng: np.random.Generator,
                               erase_multi_edges: bool = False) -> Graph:
    """Random multigraph with i.i.d. degrees drawn from ``dist.f``.

    An odd stub total is fixed by redrawing one random node's degree until
    the total is even; stubs are then paired uniformly at random.
    """
    if n < 2:
        raise InvalidParameters("need n >= 2")
    f = dist.f
    degrees = rng.choice(np.arange(1, dist.d_max + 1), size=n, p=f)
    odd_fix = degrees.sum() % 2 == 1
    if odd_fix and not np.any(dist.degrees[f > 0] % 2 == 1):
        raise InvalidParameters("cannot reach an even stub total")  # pragma: no cover
    if odd_fix:
        i = rng.integers(n)
        while degrees.sum() % 2 == 1:
            degrees[i] = rng.choice(np.arange(1, dist.d_max + 1), p=f)
    stubs = np.repeat(np.arange(n), degrees)
    rng.shuffle(stubs)
    edges = stubs.reshape(-1, 2)
    if erase_multi_edges:
        edges = edges[edges[:, 0] != edges[:, 1]]
        edges = np.unique(np.sort(edges, axis=1), axis=0)
        degrees = np.bincount(edges.ravel(), minlength=n)
    return Graph(degrees, edges)


def _assign(graph: Graph, state: SocialState, params: ModelParams, rng):
    """Protection and vulnerability per node."""
    g_p = state.shares()[:, 0]
    deg_idx = np.clip(graph.degrees, 1, state.dist.d_max) - 1
    protected = rng.random(graph.n) < g_p[deg_idx]
    p_inf = np.where(protected, params.p_p, params.p_u)
    vulnerable = rng.random(graph.n) < p_inf
    return protected, vulnerable


def _spread(graph: Graph, attacks: np.ndarray, vulnerable: np.ndarray, seed: int) -> int:
    """Size of the infected set grown from ``seed``.

    ``attacks`` flags each directed edge (CSR order) whose tail would attack
    its head once infected. Every node is infected at most once, so each
    directed edge is tried at most once and the breadth-first search over
    edges that attack a vulnerable head reproduces the spreading process.
    """
    indptr, indices, _ = graph.csr()
    keep = attacks & vulnerable[indices]
    rows = np.repeat(np.arange(graph.n), np.diff(indptr))
    adj = csr_matrix(
        (np.ones(int(keep.sum()), dtype=np.int8), (rows[keep], indices[keep])),
        shape=(graph.n, graph.n),
    )
    reached = breadth_first_order(adj, seed, directed=True, return_predecessors=False)
    return int(reached.size)


def _spread_reference(graph: Graph, attacks, vulnerable, seed: int) -> int:
    """Plain queue-based version of :func:`_spread`, kept for cross-checks."""
    indptr, indices, _ = graph.csr()
    infected = np.zeros(graph.n, bool)
    infected[seed] = True
    queue = deque([seed])
    while queue:
        u = queue.popleft()
        for j in range(indptr[u], indptr[u + 1]):
            v = indices[j]
            if attacks[j] and vulnerable[v] and not infected[v]:
                infected[v] = True
                queue.append(v)
    return int(infected.sum())


def assign_and_simulate(graph: Graph, state: SocialState, params: ModelParams,
                        rng: np.random.Generator) -> int:
    """Infect a random node and let indirect attacks spread without a hop
    limit; return the number of infected nodes."""
    _, vulnerable = _assign(graph, state, params, rng)
    seed = int(rng.integers(graph.n))
    n_directed = 2 * graph.edges.shape[0]
    attacks = rng.random(n_directed) < params.beta_ia
    return _spread(graph, attacks, vulnerable, seed)


@dataclass
class McEstimate:
    estimate: float
    stderr: float
    hits: int
    trials: int
    sizes: np.ndarray


def empirical_cascade_probability(params: ModelParams, state: SocialState,
                                  config: SimConfig) -> McEstimate:
    """Fraction of trials whose outbreak reaches ``cascade_fraction * n``,
    with a fresh graph per trial."""
    config.check(state.dist)
    threshold = config.cascade_fraction * config.n
    children = np.random.SeedSequence(config.seed).spawn(config.trials)
    sizes = np.empty(config.trials, dtype=np.int64)
    for i, ss in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(ss))
        graph = sample_configuration_graph(state.dist, config.n, rng, config.erase_multi_edges)
        sizes[i] = assign_and_simulate(graph, state, params, rng)
    hits = int(np.count_nonzero(sizes >= threshold))
    p = hits / config.trials
    se = math.sqrt(p * (1.0 - p) / config.trials)
    return McEstimate(p, se, hits, config.trials, sizes)
