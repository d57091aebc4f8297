"""Chimera hardware graphs and heuristic minor embedding.

Qubits use the linear chimera labelling ``((r*cols + c)*2 + side)*shore + k``:
side 0 qubits couple to the cell above/below, side 1 qubits to the cell
left/right, and each cell is a complete bipartite ``K_{shore,shore}``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Mapping, NamedTuple

import dwave_networkx as dnx
import networkx as nx
import numpy as np
from scipy.sparse import csr_array
from scipy.sparse.csgraph import dijkstra

from qubo_approx.config import get_settings
from qubo_approx.errors import DimensionError, InstanceError
from qubo_approx.problems import ProblemKind, get_problem
from qubo_approx.problems._base import content_lines
from qubo_approx.problems._graphs import parse_edge_list
from qubo_approx.pruning import PruneStrategy
from qubo_approx.qubo import QuboMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChimeraGraph:
    rows: int
    cols: int
    shore: int
    graph: nx.Graph = field(compare=False, repr=False)

    @property
    def n_qubits(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def n_couplers(self) -> int:
        return self.graph.number_of_edges()

    @property
    def max_degree(self) -> int:
        return max((d for _, d in self.graph.degree), default=0)

    @cached_property
    def adjacency(self) -> csr_array:
        return csr_array(nx.to_scipy_sparse_array(self.graph, nodelist=range(self.n_qubits), format="csr"))

    @property
    def label(self) -> str:
        return f"{self.rows}x{self.cols}x{self.shore}"


class EmbeddingMetrics(NamedTuple):
    physical_qubits: int
    max_chain: int
    mean_chain: float


class EmbeddingCheck(NamedTuple):
    ok: bool
    violation: str | None = None


@dataclass(frozen=True)
class Embedding:
    chains: Mapping[int, frozenset[int]]

    def metrics(self) -> EmbeddingMetrics:
        sizes = [len(c) for c in self.chains.values()]
        if not sizes:
            return EmbeddingMetrics(0, 0, 0.0)
        return EmbeddingMetrics(sum(sizes), max(sizes), sum(sizes) / len(sizes))

    def dumps(self) -> str:
        lines = [f"{v}: {','.join(str(x) for x in sorted(c))}" for v, c in sorted(self.chains.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> Embedding:
        chains: dict[int, frozenset[int]] = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, sep, tail = line.partition(":")
            try:
                if not sep:
                    raise ValueError("missing ':'")
                chains[int(head)] = frozenset(int(x) for x in tail.replace(",", " ").split())
            except ValueError as e:
                raise InstanceError(f"Bad embedding line {line!r}: {e}") from e
        return cls(chains)


# ---------------------------
# Graphs
# ---------------------------
def chimera(rows: int, cols: int, shore: int = 4) -> ChimeraGraph:
    if min(int(rows), int(cols), int(shore)) < 1:
        raise DimensionError(f"Chimera dimensions must be >= 1, got {rows}x{cols}x{shore}")
    g = dnx.chimera_graph(int(rows), int(cols), int(shore))
    return ChimeraGraph(int(rows), int(cols), int(shore), g)


def connectivity_graph(q: QuboMatrix) -> nx.Graph:
    """Node per variable, edge per non-zero off-diagonal entry."""
    g = nx.Graph()
    g.add_nodes_from(range(q.n))
    g.add_edges_from(q.offdiagonal_keys())
    return g


def load_logical_graph(path: str | Path) -> nx.Graph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceError(f"Cannot read graph file {path}: {e}") from e
    return parse_edge_list(content_lines(text))


# ---------------------------
# Verification
# ---------------------------
def verify_embedding(e: Embedding, gp: nx.Graph, gc: ChimeraGraph) -> EmbeddingCheck:
    owner: dict[int, int] = {}
    for v in sorted(gp.nodes):
        chain = e.chains.get(v)
        if not chain:
            return EmbeddingCheck(False, f"missing chain for logical node {v}")
        for qubit in sorted(chain):
            if qubit not in gc.graph:
                return EmbeddingCheck(False, f"unknown qubit {qubit} in chain {v}")
            if qubit in owner:
                return EmbeddingCheck(False, f"overlap: qubit {qubit} in chains {owner[qubit]} and {v}")
            owner[qubit] = v
        if not nx.is_connected(gc.graph.subgraph(chain)):
            return EmbeddingCheck(False, f"disconnected chain for logical node {v}")
    for u, v in sorted(gp.edges):
        cu, cv = e.chains[u], e.chains[v]
        if not any(nb in cv for qubit in cu for nb in gc.graph[qubit]):
            return EmbeddingCheck(False, f"uncovered edge ({u}, {v})")
    return EmbeddingCheck(True)


# ---------------------------
# Heuristic search
# ---------------------------
def _route(gc: ChimeraGraph, free: np.ndarray, chain: frozenset[int]) -> tuple[np.ndarray, np.ndarray]:
    """Hop distances and predecessors from ``chain`` to every qubit, travelling over free qubits only."""
    allowed = free.copy()
    allowed[list(chain)] = True
    idx = np.flatnonzero(allowed)
    sub = gc.adjacency[idx][:, idx]
    sources = np.searchsorted(idx, sorted(chain))
    dist_sub, pred_sub, _ = dijkstra(sub, unweighted=True, indices=sources, min_only=True, return_predecessors=True)
    dist = np.full(gc.n_qubits, np.inf)
    pred = np.full(gc.n_qubits, -1, dtype=np.int64)
    dist[idx] = dist_sub
    pred[idx] = np.where(pred_sub >= 0, idx[np.maximum(pred_sub, 0)], -1)
    dist[~free] = np.inf
    return dist, pred


def _place(
    gp: nx.Graph, gc: ChimeraGraph, rng: np.random.Generator
) -> dict[int, frozenset[int]] | None:
    free = np.ones(gc.n_qubits, dtype=bool)
    chains: dict[int, frozenset[int]] = {}
    priority = {v: float(p) for v, p in zip(sorted(gp.nodes), rng.random(gp.number_of_nodes()))}
    pending = set(gp.nodes)

    while pending:
        # most placed neighbours first keeps each component growing from one seed
        u = max(pending, key=lambda v: (sum(1 for w in gp[v] if w in chains), priority[v]))
        pending.discard(u)
        placed = [w for w in gp[u] if w in chains]
        if not free.any():
            return None
        if not placed:
            root = int(rng.choice(np.flatnonzero(free)))
            chains[u] = frozenset((root,))
            free[root] = False
            continue

        routes = [_route(gc, free, chains[w]) for w in placed]
        cost = np.sum([d for d, _ in routes], axis=0)
        if not np.isfinite(cost).any():
            return None
        best = np.flatnonzero(cost == cost.min())
        root = int(rng.choice(best))

        chain = {root}
        for _, pred in routes:
            node = root
            # walk back until the next hop is in the neighbour's chain
            while pred[node] >= 0 and free[pred[node]]:
                node = int(pred[node])
                chain.add(node)
        chains[u] = frozenset(chain)
        free[list(chain)] = False
    return chains


def find_embedding(
    gp: nx.Graph, gc: ChimeraGraph, seed: int = 0, attempts: int | None = None
) -> Embedding | None:
    """Greedy chain routing with randomised restarts; ``None`` when every attempt fails."""
    attempts = get_settings().embed_attempts if attempts is None else int(attempts)
    if gp.number_of_nodes() > gc.n_qubits:
        logger.debug("%d logical nodes cannot fit %d qubits", gp.number_of_nodes(), gc.n_qubits)
        return None
    for attempt in range(attempts):
        chains = _place(gp, gc, np.random.default_rng([int(seed), attempt]))
        if chains is None:
            continue
        emb = Embedding(chains)
        check = verify_embedding(emb, gp, gc)
        if check.ok:
            logger.debug("Embedded %d nodes on attempt %d: %s", gp.number_of_nodes(), attempt, emb.metrics())
            return emb
        logger.debug("Attempt %d produced an invalid embedding: %s", attempt, check.violation)
    return None


def embed_qubo(
    q: QuboMatrix, gc: ChimeraGraph, seed: int = 0, attempts: int | None = None
) -> tuple[Embedding | None, EmbeddingMetrics | None]:
    emb = find_embedding(connectivity_graph(q), gc, seed, attempts)
    return emb, (emb.metrics() if emb is not None else None)


# ---------------------------
# Largest embeddable instance
# ---------------------------
@dataclass(frozen=True)
class InstanceFamily:
    """Seeded generator of instances of one problem kind, indexed by size."""

    kind: ProblemKind
    seed: int = 0

    def n_variables(self, size: int) -> int:
        return get_problem(self.kind).n_variables(size)

    def qubo(self, size: int, strategy: PruneStrategy, p: float) -> QuboMatrix:
        _, q = get_problem(self.kind).generate(size, self.seed)
        return strategy.apply(q, p)


def _embeds(
    family: InstanceFamily, size: int, strategy: PruneStrategy, p: float, gc: ChimeraGraph, seed: int, attempts: int
) -> bool:
    if family.n_variables(size) > gc.n_qubits:
        return False
    emb, _ = embed_qubo(family.qubo(size, strategy, p), gc, seed, attempts)
    return emb is not None


@lru_cache(maxsize=4096)
def _largest_embeddable(
    family: InstanceFamily, strategy: PruneStrategy, p: float, gc: ChimeraGraph, seed: int, attempts: int
) -> int:
    if not _embeds(family, 1, strategy, p, gc, seed, attempts):
        return 0
    lo, hi = 1, 2
    while _embeds(family, hi, strategy, p, gc, seed, attempts):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _embeds(family, mid, strategy, p, gc, seed, attempts):
            lo = mid
        else:
            hi = mid
    logger.info("%s at p=%.2f (%s): largest embeddable size %d on %s", family.kind.value, p, strategy.label, lo, gc.label)
    return lo


def largest_embeddable(
    family: InstanceFamily,
    strategy: PruneStrategy,
    p: float,
    gc: ChimeraGraph,
    seed: int = 0,
    attempts: int | None = None,
) -> int:
    """Largest size whose p-pruned QUBO embeds: doubling search, then bisection.

    Results are memoised per (family, strategy, p, chimera shape, seed, attempts), so
    repeated schedules over the same family only search once.
    """
    attempts = get_settings().embed_attempts if attempts is None else int(attempts)
    return _largest_embeddable(family, strategy, float(p), gc, int(seed), attempts)


def max_embeddable_size(
    family: InstanceFamily,
    strategy: PruneStrategy,
    p: float,
    gc: ChimeraGraph,
    seed: int = 0,
    attempts: int | None = None,
    baseline: int | None = None,
) -> tuple[int, float]:
    """(size, size / unpruned size); ``baseline`` reuses an already measured p=0 size."""
    size = largest_embeddable(family, strategy, p, gc, seed, attempts)
    if p == 0:
        return size, 1.0 if size else math.nan
    base = largest_embeddable(family, strategy, 0.0, gc, seed, attempts) if baseline is None else baseline
    return size, (size / base if base else math.nan)
