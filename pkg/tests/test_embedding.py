from __future__ import annotations

import statistics

import networkx as nx
import pytest

from qubo_approx.embedding import (
    Embedding,
    EmbeddingMetrics,
    InstanceFamily,
    _largest_embeddable,
    chimera,
    connectivity_graph,
    embed_qubo,
    find_embedding,
    largest_embeddable,
    load_logical_graph,
    max_embeddable_size,
    verify_embedding,
)
from qubo_approx.errors import DimensionError, InstanceError
from qubo_approx.problems import ProblemKind, build_max_cut, generate_instance
from qubo_approx.pruning import PruneKind, PruneStrategy
from qubo_approx.qubo import ConstraintTag, new_qubo

FRACTION = PruneStrategy(PruneKind.FRACTION)


@pytest.fixture(scope="module")
def cell():
    return chimera(1, 1, 4)


@pytest.fixture(scope="module")
def small_chimera():
    return chimera(2, 2, 4)


# ---------------------------
# Hardware graphs
# ---------------------------
@pytest.mark.parametrize(
    ("shape", "qubits", "couplers"),
    [((1, 1, 4), 8, 16), ((2, 1, 4), 16, 36), ((16, 16, 4), 2048, 6016)],
)
def test_chimera_sizes(shape, qubits, couplers):
    gc = chimera(*shape)
    assert gc.n_qubits == qubits
    assert gc.n_couplers == couplers
    assert gc.label == "x".join(str(s) for s in shape)


def test_chimera_degree_bound():
    assert chimera(16, 16, 4).max_degree == 6


def test_chimera_rejects_empty_shapes():
    with pytest.raises(DimensionError):
        chimera(0, 1, 4)


def test_connectivity_graph():
    assert connectivity_graph(new_qubo(5)).number_of_edges() == 0
    _, q = build_max_cut([(0, 1), (1, 2), (0, 2)])
    g = connectivity_graph(q)
    assert set(g.nodes) == {0, 1, 2}
    assert {tuple(sorted(e)) for e in g.edges} == {(0, 1), (1, 2), (0, 2)}


def test_connectivity_edges_shrink_with_pruning():
    _, q = generate_instance(ProblemKind.EXACT_COVER, 10, seed=2)
    edges = [connectivity_graph(FRACTION.apply(q, p)).number_of_edges() for p in (0.0, 0.25, 0.5, 0.75, 1.0)]
    assert edges == sorted(edges, reverse=True)
    assert edges[-1] == 0


def test_load_logical_graph(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("nodes 4\n0 1\n1 2\n", encoding="utf-8")
    g = load_logical_graph(path)
    assert g.number_of_nodes() == 4 and g.number_of_edges() == 2
    with pytest.raises(InstanceError):
        load_logical_graph(tmp_path / "missing.txt")


# ---------------------------
# Verification
# ---------------------------
def test_verify_accepts_a_direct_embedding(cell):
    gp = nx.Graph([(0, 1)])
    assert verify_embedding(Embedding({0: frozenset({0}), 1: frozenset({4})}), gp, cell).ok


@pytest.mark.parametrize(
    ("chains", "violation"),
    [
        ({0: {0}}, "missing chain"),
        ({0: {99}, 1: {4}}, "unknown qubit"),
        ({0: {0}, 1: {0}}, "overlap"),
        ({0: {0, 1}, 1: {4}}, "disconnected chain"),
        ({0: {0}, 1: {1}}, "uncovered edge"),
    ],
)
def test_verify_reports_each_violation(cell, chains, violation):
    gp = nx.Graph([(0, 1)])
    check = verify_embedding(Embedding({v: frozenset(c) for v, c in chains.items()}), gp, cell)
    assert not check.ok
    assert check.violation.startswith(violation)


def test_embedding_text_round_trip():
    emb = Embedding({0: frozenset({3, 1}), 2: frozenset({7})})
    assert Embedding.loads(emb.dumps()) == emb
    with pytest.raises(InstanceError):
        Embedding.loads("0 1 2\n")


# ---------------------------
# Heuristic search
# ---------------------------
def test_complete_bipartite_fills_one_cell(cell):
    emb = find_embedding(nx.complete_bipartite_graph(4, 4), cell, seed=0)
    assert emb is not None
    assert emb.metrics() == EmbeddingMetrics(8, 1, 1.0)


def test_triangle_needs_a_chain(cell):
    gp = nx.complete_graph(3)
    emb = find_embedding(gp, cell, seed=1)
    assert emb is not None
    assert verify_embedding(emb, gp, cell).ok
    assert emb.metrics().physical_qubits == 4
    assert emb.metrics().max_chain == 2


def test_too_many_nodes_is_not_embeddable(cell):
    assert find_embedding(nx.complete_graph(9), cell) is None


@pytest.mark.parametrize("n", [1, 5, 32])
def test_edgeless_graph_uses_one_qubit_per_node(small_chimera, n):
    gp = nx.empty_graph(n)
    emb = find_embedding(gp, small_chimera, seed=n)
    assert emb is not None
    assert emb.metrics() == EmbeddingMetrics(n, 1, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_found_embeddings_always_verify(small_chimera, seed):
    gp = nx.gnp_random_graph(10, 0.4, seed=seed)
    emb = find_embedding(gp, small_chimera, seed=seed, attempts=5)
    if emb is not None:
        assert verify_embedding(emb, gp, small_chimera).ok


def test_same_seed_same_embedding(small_chimera):
    gp = nx.cycle_graph(8)
    assert find_embedding(gp, small_chimera, seed=4) == find_embedding(gp, small_chimera, seed=4)


def test_embed_qubo_reports_metrics(small_chimera):
    _, q = build_max_cut([(0, 1), (1, 2), (2, 3), (3, 0)])
    emb, metrics = embed_qubo(q, small_chimera, seed=0)
    assert emb is not None
    assert metrics == emb.metrics()
    assert metrics.physical_qubits >= 4


def test_embed_qubo_failure_returns_nothing(cell):
    q = new_qubo(9)
    q.set_entry(0, 1, 1, ConstraintTag.SOFT)
    assert embed_qubo(q, cell) == (None, None)


# ---------------------------
# Largest embeddable instance
# ---------------------------
def test_fully_pruned_family_fills_the_hardware(small_chimera):
    family = InstanceFamily(ProblemKind.EXACT_COVER, seed=0)
    assert largest_embeddable(family, FRACTION, 1.0, small_chimera, attempts=2) == 32
    assert max_embeddable_size(family, FRACTION, 1.0, small_chimera, attempts=2, baseline=8) == (32, 4.0)


def test_unpruned_size_ratio_is_one(small_chimera):
    family = InstanceFamily(ProblemKind.MAX_CUT, seed=1)
    size, ratio = max_embeddable_size(family, FRACTION, 0.0, small_chimera, attempts=2)
    assert size >= 1
    assert ratio == 1.0


def test_largest_embeddable_is_memoised(small_chimera):
    family = InstanceFamily(ProblemKind.NUMBER_PARTITIONING, seed=2)
    first = largest_embeddable(family, FRACTION, 0.5, small_chimera, attempts=2)
    hits = _largest_embeddable.cache_info().hits
    assert largest_embeddable(family, FRACTION, 0.5, chimera(2, 2, 4), attempts=2) == first
    assert _largest_embeddable.cache_info().hits == hits + 1


def test_oversized_variables_never_embed(cell):
    # AGAP size 3 already needs 9 variables
    family = InstanceFamily(ProblemKind.AGAP, seed=0)
    assert largest_embeddable(family, FRACTION, 1.0, cell, attempts=1) == 2


@pytest.mark.slow
def test_pruning_shrinks_the_physical_footprint():
    gc = chimera(4, 4, 4)
    _, q = generate_instance(ProblemKind.EXACT_COVER, 8, seed=3)
    footprint = {}
    for p in (0.0, 0.8, 1.0):
        pruned = FRACTION.apply(q, p)
        sizes = []
        for seed in range(10):
            _, metrics = embed_qubo(pruned, gc, seed=seed, attempts=3)
            assert metrics is not None
            sizes.append(metrics.physical_qubits)
        footprint[p] = statistics.median(sizes)
    assert footprint[1.0] == 8
    assert footprint[0.8] <= 1.05 * footprint[0.0]
    assert footprint[1.0] <= footprint[0.8]


@pytest.mark.slow
@pytest.mark.parametrize("strategy", [FRACTION, PruneStrategy(PruneKind.RANDOM, 5)])
def test_max_cut_footprint_does_not_grow_with_pruning(strategy):
    gc = chimera(4, 4, 4)
    _, q = generate_instance(ProblemKind.MAX_CUT, 10, seed=3)
    medians = []
    for p in (0.0, 0.5, 1.0):
        pruned = strategy.apply(q, p)
        sizes = []
        for seed in range(10):
            _, metrics = embed_qubo(pruned, gc, seed=seed, attempts=3)
            assert metrics is not None
            sizes.append(metrics.physical_qubits)
        medians.append(statistics.median(sizes))
    assert medians[-1] == 10
    assert all(later <= 1.05 * earlier for earlier, later in zip(medians, medians[1:]))
