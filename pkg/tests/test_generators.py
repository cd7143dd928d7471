import math

import networkx as nx
import numpy as np
import pytest

from mixlab.generators import (
    HostSpec,
    Seed,
    build_host,
    circulant_graph,
    complete_graph,
    cycle_graph,
    degeneracy,
    gen_gnp,
    gen_newman_watts,
    make_rng,
    parse_host_spec,
    path_graph,
    percolate,
    percolate_host,
    perturb,
    random_regular,
    second_eigenvalue,
    star_graph,
)
from mixlab.graph import Graph, is_connected, largest_component

from oracles import giant_fraction


def edge_set(G):
    return set(zip(G.eu.tolist(), G.ev.tolist()))


def test_seed_streams_are_independent_and_reproducible():
    a = make_rng(Seed(7, 0)).random(4)
    b = make_rng(Seed(7, 0)).random(4)
    c = make_rng(Seed(7, 1)).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        Seed(-1)


def test_gnp_extremes():
    assert gen_gnp(20, 0.0, 1).m == 0
    assert gen_gnp(20, 1.0, 1) == complete_graph(20)
    with pytest.raises(ValueError):
        gen_gnp(5, 1.5, 0)


def test_gnp_deterministic():
    assert gen_gnp(500, 0.01, Seed(3, 2)) == gen_gnp(500, 0.01, Seed(3, 2))
    assert gen_gnp(500, 0.01, 3) != gen_gnp(500, 0.01, 4)


def test_gnp_edge_count_within_4_sigma():
    n = 10_000
    p = 1.5 / n
    N = n * (n - 1) // 2
    G = gen_gnp(n, p, 11)
    assert abs(G.m - N * p) <= 4 * math.sqrt(N * p * (1 - p))


def test_gnp_pairs_are_uniform():
    # every pair of a small vertex set appears with frequency close to p
    n, p, reps = 6, 0.3, 4000
    counts = np.zeros((n, n))
    for s in range(reps):
        G = gen_gnp(n, p, Seed(99, s))
        counts[G.eu, G.ev] += 1
    freq = counts[np.triu_indices(n, 1)] / reps
    sd = math.sqrt(p * (1 - p) / reps)
    assert np.all(np.abs(freq - p) < 5 * sd)


def test_perturb_examples():
    assert perturb(Graph.empty(300), 2.0, 5) == gen_gnp(300, 2.0 / 300, 5)
    assert perturb(complete_graph(12), 1.0, 5) == complete_graph(12)
    G = perturb(path_graph(2**13), 1.0, 0)
    assert is_connected(G)
    assert edge_set(path_graph(2**13)) <= edge_set(G)


def test_newman_watts_examples():
    assert gen_newman_watts(8, 1, 0.0, 0) == cycle_graph(8)
    band = gen_newman_watts(50, 3, 0.0, 0)
    assert band.m == 150
    with pytest.raises(ValueError):
        gen_newman_watts(8, 4, 1.0, 0)


def test_newman_watts_edge_count_and_supergraph():
    n, k = 10_000, 2
    G = gen_newman_watts(n, k, 1.0, 21)
    band = circulant_graph(n, [1, 2])
    assert edge_set(band) <= edge_set(G)
    assert G.degrees.min() >= 2 * k
    rest = n * (n - 1) // 2 - 2 * n
    mean = 2 * n + rest / n
    sd = math.sqrt(rest * (1 / n) * (1 - 1 / n))
    assert abs(G.m - mean) <= 4 * sd


def test_percolate_examples():
    H = random_regular(200, 6, 4)
    assert percolate(H, 1.0, 0) == H
    assert percolate(H, 0.0, 0).m == 0
    assert edge_set(percolate(H, 0.5, 1)) <= edge_set(H)


def test_percolated_complete_host_giant():
    n = 100_000
    G = percolate_host(HostSpec("complete", n), 1.2 / n, 8)
    _, l1 = largest_component(G)
    assert abs(l1 / n - giant_fraction(1.2)) <= 0.02


def test_random_regular():
    G = random_regular(100, 5, 3)
    assert G.is_simple() and np.all(G.degrees == 5)
    assert random_regular(100, 5, 3) == G
    with pytest.raises(ValueError):
        random_regular(7, 3, 0)


def test_host_spec_parsing():
    assert build_host(parse_host_spec("complete:n=6")) == complete_graph(6)
    assert build_host(parse_host_spec("circulant:n=10,offsets=1;3")) == circulant_graph(10, [1, 3])
    G = build_host(parse_host_spec("random-regular:n=30,d=4"), 2)
    assert np.all(G.degrees == 4)
    for bad in ("torus:n=4", "complete:", "circulant:n=5", "random-regular:n=10"):
        with pytest.raises(ValueError):
            parse_host_spec(bad)


def test_host_spec_file(tmp_path):
    p = tmp_path / "h.txt"
    p.write_text("4 4\n0 1\n1 2\n2 3\n0 3\n")
    assert build_host(parse_host_spec(f"file:{p}")) == cycle_graph(4)


def test_degeneracy_examples():
    assert degeneracy(path_graph(10))[0] == 1
    assert degeneracy(complete_graph(5))[0] == 4
    assert degeneracy(cycle_graph(6))[0] == 2


def test_degeneracy_matches_core_number():
    for s in range(5):
        G = gen_gnp(120, 0.06, s)
        d, order = degeneracy(G)
        g = nx.Graph()
        g.add_nodes_from(range(G.n))
        g.add_edges_from(zip(G.eu.tolist(), G.ev.tolist()))
        assert d == max(nx.core_number(g).values())
        pos = {v: i for i, v in enumerate(order)}
        for v in range(G.n):
            earlier = sum(1 for w in g.neighbors(v) if pos[w] < pos[v])
            assert earlier <= d


def test_second_eigenvalue_examples():
    assert second_eigenvalue(complete_graph(4)) == pytest.approx(1.0, abs=1e-6)
    assert second_eigenvalue(cycle_graph(4)) == pytest.approx(2.0, abs=1e-6)
    two_triangles = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert second_eigenvalue(two_triangles) == pytest.approx(2.0, abs=1e-6)
    with pytest.raises(ValueError):
        second_eigenvalue(star_graph(3))


def test_second_eigenvalue_matches_dense_spectrum():
    G = random_regular(60, 4, 9)
    ev = np.linalg.eigvalsh(G.adjacency().toarray())
    assert second_eigenvalue(G) == pytest.approx(max(abs(ev[0]), abs(ev[-2])), abs=1e-5)
    assert second_eigenvalue(G) < 4
