import numpy as np
import pytest

from mixlab.fvtl import (
    ConvergenceError,
    fvtl_report,
    hp1_discrepancy,
    is_cut_vertex,
    lambda_u,
    low_hitting_mass,
    reduced_kernel,
    returns_RT,
    survival_from_stationary,
)
from mixlab.generators import complete_graph, cycle_graph, gen_gnp, path_graph, random_regular
from mixlab.graph import induced_subgraph, largest_component

from oracles import dense_kernel


def giant(n, p, seed):
    H = gen_gnp(n, p, seed)
    block, _ = largest_component(H)
    return induced_subgraph(H, block)[0]


def test_reduced_kernel_examples():
    assert reduced_kernel(complete_graph(2), 0).toarray().tolist() == [[0.5]]
    assert np.allclose(reduced_kernel(complete_graph(3), 0).toarray(), [[0.5, 0.25], [0.25, 0.5]])


def test_lambda_examples():
    assert lambda_u(complete_graph(2), 1).value == pytest.approx(0.5, abs=1e-12)
    assert lambda_u(complete_graph(3), 0).value == pytest.approx(0.75, abs=1e-9)
    r = lambda_u(path_graph(3), 1)
    assert r.value == pytest.approx(0.5, abs=1e-9) and r.reducible


def test_lambda_matches_eigen_oracle():
    for seed in range(5):
        G = giant(12, 0.35, seed)
        P = dense_kernel(G.n, G.edges().tolist())
        for u in (0, G.n - 1):
            Pu = np.delete(np.delete(P, u, 0), u, 1)
            ref = max(abs(np.linalg.eigvals(Pu)))
            assert lambda_u(G, u).value == pytest.approx(ref, abs=1e-9)


def test_survival_ratio_tends_to_lambda():
    G = giant(12, 0.3, 4)
    u = 0
    lam = lambda_u(G, u).value
    surv = survival_from_stationary(G, u, 400)
    assert surv[-1] / surv[-2] == pytest.approx(lam, abs=1e-8)


def test_cut_vertex_flag():
    assert is_cut_vertex(path_graph(5), 2)
    assert not is_cut_vertex(path_graph(5), 0)
    assert not is_cut_vertex(cycle_graph(5), 2)


def test_lambda_iteration_cap():
    with pytest.raises(ConvergenceError):
        lambda_u(cycle_graph(200), 0, tol=1e-14, max_iter=5)


def test_returns_examples():
    assert returns_RT(complete_graph(2), 0, 0) == 1
    assert returns_RT(complete_graph(2), 0, 2) == 2


def test_k2_negative_control():
    rep = fvtl_report(complete_graph(2), 0)
    assert rep.stat_hitting == 0.5
    assert rep.lambda_u == pytest.approx(0.5, abs=1e-12)


def test_report_fields():
    G = random_regular(60, 4, 2)
    rep = fvtl_report(G, 5, T=50)
    d = rep.to_dict()
    assert set(d["hp"]) == {"HP1", "HP2", "HP2_prime", "HP3"}
    assert d["hp"]["HP1"]["mode"] == "exact"
    assert d["hp"]["HP3"]["value"] == pytest.approx(60.0)
    assert 0 < rep.lambda_u < 1 and rep.grid_max >= 20
    assert not fvtl_report(G, 5, T=50, hp1=False).hp.get("HP1")


def test_hp1_exact_matches_dense_power():
    G = giant(15, 0.3, 1)
    P = dense_kernel(G.n, G.edges().tolist())
    pi = G.degrees / G.degrees.sum()
    ref = np.max(np.abs(np.linalg.matrix_power(P, 13) - pi))
    assert hp1_discrepancy(G, 13)["value"] == pytest.approx(ref, abs=1e-13)


def test_low_hitting_mass_examples():
    K2 = complete_graph(2)
    assert low_hitting_mass(K2, 0, 0) == 0.5
    assert low_hitting_mass(K2, 0, 2) == pytest.approx(7 / 8, abs=1e-15)
    assert low_hitting_mass(cycle_graph(10), 3, 0) == pytest.approx(0.1, abs=1e-15)


def test_low_hitting_mass_is_start_average():
    G = giant(14, 0.3, 6)
    u, t0 = 2, 9
    P = dense_kernel(G.n, G.edges().tolist())
    Q = P.copy()
    Q[u] = 0
    Q[u, u] = 1  # absorbing at u
    hit = np.linalg.matrix_power(Q, t0)[:, u]
    assert low_hitting_mass(G, u, t0) == pytest.approx(hit.mean(), abs=1e-12)
