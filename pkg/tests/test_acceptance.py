"""Acceptance gate: one PASS/FAIL line per criterion, with pinned tolerances.

Every random choice uses a fixed seed chosen before the run.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from mixlab.cli import main
from mixlab.conductance import conductance_details, conductance_profile, enumerate_connected_sets
from mixlab.contraction import (
    contract_components,
    contract_to_vertex,
    coupling_survival_check,
    stationary_tv,
)
from mixlab.fvtl import fvtl_report, is_cut_vertex, lambda_u
from mixlab.generators import Seed, complete_graph, cycle_graph, gen_gnp, make_rng, path_graph, perturb
from mixlab.graph import Graph, MultiGraph, induced_subgraph, largest_component
from mixlab.spreader import SpreaderParams, bad_implies_thin_or_loaded, bad_set_union
from mixlab.walk import (
    LazyKernel,
    avg_mixing_time,
    ball_growth_lower_bound,
    hitting_survival,
    mixing_time,
    mixing_times_spectral,
    simulate_walks,
    stationary,
    step,
    tv_curves,
)

from oracles import connected_corpus, giant_fraction, powerset_connected

pytestmark = pytest.mark.acceptance


def giant_of(G):
    block, order = largest_component(G)
    return induced_subgraph(G, block)[0], order


# -- 1 ------------------------------------------------------------------------


def test_criterion_1_exact_oracles(verdict):
    t0 = time.perf_counter()
    corpus = connected_corpus(n_max=7)
    enum_bad = lemma_bad = lemma_checked = 0
    formula_gap = 0.0
    coupling_gap = 0.0
    for n, edges in corpus:
        G = Graph.from_edges(n, edges)
        sets = powerset_connected(n, edges)
        got = list(enumerate_connected_sets(G, 1, n))
        enum_bad += len(got) != len(set(got)) or set(got) != sets
        for S in sets:
            if len(S) < n:
                info = conductance_details(G, S)
                formula_gap = max(formula_gap, abs(info["phi"] - info["phi_via_q"]))
            for a in (Fraction(1, 10), Fraction(1, 2), Fraction(1)):
                r = bad_implies_thin_or_loaded(G, S, a)
                if r["precondition"]:
                    lemma_checked += 1
                    lemma_bad += not r["holds"]
        for r in range(1, n):
            for U in itertools.combinations(range(n), r):
                coupling_gap = max(coupling_gap, coupling_survival_check(G, U, 40))
    dt = time.perf_counter() - t0
    ok = (enum_bad == 0 and formula_gap <= 1e-12 and lemma_bad == 0
          and coupling_gap <= 1e-10 and dt <= 900)
    verdict("criterion 1 (exact oracles, all connected graphs n<=7)", ok,
            f"{len(corpus)} graphs; enumeration mismatches {enum_bad} (need 0); "
            f"formula gap {formula_gap:.2e} (<= 1e-12); bad-set violations {lemma_bad} "
            f"of {lemma_checked} bad sets (need 0); coupling gap {coupling_gap:.2e} "
            f"(<= 1e-10); {dt:.0f}s (<= 900s)")


# -- 2 ------------------------------------------------------------------------


def walk_corpus():
    graphs = [Graph.from_edges(n, edges) for n, edges in connected_corpus(n_max=5)]
    for s in range(20):
        G, _ = giant_of(gen_gnp(12, 0.3, Seed(2, s)))
        graphs.append(G)
    graphs.append(MultiGraph.from_edges(6, [(0, 1), (0, 1), (1, 2), (2, 3), (3, 4), (4, 5),
                                            (5, 0), (2, 5), (2, 5), (2, 5)]))
    return graphs


def exact_tv_non_increasing(G, start, t_max):
    """Exact check in integers: with L = lcm(deg), mu_t = v_t / (2L)^t and
    2m(2L)^t * 2TV_t = sum_i |2m v_t(i) - deg_i (2L)^t|."""
    n, two_m = G.n, 2 * G.m
    deg = G.degrees.tolist()
    L = math.lcm(*deg)
    adj = G.adjacency_lists()
    v = [0] * n
    v[start] = 1
    scale, prev = 1, None
    for _ in range(t_max + 1):
        cur = sum(abs(two_m * v[i] - deg[i] * scale) for i in range(n))
        if prev is not None and cur > 2 * L * prev:
            return False
        prev = cur
        nxt = [L * x for x in v]
        for i in range(n):
            share = v[i] * (L // deg[i])
            for j, mu in adj[i].items():
                nxt[j] += share * mu
        v, scale = nxt, scale * 2 * L
    return True


def test_criterion_2_walk_engine(verdict):
    t0 = time.perf_counter()
    graphs = walk_corpus()
    row_bad = 0
    stat_gap = 0.0
    mono_bad = 0
    float_rise = 0.0
    for G in graphs:
        k = LazyKernel(G)
        row_bad += sum(sum(k.exact_row(i).values()) != 1 for i in range(G.n))
        pi = stationary(G)
        stat_gap = max(stat_gap, float(np.max(np.abs(step(G, pi) - pi))))
        for s in range(G.n):
            mono_bad += not exact_tv_non_increasing(G, s, 60)
            c = tv_curves(G, [s], 60)["max_tv"]
            float_rise = max(float_rise, float(np.max(np.diff(c))))
    # Monte Carlo against the exact law at several times on a 12-vertex giant
    G = graphs[-2]
    trials = 10_000
    paths = simulate_walks(G, np.zeros(trials, dtype=np.int64), 12, Seed(2, 99))
    mu = np.zeros(G.n)
    mu[0] = 1.0
    worst_z = 0.0
    for t in range(1, 13):
        mu = step(G, mu)
        freq = np.bincount(paths[t], minlength=G.n) / trials
        sd = np.sqrt(mu * (1 - mu) / trials)
        live = sd > 0
        worst_z = max(worst_z, float(np.max(np.abs(freq - mu)[live] / sd[live])))
        assert np.all(freq[~live] == mu[~live])
    dt = time.perf_counter() - t0
    ok = (row_bad == 0 and stat_gap <= 1e-12 and mono_bad == 0 and float_rise <= 1e-12
          and worst_z <= 4 and dt <= 300)
    verdict("criterion 2 (walk engine, n<=12)", ok,
            f"{len(graphs)} graphs; inexact rows {row_bad} (need 0); |piP - pi| {stat_gap:.1e} "
            f"(<= 1e-12); start curves rising in exact arithmetic {mono_bad} (need 0), largest "
            f"float rise {float_rise:.1e} (<= 1e-12 rounding); Monte Carlo worst "
            f"|z| {worst_z:.2f} over 12 steps x {G.n} vertices (<= 4); {dt:.0f}s (<= 300s)")


# -- 3 ------------------------------------------------------------------------


def test_criterion_3_closed_forms(verdict):
    p3 = stationary(path_graph(3))
    phi1 = conductance_details(cycle_graph(4), [0])["phi"]
    phi2 = conductance_details(cycle_graph(4), [0, 1])["phi"]
    lam = lambda_u(complete_graph(3), 0).value
    surv = hitting_survival(complete_graph(2), [1], [1.0, 0.0], 60)
    hgap = float(np.max(np.abs(surv - 0.5 ** np.arange(61))))
    ok = (np.array_equal(p3, [0.25, 0.5, 0.25]) and abs(phi1 - 2 / 3) <= 1e-15
          and phi2 == 0.5 and abs(lam - 0.75) <= 1e-9 and hgap <= 1e-12)
    verdict("criterion 3 (closed forms)", ok,
            f"stationary(P3) {p3.tolist()} (= [1/4, 1/2, 1/4]); Phi_C4({{0}}) {phi1!r} (= 2/3); "
            f"Phi_C4({{0,1}}) {phi2!r} (= 1/2); lambda_u(K3) {lam!r} (3/4 +- 1e-9); "
            f"K2 survival gap {hgap:.1e} (<= 1e-12, t <= 60)")


# -- 4 ------------------------------------------------------------------------


def test_criterion_4_perturbed_path(verdict):
    t0 = time.perf_counter()
    sizes = [2**11, 2**13, 2**15]
    seeds = [0, 1, 2]
    t_avg, ratio, ball = {}, {}, {}
    for n in sizes:
        for s in seeds:
            G = perturb(path_graph(n), 1.0, Seed(s, 0))
            avg = avg_mixing_time(G, mode="sampled", sample_size=256, seed=Seed(s, 1))
            worst = mixing_time(G)
            assert avg.status == worst.status == "ok"
            t_avg[n, s] = avg.t / math.log(n)
            ratio[n, s] = worst.t / avg.t
            ball[n, s] = ball_growth_lower_bound(G, 2.0 * G.m / G.n) / math.log2(n)
    lo, hi = min(t_avg.values()), max(t_avg.values())
    band_ok = hi <= 4 * lo
    mono_ok = all(ratio[a, s] < ratio[b, s] for s in seeds for a, b in zip(sizes, sizes[1:]))
    ball_ok = min(ball.values()) >= 0.05
    dt = time.perf_counter() - t0
    ratios = "; ".join(f"seed {s}: " + ", ".join(f"{ratio[n, s]:.3f}" for n in sizes) for s in seeds)
    verdict("criterion 4 (perturbed path, eps=1)", band_ok and mono_ok and ball_ok and dt <= 1800,
            f"t_avg/ln n in [{lo:.2f}, {hi:.2f}], max/min {hi / lo:.2f} (<= 4); "
            f"t_mix/t_avg by n=2^11,2^13,2^15 [{ratios}] (strictly increasing); "
            f"min ball k/log2 n {min(ball.values()):.3f} (>= 0.05); {dt:.0f}s (<= 1800s)")


# -- 5 ------------------------------------------------------------------------


def test_criterion_5_gnp_giant(verdict):
    t0 = time.perf_counter()
    n = 2**14
    y = giant_fraction(1.2)
    rows = []
    for s in (0, 1, 2):
        G, order = giant_of(gen_gnp(n, 1.2 / n, Seed(s, 0)))
        worst, avg = mixing_times_spectral(G, t_cap=10**6)
        assert worst.status == avg.status == "ok"
        rows.append((s, order / n, worst.t, avg.t))
    ordered = all(a <= w for _, _, w, a in rows)
    gapped = sum(w / a >= 1.5 for _, _, w, a in rows)
    frac_ok = all(abs(f - y) <= 0.02 for _, f, _, _ in rows)
    dt = time.perf_counter() - t0
    detail = "; ".join(f"seed {s}: l1/n {f:.4f}, t_mix {w}, t_avg {a}, ratio {w / a:.2f}"
                       for s, f, w, a in rows)
    verdict("criterion 5 (G(2^14, 1.2/n) giant)", ordered and gapped >= 2 and frac_ok and dt <= 1800,
            f"{detail}; oracle y {y:.4f} (+- 0.02); t_avg <= t_mix on all seeds: {ordered}; "
            f"ratio >= 1.5 on {gapped}/3 (need >= 2); {dt:.0f}s (<= 1800s)")


# -- 6 ------------------------------------------------------------------------


def test_criterion_6_contraction_pipeline(verdict):
    t0 = time.perf_counter()
    n = 2**12
    G = perturb(path_graph(n), 1.0, Seed(0, 0))
    params = SpreaderParams(0.05, 8, strict=False)
    bad = bad_set_union(G, params, k_cap=6)
    pair = contract_components(G, bad.U)
    Gs = pair.Gstar
    tv = stationary_tv(G, Gs, pair.map)
    if pair.Ustar.size:
        e_hat = contract_to_vertex(pair).m
        mask = np.zeros(Gs.n, dtype=bool)
        mask[pair.Ustar] = True
        indep = not np.any(mask[Gs.eu] & mask[Gs.ev])
        note = f"|U| {bad.U.size} in {len(bad.blocks)} blocks"
    else:
        e_hat, indep = Gs.m, True
        note = "U is empty, so G* = G and the merge checks hold trivially"
    prof = conductance_profile(Gs, "sampled", budget=64, seed=Seed(0, 2))
    phis = [lv.phi for lv in prof.levels if lv.witness is not None]
    floor = float(params.alpha_q) ** 2 / 16
    dt = time.perf_counter() - t0
    ok = tv <= 0.01 and e_hat == Gs.m and indep and min(phis) >= floor and dt <= 600
    verdict("criterion 6 (contraction pipeline, n=2^12, k_cap=6)", ok,
            f"alpha 0.05, D 8; {note}; U partial {bad.partial}; stationary TV {tv:.2e} (<= 0.01); "
            f"e(G^) {e_hat} = e(G*) {Gs.m}; U* independent {indep}; sampled profile min Phi "
            f"{min(phis):.4f} over {len(phis)} witnessed levels (>= alpha^2/16 = {floor:.2e}); "
            f"{dt:.0f}s (<= 600s)")


# -- 7 ------------------------------------------------------------------------


def test_criterion_7_fvtl(verdict):
    t0 = time.perf_counter()
    n = 5000
    lines, ok = [], True
    for s in (1, 2, 3):
        G, _ = giant_of(gen_gnp(n, 1.2 / n, Seed(s, 0)))
        T = math.ceil(math.log(G.n) ** 4)
        order = make_rng(Seed(s, 7)).permutation(G.n).tolist()
        us = [v for v in order if not is_cut_vertex(G, v)][:10]
        reps = [fvtl_report(G, u, T, hp1=False) for u in us]
        assert not any(r.reducible for r in reps)
        mh = float(np.median([r.stat_hitting for r in reps]))
        mp = float(np.median([r.stat_prob for r in reps]))
        ok &= mh <= 0.15 and mp <= 0.15
        lines.append(f"seed {s}: n' {G.n}, T {T}, median stat_hitting {mh:.4f}, "
                     f"median stat_prob {mp:.4f}")
    k2 = fvtl_report(complete_graph(2), 0).stat_hitting
    ok &= k2 == 0.5
    dt = time.perf_counter() - t0
    verdict("criterion 7 (first-visit diagnostics, G(5000, 1.2/n) giant)", ok and dt <= 900,
            "; ".join(lines) + f" (both <= 0.15); K2 stat_hitting {k2!r} (= 0.5 exactly); "
            f"{dt:.0f}s (<= 900s)")


# -- 8 ------------------------------------------------------------------------


def test_criterion_8_cli_determinism(verdict, tmp_path, capsys):
    g = tmp_path / "g.txt"
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("model = perturbed\nn = 256, 512\nseeds = 0, 1\n"
                   "analyses = mix, avgmix, ball-lower, spreader, conductance\nsamples = 32\n")
    calls = [
        ["gen", "--model", "perturbed", "--n", "300", "--seed", "4"],
        ["gen", "--model", "gnp", "--n", "400", "--p", "0.005", "--seed", "4",
         "--restrict-to-largest-component"],
        ["mix", "--graph", str(g)],
        ["avgmix", "--graph", str(g), "--mode", "sampled", "--samples", "40", "--seed", "3"],
        ["conductance", "--graph", str(g), "--mode", "sampled", "--budget", "8", "--seed", "3"],
        ["spreader", "--graph", str(g), "--k-cap", "4"],
        ["contract", "--graph", str(g), "--from-spreader", "--alpha", "0.6", "--D", "4",
         "--no-strict", "--k-cap", "4", "--pipeline", "--seed", "3"],
        ["fvtl", "--graph", str(g), "--sample", "3", "--T", "30", "--seed", "3"],
        ["run", "--config", str(cfg), "--out-dir", str(tmp_path / "run")],
    ]
    main(["gen", "--model", "perturbed", "--n", "300", "--seed", "4", "--out", str(g)])
    capsys.readouterr()
    differing = []
    for argv in calls:
        outs = []
        for _ in range(2):
            code = main(list(argv))
            outs.append((code, capsys.readouterr().out))
        if outs[0] != outs[1] or outs[0][0] != 0:
            differing.append(argv[0])
    verdict("criterion 8 (CLI determinism)", not differing,
            f"{len(calls)} invocations run twice; byte-identical output for all "
            f"except {differing or 'none'} (need none)")
