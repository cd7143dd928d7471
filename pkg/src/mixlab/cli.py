"""Command-line interface: ``mixlab <subcommand> ...``.

Every subcommand that produces numbers writes sorted-key JSON (to
``--json-out`` or stdout).  Only ``run`` records wall-clock times, under a
separate ``timing`` key, so all other output is byte-for-byte reproducible.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .conductance import fr_bound
from .contraction import contract_components, contract_to_vertex, stationary_tv
from .experiments import (
    PLOT_KINDS,
    contract_pipeline,
    dumps,
    emit_plot_data,
    load_config,
    run_experiment,
)
from .fvtl import fvtl_report, is_cut_vertex
from .generators import (
    Seed,
    build_host,
    gen_gnp,
    gen_newman_watts,
    make_rng,
    parse_host_spec,
    path_graph,
    cycle_graph,
    star_graph,
    percolate_host,
    perturb,
)
from .graph import (
    format_edge_list,
    induced_subgraph,
    is_connected,
    largest_component,
    read_edge_list,
    write_edge_list,
)
from .spreader import SpreaderParams, analyse
from .walk import avg_mixing_time, mixing_time, tv_curves


class CliError(Exception):
    pass


def _emit(obj, path) -> None:
    text = dumps(obj)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args):
    G = read_edge_list(args.graph, multigraph=args.multigraph)
    info = {"n": G.n, "m": G.m}
    if getattr(args, "restrict_to_largest_component", False):
        block, order = largest_component(G)
        G, _ = induced_subgraph(G, block)
        info.update({"restricted": True, "l1": int(order), "l1_over_n": order / info["n"]})
    if not is_connected(G):
        raise CliError("graph is disconnected; pass --restrict-to-largest-component "
                       "to analyse its largest component")
    return G, info


def _write_curve(curve: dict, path) -> None:
    with open(path, "w") as fh:
        fh.write("t,max_tv,mean_tv,sem\n")
        for t, a, b, c in zip(curve["t"], curve["max_tv"], curve["mean_tv"], curve["sem"]):
            fh.write(f"{int(t)},{float(a)!r},{float(b)!r},{float(c)!r}\n")


def _starts(n, args):
    if args.mode == "exact" or args.samples >= n:
        return None
    return np.sort(make_rng(args.seed).choice(n, size=args.samples, replace=False))


# -- subcommands ------------------------------------------------------------


def cmd_gen(args) -> int:
    seed = Seed(args.seed, args.stream)
    model = args.model
    if model == "gnp":
        G = gen_gnp(args.n, args.p, seed)
    elif model == "perturbed":
        base = {"path": path_graph, "cycle": cycle_graph,
                "star": lambda n: star_graph(n - 1)}[args.base](args.n)
        G = perturb(base, args.eps, seed)
    elif model == "newman-watts":
        G = gen_newman_watts(args.n, args.k, args.eps, seed)
    elif model == "percolated":
        if not args.host:
            raise CliError("--host is required for the percolated model")
        G = percolate_host(parse_host_spec(args.host), args.p, seed)
    else:
        if not args.host:
            raise CliError("--host is required for the host model")
        G = build_host(parse_host_spec(args.host), seed)
    if args.restrict_to_largest_component:
        block, _ = largest_component(G)
        G, _ = induced_subgraph(G, block)
    if args.out:
        write_edge_list(G, args.out)
    else:
        sys.stdout.write(format_edge_list(G))
    return 0


def cmd_mix(args) -> int:
    G, info = _load(args)
    rep = mixing_time(G, args.eps, args.t_cap, starts=_starts(G.n, args))
    out = {"graph": info, **rep.to_dict()}
    if args.curve_out:
        if rep.t is None:
            raise CliError("no curve: the step cap was reached")
        starts = np.arange(G.n) if rep.mode == "exact" else _starts(G.n, args)
        _write_curve(tv_curves(G, starts, rep.t), args.curve_out)
    _emit(out, args.json_out)
    return 0 if rep.status == "ok" else 3


def cmd_avgmix(args) -> int:
    G, info = _load(args)
    rep = avg_mixing_time(G, args.eps, args.mode, args.samples, args.seed, args.t_cap)
    out = {"graph": info, **rep.to_dict()}
    out["sem_at_t"] = float(rep.curve["sem"][-1]) if rep.curve is not None else None
    if args.curve_out:
        _write_curve(rep.curve, args.curve_out)
    _emit(out, args.json_out)
    return 0 if rep.status == "ok" else 3


def cmd_conductance(args) -> int:
    G, info = _load(args)
    fr = fr_bound(G, args.c0, args.mode, args.budget, args.seed)
    _emit({"graph": info, **fr.to_dict()}, args.json_out)
    return 0


def _params(args) -> SpreaderParams:
    return SpreaderParams(args.alpha, args.D, strict=not args.no_strict)


def cmd_spreader(args) -> int:
    G, info = _load(args)
    cert, bad = analyse(G, _params(args), args.k_cap)
    out = {"graph": info, **cert.to_dict(), "U": bad.U.tolist(),
           "blocks": [b.tolist() for b in bad.blocks], "U_partial": bad.partial,
           "stats": bad.stats}
    _emit(out, args.json_out)
    return 0


def cmd_contract(args) -> int:
    G, info = _load(args)
    if args.u_file:
        text = Path(args.u_file).read_text().split()
        U = np.array(sorted({int(x) for x in text}), dtype=np.int64)
    else:
        _, bad = analyse(G, _params(args), args.k_cap)
        U = bad.U
    pair = contract_components(G, U)
    out = {"graph": info, "U": U.tolist(), "map": pair.map.to_dict(),
           "e_G": G.m, "e_star": pair.Gstar.m, "stationary_tv": stationary_tv(G, pair.Gstar, pair.map)}
    if args.emit_gstar:
        write_edge_list(pair.Gstar, args.emit_gstar)
    if pair.Ustar.size:
        Gh = contract_to_vertex(pair)
        out["e_hat"] = Gh.m
        out["u_star"] = Gh.n - 1
        if args.emit_ghat:
            write_edge_list(Gh, args.emit_ghat)
    elif args.emit_ghat:
        raise CliError("U is empty: there is no merged vertex")
    if args.pipeline:
        out["pipeline"] = contract_pipeline(G, _params(args), args.k_cap, seed=args.seed)
    _emit(out, args.json_out)
    return 0


def cmd_fvtl(args) -> int:
    G, info = _load(args)
    if args.u is not None:
        us = [args.u]
    else:
        order = make_rng(args.seed).permutation(G.n).tolist()
        us = [v for v in order if not is_cut_vertex(G, v)][: args.sample]
    T = args.T if args.T is not None else int(math.ceil(math.log(G.n) ** 6))
    reps = [fvtl_report(G, u, T, tol=args.tol, hp1=not args.no_hp1).to_dict() for u in us]
    if args.u is not None:
        out = {"graph": info, **reps[0]}
    else:
        out = {"graph": info, "reports": reps, "T": T,
               "median_stat_hitting": float(np.median([r["stat_hitting"] for r in reps])),
               "median_stat_prob": float(np.median([r["stat_prob"] for r in reps]))}
    _emit(out, args.json_out)
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    rec = run_experiment(cfg, args.threads)
    out_dir = Path(args.out_dir or cfg.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "result.json").write_text(rec.to_json(timing=True))
    for kind in PLOT_KINDS:
        try:
            emit_plot_data(rec, kind, out_dir)
        except KeyError:
            pass
    sys.stdout.write(rec.to_json(timing=False))
    if not rec.complete:
        for r in rec.runs:
            for a, why in sorted(r["skipped"].items()):
                sys.stderr.write(f"n={r['n']} seed={r['seed']}: {a} skipped ({why})\n")
        return 0 if args.allow_skip else 4
    return 0


# -- parser -------------------------------------------------------------------


def _graph_args(p, restrict=True):
    p.add_argument("--graph", required=True, help="edge-list file ('n m' header, then 'u v' lines)")
    p.add_argument("--multigraph", action="store_true", help="read repeated lines as parallel edges")
    if restrict:
        p.add_argument("--restrict-to-largest-component", action="store_true",
                       help="analyse the largest connected component only")
    p.add_argument("--json-out", help="write JSON here instead of stdout")


def _spreader_args(p):
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--D", type=float, default=6.0)
    p.add_argument("--k-cap", type=int, default=None,
                   help="largest set size enumerated (default: n if n <= 24, else 6)")
    p.add_argument("--no-strict", action="store_true",
                   help="allow parameters outside D >= 4, alpha < 1/D^2")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mixlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"mixlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph as an edge list")
    p.add_argument("--model", required=True,
                   choices=["gnp", "perturbed", "newman-watts", "percolated", "host"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--base", choices=["path", "cycle", "star"], default="path")
    p.add_argument("--host", help="complete:n=.. | circulant:n=..,offsets=1;2 | "
                                  "random-regular:n=..,d=.. | file:<path>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--restrict-to-largest-component", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    for name, func in (("mix", cmd_mix), ("avgmix", cmd_avgmix)):
        p = sub.add_parser(name, help=("worst-start" if name == "mix" else "average") + " mixing time")
        _graph_args(p)
        p.add_argument("--eps", type=float, default=0.25)
        p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
        p.add_argument("--samples", type=int, default=256)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--t-cap", type=int, default=None)
        p.add_argument("--curve-out", help="CSV with columns t,max_tv,mean_tv,sem")
        p.set_defaults(func=func)

    p = sub.add_parser("conductance", help="conductance profile and Fountoulakis-Reed bound")
    _graph_args(p)
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--budget", type=int, default=64)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_conductance)

    p = sub.add_parser("spreader", help="spreader certificate and bad-set union")
    _graph_args(p)
    _spreader_args(p)
    p.set_defaults(func=cmd_spreader)

    p = sub.add_parser("contract", help="contract bad components")
    _graph_args(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--u-file", help="file with the vertex ids of U")
    src.add_argument("--from-spreader", action="store_true", help="compute U by the bad-set scan")
    _spreader_args(p)
    p.add_argument("--emit-gstar", help="write G* as an edge list")
    p.add_argument("--emit-ghat", help="write the merged graph as an edge list")
    p.add_argument("--pipeline", action="store_true", help="also run the full diagnostic pipeline")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_contract)

    p = sub.add_parser("fvtl", help="first-visit diagnostics")
    _graph_args(p)
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--u", type=int)
    who.add_argument("--sample", type=int, help="number of random non-cut vertices")
    p.add_argument("--T", type=int, default=None, help="horizon (default ceil((log n)^6))")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-hp1", action="store_true", help="skip the HP1 matrix-power check")
    p.set_defaults(func=cmd_fvtl)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--allow-skip", action="store_true", help="exit 0 even if analyses were skipped")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        sys.stderr.write(f"mixlab {args.command}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
