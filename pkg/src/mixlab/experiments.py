"""Seeded end-to-end experiments on the random-graph models.

A config names a model, its parameters, the sizes to sweep, the seeds and
the analyses to run.  Every (size, seed) pair is an independent run; the
record lists runs in sweep order whatever the thread count, so the JSON
(minus the ``timing`` block) is a pure function of the config.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .conductance import EXACT_N_MAX, conductance_profile, fr_bound
from .contraction import (
    _independent,
    contract_components,
    contract_to_vertex,
    stationary_tv,
)
from .fvtl import fvtl_report, is_cut_vertex
from .generators import (
    Seed,
    cycle_graph,
    degeneracy,
    gen_gnp,
    gen_newman_watts,
    host_degree,
    make_rng,
    parse_host_spec,
    path_graph,
    percolate_host,
    perturb,
    star_graph,
    circulant_graph,
)
from .graph import MultiGraph, induced_subgraph, is_connected, largest_component
from .spreader import SpreaderParams, analyse
from .walk import avg_mixing_time, ball_growth_lower_bound, mixing_time

__all__ = [
    "MODELS",
    "ANALYSES",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "ResultRecord",
    "generate",
    "default_spreader_params",
    "contract_pipeline",
    "run_experiment",
    "emit_plot_data",
    "giant_fraction",
]

MODELS = ("perturbed", "newman-watts", "percolated", "gnp-giant")
ANALYSES = ("mix", "avgmix", "spreader", "contract-pipeline", "fvtl", "conductance", "ball-lower")
BASES = ("path", "cycle", "star")


@dataclass
class ExperimentConfig:
    model: str
    n: list[int]
    seeds: list[int]
    eps: float = 1.0
    k: int = 1
    base: str = "path"
    host: str = "random-regular:d=10"
    analyses: list[str] = field(default_factory=list)
    mix_eps: float = 0.25
    avg_mode: str = "sampled"
    samples: int = 256
    mix_starts: int | None = None
    t_cap: int | None = None
    alpha: float | None = None
    D: float | None = None
    c0: float = 1.0
    k_cap: int = 6
    budget: int = 64
    fvtl_samples: int = 10
    fvtl_T: str = "log6"
    out_dir: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if isinstance(self.n, int):
            self.n = [self.n]
        if isinstance(self.seeds, int):
            self.seeds = [self.seeds]
        if isinstance(self.analyses, str):
            self.analyses = [self.analyses] if self.analyses else []
        self.n = [int(x) for x in self.n]
        self.seeds = [int(s) for s in self.seeds]
        self.analyses = list(self.analyses)
        if not self.n:
            raise ValueError("config needs at least one size n")
        if not self.seeds:
            raise ValueError("config needs at least one seed")
        bad = [a for a in self.analyses if a not in ANALYSES]
        if bad:
            raise ValueError(f"unknown analyses {bad}; expected a subset of {ANALYSES}")
        if self.base not in BASES:
            raise ValueError(f"unknown base {self.base!r}")
        if self.avg_mode not in ("exact", "sampled"):
            raise ValueError("avg_mode must be exact or sampled")
        self.fvtl_T = str(self.fvtl_T)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def hash(self) -> str:
        d = self.to_dict()
        d.pop("out_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_LIST_KEYS = {"n", "seeds", "analyses"}


def _scalar(text: str):
    text = text.strip()
    m = re.fullmatch(r"(\d+)\s*\^\s*(\d+)", text)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text.lower() in ("none", "null", ""):
        return None
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def parse_config(text: str) -> ExperimentConfig:
    """JSON object, or ``key = value`` lines (``#`` comments; ``n``,
    ``seeds`` and ``analyses`` take comma-separated lists; ``2^13`` is
    accepted for integers)."""
    stripped = text.strip()
    if stripped.startswith("{"):
        raw = json.loads(stripped)
        for key in ("n", "seeds"):
            if key in raw:
                vals = raw[key] if isinstance(raw[key], list) else [raw[key]]
                raw[key] = [_scalar(str(v)) for v in vals]
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, val = line.partition("=")
            if not eq:
                raise ValueError(f"line {lineno}: expected key = value")
            key = key.strip().replace("-", "_")
            if key in _LIST_KEYS:
                raw[key] = [_scalar(v) for v in val.split(",") if v.strip()]
                if key == "analyses":
                    raw[key] = [str(v) for v in raw[key]]
            else:
                raw[key] = _scalar(val)
    raw = {k.replace("-", "_"): v for k, v in raw.items()}
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"unknown config keys {unknown}")
    for key in ("model", "n", "seeds"):
        if key not in raw:
            raise ValueError(f"config is missing {key!r}")
    return ExperimentConfig(**raw)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


# -- generation ---------------------------------------------------------------


def giant_fraction(c: float, iters: int = 10_000) -> float:
    """Survival probability ``y`` solving ``y = 1 - exp(-c y)`` (``c > 1``)."""
    y = 1.0
    for _ in range(iters):
        y_new = 1.0 - math.exp(-c * y)
        if abs(y_new - y) < 1e-15:
            return y_new
        y = y_new
    return y


def _base_graph(cfg: ExperimentConfig, n: int):
    if cfg.base == "path":
        return path_graph(n)
    if cfg.base == "cycle":
        return cycle_graph(n)
    return star_graph(n - 1)


def generate(cfg: ExperimentConfig, n: int, seed: int) -> tuple[MultiGraph, dict]:
    """The model graph for one run (restricted to its largest component for
    the percolation models) and its generation statistics."""
    s = Seed(seed, 0)
    stats: dict = {"n": n}
    if cfg.model == "perturbed":
        base = _base_graph(cfg, n)
        G = perturb(base, cfg.eps, s)
        stats["base_degeneracy"] = degeneracy(base)[0]
    elif cfg.model == "newman-watts":
        G = gen_newman_watts(n, cfg.k, cfg.eps, s)
        stats["base_degeneracy"] = degeneracy(circulant_graph(n, range(1, cfg.k + 1)))[0]
    else:
        if cfg.model == "gnp-giant":
            full = gen_gnp(n, min(1.0, (1.0 + cfg.eps) / n), s)
            stats["l1_oracle"] = giant_fraction(1.0 + cfg.eps)
        else:
            kind, _, rest = cfg.host.partition(":")
            if kind == "file":
                spec = parse_host_spec(cfg.host)
            else:
                spec = parse_host_spec(f"{kind}:n={n}" + (f",{rest}" if rest else ""))
            d = host_degree(spec)
            if d is None:
                raise ValueError("percolated model needs a regular host")
            stats["host_degree"] = d
            full = percolate_host(spec, min(1.0, (1.0 + cfg.eps) / d), s)
        block, order = largest_component(full)
        G, _ = induced_subgraph(full, block)
        stats["l1"] = int(order)
        stats["l1_over_n"] = order / n
    stats["n_used"] = G.n
    stats["m"] = G.m
    stats["connected"] = bool(is_connected(G))
    return G, stats


def default_spreader_params(cfg: ExperimentConfig, stats: dict) -> SpreaderParams:
    """Model defaults: perturbed-type models use ``D = 2(Δ + 1 + eps)`` with
    ``Δ`` the base degeneracy and ``alpha = min(0.01, eps/(2D^2))``; the
    percolation models use ``D = 12`` and ``alpha = c0 eps^2 / (D^2 log(1/eps))``.
    Explicit ``alpha``/``D`` in the config override both."""
    if cfg.model in ("perturbed", "newman-watts"):
        D = 2 * (stats["base_degeneracy"] + 1 + cfg.eps)
        alpha = min(0.01, cfg.eps / (2 * D * D))
    else:
        D = 12.0
        e = min(cfg.eps, 0.5)
        alpha = cfg.c0 * e * e / (D * D * math.log(1 / e))
    if cfg.D is not None:
        D = cfg.D
    if cfg.alpha is not None:
        alpha = cfg.alpha
    strict = D >= 4 and 0 < alpha < 1 / (D * D)
    return SpreaderParams(alpha, D, strict=strict)


# -- pipeline -------------------------------------------------------------


def _sample_starts(n: int, count: int | None, seed) -> np.ndarray | None:
    if count is None or count >= n:
        return None
    return np.sort(make_rng(seed).choice(n, size=count, replace=False))


def contract_pipeline(G: MultiGraph, params: SpreaderParams, k_cap: int = 6, *, seed=0,
                      budget: int = 64, t_cap: int | None = None,
                      mix_starts: int | None = 256) -> dict:
    """Bad-set union, contraction to ``G*`` and ``Ĝ``, and the diagnostics
    tying them back to ``G``: stationary TV against ``exp(-(log n)^(1/12))``,
    the conductance profile of ``G*`` against ``alpha^2/8``, and the mixing
    time of ``G*`` from sampled starts against ``log n``."""
    if not is_connected(G):
        raise ValueError("pipeline needs a connected graph")
    s = seed if isinstance(seed, Seed) else Seed(int(seed), 0)
    n = G.n
    lnn = math.log(n)
    _, bad = analyse(G, params, k_cap)
    pair = contract_components(G, bad.U)
    Gs = pair.Gstar
    out: dict = {
        "params": params.to_dict(),
        "k_cap": k_cap,
        "U_partial": bad.partial,
        "U_stats": bad.stats,
        "n_star": Gs.n,
        "e_G": G.m,
        "e_star": Gs.m,
        "ustar_independent": bool(_independent(Gs, pair.Ustar)),
    }
    if pair.Ustar.size:
        Gh = contract_to_vertex(pair)
        out["e_hat"] = Gh.m
    else:
        out["e_hat"] = None
    tv = stationary_tv(G, Gs, pair.map)
    out["stationary_tv"] = tv
    out["stationary_tv_threshold"] = math.exp(-lnn ** (1 / 12))

    mode = "exact" if Gs.n <= EXACT_N_MAX else "sampled"
    target = float(params.alpha_q ** 2 / 8)
    if Gs.n >= 2:
        prof = conductance_profile(Gs, mode, budget, s.child(1))
        levels = prof.levels
    else:
        mode, levels = "none", []
    witnessed = [lv.phi for lv in levels if lv.witness is not None]
    out["profile_mode"] = mode
    out["profile_min_phi"] = min(witnessed) if witnessed else None
    out["profile_levels"] = [lv.to_dict() for lv in levels]
    out["phi_target"] = target
    out["phi_target_ok"] = all(p >= target for p in witnessed)

    starts = _sample_starts(Gs.n, mix_starts, s.child(2))
    rep = mixing_time(Gs, 0.25, t_cap, starts=starts)
    out["mix_star"] = rep.to_dict()
    out["mix_star_over_log_n"] = None if rep.t is None else rep.t / lnn
    return out


# -- running ----------------------------------------------------------------


def _fvtl_T(cfg: ExperimentConfig, n: int) -> int:
    spec = cfg.fvtl_T
    m = re.fullmatch(r"log(\d+(?:\.\d+)?)", spec)
    if m:
        return int(math.ceil(math.log(n) ** float(m.group(1))))
    return int(spec)


def _fvtl_analysis(G, cfg, n_seed: Seed) -> dict:
    rng = make_rng(n_seed)
    order = rng.permutation(G.n)
    chosen = []
    for v in order.tolist():
        if not is_cut_vertex(G, v):
            chosen.append(v)
            if len(chosen) == cfg.fvtl_samples:
                break
    T = _fvtl_T(cfg, G.n)
    reps = [fvtl_report(G, u, T, hp1=G.n <= 2000).to_dict() for u in chosen]
    return {
        "T": T,
        "reports": reps,
        "median_stat_hitting": float(np.median([r["stat_hitting"] for r in reps])) if reps else None,
        "median_stat_prob": float(np.median([r["stat_prob"] for r in reps])) if reps else None,
    }


def _run_one(cfg: ExperimentConfig, n: int, seed: int) -> tuple[dict, dict, dict]:
    t0 = time.perf_counter()
    timing: dict = {}
    G, stats = generate(cfg, n, seed)
    timing["generate"] = time.perf_counter() - t0
    metrics: dict = {}
    details: dict = {}
    skipped: dict = {}
    curves: dict = {}
    base = Seed(seed, 0)
    if not stats["connected"] and cfg.analyses:
        for a in cfg.analyses:
            skipped[a] = "graph is disconnected"
    for i, a in enumerate(cfg.analyses):
        if a in skipped:
            continue
        sub = base.child(10 + i)
        t1 = time.perf_counter()
        if a == "mix":
            starts = _sample_starts(G.n, cfg.mix_starts, sub)
            rep = mixing_time(G, cfg.mix_eps, cfg.t_cap, starts=starts)
            metrics["t_mix"] = rep.t
            details["mix"] = rep.to_dict()
            if rep.status == "cap":
                skipped[a] = f"t_cap {rep.t_cap} reached"
        elif a == "avgmix":
            rep = avg_mixing_time(G, cfg.mix_eps, cfg.avg_mode, cfg.samples, sub, cfg.t_cap)
            metrics["t_avg"] = rep.t
            details["avgmix"] = rep.to_dict()
            curves["mixing-curve"] = rep.curve
            if rep.status == "cap":
                skipped[a] = f"t_cap {rep.t_cap} reached"
        elif a == "ball-lower":
            k = ball_growth_lower_bound(G, 2.0 * G.m / G.n)
            metrics["ball_k"] = k
            metrics["ball_k_over_log2_n"] = k / math.log2(n)
        elif a == "spreader":
            params = default_spreader_params(cfg, stats)
            cert, bad = analyse(G, params, cfg.k_cap)
            details["spreader"] = {**cert.to_dict(), "U_stats": bad.stats,
                                   "U_partial": bad.partial}
            metrics["U_size"] = bad.stats["size"]
            metrics["U_pi"] = bad.stats["pi"]
        elif a == "contract-pipeline":
            params = default_spreader_params(cfg, stats)
            res = contract_pipeline(G, params, cfg.k_cap, seed=sub, budget=cfg.budget,
                                    t_cap=cfg.t_cap, mix_starts=cfg.mix_starts or 256)
            details["contract-pipeline"] = res
            metrics["stationary_tv"] = res["stationary_tv"]
            metrics["t_mix_star"] = res["mix_star"]["t"]
            if res["mix_star"]["status"] == "cap":
                skipped[a] = "t_cap reached on G*"
        elif a == "conductance":
            mode = "exact" if G.n <= EXACT_N_MAX else "sampled"
            fr = fr_bound(G, 1.0, mode, cfg.budget, sub)
            details["conductance"] = fr.to_dict()
            metrics["fr_sum"] = fr.fr_sum
        elif a == "fvtl":
            res = _fvtl_analysis(G, cfg, sub)
            details["fvtl"] = res
            metrics["fvtl_stat_hitting"] = res["median_stat_hitting"]
            metrics["fvtl_stat_prob"] = res["median_stat_prob"]
        timing[a] = time.perf_counter() - t1
    if metrics.get("t_mix") is not None and metrics.get("t_avg"):
        metrics["mix_over_avg"] = metrics["t_mix"] / metrics["t_avg"]
    if metrics.get("t_avg") is not None:
        metrics["t_avg_over_log_n"] = metrics["t_avg"] / math.log(n)
    run = {"n": n, "seed": seed, "stats": stats, "metrics": metrics,
           "details": details, "skipped": skipped}
    return run, timing, curves


@dataclass
class ResultRecord:
    config: dict
    config_hash: str
    runs: list[dict]
    aggregates: dict
    version: str
    wall_clock: float
    timing: list[dict] = field(default_factory=list)
    curves: dict = field(default_factory=dict, repr=False)

    @property
    def complete(self) -> bool:
        return not any(r["skipped"] for r in self.runs)

    def to_dict(self, timing: bool = True) -> dict:
        d = {"config": self.config, "config_hash": self.config_hash, "runs": self.runs,
             "aggregates": self.aggregates, "version": self.version}
        if timing:
            d["timing"] = {"wall_clock": self.wall_clock, "runs": self.timing}
        return d

    def to_json(self, timing: bool = True) -> str:
        return dumps(self.to_dict(timing))


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _aggregate(runs: list[dict]) -> dict:
    out: dict = {}
    for n in sorted({r["n"] for r in runs}):
        vals: dict[str, list] = {}
        for r in runs:
            if r["n"] != n:
                continue
            for key, v in r["metrics"].items():
                if isinstance(v, (int, float)) and not isinstance(v, bool) and v is not None:
                    vals.setdefault(key, []).append(float(v))
        out[str(n)] = {k: {"median": float(np.median(v)), "min": min(v), "max": max(v),
                           "count": len(v)} for k, v in sorted(vals.items())}
    return out


def _threads() -> int:
    env = os.environ.get("MIXLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig, threads: int | None = None) -> ResultRecord:
    """Run every (size, seed) pair of the sweep and aggregate per size.

    Runs execute on ``threads`` workers (default ``MIXLAB_THREADS`` or the
    core count); results are collected in sweep order.
    """
    t0 = time.perf_counter()
    tasks = [(n, s) for n in cfg.n for s in cfg.seeds]
    workers = threads or _threads()
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(lambda t: _run_one(cfg, *t), tasks))
    else:
        results = [_run_one(cfg, *t) for t in tasks]
    runs = [r for r, _, _ in results]
    timing = [{"n": r["n"], "seed": r["seed"], **tm} for r, tm, _ in results]
    curves = {(r["n"], r["seed"]): c for r, _, c in results}
    return ResultRecord(cfg.to_dict(), cfg.hash(), runs, _aggregate(runs), __version__,
                        time.perf_counter() - t0, timing, curves)


# -- plot data ----------------------------------------------------------------


PLOT_KINDS = ("mixing-curve", "size-sweep")


def emit_plot_data(record: ResultRecord, kind: str, out_dir) -> list[Path]:
    """Write CSV files for external plotting.

    ``mixing-curve``: one ``curve_n{n}_seed{seed}.csv`` per run with columns
    ``t,max_tv,mean_tv,sem``.  ``size-sweep``: ``size_sweep.csv`` with one
    row per run sorted by ``n`` then seed.  Floats are written with
    ``repr`` so parsing them back is exact.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if kind == "mixing-curve":
        have = {key: c for key, c in sorted(record.curves.items()) if kind in c}
        if not have:
            avail = sorted({k for c in record.curves.values() for k in c})
            raise KeyError(f"record has no {kind!r} curves; available: {avail}")
        paths = []
        for (n, seed), c in have.items():
            cur = c[kind]
            p = out_dir / f"curve_n{n}_seed{seed}.csv"
            with p.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["t", "max_tv", "mean_tv", "sem"])
                for row in zip(cur["t"], cur["max_tv"], cur["mean_tv"], cur["sem"]):
                    w.writerow([int(row[0])] + [repr(float(x)) for x in row[1:]])
            paths.append(p)
        return paths
    if kind == "size-sweep":
        cols = ["t_mix", "t_avg", "mix_over_avg"]
        avail = sorted({k for r in record.runs for k in r["metrics"]})
        if not any(c in avail for c in cols):
            raise KeyError(f"record has no mixing metrics; available: {avail}")
        p = out_dir / "size_sweep.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "seed", "log_n"] + cols)
            for r in sorted(record.runs, key=lambda r: (r["n"], r["seed"])):
                vals = [r["metrics"].get(c) for c in cols]
                w.writerow([r["n"], r["seed"], repr(math.log(r["n"]))]
                           + ["" if v is None else repr(v) for v in vals])
        return [p]
    raise KeyError(f"unknown plot kind {kind!r}; available: {list(PLOT_KINDS)}")
