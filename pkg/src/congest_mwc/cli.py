"""Batch experiment runner for the cycle approximation package.

Subcommands
-----------
``gen``
    Write a generated graph to an edge-list file.
``run``
    Run a configured algorithm over a list of seeds and emit JSON records.
``verify``
    Same batch as ``run`` with oracle checking forced on; the exit status
    reports whether every sandwich bound held on every seed.
``sweep``
    Measure round growth over graph sizes and emit a CSV table.
``sssp``
    One multi-source shortest-path run on a graph file.
``mwc-dir``
    Directed unweighted cycle approximation on a graph file.
``girth``
    Girth approximation, optionally hop-limited on a weighted host.
``mwc-wt``
    Weighted cycle approximation, undirected or directed.

Results files embed the arguments, the seed list, and the package version.
The environment variable ``CONGEST_MWC_SEED`` supplies the default seed
when a command does not pass one; nothing else is read from the
environment.  JSON output encodes infinite values as the string ``"inf"``
so files stay valid standard JSON.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .engine import RoundLog
from .gadgets import GADGET_KINDS, GadgetSpec, gen_gadget
from .graphs import (
    Graph,
    gen_planted_cycle,
    gen_random,
    load_graph,
    save_graph,
    stretch_graph,
    undirected_diameter,
)
from .multisource import ksource_bfs_exact, ksource_small_k, ksource_sssp_approx
from .primitives import INT_INF
from .mwc_directed import mwc_directed_unweighted
from .mwc_undirected import girth_approx, hop_limited_mwc
from .mwc_weighted import mwc_directed_weighted, mwc_undirected_weighted
from .oracles import (
    brute_force_P,
    classify_directed_case,
    classify_girth_case,
    exact_apsp,
    exact_mwc,
    hop_limited_mwc_oracle,
)

__all__ = ["ConfigError", "main", "parse_config"]

SEED_ENV = "CONGEST_MWC_SEED"

RUN_ALGORITHMS = ("girth", "mwc-dir", "mwc-wt")


class ConfigError(ValueError):
    """A config file or flag set that cannot be turned into a runnable job."""


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}")


def parse_config(path: str) -> dict[str, str]:
    """Read a flat ``key = value`` file into a string dict.

    A ``[section]`` header prefixes the keys that follow it with
    ``section.``; blank lines and ``#`` comments are skipped.
    """
    out: dict[str, str] = {}
    prefix = ""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if line.startswith("[") and line.endswith("]"):
                    prefix = line[1:-1].strip() + "."
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                out[prefix + key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return out


def parse_bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {text!r}")


def parse_seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"seeds must be a comma list of integers, got {text!r}")
    if not seeds:
        raise ConfigError("seeds list is empty")
    return seeds


def jsonable(value):
    """Map values onto standard JSON, encoding infinities as ``"inf"``."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if math.isinf(f):
            return "inf"
        if f.is_integer():
            return int(f)
        return f
    return value


def ratio_of(value: float, oracle: float) -> float:
    if math.isinf(oracle):
        return 1.0 if math.isinf(value) else math.inf
    if math.isinf(value):
        return math.inf
    return float(value) / float(oracle)


def write_json(doc, path: str | None) -> None:
    text = json.dumps(jsonable(doc), indent=2, sort_keys=True)
    if path is None:
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def components_of(g: Graph) -> list[Graph]:
    """Split a graph into its underlying connected components."""
    from scipy.sparse.csgraph import connected_components

    if g.n == 0:
        return [g]
    ncomp, labels = connected_components(g.underlying_csr, directed=False)
    if ncomp <= 1:
        return [g]
    parts = []
    for c in range(ncomp):
        keep = np.nonzero(labels == c)[0]
        relabel = {int(v): i for i, v in enumerate(keep)}
        edges = tuple(
            (relabel[u], relabel[v], w)
            for u, v, w in g.edges
            if labels[u] == c
        )
        parts.append(Graph(n=len(keep), directed=g.directed, edges=edges))
    return parts


def _is_unit_weight(g: Graph) -> bool:
    return g.m == 0 or g.max_weight == 1


# ---------------------------------------------------------------------------
# gen


def _add_gen_parser(sub) -> None:
    p = sub.add_parser("gen", help="generate a graph file")
    p.add_argument("--config", help="config file supplying generator keys")
    p.add_argument("--kind", choices=("random", "planted", "gadget"))
    p.add_argument("--out", help="edge-list output path")
    p.add_argument("--n", type=int)
    p.add_argument("--avg-degree", type=float)
    p.add_argument("--directed", action="store_true", default=None)
    p.add_argument("--W", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--connected", action="store_true", default=None)
    p.add_argument("--cycle-len", type=int)
    p.add_argument("--cycle-weight", type=int)
    p.add_argument("--extra-avg-deg", type=float)
    p.add_argument("--gadget-kind", choices=GADGET_KINDS)
    p.add_argument("--Sa")
    p.add_argument("--Sb")
    p.add_argument("--tree-height", type=int)
    p.add_argument("--path-len", type=int)
    p.add_argument("--path-count", type=int)
    p.add_argument("--alpha", type=int)
    p.add_argument("--stretch", type=int)
    p.add_argument("--girth-k", type=int)
    p.set_defaults(handler=cmd_gen)


def _gen_value(args, cfg: dict[str, str], flag: str, key: str, convert, fallback=None):
    flag_value = getattr(args, flag)
    if flag_value is not None:
        return flag_value
    if key in cfg:
        try:
            return convert(cfg[key])
        except ConfigError:
            raise
        except ValueError:
            raise ConfigError(f"bad value for {key}: {cfg[key]!r}")
    return fallback


def cmd_gen(args) -> int:
    cfg = parse_config(args.config) if args.config else {}
    kind = args.kind or cfg.get("gen.kind") or cfg.get("gadget.kind")
    if kind in GADGET_KINDS:
        kind, args.gadget_kind = "gadget", kind
    if kind not in ("random", "planted", "gadget"):
        raise ConfigError(f"unknown generator kind {kind!r}")
    out = args.out or cfg.get("gen.out")
    if out is None:
        raise ConfigError("gen needs an --out path")
    seed = _gen_value(args, cfg, "seed", "gen.seed", int, default_seed())

    if kind == "gadget":
        section = {k.split(".", 1)[1]: v for k, v in cfg.items() if k.startswith("gadget.")}
        fields = {
            "kind": args.gadget_kind or section.get("kind"),
            "Sa": args.Sa or section.get("Sa"),
            "Sb": args.Sb or section.get("Sb"),
        }
        if fields["kind"] is None or fields["Sa"] is None or fields["Sb"] is None:
            raise ConfigError("gadget generation needs kind, Sa, and Sb")
        for name, flag in (("tree_height", "tree_height"), ("path_len", "path_len"),
                           ("path_count", "path_count"), ("alpha", "alpha"),
                           ("stretch", "stretch"), ("girth_k", "girth_k")):
            value = getattr(args, flag)
            if value is None and name in section:
                try:
                    value = int(section[name])
                except ValueError:
                    raise ConfigError(f"bad value for gadget.{name}: {section[name]!r}")
            if value is not None:
                fields[name] = value
        try:
            g = gen_gadget(GadgetSpec(**fields))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad gadget spec: {exc}")
        save_graph(g, out)
        print(f"wrote {out}: gadget {fields['kind']}, n={g.n}, m={g.m}")
        return 0

    n = _gen_value(args, cfg, "n", "gen.n", int)
    if n is None:
        raise ConfigError(f"{kind} generation needs --n")
    directed = _gen_value(args, cfg, "directed", "gen.directed",
                          lambda t: parse_bool(t, "gen.directed"), False)
    if kind == "random":
        deg = _gen_value(args, cfg, "avg_degree", "gen.avg_degree", float)
        if deg is None:
            raise ConfigError("random generation needs --avg-degree")
        W = _gen_value(args, cfg, "W", "gen.W", int, 1)
        connected = _gen_value(args, cfg, "connected", "gen.connected",
                               lambda t: parse_bool(t, "gen.connected"), False)
        g = gen_random(n, deg, directed=directed, W=W, seed=seed, connected=connected)
        save_graph(g, out)
        print(f"wrote {out}: random n={g.n}, m={g.m}, seed={seed}")
        return 0

    cycle_len = _gen_value(args, cfg, "cycle_len", "gen.cycle_len", int)
    cycle_weight = _gen_value(args, cfg, "cycle_weight", "gen.cycle_weight", int)
    if cycle_len is None or cycle_weight is None:
        raise ConfigError("planted generation needs --cycle-len and --cycle-weight")
    extra = _gen_value(args, cfg, "extra_avg_deg", "gen.extra_avg_deg", float, 0.0)
    g, witness = gen_planted_cycle(n, cycle_len, cycle_weight,
                                   directed=directed, seed=seed,
                                   extra_avg_deg=extra)
    save_graph(g, out)
    write_json({"cycle": list(witness), "weight": cycle_weight, "seed": seed},
               out + ".witness.json")
    print(f"wrote {out} (+ witness sidecar): planted n={g.n}, cycle={cycle_len}")
    return 0


# ---------------------------------------------------------------------------
# run / verify


def _girth_split_run(g: Graph, seed: int, want_cases: bool):
    """Girth of each underlying component, minimum spanning all of them.

    Components are disjoint networks and run simultaneously, so the
    reported round count is the largest component's.
    """
    value = math.inf
    rounds = 0
    samples = 0
    labels: list[str] = []
    attaining_case = None
    for comp in components_of(g):
        if comp.m == 0:
            continue
        log = RoundLog()
        got, _, info = girth_approx(comp, seed, log=log, details=True)
        rounds = max(rounds, log.total_rounds())
        samples += len(info["sample"].members)
        label = None
        if want_cases:
            rep = exact_mwc(comp)
            if rep.witness is not None:
                near = info["near"]
                label = classify_girth_case(
                    rep.witness, lambda v: set(near.members(v))
                )
                labels.append(label)
        if got < value:
            value = got
            attaining_case = label
    return value, rounds, samples, labels, attaining_case


def _run_record_girth(g: Graph, seed: int, opts, verify: bool):
    if not _is_unit_weight(g):
        raise ConfigError("girth runs need unit weights; use mwc-wt for weighted input")
    value, rounds, samples, _, case = _girth_split_run(g, seed, verify)
    return {"value": value, "rounds": rounds, "sample_size": samples,
            "overflow_size": None, "case": case}


def _run_record_mwc_dir(g: Graph, seed: int, opts, verify: bool):
    if not g.directed:
        raise ConfigError("mwc-dir needs a directed graph")
    if not _is_unit_weight(g):
        raise ConfigError("mwc-dir needs unit weights; use mwc-wt for weighted input")
    log = RoundLog()
    mu, _, info = mwc_directed_unweighted(
        g, seed, sample_p=opts.get("sample_p"), h=opts.get("h"),
        rho=opts.get("rho"), phase_cap_factor=opts.get("phase_cap_factor", 8),
        log=log, details=True)
    record = {"value": mu, "rounds": log.total_rounds(),
              "sample_size": len(info["sample"].members),
              "overflow_size": len(info["overflow"].Z), "case": None}
    if verify:
        rep = exact_mwc(g)
        if rep.witness is not None:
            dist = exact_apsp(g).dist
            rset = info["rset"]
            record["case"] = classify_directed_case(
                rep.witness, info["h"],
                lambda v: brute_force_P(g, v, rset.members(v), dist),
                info["overflow"].flags)
    return record


def _run_record_mwc_wt(g: Graph, seed: int, opts, verify: bool):
    eps = opts.get("eps")
    if eps is None:
        raise ConfigError("mwc-wt needs eps")
    driver = mwc_directed_weighted if g.directed else mwc_undirected_weighted
    log = RoundLog()
    value, _, info = driver(g, eps, seed, sample_p=opts.get("sample_p"),
                            log=log, details=True)
    return {"value": value, "rounds": log.total_rounds(),
            "sample_size": len(info["sample"].members),
            "overflow_size": None, "case": None}


_RUNNERS = {
    "girth": _run_record_girth,
    "mwc-dir": _run_record_mwc_dir,
    "mwc-wt": _run_record_mwc_wt,
}


def _ratio_bound(algorithm: str, eps: float | None, oracle: float) -> float:
    if algorithm == "girth":
        return 2.0 * oracle - 1.0
    if algorithm == "mwc-dir":
        return 2.0 * oracle
    return (2.0 + 2.0 * float(eps)) * oracle


def _graph_from_config(cfg: dict[str, str]) -> Graph:
    if "graph" in cfg:
        return load_graph(cfg["graph"])
    kind = cfg.get("gen.kind")
    if kind is None:
        raise ConfigError("config needs either graph= or a [gen] section")
    seed = int(cfg.get("gen.seed", default_seed()))
    n = cfg.get("gen.n")
    if n is None:
        raise ConfigError("inline generation needs gen.n")
    n = int(n)
    directed = parse_bool(cfg.get("gen.directed", "false"), "gen.directed")
    if kind == "random":
        if "gen.avg_degree" not in cfg:
            raise ConfigError("inline generation needs gen.avg_degree")
        return gen_random(n, float(cfg["gen.avg_degree"]), directed=directed,
                          W=int(cfg.get("gen.W", 1)), seed=seed,
                          connected=parse_bool(cfg.get("gen.connected", "false"),
                                               "gen.connected"))
    if kind == "planted":
        g, _ = gen_planted_cycle(
            n, int(cfg["gen.cycle_len"]), int(cfg["gen.cycle_weight"]),
            directed=directed, seed=seed,
            extra_avg_deg=float(cfg.get("gen.extra_avg_deg", 0.0)))
        return g
    raise ConfigError(f"unknown inline generator kind {kind!r}")


def _add_run_parser(sub) -> None:
    p = sub.add_parser("run", help="batch of seeded runs from a config file")
    p.add_argument("config", help="flat key=value config file")
    p.set_defaults(handler=lambda args: cmd_run(args.config))

    q = sub.add_parser("verify", help="run with oracle checks forced on")
    q.add_argument("config", help="flat key=value config file")
    q.set_defaults(handler=lambda args: cmd_run(args.config, force_verify=True))


def cmd_run(config_path: str, force_verify: bool = False) -> int:
    cfg = parse_config(config_path)
    algorithm = cfg.get("algorithm")
    if algorithm not in RUN_ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {RUN_ALGORITHMS}, got {algorithm!r}")
    seeds = parse_seeds(cfg.get("seeds", ""))
    verify = force_verify or parse_bool(cfg.get("verify", "off"), "verify")
    g = _graph_from_config(cfg)

    opts: dict = {}
    if "eps" in cfg:
        opts["eps"] = float(cfg["eps"])
        if opts["eps"] <= 0:
            raise ConfigError(f"eps must be positive, got {cfg['eps']}")
    if "sample_p" in cfg:
        opts["sample_p"] = float(cfg["sample_p"])
    for key in ("h", "rho", "phase_cap_factor"):
        if key in cfg:
            opts[key] = int(cfg[key])

    oracle = exact_mwc(g).weight if verify else None
    records = []
    violations = 0
    runner = _RUNNERS[algorithm]
    for seed in seeds:
        record = {"seed": seed}
        record.update(runner(g, seed, opts, verify))
        if verify:
            value = record["value"]
            record["oracle"] = oracle
            record["ratio"] = ratio_of(value, oracle)
            ok = (value == oracle if math.isinf(oracle)
                  else oracle <= value <= _ratio_bound(algorithm, opts.get("eps"), oracle) + 1e-9)
            record["ok"] = ok
            violations += not ok
        else:
            record["oracle"] = record["ratio"] = None
        records.append(record)
        shown = jsonable(record.get("ratio"))
        print(f"seed {seed}: value {jsonable(record['value'])}"
              f" rounds {record['rounds']}"
              + (f" ratio {shown}" if verify else ""), file=sys.stderr)

    doc = {"algorithm": algorithm, "config": cfg, "seeds": list(seeds),
           "version": __version__, "records": records, "violations": violations}
    write_json(doc, cfg.get("out"))
    if verify:
        print("PASS" if violations == 0 else f"FAIL ({violations} violations)",
              file=sys.stderr)
    return 1 if violations else 0


# ---------------------------------------------------------------------------
# sweep


def _sweep_job(algorithm: str, n: int, args, graph_seed: int):
    if algorithm == "girth":
        g = gen_random(n, args.avg_degree, seed=graph_seed, connected=True)
        return g, lambda seed, log: girth_approx(g, seed, log=log)
    if algorithm == "mwc-dir":
        g = gen_random(n, args.avg_degree, directed=True, seed=graph_seed,
                       connected=True)
        return g, lambda seed, log: mwc_directed_unweighted(g, seed, log=log)
    g = gen_random(n, args.avg_degree, W=args.W, seed=graph_seed, connected=True)
    return g, lambda seed, log: mwc_undirected_weighted(g, args.eps, seed, log=log)


def _add_sweep_parser(sub) -> None:
    p = sub.add_parser("sweep", help="round growth over sizes, CSV output")
    p.add_argument("--algorithm", choices=RUN_ALGORITHMS, required=True)
    p.add_argument("--sizes", required=True, help="comma list, at least 3 distinct")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--avg-degree", type=float, default=3.0)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--W", type=int, default=8)
    p.add_argument("--graph-seed", type=int, default=None)
    p.add_argument("--out", help="CSV path (stdout when absent)")
    p.set_defaults(handler=cmd_sweep)


def fit_exponent(sizes, rounds) -> float:
    """Log-log slope of rounds against n after dividing out ``log2(n)**3``."""
    xs = np.log(np.asarray(sizes, dtype=float))
    normalized = np.asarray(rounds, dtype=float) / np.log2(sizes) ** 3
    slope, _ = np.polyfit(xs, np.log(normalized), 1)
    return float(slope)


def cmd_sweep(args) -> int:
    sizes = sorted(set(int(p) for p in args.sizes.split(",") if p.strip()))
    if len(sizes) < 3:
        raise ConfigError("need >= 3 distinct sizes")
    seeds = parse_seeds(args.seeds)
    graph_seed = args.graph_seed if args.graph_seed is not None else default_seed()

    rows = []
    medians = []
    for idx, n in enumerate(sizes):
        g, job = _sweep_job(args.algorithm, n, args, graph_seed + idx)
        counts = []
        for seed in seeds:
            log = RoundLog()
            job(seed, log)
            counts.append(log.total_rounds())
        med = float(np.median(counts))
        medians.append(med)
        rows.append([n, undirected_diameter(g), med])
        print(f"n={n}: median rounds {med:.0f}", file=sys.stderr)

    exponent = fit_exponent(sizes, medians)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["n", "D", "median_rounds", "fitted_exponent"])
        for row in rows:
            writer.writerow(row + [f"{exponent:.4f}"])
    finally:
        if args.out:
            out.close()
    return 0


# ---------------------------------------------------------------------------
# sssp


def _add_sssp_parser(sub) -> None:
    p = sub.add_parser("sssp", help="multi-source shortest paths on a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--sources", required=True,
                   help="a bare count, or an explicit comma list of vertices")
    p.add_argument("--mode", choices=("exact", "approx", "small-k"), default="exact")
    p.add_argument("--provider", choices=("exact-shortcut", "null"),
                   default="exact-shortcut")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--digest-only", action="store_true",
                   help="suppress the distance table, keep its digest")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_sssp)


def _parse_sources(text: str, n: int, seed: int) -> tuple[int, ...]:
    if "," in text:
        srcs = tuple(sorted(int(p) for p in text.split(",") if p.strip()))
    else:
        try:
            k = int(text)
        except ValueError:
            raise ConfigError(f"sources must be a count or a comma list, got {text!r}")
        if not 1 <= k <= n:
            raise ConfigError(f"source count {k} out of range for n={n}")
        rng = np.random.default_rng(seed)
        srcs = tuple(sorted(int(v) for v in rng.permutation(n)[:k]))
    for s in srcs:
        if not 0 <= s < n:
            raise ConfigError(f"source vertex {s} out of range for n={n}")
    if not srcs:
        raise ConfigError("empty source list")
    return srcs


def cmd_sssp(args) -> int:
    g = load_graph(args.graph)
    seed = args.seed if args.seed is not None else default_seed()
    sources = _parse_sources(args.sources, g.n, seed)
    log = RoundLog()
    if args.mode == "exact":
        table, log = ksource_bfs_exact(g, sources, seed=seed, log=log)
    elif args.mode == "approx":
        table, log = ksource_sssp_approx(g, sources, args.eps, seed=seed, log=log)
    else:
        table, log = ksource_small_k(g, sources, args.eps,
                                     provider=args.provider, seed=seed, log=log)
    # integer tables mark unreachable with the INT_INF sentinel
    raw = np.asarray(table.dist, dtype=float)
    dist = jsonable(np.where(raw >= float(INT_INF), math.inf, raw))
    digest = hashlib.sha256(
        json.dumps(dist, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    doc = {
        "mode": args.mode, "eps": args.eps if args.mode != "exact" else None,
        "provider": args.provider if args.mode == "small-k" else None,
        "sources": list(sources), "n": g.n, "seed": seed,
        "rounds": log.total_rounds(), "words": log.words,
        "digest": digest, "version": __version__,
    }
    if not args.digest_only:
        doc["dist"] = dist
    write_json(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# mwc-dir


def _add_mwc_dir_parser(sub) -> None:
    p = sub.add_parser("mwc-dir", help="directed cycle approximation on a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--phase-cap-factor", type=int, default=8)
    p.add_argument("--witness", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_mwc_dir)


def cmd_mwc_dir(args) -> int:
    g = load_graph(args.graph)
    if not g.directed:
        raise ConfigError("mwc-dir needs a directed graph")
    if not _is_unit_weight(g):
        raise ConfigError("mwc-dir needs unit weights; use mwc-wt for weighted input")
    seed = args.seed if args.seed is not None else default_seed()
    log = RoundLog()
    mu, _, info = mwc_directed_unweighted(
        g, seed, phase_cap_factor=args.phase_cap_factor,
        witness=args.witness, log=log, details=True)
    oracle = exact_mwc(g).weight
    doc = {
        "mu": mu, "oracle": oracle, "ratio": ratio_of(mu, oracle),
        "rounds": log.total_rounds(),
        "sample_size": len(info["sample"].members),
        "overflow_size": len(info["overflow"].Z),
        "witness": list(info["witness"]) if info["witness"] is not None else None,
        "seed": seed, "version": __version__,
    }
    write_json(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# girth


def _add_girth_parser(sub) -> None:
    p = sub.add_parser("girth", help="girth approximation on a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seeds", help="comma list; overrides --seed")
    p.add_argument("--hop-bound", type=int,
                   help="restrict to cycles of at most this many hops")
    p.add_argument("--host-weighted", action="store_true",
                   help="treat weights as hop counts via stretching")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_girth)


def cmd_girth(args) -> int:
    g = load_graph(args.graph)
    if g.directed:
        raise ConfigError("girth needs an undirected graph; use mwc-dir")
    hop_limited = args.hop_bound is not None or args.host_weighted
    if not hop_limited and not _is_unit_weight(g):
        raise ConfigError("weighted input needs --host-weighted or --hop-bound")
    if args.seeds:
        seeds = parse_seeds(args.seeds)
    else:
        seeds = (args.seed if args.seed is not None else default_seed(),)

    parts = [c for c in components_of(g) if c.m > 0]
    histogram: dict[str, int] = {}
    per_seed = []
    oracle = math.inf
    for comp in parts:
        if hop_limited:
            h = args.hop_bound
            if h is None:
                h = comp.n * comp.max_weight
            got = hop_limited_mwc_oracle(stretch_graph(comp).graph, min(h, comp.n * comp.max_weight))
        else:
            got = exact_mwc(comp).weight
        oracle = min(oracle, got)

    for seed in seeds:
        value = math.inf
        rounds = 0
        for comp in parts:
            log = RoundLog()
            if hop_limited:
                h = args.hop_bound
                if h is None:
                    h = comp.n * comp.max_weight
                got, _ = hop_limited_mwc(comp, h, seed, log=log)
            else:
                got, _, info = girth_approx(comp, seed, log=log, details=True)
                rep = exact_mwc(comp)
                if rep.witness is not None:
                    near = info["near"]
                    label = classify_girth_case(
                        rep.witness, lambda v: set(near.members(v))
                    )
                    histogram[label] = histogram.get(label, 0) + 1
            value = min(value, got)
            rounds = max(rounds, log.total_rounds())
        per_seed.append({"seed": seed, "M": value, "rounds": rounds})

    values = [r["M"] for r in per_seed]
    best = min(values) if values else math.inf
    doc = {
        "M": best, "oracle": oracle, "ratio": ratio_of(best, oracle),
        "case_histogram": dict(sorted(histogram.items())),
        "rounds": max((r["rounds"] for r in per_seed), default=0),
        "per_seed": per_seed, "components": len(parts),
        "hop_bound": args.hop_bound, "version": __version__,
    }
    write_json(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# mwc-wt


def _add_mwc_wt_parser(sub) -> None:
    p = sub.add_parser("mwc-wt", help="weighted cycle approximation on a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--W", type=int, help="reject graphs with weights above this")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_mwc_wt)


def cmd_mwc_wt(args) -> int:
    g = load_graph(args.graph)
    if g.directed != args.directed:
        have = "directed" if g.directed else "undirected"
        raise ConfigError(f"graph is {have} but the --directed flag says otherwise")
    if args.W is not None and g.max_weight > args.W:
        raise ConfigError(f"graph weight {g.max_weight} exceeds the stated bound {args.W}")
    seed = args.seed if args.seed is not None else default_seed()
    driver = mwc_directed_weighted if g.directed else mwc_undirected_weighted
    log = RoundLog()
    value, _, info = driver(g, args.eps, seed, log=log, details=True)
    oracle = exact_mwc(g).weight
    doc = {
        "M": value, "oracle": oracle, "ratio": ratio_of(value, oracle),
        "per_level_M": list(info["per_level"]),
        "rounds": log.total_rounds(),
        "eps": args.eps, "seed": seed, "version": __version__,
    }
    write_json(doc, args.out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="congest-mwc",
        description="Round-synchronous cycle approximation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_gen_parser(sub)
    _add_run_parser(sub)
    _add_sweep_parser(sub)
    _add_sssp_parser(sub)
    _add_mwc_dir_parser(sub)
    _add_girth_parser(sub)
    _add_mwc_wt_parser(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
