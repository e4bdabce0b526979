"""Directed cycle approximation through sampled landmark vertices.

Long cycles are closed through a sampled vertex set using exact
multi-source BFS.  Short cycles are hunted by a search that every vertex
restricts to a target neighborhood certified against its landmark
subset, with per-phase congestion caps; a vertex that would relay more
than its cap in one phase is cut out of the search and swept up
afterwards by a plain hop-capped BFS from all such vertices.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .engine import RoundLog
from .graphs import Graph, reverse_graph
from .multisource import SampleSet, ksource_bfs_exact, sample_vertices
from .primitives import (
    INT_INF,
    DistanceTable,
    broadcast,
    convergecast,
    multi_bfs,
    neighbor_exchange,
    tree_build_rounds,
)

__all__ = [
    "CycleEstimate",
    "OverflowState",
    "RSet",
    "build_R",
    "build_R_all",
    "ceil_power",
    "mwc_directed_unweighted",
    "partition_sample",
    "restricted_bfs",
    "short_cycle_subroutine",
]

INF = math.inf

# how a vertex found its best cycle: closing edge into a sampled vertex,
# a restricted-search distance, or the sweep over cut-out vertices
_LONG, _RESTRICTED, _SWEPT = 1, 2, 3


def _account(log: RoundLog | None, stage: str, rounds: int, words: int,
             trace: list) -> RoundLog:
    piece = RoundLog()
    piece.add_stage(stage, rounds, words, trace)
    if log is not None:
        log.add_stage(stage, rounds, words, trace)
    return piece


def ceil_power(n: int, num: int, den: int) -> int:
    """Smallest integer at least n**(num/den), decided in exact integers."""
    if n < 1 or num < 0 or den < 1:
        raise ValueError(f"need n >= 1, num >= 0, den >= 1, got {(n, num, den)}")
    target = n ** num
    r = max(int(round(target ** (1.0 / den))), 0)
    while r ** den < target:
        r += 1
    while r > 1 and (r - 1) ** den >= target:
        r -= 1
    return r


@dataclass(frozen=True)
class RSet:
    """Per-vertex landmark subsets over the sample, with the group split.

    ``chosen[v]`` lists sample-local indices in pick order, at most one
    per group; ``dist_to[v]`` carries the matching distances from v.
    """

    sample: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]
    chosen: tuple[tuple[int, ...], ...]
    dist_to: tuple[tuple[float, ...], ...]

    @property
    def beta(self) -> int:
        return len(self.groups)

    def members(self, v: int) -> tuple[int, ...]:
        """The subset for vertex v as graph vertex ids."""
        return tuple(self.sample[j] for j in self.chosen[v])


def partition_sample(k: int, beta: int) -> tuple[tuple[int, ...], ...]:
    """Round-robin split of sample indices 0..k-1 into beta groups."""
    if beta < 1:
        raise ValueError(f"need at least one group, got {beta}")
    if k < 0:
        raise ValueError(f"negative sample size {k}")
    return tuple(tuple(range(i, k, beta)) for i in range(beta))


def build_R(v: int, groups, to_sample_row, pair, rng) -> tuple[tuple, tuple]:
    """One vertex's landmark subset, grown one group at a time.

    A group member is eligible while every landmark already chosen fails
    to dominate it: with s the candidate and t chosen,
    ``d(s,t) + 2 d(v,s) <= d(t,s) + 2 d(v,t)`` must hold.  An infinite
    left side fails, an infinity confined to the right side passes, and
    candidates the vertex cannot reach are never eligible.  A uniform
    index into the eligible list (ascending ids) is drawn from ``rng``,
    the node's own stream.  Returns (chosen indices, distances from v).
    """
    chosen: list[int] = []
    dists: list[float] = []
    for grp in groups:
        elig: list[int] = []
        for j in grp:
            dvs = float(to_sample_row[j])
            if not math.isfinite(dvs):
                continue
            ok = True
            for c, dvt in zip(chosen, dists):
                lhs = pair[j, c] + 2.0 * dvs
                rhs = pair[c, j] + 2.0 * dvt
                if not (math.isfinite(lhs) and lhs <= rhs):
                    ok = False
                    break
            if ok:
                elig.append(j)
        if elig:
            pick = elig[int(rng.integers(0, len(elig)))]
            chosen.append(pick)
            dists.append(float(to_sample_row[pick]))
    return tuple(chosen), tuple(dists)


def build_R_all(sample, to_sample, pair, seed: int = 0) -> RSet:
    """Landmark subsets for every vertex; local computation, zero rounds."""
    to_sample = np.asarray(to_sample, dtype=np.float64)
    pair = np.asarray(pair, dtype=np.float64)
    n, k = to_sample.shape
    members = tuple(int(s) for s in sample)
    if len(members) != k or pair.shape != (k, k):
        raise ValueError("sample distance inputs disagree on the sample size")
    beta = max(1, math.ceil(math.log2(max(n, 2))))
    groups = partition_sample(k, beta)
    chosen = []
    dist_to = []
    for v in range(n):
        rng = np.random.default_rng([seed, v])
        c, d = build_R(v, groups, to_sample[v], pair, rng)
        chosen.append(c)
        dist_to.append(d)
    return RSet(members, groups, tuple(chosen), tuple(dist_to))


@dataclass
class OverflowState:
    """Which vertices tripped a per-phase cap, and what each phase accepted.

    ``flags[v]`` marks a cut-out vertex; ``reason[v]`` is "receive" (too
    many words over one link) or "sources" (too many new sources at
    once).  ``first_time[(r, v)]`` lists the sources first accepted by v
    in phase r.
    """

    flags: np.ndarray
    phase_flagged: np.ndarray
    reason: dict
    first_time: dict
    phases: int
    cap: int
    delays: np.ndarray

    @property
    def Z(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.flatnonzero(self.flags))


def _forward_slack(rset: RSet, to_sample, from_sample) -> np.ndarray:
    """Per (source, target): the largest doubled distance the target's
    certificate tolerates, -inf when the target can never qualify."""
    n = to_sample.shape[0]
    th = np.full((n, n), INF)
    for v in range(n):
        cols = np.asarray(rset.chosen[v], dtype=np.int64)
        if cols.size == 0:
            continue
        dvt = np.asarray(rset.dist_to[v], dtype=np.float64)
        a = to_sample[:, cols]
        b = from_sample[:, cols] + 2.0 * dvt
        with np.errstate(invalid="ignore"):
            diff = b - a
        diff = np.where(np.isnan(diff), -INF, diff)
        margin = diff.min(axis=1)
        margin[~np.isfinite(a).all(axis=1)] = -INF
        th[v] = margin
    return th


def restricted_bfs(g: Graph, rset: RSet, to_sample, from_sample, h, rho,
                   phase_cap_factor: int = 8, seed: int = 0, delays=None,
                   log: RoundLog | None = None, stage: str = "restricted_bfs"):
    """Hop-capped search from every vertex, confined to certified targets.

    Runs exactly ceil(h) + ceil(rho) phases.  Each source starts after a
    delay drawn from {1..rho}, a message advances one hop per phase, and
    every message is priced at 2*beta+1 words sent consecutively.  A
    sender relays a source to a neighbor only when the neighbor's
    certificate admits the advanced distance.  A vertex receiving more
    than cap = phase_cap_factor * ceil(log2 n) messages over one link in
    a phase, or accepting more than cap new sources in a phase, is
    flagged and stops participating; its recorded distances stand.
    Returns (DistanceTable, OverflowState, RoundLog piece); overflow is
    data, not failure.
    """
    to_sample = np.asarray(to_sample, dtype=np.float64)
    from_sample = np.asarray(from_sample, dtype=np.float64)
    n = g.n
    k = len(rset.sample)
    if to_sample.shape != (n, k) or from_sample.shape != (n, k):
        raise ValueError("sample distance inputs disagree with the graph")
    h_int = int(math.ceil(h))
    rho_int = int(math.ceil(rho))
    if h_int < 1 or rho_int < 1:
        raise ValueError(f"need h >= 1 and rho >= 1, got {(h, rho)}")
    if phase_cap_factor < 1:
        raise ValueError(f"cap factor must be at least 1, got {phase_cap_factor}")
    phases = h_int + rho_int
    cap = phase_cap_factor * max(1, math.ceil(math.log2(max(n, 2))))
    msg_words = 2 * rset.beta + 1

    rng = np.random.default_rng(seed)
    delta = rng.integers(1, rho_int + 1, size=n).astype(np.int64)
    if delays is not None:
        for v, d in delays.items():
            v, d = int(v), int(d)
            if not 0 <= v < n:
                raise ValueError(f"delay for unknown vertex {v}")
            if not 1 <= d <= rho_int:
                raise ValueError(f"delay {d} outside 1..{rho_int}")
            delta[v] = d
    fires: dict[int, list[int]] = defaultdict(list)
    for v in range(n):
        fires[int(delta[v])].append(v)

    th = _forward_slack(rset, to_sample, from_sample)
    outn = g.out_neighbors
    dist = np.full((n, n), INT_INF, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    parent = np.full((n, n), -1, dtype=np.int64)
    flags = np.zeros(n, dtype=bool)
    phase_flagged = np.full(n, -1, dtype=np.int64)
    reason: dict[int, str] = {}
    first_time: dict[tuple[int, int], tuple[int, ...]] = {}

    rounds = 0
    words = 0
    trace: list[int] = []
    inbox: list[tuple[int, int, int, int]] = []
    for r in range(1, phases + 1):
        sends: list[tuple[int, int, int, int]] = []
        per_recv: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
        for u, src, dstar, x in inbox:
            per_recv[u].append((src, dstar, x))
        for u in sorted(per_recv):
            if flags[u]:
                continue
            msgs = per_recv[u]
            worst = max(Counter(x for _, _, x in msgs).values())
            if worst > cap:
                flags[u] = True
                phase_flagged[u] = r
                reason[u] = "receive"
                continue
            accepted: list[int] = []
            for src, dstar, x in sorted(msgs):
                if dist[u, src] != INT_INF:
                    continue
                dist[u, src] = dstar
                parent[u, src] = x
                accepted.append(src)
            if accepted:
                first_time[(r, u)] = tuple(accepted)
            if len(accepted) > cap:
                flags[u] = True
                phase_flagged[u] = r
                reason[u] = "sources"
                continue
            for src in accepted:
                nd = int(dist[u, src]) + 1
                if nd > h_int:
                    continue
                nbrs = outn[u]
                if nbrs.size == 0:
                    continue
                for w in nbrs[th[src, nbrs] >= 2.0 * nd]:
                    sends.append((int(w), src, nd, u))
        for v in fires.get(r, ()):
            if flags[v]:
                continue
            nbrs = outn[v]
            if nbrs.size == 0:
                continue
            for w in nbrs[th[v, nbrs] >= 2.0]:
                sends.append((int(w), v, 1, v))
        if sends:
            loads = Counter((x, u) for u, _, _, x in sends)
            vals = np.fromiter(loads.values(), dtype=np.int64)
            words += msg_words * len(sends)
            lmax = int(vals.max())
            rounds += msg_words * lmax
            for q in range(1, lmax + 1):
                trace.extend([int((vals >= q).sum())] * msg_words)
        inbox = sends

    fdist = np.where(dist == INT_INF, INF, dist.astype(np.float64))
    table = DistanceTable(tuple(range(n)), fdist, fdist, parent, "parent")
    overflow = OverflowState(flags, phase_flagged, reason, first_time,
                             phases, cap, delta)
    piece = _account(log, stage, rounds, words, trace)
    return table, overflow, piece


@dataclass
class CycleEstimate:
    """Per-vertex best cycle weight, optionally with vertex-list witnesses."""

    mu: np.ndarray
    witness: dict | None = None

    def best(self):
        v = int(np.argmin(self.mu))
        val = float(self.mu[v])
        if not math.isfinite(val):
            return INF, None
        return val, None if self.witness is None else self.witness.get(v)


def _in_lists(g: Graph) -> list[list[int]]:
    ins: list[list[int]] = [[] for _ in range(g.n)]
    for u, v, _ in g.edges:
        ins[v].append(u)
    return [sorted(s) for s in ins]


def _greedy_walk(ins, dcol, target: int) -> list[int]:
    """Source-to-target path read off an exact distance column."""
    seq = [int(target)]
    cur = int(target)
    while dcol[cur] > 0:
        for x in ins[cur]:
            if dcol[x] == dcol[cur] - 1:
                cur = x
                break
        else:
            raise RuntimeError("distance column admits no predecessor")
        seq.append(cur)
    seq.reverse()
    return seq


def _parent_walk(tags, src_col: int, src: int, target: int) -> list[int]:
    """Source-to-target path read off recorded delivery parents."""
    seq = [int(target)]
    cur = int(target)
    while cur != src:
        cur = int(tags[cur, src_col])
        if cur < 0 or len(seq) > len(tags):
            raise RuntimeError("broken parent chain")
        seq.append(cur)
    seq.reverse()
    return seq


def short_cycle_subroutine(g: Graph, sample, to_sample, from_sample, pair,
                           seed: int = 0, h=None, rho=None,
                           phase_cap_factor: int = 8,
                           log: RoundLog | None = None,
                           details: bool = False):
    """Per-vertex estimates over short cycles that miss the sample.

    Shares each vertex's sample distances with its neighbors, builds the
    landmark subsets locally, runs the restricted search, sweeps the
    flagged vertices with a hop-capped BFS, and closes every recorded
    distance with the edge back into its source.  Returns (mu array,
    OverflowState) and with ``details`` a third dict carrying the inner
    tables.
    """
    log = RoundLog() if log is None else log
    n = g.n
    h_int = ceil_power(n, 3, 5) if h is None else int(math.ceil(h))
    rho_int = ceil_power(n, 4, 5) if rho is None else int(math.ceil(rho))
    rset = build_R_all(sample, to_sample, pair, seed)
    if len(rset.sample):
        neighbor_exchange(g, 2 * len(rset.sample), log, stage="neighbor_share")
    table, overflow, _ = restricted_bfs(
        g, rset, to_sample, from_sample, h_int, rho_int,
        phase_cap_factor=phase_cap_factor, seed=seed, log=log)

    mu = np.full(n, INF)
    partner = np.full(n, -1, dtype=np.int64)
    kind = np.zeros(n, dtype=np.int8)
    ztable = None
    zs = overflow.Z
    if zs:
        ztable, _ = multi_bfs(g, list(zs), hop_bound=h_int,
                              record_tag="parent", log=log,
                              stage="overflow_bfs")
        zcol = {s: i for i, s in enumerate(ztable.sources)}
        for x, v, _ in g.edges:
            i = zcol.get(v)
            if i is None:
                continue
            c = ztable.dist[x, i] + 1.0
            if c < mu[x]:
                mu[x] = c
                partner[x] = v
                kind[x] = _SWEPT
    # close every recorded source distance with the edge back into the
    # source; the data sits at the edge tail, so the update is local
    for y, v, _ in g.edges:
        c = table.dist[y, v] + 1.0
        if c < mu[y]:
            mu[y] = c
            partner[y] = v
            kind[y] = _RESTRICTED

    if details:
        info = {"rset": rset, "table": table, "overflow": overflow,
                "ztable": ztable, "partner": partner, "kind": kind,
                "h": h_int, "rho": rho_int, "cap": overflow.cap}
        return mu, overflow, info
    return mu, overflow


def mwc_directed_unweighted(g: Graph, seed: int = 0, *, sample_p=None,
                            sample_override=None, h=None, rho=None,
                            phase_cap_factor: int = 8, witness: bool = False,
                            log: RoundLog | None = None,
                            details: bool = False,
                            cast_host: Graph | None = None,
                            cast_owner=None, value_cap=None):
    """Factor-2 estimate of the minimum directed cycle length.

    Samples a vertex set, computes exact distances to and from it, closes
    cycles through sampled vertices locally, and covers the remaining
    short cycles with the restricted search.  The result is between the
    minimum cycle length and twice it, infinite exactly when the graph
    is acyclic.  ``sample_p``, ``sample_override``, ``h``, ``rho``, and
    ``phase_cap_factor`` override the built-in parameters; ``witness``
    additionally reconstructs a cycle attaining the estimate, doubling
    the message-stage word charge for the carried tags.

    When ``g`` subdivides the edges of a host graph, ``cast_host`` and
    ``cast_owner`` (per-vertex owning host vertex) price the spanning
    tree and the final aggregation on the host, whose links simulate the
    subdivided ones; ``value_cap`` discards local estimates above the
    cap before aggregation.
    """
    if not g.directed:
        raise ValueError("needs a directed graph")
    if g.weighted:
        raise ValueError("needs an unweighted graph")
    if g.n < 2:
        raise ValueError(f"needs at least 2 vertices, got {g.n}")
    if (cast_host is None) != (cast_owner is None):
        raise ValueError("cast_host and cast_owner go together")
    log = RoundLog() if log is None else log
    mark_rounds, mark_words, mark_trace = log.rounds, log.words, len(log.trace)
    n = g.n
    h_int = ceil_power(n, 3, 5) if h is None else int(math.ceil(h))
    rho_int = ceil_power(n, 4, 5) if rho is None else int(math.ceil(rho))

    if sample_override is not None:
        members = tuple(sorted({int(v) for v in sample_override}))
        for s in members:
            if not 0 <= s < n:
                raise ValueError(f"sampled vertex {s} out of range")
        sample = SampleSet(members, -1.0, int(seed))
    else:
        p = (min(1.0, 3 * math.log2(n) ** 3 / h_int)
             if sample_p is None else float(sample_p))
        sample = sample_vertices(n, p, seed)
    k = len(sample)

    tree_build_rounds(g if cast_host is None else cast_host, log)
    mu_local = np.full(n, INF)
    partner = np.full(n, -1, dtype=np.int64)
    kind = np.zeros(n, dtype=np.int8)
    scol = {s: j for j, s in enumerate(sample.members)}
    if k:
        if k ** 3 >= n:
            fwd, _ = ksource_bfs_exact(g, sample.members, seed=seed, log=log)
            rev, _ = ksource_bfs_exact(reverse_graph(g), sample.members,
                                       seed=seed, log=log)
        else:
            # below the stitching cutoff a plain full-depth search stays
            # exact and the round count is simply larger
            fwd, _ = multi_bfs(g, sample.members, hop_bound=n, log=log,
                               stage="sample_bfs")
            rev, _ = multi_bfs(g, sample.members, hop_bound=n,
                               direction="reverse", log=log,
                               stage="sample_bfs")
        from_sample = fwd.dist
        to_sample = rev.dist
        # close a cycle through each sampled head: the edge plus the
        # return distance, both known at the tail
        for u, v, _ in g.edges:
            j = scol.get(v)
            if j is None:
                continue
            c = 1.0 + from_sample[u, j]
            if c < mu_local[u]:
                mu_local[u] = c
                partner[u] = v
                kind[u] = _LONG
        sarr = np.array(sample.members, dtype=np.int64)
        pair = from_sample[sarr, :].T
        items = []
        for j, t in enumerate(sample.members):
            for i in range(k):
                if math.isfinite(pair[i, j]):
                    items.append((t, (i, j, int(pair[i, j]))))
        broadcast(g, items, log, stage="pair_broadcast")
    else:
        from_sample = np.zeros((n, 0))
        to_sample = np.zeros((n, 0))
        pair = np.zeros((0, 0))

    sc_mu, overflow, sc = short_cycle_subroutine(
        g, sample.members, to_sample, from_sample, pair, seed=seed,
        h=h_int, rho=rho_int, phase_cap_factor=phase_cap_factor,
        log=log, details=True)
    better = sc_mu < mu_local
    mu_local[better] = sc_mu[better]
    partner[better] = sc["partner"][better]
    kind[better] = sc["kind"][better]

    if value_cap is not None:
        over = mu_local > float(value_cap)
        mu_local[over] = INF
        partner[over] = -1
        kind[over] = 0

    witnesses: dict[int, tuple[int, ...]] = {}
    if witness:
        ins = _in_lists(g)
        for v in np.flatnonzero(np.isfinite(mu_local)):
            v = int(v)
            other = int(partner[v])
            if kind[v] == _LONG:
                walk = _greedy_walk(ins, from_sample[:, scol[other]], v)
                cyc = (v,) + tuple(walk[:-1])
            elif kind[v] == _SWEPT:
                zcol = {s: i for i, s in enumerate(sc["ztable"].sources)}
                walk = _parent_walk(sc["ztable"].tag, zcol[other], other, v)
                cyc = tuple(walk)
            else:
                walk = _parent_walk(sc["table"].tag, other, other, v)
                cyc = tuple(walk)
            witnesses[v] = cyc
        log.add_stage("witness_tags", log.rounds - mark_rounds,
                      log.words - mark_words, list(log.trace[mark_trace:]))

    estimate = CycleEstimate(mu_local, witnesses if witness else None)
    if cast_owner is not None:
        agg = np.full(cast_host.n, INF)
        np.minimum.at(agg, np.asarray(cast_owner, dtype=np.int64), mu_local)
        best, _ = convergecast(cast_host, [float(x) for x in agg], min, log,
                               stage="mu_convergecast")
    else:
        best, _ = convergecast(g, [float(x) for x in mu_local], min, log,
                               stage="mu_convergecast")
    mu = int(best) if math.isfinite(best) else INF

    if details:
        info = {"sample": sample, "h": h_int, "rho": rho_int,
                "cap": sc["cap"], "beta": sc["rset"].beta,
                "estimate": estimate, "mu_local": mu_local,
                "rset": sc["rset"], "overflow": overflow,
                "restricted": sc["table"], "swept": sc["ztable"],
                "to_sample": to_sample, "from_sample": from_sample,
                "pair": pair, "kind": kind, "partner": partner,
                "witness": estimate.best()[1]}
        return mu, log, info
    return mu, log
