"""Shared communication primitives over the round-synchronous engine.

Each primitive simulates its own round-by-round schedule with explicit
word accounting (one word per link per round, links on the undirected
support) and returns a RoundLog piece; pass ``log`` to also accumulate
into a run-wide log.  The heavy primitives are vectorized over links but
keep lockstep semantics: what is sent in round r is usable in round r+1.
"""

from __future__ import annotations

import math
from bisect import insort
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse.csgraph import breadth_first_order

from .engine import CongestionViolation, RoundLog
from .graphs import Graph

__all__ = [
    "INT_INF",
    "BcastTree",
    "DistanceTable",
    "NearTable",
    "bcast_tree",
    "broadcast",
    "convergecast",
    "directed_links",
    "multi_bfs",
    "neighbor_exchange",
    "random_delay_schedule",
    "source_detection",
]

INT_INF = np.iinfo(np.int32).max


def _account(log: RoundLog | None, stage: str, rounds: int, words: int,
             trace: list) -> RoundLog:
    piece = RoundLog()
    piece.add_stage(stage, rounds, words, trace)
    if log is not None:
        log.add_stage(stage, rounds, words, trace)
    return piece


def directed_links(g: Graph, direction: str = "forward"):
    """(tails, heads) arrays of one-way links messages travel along."""
    e = g.edge_array
    if not g.directed:
        if direction != "forward":
            raise ValueError("reverse direction needs a directed graph")
        tails = np.concatenate([e[:, 0], e[:, 1]])
        heads = np.concatenate([e[:, 1], e[:, 0]])
    elif direction == "forward":
        tails, heads = e[:, 0].copy(), e[:, 1].copy()
    elif direction == "reverse":
        tails, heads = e[:, 1].copy(), e[:, 0].copy()
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return tails.astype(np.int64), heads.astype(np.int64)


@dataclass(frozen=True)
class BcastTree:
    """BFS tree of the undirected support rooted at vertex 0."""

    parent: np.ndarray
    depth: np.ndarray
    children: tuple
    height: int

    @property
    def n(self) -> int:
        return len(self.parent)


@lru_cache(maxsize=64)
def bcast_tree(g: Graph) -> BcastTree:
    order, pred = breadth_first_order(
        g.underlying_csr, 0, directed=False, return_predecessors=True
    )
    if len(order) != g.n:
        raise ValueError("disconnected support: no spanning broadcast tree")
    parent = np.asarray(pred, dtype=np.int64)
    parent[0] = -1
    depth = np.zeros(g.n, dtype=np.int64)
    for v in order[1:]:
        depth[v] = depth[parent[v]] + 1
    kids: list[list[int]] = [[] for _ in range(g.n)]
    for v in range(1, g.n):
        kids[parent[v]].append(v)
    children = tuple(np.array(sorted(c), dtype=np.int64) for c in kids)
    return BcastTree(parent, depth, children, int(depth.max()))


def tree_build_rounds(g: Graph, log: RoundLog | None = None) -> RoundLog:
    """Account the one-time flood that builds the broadcast tree."""
    t = bcast_tree(g)
    rounds = t.height
    links = 2 * g.m
    return _account(log, "tree_build", rounds, links if rounds else 0,
                    [links // max(rounds, 1)] * rounds)


def broadcast(g: Graph, items: list, log: RoundLog | None = None,
              stage: str = "broadcast"):
    """Deliver every (origin, payload) item to all nodes via the tree.

    Returns (payloads in canonical order, RoundLog piece).  Rounds are
    measured by simulating the pipelined up-then-down schedule, one word
    per tree edge per round.
    """
    t = bcast_tree(g)
    gathered = [p for _, _, p in sorted(
        ((int(o), i, p) for i, (o, p) in enumerate(items)),
        key=lambda x: (x[0], x[1]),
    )]
    m_items = len(items)
    pend = np.zeros(g.n, dtype=np.int64)
    for o, _ in items:
        if not 0 <= int(o) < g.n:
            raise ValueError(f"item origin {o} out of range")
        pend[int(o)] += 1
    rounds = 0
    words = 0
    trace: list[int] = []
    # up phase: each non-root node is a unit-service queue on its parent
    # edge; own items are ready in round 1, a child item one round after
    # the child sent it
    send_times: list = [None] * g.n
    for v in np.argsort(-t.depth):
        v = int(v)
        if v == 0:
            continue
        parts = []
        if pend[v]:
            parts.append(np.ones(pend[v], dtype=np.int64))
        for c in t.children[v]:
            if len(send_times[c]):
                parts.append(send_times[c] + 1)
        if not parts:
            send_times[v] = np.zeros(0, dtype=np.int64)
            continue
        a = np.sort(np.concatenate(parts))
        j = np.arange(len(a), dtype=np.int64)
        send_times[v] = np.maximum.accumulate(a - j) + j
    sent = [send_times[v] for v in range(1, g.n) if len(send_times[v])]
    if sent:
        cat = np.concatenate(sent)
        rounds = int(cat.max())
        per = np.bincount(cat, minlength=rounds + 1)[1:]
        words = int(per.sum())
        trace = [int(x) for x in per]
    # down phase: a depth-d node forwards item j to all its children in
    # round d + j, so per-round words are a sliding window over depths
    if m_items:
        child_count = np.array([len(c) for c in t.children], dtype=np.int64)
        internal = child_count > 0
        if internal.any():
            dmax = int(t.depth[internal].max())
            cnt = np.bincount(t.depth[internal],
                              weights=child_count[internal],
                              minlength=dmax + 1).astype(np.int64)
            cum = np.concatenate([[0], np.cumsum(cnt)])
            down_rounds = dmax + m_items
            r = np.arange(1, down_rounds + 1)
            per = cum[np.minimum(r - 1, dmax) + 1] - cum[np.maximum(r - m_items, 0)]
            rounds += down_rounds
            words += int(per.sum())
            trace.extend(int(x) for x in per)
    return gathered, _account(log, stage, rounds, words, trace)


def convergecast(g: Graph, values: list, op=min,
                 log: RoundLog | None = None, stage: str = "convergecast"):
    """Fold all node values with an associative op; all nodes learn it."""
    if len(values) != g.n:
        raise ValueError(f"need one value per node, got {len(values)}")
    t = bcast_tree(g)
    agg = list(values)
    waiting = np.array([len(c) for c in t.children], dtype=np.int64)
    done = np.zeros(g.n, dtype=bool)
    rounds = 0
    words = 0
    trace: list[int] = []
    staged: list[tuple[int, object]] = []
    while True:
        for parent, val in staged:
            agg[parent] = op(agg[parent], val)
            waiting[parent] -= 1
        staged = []
        senders = np.nonzero((waiting == 0) & ~done)[0]
        senders = senders[senders != 0]
        if senders.size == 0:
            break
        rounds += 1
        words += senders.size
        trace.append(int(senders.size))
        done[senders] = True
        staged = [(int(t.parent[v]), agg[v]) for v in senders]
    result = agg[0]
    # downward flood of the single result word
    if g.n > 1:
        depth_rounds = t.height
        per = [int((t.depth == d).sum()) for d in range(1, depth_rounds + 1)]
        rounds += depth_rounds
        words += sum(per)
        trace.extend(per)
    return result, _account(log, stage, rounds, words, trace)


def neighbor_exchange(g: Graph, words_per_edge: int,
                      log: RoundLog | None = None,
                      stage: str = "neighbor_exchange") -> RoundLog:
    """Every node streams the same number of words to each link neighbor."""
    rounds = int(math.ceil(words_per_edge))
    per_round = 2 * g.m
    return _account(log, stage, rounds, rounds * per_round,
                    [per_round] * rounds)


@dataclass(frozen=True)
class DistanceTable:
    """Per-node distances from a source list; INF marks absence.

    ``tag`` meaning depends on ``tag_kind``: "parent" holds the neighbor
    that delivered the final distance, "first-hop" the second vertex on
    the source-side shortest path; -1 where absent.
    """

    sources: tuple
    dist: np.ndarray
    hops: np.ndarray
    tag: np.ndarray | None = None
    tag_kind: str | None = None

    def index_of(self, source: int) -> int:
        return self.sources.index(source)

    def entry(self, v: int, source: int):
        j = self.index_of(source)
        return self.dist[v, j], self.hops[v, j]


def multi_bfs(g: Graph, sources, hop_bound: int | None = None,
              direction: str = "forward", record_tag: str | None = None,
              log: RoundLog | None = None, stage: str = "multi_bfs"):
    """Pipelined BFS from many sources, one (source, dist) word per link
    per round, announcements forwarded in arrival order with id tie-break.

    Returns (DistanceTable, RoundLog piece).  Distances are exact hop
    counts capped at hop_bound; every improvement is re-announced so the
    fixpoint equals sequential BFS.
    """
    if g.weighted:
        raise ValueError("multi_bfs needs an unweighted graph")
    if hop_bound is not None and hop_bound < 1:
        raise ValueError(f"hop bound must be at least 1, got {hop_bound}")
    if record_tag not in (None, "parent", "first-hop"):
        raise ValueError(f"unknown record_tag {record_tag!r}")
    srcs = sorted(int(s) for s in sources)
    if len(set(srcs)) != len(srcs):
        raise ValueError("duplicate sources")
    for s in srcs:
        if not 0 <= s < g.n:
            raise ValueError(f"source {s} out of range")
    k = len(srcs)
    n = g.n
    hop = np.iinfo(np.int64).max if hop_bound is None else int(hop_bound)
    tails, heads = directed_links(g, direction)
    nlinks = len(tails)
    dist = np.full((n, k), INT_INF, dtype=np.int64)
    tag = np.full((n, k), -1, dtype=np.int64) if record_tag else None
    cap = max(k + 8, 16)
    ann = np.full((n, cap), -1, dtype=np.int64)
    alen = np.zeros(n, dtype=np.int64)
    if k:
        sarr = np.array(srcs, dtype=np.int64)
        dist[sarr, np.arange(k)] = 0
        ann[sarr, 0] = np.arange(k)
        alen[sarr] = 1
    ptr = np.zeros(nlinks, dtype=np.int64)
    rounds = 0
    words = 0
    trace: list[int] = []
    while True:
        active = ptr < alen[tails]
        if not active.any():
            break
        rounds += 1
        es = np.nonzero(active)[0]
        t_v = tails[es]
        s_i = ann[t_v, ptr[es]]
        d = dist[t_v, s_i]
        ptr[es] += 1
        words += es.size
        trace.append(int(es.size))
        h_v = heads[es]
        cand = d + 1
        # one winner per (head, source): smallest value, then smallest sender
        order = np.lexsort((t_v, cand, s_i, h_v))
        hh, ss = h_v[order], s_i[order]
        first = np.ones(order.size, dtype=bool)
        first[1:] = (hh[1:] != hh[:-1]) | (ss[1:] != ss[:-1])
        sel = order[first]
        hs, si, cs, ts = h_v[sel], s_i[sel], cand[sel], t_v[sel]
        better = cs < dist[hs, si]
        hs, si, cs, ts = hs[better], si[better], cs[better], ts[better]
        if hs.size == 0:
            continue
        dist[hs, si] = cs
        if record_tag == "parent":
            tag[hs, si] = ts
        elif record_tag == "first-hop":
            tag[hs, si] = np.where(cs == 1, hs, tag[ts, si])
        fwd = cs < hop
        hs, si = hs[fwd], si[fwd]
        if hs.size == 0:
            continue
        uniq, starts, counts = np.unique(hs, return_index=True,
                                         return_counts=True)
        offs = np.arange(hs.size) - np.repeat(starts, counts)
        need = int((alen[uniq] + counts).max())
        if need > ann.shape[1]:
            extra = np.full((n, max(need, 2 * ann.shape[1]) - ann.shape[1]),
                            -1, dtype=np.int64)
            ann = np.concatenate([ann, extra], axis=1)
        ann[hs, alen[hs] + offs] = si
        alen[uniq] += counts
    fdist = np.where(dist == INT_INF, np.inf, dist.astype(np.float64))
    table = DistanceTable(tuple(srcs), fdist, fdist, tag, record_tag)
    return table, _account(log, stage, rounds, words, trace)


@dataclass(frozen=True)
class NearTable:
    """Per-node nearest-sources table: R slots of (id, dist, parent),
    padded with -1 / INT_INF."""

    R: int
    hop_bound: int | None
    ids: np.ndarray
    dist: np.ndarray
    parent: np.ndarray

    def members(self, v: int) -> dict:
        out = {}
        for j in range(self.ids.shape[1]):
            z = int(self.ids[v, j])
            if z >= 0:
                out[z] = (int(self.dist[v, j]), int(self.parent[v, j]))
        return out


def source_detection(g: Graph, R: int, hop_bound: int | None = None,
                     log: RoundLog | None = None,
                     stage: str = "source_detection"):
    """Every node learns its R closest vertices (ties by id) within the
    hop bound, with exact distances and the forwarding neighbor.

    Returns (NearTable, RoundLog piece).  Nodes forward announcements in
    arrival order and only while the entry sits in their current top R,
    the standard truncated-BFS schedule.
    """
    if R < 1:
        raise ValueError(f"R must be at least 1, got {R}")
    if hop_bound is not None and hop_bound < 1:
        raise ValueError(f"hop bound must be at least 1, got {hop_bound}")
    hop = math.inf if hop_bound is None else int(hop_bound)
    tails, heads = directed_links(g, "forward")
    nlinks = len(tails)
    n = g.n
    # per node: sorted key list of (dist, id), entry dict id -> (dist, parent)
    keys: list[list] = [[(0, v)] for v in range(n)]
    entry: list[dict] = [{v: (0, -1)} for v in range(n)]
    queue: list[list] = [[v] for v in range(n)]
    qlen = np.ones(n, dtype=np.int64)
    ptr = np.zeros(nlinks, dtype=np.int64)
    rounds = 0
    words = 0
    trace: list[int] = []
    while True:
        active = np.nonzero(ptr < qlen[tails])[0]
        if active.size == 0:
            break
        staged = []
        for e in active:
            u = int(tails[e])
            qu = queue[u]
            eu = entry[u]
            p = int(ptr[e])
            # skip queue entries evicted since they were enqueued
            while p < len(qu):
                z = qu[p]
                p += 1
                dz = eu.get(z)
                if dz is not None:
                    staged.append((int(heads[e]), z, dz[0] + 1, u))
                    break
            ptr[e] = p
        if not staged:
            continue
        rounds += 1
        words += len(staged)
        trace.append(len(staged))
        staged.sort(key=lambda x: (x[0], x[2], x[1], x[3]))
        for v, z, dv, u in staged:
            ev = entry[v]
            known = ev.get(z)
            if known is not None and known[0] <= dv:
                continue
            kv = keys[v]
            if known is None and len(kv) >= R and (dv, z) >= kv[R - 1]:
                continue
            if known is not None:
                kv.remove((known[0], z))
            insort(kv, (dv, z))
            ev[z] = (dv, u)
            if len(kv) > R:
                worst_d, worst_z = kv.pop()
                del ev[worst_z]
                if worst_z == z:
                    continue
            if dv < hop:
                queue[v].append(z)
                qlen[v] += 1
    ids = np.full((n, R), -1, dtype=np.int64)
    dmat = np.full((n, R), INT_INF, dtype=np.int64)
    pmat = np.full((n, R), -1, dtype=np.int64)
    for v in range(n):
        for j, (dz, z) in enumerate(keys[v][:R]):
            ids[v, j] = z
            dmat[v, j] = dz
            pmat[v, j] = entry[v][z][1]
    table = NearTable(R, hop_bound, ids, dmat, pmat)
    return table, _account(log, stage, rounds, words, trace)


def random_delay_schedule(g: Graph, sources, rho: int, cap: int,
                          mode: str = "overflow", seed: int = 0,
                          delays=None, log: RoundLog | None = None,
                          stage: str = "random_delay"):
    """Start one BFS cascade per source after a random delay in {1..rho}.

    Per link per round one token moves (FIFO, ties by source id); a node
    receiving more than ``cap`` tokens in one round overflows: in strict
    mode that raises, otherwise the node is flagged and stops forwarding.
    Returns (delays, hop DistanceTable, arrival rounds, flags, piece).
    """
    if rho < 1:
        raise ValueError(f"delay range must be at least 1, got {rho}")
    if mode not in ("strict", "overflow"):
        raise ValueError(f"unknown mode {mode!r}")
    srcs = sorted(int(s) for s in sources)
    k = len(srcs)
    rng = np.random.default_rng(seed)
    delta = np.array(
        [rng.integers(1, rho + 1) for _ in srcs], dtype=np.int64
    )
    if delays is not None:
        for i, s in enumerate(srcs):
            if s in delays:
                delta[i] = int(delays[s])
    tails, heads = directed_links(g, "forward")
    out_links: list[list[int]] = [[] for _ in range(g.n)]
    for e in range(len(tails)):
        out_links[int(tails[e])].append(e)
    dist = np.full((g.n, k), INT_INF, dtype=np.int64)
    arrival = np.full((g.n, k), INT_INF, dtype=np.int64)
    flags = np.zeros(g.n, dtype=bool)
    queues: list[deque] = [deque() for _ in range(len(tails))]
    rounds = 0
    words = 0
    trace: list[int] = []
    r = 0
    start_by_round: dict[int, list[int]] = {}
    for i, s in enumerate(srcs):
        dist[s, i] = 0
        arrival[s, i] = delta[i]
        start_by_round.setdefault(int(delta[i]), []).append(i)
    while True:
        r += 1
        for i in start_by_round.pop(r, []):
            s = srcs[i]
            if not flags[s]:
                for e in out_links[s]:
                    queues[e].append(i)
        deliveries = []
        sent = 0
        for e, q in enumerate(queues):
            if q:
                i = q.popleft()
                sent += 1
                deliveries.append((int(heads[e]), i, int(tails[e])))
        if sent == 0 and not start_by_round:
            break
        words += sent
        trace.append(sent)
        if sent:
            rounds = r
        load = np.bincount([v for v, _, _ in deliveries], minlength=g.n)
        over = np.nonzero(load > cap)[0]
        if over.size and mode == "strict":
            v = int(over[0])
            raise CongestionViolation(
                (v,), r, f"node received {int(load[v])} > cap {cap}"
            )
        flags[over] = True
        deliveries.sort(key=lambda x: (x[0], x[1], x[2]))
        for v, i, u in deliveries:
            cand = dist[u, i] + 1
            if cand < dist[v, i]:
                dist[v, i] = cand
                arrival[v, i] = r + 1
                if not flags[v]:
                    for e in out_links[v]:
                        queues[e].append(i)
    fdist = np.where(dist == INT_INF, np.inf, dist.astype(np.float64))
    table = DistanceTable(tuple(srcs), fdist, fdist)
    farr = np.where(arrival == INT_INF, np.inf, arrival.astype(np.float64))
    piece = _account(log, stage, rounds, words, trace[:rounds])
    return delta, table, farr, flags, piece
