"""Girth approximation for undirected graphs under bandwidth-1 rounds.

The pipeline samples BFS sources and lets every reached vertex
rebroadcast its wave value once, so that a vertex holding two wave
arrivals certifies a closed walk through itself.  Independently, every
vertex detects its closest peers, shares the resulting table sideways,
and three local rules turn overlapping tables into further closed-walk
records.  The global minimum of all records lands between the girth and
twice the girth.  A hop-bounded variant runs the same machinery on the
unit-length form of a weighted host and prices its final aggregation on
the host itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import RoundLog
from .graphs import Graph, stretch_graph, undirected_diameter
from .multisource import SampleSet, sample_vertices
from .primitives import (
    convergecast,
    directed_links,
    multi_bfs,
    neighbor_exchange,
    source_detection,
    tree_build_rounds,
)

_MEET = 1  # two wave messages of one sampled source met at the vertex
_NEAR = 2  # a vertex it detects was announced by two of its neighbors
_PAIRS = 3  # two neighbors detect the same vertex on split first hops
_ADJ = 4  # endpoint of an edge whose other end detects the same vertex


def _sample_p(n: int) -> float:
    """Density that puts a source next to every short cycle w.h.p."""
    return min(1.0, 3.0 * math.log2(max(n, 2)) / math.ceil(math.sqrt(n)))


@dataclass(frozen=True)
class NeighborhoodTable:
    """Closest-vertex rows every node holds after the sideways share.

    Row ``v`` lists the ``R`` nearest vertices within the hop bound,
    distance ties broken toward smaller ids, each with its exact
    distance and the neighbor of ``v`` that delivered it (-1 for ``v``
    itself).  Unused slots hold -1.  After the share a node also reads
    the rows of its neighbors, which is what the record rules consume.
    """

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

    def neighbor_view(self, g: Graph, v: int) -> dict:
        """Rows of ``v``'s neighbors as ``v`` sees them after the share."""
        return {int(u): self.members(int(u)) for u in g.out_neighbors[v]}


@dataclass(frozen=True)
class GirthEstimate:
    """Per-vertex closed-walk records and their global minimum.

    ``local[v]`` is the lightest record held at ``v`` (inf for none);
    every finite entry is the length of a closed walk through ``v`` that
    contains a simple cycle no longer than the record.
    """

    local: np.ndarray
    value: float


def record_bfs_cycles(g: Graph, dist, parent, hop_bound: int | None = None):
    """Records produced by one rebroadcast BFS wave.

    ``dist`` and ``parent`` describe the wave of a single source: hop
    distances (inf where unreached) and the delivering neighbor (-1 at
    the source).  Every reached vertex sends ``dist + 1`` once to each
    neighbor except its deliverer, stopping where the value would pass
    ``hop_bound``; a vertex holding two arrivals from distinct neighbors
    records their sum.  Returns the per-vertex record array and the
    ``(n, 2)`` sender pairs, -1 where no record exists.

    Suppressing the send back to the deliverer is what keeps trees
    silent: the two arrivals behind any record trace two walks from the
    source that part at the record vertex, and their union contains a
    simple cycle no longer than the recorded sum.
    """
    dist = np.asarray(dist, dtype=np.float64)
    parent = np.asarray(parent, dtype=np.int64)
    if dist.shape != (g.n,) or parent.shape != (g.n,):
        raise ValueError("wave arrays need one entry per vertex")
    recs = np.full(g.n, np.inf)
    pair = np.full((g.n, 2), -1, dtype=np.int64)
    if g.m == 0:
        return recs, pair
    tails, heads = directed_links(g)
    ok = np.isfinite(dist[tails]) & (parent[tails] != heads)
    if hop_bound is not None:
        ok &= dist[tails] + 1.0 <= hop_bound
    vals = dist[tails[ok]] + 1.0
    snd = tails[ok]
    rcv = heads[ok]
    if rcv.size:
        order = np.lexsort((snd, vals, rcv))
        rr, vv, ss = rcv[order], vals[order], snd[order]
        start = np.ones(rr.size, dtype=bool)
        start[1:] = rr[1:] != rr[:-1]
        one = np.nonzero(start)[0]
        two = one + 1
        has2 = two < rr.size
        has2[has2] = rr[two[has2]] == rr[one[has2]]
        z = rr[one[has2]]
        recs[z] = vv[one[has2]] + vv[two[has2]]
        pair[z, 0] = ss[one[has2]]
        pair[z, 1] = ss[two[has2]]
    return recs, pair


def _meeting_records(g, table, hop_bound, recs, kind, prov):
    """Fold the wave records of every sampled source into the minima."""
    for j, w in enumerate(table.sources):
        rj, pair = record_bfs_cycles(
            g, table.dist[:, j], table.tag[:, j], hop_bound
        )
        if hop_bound is not None:
            rj = np.where(rj <= hop_bound, rj, np.inf)
        upd = rj < recs
        recs[upd] = rj[upd]
        kind[upd] = _MEET
        for v in np.nonzero(upd)[0]:
            prov[int(v)] = ("meet", w, int(pair[v, 0]), int(pair[v, 1]))


def _near_records(g, near, hop_bound, recs, kind, prov):
    """Apply the three closest-vertex rules, all free of messages.

    A neighbor ``x`` announces a detected vertex ``z`` to ``v`` only
    when its delivery path does not start at ``v``; without that filter
    a star already fabricates records whose walks retrace tree edges.
    The same first-hop condition on both sides of a pair guarantees the
    walk v-x..z..y-v crosses one of the edges at ``v`` an odd number of
    times, so a simple cycle is always inside.
    """
    cap = math.inf if hop_bound is None else float(hop_bound)

    def put(v, val, kd, pv):
        if val <= cap and val < recs[v]:
            recs[v] = val
            kind[v] = kd
            prov[v] = pv

    members = [near.members(v) for v in range(g.n)]
    for v in range(g.n):
        ann: dict[int, list] = {}
        for x in map(int, g.out_neighbors[v]):
            for z, (dxz, pxz) in members[x].items():
                if pxz != v:
                    ann.setdefault(z, []).append((dxz, x, pxz))
        mine = members[v]
        for z, lst in ann.items():
            if len(lst) < 2:
                continue
            lst.sort()
            if z in mine:
                (d1, x1, p1), (d2, x2, p2) = lst[0], lst[1]
                put(v, float(d1 + d2 + 2), _NEAR, ("near", z, x1, x2, p1, p2))
            for i in range(len(lst)):
                di, xi, pi = lst[i]
                for j in range(i + 1, len(lst)):
                    dj, xj, pj = lst[j]
                    if pi != pj and pi != xj and pj != xi:
                        put(v, float(di + dj + 2), _PAIRS,
                            ("pairs", z, xi, xj, pi, pj))
                        break
        for u in map(int, g.out_neighbors[v]):
            for z, (dvz, pvz) in mine.items():
                got = members[u].get(z)
                if got is None:
                    continue
                duz, puz = got
                if pvz != u and puz != v:
                    put(v, float(dvz + duz + 1), _ADJ,
                        ("adj", u, z, pvz, puz))


def _pipeline(g, hop_bound, seed, sample_p, sample_override, cast_host,
              owner, log):
    """Shared round-synchronous schedule behind both public entries."""
    n = g.n
    tree_build_rounds(cast_host, log)
    if sample_override is not None:
        members = tuple(sorted({int(s) for s in sample_override}))
        for s in members:
            if not 0 <= s < n:
                raise ValueError(f"sample vertex {s} out of range")
        sample = SampleSet(members, -1.0, seed)
    else:
        p = _sample_p(n) if sample_p is None else float(sample_p)
        sample = sample_vertices(n, p, seed)
    recs = np.full(n, np.inf)
    kind = np.zeros(n, dtype=np.int64)
    prov: list = [None] * n
    table = None
    if sample.members:
        table, _ = multi_bfs(g, sample.members, hop_bound=hop_bound,
                             record_tag="parent", log=log,
                             stage="sample_bfs")
        if g.m:
            # one rebroadcast value per source crosses each link
            neighbor_exchange(g, len(sample.members), log, "wave_share")
        _meeting_records(g, table, hop_bound, recs, kind, prov)
    R = math.ceil(math.sqrt(n))
    neartab, _ = source_detection(g, R, hop_bound=hop_bound, log=log,
                                  stage="source_detection")
    near = NeighborhoodTable(R, hop_bound, neartab.ids, neartab.dist,
                             neartab.parent)
    if g.m:
        # each row travels as (vertex, distance, first hop) triples
        neighbor_exchange(g, 3 * R, log, "near_share")
    _near_records(g, near, hop_bound, recs, kind, prov)
    if owner is None:
        vals = [float(x) for x in recs]
    else:
        agg = np.full(cast_host.n, np.inf)
        np.minimum.at(agg, owner, recs)
        vals = [float(x) for x in agg]
    value, _ = convergecast(cast_host, vals, min, log=log,
                            stage="min_convergecast")
    est = GirthEstimate(local=recs, value=float(value))
    info = {
        "sample": sample,
        "bfs": table,
        "near": near,
        "estimate": est,
        "kind": kind,
        "prov": prov,
        "R": R,
        "hop_bound": hop_bound,
    }
    return est, info


def girth_approx(g: Graph, seed: int = 0, *, sample_p=None,
                 sample_override=None, log: RoundLog | None = None,
                 details: bool = False):
    """Estimate the girth of a connected undirected unweighted graph.

    Returns ``(M, log)`` with girth <= M <= 2 girth - 1 whenever every
    shortest cycle sees a sampled source, which the default density
    guarantees w.h.p.; forests give inf.  ``sample_p`` or
    ``sample_override`` replace the sampling step for instrumentation,
    ``details`` adds the per-vertex tables and record provenance.
    """
    if g.directed:
        raise ValueError("girth_approx needs an undirected graph")
    if g.weighted:
        raise ValueError("girth_approx needs an unweighted graph")
    undirected_diameter(g)  # rejects disconnected inputs by name
    log = RoundLog() if log is None else log
    est, info = _pipeline(g, None, seed, sample_p, sample_override, g,
                          None, log)
    value = int(est.value) if math.isfinite(est.value) else math.inf
    if details:
        return value, log, info
    return value, log


def hop_limited_mwc(host: Graph, h: int, seed: int = 0, *, sample_p=None,
                    sample_override=None, log: RoundLog | None = None,
                    details: bool = False):
    """Weight of the lightest cycle of weight at most ``h``, within 2x.

    The weighted host is searched through its unit-length form, where a
    weight-w edge becomes a w-hop path and cycle weight turns into hop
    count; each path is simulated by the lower-id endpoint of its host
    edge.  Waves and detection stop after ``h`` hops and only records of
    value at most ``h`` are admitted, so any admitted record certifies a
    cycle of weight at most ``h`` and the result is inf exactly when no
    such cycle exists.  The final aggregation runs over the host, whose
    diameter prices it, not the stretched form.
    """
    if host.directed:
        raise ValueError("hop_limited_mwc needs an undirected graph")
    h = int(h)
    if h < 1:
        raise ValueError(f"hop bound must be at least 1, got {h}")
    for u, v, w in host.edges:
        if w < 1:
            raise ValueError(f"zero-weight edge ({u}, {v}) cannot be "
                             "stretched")
    undirected_diameter(host)  # rejects disconnected inputs by name
    st = stretch_graph(host)
    log = RoundLog() if log is None else log
    est, info = _pipeline(st.graph, h, seed, sample_p, sample_override,
                          host, st.owner, log)
    info["stretched"] = st
    value = int(est.value) if math.isfinite(est.value) else math.inf
    if details:
        return value, log, info
    return value, log
