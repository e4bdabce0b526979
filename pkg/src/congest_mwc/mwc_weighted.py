"""Minimum-weight-cycle estimates on weighted graphs.

Two record families cover the cycle spectrum.  Cycles that pass near a
sampled vertex set close through approximate hop-bounded distances: an
edge whose endpoints reach the same source by routes with different
first hops completes a closed walk, and the walk contains a real cycle
no heavier than its total.  The remaining cycles surface level by level
from scaled copies of the graph, where every weight shrinks enough that
cascading waves can replay the unit subdivision without materializing
it; records found there scale back to original weights exactly.

Both record kinds only ever certify cycles, so the global minimum sits
between the true answer and the advertised factor of it, and stays
infinite exactly on forests and acyclic digraphs.
"""

from __future__ import annotations

import math

import numpy as np

from .engine import RoundLog
from .graphs import (
    Graph,
    scale_graph,
    scale_level_count,
    stretch_graph,
    undirected_diameter,
)
from .multisource import SampleSet, approx_hop_sssp, delay_bfs, sample_vertices
from .mwc_directed import ceil_power, mwc_directed_unweighted
from .primitives import (
    INT_INF,
    convergecast,
    neighbor_exchange,
    tree_build_rounds,
)

__all__ = [
    "hop_limited_mwc_directed",
    "mwc_directed_weighted",
    "mwc_undirected_weighted",
]

_EDGE_CHUNK = 4096  # cap on edges held as dense per-source candidate blocks


def _hop_bound(n: int) -> int:
    return ceil_power(max(n, 1), 2, 3)


def _closing_density(n: int, h: int) -> float:
    """Density that puts a source on every cycle of at least h hops w.h.p."""
    return min(1.0, 3.0 * math.log2(max(n, 2)) / h)


def _wave_density(n: int) -> float:
    """Density that puts a wave source next to every short cycle w.h.p."""
    return min(1.0, 3.0 * math.log2(max(n, 2)) / math.ceil(math.sqrt(max(n, 1))))


def _check_stretchable(g: Graph) -> None:
    for u, v, w in g.edges:
        if w < 1:
            raise ValueError(f"zero-weight edge ({u}, {v}) cannot be stretched")
    undirected_diameter(g)  # rejects disconnected inputs by name


def _resolve_sample(n, seed, sample_p, sample_override, p_default):
    if sample_override is not None:
        members = tuple(sorted({int(s) for s in sample_override}))
        for s in members:
            if not 0 <= s < n:
                raise ValueError(f"sample vertex {s} out of range")
        return SampleSet(members, -1.0, int(seed))
    p = p_default if sample_p is None else float(sample_p)
    return sample_vertices(n, p, seed)


def _closing_records_undirected(g: Graph, table, recs: np.ndarray) -> None:
    """Fold tagged-distance closures into ``recs`` at both edge endpoints.

    An edge (v, x) whose endpoints hold finite distances to the same
    source with different first hops closes a walk source->v->x->source
    whose branches share only the source, so the walk contains a cycle
    of at most d(v) + d(x) + w(v, x).  Equal or absent tags are skipped:
    they cover the source's own edges and pairs whose routes overlap.
    """
    ea = g.edge_array
    if not len(ea):
        return
    d = table.dist
    f = table.tag
    for lo in range(0, len(ea), _EDGE_CHUNK):
        blk = ea[lo:lo + _EDGE_CHUNK]
        du = d[blk[:, 0], :]
        dv = d[blk[:, 1], :]
        fu = f[blk[:, 0], :]
        fv = f[blk[:, 1], :]
        ok = (fu >= 0) & (fv >= 0) & (fu != fv)
        cand = np.where(ok, du + dv, np.inf).min(axis=1) + blk[:, 2]
        np.minimum.at(recs, blk[:, 0], cand)
        np.minimum.at(recs, blk[:, 1], cand)


def _closing_records_directed(g: Graph, sample, table, recs: np.ndarray) -> None:
    # an edge into a sampled head plus the approximate return distance
    # closes a directed walk, and closed directed walks split into cycles
    ea = g.edge_array
    if not len(ea):
        return
    col = np.full(g.n, -1, dtype=np.int64)
    for j, s in enumerate(sample.members):
        col[s] = j
    ec = col[ea[:, 1]]
    idx = np.flatnonzero(ec >= 0)
    if not idx.size:
        return
    cand = ea[idx, 2] + table.dist[ea[idx, 0], ec[idx]]
    np.minimum.at(recs, ea[idx, 0], cand)


def _scaled_wave_records(g: Graph, gi: Graph, hstar: int, srcs,
                         log: RoundLog) -> np.ndarray:
    """Per-vertex lengths of short cycles in one scaled copy of ``g``.

    Waves cascade from ``srcs`` over the links of ``gi`` whose scaled
    weight fits under ``hstar``, each link holding a value for its
    weight in rounds, which reproduces breadth-first search on the unit
    subdivision while only the original vertices compute.  Two record
    rules then read the subdivision's wave meetings off the endpoint
    values.  A crossing arrival ``val[x] + w`` at z is fresh when it
    exceeds z's own value by at most one; two fresh arrivals over
    distinct edges bound a cycle through z by their sum.  A wave whose
    endpoint values differ by less than the edge weight collides inside
    that edge, bounding a cycle by ``val[x] + val[y] + w``.  Records
    above ``hstar`` are discarded unseen.
    """
    n = g.n
    recs = np.full(n, np.inf)
    ea = gi.edge_array
    keep = np.flatnonzero(ea[:, 2] <= hstar)
    if not keep.size or not srcs:
        return recs
    ex = ea[keep, 0]
    ey = ea[keep, 1]
    ew = ea[keep, 2]
    tails = np.concatenate([ex, ey])
    heads = np.concatenate([ey, ex])
    ws = np.concatenate([ew, ew])
    seeds = [[(int(s), 0)] for s in srcs]
    val, rounds, words, trace = delay_bfs(n, tails, heads, ws, seeds,
                                          hstar)
    log.add_stage("scaled_waves", rounds, words, trace)
    # every vertex shares its wave-value row with its neighbors
    neighbor_exchange(g, len(srcs), log, "scaled_share")
    owner = np.minimum(ex, ey)
    for j in range(len(srcs)):
        a = val[tails, j] + ws
        admit = (a <= hstar) & (a <= val[heads, j] + 1)
        idx = np.flatnonzero(admit)
        if idx.size:
            order = np.lexsort((a[idx], heads[idx]))
            hh = heads[idx][order]
            aa = a[idx][order]
            second = np.zeros(len(hh), dtype=bool)
            if len(hh) > 1:
                first = np.ones(len(hh), dtype=bool)
                first[1:] = hh[1:] != hh[:-1]
                second[1:] = first[:-1] & (hh[1:] == hh[:-1])
            ps = np.flatnonzero(second)
            if ps.size:
                pair = aa[ps] + aa[ps - 1]
                ok = pair <= hstar
                np.minimum.at(recs, hh[ps][ok], pair[ok].astype(np.float64))
        vx = val[ex, j]
        vy = val[ey, j]
        inside = ((vx < INT_INF) & (vy < INT_INF)
                  & (np.abs(vx - vy) < ew))
        tot = vx + vy + ew
        ok = inside & (tot <= hstar)
        if ok.any():
            np.minimum.at(recs, owner[ok], tot[ok].astype(np.float64))
    return recs


def _scaled_wave_records_directed(g: Graph, gi: Graph, hstar: int, srcs,
                                  log: RoundLog) -> np.ndarray:
    """Directed counterpart: forward waves, closed through source edges.

    A value ``val[u]`` plus the scaled weight of an edge (u, s) back
    into the wave source s bounds a closed directed walk, hence a
    directed cycle, by their sum; the tail u computes it from its own
    row, so no exchange is needed.
    """
    n = g.n
    recs = np.full(n, np.inf)
    ea = gi.edge_array
    keep = np.flatnonzero(ea[:, 2] <= hstar)
    if not keep.size or not srcs:
        return recs
    tails = ea[keep, 0]
    heads = ea[keep, 1]
    ws = ea[keep, 2]
    seeds = [[(int(s), 0)] for s in srcs]
    val, rounds, words, trace = delay_bfs(n, tails, heads, ws, seeds,
                                          hstar)
    log.add_stage("scaled_waves", rounds, words, trace)
    for j, s in enumerate(srcs):
        back = np.flatnonzero(heads == s)
        if not back.size:
            continue
        cand = val[tails[back], j] + ws[back]
        ok = cand <= hstar
        if ok.any():
            np.minimum.at(recs, tails[back][ok], cand[ok].astype(np.float64))
    return recs


def _weighted_pipeline(g: Graph, eps: float, seed: int, sample_p,
                       sample_override, log: RoundLog):
    """Shared schedule behind both weighted entries."""
    n = g.n
    h = _hop_bound(n)
    eps_in = eps / 2.0  # half the budget to distances, half to scaling
    hstar = math.ceil((1 + 2 / eps_in) * h)
    tree_build_rounds(g, log)
    sample = _resolve_sample(n, seed, sample_p, sample_override,
                             _closing_density(n, h))
    closing = np.full(n, np.inf)
    table = None
    if sample.members and g.m:
        if g.directed:
            table, piece = approx_hop_sssp(g, sample.members, h, eps_in,
                                           direction="forward")
            log.add_stage("long_sssp", piece.rounds, piece.words, piece.trace)
            _closing_records_directed(g, sample, table, closing)
        else:
            table, piece = approx_hop_sssp(g, sample.members, h, eps_in,
                                           record_tag="first-hop")
            # the first-hop tag rides every distance word of the cascade
            log.add_stage("long_sssp", piece.rounds, 2 * piece.words,
                          [2 * x for x in piece.trace])
            neighbor_exchange(g, 2 * len(sample.members), log, "long_share")
            _closing_records_undirected(g, table, closing)
    scaled = np.full(n, np.inf)
    per_level: list[float] = []
    levels = scale_level_count(h, g.max_weight) if g.m else 0
    for i in range(1, levels + 1):
        gi = scale_graph(g, i, h, eps_in)
        wseed = int(seed) * 1000003 + i
        wsample = sample_vertices(n, _wave_density(n), wseed)
        if g.directed:
            recs = _scaled_wave_records_directed(g, gi, hstar,
                                                 wsample.members, log)
        else:
            recs = _scaled_wave_records(g, gi, hstar, wsample.members, log)
        back = recs * (eps_in * float(2 ** i) / (2 * h))
        np.minimum(scaled, back, out=scaled)
        lvl = float(back.min()) if len(back) else np.inf
        per_level.append(lvl)
    local = np.minimum(closing, scaled)
    value, _ = convergecast(g, [float(x) for x in local], min, log,
                            stage="min_convergecast")
    info = {
        "sample": sample,
        "sssp": table,
        "hop": h,
        "hstar": hstar,
        "levels": levels,
        "per_level": per_level,
        "closing": closing,
        "scaled": scaled,
        "local": local,
    }
    return float(value), info


def _as_weight(value: float):
    if not math.isfinite(value):
        return math.inf
    if float(value).is_integer():
        return int(value)
    return float(value)


def mwc_undirected_weighted(g: Graph, eps: float, seed: int = 0, *,
                            sample_p=None, sample_override=None,
                            log: RoundLog | None = None,
                            details: bool = False):
    """Estimate the minimum cycle weight of a connected undirected graph.

    Returns ``(M, log)`` with ``w(C*) <= M <= (2 + 2 eps) w(C*)`` for the
    lightest cycle C* whenever the sampled sources see every heavy
    cycle, which the default density guarantees w.h.p.; forests give
    inf.  Weights must be positive integers.  ``sample_p`` or
    ``sample_override`` replace the closing-stage sampling for
    instrumentation, ``details`` adds per-stage record arrays and the
    per-level minima.
    """
    if g.directed:
        raise ValueError("mwc_undirected_weighted needs an undirected graph")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    _check_stretchable(g)
    log = RoundLog() if log is None else log
    value, info = _weighted_pipeline(g, eps, seed, sample_p,
                                     sample_override, log)
    m = _as_weight(value)
    if details:
        return m, log, info
    return m, log


def mwc_directed_weighted(g: Graph, eps: float, seed: int = 0, *,
                          sample_p=None, sample_override=None,
                          log: RoundLog | None = None,
                          details: bool = False):
    """Estimate the minimum directed cycle weight within ``2 + 2 eps``.

    Same schedule as the undirected estimate with both record rules in
    their one-way forms: closures use an edge into a sampled vertex plus
    the approximate distance back to its tail, and waves on the scaled
    copies run forward only.  Acyclic graphs give inf.  The underlying
    undirected graph must be connected and all weights positive.
    """
    if not g.directed:
        raise ValueError("mwc_directed_weighted needs a directed graph")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    _check_stretchable(g)
    log = RoundLog() if log is None else log
    value, info = _weighted_pipeline(g, eps, seed, sample_p,
                                     sample_override, log)
    m = _as_weight(value)
    if details:
        return m, log, info
    return m, log


def hop_limited_mwc_directed(host: Graph, h_cap: int, seed: int = 0, *,
                             log: RoundLog | None = None,
                             details: bool = False):
    """Cycle-length estimate on the unit subdivision, capped at ``h_cap``.

    The weighted directed host is subdivided so that cycle weight turns
    into hop count, and the unweighted directed estimate runs there with
    its search radius and sampling target held to ``min`` of their usual
    values and the cap; local estimates above the cap are discarded, so
    the result is at most twice the lightest cycle of weight at most
    ``h_cap`` and inf when no such cycle exists.  The spanning tree and
    the final aggregation run over the host, whose diameter prices them.
    """
    if not host.directed:
        raise ValueError("hop_limited_mwc_directed needs a directed graph")
    h_cap = int(h_cap)
    if h_cap < 1:
        raise ValueError(f"hop bound must be at least 1, got {h_cap}")
    _check_stretchable(host)
    st = stretch_graph(host)
    nn = st.graph.n
    log = RoundLog() if log is None else log
    out = mwc_directed_unweighted(
        st.graph, seed,
        h=min(ceil_power(nn, 3, 5), h_cap),
        rho=ceil_power(nn, 4, 5),
        value_cap=h_cap,
        cast_host=host,
        cast_owner=st.owner,
        log=log,
        details=details,
    )
    if details:
        mu, _, info = out
        info["stretched"] = st
        return mu, log, info
    return out[0], log
