"""Graph container, file format, generators, stretching and weight scaling.

Vertices are ``0 .. n-1``.  Edges carry positive integer weights that must fit
in a single machine word; unweighted graphs are weighted graphs whose weights
are all 1.  Directed graphs keep anti-parallel edges distinct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_array
from scipy.sparse.csgraph import connected_components, shortest_path

__all__ = [
    "Graph",
    "Stretched",
    "make_graph",
    "load_graph",
    "save_graph",
    "gen_random",
    "gen_planted_cycle",
    "reverse_graph",
    "stretch_graph",
    "scale_graph",
    "scale_level_count",
    "undirected_diameter",
]

MAX_WEIGHT = 2**31 - 1


@dataclass(frozen=True)
class Graph:
    """Immutable edge-list graph.

    Attributes
    ----------
    n : int
        Number of vertices.
    directed : bool
        Whether edges are ordered pairs.
    edges : tuple of (int, int, int)
        ``(u, v, w)`` triples.  Undirected edges are stored once with
        ``u < v``.
    """

    n: int
    directed: bool
    edges: tuple[tuple[int, int, int], ...]

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 3)`` int64 array (empty graphs included)."""
        if not self.edges:
            return np.empty((0, 3), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    @cached_property
    def max_weight(self) -> int:
        return int(self.edge_array[:, 2].max()) if self.edges else 1

    @property
    def weighted(self) -> bool:
        return self.max_weight > 1

    @cached_property
    def csr(self) -> csr_array:
        """Weighted adjacency in CSR form.

        Directed graphs give the out-adjacency; undirected graphs are
        symmetrized.  Parallel entries cannot occur because ``make_graph``
        rejects duplicate edges.
        """
        e = self.edge_array
        if self.directed:
            rows, cols, vals = e[:, 0], e[:, 1], e[:, 2]
        else:
            rows = np.concatenate([e[:, 0], e[:, 1]])
            cols = np.concatenate([e[:, 1], e[:, 0]])
            vals = np.concatenate([e[:, 2], e[:, 2]])
        return csr_array(
            (vals.astype(np.float64), (rows, cols)), shape=(self.n, self.n)
        )

    @cached_property
    def underlying_csr(self) -> csr_array:
        """Symmetrized unit-weight adjacency of the underlying links."""
        e = self.edge_array
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        vals = np.ones(len(rows), dtype=np.float64)
        a = csr_array((vals, (rows, cols)), shape=(self.n, self.n))
        # anti-parallel directed edges collapse onto one link
        a.data[:] = 1.0
        return a

    @cached_property
    def out_neighbors(self) -> tuple[np.ndarray, ...]:
        """Sorted out-neighbor array per vertex (all neighbors if undirected)."""
        a = self.csr
        return tuple(
            np.sort(a.indices[a.indptr[v] : a.indptr[v + 1]]).astype(np.int64)
            for v in range(self.n)
        )

    @cached_property
    def link_neighbors(self) -> tuple[np.ndarray, ...]:
        """Sorted neighbors over underlying links, per vertex."""
        a = self.underlying_csr
        return tuple(
            np.sort(a.indices[a.indptr[v] : a.indptr[v + 1]]).astype(np.int64)
            for v in range(self.n)
        )


def make_graph(
    n: int, edges: Iterable[Sequence[int]], directed: bool
) -> Graph:
    """Validate and build a :class:`Graph`.

    Edges may be ``(u, v)`` (weight 1) or ``(u, v, w)``.  Rejects vertex ids
    out of range, self-loops, non-positive or oversized weights, and duplicate
    edges (for undirected graphs, duplicates in either orientation).
    """
    if n <= 0:
        raise ValueError(f"vertex count must be positive, got {n}")
    norm: list[tuple[int, int, int]] = []
    seen: set[tuple[int, int]] = set()
    for e in edges:
        if len(e) == 2:
            u, v, w = int(e[0]), int(e[1]), 1
        elif len(e) == 3:
            u, v, w = int(e[0]), int(e[1]), int(e[2])
        else:
            raise ValueError(f"edge must have 2 or 3 fields, got {tuple(e)}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not (1 <= w <= MAX_WEIGHT):
            raise ValueError(f"weight {w} on edge ({u}, {v}) outside [1, 2^31-1]")
        if not directed and u > v:
            u, v = v, u
        if (u, v) in seen:
            raise ValueError(f"duplicate edge ({u}, {v})")
        seen.add((u, v))
        norm.append((u, v, w))
    return Graph(n=n, directed=directed, edges=tuple(norm))


def load_graph(path: str, format: str = "edge-list") -> Graph:
    """Read a graph file.

    The edge-list format: first non-comment line is ``<n> directed`` or
    ``<n> undirected``; each following line is ``u v`` or ``u v w``.  ``#``
    starts a comment.
    """
    if format != "edge-list":
        raise ValueError(f"unknown format {format!r}")
    header: tuple[int, bool] | None = None
    edges: list[tuple[int, ...]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if header is None:
                if len(fields) != 2 or fields[1] not in ("directed", "undirected"):
                    raise ValueError(
                        f"{path}:{lineno}: header must be '<n> directed|undirected'"
                    )
                header = (int(fields[0]), fields[1] == "directed")
                continue
            try:
                edges.append(tuple(int(f) for f in fields))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad edge line {line!r}") from exc
    if header is None:
        raise ValueError(f"{path}: empty file")
    try:
        return make_graph(header[0], edges, directed=header[1])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def save_graph(g: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.n} {'directed' if g.directed else 'undirected'}\n")
        for u, v, w in g.edges:
            fh.write(f"{u} {v} {w}\n" if w != 1 else f"{u} {v}\n")


def _patch_connected(
    n: int,
    directed: bool,
    edges: list[tuple[int, int, int]],
    rng: np.random.Generator,
    wlo: int,
    whi: int,
) -> None:
    """Append edges linking components until the underlying graph is connected."""
    while True:
        g = make_graph(n, edges, directed=directed)
        ncomp, labels = connected_components(g.underlying_csr, directed=False)
        if ncomp == 1:
            return
        for c in range(1, ncomp):
            u = int(rng.choice(np.flatnonzero(labels == 0)))
            v = int(rng.choice(np.flatnonzero(labels == c)))
            w = int(rng.integers(wlo, whi + 1))
            edges.append((u, v, w) if rng.integers(2) else (v, u, w))


def gen_random(
    n: int,
    avg_degree: float,
    directed: bool = False,
    W: int = 1,
    seed: int = 0,
    connected: bool = False,
) -> Graph:
    """Sample an Erdos-Renyi style graph with ~``n * avg_degree / 2`` edges.

    Weights are uniform on ``1..W`` and the output is a pure function of the
    arguments.  ``connected=True`` additionally patches components of the
    underlying graph together with random extra edges so the hop diameter is
    finite; off by default so that ``avg_degree=0`` yields isolated vertices.
    """
    if n < 2:
        raise ValueError("need at least 2 vertices")
    if avg_degree < 0:
        raise ValueError("average degree must be nonnegative")
    rng = np.random.default_rng(seed)
    if directed:
        p = min(1.0, avg_degree / (2.0 * (n - 1)))
        mask = rng.random((n, n)) < p
        np.fill_diagonal(mask, False)
        pairs = np.argwhere(mask)
    else:
        p = min(1.0, avg_degree / (n - 1))
        iu = np.triu_indices(n, k=1)
        keep = rng.random(len(iu[0])) < p
        pairs = np.column_stack([iu[0][keep], iu[1][keep]])
    ws = rng.integers(1, W + 1, size=len(pairs))
    edges = [(int(u), int(v), int(w)) for (u, v), w in zip(pairs, ws)]
    if connected:
        _patch_connected(n, directed, edges, rng, 1, W)
    return make_graph(n, edges, directed=directed)


def _planted_attempt(
    n: int,
    cycle_len: int,
    cycle_weight: int,
    directed: bool,
    extra_avg_deg: float,
    rng: np.random.Generator,
) -> Graph:
    unit = cycle_weight == cycle_len
    bg_lo, bg_hi = (1, 1) if unit else (cycle_weight, 2 * cycle_weight)

    # split cycle_weight over the cycle edges, each at least 1
    wts = np.ones(cycle_len, dtype=np.int64)
    wts += rng.multinomial(
        cycle_weight - cycle_len, np.full(cycle_len, 1.0 / cycle_len)
    )
    edges: list[tuple[int, int, int]] = [
        (i, (i + 1) % cycle_len, int(wts[i])) for i in range(cycle_len)
    ]

    # hang the remaining vertices off as a random tree; tree edges cannot
    # close a second cycle regardless of orientation
    for v in range(cycle_len, n):
        u = int(rng.integers(0, v))
        w = int(rng.integers(bg_lo, bg_hi + 1))
        if directed and rng.integers(2):
            edges.append((v, u, w))
        else:
            edges.append((u, v, w))

    if extra_avg_deg > 0:
        # any cycle through an extra edge spends at least cycle_weight on that
        # edge plus at least one more edge, so it is strictly heavier than the
        # planted cycle
        lo = max(cycle_weight, 2)
        seen = {(u, v) for u, v, _ in edges}
        if not directed:
            seen |= {(v, u) for u, v in seen}
        target = int(n * extra_avg_deg / 2)
        for u, v in rng.integers(0, n, size=(4 * target + 16, 2)):
            if target <= 0:
                break
            u, v = int(u), int(v)
            if u == v or (u, v) in seen:
                continue
            seen.add((u, v))
            if not directed:
                seen.add((v, u))
            edges.append((u, v, int(rng.integers(lo, 2 * lo + 1))))
            target -= 1
    return make_graph(n, edges, directed=directed)


def gen_planted_cycle(
    n: int,
    cycle_len: int,
    cycle_weight: int,
    directed: bool = False,
    seed: int = 0,
    extra_avg_deg: float = 0.0,
) -> tuple[Graph, tuple[int, ...]]:
    """Build a connected graph whose minimum-weight cycle is known.

    The planted cycle runs through vertices ``0..cycle_len-1`` with its total
    weight split over the edges; the rest of the graph hangs off it as a
    random tree, plus (with ``extra_avg_deg > 0``) extra edges heavy enough
    that no competing cycle can tie.  Every candidate graph is certified
    against an exact minimum-weight-cycle check before it is returned, with up
    to 16 reseeded retries.  Returns the graph and the cycle's vertex
    sequence.

    ``cycle_weight == cycle_len`` gives an unweighted instance; in that case
    ``extra_avg_deg`` must be 0 because a weight-1 extra edge could create a
    shorter cycle.
    """
    from . import oracles

    if not (3 <= cycle_len <= n):
        raise ValueError(f"cycle_len must be in [3, n], got {cycle_len}")
    if cycle_weight < cycle_len:
        raise ValueError(
            f"cycle_weight {cycle_weight} cannot be split over {cycle_len} "
            "edges of weight at least 1"
        )
    if cycle_weight == cycle_len and extra_avg_deg > 0:
        raise ValueError("extra edges on a unit-weight instance break plantedness")
    witness = tuple(range(cycle_len))
    for attempt in range(16):
        rng = np.random.default_rng(seed + 7919 * attempt)
        g = _planted_attempt(n, cycle_len, cycle_weight, directed, extra_avg_deg, rng)
        report = oracles.exact_mwc(g)
        if report.weight == cycle_weight:
            return g, witness
    raise ValueError(
        f"no certified instance after 16 attempts (n={n}, cycle_len={cycle_len}, "
        f"cycle_weight={cycle_weight}, seed={seed})"
    )


def reverse_graph(g: Graph) -> Graph:
    if not g.directed:
        return g
    return Graph(
        n=g.n, directed=True, edges=tuple((v, u, w) for u, v, w in g.edges)
    )


@dataclass(frozen=True)
class Stretched:
    """A graph with every weight-w edge replaced by a w-edge unit path.

    Attributes
    ----------
    graph : Graph
        The stretched unit-weight graph.  Host vertices keep their ids;
        subdivision vertices are numbered from ``host.n`` upward, consecutive
        along each stretched edge.
    host : Graph
        The original graph.
    edge_of : numpy.ndarray
        For each stretched vertex, the host edge index it subdivides, or -1
        for host vertices.
    offset_of : numpy.ndarray
        Position (1-based from the tail endpoint) of a subdivision vertex
        inside its chain; 0 for host vertices.
    owner : numpy.ndarray
        Host vertex that simulates each stretched vertex: itself for host
        vertices, the lower-id endpoint of the host edge for subdivision
        vertices.
    """

    graph: Graph
    host: Graph
    edge_of: np.ndarray
    offset_of: np.ndarray
    owner: np.ndarray


def stretch_graph(g: Graph) -> Stretched:
    """Materialize the unit-length stretched form of ``g``."""
    n = g.n
    total = n + sum(w - 1 for _, _, w in g.edges)
    edge_of = np.full(total, -1, dtype=np.int64)
    offset_of = np.zeros(total, dtype=np.int64)
    owner = np.arange(total, dtype=np.int64)
    out: list[tuple[int, int, int]] = []
    nxt = n
    for idx, (u, v, w) in enumerate(g.edges):
        chain = [u] + list(range(nxt, nxt + w - 1)) + [v]
        for off, s in enumerate(chain[1:-1], start=1):
            edge_of[s] = idx
            offset_of[s] = off
            owner[s] = min(u, v)
        nxt += w - 1
        for a, b in zip(chain, chain[1:]):
            out.append((a, b, 1))
    return Stretched(
        graph=make_graph(total, out, directed=g.directed),
        host=g,
        edge_of=edge_of,
        offset_of=offset_of,
        owner=owner,
    )


def scale_level_count(h: int, W: int) -> int:
    """Number of scaling levels, ``ceil(log2(h * W))``."""
    return max(0, (h * W - 1).bit_length())


def scale_graph(g: Graph, i: int, h: int, eps: float) -> Graph:
    """Round weights up to ``ceil(2 h w / (eps 2^i))`` at scaling level ``i``.

    Exact rational arithmetic against the binary value of ``eps`` keeps the
    rounding deterministic across platforms.
    """
    if h < 1:
        raise ValueError(f"hop bound must be at least 1, got {h}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    levels = scale_level_count(h, g.max_weight)
    if not (1 <= i <= levels):
        raise ValueError(f"level {i} outside 1..{levels} for h={h}, W={g.max_weight}")
    den = Fraction(eps) * (1 << i)
    scaled = tuple(
        (u, v, math.ceil(Fraction(2 * h * w) / den)) for u, v, w in g.edges
    )
    return Graph(n=g.n, directed=g.directed, edges=scaled)


def undirected_diameter(g: Graph) -> int:
    """Hop diameter of the underlying undirected graph.

    Raises if the underlying graph is disconnected, since the synchronous
    model has no finite running time there.
    """
    if g.n == 1:
        return 0
    d = shortest_path(g.underlying_csr, method="D", directed=False, unweighted=True)
    if np.isinf(d).any():
        raise ValueError("underlying graph is disconnected")
    return int(d.max())
