"""Gated lower-bound graph families.

Three parameterized builders where a pair of bit strings controls the cycle
structure: a directed family whose cycles exist exactly on shared one-bits, a
weighted undirected family separating light cycles from heavy ones by a
factor of the graph size, and a twin-copy family whose girth collapses when
the strings intersect.  Dichotomy checks and corpus generation consume these.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import Graph, make_graph

__all__ = [
    "GADGET_KINDS",
    "GadgetSpec",
    "gen_gadget",
    "girth_base",
    "girth_twin_gadget",
]

GADGET_KINDS = ("directed-fig1", "undirected-weighted-fig2", "girth-fig3")


@dataclass(frozen=True)
class GadgetSpec:
    """Parameters selecting one member of a gadget family.

    ``Sa`` and ``Sb`` are 0/1 strings.  The tree families use
    ``tree_height`` (the gated paths have length ``2**tree_height``, and
    ``path_len``/``path_count`` may be given redundantly for validation);
    the heavy-edge weight of the weighted family is ``alpha`` times the
    vertex count.  The twin-copy family stretches each selected base edge
    into ``stretch`` unit edges, over the shipped base graph for
    ``girth_k``.
    """

    kind: str
    Sa: str
    Sb: str
    tree_height: int = 2
    path_len: int | None = None
    path_count: int | None = None
    alpha: int = 2
    stretch: int = 1
    girth_k: int = 2


def _check_bits(*strings: str) -> None:
    lengths = {len(s) for s in strings}
    if len(lengths) != 1:
        raise ValueError("mismatched string lengths")
    for s in strings:
        if set(s) - {"0", "1"}:
            raise ValueError(f"bit string has characters outside 0/1: {s!r}")


def _gate_tree(spec: GadgetSpec, directed: bool) -> Graph:
    """Tree-plus-gated-paths family shared by the two tree gadgets.

    A complete binary tree of the given height over leaves u_0..u_{l-1}
    carries one extra leaf attached to the root; all tree edges point down
    except the extra leaf's, which points up.  Each of the q paths runs
    parallel to the leaves, pinned to interior leaves by always-on edges,
    and joined to u_0 / the extra leaf only where the bit strings allow.
    A directed cycle (or a light undirected one) then exists exactly when
    the strings share a one-bit.
    """
    p = spec.tree_height
    if p < 1:
        raise ValueError(f"tree height must be at least 1, got {p}")
    _check_bits(spec.Sa, spec.Sb)
    q = len(spec.Sa)
    if q < 1:
        raise ValueError("need at least one gated path")
    if spec.path_count is not None and spec.path_count != q:
        raise ValueError("mismatched string lengths")
    l = 2**p
    if spec.path_len is not None and spec.path_len != l:
        raise ValueError(f"path length {spec.path_len} != 2^height = {l}")
    tree = 2 ** (p + 1) - 1
    first_leaf = 2**p - 1
    top = tree  # the extra leaf, adjacent to the root
    base = tree + 1

    def path_vertex(i: int, j: int) -> int:
        return base + i * (l + 1) + j

    n = base + q * (l + 1)
    heavy = spec.alpha * n if spec.kind == "undirected-weighted-fig2" else 1
    if heavy < 1:
        raise ValueError(f"alpha must be positive, got {spec.alpha}")
    edges: list[tuple[int, int, int]] = []
    for x in range(1, tree):
        edges.append(((x - 1) // 2, x, 1))
    edges.append((top, 0, 1))
    for i in range(q):
        for j in range(l):
            edges.append((path_vertex(i, j), path_vertex(i, j + 1), 1))
        for j in range(1, l):
            edges.append((path_vertex(i, j), first_leaf + j, heavy))
        if spec.Sa[i] == "1":
            edges.append((first_leaf, path_vertex(i, 0), 1))
        if spec.Sb[i] == "1":
            edges.append((path_vertex(i, l), top, 1))
    return make_graph(n, edges, directed=directed)


def girth_base(k: int) -> Graph:
    """Shipped base graph of girth at least 2k+1 for the twin-copy family."""
    if k == 1:
        # complete bipartite 3x3, girth 4
        return make_graph(
            6, [(i, 3 + j) for i in range(3) for j in range(3)], directed=False
        )
    if k == 2:
        # 14-vertex cubic cage, girth 6
        edges = [(i, (i + 1) % 14) for i in range(14)]
        edges += [(i, (i + 5) % 14) for i in range(0, 14, 2)]
        return make_graph(14, edges, directed=False)
    raise ValueError(f"no shipped base construction for k={k}")


def girth_twin_gadget(base: Graph, Sa: str, Sb: str, t: int) -> Graph:
    """Two bit-selected copies of a base graph joined by a twin matching.

    Base edge i appears in the first copy iff ``Sa[i]`` is 1 and in the
    second iff ``Sb[i]`` is 1, each as a path of ``t`` unit edges; every
    vertex is linked to its twin.  When the strings share a one-bit the two
    surviving paths and two twin links close a cycle of 2t+2 edges; when
    they are disjoint every cycle projects onto a cycle of the base, so the
    girth is at least (2k+1)t for a base of girth 2k+1.
    """
    if base.directed or base.weighted:
        raise ValueError("base graph must be undirected and unweighted")
    if t < 1:
        raise ValueError(f"stretch must be at least 1, got {t}")
    _check_bits(Sa, Sb)
    if len(Sa) != base.m:
        raise ValueError("mismatched string lengths")
    nb = base.n
    edges: list[tuple[int, int, int]] = [(u, nb + u, 1) for u in range(nb)]
    nxt = 2 * nb
    for offset, bits in ((0, Sa), (nb, Sb)):
        for i, (x, y, _) in enumerate(base.edges):
            if bits[i] != "1":
                continue
            chain = [offset + x] + list(range(nxt, nxt + t - 1)) + [offset + y]
            nxt += t - 1
            edges.extend((a, b, 1) for a, b in zip(chain, chain[1:]))
    return make_graph(nxt, edges, directed=False)


def gen_gadget(spec: GadgetSpec) -> Graph:
    """Build the graph a :class:`GadgetSpec` describes."""
    if spec.kind == "directed-fig1":
        return _gate_tree(spec, directed=True)
    if spec.kind == "undirected-weighted-fig2":
        return _gate_tree(spec, directed=False)
    if spec.kind == "girth-fig3":
        base = girth_base(spec.girth_k)
        return girth_twin_gadget(base, spec.Sa, spec.Sb, spec.stretch)
    raise ValueError(f"unknown gadget kind {spec.kind!r}")
