"""Simple undirected graphs with the structural queries the constructions need.

Deliberately small: degree/regularity, bipartition, components, girth, and
perfect-matching decomposition. Anything heavier (spanning tree enumeration)
goes through networkx conversion.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import InvalidParameterError, PreconditionError


def vertex_sort_key(v):
    """Total order over mixed-type vertex labels, deterministic across runs."""
    if isinstance(v, bool):
        return (0, "", int(v))
    if isinstance(v, int):
        return (0, "", v)
    if isinstance(v, str):
        return (1, v, 0)
    return (2, repr(v), 0)


def normalize_edge(u, v) -> Tuple:
    if u == v:
        raise InvalidParameterError(f"self-loop at {u!r}")
    if vertex_sort_key(u) <= vertex_sort_key(v):
        return (u, v)
    return (v, u)


class SimpleGraph:
    """Undirected graph, no loops or multi-edges; vertices are hashables."""

    def __init__(self, vertices: Iterable, edges: Iterable[Tuple]) -> None:
        vs = list(dict.fromkeys(vertices))
        es = []
        seen = set()
        for u, v in edges:
            e = normalize_edge(u, v)
            if e in seen:
                raise InvalidParameterError(f"duplicate edge {e!r}")
            seen.add(e)
            es.append(e)
        vset = set(vs)
        for u, v in es:
            if u not in vset or v not in vset:
                raise InvalidParameterError(f"edge ({u!r}, {v!r}) uses unknown vertex")
        self.vertices: Tuple = tuple(sorted(vs, key=vertex_sort_key))
        self.edges: Tuple[Tuple, ...] = tuple(
            sorted(es, key=lambda e: (vertex_sort_key(e[0]), vertex_sort_key(e[1])))
        )
        self._adj: Dict = {v: [] for v in self.vertices}
        for u, v in self.edges:
            self._adj[u].append(v)
            self._adj[v].append(u)
        for v in self._adj:
            self._adj[v].sort(key=vertex_sort_key)
        self._edge_set = frozenset(self.edges)

    # -- basic queries -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_vertex(self, v) -> bool:
        return v in self._adj

    def has_edge(self, u, v) -> bool:
        if u == v:
            return False
        return normalize_edge(u, v) in self._edge_set

    def neighbors(self, v) -> Tuple:
        return tuple(self._adj[v])

    def degree(self, v) -> int:
        return len(self._adj[v])

    def regular_degree(self) -> Optional[int]:
        """Common degree if the graph is regular, else None."""
        if not self.vertices:
            return None
        degs = {len(self._adj[v]) for v in self.vertices}
        return degs.pop() if len(degs) == 1 else None

    # -- traversal -----------------------------------------------------

    def components(self) -> List[Tuple]:
        out = []
        seen = set()
        for s in self.vertices:
            if s in seen:
                continue
            comp = []
            q = deque([s])
            seen.add(s)
            while q:
                u = q.popleft()
                comp.append(u)
                for w in self._adj[u]:
                    if w not in seen:
                        seen.add(w)
                        q.append(w)
            out.append(tuple(sorted(comp, key=vertex_sort_key)))
        return out

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def bipartition(self) -> Optional[Tuple[frozenset, frozenset]]:
        """2-coloring as (side0, side1), or None when an odd cycle exists."""
        color: Dict = {}
        for s in self.vertices:
            if s in color:
                continue
            color[s] = 0
            q = deque([s])
            while q:
                u = q.popleft()
                for w in self._adj[u]:
                    if w not in color:
                        color[w] = 1 - color[u]
                        q.append(w)
                    elif color[w] == color[u]:
                        return None
        side0 = frozenset(v for v, c in color.items() if c == 0)
        side1 = frozenset(v for v, c in color.items() if c == 1)
        return side0, side1

    def bfs_distances(self, source) -> Dict:
        dist = {source: 0}
        q = deque([source])
        while q:
            u = q.popleft()
            for w in self._adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return dist

    def subgraph(self, keep_vertices) -> "SimpleGraph":
        keep = set(keep_vertices)
        return SimpleGraph(
            [v for v in self.vertices if v in keep],
            [e for e in self.edges if e[0] in keep and e[1] in keep],
        )

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(self.edges)
        return g

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SimpleGraph)
            and self.vertices == other.vertices
            and self._edge_set == other._edge_set
        )

    def __hash__(self) -> int:
        return hash((self.vertices, self._edge_set))

    def __repr__(self) -> str:
        return f"SimpleGraph(n={self.n}, m={self.m})"


def girth(g: SimpleGraph):
    """Length of the shortest cycle, or math.inf for forests.

    BFS from every vertex; a scanned non-tree edge (x, y) certifies a closed
    walk of length d(x)+d(y)+1 through the root, and rooting at a vertex of a
    shortest cycle attains its length, so the minimum over roots is exact.
    """
    best = math.inf
    for s in g.vertices:
        dist = {s: 0}
        parent = {s: None}
        q = deque([s])
        while q:
            u = q.popleft()
            if dist[u] * 2 >= best:
                continue
            for w in g.neighbors(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    q.append(w)
                elif parent[u] != w:
                    cand = dist[u] + dist[w] + 1
                    if cand < best:
                        best = cand
    return best


# -- standard builders ---------------------------------------------------


def complete_graph(n: int) -> SimpleGraph:
    if n < 1:
        raise InvalidParameterError("complete graph needs n >= 1")
    return SimpleGraph(range(n), [(i, j) for i in range(n) for j in range(i + 1, n)])


def cycle_graph(n: int) -> SimpleGraph:
    if n < 3:
        raise InvalidParameterError("cycle needs n >= 3")
    return SimpleGraph(range(n), [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> SimpleGraph:
    if n < 1:
        raise InvalidParameterError("path needs n >= 1")
    return SimpleGraph(range(n), [(i, i + 1) for i in range(n - 1)])


def petersen_graph() -> SimpleGraph:
    # outer 5-cycle 0..4, spokes i-(i+5), inner pentagram step 2
    edges = [(i, (i + 1) % 5) for i in range(5)]
    edges += [(i, i + 5) for i in range(5)]
    edges += [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return SimpleGraph(range(10), edges)


def complete_bipartite_graph(a: int, b: int) -> SimpleGraph:
    if a < 1 or b < 1:
        raise InvalidParameterError("complete bipartite graph needs positive sides")
    left = [("L", i) for i in range(a)]
    right = [("R", j) for j in range(b)]
    return SimpleGraph(left + right, [(u, v) for u in left for v in right])


# -- matching decomposition ----------------------------------------------


def _kuhn_perfect_matching(g: SimpleGraph, avail_edges: set, left: Sequence) -> Dict:
    """Perfect matching of a regular bipartite (sub)graph by augmenting paths."""
    adj = {u: [] for u in left}
    for u, v in avail_edges:
        if u in adj:
            adj[u].append(v)
        else:
            adj[v].append(u)
    for u in adj:
        adj[u].sort(key=vertex_sort_key)
    match_r: Dict = {}  # right vertex -> left vertex

    def try_augment(u, visited) -> bool:
        for w in adj[u]:
            if w in visited:
                continue
            visited.add(w)
            if w not in match_r or try_augment(match_r[w], visited):
                match_r[w] = u
                return True
        return False

    for u in sorted(left, key=vertex_sort_key):
        if not try_augment(u, set()):
            raise PreconditionError("no perfect matching in bipartite layer")
    return {u: w for w, u in match_r.items()}


def matching_decomposition(
    g: SimpleGraph, coloring: Optional[Dict[Tuple, object]] = None
) -> List[Tuple[Tuple, ...]]:
    """Partition the edges of a d-regular graph into d perfect matchings.

    Without a coloring the graph must be bipartite; matchings are peeled off
    one at a time with augmenting paths (each layer of a regular bipartite
    graph has one by Hall's theorem). A supplied proper d-edge-coloring is
    validated instead, which admits non-bipartite cases such as K_4.
    """
    d = g.regular_degree()
    if d is None:
        raise PreconditionError("matching decomposition needs a regular graph")
    if g.n % 2 != 0:
        raise PreconditionError("odd vertex count admits no perfect matching")

    if coloring is not None:
        classes: Dict = {}
        for e in g.edges:
            if e not in coloring:
                raise PreconditionError(f"coloring misses edge {e!r}")
            classes.setdefault(coloring[e], []).append(e)
        if len(coloring) != g.m:
            raise PreconditionError("coloring mentions edges outside the graph")
        if len(classes) != d:
            raise PreconditionError(f"expected {d} colors, got {len(classes)}")
        out = []
        for color in sorted(classes, key=vertex_sort_key):
            cls = classes[color]
            covered = [v for e in cls for v in e]
            if len(covered) != g.n or len(set(covered)) != g.n:
                raise PreconditionError(f"color {color!r} is not a perfect matching")
            out.append(tuple(sorted(cls, key=lambda e: vertex_sort_key(e[0]))))
        return out

    parts = g.bipartition()
    if parts is None:
        raise PreconditionError("graph is not bipartite and no coloring was supplied")
    left = sorted(parts[0], key=vertex_sort_key)
    if len(parts[0]) != len(parts[1]):
        raise PreconditionError("bipartition sides differ; no perfect matching")
    remaining = set(g.edges)
    out = []
    for _ in range(d):
        match = _kuhn_perfect_matching(g, remaining, left)
        layer = tuple(sorted((normalize_edge(u, w) for u, w in match.items()),
                             key=lambda e: (vertex_sort_key(e[0]), vertex_sort_key(e[1]))))
        out.append(layer)
        remaining -= set(layer)
    assert not remaining
    return out


__all__ = [
    "SimpleGraph",
    "vertex_sort_key",
    "normalize_edge",
    "girth",
    "complete_graph",
    "cycle_graph",
    "path_graph",
    "petersen_graph",
    "complete_bipartite_graph",
    "matching_decomposition",
]
