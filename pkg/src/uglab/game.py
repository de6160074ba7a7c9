"""k-pebble bijective game engine over virtually lifted instances.

Universe elements are pairs (base vertex, group element). Every Duplicator
here answers with a map g*: V -> F_2^m inducing the bijection
f(v, g) = (v, g + g*(v)), so bijections are permutations by construction
and rule compliance reduces to checks on g*.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from .constructions import klein_vec, robber_move
from .errors import (
    InvalidParameterError,
    NotInSpanError,
    PreconditionError,
    SearchBudgetError,
    StrategyViolationError,
)
from .gf2 import Gf2Subspace, Gf2Vector, coefficients_in_basis, span_of
from .graphs import SimpleGraph, normalize_edge, vertex_sort_key
from .instances import GroupUgInstance, lifted_allowed_diffs


class LiftedStructure:
    """Virtual view of the label lift of a base instance; never materialized."""

    def __init__(self, base: GroupUgInstance) -> None:
        self.base = base
        self.m = base.m
        self._elements = [
            (v, Gf2Vector(g, base.m)) for v in base.vertices for g in range(base.q)
        ]
        self._vertex_set = frozenset(base.vertices)

    def universe_size(self) -> int:
        return len(self._elements)

    def elements(self) -> List[Tuple]:
        return list(self._elements)

    def has_element(self, elem: Tuple) -> bool:
        v, g = elem
        return isinstance(g, Gf2Vector) and g.dim == self.m and v in self._vertex_set

    def allowed_diffs(self, a: Tuple, b: Tuple) -> FrozenSet:
        return lifted_allowed_diffs(self.base, a, b)


class GStarMap:
    """Map base vertex -> shift; vertices not mentioned shift by zero."""

    def __init__(self, m: int, values: Dict) -> None:
        self.m = m
        self.values = dict(values)

    def shift(self, v) -> Gf2Vector:
        return self.values.get(v, Gf2Vector.zero(self.m))

    def apply(self, elem: Tuple) -> Tuple:
        v, g = elem
        return (v, g + self.shift(v))

    def to_hex(self) -> Dict[str, str]:
        return {str(v): g.to_hex() for v, g in sorted(self.values.items(), key=lambda kv: vertex_sort_key(kv[0]))}


@dataclass
class GameView:
    A: LiftedStructure
    B: LiftedStructure
    k: int
    round_no: int
    pebbles: Tuple[Optional[Tuple], ...]
    picked: Optional[int]


def check_partial_isomorphism(A: LiftedStructure, B: LiftedStructure, pairs: Sequence[Tuple]) -> bool:
    """True iff the pebbled pairs induce a well-defined injective map that
    preserves allowed-difference sets in both structures."""
    for i in range(len(pairs)):
        a1, b1 = pairs[i]
        for j in range(i + 1, len(pairs)):
            a2, b2 = pairs[j]
            if (a1 == a2) != (b1 == b2):
                return False
            if a1 == a2:
                continue
            if A.allowed_diffs(a1, a2) != B.allowed_diffs(b1, b2):
                return False
    return True


def _elem_json(elem: Tuple) -> List:
    v, g = elem
    return [str(v), g.to_hex()]


def play_game(
    A: LiftedStructure,
    B: LiftedStructure,
    k: int,
    duplicator,
    spoiler,
    max_rounds: int,
) -> Dict:
    """Run the bijective pebble game; returns a JSON-ready transcript.

    Each round: Spoiler lifts a pebble pair, Duplicator commits to a
    bijection (checked to respect the remaining pairs), Spoiler places the
    lifted pair on (a, f(a)), and the placed pairs are checked for partial
    isomorphism. Spoiler wins on the first failed check.
    """
    if A.universe_size() != B.universe_size():
        raise PreconditionError("universes differ in size; no bijection exists")
    if k < 1:
        raise InvalidParameterError("need k >= 1")
    pebbles: List[Optional[Tuple]] = [None] * k
    rounds = []
    winner = None
    valid = set(A.elements())
    for round_no in range(1, max_rounds + 1):
        view = GameView(A, B, k, round_no, tuple(pebbles), None)
        picked = spoiler.pick_up(view)
        if not 0 <= picked < k:
            raise InvalidParameterError(f"spoiler picked slot {picked} outside 0..{k-1}")
        pebbles[picked] = None
        view = GameView(A, B, k, round_no, tuple(pebbles), picked)
        gstar = duplicator.bijection(view)
        for pair in pebbles:
            if pair is not None and gstar.apply(pair[0]) != pair[1]:
                raise StrategyViolationError(
                    "bijection moves a placed pebble pair",
                    side="duplicator",
                    detail={"pair": [_elem_json(pair[0]), _elem_json(pair[1])]},
                )
        a = spoiler.place(view, gstar)
        if a not in valid:
            raise InvalidParameterError(f"spoiler placed on {a!r}, not a universe element")
        b = gstar.apply(a)
        pebbles[picked] = (a, b)
        pairs = [p for p in pebbles if p is not None]
        ok = check_partial_isomorphism(A, B, pairs)
        rounds.append(
            {
                "round": round_no,
                "picked": picked,
                "gstar": gstar.to_hex(),
                "placement": {"a": _elem_json(a), "b": _elem_json(b)},
                "ok": ok,
            }
        )
        if not ok:
            winner = "spoiler"
            break
        view = GameView(A, B, k, round_no, tuple(pebbles), picked)
        if hasattr(duplicator, "observe_placement"):
            duplicator.observe_placement(view)
    return {
        "k": k,
        "max_rounds": max_rounds,
        "rounds": rounds,
        "winner": winner,
        "survived": len(rounds) if winner is None else len(rounds) - 1,
    }


# -- spoilers -----------------------------------------------------------------


class RandomSpoiler:
    """Uniform pick-up slot and uniform placement element."""

    def __init__(self, rng) -> None:
        self.rng = rng

    def pick_up(self, view: GameView) -> int:
        return self.rng.randrange(view.k)

    def place(self, view: GameView, gstar: GStarMap) -> Tuple:
        els = view.A.elements()
        return els[self.rng.randrange(len(els))]


def spoiler_random(rng) -> RandomSpoiler:
    return RandomSpoiler(rng)


def find_winning_line(
    A: LiftedStructure,
    B: LiftedStructure,
    k: int,
    duplicator_factory: Callable[[], object],
    depth: int,
    budget: int = 500_000,
) -> Optional[List[Tuple]]:
    """Exhaustive Spoiler: DFS over pick-up/placement sequences up to depth,
    replaying the (deterministic) Duplicator on each prefix. Returns the
    first winning move list [(slot, element), ...] or None.

    Empty slots are interchangeable, so only the first empty slot is tried
    alongside the occupied ones. The budget caps simulated placements.
    """
    els = A.elements()
    moves_tried = 0

    def replay(prefix: Sequence[Tuple]):
        """Fresh duplicator driven through the move prefix; prefixes recurse
        only when no check failed, so replays never hit a Spoiler win."""
        dup = duplicator_factory()
        pebbles: List[Optional[Tuple]] = [None] * k
        for rnd, (slot, a) in enumerate(prefix, start=1):
            pebbles[slot] = None
            view = GameView(A, B, k, rnd, tuple(pebbles), slot)
            g = dup.bijection(view)
            for pair in pebbles:
                if pair is not None and g.apply(pair[0]) != pair[1]:
                    raise StrategyViolationError(
                        "bijection moves a placed pebble pair", side="duplicator"
                    )
            pebbles[slot] = (a, g.apply(a))
            view = GameView(A, B, k, rnd, tuple(pebbles), slot)
            if hasattr(dup, "observe_placement"):
                dup.observe_placement(view)
        return pebbles

    def candidate_slots(pebbles: Sequence[Optional[Tuple]]) -> List[int]:
        slots = [i for i, p in enumerate(pebbles) if p is not None]
        for i, p in enumerate(pebbles):
            if p is None:
                slots.append(i)
                break
        return slots

    def rec(prefix: List[Tuple]) -> Optional[List[Tuple]]:
        nonlocal moves_tried
        if len(prefix) >= depth:
            return None
        for slot in candidate_slots(replay(prefix)):
            for a in els:
                moves_tried += 1
                if moves_tried > budget:
                    raise SearchBudgetError(f"winning-line search exceeded {budget} moves")
                pebbles = replay(prefix + [(slot, a)])
                pairs = [p for p in pebbles if p is not None]
                if not check_partial_isomorphism(A, B, pairs):
                    return prefix + [(slot, a)]
                line = rec(prefix + [(slot, a)])
                if line is not None:
                    return line
        return None

    return rec([])


def spoiler_exhaustive(depth: int, budget: int = 500_000):
    """Adapter so exhaustive search composes like a strategy factory."""

    def run(A, B, k, duplicator_factory):
        return find_winning_line(A, B, k, duplicator_factory, depth, budget)

    return run


# -- identity duplicator --------------------------------------------------------


class IdentityDuplicator:
    """Always answers the identity bijection (g* = 0)."""

    def __init__(self, m: int) -> None:
        self.m = m

    def bijection(self, view: GameView) -> GStarMap:
        return GStarMap(self.m, {})


def duplicator_identity(m: int) -> IdentityDuplicator:
    return IdentityDuplicator(m)


# -- 2-pebble strategy -----------------------------------------------------------


class K2Duplicator:
    """Stateless 2-pebble strategy for singleton-bundle pairs on one graph.

    With the single surviving pebble on (x_v0^{g1}, x_v0^{g2}): shift v0 by
    g1+g2; shift each neighbor v by g1+g2+z2+z1, where z1, z2 are the diffs
    on (v0, v) in the two instances; everything else shifts by zero.
    """

    def __init__(self, u1: GroupUgInstance, u2: GroupUgInstance) -> None:
        if u1.m != u2.m:
            raise PreconditionError("instances over different groups")
        if u1.vertices != u2.vertices or set(u1.bundle_map) != set(u2.bundle_map):
            raise PreconditionError("instances must share one base graph")
        self.u1 = u1
        self.u2 = u2
        self.graph = u1.graph()

    def bijection(self, view: GameView) -> GStarMap:
        placed = [p for p in view.pebbles if p is not None]
        if len(placed) > 1:
            raise PreconditionError("2-pebble strategy queried with several free pairs")
        if not placed:
            return GStarMap(self.u1.m, {})
        (v0, g1), (v0b, g2) = placed[0]
        if v0 != v0b:
            raise StrategyViolationError(
                "pebble pair spans two base vertices", side="duplicator"
            )
        vals = {v0: g1 + g2}
        for v in self.graph.neighbors(v0):
            z1 = self.u1.diffs_on(v0, v)[0]
            z2 = self.u2.diffs_on(v0, v)[0]
            vals[v] = g1 + g2 + z1 + z2
        return GStarMap(self.u1.m, vals)


def duplicator_k2(u1: GroupUgInstance, u2: GroupUgInstance) -> K2Duplicator:
    return K2Duplicator(u1, u2)


# -- pursuit strategy over an edge-colored cubic graph ----------------------------


class CopsDuplicator:
    """Stateful strategy: cops are the pebbled base vertices, the robber
    holds the one inconsistent edge, and every robber move adds the color of
    the bystander edge at each interior path vertex to g*."""

    def __init__(
        self,
        u1: GroupUgInstance,
        u2: GroupUgInstance,
        h: SimpleGraph,
        coloring: Dict[Tuple, str],
        star_edge: Tuple,
        assert_level: str = "full",
    ) -> None:
        if u1.vertices != u2.vertices or set(u1.bundle_map) != set(h.edges):
            raise PreconditionError("instances do not match the coloring graph")
        if assert_level not in ("off", "edges", "full"):
            raise InvalidParameterError(f"unknown assert level {assert_level!r}")
        self.u1 = u1
        self.u2 = u2
        self.h = h
        self.coloring = coloring
        self.robber = normalize_edge(*star_edge)
        self.gstar: Dict = {v: Gf2Vector.zero(2) for v in h.vertices}
        self.assert_level = assert_level

    def bijection(self, view: GameView) -> GStarMap:
        cops = {p[0][0] for p in view.pebbles if p is not None}
        if self.robber[0] in cops and self.robber[1] in cops:
            raise StrategyViolationError(
                "robber edge is fully pebbled", side="duplicator",
                detail={"robber": list(self.robber)},
            )
        path = robber_move(self.h, cops, self.robber)
        if path:
            for j in range(1, len(path) - 1):
                others = [
                    w
                    for w in self.h.neighbors(path[j])
                    if w != path[j - 1] and w != path[j + 1]
                ]
                if len(others) != 1:
                    raise StrategyViolationError(
                        "interior path vertex is not cubic", side="duplicator",
                        detail={"vertex": str(path[j])},
                    )
                e_j = normalize_edge(path[j], others[0])
                self.gstar[path[j]] = self.gstar[path[j]] + klein_vec(self.coloring[e_j])
            self.robber = normalize_edge(path[-2], path[-1])
        self._assert_invariant(cops)
        return GStarMap(2, dict(self.gstar))

    def _assert_invariant(self, cops) -> None:
        if self.assert_level == "off":
            return
        if self.assert_level == "edges":
            edges = [e for e in self.h.edges if e[0] in cops and e[1] in cops]
        else:
            edges = self.h.edges
        for e in edges:
            s = self.gstar[e[0]] + self.gstar[e[1]]
            d1 = set(self.u1.diffs_on(*e))
            d2 = {z + s for z in self.u2.diffs_on(*e)}
            if e == self.robber:
                if d1 & d2:
                    raise StrategyViolationError(
                        "robber edge diff sets are not disjoint", side="duplicator",
                        detail={"edge": [str(x) for x in e]},
                    )
            elif d1 != d2:
                raise StrategyViolationError(
                    "edge away from the robber lost consistency", side="duplicator",
                    detail={"edge": [str(x) for x in e]},
                )


def duplicator_cops(
    u1: GroupUgInstance,
    u2: GroupUgInstance,
    h: SimpleGraph,
    coloring: Dict[Tuple, str],
    star_edge: Tuple,
    assert_level: str = "full",
) -> CopsDuplicator:
    return CopsDuplicator(u1, u2, h, coloring, star_edge, assert_level)


# -- tree strategy for the random pair ----------------------------------------------


def extend_along_path(
    path: Sequence,
    g_start: Gf2Vector,
    g_end: Gf2Vector,
    zmap: Dict[Tuple, Gf2Subspace],
    bmap: Dict[Tuple, Gf2Vector],
) -> Dict:
    """Interior g* values making every path edge consistent with both
    endpoints pinned; needs the union of the edge subspaces to span.

    Writing the required total shift over a basis drawn from the edge
    subspaces and folding each basis vector into its own edge's step makes
    the per-edge condition b(e) + g*(v1) + g*(v2) in Z(e) hold by
    construction, and the steps telescope to g_end exactly.
    """
    if len(path) < 2:
        raise InvalidParameterError("path needs at least one edge")
    m = g_start.dim
    edges = [normalize_edge(a, b) for a, b in zip(path, path[1:])]
    tagged: List[Tuple[int, Gf2Vector]] = []
    for i, e in enumerate(edges):
        for z in zmap[e].basis:
            tagged.append((i, z))
    pool = [z for _, z in tagged]
    if span_of(pool, m).rank < m:
        raise NotInSpanError("edge subspaces along the path do not span")
    total_b = Gf2Vector.zero(m)
    for e in edges:
        total_b = total_b + bmap[e]
    target = g_start + g_end + total_b
    coeffs = coefficients_in_basis(target, pool)
    deltas = [bmap[e] for e in edges]
    for (i, z), c in zip(tagged, coeffs):
        if c:
            deltas[i] = deltas[i] + z
    out: Dict = {}
    cur = g_start
    for i in range(len(edges)):
        cur = cur + deltas[i]
        if i < len(edges) - 1:
            out[path[i + 1]] = cur
    if cur != g_end:
        raise StrategyViolationError("path extension missed its endpoint", side="duplicator")
    return out


def _lex_shortest_path(g: SimpleGraph, src, dst) -> List:
    """Lexicographically least among shortest src-dst paths."""
    dist = g.bfs_distances(src)
    if dst not in dist:
        raise PreconditionError(f"{src!r} and {dst!r} are disconnected")
    path = [dst]
    cur = dst
    while cur != src:
        preds = [w for w in g.neighbors(cur) if dist.get(w, -1) == dist[cur] - 1]
        cur = min(preds, key=vertex_sort_key)
        path.append(cur)
    path.reverse()
    return path


def steiner_tree(g: SimpleGraph, terminals: Sequence) -> FrozenSet:
    """Edge set of a minimum Steiner tree, deterministic under ties.

    Two terminals reduce to a shortest path; more use the classic
    subset-merge dynamic program with (size, sorted edges) as the order, so
    equal-size trees resolve lexicographically.
    """
    terms = sorted(set(terminals), key=vertex_sort_key)
    if len(terms) <= 1:
        return frozenset()
    if len(terms) == 2:
        p = _lex_shortest_path(g, terms[0], terms[1])
        return frozenset(normalize_edge(a, b) for a, b in zip(p, p[1:]))

    def key_of(edges: FrozenSet) -> Tuple:
        return (len(edges), tuple(sorted(edges, key=lambda e: (vertex_sort_key(e[0]), vertex_sort_key(e[1])))))

    paths: Dict[Tuple, FrozenSet] = {}
    for u in g.vertices:
        for w in g.vertices:
            if vertex_sort_key(u) < vertex_sort_key(w):
                try:
                    p = _lex_shortest_path(g, u, w)
                except PreconditionError:
                    continue
                paths[(u, w)] = frozenset(normalize_edge(a, b) for a, b in zip(p, p[1:]))

    def path_edges(u, w) -> Optional[FrozenSet]:
        if u == w:
            return frozenset()
        key = (u, w) if vertex_sort_key(u) < vertex_sort_key(w) else (w, u)
        return paths.get(key)

    base_terms = terms[:-1]
    root = terms[-1]
    dp: Dict[Tuple[int, object], FrozenSet] = {}
    for i, t in enumerate(base_terms):
        for v in g.vertices:
            pe = path_edges(t, v)
            if pe is not None:
                dp[(1 << i, v)] = pe
    full = (1 << len(base_terms)) - 1
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        layer: Dict[object, FrozenSet] = {}
        sub = (mask - 1) & mask
        while sub:
            rest = mask ^ sub
            if rest and sub < rest:  # each split once
                for v in g.vertices:
                    a = dp.get((sub, v))
                    b = dp.get((rest, v))
                    if a is not None and b is not None:
                        cand = a | b
                        old = layer.get(v)
                        if old is None or key_of(cand) < key_of(old):
                            layer[v] = cand
            sub = (sub - 1) & mask
        # grow: attach a shortest path from the best-connected vertex
        changed = True
        while changed:
            changed = False
            for v in g.vertices:
                for w in g.vertices:
                    src = layer.get(w)
                    if src is None or v == w:
                        continue
                    pe = path_edges(w, v)
                    if pe is None:
                        continue
                    cand = src | pe
                    old = layer.get(v)
                    if old is None or key_of(cand) < key_of(old):
                        layer[v] = cand
                        changed = True
        for v, edges in layer.items():
            dp[(mask, v)] = edges
    result = dp.get((full, root))
    if result is None:
        raise PreconditionError("terminals are not all connected")
    return result


class TreeDuplicator:
    """Strategy for the random pair: per candidate placement u, rebuild the
    minimal tree spanning u and the pebbled vertices of its component, reuse
    last round's values where the trees overlap, propagate across short new
    segments, and solve long ones exactly; the bijection reads each vertex's
    value from its own tree."""

    def __init__(
        self,
        u1: GroupUgInstance,
        u2: GroupUgInstance,
        zmap: Dict[Tuple, Gf2Subspace],
        bmap: Dict[Tuple, Gf2Vector],
        r: int,
        assert_level: str = "full",
    ) -> None:
        if u1.vertices != u2.vertices or set(u1.bundle_map) != set(u2.bundle_map):
            raise PreconditionError("instances must share one base graph")
        if assert_level not in ("off", "edges", "full"):
            raise InvalidParameterError(f"unknown assert level {assert_level!r}")
        self.u1 = u1
        self.u2 = u2
        self.m = u1.m
        self.r = r
        self.graph = u1.graph()
        self.zmap = {e: zmap[e] for e in self.graph.edges}
        self.bmap = {e: bmap[e] for e in self.graph.edges}
        self.assert_level = assert_level
        self.comp_of: Dict = {}
        for comp in self.graph.components():
            for v in comp:
                self.comp_of[v] = comp[0]
        # per component: (edge set of the stored tree, values on its vertices)
        self.state: Dict = {}
        self._round_trees: Dict = {}

    # ---- per-round construction

    def bijection(self, view: GameView) -> GStarMap:
        pebbled: Dict = {}
        for pair in view.pebbles:
            if pair is None:
                continue
            (v, ga), (vb, gb) = pair
            if v != vb:
                raise StrategyViolationError(
                    "pebble pair spans two base vertices", side="duplicator"
                )
            pebbled[v] = ga + gb
        self._round_trees = {}
        values: Dict = {}
        for u in self.graph.vertices:
            tree_edges, vals = self._tree_for(u, pebbled)
            self._round_trees[u] = (tree_edges, vals)
            values[u] = vals[u]
            if self.assert_level == "full":
                self._assert_tree(u, tree_edges, vals, pebbled)
        if self.assert_level == "edges":
            for u in pebbled:
                self._assert_tree(u, *self._round_trees[u], pebbled)
        return GStarMap(self.m, values)

    def observe_placement(self, view: GameView) -> None:
        pair = view.pebbles[view.picked]
        if pair is None:
            return
        u_star = pair[0][0]
        self.state[self.comp_of[u_star]] = self._round_trees[u_star]

    def _tree_for(self, u, pebbled: Dict) -> Tuple[FrozenSet, Dict]:
        comp = self.comp_of[u]
        terminals = [u] + [v for v in pebbled if self.comp_of[v] == comp and v != u]
        tree_edges = steiner_tree(self.graph, terminals)
        prev_edges, prev_vals = self.state.get(comp, (frozenset(), {}))
        tree_vertices = {u}
        for a, b in tree_edges:
            tree_vertices.add(a)
            tree_vertices.add(b)
        vals = {v: prev_vals[v] for v in tree_vertices if v in prev_vals}
        deg: Dict = {}
        for a, b in tree_edges:
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
        marked = set(terminals)
        marked.update(v for v, d in deg.items() if d >= 3)
        marked.update(v for v in tree_vertices if v in prev_vals)
        new_edges = tree_edges - prev_edges
        segments = _split_segments(new_edges, marked)
        short = [s for s in segments if len(s) - 1 < self.r]
        long_segs = [s for s in segments if len(s) - 1 >= self.r]
        self._fill_short(short, vals)
        for seg in long_segs:
            if seg[0] not in vals:
                vals[seg[0]] = Gf2Vector.zero(self.m)
            if seg[-1] not in vals:
                vals[seg[-1]] = Gf2Vector.zero(self.m)
            vals.update(extend_along_path(seg, vals[seg[0]], vals[seg[-1]], self.zmap, self.bmap))
        if u not in vals:
            vals[u] = Gf2Vector.zero(self.m)
        for v in tree_vertices:
            if v not in vals:
                raise StrategyViolationError(
                    "tree vertex left undefined", side="duplicator", detail={"vertex": str(v)}
                )
        return tree_edges, vals

    def _fill_short(self, segments: List[List], vals: Dict) -> None:
        """The proof's while-loop: propagate across one-defined edges, else
        seed the least undefined vertex with zero; afterwards check every
        closed edge (a short segment both of whose ends arrived with values
        can only close consistently at theorem-scale girth)."""
        edges = []
        for seg in segments:
            edges.extend(normalize_edge(a, b) for a, b in zip(seg, seg[1:]))
        edges = sorted(set(edges), key=lambda e: (vertex_sort_key(e[0]), vertex_sort_key(e[1])))
        vertices = sorted({v for e in edges for v in e}, key=vertex_sort_key)
        pending = set(edges)
        while True:
            progressed = False
            for e in edges:
                if e not in pending:
                    continue
                d0, d1 = e[0] in vals, e[1] in vals
                if d0 and d1:
                    continue
                if d0 or d1:
                    src, dst = (e[0], e[1]) if d0 else (e[1], e[0])
                    vals[dst] = vals[src] + self.bmap[e]
                    pending.discard(e)
                    progressed = True
                    break
            if progressed:
                continue
            undefined = [v for v in vertices if v not in vals]
            if not undefined:
                break
            vals[undefined[0]] = Gf2Vector.zero(self.m)
        for e in pending:  # edges that closed with both ends already valued
            s = vals[e[0]] + vals[e[1]]
            if (self.bmap[e] + s) not in self.zmap[e]:
                raise StrategyViolationError(
                    "a short segment closed inconsistently (girth too small for the bound)",
                    side="duplicator",
                    detail={"edge": [str(x) for x in e]},
                )

    def _assert_tree(self, u, tree_edges: FrozenSet, vals: Dict, pebbled: Dict) -> None:
        for v, s in pebbled.items():
            if self.comp_of[v] == self.comp_of[u] and vals.get(v) != s:
                raise StrategyViolationError(
                    "pebbled vertex value drifted", side="duplicator",
                    detail={"vertex": str(v), "anchor": str(u)},
                )
        for e in tree_edges:
            s = vals[e[0]] + vals[e[1]]
            if (self.bmap[e] + s) not in self.zmap[e]:
                raise StrategyViolationError(
                    "tree edge inconsistent with its bundle", side="duplicator",
                    detail={"edge": [str(x) for x in e], "anchor": str(u)},
                )


def _split_segments(new_edges: FrozenSet, marked: set) -> List[List]:
    """Decompose a forest of fresh tree edges into paths whose interiors are
    unmarked; every leaf of the forest is marked, so the walk always ends."""
    adj: Dict = {}
    for a, b in new_edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    for v in adj:
        adj[v].sort(key=vertex_sort_key)
    seen_edges = set()
    segments = []
    for mv in sorted((v for v in adj if v in marked), key=vertex_sort_key):
        for w in adj[mv]:
            e = normalize_edge(mv, w)
            if e in seen_edges:
                continue
            seen_edges.add(e)
            seg = [mv, w]
            while seg[-1] not in marked:
                nxt = [x for x in adj[seg[-1]] if normalize_edge(seg[-1], x) not in seen_edges]
                if len(nxt) != 1:
                    raise StrategyViolationError(
                        "segment interior is not a simple chain", side="duplicator"
                    )
                seen_edges.add(normalize_edge(seg[-1], nxt[0]))
                seg.append(nxt[0])
            segments.append(seg)
    if len(seen_edges) != len(new_edges):
        raise StrategyViolationError("new tree edges contain an unmarked cycle", side="duplicator")
    return segments


def duplicator_tree(pair, assert_level: str = "full") -> TreeDuplicator:
    """Strategy over the good-edge restriction of a random pair."""
    return TreeDuplicator(pair.u1, pair.u2, pair.zmap, pair.bmap, pair.params.r, assert_level)


__all__ = [
    "LiftedStructure",
    "GStarMap",
    "GameView",
    "check_partial_isomorphism",
    "play_game",
    "RandomSpoiler",
    "spoiler_random",
    "find_winning_line",
    "spoiler_exhaustive",
    "IdentityDuplicator",
    "duplicator_identity",
    "K2Duplicator",
    "duplicator_k2",
    "CopsDuplicator",
    "duplicator_cops",
    "extend_along_path",
    "steiner_tree",
    "TreeDuplicator",
    "duplicator_tree",
]
