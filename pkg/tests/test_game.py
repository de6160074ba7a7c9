"""Pebble game engine, strategies, and the tree machinery underneath."""

from __future__ import annotations

import json
import random

import pytest

from uglab.constructions import (
    ParamSet,
    cops_robbers_graph,
    cubic_edge_coloring,
    k4_klein_inputs,
    klein_pair,
    random_inapprox_pair,
)
from uglab.errors import (
    NotInSpanError,
    PreconditionError,
    StrategyViolationError,
)
from uglab.game import (
    GStarMap,
    LiftedStructure,
    check_partial_isomorphism,
    duplicator_cops,
    duplicator_identity,
    duplicator_k2,
    duplicator_tree,
    extend_along_path,
    find_winning_line,
    play_game,
    spoiler_random,
    steiner_tree,
)
from uglab.gf2 import Gf2Subspace, Gf2Vector, random_subspace, random_vector, span_of
from uglab.graphs import SimpleGraph, cycle_graph, normalize_edge, path_graph, petersen_graph
from uglab.instances import GroupUgInstance, lifted_allowed_diffs

from fractions import Fraction


def klein_lifts():
    g, coloring, star = k4_klein_inputs()
    u1, u2 = klein_pair(g, coloring, star)
    return u1, u2, LiftedStructure(u1), LiftedStructure(u2), g, coloring, star


def test_lifted_structure_basics():
    u1, _, A, _, _, _, _ = klein_lifts()
    assert A.universe_size() == 16
    els = A.elements()
    assert len(set(els)) == 16
    assert A.has_element(("v1", Gf2Vector(3, 2)))
    assert not A.has_element(("v9", Gf2Vector(0, 2)))
    a = ("v1", Gf2Vector(1, 2))
    b = ("v2", Gf2Vector(2, 2))
    assert A.allowed_diffs(a, b) == lifted_allowed_diffs(u1, a, b)


def test_gstar_map():
    g = GStarMap(2, {"x": Gf2Vector(3, 2)})
    assert g.apply(("x", Gf2Vector(1, 2))) == ("x", Gf2Vector(2, 2))
    assert g.apply(("y", Gf2Vector(1, 2))) == ("y", Gf2Vector(1, 2))
    assert g.to_hex() == {"x": "3"}


def test_partial_isomorphism_identity_pairs():
    _, _, A, _, _, _, _ = klein_lifts()
    els = A.elements()
    pairs = [(els[0], els[0]), (els[5], els[5]), (els[9], els[9])]
    assert check_partial_isomorphism(A, A, pairs)


def test_partial_isomorphism_star_pinned():
    _, _, A, B, _, _, star = klein_lifts()
    zero = Gf2Vector.zero(2)
    pairs = [
        ((star[0], zero), (star[0], zero)),
        ((star[1], zero), (star[1], zero)),
    ]
    assert not check_partial_isomorphism(A, B, pairs)


def test_partial_isomorphism_well_defined():
    _, _, A, _, _, _, _ = klein_lifts()
    a = ("v1", Gf2Vector(0, 2))
    b = ("v1", Gf2Vector(1, 2))
    assert not check_partial_isomorphism(A, A, [(a, a), (a, b)])
    assert not check_partial_isomorphism(A, A, [(a, b), (b, b)])


def test_play_game_identity_on_self():
    u1, _, A, _, _, _, _ = klein_lifts()
    t = play_game(A, A, 3, duplicator_identity(2), spoiler_random(random.Random(5)), 40)
    assert t["winner"] is None
    assert t["survived"] == 40
    assert len(t["rounds"]) == 40
    json.dumps(t)  # transcript must be serializable
    r = t["rounds"][0]
    assert set(r) == {"round", "picked", "gstar", "placement", "ok"}


def test_play_game_size_mismatch():
    _, _, A, _, _, _, _ = klein_lifts()
    small = LiftedStructure(GroupUgInstance(2, ["w"], []))
    with pytest.raises(PreconditionError):
        play_game(A, small, 2, duplicator_identity(2), spoiler_random(random.Random(0)), 5)


def test_identity_duplicator_loses_on_the_pair():
    _, _, A, B, _, _, _ = klein_lifts()
    line = find_winning_line(A, B, 2, lambda: duplicator_identity(2), depth=2)
    assert line is not None
    assert len(line) <= 2


def test_k2_duplicator_survives_exhaustive_depth3():
    u1, u2, A, B, _, _, _ = klein_lifts()
    line = find_winning_line(A, B, 2, lambda: duplicator_k2(u1, u2), depth=3)
    assert line is None


def singleton_pair():
    vs = ["a", "b", "c", "d"]
    edges = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]
    zero = Gf2Vector.zero(2)
    diffs = [Gf2Vector(1, 2), Gf2Vector(2, 2), Gf2Vector(3, 2), Gf2Vector(1, 2)]
    u2 = GroupUgInstance(2, vs, [(u, v, [z]) for (u, v), z in zip(edges, diffs)])
    u1 = GroupUgInstance(2, vs, [(u, v, [zero]) for u, v in edges])
    return u1, u2


def test_k2_duplicator_on_singleton_twin():
    u1, u2 = singleton_pair()
    A, B = LiftedStructure(u1), LiftedStructure(u2)
    assert find_winning_line(A, B, 2, lambda: duplicator_k2(u1, u2), depth=3) is None
    assert find_winning_line(A, B, 2, lambda: duplicator_identity(2), depth=2) is not None


def test_k2_duplicator_validation():
    u1, u2 = singleton_pair()
    other = GroupUgInstance(2, ["a", "b"], [("a", "b", [Gf2Vector(0, 2)])])
    with pytest.raises(PreconditionError):
        duplicator_k2(u1, other)


class _CheatingDuplicator:
    """Shifts a pebbled vertex on round two; the engine must object."""

    def __init__(self):
        self.calls = 0

    def bijection(self, view):
        self.calls += 1
        if self.calls == 1:
            return GStarMap(2, {})
        placed = [p for p in view.pebbles if p is not None]
        if not placed:
            return GStarMap(2, {})
        v = placed[0][0][0]
        return GStarMap(2, {v: Gf2Vector(1, 2)})


class _StubbornSpoiler:
    def __init__(self, element):
        self.element = element

    def pick_up(self, view):
        for i, p in enumerate(view.pebbles):
            if p is None:
                return i
        return 0

    def place(self, view, gstar):
        return self.element


def test_play_game_rejects_moving_placed_pairs():
    _, _, A, _, _, _, _ = klein_lifts()
    spoiler = _StubbornSpoiler(A.elements()[0])
    with pytest.raises(StrategyViolationError):
        play_game(A, A, 2, _CheatingDuplicator(), spoiler, 3)


# -- pursuit strategy --------------------------------------------------------------


def test_cops_duplicator_k4_random_rounds():
    u1, u2, A, B, g, coloring, star = klein_lifts()
    dup = duplicator_cops(u1, u2, g, coloring, star, assert_level="full")
    t = play_game(A, B, 3, dup, spoiler_random(random.Random(11)), 200)
    assert t["winner"] is None
    assert t["survived"] == 200


def test_cops_duplicator_cycle_graph_random_rounds():
    h = cops_robbers_graph(3)
    coloring = cubic_edge_coloring(h)
    star = h.edges[0]
    u1, u2 = klein_pair(h, coloring, star)
    A, B = LiftedStructure(u1), LiftedStructure(u2)
    dup = duplicator_cops(u1, u2, h, coloring, star, assert_level="full")
    t = play_game(A, B, 3, dup, spoiler_random(random.Random(12)), 200)
    assert t["winner"] is None
    assert t["survived"] == 200


def test_cops_duplicator_assert_levels_run():
    u1, u2, A, B, g, coloring, star = klein_lifts()
    for level in ("off", "edges", "full"):
        dup = duplicator_cops(u1, u2, g, coloring, star, assert_level=level)
        t = play_game(A, B, 3, dup, spoiler_random(random.Random(13)), 30)
        assert t["winner"] is None


# -- path extension ------------------------------------------------------------------


def test_extend_along_path_random():
    rng = random.Random(42)
    spanning, skipped = 0, 0
    for _ in range(500):
        m = rng.choice([2, 3, 4])
        length = rng.randrange(2, 7)
        path = [f"p{i}" for i in range(length + 1)]
        zmap, bmap = {}, {}
        for a, b in zip(path, path[1:]):
            e = normalize_edge(a, b)
            zmap[e] = random_subspace(m, rng.choice([1, 2]), rng)
            bmap[e] = random_vector(m, rng)
        pool = [z for e in zmap for z in zmap[e].basis]
        g_start = random_vector(m, rng)
        g_end = random_vector(m, rng)
        if span_of(pool, m).rank < m:
            skipped += 1
            with pytest.raises(NotInSpanError):
                extend_along_path(path, g_start, g_end, zmap, bmap)
            continue
        spanning += 1
        vals = extend_along_path(path, g_start, g_end, zmap, bmap)
        full = dict(vals)
        full[path[0]] = g_start
        full[path[-1]] = g_end
        for a, b in zip(path, path[1:]):
            e = normalize_edge(a, b)
            s = full[a] + full[b]
            assert (bmap[e] + s) in zmap[e]
    assert spanning > 100 and skipped > 20


def test_extend_along_path_single_edge():
    e = normalize_edge("x", "y")
    zmap = {e: Gf2Subspace.from_vectors([Gf2Vector(1, 2), Gf2Vector(2, 2)], 2)}
    bmap = {e: Gf2Vector(3, 2)}
    vals = extend_along_path(["x", "y"], Gf2Vector(0, 2), Gf2Vector(1, 2), zmap, bmap)
    assert vals == {}  # no interior; endpoints already consistent


# -- minimal trees ------------------------------------------------------------------


def test_steiner_tree_two_terminals():
    g = path_graph(5)
    assert steiner_tree(g, [0, 4]) == frozenset({(0, 1), (1, 2), (2, 3), (3, 4)})
    c = cycle_graph(6)
    assert steiner_tree(c, [0, 3]) == frozenset({(0, 1), (1, 2), (2, 3)})
    assert steiner_tree(g, [2]) == frozenset()


def _tree_is_connected_cover(g, edges, terminals):
    if not edges:
        return len(set(terminals)) <= 1
    verts = {v for e in edges for v in e}
    if not set(terminals) <= verts:
        return False
    # connectivity over the edge set
    adj = {v: [] for v in verts}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {next(iter(verts))}
    stack = [next(iter(verts))]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen == verts and len(edges) == len(verts) - 1


def _brute_steiner_size(g, terminals):
    from itertools import combinations

    terms = set(terminals)
    others = [v for v in g.vertices if v not in terms]
    for extra in range(len(others) + 1):
        for added in combinations(others, extra):
            verts = terms | set(added)
            sub = g.subgraph(verts)
            if len(sub.edges) >= len(verts) - 1:
                comp = sub.components()
                if len(comp) == 1:
                    return len(verts) - 1
    raise AssertionError("terminals disconnected")


@pytest.mark.parametrize("terminals", [[0, 5, 7], [1, 3, 8], [0, 2, 6, 9]])
def test_steiner_tree_matches_brute_minimum(terminals):
    g = petersen_graph()
    edges = steiner_tree(g, terminals)
    assert _tree_is_connected_cover(g, edges, terminals)
    assert len(edges) == _brute_steiner_size(g, terminals)


def test_steiner_tree_is_deterministic():
    g = petersen_graph()
    a = steiner_tree(g, [0, 5, 7])
    b = steiner_tree(g, [7, 0, 5])
    assert a == b


# -- tree strategy -----------------------------------------------------------------


def desk_params():
    return ParamSet(
        alpha=Fraction(1),
        gamma=Fraction(1, 4),
        epsilon=Fraction(1, 4),
        d=3,
        ell=2,
        m=3,
        r=3,
        q=8,
    )


def desk_pair(seed):
    with pytest.warns(UserWarning):
        return random_inapprox_pair(desk_params(), petersen_graph(), random.Random(seed))


@pytest.mark.parametrize("seed", [0, 1])
def test_tree_duplicator_survives_random_rounds(seed):
    pair = desk_pair(seed)
    A, B = LiftedStructure(pair.u1), LiftedStructure(pair.u2)
    dup = duplicator_tree(pair, assert_level="full")
    t = play_game(A, B, 2, dup, spoiler_random(random.Random(100 + seed)), 100)
    assert t["winner"] is None
    assert t["survived"] == 100


def test_tree_duplicator_respects_pebbles_under_search():
    pair = desk_pair(2)
    A, B = LiftedStructure(pair.u1), LiftedStructure(pair.u2)
    line = find_winning_line(
        A, B, 2, lambda: duplicator_tree(pair, assert_level="full"), depth=2, budget=60_000
    )
    assert line is None
