"""Instance data model, exact evaluation, label lift, and exact solvers.

Three instance kinds: group instances over F_2^m (per-edge bundles of
allowed differences, x_u + x_v = z), permutation unique games (a(u) =
pi(a(v))), and weighted CSPs with exact rational weights. Satisfiability
fractions are fractions.Fraction throughout; no floats on this path.
"""

from __future__ import annotations

import itertools
from collections import deque
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    IncompleteAssignmentError,
    InvalidParameterError,
    PreconditionError,
    SearchBudgetError,
)
from .gf2 import Gf2Vector
from .graphs import SimpleGraph, normalize_edge, vertex_sort_key

DEFAULT_BRUTE_BUDGET = 8_000_000  # assignments enumerated
DEFAULT_TREE_BUDGET = 1_000_000  # (tree, diff-choice) evaluations performed
DEFAULT_LIFT_VERTEX_CAP = 4096
_VECTORIZE_THRESHOLD = 50_000


def all_labels(m: int) -> List[Gf2Vector]:
    return [Gf2Vector(b, m) for b in range(1 << m)]


class GroupUgInstance:
    """Graph plus one bundle of allowed GF(2)^m differences per edge.

    Bundles given on the same unordered pair are merged by union, so each
    (u, v, z) triple counts once; an assignment satisfies at most one
    constraint per bundle because x_u + x_v pins the difference.
    """

    def __init__(self, m: int, vertices: Iterable, bundles: Iterable[Tuple]) -> None:
        if not 1 <= m <= 64:
            raise InvalidParameterError(f"m must be in 1..64, got {m}")
        self.m = m
        merged: Dict[Tuple, set] = {}
        for u, v, diffs in bundles:
            e = normalize_edge(u, v)
            acc = merged.setdefault(e, set())
            for z in diffs:
                if not isinstance(z, Gf2Vector) or z.dim != m:
                    raise InvalidParameterError(f"bundle diff {z!r} not in F_2^{m}")
                acc.add(z)
        for e, acc in merged.items():
            if not acc:
                raise InvalidParameterError(f"empty bundle on {e!r}")
        vs = set(vertices)
        for u, v in merged:
            vs.add(u)
            vs.add(v)
        self.vertices: Tuple = tuple(sorted(vs, key=vertex_sort_key))
        self.bundles: Tuple[Tuple, ...] = tuple(
            (e[0], e[1], tuple(sorted(diffs)))
            for e, diffs in sorted(
                merged.items(), key=lambda kv: (vertex_sort_key(kv[0][0]), vertex_sort_key(kv[0][1]))
            )
        )
        self.bundle_map: Dict[Tuple, Tuple[Gf2Vector, ...]] = {
            (u, v): diffs for u, v, diffs in self.bundles
        }

    @property
    def q(self) -> int:
        return 1 << self.m

    @property
    def constraint_count(self) -> int:
        return sum(len(d) for _, _, d in self.bundles)

    def diffs_on(self, u, v) -> Tuple[Gf2Vector, ...]:
        return self.bundle_map.get(normalize_edge(u, v), ())

    def graph(self) -> SimpleGraph:
        return SimpleGraph(self.vertices, [(u, v) for u, v, _ in self.bundles])

    def __repr__(self) -> str:
        return (
            f"GroupUgInstance(m={self.m}, |V|={len(self.vertices)}, "
            f"bundles={len(self.bundles)}, constraints={self.constraint_count})"
        )


class PermUgInstance:
    """Unique games with permutation constraints a(u) = perm(a(v))."""

    def __init__(self, q: int, vertices: Iterable, constraints: Iterable[Tuple]) -> None:
        if q < 1:
            raise InvalidParameterError(f"q must be >= 1, got {q}")
        self.q = q
        cons = []
        vs = set(vertices)
        for u, v, perm in constraints:
            if u == v:
                raise InvalidParameterError(f"self-loop constraint at {u!r}")
            perm = tuple(perm)
            if sorted(perm) != list(range(q)):
                raise InvalidParameterError(f"{perm!r} is not a permutation of 0..{q-1}")
            cons.append((u, v, perm))
            vs.add(u)
            vs.add(v)
        self.vertices: Tuple = tuple(sorted(vs, key=vertex_sort_key))
        self.constraints: Tuple[Tuple, ...] = tuple(cons)

    @property
    def constraint_count(self) -> int:
        return len(self.constraints)

    def graph(self) -> SimpleGraph:
        edges = {normalize_edge(u, v) for u, v, _ in self.constraints}
        return SimpleGraph(self.vertices, sorted(edges, key=lambda e: (vertex_sort_key(e[0]), vertex_sort_key(e[1]))))

    def __repr__(self) -> str:
        return f"PermUgInstance(q={self.q}, |V|={len(self.vertices)}, constraints={len(self.constraints)})"


class CspType:
    def __init__(self, arity: int, satisfying: Iterable[Tuple[int, ...]], q: int) -> None:
        if arity < 1:
            raise InvalidParameterError("arity must be >= 1")
        self.arity = arity
        sat = set()
        for t in satisfying:
            t = tuple(t)
            if len(t) != arity:
                raise InvalidParameterError(f"tuple {t!r} does not match arity {arity}")
            if any(not 0 <= x < q for x in t):
                raise InvalidParameterError(f"tuple {t!r} has entries outside 0..{q-1}")
            sat.add(t)
        self.satisfying = frozenset(sat)

    def __repr__(self) -> str:
        return f"CspType(arity={self.arity}, |sat|={len(self.satisfying)})"


class WeightedCspInstance:
    """Weighted CSP; weights are exact rationals and may be negative."""

    def __init__(
        self,
        q: int,
        variables: Iterable,
        constraint_types: Dict[str, CspType],
        applications: Iterable[Tuple],
    ) -> None:
        if q < 1:
            raise InvalidParameterError(f"q must be >= 1, got {q}")
        self.q = q
        self.constraint_types = dict(constraint_types)
        apps = []
        vs = set(variables)
        for tname, var_tuple, w in applications:
            if tname not in self.constraint_types:
                raise InvalidParameterError(f"unknown constraint type {tname!r}")
            ct = self.constraint_types[tname]
            var_tuple = tuple(var_tuple)
            if len(var_tuple) != ct.arity:
                raise InvalidParameterError(
                    f"application of {tname!r} has {len(var_tuple)} vars, arity is {ct.arity}"
                )
            apps.append((tname, var_tuple, Fraction(w)))
            vs.update(var_tuple)
        self.variables: Tuple = tuple(sorted(vs, key=vertex_sort_key))
        self.applications: Tuple[Tuple, ...] = tuple(apps)

    def total_weight(self) -> Fraction:
        return sum((w for _, _, w in self.applications), Fraction(0))

    def abs_weight(self) -> Fraction:
        return sum((abs(w) for _, _, w in self.applications), Fraction(0))

    def is_normalized(self) -> bool:
        return abs(self.total_weight()) <= 1

    def __repr__(self) -> str:
        return (
            f"WeightedCspInstance(q={self.q}, |V|={len(self.variables)}, "
            f"applications={len(self.applications)})"
        )


# -- evaluation ------------------------------------------------------------


def evaluate(instance, assignment: Dict) -> Tuple[int, Fraction]:
    """Satisfied-constraint count and exact fraction under a total assignment."""
    if isinstance(instance, GroupUgInstance):
        count = 0
        for u, v, diffs in instance.bundles:
            try:
                d = assignment[u] + assignment[v]
            except KeyError as exc:
                raise IncompleteAssignmentError(f"assignment misses vertex {exc.args[0]!r}") from exc
            if d in diffs:
                count += 1
        total = instance.constraint_count
    elif isinstance(instance, PermUgInstance):
        count = 0
        for u, v, perm in instance.constraints:
            try:
                au, av = assignment[u], assignment[v]
            except KeyError as exc:
                raise IncompleteAssignmentError(f"assignment misses vertex {exc.args[0]!r}") from exc
            if au == perm[av]:
                count += 1
        total = instance.constraint_count
    else:
        raise InvalidParameterError(f"cannot evaluate {type(instance).__name__}")
    for v in instance.vertices:
        if v not in assignment:
            raise IncompleteAssignmentError(f"assignment misses vertex {v!r}")
    if total == 0:
        return 0, Fraction(1)  # vacuous
    return count, Fraction(count, total)


def csp_value(instance: WeightedCspInstance, assignment: Dict) -> Fraction:
    total = Fraction(0)
    for tname, var_tuple, w in instance.applications:
        ct = instance.constraint_types[tname]
        try:
            values = tuple(assignment[x] for x in var_tuple)
        except KeyError as exc:
            raise IncompleteAssignmentError(f"assignment misses variable {exc.args[0]!r}") from exc
        if values in ct.satisfying:
            total += w
    return total


# -- brute force -----------------------------------------------------------


def _group_bundle_specs(instance: GroupUgInstance, pos: Dict, fixed: Dict) -> List[Tuple]:
    specs = []
    for u, v, diffs in instance.bundles:
        du, dv = pos.get(u), pos.get(v)
        base = 0
        if du is None:
            base ^= fixed[u].bits
        if dv is None:
            base ^= fixed[v].bits
        specs.append((du, dv, base, tuple(z.bits for z in diffs)))
    return specs


def _count_group(specs: Sequence[Tuple], values: Sequence[int]) -> int:
    count = 0
    for du, dv, base, zbits in specs:
        d = base
        if du is not None:
            d ^= values[du]
        if dv is not None:
            d ^= values[dv]
        if d in zbits:
            count += 1
    return count


def _brute_group_python(instance, free, fixed, early_stop) -> Tuple[int, Tuple[int, ...]]:
    q = instance.q
    pos = {v: i for i, v in enumerate(free)}
    specs = _group_bundle_specs(instance, pos, fixed)
    best_count, best_vals = -1, None
    for values in itertools.product(range(q), repeat=len(free)):
        c = _count_group(specs, values)
        if c > best_count:
            best_count, best_vals = c, values
            if c >= early_stop:
                break
    return best_count, best_vals


def _brute_group_numpy(instance, free, fixed, early_stop) -> Tuple[int, Tuple[int, ...]]:
    q = instance.q
    k = len(free)
    total = q**k
    pos = {v: i for i, v in enumerate(free)}
    specs = _group_bundle_specs(instance, pos, fixed)
    weights = [q ** (k - 1 - i) for i in range(k)]  # first vertex most significant
    best_count, best_idx = -1, -1
    chunk = 1 << 18
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        vals = [(idx // w) % q for w in weights]
        counts = np.zeros(idx.shape, dtype=np.int32)
        for du, dv, base, zbits in specs:
            d = np.full(idx.shape, base, dtype=np.int64)
            if du is not None:
                d ^= vals[du]
            if dv is not None:
                d ^= vals[dv]
            for z in zbits:
                counts += d == z
        cmax = int(counts.max())
        if cmax > best_count:
            best_count = cmax
            best_idx = start + int(np.argmax(counts))  # first occurrence = lex-least
        if best_count >= early_stop:
            break
    values = tuple((best_idx // w) % q for w in weights)
    return best_count, values


def _brute_group_component(instance, comp, budget) -> Tuple[int, Dict]:
    """Exact optimum on one connected component; lex-least witness."""
    comp = sorted(comp, key=vertex_sort_key)
    q = instance.q
    sub_bundles = [b for b in instance.bundles if b[0] in comp]
    early = len(sub_bundles)
    sub = GroupUgInstance(instance.m, comp, sub_bundles) if sub_bundles else None
    if sub is None:
        return 0, {v: Gf2Vector.zero(instance.m) for v in comp}
    root, rest = comp[0], comp[1:]
    fixed = {root: Gf2Vector.zero(instance.m)}
    space = q ** len(rest)
    if space > budget:
        raise SearchBudgetError(f"search space {space} exceeds budget {budget}")
    if space > _VECTORIZE_THRESHOLD:
        count, values = _brute_group_numpy(sub, rest, fixed, early)
    else:
        count, values = _brute_group_python(sub, rest, fixed, early)
    witness = dict(fixed)
    for v, bits in zip(rest, values):
        witness[v] = Gf2Vector(bits, instance.m)
    return count, witness


def brute_force_opt(
    instance, fix_root: Optional[bool] = None, budget: Optional[int] = None
) -> Tuple[int, Fraction, Dict]:
    """Exact maximum satisfied count by exhaustion, with lex-least witness.

    Group instances over a connected graph fix the first vertex to zero
    (every assignment family is closed under a global shift, so an optimal
    root-zero assignment always exists). Disconnected group instances are
    enumerated fully per component and merged.
    """
    if budget is None:
        budget = DEFAULT_BRUTE_BUDGET
    if isinstance(instance, GroupUgInstance):
        g = instance.graph()
        connected = g.is_connected()
        if fix_root and not connected:
            raise PreconditionError("root fixing requires a connected instance")
        use_root = connected if fix_root is None else fix_root
        total = instance.constraint_count
        if use_root:
            count, witness = _brute_group_component(instance, instance.vertices, budget)
        else:
            count, witness = 0, {}
            for comp in g.components():
                c, w = _brute_group_component(instance, comp, budget)
                count += c
                witness.update(w)
        frac = Fraction(count, total) if total else Fraction(1)
        return count, frac, witness
    if isinstance(instance, PermUgInstance):
        q, vs = instance.q, instance.vertices
        space = q ** len(vs)
        if space > budget:
            raise SearchBudgetError(f"search space {space} exceeds budget {budget}")
        early = instance.constraint_count
        best_count, best_vals = -1, None
        cons = [(vs.index(u), vs.index(v), perm) for u, v, perm in instance.constraints]
        for values in itertools.product(range(q), repeat=len(vs)):
            c = sum(1 for iu, iv, perm in cons if values[iu] == perm[values[iv]])
            if c > best_count:
                best_count, best_vals = c, values
                if c >= early:
                    break
        witness = dict(zip(vs, best_vals))
        frac = Fraction(best_count, early) if early else Fraction(1)
        return best_count, frac, witness
    raise InvalidParameterError(f"cannot brute-force {type(instance).__name__}")


def csp_brute_opt(
    instance: WeightedCspInstance, budget: Optional[int] = None
) -> Tuple[Fraction, Dict]:
    if budget is None:
        budget = DEFAULT_BRUTE_BUDGET
    vs = instance.variables
    space = instance.q ** len(vs)
    if space > budget:
        raise SearchBudgetError(f"search space {space} exceeds budget {budget}")
    upper = sum((w for _, _, w in instance.applications if w > 0), Fraction(0))
    best_val, best_witness = None, None
    for values in itertools.product(range(instance.q), repeat=len(vs)):
        a = dict(zip(vs, values))
        val = csp_value(instance, a)
        if best_val is None or val > best_val:
            best_val, best_witness = val, a
            if val >= upper:
                break
    if best_val is None:  # no variables at all
        return Fraction(0), {}
    return best_val, best_witness


# -- propagation for permutation instances ---------------------------------


def propagate_complete_sat(instance: PermUgInstance) -> Tuple[bool, Optional[Dict]]:
    """Complete-satisfiability test: per component, try each root label and
    propagate forced labels along constraints, then check every constraint."""
    adj: Dict = {v: [] for v in instance.vertices}
    for u, v, perm in instance.constraints:
        inv = [0] * instance.q
        for j, i in enumerate(perm):
            inv[i] = j
        adj[u].append((v, tuple(inv)))  # a(v) = perm^{-1}(a(u))
        adj[v].append((u, perm))  # a(u) = perm(a(v))
    witness: Dict = {}
    comp_of: Dict = {}
    comps = []
    for s in instance.vertices:
        if s in comp_of:
            continue
        comp = [s]
        comp_of[s] = s
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y, _ in adj[x]:
                if y not in comp_of:
                    comp_of[y] = s
                    comp.append(y)
                    queue.append(y)
        comps.append(comp)
    for comp in comps:
        root = comp[0]
        found = None
        for label in range(instance.q):
            a = {root: label}
            queue = deque([root])
            ok = True
            while queue and ok:
                x = queue.popleft()
                for y, f in adj[x]:
                    forced = f[a[x]]
                    if y not in a:
                        a[y] = forced
                        queue.append(y)
                    elif a[y] != forced:
                        ok = False
                        break
            if ok:
                found = a
                break
        if found is None:
            return False, None
        witness.update(found)
    count, frac = evaluate(instance, witness)
    if count != instance.constraint_count:
        return False, None
    return True, witness


# -- label lift --------------------------------------------------------------


def label_lift(instance: GroupUgInstance, max_vertices: int = DEFAULT_LIFT_VERTEX_CAP) -> GroupUgInstance:
    """Materialized lift: vertices (v, g bits); constraint x_{v1}^{g1} +
    x_{v2}^{g2} = z + g1 + g2 for every base constraint and every g1, g2."""
    q = instance.q
    n_lifted = len(instance.vertices) * q
    if n_lifted > max_vertices:
        raise SearchBudgetError(f"lift has {n_lifted} vertices, cap is {max_vertices}")
    lifted_vertices = [(v, g) for v in instance.vertices for g in range(q)]
    bundles = []
    for u, v, diffs in instance.bundles:
        for g1 in range(q):
            for g2 in range(q):
                shift = g1 ^ g2
                bundles.append(
                    ((u, g1), (v, g2), [Gf2Vector(z.bits ^ shift, instance.m) for z in diffs])
                )
    return GroupUgInstance(instance.m, lifted_vertices, bundles)


def lifted_allowed_diffs(base: GroupUgInstance, a: Tuple, b: Tuple) -> frozenset:
    """Allowed differences between lifted vertices a = (u, g1), b = (v, g2),
    without materializing the lift; empty when the base has no bundle."""
    (u, g1), (v, g2) = a, b
    if u == v:
        return frozenset()  # clones of one base vertex share no edge
    diffs = base.diffs_on(u, v)
    shift = g1.bits ^ g2.bits
    return frozenset(Gf2Vector(z.bits ^ shift, base.m) for z in diffs)


def lifted_opt(instance: GroupUgInstance) -> Tuple[int, Fraction, Dict]:
    """Exact optimum of the lifted instance without materializing it.

    Substituting y_v^g := x_v^g + g turns every lifted constraint into
    y_{v1}^{g1} + y_{v2}^{g2} = z, which no longer mentions g1, g2. The
    satisfied count then depends only on each vertex's label-count profile
    (how many of its q copies take each label), so we maximize over profile
    tuples instead of the q^(q|V|) raw assignments.
    """
    q = instance.q
    n = len(instance.vertices)
    profiles = [p for p in _compositions(q, q)]
    P = np.array(profiles, dtype=np.int32)  # (#profiles, q) count matrix
    np_profiles = len(profiles)
    if np_profiles**n > 5_000_000:
        raise SearchBudgetError(f"profile space {np_profiles}^{n} too large")
    pos = {v: i for i, v in enumerate(instance.vertices)}
    # pairwise score of profiles p, r on a bundle: sum over labels a, b with
    # a + b in diffs of count_p[a] * count_r[b]
    total = np.zeros((np_profiles,) * n, dtype=np.int32)
    for u, v, diffs in instance.bundles:
        M = np.zeros((np_profiles, np_profiles), dtype=np.int32)
        for z in diffs:
            perm = [a ^ z.bits for a in range(q)]
            M += P @ P[:, perm].T
        iu, iv = pos[u], pos[v]
        # broadcast M into the (iu, iv) axes of the profile grid
        axes = sorted([(iu, 0), (iv, 1)])
        block = M if axes[0][1] == 0 else M.T
        shape = [1] * n
        shape[iu] = np_profiles
        shape[iv] = np_profiles
        total += block.reshape(shape)
    flat_idx = int(np.argmax(total))
    best = int(total.flat[flat_idx])
    chosen = np.unravel_index(flat_idx, total.shape)
    witness: Dict = {}
    for v in instance.vertices:
        counts = profiles[chosen[pos[v]]]
        labels = [a for a in range(q) for _ in range(counts[a])]  # sorted multiset
        for g, y in enumerate(labels):
            witness[(v, g)] = Gf2Vector(y ^ g, instance.m)
    total_constraints = instance.constraint_count * q * q
    frac = Fraction(best, total_constraints) if total_constraints else Fraction(1)
    return best, frac, witness


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


# -- spanning tree oracle ----------------------------------------------------


def spanning_tree_opt(
    instance: GroupUgInstance, budget: Optional[int] = None
) -> Tuple[int, Fraction, Dict]:
    """Exact optimum for connected group instances via spanning-tree search.

    Every optimal assignment restricted to the edges it satisfies extends a
    spanning forest, so for some spanning tree and some per-tree-edge choice
    of allowed difference, propagating from a zero root reproduces an optimal
    assignment up to a shift. The budget counts evaluations performed.
    """
    import networkx as nx

    if budget is None:
        budget = DEFAULT_TREE_BUDGET
    g = instance.graph()
    if not g.is_connected():
        raise PreconditionError("spanning tree oracle requires a connected instance")
    early = len(instance.bundles)
    total = instance.constraint_count
    root = g.vertices[0]
    zero = Gf2Vector.zero(instance.m)
    best_count, best_witness, best_key = -1, None, None
    evals = 0
    for tree in nx.SpanningTreeIterator(g.to_networkx()):
        tree_edges = [normalize_edge(u, v) for u, v in tree.edges()]
        adj: Dict = {v: [] for v in g.vertices}
        for u, v in tree_edges:
            adj[u].append((v, (u, v)))
            adj[v].append((u, (u, v)))
        order = []  # (vertex, parent, edge) in BFS order from root
        seen = {root}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y, e in adj[x]:
                if y not in seen:
                    seen.add(y)
                    order.append((y, x, e))
                    queue.append(y)
        choice_sets = [instance.bundle_map[e] for e in tree_edges]
        for combo in itertools.product(*choice_sets):
            evals += 1
            if evals > budget:
                raise SearchBudgetError(f"spanning tree search exceeded budget {budget}")
            zmap = dict(zip(tree_edges, combo))
            a = {root: zero}
            for y, x, e in order:
                a[y] = a[x] + zmap[e]
            count, _ = evaluate(instance, a)
            if count > best_count:
                key = tuple(a[v].bits for v in instance.vertices)
                best_count, best_witness, best_key = count, a, key
            elif count == best_count:
                key = tuple(a[v].bits for v in instance.vertices)
                if key < best_key:
                    best_witness, best_key = a, key
            if best_count >= early:
                frac = Fraction(best_count, total) if total else Fraction(1)
                return best_count, frac, best_witness
    frac = Fraction(best_count, total) if total else Fraction(1)
    return best_count, frac, best_witness


__all__ = [
    "GroupUgInstance",
    "PermUgInstance",
    "CspType",
    "WeightedCspInstance",
    "all_labels",
    "evaluate",
    "csp_value",
    "brute_force_opt",
    "csp_brute_opt",
    "propagate_complete_sat",
    "label_lift",
    "lifted_allowed_diffs",
    "lifted_opt",
    "spanning_tree_opt",
    "DEFAULT_BRUTE_BUDGET",
    "DEFAULT_TREE_BUDGET",
]
