"""Batch command line: generate instances, solve them, play games, run relaxations.

Every output file is JSON or line text, written atomically.  Randomized runs
record their seed; timestamps are suppressed with --no-timestamp so reruns
with one RunConfig produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from datetime import datetime, timezone
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import formats
from .constructions import (
    ParamSet,
    cops_robbers_graph,
    compute_params,
    cubic_edge_coloring,
    InapproxPair,
    k4_klein_inputs,
    klein_pair,
    random_inapprox_pair,
    unsat_complete_graph,
)
from .errors import (
    ConvergenceError,
    IncompleteAssignmentError,
    InvalidParameterError,
    NotInSpanError,
    PreconditionError,
    SearchBudgetError,
    StrategyViolationError,
    UglabError,
)
from .game import (
    LiftedStructure,
    duplicator_cops,
    duplicator_identity,
    duplicator_k2,
    duplicator_tree,
    play_game,
    spoiler_random,
)
from .gf2 import Gf2Subspace, Gf2Vector
from .graphs import SimpleGraph, normalize_edge, petersen_graph
from .instances import (
    GroupUgInstance,
    PermUgInstance,
    WeightedCspInstance,
    brute_force_opt,
    csp_brute_opt,
    label_lift,
    propagate_complete_sat,
    spanning_tree_opt,
)
from .sdp import (
    build_lc_relaxation,
    build_maxcut_sdp,
    gap_curve_estimate,
    gw_alpha,
    gw_symmetric_value,
    hyperplane_round,
    solve_sdp_lowrank,
    to_sdpa,
)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)  # handles "3/4", "-2", and decimal strings
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad rational {text!r}")


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _stamp(args, extra: Dict) -> Dict:
    if not getattr(args, "no_timestamp", False):
        extra["generated"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return extra


def _edge_key(e: Tuple) -> str:
    return f"{e[0]} {e[1]}"


def _load_instance(path: str):
    text = _read(path)
    if path.endswith(".gug"):
        return formats.parse_gug(text), "group"
    if path.endswith(".pug"):
        return formats.parse_pug(text), "perm"
    if path.endswith(".csp"):
        return formats.parse_csp(text), "csp"
    raise InvalidParameterError(f"unknown instance extension on {path!r} (expect .gug/.pug/.csp)")


def _witness_json(witness: Dict) -> Dict:
    out = {}
    for v in sorted(witness, key=str):
        label = witness[v]
        out[str(v)] = label.to_hex() if isinstance(label, Gf2Vector) else int(label)
    return out


# -- gen ------------------------------------------------------------------------


def cmd_gen_unsat(args) -> int:
    inst = unsat_complete_graph(args.delta)
    formats.atomic_write_text(args.out, formats.write_gug(inst))
    print(f"wrote {args.out}: {len(inst.vertices)} vertices, {inst.constraint_count} bundles")
    return 0


def cmd_gen_klein(args) -> int:
    if args.cops:
        h = cops_robbers_graph(args.cops)
        coloring = cubic_edge_coloring(h)
        star = h.edges[0]
    else:
        h, coloring, star = k4_klein_inputs()
    u1, u2 = klein_pair(h, coloring, star)
    os.makedirs(args.out_dir, exist_ok=True)
    p1 = os.path.join(args.out_dir, "u1.gug")
    p2 = os.path.join(args.out_dir, "u2.gug")
    formats.atomic_write_text(p1, formats.write_gug(u1))
    formats.atomic_write_text(p2, formats.write_gug(u2))
    sidecar = _stamp(args, {
        "kind": "klein",
        "m": 2,
        "u1": "u1.gug",
        "u2": "u2.gug",
        "graph": {
            "vertices": [str(v) for v in h.vertices],
            "edges": [[str(u), str(v)] for u, v in h.edges],
        },
        "coloring": {_edge_key(e): c for e, c in sorted(coloring.items())},
        "star": [str(star[0]), str(star[1])],
    })
    formats.atomic_write_json(os.path.join(args.out_dir, "pair.json"), sidecar)
    print(f"wrote {args.out_dir}: u1.gug u2.gug pair.json (star {star[0]}-{star[1]})")
    return 0


def cmd_gen_cops_graph(args) -> int:
    h = cops_robbers_graph(args.k)
    formats.atomic_write_text(args.out, formats.write_graph(h))
    print(f"wrote {args.out}: {len(h.vertices)} vertices, {len(h.edges)} edges")
    return 0


def _base_graph(name: str) -> SimpleGraph:
    if name == "petersen":
        return petersen_graph()
    if name.startswith("cops:"):
        return cops_robbers_graph(int(name.split(":", 1)[1]))
    return formats.parse_graph(_read(name))


def cmd_gen_random_pair(args) -> int:
    base = _base_graph(args.base)
    d = base.regular_degree()
    params = ParamSet(
        Fraction(1), Fraction(1, 4), Fraction(1, 4), d, args.ell, args.m, args.r, 2**args.m
    )
    pair = random_inapprox_pair(
        params, base, random.Random(args.seed), k=args.k, good_override=args.good_override
    )
    os.makedirs(args.out_dir, exist_ok=True)
    formats.atomic_write_text(os.path.join(args.out_dir, "u1.gug"), formats.write_gug(pair.u1))
    formats.atomic_write_text(os.path.join(args.out_dir, "u2.gug"), formats.write_gug(pair.u2))
    sidecar = _stamp(args, {
        "kind": "tree",
        "seed": args.seed,
        "u1": "u1.gug",
        "u2": "u2.gug",
        "graph": {
            "vertices": [str(v) for v in base.vertices],
            "edges": [[str(u), str(v)] for u, v in base.edges],
        },
        "params": {
            "alpha": str(params.alpha),
            "gamma": str(params.gamma),
            "epsilon": str(params.epsilon),
            "d": params.d,
            "ell": params.ell,
            "m": params.m,
            "r": params.r,
            "q": params.q,
        },
        "zmap": {_edge_key(e): [v.to_hex() for v in sub.basis] for e, sub in sorted(pair.zmap.items())},
        "bmap": {_edge_key(e): v.to_hex() for e, v in sorted(pair.bmap.items())},
        "good": [[str(u), str(v)] for u, v in sorted(pair.good)],
        "girth_ok": pair.girth_ok,
    })
    formats.atomic_write_json(os.path.join(args.out_dir, "pair.json"), sidecar)
    print(
        f"wrote {args.out_dir}: u1.gug u2.gug pair.json "
        f"({len(pair.good)} good of {len(base.edges)} edges, girth_ok={pair.girth_ok})"
    )
    return 0


# -- lift and solve ----------------------------------------------------------------


def cmd_lift(args) -> int:
    inst, kind = _load_instance(args.infile)
    if kind != "group":
        raise PreconditionError("lift applies to group instances (.gug)")
    lifted = label_lift(inst, max_vertices=args.max_vertices)
    # lifted vertices are (base, group-element) pairs; files need flat names
    name = {vg: f"{vg[0]}@{vg[1]:x}" for vg in lifted.vertices}
    flat = GroupUgInstance(
        lifted.m,
        [name[vg] for vg in lifted.vertices],
        [(name[a], name[b], diffs) for a, b, diffs in lifted.bundles],
    )
    formats.atomic_write_text(args.out, formats.write_gug(flat))
    print(f"wrote {args.out}: {len(lifted.vertices)} vertices, {lifted.constraint_count} bundles")
    return 0


def cmd_solve(args) -> int:
    inst, kind = _load_instance(args.infile)
    out: Dict = {"solver": args.mode, "input": os.path.basename(args.infile)}
    witness: Optional[Dict] = None
    if args.mode == "propagate":
        if kind != "perm":
            raise PreconditionError("propagate applies to permutation instances (.pug)")
        complete, witness = propagate_complete_sat(inst)
        out["complete"] = complete
        print(f"completely satisfiable: {complete}")
    elif kind == "csp":
        if args.mode != "brute":
            raise PreconditionError("weighted CSPs only support the brute solver")
        value, witness = csp_brute_opt(inst, budget=args.budget)
        out.update({
            "value": str(value),
            "vacuous": len(inst.applications) == 0,
        })
        print(f"optimum weight {value}")
    else:
        if args.mode == "brute":
            count, frac, witness = brute_force_opt(inst, budget=args.budget)
        else:
            if kind != "group":
                raise PreconditionError("the tree solver applies to group instances (.gug)")
            count, frac, witness = spanning_tree_opt(inst, budget=args.budget)
        total = inst.constraint_count
        out.update({
            "count": count,
            "total": total,
            "value": str(frac),
            "vacuous": total == 0,
        })
        print(f"optimum {count} of {total} ({frac})")
    if witness is not None:
        out["witness"] = _witness_json(witness)
        if args.witness_out:
            formats.atomic_write_text(args.witness_out, formats.write_assignment(witness, inst))
    if args.out:
        formats.atomic_write_json(args.out, _stamp(args, out))
    return 0


# -- game ---------------------------------------------------------------------------


def _sidecar_graph(sc: Dict) -> SimpleGraph:
    g = sc["graph"]
    return SimpleGraph(g["vertices"], [tuple(e) for e in g["edges"]])


def _rebuild_pair(sc: Dict, u1: GroupUgInstance, u2: GroupUgInstance) -> InapproxPair:
    p = sc["params"]
    params = ParamSet(
        Fraction(p["alpha"]), Fraction(p["gamma"]), Fraction(p["epsilon"]),
        p["d"], p["ell"], p["m"], p["r"], p["q"],
    )
    m = params.m
    base = _sidecar_graph(sc)
    zmap = {}
    for key, basis in sc["zmap"].items():
        e = normalize_edge(*key.split())
        zmap[e] = Gf2Subspace.from_vectors([Gf2Vector.from_hex(h, m) for h in basis], m)
    bmap = {
        normalize_edge(*key.split()): Gf2Vector.from_hex(h, m) for key, h in sc["bmap"].items()
    }
    good = frozenset(normalize_edge(*e) for e in sc["good"])
    full1, full2 = [], []
    for e in base.edges:
        full1.append((e[0], e[1], list(zmap[e].elements())))
        full2.append((e[0], e[1], sorted(zmap[e].shifted(bmap[e]))))
    return InapproxPair(
        u1=u1,
        u2=u2,
        u1_full=GroupUgInstance(m, base.vertices, full1),
        u2_full=GroupUgInstance(m, base.vertices, full2),
        good=good,
        zmap=zmap,
        bmap=bmap,
        params=params,
        base=base,
        girth_ok=bool(sc.get("girth_ok", True)),
    )


def cmd_game(args) -> int:
    with open(args.pair, "r", encoding="utf-8") as fh:
        sc = json.load(fh)
    basedir = os.path.dirname(os.path.abspath(args.pair))
    u1 = formats.parse_gug(_read(os.path.join(basedir, sc["u1"])))
    u2 = formats.parse_gug(_read(os.path.join(basedir, sc["u2"])))
    a = LiftedStructure(u1)
    b = LiftedStructure(u2)
    if args.duplicator == "identity":
        dup = duplicator_identity(u1.m)
    elif args.duplicator == "k2":
        dup = duplicator_k2(u1, u2)
    elif args.duplicator == "cops":
        coloring = {normalize_edge(*k.split()): c for k, c in sc["coloring"].items()}
        dup = duplicator_cops(
            u1, u2, _sidecar_graph(sc), coloring, tuple(sc["star"]), args.assert_level
        )
    else:
        dup = duplicator_tree(_rebuild_pair(sc, u1, u2), args.assert_level)
    transcript = play_game(
        a, b, args.k, dup, spoiler_random(random.Random(args.seed)), max_rounds=args.rounds
    )
    out = _stamp(args, {
        "seed": args.seed,
        "duplicator": args.duplicator,
        "pair": os.path.basename(args.pair),
        **transcript,
    })
    if args.out:
        formats.atomic_write_json(args.out, out)
    winner = transcript["winner"] or "none"
    print(f"survived {transcript['survived']} of {args.rounds} rounds, winner: {winner}")
    return 0


# -- sdp ----------------------------------------------------------------------------


def cmd_sdp_maxcut(args) -> int:
    g = formats.parse_graph(_read(args.graph))
    inst = build_maxcut_sdp(g)
    sol = solve_sdp_lowrank(inst, tol=args.tol, restarts=args.restarts, rng=args.seed)
    out = sol.result_json()
    out.update({
        "kind": "maxcut",
        "n": inst.n,
        "spread": sol.spread,
        "gw_alpha": gw_alpha(),
        "gw_symmetric": gw_symmetric_value(sol),
    })
    if args.round:
        mean, std = hyperplane_round(sol, rng=args.seed, trials=args.round)
        out["round_mean"] = mean
        out["round_std"] = std
        out["round_trials"] = args.round
    if args.sdpa:
        formats.atomic_write_text(args.sdpa, to_sdpa(inst))
    formats.atomic_write_json(args.out, _stamp(args, out))
    print(f"value {out['value']:.6f} residual {out['residual']:.2e} -> {args.out}")
    return 0


def cmd_sdp_lc(args) -> int:
    csp = formats.parse_csp(_read(args.csp))
    inst = build_lc_relaxation(csp, normalization=args.normalization)
    sol = solve_sdp_lowrank(inst, tol=args.tol, restarts=args.restarts, rng=args.seed)
    out = sol.result_json()
    out.update({
        "kind": "lc",
        "n": inst.n,
        "spread": sol.spread,
        "scale": inst.meta["scale"],
        "normalization": args.normalization,
    })
    if args.sdpa:
        formats.atomic_write_text(args.sdpa, to_sdpa(inst))
    formats.atomic_write_json(args.out, _stamp(args, out))
    print(f"value {out['value']:.6f} residual {out['residual']:.2e} -> {args.out}")
    return 0


def cmd_sdp_gap(args) -> int:
    paths = sorted(
        os.path.join(args.family, name)
        for name in os.listdir(args.family)
        if name.endswith(".csp")
    )
    if not paths:
        raise PreconditionError(f"no .csp files in {args.family!r}")
    family = [formats.parse_csp(_read(p)) for p in paths]
    grid = [float(tok) for tok in args.grid.split(",")] if args.grid else None
    table = gap_curve_estimate(
        family,
        eta=float(args.eta),
        grid=grid,
        normalization=args.normalization,
        tol=args.tol,
        restarts=args.restarts,
        rng=args.seed,
    )
    out = _stamp(args, {
        "kind": "gap",
        "eta": float(args.eta),
        "seed": args.seed,
        "files": [os.path.basename(p) for p in paths],
        "points": [[s, o] for s, o in table.points],
        # -inf (no entry below c) is not valid JSON, reported as null
        "samples": [[c, None if val == -math.inf else val] for c, val in table.samples],
    })
    formats.atomic_write_json(args.out, out)
    print(f"{len(table.points)} points -> {args.out}")
    return 0


# -- params and report ----------------------------------------------------------------


def cmd_params(args) -> int:
    p = compute_params(args.alpha, args.gamma, args.epsilon)
    print(f"d={p.d} ell={p.ell} m={p.m} r={p.r} q={p.q}")
    if args.out:
        out = _stamp(args, {
            "alpha": str(p.alpha),
            "gamma": str(p.gamma),
            "epsilon": str(p.epsilon),
            "d": p.d,
            "ell": p.ell,
            "m": p.m,
            "r": p.r,
            "q": p.q,
        })
        formats.atomic_write_json(args.out, out)
    return 0


def cmd_report(args) -> int:
    runs: Dict[str, object] = {}
    out_abs = os.path.abspath(args.out)
    for root, _, names in os.walk(args.dir):
        for name in sorted(names):
            path = os.path.join(root, name)
            if not name.endswith(".json") or os.path.abspath(path) == out_abs:
                continue
            rel = os.path.relpath(path, args.dir)
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    runs[rel] = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                runs[rel] = {"unreadable": str(exc)}
    report = _stamp(args, {"directory": os.path.abspath(args.dir), "count": len(runs), "runs": runs})
    formats.atomic_write_json(args.out, report)
    print(f"aggregated {len(runs)} files -> {args.out}")
    return 0


# -- parser ------------------------------------------------------------------------------


def _add_no_timestamp(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-timestamp", action="store_true", help="omit timestamps for byte-stable output")


def _add_sdp_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    _add_no_timestamp(p)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="uglab", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate instances and graphs")
    gsub = gen.add_subparsers(dest="what", required=True)

    g_unsat = gsub.add_parser("unsat", help="complete-graph family member for a target gap")
    g_unsat.add_argument("--delta", type=_rational, required=True)
    g_unsat.add_argument("--out", required=True)
    g_unsat.set_defaults(func=cmd_gen_unsat)

    g_klein = gsub.add_parser("klein", help="two-instance pair from an edge 3-coloring")
    g_klein.add_argument("--cops", type=int, default=0, help="use this cops graph instead of K_4")
    g_klein.add_argument("--out-dir", required=True)
    _add_no_timestamp(g_klein)
    g_klein.set_defaults(func=cmd_gen_klein)

    g_cops = gsub.add_parser("cops-graph", help="cycles-plus-bridges cubic graph")
    g_cops.add_argument("--k", type=int, required=True)
    g_cops.add_argument("--out", required=True)
    g_cops.set_defaults(func=cmd_gen_cops_graph)

    g_pair = gsub.add_parser("random-pair", help="random subspace-bundle pair over a regular base")
    g_pair.add_argument("--base", default="petersen", help="petersen, cops:K, or a .graph path")
    g_pair.add_argument("--ell", type=int, default=2)
    g_pair.add_argument("--m", type=int, default=3)
    g_pair.add_argument("--r", type=int, default=3)
    g_pair.add_argument("--k", type=int, default=2, help="pebble count for the girth check")
    g_pair.add_argument("--good-override", action="store_true", help="keep all edges regardless of rank")
    g_pair.add_argument("--seed", type=int, default=0)
    g_pair.add_argument("--out-dir", required=True)
    _add_no_timestamp(g_pair)
    g_pair.set_defaults(func=cmd_gen_random_pair)

    lift = sub.add_parser("lift", help="materialize the label lift of a group instance")
    lift.add_argument("--in", dest="infile", required=True)
    lift.add_argument("--out", required=True)
    lift.add_argument("--max-vertices", type=int, default=4096)
    lift.set_defaults(func=cmd_lift)

    solve = sub.add_parser("solve", help="exact solvers")
    solve.add_argument("mode", choices=["brute", "propagate", "tree"])
    solve.add_argument("--in", dest="infile", required=True)
    solve.add_argument("--out", default=None, help="result JSON path")
    solve.add_argument("--witness-out", default=None, help="assignment text path")
    solve.add_argument("--budget", type=int, default=None)
    _add_no_timestamp(solve)
    solve.set_defaults(func=cmd_solve)

    game = sub.add_parser("game", help="play the bijective pebble game from a pair sidecar")
    game.add_argument("--pair", required=True, help="pair.json written by gen")
    game.add_argument("--duplicator", choices=["identity", "k2", "cops", "tree"], required=True)
    game.add_argument("--k", type=int, default=2)
    game.add_argument("--rounds", type=int, default=50)
    game.add_argument("--seed", type=int, default=0)
    game.add_argument("--assert-level", choices=["off", "edges", "full"], default="full")
    game.add_argument("--out", default=None, help="transcript JSON path")
    _add_no_timestamp(game)
    game.set_defaults(func=cmd_game)

    sdp = sub.add_parser("sdp", help="relaxations and rounding")
    ssub = sdp.add_subparsers(dest="what", required=True)

    s_mc = ssub.add_parser("maxcut", help="cut relaxation of a .graph file")
    s_mc.add_argument("--graph", required=True)
    s_mc.add_argument("--out", required=True)
    s_mc.add_argument("--sdpa", default=None, help="also export SDPA sparse text")
    s_mc.add_argument("--round", type=int, default=0, help="hyperplane-rounding trials")
    _add_sdp_common(s_mc)
    s_mc.set_defaults(func=cmd_sdp_maxcut)

    s_lc = ssub.add_parser("lc", help="label-distribution relaxation of a .csp file")
    s_lc.add_argument("--csp", required=True)
    s_lc.add_argument("--out", required=True)
    s_lc.add_argument("--sdpa", default=None)
    s_lc.add_argument("--normalization", choices=["weight", "count", "none"], default="weight")
    _add_sdp_common(s_lc)
    s_lc.set_defaults(func=cmd_sdp_lc)

    s_gap = ssub.add_parser("gap", help="relaxation-vs-optimum table over a directory of .csp files")
    s_gap.add_argument("--family", required=True)
    s_gap.add_argument("--eta", type=_rational, required=True)
    s_gap.add_argument("--grid", default=None, help="comma-separated lookup points")
    s_gap.add_argument("--out", required=True)
    s_gap.add_argument("--normalization", choices=["weight", "count", "none"], default="weight")
    _add_sdp_common(s_gap)
    s_gap.set_defaults(func=cmd_sdp_gap)

    params = sub.add_parser("params", help="smallest admissible parameter set")
    params.add_argument("--alpha", type=_rational, required=True)
    params.add_argument("--gamma", type=_rational, default=Fraction(1, 4))
    params.add_argument("--epsilon", type=_rational, default=Fraction(1, 4))
    params.add_argument("--out", default=None, help="also write the set as JSON")
    _add_no_timestamp(params)
    params.set_defaults(func=cmd_params)

    report = sub.add_parser("report", help="aggregate a run directory of JSON outputs")
    report.add_argument("--dir", required=True)
    report.add_argument("--out", required=True)
    _add_no_timestamp(report)
    report.set_defaults(func=cmd_report)

    return top


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except StrategyViolationError as exc:
        print(f"strategy violation: {exc}", file=sys.stderr)
        return 3
    except (
        InvalidParameterError,
        PreconditionError,
        SearchBudgetError,
        IncompleteAssignmentError,
        NotInSpanError,
        ConvergenceError,
        UglabError,
        OSError,
        json.JSONDecodeError,
        KeyError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
