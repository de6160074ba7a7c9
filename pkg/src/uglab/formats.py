"""Line-oriented text formats for instances, graphs, and assignments.

One record per line, '#' starts a comment. Vertex names are serialized
with str(), so they must not contain whitespace; parsed files always carry
string names. Group labels are lowercase hex of ceil(m/4) digits.
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from typing import Dict, List, Tuple

from .errors import InvalidParameterError
from .gf2 import Gf2Vector
from .graphs import SimpleGraph
from .instances import CspType, GroupUgInstance, PermUgInstance, WeightedCspInstance


def _vertex_name(v) -> str:
    s = str(v)
    if not s or any(c.isspace() for c in s):
        raise InvalidParameterError(f"vertex {v!r} has no whitespace-free name")
    return s


def _content_lines(text: str) -> List[Tuple[int, List[str]]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line.split()))
    return out


def _parse_kv(token: str, key: str, lineno: int) -> str:
    prefix = key + "="
    if not token.startswith(prefix):
        raise InvalidParameterError(f"line {lineno}: expected {key}=..., got {token!r}")
    return token[len(prefix):]


# -- group instances ---------------------------------------------------------


def write_gug(instance: GroupUgInstance) -> str:
    lines = [f"gug m={instance.m}"]
    for v in instance.vertices:
        lines.append(f"vertex {_vertex_name(v)}")
    for u, v, diffs in instance.bundles:
        hexes = ",".join(z.to_hex() for z in diffs)
        lines.append(f"bundle {_vertex_name(u)} {_vertex_name(v)} {hexes}")
    return "\n".join(lines) + "\n"


def parse_gug(text: str) -> GroupUgInstance:
    lines = _content_lines(text)
    if not lines or lines[0][1][0] != "gug":
        raise InvalidParameterError("gug file must start with a 'gug m=<int>' header")
    lineno, head = lines[0]
    m = int(_parse_kv(head[1], "m", lineno))
    vertices: List[str] = []
    bundles = []
    for lineno, toks in lines[1:]:
        if toks[0] == "vertex" and len(toks) == 2:
            vertices.append(toks[1])
        elif toks[0] == "bundle" and len(toks) == 4:
            diffs = [Gf2Vector.from_hex(h, m) for h in toks[3].split(",")]
            bundles.append((toks[1], toks[2], diffs))
        else:
            raise InvalidParameterError(f"line {lineno}: bad gug record {' '.join(toks)!r}")
    return GroupUgInstance(m, vertices, bundles)


# -- permutation instances -----------------------------------------------------


def write_pug(instance: PermUgInstance) -> str:
    lines = [f"pug q={instance.q}"]
    for v in instance.vertices:
        lines.append(f"vertex {_vertex_name(v)}")
    for u, v, perm in instance.constraints:
        lines.append(
            f"edge {_vertex_name(u)} {_vertex_name(v)} perm={','.join(str(i) for i in perm)}"
        )
    return "\n".join(lines) + "\n"


def parse_pug(text: str) -> PermUgInstance:
    lines = _content_lines(text)
    if not lines or lines[0][1][0] != "pug":
        raise InvalidParameterError("pug file must start with a 'pug q=<int>' header")
    lineno, head = lines[0]
    q = int(_parse_kv(head[1], "q", lineno))
    vertices: List[str] = []
    constraints = []
    for lineno, toks in lines[1:]:
        if toks[0] == "vertex" and len(toks) == 2:
            vertices.append(toks[1])
        elif toks[0] == "edge" and len(toks) == 4:
            perm = tuple(int(x) for x in _parse_kv(toks[3], "perm", lineno).split(","))
            constraints.append((toks[1], toks[2], perm))
        else:
            raise InvalidParameterError(f"line {lineno}: bad pug record {' '.join(toks)!r}")
    return PermUgInstance(q, vertices, constraints)


# -- weighted CSPs --------------------------------------------------------------


def _format_fraction(w: Fraction) -> str:
    return f"{w.numerator}/{w.denominator}"


def parse_fraction(text: str) -> Fraction:
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidParameterError(f"bad rational {text!r}") from exc


def write_csp(instance: WeightedCspInstance) -> str:
    # duplicate applications were summed at parse time; emitted files
    # therefore carry at most one apply line per (type, tuple)
    lines = [f"csp q={instance.q}"]
    for v in instance.variables:
        lines.append(f"var {_vertex_name(v)}")
    for name in sorted(instance.constraint_types):
        ct = instance.constraint_types[name]
        tuples = ";".join(",".join(str(x) for x in t) for t in sorted(ct.satisfying))
        lines.append(f"ctype {name} arity={ct.arity} sat={tuples}")
    for tname, var_tuple, w in instance.applications:
        vs = " ".join(_vertex_name(x) for x in var_tuple)
        lines.append(f"apply {tname} {vs} w={_format_fraction(w)}")
    return "\n".join(lines) + "\n"


def parse_csp(text: str) -> WeightedCspInstance:
    lines = _content_lines(text)
    if not lines or lines[0][1][0] != "csp":
        raise InvalidParameterError("csp file must start with a 'csp q=<int>' header")
    lineno, head = lines[0]
    q = int(_parse_kv(head[1], "q", lineno))
    variables: List[str] = []
    ctypes: Dict[str, CspType] = {}
    summed: Dict[Tuple, Fraction] = {}
    order: List[Tuple] = []
    for lineno, toks in lines[1:]:
        if toks[0] == "var" and len(toks) == 2:
            variables.append(toks[1])
        elif toks[0] == "ctype" and len(toks) == 4:
            name = toks[1]
            if name in ctypes:
                raise InvalidParameterError(f"line {lineno}: duplicate ctype {name!r}")
            arity = int(_parse_kv(toks[2], "arity", lineno))
            sat_text = _parse_kv(toks[3], "sat", lineno)
            tuples = []
            if sat_text:
                for part in sat_text.split(";"):
                    tuples.append(tuple(int(x) for x in part.split(",")))
            ctypes[name] = CspType(arity, tuples, q)
        elif toks[0] == "apply" and len(toks) >= 4:
            tname = toks[1]
            var_tuple = tuple(toks[2:-1])
            w = parse_fraction(_parse_kv(toks[-1], "w", lineno))
            key = (tname, var_tuple)
            if key in summed:
                summed[key] += w  # duplicate application: weights add
            else:
                summed[key] = w
                order.append(key)
        else:
            raise InvalidParameterError(f"line {lineno}: bad csp record {' '.join(toks)!r}")
    apps = [(tname, var_tuple, summed[(tname, var_tuple)]) for tname, var_tuple in order]
    return WeightedCspInstance(q, variables, ctypes, apps)


# -- graphs ----------------------------------------------------------------------


def write_graph(g: SimpleGraph) -> str:
    lines = ["graph"]
    for v in g.vertices:
        lines.append(f"v {_vertex_name(v)}")
    for u, v in g.edges:
        lines.append(f"e {_vertex_name(u)} {_vertex_name(v)}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> SimpleGraph:
    lines = _content_lines(text)
    if not lines or lines[0][1] != ["graph"]:
        raise InvalidParameterError("graph file must start with a 'graph' header")
    vertices: List[str] = []
    edges = []
    for lineno, toks in lines[1:]:
        if toks[0] == "v" and len(toks) == 2:
            vertices.append(toks[1])
        elif toks[0] == "e" and len(toks) == 3:
            edges.append((toks[1], toks[2]))
        else:
            raise InvalidParameterError(f"line {lineno}: bad graph record {' '.join(toks)!r}")
    return SimpleGraph(vertices, edges)


# -- assignments -------------------------------------------------------------------


def write_assignment(assignment: Dict, instance) -> str:
    lines = []
    for v in sorted(assignment, key=lambda x: _vertex_name(x)):
        label = assignment[v]
        text = label.to_hex() if isinstance(label, Gf2Vector) else str(label)
        lines.append(f"assign {_vertex_name(v)} {text}")
    return "\n".join(lines) + "\n"


def parse_assignment(text: str, instance) -> Dict:
    group = isinstance(instance, GroupUgInstance)
    out: Dict = {}
    for lineno, toks in _content_lines(text):
        if toks[0] != "assign" or len(toks) != 3:
            raise InvalidParameterError(f"line {lineno}: bad assign record {' '.join(toks)!r}")
        name, label = toks[1], toks[2]
        out[name] = Gf2Vector.from_hex(label, instance.m) if group else int(label)
    return out


# -- files --------------------------------------------------------------------------


def atomic_write_text(path: str, content: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path: str, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


__all__ = [
    "write_gug",
    "parse_gug",
    "write_pug",
    "parse_pug",
    "write_csp",
    "parse_csp",
    "write_graph",
    "parse_graph",
    "write_assignment",
    "parse_assignment",
    "parse_fraction",
    "atomic_write_text",
    "atomic_write_json",
]
