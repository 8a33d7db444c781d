"""Connected loop-free multigraphs and their subdivisions.

Edges carry explicit ids so parallel edges stay distinguishable, and each
edge keeps the endpoint order it was given at load time.  Subdivided edges
are indexed from that first endpoint: the interior vertices of edge ``e``
with length ``l`` are ``e:1, ..., e:(l-1)`` with ``e:1`` next to the first
endpoint.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

log = logging.getLogger(__name__)


class GraphInputError(ValueError):
    """Base class for rejected graph descriptions."""

    code = "input-error"


class GraphParseError(GraphInputError):
    code = "parse-error"


class DisconnectedGraphError(GraphInputError):
    code = "disconnected-graph"


class Edge(NamedTuple):
    id: str
    u: str
    v: str

    def other(self, x: str) -> str:
        if x == self.u:
            return self.v
        if x == self.v:
            return self.u
        raise ValueError(f"vertex {x!r} is not an endpoint of edge {self.id!r}")


def _edge_key(eid: str):
    # interior segments of a subdivided edge sort by position, not by string
    base, sep, idx = eid.rpartition("/")
    if sep and idx.isdigit():
        return (base, int(idx))
    return (eid, 0)


@dataclass(frozen=True)
class Multigraph:
    """An undirected multigraph with string vertex ids and edge ids.

    Instances are immutable.  ``dropped_loops`` records the ids of
    self-loops discarded at construction.
    """

    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    dropped_loops: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphParseError("duplicate vertex id")
        vs = set(self.vertices)
        ids = set()
        for e in self.edges:
            if e.id in ids:
                raise GraphParseError(f"duplicate edge id {e.id!r}")
            ids.add(e.id)
            if e.u not in vs or e.v not in vs:
                raise GraphParseError(f"edge {e.id!r} has an unknown endpoint")
            if e.u == e.v:
                raise GraphParseError(f"edge {e.id!r} is a self-loop")

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable[Sequence[str]],
              *, require_connected: bool = True) -> "Multigraph":
        """Build from ``(id, u, v)`` triples, dropping self-loops."""
        kept, loops = [], []
        for eid, u, v in edges:
            if u == v:
                loops.append(eid)
            else:
                kept.append(Edge(eid, u, v))
        if loops:
            log.warning("dropping self-loops %s", ", ".join(loops))
        g = cls(tuple(vertices), tuple(kept), tuple(loops))
        if require_connected and not g.is_connected():
            raise DisconnectedGraphError("graph is not connected")
        return g

    # -- lookups ---------------------------------------------------------

    @cached_property
    def index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_map(self) -> Dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def incident(self) -> Dict[str, List[Edge]]:
        """Edges at each vertex, in canonical edge order."""
        inc: Dict[str, List[Edge]] = {v: [] for v in self.vertices}
        for e in sorted(self.edges, key=lambda e: _edge_key(e.id)):
            inc[e.u].append(e)
            inc[e.v].append(e)
        return inc

    @cached_property
    def neighbours(self) -> List[List[Tuple[int, int]]]:
        """Index-based adjacency: ``(neighbour index, multiplicity)`` lists."""
        acc: List[Dict[int, int]] = [dict() for _ in self.vertices]
        ix = self.index
        for e in self.edges:
            a, b = ix[e.u], ix[e.v]
            acc[a][b] = acc[a].get(b, 0) + 1
            acc[b][a] = acc[b].get(a, 0) + 1
        return [sorted(d.items()) for d in acc]

    @cached_property
    def degrees(self) -> List[int]:
        return [sum(m for _, m in nb) for nb in self.neighbours]

    def degree(self, v: str) -> int:
        return len(self.incident[v])

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {0}
        todo = deque([0])
        nbrs = self.neighbours
        while todo:
            x = todo.popleft()
            for y, _ in nbrs[x]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        return len(seen) == len(self.vertices)

    def has_parallel_edges(self) -> bool:
        seen = set()
        for e in self.edges:
            key = frozenset((e.u, e.v))
            if key in seen:
                return True
            seen.add(key)
        return False

    def cut_edges(self, a) -> List[Tuple[str, Edge]]:
        """``(inside vertex, edge)`` for every edge leaving the vertex set ``a``."""
        out = []
        for x in sorted(a, key=self.index.__getitem__):
            for e in self.incident[x]:
                if e.other(x) not in a:
                    out.append((x, e))
        return out

    def __repr__(self):
        return f"Multigraph(|V|={len(self.vertices)}, |E|={len(self.edges)})"


# -- text formats ----------------------------------------------------------

def load_graph(text: str) -> Multigraph:
    """Parse the graph JSON format.

    >>> g = load_graph('{"vertices": ["u","v"], "edges": [{"id":"e1","ends":["u","v"]}]}')
    >>> len(g.edges)
    1
    """
    try:
        data = json.loads(text) if isinstance(text, str) else text
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"invalid JSON: {exc}") from exc
    return graph_from_dict(data)


def graph_from_dict(data: Mapping) -> Multigraph:
    try:
        vertices = [str(v) for v in data["vertices"]]
        edges = []
        for item in data.get("edges", []):
            u, v = item["ends"]
            edges.append((str(item["id"]), str(u), str(v)))
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphParseError(f"malformed graph description: {exc}") from exc
    return Multigraph.build(vertices, edges)


def graph_to_dict(g: Multigraph) -> dict:
    return {
        "vertices": list(g.vertices),
        "edges": [{"id": e.id, "ends": [e.u, e.v]} for e in g.edges],
    }


def to_dot(g: Multigraph, name: str = "G") -> str:
    lines = [f"graph {json.dumps(name)} {{"]
    for v in g.vertices:
        lines.append(f"  {json.dumps(v)};")
    for e in g.edges:
        lines.append(f"  {json.dumps(e.u)} -- {json.dumps(e.v)} [label={json.dumps(e.id)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- subdivisions ----------------------------------------------------------

class Path(NamedTuple):
    vertices: Tuple[str, ...]  # from first endpoint to second, endpoints included
    edges: Tuple[str, ...]

    @property
    def interior(self) -> Tuple[str, ...]:
        return self.vertices[1:-1]

    @property
    def length(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class SubdivisionMap:
    """A subdivision ``derived`` of ``origin``.

    ``paths[e]`` is the path of derived vertices and edges that replaces the
    origin edge ``e``, oriented from its first endpoint.
    """

    origin: Multigraph
    derived: Multigraph
    paths: Mapping[str, Path]

    @cached_property
    def carrier(self) -> Dict[str, str]:
        """Derived edge id -> origin edge id."""
        return {he: e for e, p in self.paths.items() for he in p.edges}

    @cached_property
    def interior_of(self) -> Dict[str, Tuple[str, int]]:
        """Derived interior vertex -> (origin edge, position from first endpoint)."""
        out = {}
        for e, p in self.paths.items():
            for i, x in enumerate(p.interior, start=1):
                out[x] = (e, i)
        return out

    @cached_property
    def lengths(self) -> Dict[str, int]:
        return {e: p.length for e, p in self.paths.items()}

    def is_origin_vertex(self, x: str) -> bool:
        return x in self.origin.index

    def check(self) -> None:
        """Raise ``ValueError`` unless the map is a genuine subdivision."""
        o, d = self.origin, self.derived
        if set(self.paths) != set(o.edge_map):
            raise ValueError("paths must cover every origin edge")
        if not set(o.vertices) <= set(d.vertices):
            raise ValueError("origin vertices must survive")
        used = []
        for eid, p in self.paths.items():
            e = o.edge_map[eid]
            if (p.vertices[0], p.vertices[-1]) != (e.u, e.v):
                raise ValueError(f"path of {eid!r} has wrong endpoints")
            for a, b, he in zip(p.vertices, p.vertices[1:], p.edges):
                de = d.edge_map[he]
                if {de.u, de.v} != {a, b}:
                    raise ValueError(f"path of {eid!r} is broken at {he!r}")
            for x in p.interior:
                if d.degree(x) != 2 or x in o.index:
                    raise ValueError(f"interior vertex {x!r} is not a fresh degree-2 vertex")
            used.extend(p.edges)
        if sorted(used) != sorted(d.edge_map):
            raise ValueError("every derived edge must lie on exactly one path")

    def contract(self) -> Multigraph:
        """Contract every path back to a single edge."""
        return Multigraph(self.origin.vertices,
                          tuple(Edge(e, p.vertices[0], p.vertices[-1]) for e, p in self.paths.items()))


def subdivide(g: Multigraph, lengths: Mapping[str, int]) -> SubdivisionMap:
    """Replace every edge ``e`` of ``g`` by a path with ``lengths[e]`` edges.

    Edges of length one keep their id; longer edges get segment ids
    ``e/1, ..., e/l`` and interior vertices ``e:1, ..., e:(l-1)``.
    """
    vertices = list(g.vertices)
    edges: List[Edge] = []
    paths = {}
    for e in g.edges:
        if e.id not in lengths:
            raise ValueError(f"missing length for edge {e.id!r}")
        ln = lengths[e.id]
        if not isinstance(ln, int) or ln < 1:
            raise ValueError(f"length of edge {e.id!r} must be a positive integer, got {ln!r}")
        if ln == 1:
            edges.append(e)
            paths[e.id] = Path((e.u, e.v), (e.id,))
            continue
        inner = [f"{e.id}:{i}" for i in range(1, ln)]
        chain = [e.u, *inner, e.v]
        seg = [f"{e.id}/{i}" for i in range(1, ln + 1)]
        vertices.extend(inner)
        edges.extend(Edge(s, a, b) for s, a, b in zip(seg, chain, chain[1:]))
        paths[e.id] = Path(tuple(chain), tuple(seg))
    derived = Multigraph(tuple(vertices), tuple(edges))
    return SubdivisionMap(g, derived, paths)


def build_g1(g: Multigraph) -> SubdivisionMap:
    """Subdivide every edge of ``g`` once.

    The midpoint of edge ``e`` is the vertex ``<e>``; the two halves are
    ``e.a`` (first endpoint side) and ``e.b``.
    """
    vertices = list(g.vertices)
    edges = []
    paths = {}
    for e in g.edges:
        m = midpoint_id(e.id)
        vertices.append(m)
        edges.append(Edge(f"{e.id}.a", e.u, m))
        edges.append(Edge(f"{e.id}.b", m, e.v))
        paths[e.id] = Path((e.u, m, e.v), (f"{e.id}.a", f"{e.id}.b"))
    return SubdivisionMap(g, Multigraph(tuple(vertices), tuple(edges)), paths)


def midpoint_id(eid: str) -> str:
    return f"<{eid}>"


def expand_by_lengths(g1map: SubdivisionMap, lengths: Mapping[str, int]) -> SubdivisionMap:
    """Subdivide the derived graph of ``g1map`` by per-edge lengths.

    Returns the map from ``g1map.derived`` to the new graph; use
    :func:`compose` to get the map from ``g1map.origin``.
    """
    return subdivide(g1map.derived, lengths)


def compose(first: SubdivisionMap, second: SubdivisionMap) -> SubdivisionMap:
    """The subdivision ``first.origin -> second.derived``."""
    if second.origin != first.derived:
        raise ValueError("maps do not chain")
    paths = {}
    for e, p in first.paths.items():
        vs: List[str] = [p.vertices[0]]
        es: List[str] = []
        for a, he in zip(p.vertices, p.edges):
            sub = second.paths[he]
            if sub.vertices[0] == a:
                vs.extend(sub.vertices[1:])
                es.extend(sub.edges)
            else:
                vs.extend(reversed(sub.vertices[:-1]))
                es.extend(reversed(sub.edges))
        paths[e] = Path(tuple(vs), tuple(es))
    return SubdivisionMap(first.origin, second.derived, paths)


def identity_map(g: Multigraph) -> SubdivisionMap:
    return SubdivisionMap(g, g, {e.id: Path((e.u, e.v), (e.id,)) for e in g.edges})
