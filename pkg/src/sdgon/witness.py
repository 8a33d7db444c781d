"""From a concrete subdivision, divisor and firing scripts to a partial certificate.

A :class:`Witness` lives on a subdivision ``H`` of a base graph (normally
G1).  Its start divisor must sit on base vertices; :func:`consolidate_chips`
and :func:`normalize_on_g1` get there from an arbitrary divisor on a
subdivision of ``G`` with every edge subdivided at least once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .certificate import MoveTuple, Pair, PairSequence, PartialCertificate
from .chip_firing import (
    Divisor,
    FiringScript,
    InvalidSetError,
    LabeledDivisor,
    level_sets,
    reduce_vector,
    run_script,
)
from .ilp import l_var, t_var
from .multigraph import (
    Multigraph,
    SubdivisionMap,
    build_g1,
    compose,
    graph_from_dict,
    graph_to_dict,
    identity_map,
    midpoint_id,
    subdivide,
)


@dataclass(frozen=True)
class Witness:
    """``hmap`` maps the base graph onto ``H``; scripts are keyed by base vertex."""

    hmap: SubdivisionMap
    start: Divisor
    scripts: Mapping[str, FiringScript]

    @property
    def base(self) -> Multigraph:
        return self.hmap.origin

    @property
    def h(self) -> Multigraph:
        return self.hmap.derived

    def check(self) -> None:
        """Raise unless every script replays legally and ends with a chip on its target."""
        for w, script in self.scripts.items():
            final = run_script(self.h, self.start, script)[-1]
            if final[w] < 1:
                raise ValueError(f"script for {w!r} ends without a chip on it")


# -- moving chips off subdivision vertices ---------------------------------

def consolidate_chips(h1: SubdivisionMap, d: Mapping[str, int]) -> Tuple[Divisor, FiringScript]:
    """Push chips out of edge interiors until each original edge holds at most one.

    Two chips inside the same original edge, at positions ``i <= j``, are
    spread apart by firing the intervals ``[i, j]``, ``[i-1, j+1]``, ... until
    one of them lands on an endpoint.  Edges are handled in edge-id order.
    Returns the final divisor and a level-set script realising the change
    (empty when nothing moves).
    """
    h = h1.derived
    counts = dict(Divisor(d))
    fired = {v: 0 for v in h.vertices}
    for eid in sorted(h1.paths):
        path = h1.paths[eid].vertices
        L = len(path) - 1
        while True:
            inner = [pos for pos in range(1, L) for _ in range(counts.get(path[pos], 0))]
            if len(inner) < 2:
                break
            a, b = inner[0], inner[-1]
            while True:
                for pos in range(a, b + 1):
                    fired[path[pos]] += 1
                counts[path[a]] -= 1
                counts[path[a - 1]] = counts.get(path[a - 1], 0) + 1
                counts[path[b]] -= 1
                counts[path[b + 1]] = counts.get(path[b + 1], 0) + 1
                if a - 1 == 0 or b + 1 == L:
                    break
                a, b = a - 1, b + 1
    final = Divisor(counts)
    if not any(fired.values()):
        return final, FiringScript()
    return final, level_sets(h, fired)


def normalize_on_g1(g: Multigraph, gh: SubdivisionMap, d: Mapping[str, int]
                    ) -> Tuple[SubdivisionMap, SubdivisionMap, Divisor]:
    """Re-embed G1 in ``H`` so that the divisor sits on G1 vertices.

    ``gh`` maps ``g`` onto ``H`` with every edge subdivided at least once.
    After :func:`consolidate_chips` each edge of ``g`` carries at most one
    interior chip; that vertex becomes the edge's G1 midpoint.  Returns the
    map ``g -> G1``, a fresh map ``G1 -> H'`` (``H'`` isomorphic to ``H``)
    and the transported divisor.
    """
    if gh.origin != g:
        raise ValueError("subdivision map does not start at g")
    for eid, p in gh.paths.items():
        if p.length < 2:
            raise ValueError(f"edge {eid!r} is not subdivided")
    d2, _ = consolidate_chips(gh, d)
    g1 = build_g1(g)
    lengths: Dict[str, int] = {}
    counts: Dict[str, int] = {v: d2[v] for v in g.vertices if d2[v]}
    for e in g.edges:
        path = gh.paths[e.id].vertices
        L = len(path) - 1
        holders = [pos for pos in range(1, L) if d2[path[pos]]]
        if holders:
            pos = holders[0]
            counts[midpoint_id(e.id)] = d2[path[pos]]
        elif midpoint_id(e.id) in path:
            pos = path.index(midpoint_id(e.id))
        else:
            pos = L // 2
        lengths[f"{e.id}.a"] = pos
        lengths[f"{e.id}.b"] = L - pos
    return g1, subdivide(g1.derived, lengths), Divisor(counts)


# -- canonical scripts ---------------------------------------------------------

def canonical_script(hmap: SubdivisionMap, d: Mapping[str, int], w: str) -> FiringScript:
    """A monotone script from ``d`` to a divisor with a chip on ``w``, if ``d`` reaches ``w``.

    Uses the firing vector of the w-reduction, raised inside every base
    edge to at least the smaller endpoint value.  The raised vector is still
    convex along each subdivided edge, so its level sets meet each edge
    interior in a prefix, a suffix, or all of it.
    """
    h = hmap.derived
    ix = h.index
    vec, f = reduce_vector(h.neighbours, Divisor(d).vector(h), ix[w])
    if vec[ix[w]] < 1:
        raise ValueError(f"divisor does not reach {w!r}")
    for p in hmap.paths.values():
        floor_ = min(f[ix[p.vertices[0]]], f[ix[p.vertices[-1]]])
        for x in p.interior:
            f[ix[x]] = max(f[ix[x]], floor_)
    return level_sets(h, dict(zip(h.vertices, f)))


def canonical_witness(hmap: SubdivisionMap, d: Mapping[str, int]) -> Witness:
    return Witness(hmap, Divisor(d), {w: canonical_script(hmap, d, w) for w in hmap.origin.vertices})


# -- relevant sets and chip tracking ---------------------------------------------

def extract_relevant(gmap: SubdivisionMap, d: Mapping[str, int], script: Sequence) -> List[int]:
    """1-based indices of the relevant sets of ``script``.

    A set is relevant when it changes the chip count of a base vertex or
    is the first to contain some base vertex (the set before the first is
    taken to be empty).
    """
    traj = run_script(gmap.derived, d, script)
    base = gmap.origin.vertices
    out = []
    prev: FrozenSet[str] = frozenset()
    for i, a in enumerate(script, start=1):
        moved = any(traj[i][v] != traj[i - 1][v] for v in base)
        fresh = any(v in a and v not in prev for v in base)
        if moved or fresh:
            out.append(i)
        prev = frozenset(a)
    return out


def track_moves(gmap: SubdivisionMap, labeled: LabeledDivisor, script: Sequence
                ) -> Tuple[List[FrozenSet[MoveTuple]], LabeledDivisor]:
    """Replay ``script`` with labelled chips, recording moves at base vertices.

    A vertex losing ``c`` chips sends its ``c`` lowest-labelled chips,
    matched in order to its cut edges sorted by edge id.  Returns one set of
    move tuples per fired set and the final labelled divisor.
    """
    h = gmap.derived
    carrier = gmap.carrier
    base = gmap.origin.index
    where = list(labeled.location)
    resident: Dict[str, List[int]] = {v: [] for v in h.vertices}
    for j, v in enumerate(where, start=1):
        resident[v].append(j)
    events: List[FrozenSet[MoveTuple]] = []
    for i, a in enumerate(script, start=1):
        a = frozenset(a)
        moves = []
        for x, e in h.cut_edges(a):
            moves.append((x, e))
        taken: Dict[str, int] = {}
        shipped = []
        for x, e in moves:
            pool = resident[x]
            n = taken.get(x, 0)
            if n >= len(pool):
                raise InvalidSetError(i, x)
            shipped.append((pool[n], x, e))
            taken[x] = n + 1
        out = set()
        for x, n in taken.items():
            del resident[x][:n]
        for chip, x, e in shipped:
            y = e.other(x)
            resident[y].append(chip)
            resident[y].sort()
            where[chip - 1] = y
            be = carrier[e.id]
            if x in base:
                out.add(MoveTuple(x, chip, -1, be))
            if y in base:
                out.add(MoveTuple(y, chip, 1, be))
        events.append(frozenset(out))
    return events, LabeledDivisor(tuple(where))


def build_certificate(witness: Witness, k: Optional[int] = None) -> PartialCertificate:
    """The partial certificate recorded by replaying the witness scripts."""
    base = witness.base
    start = witness.start
    off = [v for v in start if v not in base.index]
    if off:
        raise ValueError(f"start divisor has chips off the base graph: {off}")
    k = start.degree if k is None else k
    if start.degree > k:
        raise ValueError(f"divisor degree {start.degree} exceeds k = {k}")
    labeled = LabeledDivisor.canonical(start, base.vertices)
    seqs = {}
    for w in base.vertices:
        script = witness.scripts.get(w, FiringScript())
        events, _ = track_moves(witness.hmap, labeled, script)
        pairs = []
        for i in extract_relevant(witness.hmap, start, script):
            pairs.append(Pair(frozenset(script[i - 1]) & frozenset(base.vertices), events[i - 1]))
        seqs[w] = PairSequence(w, tuple(pairs))
    return PartialCertificate(k, labeled, seqs)


def ground_truth(witness: Witness) -> Dict[str, int]:
    """Edge lengths and set-gap counts actually realised by the witness."""
    values = {l_var(e): n for e, n in witness.hmap.lengths.items()}
    for w in witness.base.vertices:
        script = witness.scripts.get(w, FiringScript())
        rel = extract_relevant(witness.hmap, witness.start, script)
        for n, i in enumerate(rel, start=1):
            values[t_var(w, n)] = (rel[n] - i) if n < len(rel) else 1
    return values


def witness_from_h_divisor(g: Multigraph, totals: Mapping[str, int], d: Mapping[str, int]) -> Witness:
    """Canonical witness for a divisor on the subdivision of ``g`` with given total edge lengths.

    ``d`` lives on ``subdivide(g, totals).derived``.
    """
    gh = subdivide(g, totals)
    _, hmap, d2 = normalize_on_g1(g, gh, d)
    return canonical_witness(hmap, d2)


# -- JSON ---------------------------------------------------------------------------

def witness_to_json(g: Multigraph, witness: Witness, *, subdivide_once: bool = True) -> dict:
    """``g`` is the original graph; the witness base is G1 (or ``g`` itself)."""
    return {
        "graph": graph_to_dict(g),
        "subdivide_once": subdivide_once,
        "lengths": dict(witness.hmap.lengths),
        "divisor": witness.start.to_json(),
        "scripts": {w: s.to_json() for w, s in witness.scripts.items()},
    }


def witness_from_json(data: Mapping) -> Tuple[Multigraph, Witness]:
    """Read a witness bundle.

    Missing scripts are filled in canonically.  A divisor with chips inside
    subdivided edges is first moved onto G1 vertices, which needs the G1
    base and no explicit scripts.
    """
    g = graph_from_dict(data["graph"])
    once = bool(data.get("subdivide_once", True))
    first = build_g1(g) if once else identity_map(g)
    lengths = {e.id: int(data.get("lengths", {}).get(e.id, 1)) for e in first.derived.edges}
    hmap = subdivide(first.derived, lengths)
    d = Divisor.from_json(data["divisor"])
    unknown = [v for v in d if v not in hmap.derived.index]
    if unknown:
        raise ValueError(f"divisor uses unknown vertices {unknown}")
    scripts = data.get("scripts")
    if scripts is not None:
        w = Witness(hmap, d, {str(t): FiringScript(s) for t, s in scripts.items()})
        w.check()
        return g, w
    if any(v not in first.derived.index for v in d):
        if not once:
            raise ValueError("chips inside subdivided edges need the G1 base")
        _, hmap, d = normalize_on_g1(g, compose(first, hmap), d)
    return g, canonical_witness(hmap, d)
