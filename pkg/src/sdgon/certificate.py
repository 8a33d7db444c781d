"""Partial certificates and their validation.

A partial certificate fixes a labelled divisor on the base graph (normally
G1) and, for every target vertex ``w``, the relevant firing sets of a
schedule that brings a chip to ``w``, intersected with the base vertices,
together with the chip moves ``(vertex, chip, sign, edge)`` that each of
those sets causes at base vertices.  ``sign`` is -1 for a departure and +1
for an arrival.
"""

from __future__ import annotations

import bisect
import enum
import json
from collections import defaultdict
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .chip_firing import LabeledDivisor
from .multigraph import Multigraph


class MoveTuple(NamedTuple):
    vertex: str
    chip: int
    sign: int
    edge: str

    def to_json(self) -> list:
        return [self.vertex, self.chip, self.sign, self.edge]


def move(vertex: str, chip: int, sign: int, edge: str) -> MoveTuple:
    if sign not in (-1, 1):
        raise ValueError(f"sign must be -1 or +1, got {sign!r}")
    if not isinstance(chip, int) or chip < 1:
        raise ValueError(f"chip labels start at 1, got {chip!r}")
    return MoveTuple(vertex, chip, sign, edge)


class Pair(NamedTuple):
    A: FrozenSet[str]
    M: FrozenSet[MoveTuple]


class PairSequence(NamedTuple):
    target: str
    pairs: Tuple[Pair, ...]

    @classmethod
    def build(cls, target: str, pairs: Iterable[Tuple[Iterable[str], Iterable[Sequence]]]) -> "PairSequence":
        out = []
        for a, m in pairs:
            out.append(Pair(frozenset(a), frozenset(move(*t) for t in m)))
        for i in range(1, len(out)):
            if not out[i - 1].A <= out[i].A:
                raise ValueError(f"sets of target {target!r} are not increasing at index {i + 1}")
        return cls(target, tuple(out))


class PartialCertificate(NamedTuple):
    k: int
    start: LabeledDivisor
    sequences: Mapping[str, PairSequence]

    def sequence(self, w: str) -> PairSequence:
        return self.sequences.get(w) or PairSequence(w, ())

    def check_structure(self, g: Multigraph) -> None:
        """Raise ``ValueError`` for anything that is not a well-formed certificate."""
        if self.start.k > self.k:
            raise ValueError(f"divisor has degree {self.start.k} > k = {self.k}")
        for v in self.start.location:
            if v not in g.index:
                raise ValueError(f"chip placed on unknown vertex {v!r}")
        for w, seq in self.sequences.items():
            if w not in g.index or seq.target != w:
                raise ValueError(f"sequence for unknown target {w!r}")
            prev: FrozenSet[str] = frozenset()
            for i, pair in enumerate(seq.pairs, start=1):
                unknown = pair.A - g.index.keys()
                if unknown:
                    raise ValueError(f"set {i} of target {w!r} has unknown vertices {sorted(unknown)}")
                if not prev <= pair.A:
                    raise ValueError(f"sets of target {w!r} are not increasing at index {i}")
                prev = pair.A
                for t in pair.M:
                    if not 1 <= t.chip <= self.k:
                        raise ValueError(f"chip {t.chip} outside 1..{self.k}")
                    if t.sign not in (-1, 1):
                        raise ValueError(f"bad sign in {t}")

    def size_bound(self, n: int) -> int:
        """Most relevant sets a target sequence can need on a base graph with ``n`` vertices."""
        return 2 * self.k * n + n

    # -- serialisation ---------------------------------------------------

    def to_json(self) -> dict:
        seqs = []
        for w in sorted(self.sequences):
            seq = self.sequences[w]
            seqs.append({
                "target": w,
                "pairs": [{"A": sorted(p.A), "M": [t.to_json() for t in sorted(p.M)]} for p in seq.pairs],
            })
        return {"k": self.k, "divisor": self.start.to_json(), "sequences": seqs}

    @classmethod
    def from_json(cls, data: Mapping) -> "PartialCertificate":
        seqs = {}
        for s in data.get("sequences", []):
            w = str(s["target"])
            seqs[w] = PairSequence.build(
                w, [(p["A"], [(str(v), int(j), int(sg), str(e)) for v, j, sg, e in p["M"]]) for p in s["pairs"]])
        return cls(int(data["k"]), LabeledDivisor.from_json(data["divisor"]), seqs)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


class Requirement(enum.IntEnum):
    INCIDENCE = 1
    DEPARTURE = 2
    ARRIVAL = 3
    UNIQUE_DEPARTURE_PER_EDGE = 4
    UNIQUE_ARRIVAL_PER_EDGE = 5
    UNIQUE_DEPARTURE_PER_CHIP = 6
    UNIQUE_ARRIVAL_PER_CHIP = 7
    IMMEDIATE_ARRIVAL = 8
    DEPARTURE_LOCATION = 9
    ARRIVAL_LOCATION = 10
    OUTGOING_EDGES = 11
    PREVIOUS_DEPARTURE = 12
    NEXT_ARRIVAL = 13
    REACH_ALL_VERTICES = 14

    @property
    def label(self) -> str:
        return "".join(part.capitalize() for part in self.name.split("_"))


class Violation(NamedTuple):
    requirement: Requirement
    target: str
    index: Optional[int] = None
    item: Optional[object] = None
    detail: str = ""

    def __str__(self):
        where = f"target {self.target}"
        if self.index is not None:
            where += f", pair {self.index}"
        if self.item is not None:
            where += f", {self.item}"
        return f"{self.requirement.label} ({where}){': ' + self.detail if self.detail else ''}"


def validate(g: Multigraph, c: PartialCertificate) -> List[Violation]:
    """Check ``c`` against every requirement on base graph ``g``.

    Returns the violations sorted by (requirement, target, index, item); an
    empty list means the certificate is valid.  Structural problems (unknown
    vertices in sets, labels outside 1..k, non-increasing sets) raise
    ``ValueError`` instead.
    """
    c.check_structure(g)
    out: List[Violation] = []
    for w in g.vertices:
        out.extend(_validate_target(g, c, w))
    return sorted(out, key=lambda v: (v.requirement, v.target, v.index or 0, repr(v.item)))


def violated(report: Iterable[Violation]) -> set:
    return {v.requirement for v in report}


def _validate_target(g: Multigraph, c: PartialCertificate, w: str) -> List[Violation]:
    R = Requirement
    seq = c.sequence(w)
    pairs = seq.pairs
    a_w = len(pairs)
    found: List[Violation] = []

    def bad(req, i=None, item=None, detail=""):
        found.append(Violation(req, w, i, item, detail))

    emap = g.edge_map

    def ends(t: MoveTuple):
        e = emap.get(t.edge)
        if e is None or t.vertex not in (e.u, e.v):
            return None
        return e

    # per-chip timeline: indices where the chip occurs in some M
    chip_times: Dict[int, List[int]] = defaultdict(list)
    for i, p in enumerate(pairs, start=1):
        for j in sorted({t.chip for t in p.M}):
            chip_times[j].append(i)

    def previous_index(j: int, i: int) -> Optional[int]:
        times = chip_times.get(j, [])
        pos = bisect.bisect_left(times, i)
        return times[pos - 1] if pos else None

    for i, p in enumerate(pairs, start=1):
        A, M = p.A, p.M
        for t in sorted(M):
            e = ends(t)
            if e is None:
                bad(R.INCIDENCE, i, t, "edge is not incident to the vertex")
                continue
            other = e.other(t.vertex)
            if t.sign < 0 and not (t.vertex in A and other not in A):
                bad(R.DEPARTURE, i, t)
            if t.sign > 0 and not (t.vertex not in A and other in A):
                bad(R.ARRIVAL, i, t)

        by_edge = defaultdict(set)
        by_chip = defaultdict(set)
        for t in M:
            by_edge[(t.sign, t.vertex, t.edge)].add(t.chip)
            by_chip[(t.sign, t.chip)].add((t.vertex, t.edge))
        for (sign, v, e), chips in sorted(by_edge.items()):
            if len(chips) > 1:
                req = R.UNIQUE_DEPARTURE_PER_EDGE if sign < 0 else R.UNIQUE_ARRIVAL_PER_EDGE
                bad(req, i, (v, e), f"chips {sorted(chips)}")
        for (sign, j), places in sorted(by_chip.items()):
            if len(places) > 1:
                req = R.UNIQUE_DEPARTURE_PER_CHIP if sign < 0 else R.UNIQUE_ARRIVAL_PER_CHIP
                bad(req, i, j, f"moves {sorted(places)}")

        for t1 in sorted(M):
            if t1.sign > 0:
                continue
            for t2 in sorted(M):
                if t2.sign < 0 or t2.chip != t1.chip:
                    continue
                e = emap.get(t1.edge)
                if not (t1.edge == t2.edge and e is not None and {e.u, e.v} == {t1.vertex, t2.vertex}
                        and t1.vertex != t2.vertex):
                    bad(R.IMMEDIATE_ARRIVAL, i, (t1, t2))

        for t in sorted(M):
            j = t.chip
            prev = previous_index(j, i)
            if t.sign < 0:
                if prev is None:
                    if c.start.k < j or c.start.where(j) != t.vertex:
                        bad(R.DEPARTURE_LOCATION, i, t, "chip does not start here")
                elif not any(s.chip == j and s.sign > 0 and s.vertex == t.vertex for s in pairs[prev - 1].M):
                    bad(R.DEPARTURE_LOCATION, i, t, f"chip did not arrive here at pair {prev}")
            else:
                if any(s.chip == j and s.sign < 0 and s.edge == t.edge and s.vertex != t.vertex for s in M):
                    continue
                ok = prev is not None and any(
                    s.chip == j and s.sign < 0 and s.edge == t.edge and s.vertex != t.vertex
                    for s in pairs[prev - 1].M
                ) and MoveTuple(t.vertex, j, 1, t.edge) not in pairs[prev - 1].M
                if not ok:
                    bad(R.ARRIVAL_LOCATION, i, t)

    # outgoing edges: a departure now, or an earlier departure still in transit
    departures: Dict[Tuple[str, str], List[Tuple[int, int]]] = defaultdict(list)
    arrivals = set()
    for i, p in enumerate(pairs, start=1):
        for t in p.M:
            if t.sign < 0:
                departures[(t.vertex, t.edge)].append((i, t.chip))
            else:
                arrivals.add((t.vertex, t.chip, t.edge, i))
    for i, p in enumerate(pairs, start=1):
        A = p.A
        for x, e in g.cut_edges(A):
            y = e.other(x)
            if any(t.sign < 0 and t.vertex == x and t.edge == e.id for t in p.M):
                continue
            in_transit = any(
                all((y, j, e.id, i2) not in arrivals for i2 in range(i1, i))
                for i1, j in departures.get((x, e.id), []) if i1 < i
            )
            if not in_transit:
                bad(R.OUTGOING_EDGES, i, (x, e.id))

    for i in range(1, a_w):
        cur, nxt = pairs[i - 1], pairs[i]
        for t in sorted(nxt.M):
            if t.sign < 0 and t.vertex in cur.A and t.vertex in nxt.A:
                if not any(s.sign < 0 and s.vertex == t.vertex and s.edge == t.edge and s.chip != t.chip
                           for s in cur.M):
                    bad(R.PREVIOUS_DEPARTURE, i + 1, t)
        for t in sorted(cur.M):
            if t.sign > 0 and t.vertex not in cur.A and t.vertex not in nxt.A:
                if not any(s.sign > 0 and s.vertex == t.vertex and s.edge == t.edge and s.chip != t.chip
                           for s in nxt.M):
                    bad(R.NEXT_ARRIVAL, i, t)

    if not _reaches_target(c, w, pairs):
        bad(R.REACH_ALL_VERTICES, detail="no chip on the target at the end")
    return found


def _reaches_target(c: PartialCertificate, w: str, pairs: Sequence[Pair]) -> bool:
    leaves_w = defaultdict(list)
    for i, p in enumerate(pairs, start=1):
        for t in p.M:
            if t.sign < 0 and t.vertex == w:
                leaves_w[t.chip].append(i)
    for i, p in enumerate(pairs, start=1):
        for t in p.M:
            if t.sign > 0 and t.vertex == w and not any(i2 >= i for i2 in leaves_w[t.chip]):
                return True
    return any(v == w and not leaves_w[j] for j, v in enumerate(c.start.location, start=1))
