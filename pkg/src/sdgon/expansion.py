"""Rebuild a subdivision and full firing scripts from a certificate and an ILP solution."""

from __future__ import annotations

from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .certificate import PairSequence, PartialCertificate
from .chip_firing import Divisor, FiringScript, InvalidSetError, fire_set, reaches, reduce_at
from .ilp import EdgeTransit, l_var, t_var, transit_windows
from .multigraph import Multigraph, SubdivisionMap, subdivide


class ScheduleError(ValueError):
    """The transit inequalities fail for the given lengths and counts."""


def replicate_sets(seq: PairSequence, t: Mapping[int, int]) -> List[Tuple[int, frozenset]]:
    """Copy pair ``i`` ``t[i]`` times (the last pair once).

    Returns ``(pair index, base vertices)`` per expanded set.
    """
    out = []
    n = len(seq.pairs)
    for i, pair in enumerate(seq.pairs, start=1):
        copies = 1 if i == n else t[i]
        if copies < 1:
            raise ValueError(f"t[{i}] must be at least 1, got {copies}")
        out.extend([(i, pair.A)] * copies)
    return out


def staircase(p: int, q: int, total: int, l: int) -> List[int]:
    """Interior prefix lengths for a window of ``total`` sets.

    ``p`` chips leave the tail, ``q`` of them reach the head after ``l``
    steps each.  Prefix ``0`` sets are the departures and prefix ``l - 1``
    sets the arrivals; the widths never increase, so every fired prefix
    end holds a chip.
    """
    if p < 1 or q < 0 or q > p or l < 1:
        raise ScheduleError(f"bad window shape p={p} q={q} l={l}")
    if q:
        if not (q * l + (p - q) <= total <= p * l - (p - q)):
            raise ScheduleError(f"window of {total} sets does not fit p={p}, q={q}, l={l}")
    elif total > p * (l - 1):
        raise ScheduleError(f"open window of {total} sets would deliver a chip (p={p}, l={l})")
    r = total - q * l
    K = r // (p - q) if p > q else 0
    widths = [p] * K
    if K < l:
        widths.append(q + r - (p - q) * K)
    widths.extend([q] * (l - 1 - K))
    out = []
    for prefix, w in enumerate(widths[:l]):
        out.extend([prefix] * w)
    assert len(out) == total, (p, q, total, l)
    return out


def window_span(tr: EdgeTransit, starts: Sequence[int], n_sets: int) -> Tuple[int, int]:
    """0-based ``[first, stop)`` range of expanded sets covered by a window.

    ``starts[i]`` is the first expanded index of pair ``i`` (1-based
    pairs, with ``starts[a_w + 1] == n_sets``).
    """
    first = starts[tr.i0]
    if not tr.is_open:
        stop = starts[tr.i3 + 1]
    elif tr.end is not None:
        stop = starts[tr.end]
    else:
        stop = n_sets
    return first, stop


def schedule_interior(tr: EdgeTransit, l_e: int, total: int) -> List[int]:
    return staircase(tr.p, tr.q, total, l_e)


def _target_script(base: Multigraph, hmap: SubdivisionMap, seq: PairSequence,
                   t: Mapping[int, int]) -> FiringScript:
    sets = replicate_sets(seq, t)
    if not sets:
        return FiringScript()
    starts = [0] * (len(seq.pairs) + 2)
    for j, (i, _) in reversed(list(enumerate(sets))):
        starts[i] = j
    starts[len(seq.pairs) + 1] = len(sets)
    built = [set(a) for _, a in sets]
    windows: Dict[str, EdgeTransit] = {}
    for tr in transit_windows(base, seq):
        if tr.edge in windows:
            raise ScheduleError(f"edge {tr.edge!r} carries chips both ways for target {seq.target!r}")
        windows[tr.edge] = tr
    for e in base.edges:
        path = hmap.paths[e.id]
        inner = path.interior
        if not inner:
            continue
        tr = windows.get(e.id)
        span = window_span(tr, starts, len(sets)) if tr else (0, 0)
        if tr:
            prefixes = schedule_interior(tr, len(inner) + 1, span[1] - span[0])
            forward = tr.tail == path.vertices[0]
        for j, (_, a) in enumerate(sets):
            if span[0] <= j < span[1]:
                c = prefixes[j - span[0]]
                built[j].update(inner[:c] if forward else inner[len(inner) - c:])
            elif e.u in a and e.v in a:
                built[j].update(inner)
    return FiringScript(built)


def expand_certificate(base: Multigraph, c: PartialCertificate, a: Mapping[str, int]
                       ) -> Tuple[SubdivisionMap, Dict[str, FiringScript]]:
    """Subdivide ``base`` by the ``l`` values and expand every target sequence."""
    hmap = subdivide(base, {e.id: a[l_var(e.id)] for e in base.edges})
    scripts = {}
    for w in base.vertices:
        seq = c.sequence(w)
        t = {i: a[t_var(w, i)] for i in range(1, len(seq.pairs) + 1)}
        scripts[w] = _target_script(base, hmap, seq, t)
    return hmap, scripts


# -- verification ----------------------------------------------------------------

class ExpansionReport(NamedTuple):
    ok: bool
    reason: Optional[str] = None
    target: Optional[str] = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def verify_expansion(hmap: SubdivisionMap, start: Mapping[str, int], scripts: Mapping[str, Sequence],
                     *, exact_fallback: bool = True) -> ExpansionReport:
    """Replay every script and check that all vertices of ``H`` are reached.

    Base vertices must be reached by their own script.  An interior vertex
    counts as reached when some replayed divisor puts a chip on it, or some
    divisor equivalent to ``start`` has chips on both ends of its original
    edge ``uv`` (the chips can then be walked inwards from both sides).  The
    latter holds iff the final divisor of u's script, minus that chip on
    ``u``, still reaches ``v``.  Reachable vertices can lack both kinds of
    evidence, so by default (``exact_fallback``) such a vertex is decided
    by reduction on ``H``; pass False to rely on the evidence alone.
    """
    h = hmap.derived
    start = Divisor(start)
    seen = set(start)
    both = set()
    ends = {eid: (p.vertices[0], p.vertices[-1]) for eid, p in hmap.paths.items() if p.interior}

    def note(d: Divisor):
        seen.update(d)
        for eid, (u, v) in ends.items():
            if d[u] and d[v]:
                both.add(eid)

    note(start)
    finals: Dict[str, Divisor] = {}
    for w in hmap.origin.vertices:
        d = start
        for i, a in enumerate(scripts.get(w, ()), start=1):
            try:
                d = fire_set(h, d, a)
            except InvalidSetError as exc:
                return ExpansionReport(False, "invalid-set", w, f"set {i}: {exc}")
            note(d)
        if d[w] < 1:
            return ExpansionReport(False, "target-unreached", w, f"final divisor {dict(d)}")
        finals[w] = d
    for eid, p in hmap.paths.items():
        if eid in both or _covers_both(h, finals, *ends.get(eid, (None, None))):
            continue
        for x in p.interior:
            if x in seen:
                continue
            if exact_fallback and reduce_at(h, start, x)[x] >= 1:
                continue
            return ExpansionReport(False, "unreached-interior", x, f"no evidence along edge {eid!r}")
    return ExpansionReport(True)


def _covers_both(h: Multigraph, finals: Mapping[str, Divisor], u, v) -> bool:
    if u is None or u not in finals:
        return False
    rest = dict(finals[u])
    rest[u] -= 1
    return reaches(h, rest, v)


def replay_matches(base: Multigraph, c: PartialCertificate, hmap: SubdivisionMap,
                   scripts: Mapping[str, Sequence]) -> bool:
    """Whether replaying ``scripts`` records exactly the certificate's pairs."""
    from .witness import extract_relevant, track_moves

    start = c.start.unlabeled()
    vs = frozenset(base.vertices)
    for w in base.vertices:
        script = scripts.get(w, FiringScript())
        events, _ = track_moves(hmap, c.start, script)
        got = [(frozenset(script[i - 1]) & vs, events[i - 1]) for i in extract_relevant(hmap, start, script)]
        want = [(p.A, p.M) for p in c.sequence(w).pairs]
        if got != want:
            return False
    return True
