"""Divisors, set firing, and reachability.

Two independent routes answer "does D reach v": :func:`reaches_bruteforce`
explores the whole equivalence class by firing arbitrary valid sets, and
:func:`reaches` reduces D at v with Dhar's burning algorithm.  The first is
the oracle for the second.

Hot loops work on integer vectors indexed by ``Multigraph.vertices``.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .multigraph import Multigraph

DEFAULT_STATE_CAP = 10 ** 6


class InvalidSetError(ValueError):
    """A fired set was not valid; ``index`` is 1-based within its script."""

    def __init__(self, index: int, vertex: str, message: str = ""):
        self.index = index
        self.vertex = vertex
        super().__init__(message or f"set {index} is not valid: vertex {vertex!r} has too few chips")


class StateCapExceeded(RuntimeError):
    pass


class Divisor(Mapping[str, int]):
    """An effective divisor: a chip count per vertex.

    Missing vertices hold zero chips; zero entries are not stored, so two
    divisors compare equal whenever their non-zero counts agree.
    """

    __slots__ = ("_counts",)

    def __init__(self, counts: Mapping[str, int] = ()):
        items = dict(counts)
        for v, c in items.items():
            if not isinstance(c, int) or c < 0:
                raise ValueError(f"chip count on {v!r} must be a non-negative integer, got {c!r}")
        self._counts = {v: c for v, c in items.items() if c}

    def __getitem__(self, v: str) -> int:
        return self._counts.get(v, 0)

    def __iter__(self):
        return iter(self._counts)

    def __len__(self):
        return len(self._counts)

    def __contains__(self, v):
        return v in self._counts

    def __eq__(self, other):
        if isinstance(other, Divisor):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self._counts == {v: c for v, c in other.items() if c}
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._counts.items()))

    def __repr__(self):
        return f"Divisor({self._counts!r})"

    @property
    def degree(self) -> int:
        return sum(self._counts.values())

    def vector(self, g: Multigraph) -> List[int]:
        ix = g.index
        vec = [0] * len(ix)
        for v, c in self._counts.items():
            if v not in ix:
                raise KeyError(f"unknown vertex {v!r}")
            vec[ix[v]] = c
        return vec

    @classmethod
    def from_vector(cls, g: Multigraph, vec: Sequence[int]) -> "Divisor":
        return cls({v: c for v, c in zip(g.vertices, vec) if c})

    def to_json(self) -> dict:
        return {"counts": dict(sorted(self._counts.items()))}

    @classmethod
    def from_json(cls, data: Mapping) -> "Divisor":
        return cls({str(v): int(c) for v, c in data["counts"].items()})


class LabeledDivisor(NamedTuple):
    """Chip ``j`` (1-based) sits on ``location[j - 1]``."""

    location: Tuple[str, ...]

    @classmethod
    def canonical(cls, d: Divisor, order: Sequence[str]) -> "LabeledDivisor":
        """Label chips by vertex order, then 1..multiplicity on each vertex."""
        rank = {v: i for i, v in enumerate(order)}
        return cls(tuple(v for v in sorted(d, key=rank.__getitem__) for _ in range(d[v])))

    @property
    def k(self) -> int:
        return len(self.location)

    def where(self, chip: int) -> str:
        return self.location[chip - 1]

    def unlabeled(self) -> Divisor:
        counts: Dict[str, int] = {}
        for v in self.location:
            counts[v] = counts.get(v, 0) + 1
        return Divisor(counts)

    def to_json(self) -> dict:
        return {"chips": {str(j): v for j, v in enumerate(self.location, start=1)}}

    @classmethod
    def from_json(cls, data: Mapping) -> "LabeledDivisor":
        chips = {int(j): str(v) for j, v in data["chips"].items()}
        if sorted(chips) != list(range(1, len(chips) + 1)):
            raise ValueError("chip labels must be exactly 1..k")
        return cls(tuple(chips[j] for j in range(1, len(chips) + 1)))


class FiringScript(tuple):
    """An increasing sequence of non-empty vertex sets."""

    def __new__(cls, sets: Iterable[Iterable[str]] = ()):
        frozen = tuple(frozenset(a) for a in sets)
        for i, a in enumerate(frozen):
            if not a:
                raise ValueError(f"set {i + 1} is empty")
            if i and not frozen[i - 1] <= a:
                raise ValueError(f"set {i + 1} does not contain set {i}")
        return super().__new__(cls, frozen)

    def __repr__(self):
        return f"FiringScript({[sorted(a) for a in self]!r})"

    def to_json(self) -> list:
        return [sorted(a) for a in self]


# -- single firings ----------------------------------------------------------

def _check_vertices(g: Multigraph, a) -> None:
    for x in a:
        if x not in g.index:
            raise KeyError(f"unknown vertex {x!r}")


def is_valid_set(g: Multigraph, d: Mapping[str, int], a) -> bool:
    """Whether every vertex of ``a`` holds at least as many chips as edges leave ``a`` from it."""
    a = frozenset(a)
    _check_vertices(g, a)
    for x in a:
        out = sum(1 for e in g.incident[x] if e.other(x) not in a)
        if d.get(x, 0) < out:
            return False
    return True


def fire_set(g: Multigraph, d: Mapping[str, int], a) -> Divisor:
    a = frozenset(a)
    _check_vertices(g, a)
    counts = dict(d)
    for x, e in g.cut_edges(a):
        y = e.other(x)
        counts[x] = counts.get(x, 0) - 1
        counts[y] = counts.get(y, 0) + 1
    for x in a:
        if counts.get(x, 0) < 0:
            raise InvalidSetError(1, x)
    return Divisor(counts)


def run_script(g: Multigraph, d: Mapping[str, int], script: Sequence) -> List[Divisor]:
    """Replay ``script`` from ``d`` and return ``[D_0, ..., D_r]``."""
    if not isinstance(script, FiringScript):
        script = FiringScript(script)
    full = len(g.vertices)
    traj = [Divisor(d)]
    for i, a in enumerate(script, start=1):
        if len(a) >= full:
            raise ValueError(f"set {i} is the whole vertex set")
        try:
            traj.append(fire_set(g, traj[-1], a))
        except InvalidSetError as exc:
            raise InvalidSetError(i, exc.vertex) from None
    return traj


def firing_vector_of(g: Multigraph, script: Sequence) -> Dict[str, int]:
    """How many times each vertex fires in ``script``."""
    f = {v: 0 for v in g.vertices}
    for a in script:
        for x in a:
            f[x] += 1
    return f


def level_sets(g: Multigraph, f: Mapping[str, int]) -> FiringScript:
    """The level set decomposition of the firing vector ``f``.

    ``f`` is shifted so its minimum is zero; set ``i`` is every vertex whose
    value is at least ``max - i + 1``.  Firing these sets in order realises
    the same transformation, and is legal whenever the start and end
    divisors are both effective.
    """
    lo = min(f[v] for v in g.vertices)
    shifted = {v: f[v] - lo for v in g.vertices}
    top = max(shifted.values())
    return FiringScript(
        frozenset(v for v in g.vertices if shifted[v] >= level) for level in range(top, 0, -1)
    )


# -- vector engine -----------------------------------------------------------

def _apply(nbrs, deg, vec: List[int], members: Sequence[int], inside, times: int = 1) -> None:
    for x in members:
        out = 0
        for y, m in nbrs[x]:
            if not inside[y]:
                out += m
                vec[y] += m * times
        vec[x] -= out * times


def _dhar_unburnt(nbrs, vec: Sequence[int], q: int) -> Tuple[List[int], List[int]]:
    """Run the burning process from ``q``; return unburnt vertices and their edges into the fire."""
    n = len(vec)
    burnt = [False] * n
    burnt[q] = True
    heat = [0] * n
    stack = [q]
    while stack:
        x = stack.pop()
        for y, m in nbrs[x]:
            if not burnt[y]:
                heat[y] += m
                if heat[y] > vec[y]:
                    burnt[y] = True
                    stack.append(y)
    unburnt = [i for i in range(n) if not burnt[i]]
    return unburnt, heat


def is_reduced_vector(nbrs, vec: Sequence[int], q: int) -> bool:
    return not _dhar_unburnt(nbrs, vec, q)[0]


def reduce_vector(nbrs, vec: Sequence[int], q: int) -> Tuple[List[int], List[int]]:
    """q-reduce an effective divisor vector; also return the firing vector used."""
    vec = list(vec)
    n = len(vec)
    f = [0] * n
    while True:
        unburnt, heat = _dhar_unburnt(nbrs, vec, q)
        if not unburnt:
            return vec, f
        # the unburnt set stays legal until some member runs short
        times = min(vec[x] // heat[x] for x in unburnt if heat[x])
        inside = [False] * n
        for x in unburnt:
            inside[x] = True
            f[x] += times
        _apply(nbrs, None, vec, unburnt, inside, times)


def reaches_vector(nbrs, vec: Sequence[int], q: int) -> bool:
    if vec[q] > 0:
        return True
    return reduce_vector(nbrs, vec, q)[0][q] > 0


def reaches_all_vector(nbrs, vec: Sequence[int], order: Optional[Iterable[int]] = None) -> bool:
    for q in (order if order is not None else range(len(vec))):
        if not reaches_vector(nbrs, vec, q):
            return False
    return True


def reduce_at(g: Multigraph, d: Mapping[str, int], q: str) -> Divisor:
    """The q-reduced divisor equivalent to ``d``."""
    vec, _ = reduce_vector(g.neighbours, Divisor(d).vector(g), g.index[q])
    return Divisor.from_vector(g, vec)


def reaches(g: Multigraph, d: Mapping[str, int], v: str) -> bool:
    return reduce_at(g, d, v)[v] > 0


def reduction_script(g: Multigraph, d: Mapping[str, int], q: str) -> Tuple[Divisor, FiringScript]:
    """The q-reduced form of ``d`` and a monotone script reaching it."""
    vec, f = reduce_vector(g.neighbours, Divisor(d).vector(g), g.index[q])
    return Divisor.from_vector(g, vec), level_sets(g, dict(zip(g.vertices, f)))


# -- brute force oracle ------------------------------------------------------

class _MaskTable:
    """Per proper non-empty subset: the chip change caused by firing it."""

    def __init__(self, g: Multigraph):
        n = len(g.vertices)
        if n > 16:
            raise StateCapExceeded(f"brute force over {n} vertices is not supported")
        nbrs = g.neighbours
        self.n = n
        self.masks = list(range(1, (1 << n) - 1))
        self.delta = {}
        for mask in self.masks:
            inside = [(mask >> i) & 1 == 1 for i in range(n)]
            vec = [0] * n
            _apply(nbrs, None, vec, [i for i in range(n) if inside[i]], inside)
            self.delta[mask] = tuple(vec)


def _step(vec, delta):
    out = tuple(a + b for a, b in zip(vec, delta))
    return out if min(out) >= 0 else None


def equivalence_class(g: Multigraph, d: Mapping[str, int], *, cap: int = DEFAULT_STATE_CAP,
                      table: Optional[_MaskTable] = None) -> List[Tuple[int, ...]]:
    """All effective divisor vectors reachable from ``d`` by valid set firings.

    Breadth-first; successors are generated in increasing subset order and
    the result is sorted lexicographically.
    """
    table = table or _MaskTable(g)
    start = tuple(Divisor(d).vector(g))
    seen = {start}
    todo = deque([start])
    while todo:
        cur = todo.popleft()
        for mask in table.masks:
            nxt = _step(cur, table.delta[mask])
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                if len(seen) > cap:
                    raise StateCapExceeded(f"more than {cap} divisor states")
                todo.append(nxt)
    return sorted(seen)


def reaches_bruteforce(g: Multigraph, d: Mapping[str, int], v: str, *,
                       cap: int = DEFAULT_STATE_CAP, monotone: bool = False) -> bool:
    """Exhaustive search for an equivalent divisor with a chip on ``v``.

    With ``monotone=True`` only increasing firing sequences are explored.
    """
    q = g.index[v]
    table = _MaskTable(g)
    if not monotone:
        return any(vec[q] > 0 for vec in equivalence_class(g, d, cap=cap, table=table))
    full = (1 << table.n) - 1
    start = (tuple(Divisor(d).vector(g)), 0)
    if start[0][q] > 0:
        return True
    seen = {start}
    todo = deque([start])
    while todo:
        cur, last = todo.popleft()
        for mask in table.masks:
            if mask & last != last or mask == full:
                continue
            nxt = _step(cur, table.delta[mask])
            if nxt is None:
                continue
            if nxt[q] > 0:
                return True
            state = (nxt, mask)
            if state not in seen:
                seen.add(state)
                if len(seen) > cap:
                    raise StateCapExceeded(f"more than {cap} search states")
                todo.append(state)
    return False


def reaches_all_bruteforce(g: Multigraph, d: Mapping[str, int], *, cap: int = DEFAULT_STATE_CAP) -> bool:
    cls = equivalence_class(g, d, cap=cap)
    return all(any(vec[i] > 0 for vec in cls) for i in range(len(g.vertices)))


# -- divisorial gonality -----------------------------------------------------

def weak_compositions(k: int, n: int) -> Iterator[Tuple[int, ...]]:
    """All length-``n`` vectors of non-negative integers summing to ``k``, lexicographically."""
    if n == 0:
        if k == 0:
            yield ()
        return
    if n == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in weak_compositions(k - first, n - 1):
            yield (first,) + rest


class GonalityResult(NamedTuple):
    """``value`` is None when no witness exists within the caps; ``binding`` names the cap."""

    value: Optional[int]
    divisor: Optional[Divisor] = None
    lengths: Optional[Dict[str, int]] = None
    binding: Optional[str] = None

    @property
    def exceeded(self) -> bool:
        return self.value is None


def find_divisor(g: Multigraph, k: int, *, method: str = "reduce", pruning: Optional[str] = None,
                 cross_check: bool = False) -> Optional[Divisor]:
    """The lexicographically least degree-``k`` divisor reaching every vertex, if any.

    ``pruning="reduced"`` restricts the candidates to divisors reduced at the
    first vertex with a chip there: every class that reaches all vertices
    has exactly one such member, so the answer's existence is unchanged but
    the witness returned is the least reduced one.
    """
    n = len(g.vertices)
    nbrs = g.neighbours
    if method == "bruteforce":
        table = _MaskTable(g)
        for vec in _candidates(k, n, pruning, nbrs):
            cls = equivalence_class(g, Divisor.from_vector(g, vec), table=table)
            if all(any(c[i] > 0 for c in cls) for i in range(n)):
                return Divisor.from_vector(g, vec)
        return None
    if method != "reduce":
        raise ValueError(f"unknown method {method!r}")
    # vertices far from the chips tend to fail first
    order = list(range(n - 1, -1, -1))
    for vec in _candidates(k, n, pruning, nbrs):
        ok = reaches_all_vector(nbrs, vec, order)
        if cross_check:
            slow = reaches_all_bruteforce(g, Divisor.from_vector(g, vec))
            if slow != ok:
                raise AssertionError(f"oracle disagreement on {vec}")
        if ok:
            return Divisor.from_vector(g, vec)
    return None


def _candidates(k, n, pruning, nbrs):
    if pruning is None:
        yield from weak_compositions(k, n)
        return
    if pruning != "reduced":
        raise ValueError(f"unknown pruning {pruning!r}")
    if k == 0:
        return
    for rest in weak_compositions(k - 1, n):
        vec = list(rest)
        vec[0] += 1
        if is_reduced_vector(nbrs, vec, 0):
            yield vec


def dgon(g: Multigraph, k_max: int, *, method: str = "reduce", pruning: Optional[str] = None,
         cross_check: bool = False) -> GonalityResult:
    """Divisorial gonality of ``g`` if it is at most ``k_max``."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    for k in range(1, k_max + 1):
        d = find_divisor(g, k, method=method, pruning=pruning, cross_check=cross_check)
        if d is not None:
            return GonalityResult(k, d)
    return GonalityResult(None, binding="k_max")
